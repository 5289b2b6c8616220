//! An intercept-resend attacker on the forward leg, and a flipping attacker
//! on the way back. Both show up in the checks.

use qsdc::codec::Bits;
use qsdc::protocol::Eavesdropper;
use qsdc::rng::derive_seed;
use qsdc::{run_block, BlockConfig, Verdict};

fn main() {
    for eve in [Eavesdropper::None, Eavesdropper::InterceptResendForward, Eavesdropper::FlipBackward] {
        let (mut errors, mut checked, mut aborted) = (0usize, 0usize, 0usize);
        let blocks = 200;
        for k in 0..blocks {
            let mut cfg = BlockConfig::operating_point(derive_seed(3, &[k]));
            cfg.eavesdropper = eve;
            let t = run_block(&cfg, &Bits::from_value(k as u128 % 16, 4)).unwrap();
            let check = match eve {
                Eavesdropper::FlipBackward => t.backward_check.and_then(|c| c.result),
                _ => t.forward_check.result,
            };
            if let Some(r) = check {
                errors += r.mismatches;
                checked += r.sampled;
            }
            aborted += usize::from(matches!(t.verdict, Verdict::AbortedForward | Verdict::AbortedBackward));
        }
        println!(
            "{eve:?}: check QBER {:.4} over {checked} bits, {aborted}/{blocks} blocks aborted",
            errors as f64 / checked.max(1) as f64
        );
    }
}
