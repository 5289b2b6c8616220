//! What `I` and `U` do to the four BB84 states, and why Alice can read a
//! flip without knowing anything but her own preparation basis.

use qsdc::quantum::{apply, measure, Basis, FlipOp, PhotonState};
use qsdc::rng::seeded;

fn label(s: PhotonState) -> String {
    let ket = match (s.basis, s.bit) {
        (Basis::Z, 0) => "|0>",
        (Basis::Z, _) => "|1>",
        (Basis::X, 0) => "|+>",
        (Basis::X, _) => "|->",
    };
    if s.sign.value() < 0 {
        format!("-{ket}")
    } else {
        ket.to_string()
    }
}

fn main() {
    let mut rng = seeded(1);
    for s in PhotonState::all() {
        let u = apply(FlipOp::Flip, s);
        let uu = apply(FlipOp::Flip, u);
        println!("U {:>4} = {:>4}    U U {:>4} = {:>4}", label(s), label(u), label(s), label(uu));
    }

    // Same-basis measurement after U always disagrees with the prepared bit.
    let mut disagree = 0;
    for s in PhotonState::all().into_iter().cycle().take(1000) {
        disagree += usize::from(measure(apply(FlipOp::Flip, s), s.basis, &mut rng) != s.bit);
    }
    println!("flips read correctly: {disagree}/1000");
}
