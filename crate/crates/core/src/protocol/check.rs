//! Eavesdropping checks on the forward and backward legs.

use serde::Serialize;
use thiserror::Error;

use crate::quantum::{Basis, FlipOp, PhotonState};

/// No comparable events were available, so no error rate exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no usable check samples")]
pub struct InsufficientSamples;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckResult {
    pub sampled: usize,
    pub mismatches: usize,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub qber: f64,
    pub pass: bool,
}

impl CheckResult {
    pub fn from_counts(
        sampled: usize,
        mismatches: usize,
        error_threshold: f64,
    ) -> Result<Self, InsufficientSamples> {
        if sampled == 0 {
            return Err(InsufficientSamples);
        }
        let qber = mismatches as f64 / sampled as f64;
        Ok(Self {
            sampled,
            mismatches,
            qber,
            pass: qber <= error_threshold,
        })
    }
}

/// A photon Bob measured for the forward check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BobSample {
    pub position: usize,
    pub basis: Basis,
    pub outcome: u8,
}

/// Compares Bob's announced results with Alice's preparations. Samples in
/// the other basis carry no information and are left out of the count.
pub fn forward_check(
    alice_states: &[PhotonState],
    bob_samples: &[BobSample],
    error_threshold: f64,
) -> Result<CheckResult, InsufficientSamples> {
    let (sampled, mismatches) = bob_samples
        .iter()
        .filter_map(|s| {
            let prepared = alice_states[s.position];
            (prepared.basis == s.basis).then_some(prepared.bit != s.outcome)
        })
        .fold((0, 0), |(n, m), wrong| (n + 1, m + usize::from(wrong)));
    CheckResult::from_counts(sampled, mismatches, error_threshold)
}

/// A check photon on the way back: Bob's disclosed operation and Alice's
/// flip bit, `None` if the photon was lost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BackwardSample {
    pub position: usize,
    pub op: FlipOp,
    pub flipped: Option<bool>,
}

/// Alice's flip bit must equal `op == U`. Lost photons are erasures and are
/// not counted.
pub fn backward_check(
    samples: &[BackwardSample],
    error_threshold: f64,
) -> Result<CheckResult, InsufficientSamples> {
    let (sampled, mismatches) = samples
        .iter()
        .filter_map(|s| s.flipped.map(|x| x != s.op.is_flip()))
        .fold((0, 0), |(n, m), wrong| (n + 1, m + usize::from(wrong)));
    CheckResult::from_counts(sampled, mismatches, error_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{measure, prepare_random};
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn clean_forward_check() {
        let mut rng = seeded(41);
        let states: Vec<_> = (0..1000).map(|_| prepare_random(&mut rng)).collect();
        let samples: Vec<_> = states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let basis = Basis::random(&mut rng);
                BobSample { position: i, basis, outcome: measure(*s, basis, &mut rng) }
            })
            .collect();
        let r = forward_check(&states, &samples, 0.05).unwrap();
        assert_eq!(r.mismatches, 0);
        assert_eq!(r.qber, 0.0);
        assert!(r.pass);
        // Roughly half the samples share Alice's basis.
        assert!((400..600).contains(&r.sampled));
    }

    #[test]
    fn mismatched_bases_are_excluded() {
        let states = [PhotonState::new(Basis::Z, 0), PhotonState::new(Basis::X, 1)];
        let samples = [
            BobSample { position: 0, basis: Basis::X, outcome: 1 },
            BobSample { position: 1, basis: Basis::Z, outcome: 0 },
        ];
        assert_eq!(forward_check(&states, &samples, 0.1), Err(InsufficientSamples));
        assert_eq!(forward_check(&states, &[], 0.1), Err(InsufficientSamples));
    }

    #[test]
    fn forward_noise_shows_up_as_qber() {
        let mut rng = seeded(42);
        let e = 0.005;
        let n = 200_000;
        let states: Vec<_> = (0..n).map(|_| prepare_random(&mut rng)).collect();
        let samples: Vec<_> = states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let basis = s.basis;
                let noisy = rng.random::<f64>() < e;
                BobSample { position: i, basis, outcome: s.bit ^ u8::from(noisy) }
            })
            .collect();
        let r = forward_check(&states, &samples, 0.05).unwrap();
        let sigma = (e * (1.0 - e) / n as f64).sqrt();
        assert!((r.qber - e).abs() < 3.0 * sigma, "{}", r.qber);
    }

    #[test]
    fn intercept_resend_disturbance_is_a_quarter() {
        // Enumerate: Eve's basis (2) × Eve's outcome (2) over all 4 states.
        let mut error_weight = 0.0;
        for s in PhotonState::all() {
            for eve in Basis::ALL {
                for eve_bit in 0..=1u8 {
                    let p_eve = if eve == s.basis {
                        f64::from(u8::from(eve_bit == s.bit))
                    } else {
                        0.5
                    };
                    let resent = PhotonState::new(eve, eve_bit);
                    // Bob measures in Alice's basis (only those samples count).
                    let p_one = resent.prob_one(s.basis);
                    let p_wrong = if s.bit == 0 { p_one } else { 1.0 - p_one };
                    error_weight += 0.25 * 0.5 * p_eve * p_wrong;
                }
            }
        }
        assert!((error_weight - 0.25).abs() < 1e-15);
    }

    #[test]
    fn backward_check_counts_only_arrivals() {
        let samples = [
            BackwardSample { position: 0, op: FlipOp::Flip, flipped: Some(true) },
            BackwardSample { position: 1, op: FlipOp::Identity, flipped: Some(true) },
            BackwardSample { position: 2, op: FlipOp::Identity, flipped: None },
            BackwardSample { position: 3, op: FlipOp::Identity, flipped: Some(false) },
        ];
        let r = backward_check(&samples, 0.5).unwrap();
        assert_eq!((r.sampled, r.mismatches), (3, 1));
        assert!(r.pass);
        assert!(!backward_check(&samples, 0.3).unwrap().pass);
        assert_eq!(backward_check(&samples[2..3], 0.1), Err(InsufficientSamples));
    }

    #[test]
    fn flipping_every_photon_gives_qber_one() {
        let mut rng = seeded(43);
        let samples: Vec<_> = (0..1000)
            .map(|i| {
                let op = FlipOp::random(&mut rng);
                BackwardSample { position: i, op, flipped: Some(!op.is_flip()) }
            })
            .collect();
        let r = backward_check(&samples, 0.05).unwrap();
        assert_eq!(r.qber, 1.0);
        assert!(!r.pass);
    }
}
