//! Weak-coherent source, fiber loss, detector efficiency and bit-flip noise.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Terms of the photon-number distribution below this are dropped from sums.
pub const PMF_CUTOFF: f64 = 1e-15;

/// Above this value of `μ·η_det·η` the linearised detection probability
/// drifts from the exact one.
pub const LINEARISATION_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("mean photon number must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("invalid channel parameter `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

/// Physical parameters of the two-way link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// Mean photon number per pulse.
    pub mu: f64,
    /// Fiber loss coefficient in dB/km.
    pub alpha_db_per_km: f64,
    /// Alice to Bob distance in km.
    pub l1_km: f64,
    /// Bob's delay-line length in km.
    pub l2_km: f64,
    /// Detector quantum efficiency.
    pub eta_det: f64,
    /// Channel bit error rate.
    pub error_rate: f64,
    /// Fraction of photons used for eavesdropping checks on each leg.
    pub check_fraction: f64,
    /// Pulse repetition frequency in Hz.
    pub f_rep_hz: f64,
}

impl ChannelParams {
    /// Validates the ranges the protocol relies on. Keys in errors use the
    /// serialised field names.
    pub fn validate(&self) -> Result<(), ChannelError> {
        fn bad(key: &'static str, reason: impl Into<String>) -> Result<(), ChannelError> {
            Err(ChannelError::Invalid {
                key,
                reason: reason.into(),
            })
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu", format!("must be a positive finite number, got {}", self.mu));
        }
        if !(self.alpha_db_per_km >= 0.0 && self.alpha_db_per_km.is_finite()) {
            return bad("alpha_db_per_km", "must be >= 0");
        }
        if !(self.l1_km >= 0.0 && self.l1_km.is_finite()) {
            return bad("l1_km", "must be >= 0");
        }
        if !(self.l2_km >= 0.0 && self.l2_km.is_finite()) {
            return bad("l2_km", "must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.eta_det) {
            return bad("eta_det", "must lie in [0, 1]");
        }
        if !(0.0..0.5).contains(&self.error_rate) {
            return bad("error_rate", "must lie in [0, 0.5)");
        }
        if !(self.check_fraction > 0.0 && self.check_fraction <= 0.5) {
            return bad(
                "check_fraction",
                format!("must be positive and at most 1/2, got {}", self.check_fraction),
            );
        }
        if !(self.f_rep_hz > 0.0 && self.f_rep_hz.is_finite()) {
            return bad("f_rep_hz", "must be positive");
        }
        Ok(())
    }

    /// Attenuation over the full round trip, `2·L1 + L2`.
    pub fn round_trip_transmittance(&self) -> f64 {
        fiber_transmittance(self.alpha_db_per_km, Leg::RoundTrip.length_km(self))
    }

    /// Returns a message when `μ·η_det·η` is large enough that the linearised
    /// detection probability is no longer accurate.
    pub fn linearisation_warning(&self) -> Option<String> {
        let x = self.mu * self.eta_det * self.round_trip_transmittance();
        (x > LINEARISATION_LIMIT).then(|| {
            format!(
                "mu*eta_det*eta = {x:.4} exceeds {LINEARISATION_LIMIT}; \
                 the linear detection approximation is inaccurate here"
            )
        })
    }

    /// Link used for the security boundary: η_det = 0.32, e = 0.5 %, α = 0.2 dB/km,
    /// L2 = L1, C = 1/2, 10 MHz repetition.
    pub fn boundary_link(mu: f64, l1_km: f64) -> Self {
        Self {
            mu,
            alpha_db_per_km: 0.2,
            l1_km,
            l2_km: l1_km,
            eta_det: 0.32,
            error_rate: 0.005,
            check_fraction: 0.5,
            f_rep_hz: 10e6,
        }
    }
}

/// Path segment a pulse travels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Leg {
    /// Alice to Bob, length `L1`.
    Forward,
    /// Bob's delay line and back to Alice, length `L1 + L2`.
    Backward,
    /// Whole loop, length `2·L1 + L2`.
    RoundTrip,
}

impl Leg {
    pub fn length_km(self, p: &ChannelParams) -> f64 {
        match self {
            Leg::Forward => p.l1_km,
            Leg::Backward => p.l1_km + p.l2_km,
            Leg::RoundTrip => 2.0 * p.l1_km + p.l2_km,
        }
    }

    /// The detector sits at Alice, so only legs ending there pay `η_det`.
    pub fn ends_at_detector(self) -> bool {
        !matches!(self, Leg::Forward)
    }
}

/// Per-pulse Monte Carlo record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PulseOutcome {
    pub detected: bool,
    pub flipped_by_noise: bool,
    pub slot_index: usize,
}

/// `p_n = μⁿ e^{−μ} / n!`
pub fn poisson_pmf(mu: f64, n: u32) -> Result<f64, ChannelError> {
    if !(mu > 0.0) {
        return Err(ChannelError::NonPositiveMu(mu));
    }
    // Iterated ratio p_k = p_{k-1}·μ/k avoids overflowing μⁿ and n!.
    let mut p = (-mu).exp();
    for k in 1..=n {
        p *= mu / f64::from(k);
    }
    Ok(p)
}

/// Iterates `(n, p_n)` from `n = start` until the terms fall below
/// [`PMF_CUTOFF`] past the mode.
fn poisson_terms(mu: f64, start: u32) -> impl Iterator<Item = (u32, f64)> {
    let mut p = (-mu).exp();
    let mut n = 0u32;
    std::iter::from_fn(move || {
        loop {
            let current = (n, p);
            if f64::from(n) > mu && p < PMF_CUTOFF {
                return None;
            }
            n += 1;
            p *= mu / f64::from(n);
            if current.0 >= start {
                return Some(current);
            }
        }
    })
}

/// `10^{−α·L/10}`
pub fn fiber_transmittance(alpha_db_per_km: f64, length_km: f64) -> f64 {
    10f64.powf(-alpha_db_per_km * length_km / 10.0)
}

/// Per-photon survival probability used in the detection formula,
/// `η_det · η · (1 − C)` with `η` over `2·L1 + L2`.
pub fn photon_survival(p: &ChannelParams) -> f64 {
    p.eta_det * p.round_trip_transmittance() * (1.0 - p.check_fraction)
}

/// `P = Σ_{n≥1} p_n [1 − (1 − η_det η (1−C))ⁿ]`, summed term by term.
pub fn detection_probability_exact(p: &ChannelParams) -> f64 {
    if !(p.mu > 0.0) {
        return 0.0;
    }
    let q = photon_survival(p);
    if q <= 0.0 {
        return 0.0;
    }
    let log_miss = (-q).ln_1p();
    poisson_terms(p.mu, 1)
        .map(|(n, pn)| pn * -(f64::from(n) * log_miss).exp_m1())
        .sum()
}

/// `1 − e^{−μ η_det η (1−C)}`, the closed form of the Poisson sum.
pub fn detection_probability_closed_form(p: &ChannelParams) -> f64 {
    -(-p.mu * photon_survival(p)).exp_m1()
}

/// `η_det · η · (1 − C) · μ`
pub fn detection_probability_approx(p: &ChannelParams) -> f64 {
    photon_survival(p) * p.mu
}

/// Samples photon numbers of the attenuated laser.
#[derive(Debug, Clone, Copy)]
pub struct PhotonSource {
    poisson: Poisson<f64>,
}

impl PhotonSource {
    pub fn new(mu: f64) -> Result<Self, ChannelError> {
        let poisson = Poisson::new(mu).map_err(|_| ChannelError::NonPositiveMu(mu))?;
        Ok(Self { poisson })
    }

    pub fn emit<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.poisson.sample(rng) as u64
    }
}

/// Keeps each of `photons` independently with probability `survival`.
pub fn thin<R: Rng + ?Sized>(photons: u64, survival: f64, rng: &mut R) -> u64 {
    if photons == 0 || survival <= 0.0 {
        return 0;
    }
    if survival >= 1.0 {
        return photons;
    }
    Binomial::new(photons, survival)
        .expect("survival probability lies in (0, 1)")
        .sample(rng)
}

/// Simulates one pulse over `leg`: Poisson emission, independent per-photon
/// loss (fiber, plus `η_det` when the leg ends at the detector), then a
/// bit flip with probability `e` on detected pulses.
pub fn transmit_pulse<R: Rng + ?Sized>(
    p: &ChannelParams,
    leg: Leg,
    slot_index: usize,
    rng: &mut R,
) -> Result<PulseOutcome, ChannelError> {
    let source = PhotonSource::new(p.mu)?;
    Ok(transmit_with(&source, p, leg, slot_index, rng))
}

pub(crate) fn transmit_with<R: Rng + ?Sized>(
    source: &PhotonSource,
    p: &ChannelParams,
    leg: Leg,
    slot_index: usize,
    rng: &mut R,
) -> PulseOutcome {
    let mut survival = fiber_transmittance(p.alpha_db_per_km, leg.length_km(p));
    if leg.ends_at_detector() {
        survival *= p.eta_det;
    }
    let detected = thin(source.emit(rng), survival, rng) > 0;
    let flipped_by_noise = detected && rng.random::<f64>() < p.error_rate;
    PulseOutcome {
        detected,
        flipped_by_noise,
        slot_index,
    }
}
