//! Eavesdropper yield, legitimate rate, and the distance/μ security boundary.
//!
//! Eve has three strategies against a weak-coherent source:
//!
//! * single photons: replace a noisy channel by a clean one and hide in its
//!   error rate, `4 · 10^{−α(L1+L2)/10} · p1 · e · (1−C)`;
//! * two-photon pulses: keep one photon and discriminate parallel from
//!   antiparallel (conclusive 1/4 of the time),
//!   `¼ · 10^{−α L2/10} · p2 · (1−C)`;
//! * three or more: a flip/no-flip measurement conclusive half the time,
//!   `½ · 10^{−α L2/10} · (1−C) · Σ_{n≥3} p_n`.
//!
//! Alice's photons per pulse are `10^{−α(2L1+L2)/10} · η_det · μ · (1−C)`.
//! A configuration is secure when `R_Alice / R_Eve > N / b`.

use std::io::Write;

use serde::Serialize;

use crate::channel::{fiber_transmittance, poisson_pmf, ChannelParams};
use crate::output::{sig9, write_csv};

/// Block-coding quantities that enter the rate and the security condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodingParams {
    /// Bits per block, `b`.
    pub bits: u32,
    /// Photons Alice uses per block for the spectrum, `N`.
    pub block_photons: usize,
    pub t_span_s: f64,
}

impl CodingParams {
    /// b = 4, N = 80, T_span = 1 ms.
    pub const OPERATING_POINT: CodingParams = CodingParams {
        bits: 4,
        block_photons: 80,
        t_span_s: 1e-3,
    };

    /// `N / b`, the minimum ratio for security.
    pub fn required_ratio(&self) -> f64 {
        self.block_photons as f64 / f64::from(self.bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EveYield {
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub r_n1: f64,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub r_n2: f64,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub r_n3: f64,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecurityReport {
    pub params: ChannelParams,
    pub eve: EveYield,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub r_alice: f64,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub i_alice: f64,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub bits_per_pulse: f64,
    #[serde(serialize_with = "crate::output::serde_sig9::serialize")]
    pub ratio: f64,
    pub secure: bool,
}

fn pmf(mu: f64, n: u32) -> f64 {
    if mu > 0.0 {
        poisson_pmf(mu, n).expect("mu > 0")
    } else {
        0.0
    }
}

/// `Σ_{n≥3} p_n`. For μ ≥ 1 this is `1 − p0 − p1 − p2`; below that the
/// subtraction cancels badly, so the tail series is summed to round-off.
pub fn poisson_tail_from_three(mu: f64) -> f64 {
    if !(mu > 0.0) {
        return 0.0;
    }
    if mu >= 1.0 {
        return 1.0 - pmf(mu, 0) - pmf(mu, 1) - pmf(mu, 2);
    }
    let mut term = pmf(mu, 3);
    let mut sum = 0.0;
    let mut n = 3.0;
    while term > sum * 1e-18 && term > 0.0 {
        sum += term;
        n += 1.0;
        term *= mu / n;
    }
    sum
}

/// Two-photon splitting yield.
pub fn eve_n2(p: &ChannelParams) -> f64 {
    0.25 * fiber_transmittance(p.alpha_db_per_km, p.l2_km) * pmf(p.mu, 2) * (1.0 - p.check_fraction)
}

/// Yield from pulses with three or more photons.
pub fn eve_n3(p: &ChannelParams) -> f64 {
    0.5 * fiber_transmittance(p.alpha_db_per_km, p.l2_km)
        * (1.0 - p.check_fraction)
        * poisson_tail_from_three(p.mu)
}

/// Single-photon yield hidden in channel noise. Note the attenuation runs
/// over `L1 + L2`, not the full round trip.
pub fn eve_n1(p: &ChannelParams) -> f64 {
    4.0 * fiber_transmittance(p.alpha_db_per_km, p.l1_km + p.l2_km)
        * pmf(p.mu, 1)
        * p.error_rate
        * (1.0 - p.check_fraction)
}

pub fn eve_yield(p: &ChannelParams) -> EveYield {
    let (r_n1, r_n2, r_n3) = (eve_n1(p), eve_n2(p), eve_n3(p));
    EveYield {
        r_n1,
        r_n2,
        r_n3,
        total: r_n1 + r_n2 + r_n3,
    }
}

/// `(R_Alice, I_Alice)`: photons per pulse, and bits per second
/// `b · R_Alice / (N · T_span)`.
pub fn alice_rate(p: &ChannelParams, coding: &CodingParams) -> (f64, f64) {
    let r_alice = fiber_transmittance(p.alpha_db_per_km, 2.0 * p.l1_km + p.l2_km)
        * p.eta_det
        * p.mu
        * (1.0 - p.check_fraction);
    let i_alice =
        f64::from(coding.bits) * r_alice / (coding.block_photons as f64 * coding.t_span_s);
    (r_alice, i_alice)
}

pub fn evaluate(p: &ChannelParams, coding: &CodingParams) -> SecurityReport {
    let eve = eve_yield(p);
    let (r_alice, i_alice) = alice_rate(p, coding);
    let ratio = if eve.total > 0.0 {
        r_alice / eve.total
    } else if r_alice > 0.0 {
        f64::INFINITY
    } else {
        f64::NAN
    };
    SecurityReport {
        params: *p,
        eve,
        r_alice,
        i_alice,
        bits_per_pulse: f64::from(coding.bits) * r_alice / coding.block_photons as f64,
        ratio,
        secure: ratio > coding.required_ratio(),
    }
}

/// Default mean photon numbers for the distance/μ sweep, highest first.
pub const BOUNDARY_MU: [f64; 10] = [0.19, 0.17, 0.15, 0.13, 0.11, 0.09, 0.07, 0.05, 0.03, 0.01];

/// `0, 0.5, …, 50` km.
pub fn default_distance_grid() -> Vec<f64> {
    (0..=100).map(|i| f64::from(i) * 0.5).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecuritySweep {
    pub coding: CodingParams,
    pub rows: Vec<SecurityReport>,
}

impl SecuritySweep {
    /// Largest swept `L1` at which `mu` is still secure.
    pub fn secure_distance(&self, mu: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.params.mu == mu && r.secure)
            .map(|r| r.params.l1_km)
            .fold(None, |acc: Option<f64>, l| Some(acc.map_or(l, |a| a.max(l))))
    }

    pub fn mus(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.params.mu) {
                out.push(r.params.mu);
            }
        }
        out
    }

    /// Writes `mu,l1_km,bits_per_pulse,ratio,secure`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        write_csv(
            out,
            &["mu", "l1_km", "bits_per_pulse", "ratio", "secure"],
            self.rows.iter().map(|r| {
                vec![
                    sig9(r.params.mu),
                    sig9(r.params.l1_km),
                    sig9(r.bits_per_pulse),
                    sig9(r.ratio),
                    r.secure.to_string(),
                ]
            }),
        )
    }
}

/// Evaluates every `(μ, L1)` pair with `L2 = L1`, in the order given.
pub fn security_sweep(
    base: &ChannelParams,
    mu_list: &[f64],
    l1_grid_km: &[f64],
    coding: &CodingParams,
) -> SecuritySweep {
    let rows = mu_list
        .iter()
        .flat_map(|&mu| {
            l1_grid_km.iter().map(move |&l1| {
                let p = ChannelParams {
                    mu,
                    l1_km: l1,
                    l2_km: l1,
                    ..*base
                };
                evaluate(&p, coding)
            })
        })
        .collect();
    SecuritySweep {
        coding: *coding,
        rows,
    }
}
