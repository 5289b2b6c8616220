//! Periodic flip modulation.
//!
//! A tone at frequency `f` is a 50 % duty square wave of period `1/f`. With
//! half-period `T = 1/(2f)` and offset `δ`, a photon at time `τ` is flipped
//! when `δ + 2nT < τ ≤ (2n+1)T + δ` for some integer `n` and left alone when
//! `δ + (2n+1)T < τ ≤ (2n+2)T + δ`.
//!
//! Several tones combine either by XOR of their flip indicators or by
//! interleaving, where each photon follows one tone picked at random. XOR
//! of two square waves is their product, whose spectrum holds only the
//! mixing products `m·f1 ± n·f2` (odd `m`, `n`) and nothing at `f1` or `f2`
//! themselves, so only interleaving lets the decoder see every tone.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CodecError, FrequencyGrid};
use crate::quantum::FlipOp;

/// Membership test for the interval rule above, with the
/// half-period `T` given directly.
pub fn flip_indicator(tau_s: f64, half_period_s: f64, offset_s: f64) -> bool {
    // τ ∈ (δ + 2nT, δ + (2n+1)T]  ⇔  ceil((τ − δ)/T) is odd.
    let u = (tau_s - offset_s) / half_period_s;
    (u.ceil() as i64).rem_euclid(2) == 1
}

/// How the tones of a multi-tone block share the photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToneComposition {
    /// Flip iff an odd number of tones say flip.
    #[default]
    Xor,
    /// Each photon follows a single tone chosen uniformly at random.
    Interleave,
}

/// One modulating tone. The offset is the sender's secret.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub frequency_hz: f64,
    pub offset_s: f64,
}

impl Tone {
    pub fn half_period_s(&self) -> f64 {
        0.5 / self.frequency_hz
    }

    pub fn flips_at(&self, tau_s: f64) -> bool {
        flip_indicator(tau_s, self.half_period_s(), self.offset_s)
    }
}

/// The tones for one block and the block duration.
///
/// Deliberately not serialisable: offsets never leave the sender.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationPlan {
    tones: Vec<Tone>,
    t_span_s: f64,
}

impl ModulationPlan {
    /// Builds a plan with explicit offsets.
    pub fn with_offsets(
        grid: &FrequencyGrid,
        tones: Vec<Tone>,
        t_span_s: f64,
    ) -> Result<Self, CodecError> {
        let channels = grid.channel_count()?;
        if tones.is_empty() || tones.len() > channels {
            return Err(CodecError::InvalidToneCount {
                tones: tones.len(),
                channels,
            });
        }
        let mut seen = Vec::with_capacity(tones.len());
        for t in &tones {
            let idx = grid.index_of(t.frequency_hz).ok_or(CodecError::OffGrid(t.frequency_hz))?;
            if seen.contains(&idx) {
                return Err(CodecError::DuplicateTone(t.frequency_hz));
            }
            seen.push(idx);
        }
        if !(t_span_s > 0.0) {
            return Err(CodecError::InvalidTimeSpan(t_span_s));
        }
        Ok(Self { tones, t_span_s })
    }

    /// Draws a fresh offset for each frequency, uniform over one modulation
    /// period `[0, 1/f)`.
    pub fn random<R: Rng + ?Sized>(
        grid: &FrequencyGrid,
        frequencies: &[f64],
        t_span_s: f64,
        rng: &mut R,
    ) -> Result<Self, CodecError> {
        let tones = frequencies
            .iter()
            .map(|&f| Tone {
                frequency_hz: f,
                offset_s: rng.random::<f64>() / f,
            })
            .collect();
        Self::with_offsets(grid, tones, t_span_s)
    }

    pub fn tones(&self) -> &[Tone] {
        &self.tones
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.tones.iter().map(|t| t.frequency_hz).collect()
    }

    pub fn t_span_s(&self) -> f64 {
        self.t_span_s
    }

    /// XOR of every tone at `tau_s`.
    pub fn op_at(&self, tau_s: f64) -> FlipOp {
        FlipOp::from_flip(self.tones.iter().fold(false, |acc, t| acc ^ t.flips_at(tau_s)))
    }

    /// The operation for one photon under `composition`; interleaving draws
    /// the tone from `rng`.
    pub fn op_with<R: Rng + ?Sized>(
        &self,
        composition: ToneComposition,
        tau_s: f64,
        rng: &mut R,
    ) -> FlipOp {
        match composition {
            ToneComposition::Xor => self.op_at(tau_s),
            ToneComposition::Interleave => {
                let tone = &self.tones[rng.random_range(0..self.tones.len())];
                FlipOp::from_flip(tone.flips_at(tau_s))
            }
        }
    }
}

/// The operation applied to each photon at the given emission times.
pub fn flip_schedule(plan: &ModulationPlan, pulse_times_s: &[f64]) -> Vec<FlipOp> {
    pulse_times_s.iter().map(|&t| plan.op_at(t)).collect()
}
