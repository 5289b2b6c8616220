//! Stream builders shared by the integration suites.
#![allow(dead_code)]

use rand::seq::index::sample;
use rand::Rng;

use qsdc::codec::{DetectionRecord, FrequencyGrid, ModulationPlan, SymbolStream, Tone};
use qsdc::quantum::{apply, measure, prepare_random};

pub const F_REP_HZ: f64 = 10e6;
pub const T_SPAN_S: f64 = 1e-3;
pub const SLOTS: usize = 10_000;

/// `n` distinct pulse slots inside one block, as emission times.
pub fn random_times<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut slots = sample(rng, SLOTS, n).into_vec();
    slots.sort_unstable();
    slots.into_iter().map(|s| s as f64 / F_REP_HZ).collect()
}

/// Modulates random BB84 photons with `plan` at `times` and measures each in
/// its preparation basis, flipping the flip bit with probability `noise`.
pub fn measured_stream<R: Rng>(
    plan: &ModulationPlan,
    times: &[f64],
    noise: f64,
    rng: &mut R,
) -> SymbolStream {
    let records = times
        .iter()
        .map(|&t| {
            let s = prepare_random(rng);
            let outcome = measure(apply(plan.op_at(t), s), s.basis, rng);
            let flipped = (outcome != s.bit) ^ (rng.random::<f64>() < noise);
            DetectionRecord {
                flipped,
                arrival_s: t,
            }
        })
        .collect();
    SymbolStream::new(records, T_SPAN_S).unwrap()
}

/// A clean single-tone stream of `n` records at a random grid frequency.
/// Returns the frequency with the stream.
pub fn clean_single_tone<R: Rng>(grid: &FrequencyGrid, n: usize, rng: &mut R) -> (f64, SymbolStream) {
    let f = grid.frequency(rng.random_range(0..grid.len()));
    let plan = ModulationPlan::random(grid, &[f], T_SPAN_S, rng).unwrap();
    let times = random_times(n, rng);
    (f, measured_stream(&plan, &times, 0.0, rng))
}

pub fn single_tone_plan(grid: &FrequencyGrid, f: f64, offset_s: f64) -> ModulationPlan {
    ModulationPlan::with_offsets(
        grid,
        vec![Tone {
            frequency_hz: f,
            offset_s,
        }],
        T_SPAN_S,
    )
    .unwrap()
}
