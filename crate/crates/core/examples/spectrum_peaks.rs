//! One block of clean flip records for each grid frequency; the spectrum
//! peak lands on the frequency Bob used.

use qsdc::codec::{detect_tones, dtft, DetectionRecord, FrequencyGrid, ModulationPlan, SymbolStream};
use qsdc::quantum::{apply, measure, prepare_random};
use qsdc::rng::seeded;
use rand::seq::index::sample;

const F_REP_HZ: f64 = 10e6;
const T_SPAN_S: f64 = 1e-3;

fn main() {
    let grid = FrequencyGrid::OPERATING_POINT;
    let mut rng = seeded(5);
    for f in grid.frequencies() {
        let plan = ModulationPlan::random(&grid, &[f], T_SPAN_S, &mut rng).unwrap();
        let mut slots = sample(&mut rng, 10_000, 80).into_vec();
        slots.sort_unstable();
        let records = slots
            .into_iter()
            .map(|slot| {
                let t = slot as f64 / F_REP_HZ;
                let s = prepare_random(&mut rng);
                let back = apply(plan.op_at(t), s);
                DetectionRecord { flipped: measure(back, s.basis, &mut rng) != s.bit, arrival_s: t }
            })
            .collect();
        let stream = SymbolStream::new(records, T_SPAN_S).unwrap();
        let spec = dtft(&stream, &grid, 4).unwrap();
        let found = detect_tones(&spec, 1, 1.0).unwrap();
        println!("sent {:>6} Hz  peak {:>6} Hz  snr {:.2}", f, found.tones[0], found.snr[0]);
    }
}
