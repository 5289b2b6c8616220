//! How often the peak still lands on the right channel as the channel
//! error rate grows and fewer photons reach the decoder.

use qsdc::codec::{dtft, DetectionRecord, FrequencyGrid, ModulationPlan, SymbolStream};
use qsdc::quantum::{apply, measure, prepare_random};
use qsdc::rng::seeded;
use rand::seq::index::sample;
use rand::Rng;

fn main() {
    let grid = FrequencyGrid::OPERATING_POINT;
    let mut rng = seeded(9);
    let trials = 400;
    println!("{:>6} {:>6} {:>10}", "N", "error", "hit rate");
    for &n in &[20, 40, 80, 160] {
        for &noise in &[0.0, 0.05, 0.2, 0.4] {
            let mut hits = 0;
            for _ in 0..trials {
                let f = grid.frequency(rng.random_range(0..grid.len()));
                let plan = ModulationPlan::random(&grid, &[f], 1e-3, &mut rng).unwrap();
                let mut slots = sample(&mut rng, 10_000, n).into_vec();
                slots.sort_unstable();
                let records = slots
                    .into_iter()
                    .map(|slot| {
                        let t = slot as f64 * 1e-7;
                        let s = prepare_random(&mut rng);
                        let bit = measure(apply(plan.op_at(t), s), s.basis, &mut rng);
                        let flipped = (bit != s.bit) ^ (rng.random::<f64>() < noise);
                        DetectionRecord { flipped, arrival_s: t }
                    })
                    .collect();
                let stream = SymbolStream::new(records, 1e-3).unwrap();
                let peak = dtft(&stream, &grid, 1).unwrap().argmax_channel().unwrap();
                hits += usize::from(peak.frequency_hz == f);
            }
            println!("{n:>6} {noise:>6} {:>10.3}", hits as f64 / trials as f64);
        }
    }
}
