//! Two tones per block. XOR-ing the two square waves puts the energy at
//! their sum and difference frequencies; letting each photon follow one
//! tone keeps both peaks where they were sent.

use qsdc::codec::{dtft, FrequencyGrid, ToneComposition};
use qsdc::protocol::run_block_with_tones;
use qsdc::BlockConfig;

fn main() {
    let mut cfg = BlockConfig::ideal(11);
    cfg.grid = FrequencyGrid::new(1_000.0, 5_000.0, 1_000.0).unwrap();
    cfg.tones = 2;
    cfg.n2 = 1_000;
    cfg.channel.f_rep_hz = 1e6;
    let sent = [1_000.0, 4_000.0];

    for composition in [ToneComposition::Xor, ToneComposition::Interleave] {
        cfg.composition = composition;
        let t = run_block_with_tones(&cfg, &sent).unwrap();
        let spec = dtft(&t.stream, &cfg.grid, 1).unwrap();
        print!("{composition:?}:");
        for p in spec.channels() {
            print!("  {} Hz {:.1}", p.frequency_hz, p.magnitude);
        }
        println!("\n  decoded {:?} Hz, verdict {:?}", t.decoded_tones, t.verdict);
    }
}
