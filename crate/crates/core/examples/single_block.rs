//! One block at the operating point, step by step.

use qsdc::codec::Bits;
use qsdc::{run_block, BlockConfig};

fn main() {
    let cfg = BlockConfig::operating_point(2024);
    let bits = Bits::from_value(0b1011, 4);
    let t = run_block(&cfg, &bits).unwrap();

    for e in &t.events {
        println!("{e:?}");
    }
    println!("pulses reaching Bob   {}", t.n1);
    println!("forward check QBER    {:?}", t.forward_check.qber());
    println!("backward check QBER   {:?}", t.backward_check.as_ref().and_then(|c| c.qber()));
    println!("records at decoder    {}", t.stream.len());
    println!("sent tone             {:?} Hz", t.sent_tones);
    println!("decoded tone          {:?} Hz (snr {:?})", t.decoded_tones, t.snr);
    println!("verdict               {:?}, bits ok: {}", t.verdict, t.round_trip_ok());
}
