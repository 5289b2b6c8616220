//! A short text sent four bits per block, with retransmission of blocks
//! whose spectrum is too weak to decode.

use qsdc::protocol::SessionOptions;
use qsdc::{run_session, BlockConfig};

fn main() {
    let message = std::env::args().nth(1).unwrap_or_else(|| "hello, Bob".to_string());
    let cfg = BlockConfig::operating_point(7);
    let report = run_session(&cfg, message.as_bytes(), SessionOptions::default()).unwrap();

    println!("status        {:?}", report.status);
    println!("blocks        {} sent, {} retransmitted", report.blocks_sent, report.blocks_retransmitted);
    println!("bit errors    {}", report.bit_errors);
    println!("throughput    {} bps", report.throughput_bps);
    if let Some(bytes) = report.decoded_message() {
        println!("decoded       {:?}", String::from_utf8_lossy(&bytes));
    }
}
