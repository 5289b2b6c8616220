//! How many bits a block carries as the grid and the tone count change.

use qsdc::codec::{combinatorial_capacity, transmission_rate_log2, FrequencyGrid};

fn main() {
    let grid = FrequencyGrid::OPERATING_POINT;
    let channels = grid.channel_count().unwrap();
    println!("grid {}..{} Hz step {} Hz: {channels} channels", grid.f_min_hz, grid.f_max_hz, grid.f_b_hz);
    for tones in 1..=8 {
        let c = combinatorial_capacity(channels, tones).unwrap();
        println!(
            "r = {tones}: N_max = {:>6}  b = {:>2}  I = {:.0} bps at 1 ms",
            c.combinations,
            c.bits,
            transmission_rate_log2(c.log2_combinations, 1e-3),
        );
    }

    // A wide grid at 1.5 kHz spacing with three tones.
    let c = combinatorial_capacity(333_334, 3).unwrap();
    println!(
        "N_c = 333334, r = 3: N_max = {}  I = {:.1} bps",
        c.combinations,
        transmission_rate_log2(c.log2_combinations, 1e-3)
    );
}
