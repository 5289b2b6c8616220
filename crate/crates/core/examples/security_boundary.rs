//! Photon-number-splitting yields against Alice's information rate over
//! distance, and where each μ stops being secure.

use qsdc::channel::ChannelParams;
use qsdc::security::{default_distance_grid, evaluate, security_sweep, CodingParams};

fn main() {
    let coding = CodingParams::OPERATING_POINT;
    let mus = [0.01, 0.05, 0.1, 0.19];
    let sweep = security_sweep(&ChannelParams::boundary_link(0.1, 0.0), &mus, &default_distance_grid(), &coding);
    println!("required ratio N/b = {}", coding.required_ratio());
    for mu in mus {
        let at = |l1: f64| evaluate(&ChannelParams::boundary_link(mu, l1), &coding);
        println!(
            "mu {mu:<5} ratio at 0 km {:>8.3}, at 10 km {:>8.3}, secure up to {:?} km",
            at(0.0).ratio,
            at(10.0).ratio,
            sweep.secure_distance(mu)
        );
    }

    // Without channel errors Eve's single-photon yield vanishes.
    let mut clean = ChannelParams::boundary_link(0.01, 0.0);
    clean.error_rate = 0.0;
    let r = evaluate(&clean, &coding);
    println!("error-free link, mu 0.01: Eve {:.3e}  Alice {:.3e}  secure {}", r.eve.total, r.r_alice, r.secure);
}
