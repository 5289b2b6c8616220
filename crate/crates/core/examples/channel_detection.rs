//! Detection probability for the round trip, exact sum against the closed
//! form and the small-μ approximation, followed by a Monte Carlo check.

use qsdc::channel::{
    detection_probability_approx, detection_probability_closed_form,
    detection_probability_exact, photon_survival, thin, ChannelParams, PhotonSource,
};
use qsdc::rng::seeded;

fn main() {
    println!("{:>5} {:>6} {:>12} {:>12} {:>12} {:>12}", "mu", "L1 km", "exact", "closed", "approx", "sampled");
    let mut rng = seeded(42);
    for &mu in &[0.01, 0.1, 0.5] {
        for &l1 in &[0.0, 10.0, 25.0] {
            let p = ChannelParams { mu, l1_km: l1, l2_km: l1, ..ChannelParams::boundary_link(mu, l1) };
            let source = PhotonSource::new(mu).unwrap();
            let q = photon_survival(&p);
            let trials = 200_000;
            let hits = (0..trials)
                .filter(|_| thin(source.emit(&mut rng), q, &mut rng) > 0)
                .count();
            println!(
                "{mu:>5} {l1:>6} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e}",
                detection_probability_exact(&p),
                detection_probability_closed_form(&p),
                detection_probability_approx(&p),
                hits as f64 / trials as f64,
            );
        }
    }
}
