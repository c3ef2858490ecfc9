use outbreak_core::delay_model::{fit_delay, DelayObservation};
use outbreak_core::domain::RngSeed;
use outbreak_core::mcmc::McmcConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

const MU: f64 = 5.0;
const PHI: f64 = 2.0;

/// Negative binomial draws as a gamma mixture of Poissons, mean `MU`,
/// variance `MU + MU^2 / PHI`.
fn synthetic(seed: u64, n: usize) -> Vec<DelayObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Gamma::new(PHI, MU / PHI).unwrap();
    (0..n)
        .map(|_| {
            let rate: f64 = gamma.sample(&mut rng);
            let k: f64 = Poisson::new(rate.max(1e-12)).unwrap().sample(&mut rng);
            DelayObservation {
                destination: "A".into(),
                interval_days: k as u64,
            }
        })
        .collect()
}

fn interval(mut v: Vec<f64>) -> (f64, f64) {
    v.sort_by(f64::total_cmp);
    let at = |q: f64| v[((v.len() - 1) as f64 * q).round() as usize];
    (at(0.025), at(0.975))
}

#[test]
fn credible_intervals_cover_truth() {
    let cfg = McmcConfig {
        chains: 2,
        warmup: 1000,
        draws: 1000,
        ..Default::default()
    };
    let mut mu_hits = 0;
    let mut phi_hits = 0;
    for rep in 0..20u64 {
        let post = fit_delay(&synthetic(1000 + rep, 200), &cfg, &RngSeed::root(rep)).unwrap();
        let (lo, hi) = interval(post.samples.iter().map(|s| s.mu[0]).collect());
        mu_hits += usize::from(lo < MU && MU < hi);
        let (lo, hi) = interval(post.samples.iter().map(|s| s.phi).collect());
        phi_hits += usize::from(lo < PHI && PHI < hi);
    }
    println!("mu covered {mu_hits}/20, phi covered {phi_hits}/20");
    assert!(mu_hits >= 17, "mu covered {mu_hits}/20");
    assert!(phi_hits >= 17, "phi covered {phi_hits}/20");
}
