use outbreak_core::detector::{
    simulate_trajectories, threshold_known_start, threshold_unknown_start, verdict, DetectorConfig,
};

#[test]
fn default_config_power_and_shape() {
    let cfg = DetectorConfig::default();
    let matrix = simulate_trajectories(&cfg).unwrap();
    let known = threshold_known_start(&matrix, &cfg.alphas).unwrap();
    let unknown = threshold_unknown_start(&matrix, &cfg.alphas).unwrap();

    for t in [&known, &unknown] {
        assert!(t.min_cases.iter().flatten().flatten().all(|&c| c >= 1));
    }

    // Unknown-start thresholds grow with time for nearly every day.
    let pairs = unknown.min_cases.len() - 1;
    let rising = unknown
        .min_cases
        .windows(2)
        .filter(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b.unwrap_or(u64::MAX) >= a.unwrap_or(u64::MAX)))
        .count();
    assert!(rising as f64 >= 0.95 * pairs as f64, "{rising}/{pairs}");

    // Fast growth crosses the 5% threshold within 30 days.
    let fast = simulate_trajectories(&DetectorConfig { beta1_null: 0.3, n_sims: 10_000, seed: 77, ..cfg.clone() }).unwrap();
    let j = cfg.alphas.iter().position(|&a| a == 0.05).unwrap();
    let detected = fast
        .rows()
        .filter(|r| (0..30).any(|d| known.min_cases[d][j].is_some_and(|c| r[d] >= c)))
        .count();
    assert!(detected as f64 >= 0.8 * fast.n_sims() as f64, "{detected}");

    // Independent null trajectories at day 30 through the verdict path.
    let null = simulate_trajectories(&DetectorConfig { n_sims: 10_000, seed: 78, ..cfg }).unwrap();
    let rejected = null
        .rows()
        .filter(|r| verdict(&known, 30, r[29]).unwrap().reject_at.contains(&0.05))
        .count();
    assert!(rejected as f64 / 1e4 <= 0.06, "{rejected}");
}
