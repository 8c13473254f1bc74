//! Simulation-level consistency checks.

use cf_lab_core::martingale::ExactEnumeration;
use cf_lab_core::montecarlo::{
    compare_bounds, default_alpha_grid, median_mean_gap, run_cf_simulation, scaling_study,
    SimulationConfig,
};
use cf_lab_core::ofdm::{Constellation, SignalParams};

fn config(n: usize, m: usize, trials: usize, seed: u64) -> SimulationConfig {
    SimulationConfig {
        n,
        constellation: Constellation::mpsk(m).unwrap(),
        trials,
        seed,
        oversampling: 16,
        alphas: default_alpha_grid(),
        workers: 2,
    }
}

#[test]
fn simulated_mean_matches_exhaustive_expectation() {
    // BPSK n = 8: exact E[CF] over all 256 codewords against a
    // 10⁵-trial Monte Carlo mean, within four standard errors.
    let c = Constellation::mpsk(2).unwrap();
    let params = SignalParams::new(8, 16).unwrap();
    let exact = ExactEnumeration::build(&c, &params, 2).unwrap().expected_cf();

    let sample = run_cf_simulation(&config(8, 2, 100_000, 2718)).unwrap();
    let se = (sample.variance / sample.trials() as f64).sqrt();
    assert!(
        (sample.mean - exact).abs() <= 4.0 * se,
        "MC mean {} vs exact {exact} (se {se})",
        sample.mean
    );
}

#[test]
fn desk_scale_sample_sits_in_sanity_band() {
    // Wide band around √(ln n); the scaling constant itself is not
    // asserted anywhere.
    let sample = run_cf_simulation(&config(64, 4, 2_000, 5)).unwrap();
    let center = (64f64).ln().sqrt();
    assert!(sample.mean > center - 1.0 && sample.mean < center + 1.0);
    let gap = median_mean_gap(&sample);
    assert!(gap.satisfied);
    assert!(gap.gap < 0.2, "median–mean gap unexpectedly large: {}", gap.gap);
}

#[test]
fn no_violations_at_moderate_scale() {
    let sample = run_cf_simulation(&config(64, 4, 5_000, 99)).unwrap();
    let report = compare_bounds(&sample, &default_alpha_grid()).unwrap();
    assert_eq!(report.total_violations(), 0);
    assert!(report.refined_bound_asymptotic);
}

#[test]
fn scaling_study_reports_growth() {
    let table = scaling_study(&[16, 64, 256], &config(16, 4, 2_000, 31)).unwrap();
    assert!(table.mean_nondecreasing);
    let means: Vec<f64> = table.rows.iter().map(|r| r.mean_cf).collect();
    assert!(means[0] < means[1] && means[1] < means[2]);
}

#[test]
fn seed_changes_move_the_sample() {
    let a = run_cf_simulation(&config(16, 4, 200, 1)).unwrap();
    let b = run_cf_simulation(&config(16, 4, 200, 2)).unwrap();
    assert_ne!(a.values, b.values);
}
