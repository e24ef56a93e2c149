//! Sampling estimators against exact values.

use excesslab::exact::{block_mi, enumerate_joint, EnumerationOptions};
use excesslab::sampling::{
    estimate_block_mi, estimate_pooled, sample_trajectory, EstimatorMethod, EstimatorOptions, SamplingRegime,
};
use excesslab::{Alpha, ProcessKind, ProcessModel};

fn truncated_case() -> (ProcessModel, usize, f64) {
    // Truncated level law: the exact table is complete and its interval
    // narrow, so the estimator error is measured directly.
    let model = ProcessModel::truncated(ProcessKind::Hpm2, Alpha::new(1.5).unwrap(), 1 << 12).unwrap();
    let n = 10;
    let e = block_mi(&enumerate_joint(&model, n, &EnumerationOptions::with_cutoff(1 << 12)).unwrap());
    assert!(e.width() < 1e-6, "{e:?}");
    (model, n, e.value)
}

fn pooled(model: &ProcessModel, n: usize, method: EstimatorMethod, count: usize) -> f64 {
    let opts = EstimatorOptions {
        method,
        resamples: 0,
        seed: 1,
        ..Default::default()
    };
    let r = estimate_pooled(model, n, count, &opts).unwrap();
    assert_eq!(r.regime, SamplingRegime::PooledTrajectories);
    r.point_estimate
}

#[test]
fn pooled_estimates_converge_on_a_truncated_law() {
    // The finite-sample bias changes sign with S (few windows: the past
    // looks deterministic; mid-range: the joint support outgrows the
    // marginals), so only the large-S error is pinned.
    let (model, n, exact) = truncated_case();
    let mid = pooled(&model, n, EstimatorMethod::MillerMadow, 100_000);
    let large = pooled(&model, n, EstimatorMethod::MillerMadow, 1_000_000);
    assert!((large - exact).abs() < 0.03, "{large} vs {exact}");
    assert!((large - exact).abs() < (mid - exact).abs(), "{mid}, {large} vs {exact}");
}

#[test]
fn miller_madow_beats_plugin_at_large_samples() {
    let (model, n, exact) = truncated_case();
    let plugin = pooled(&model, n, EstimatorMethod::Plugin, 1_000_000);
    let mm = pooled(&model, n, EstimatorMethod::MillerMadow, 1_000_000);
    assert!((mm - exact).abs() < (plugin - exact).abs(), "plugin {plugin}, mm {mm}, exact {exact}");
}

#[test]
fn sliding_windows_on_the_ergodic_process() {
    let model = ProcessModel::new(ProcessKind::Hmc, Alpha::new(2.0).unwrap());
    let n = 3;
    let e = block_mi(&enumerate_joint(&model, n, &EnumerationOptions::with_cutoff(1 << 8)).unwrap());
    let traj = sample_trajectory(&model, 2_000_000, 3).unwrap();
    let opts = EstimatorOptions {
        resamples: 50,
        seed: 3,
        ..Default::default()
    };
    let r = estimate_block_mi(&traj, n, &opts).unwrap();
    assert_eq!(r.regime, SamplingRegime::SlidingWindows);
    let slack = 4.0 * r.std_error;
    assert!(e.lower() - slack <= r.point_estimate && r.point_estimate <= e.upper() + slack, "{r:?} vs {e:?}");
}
