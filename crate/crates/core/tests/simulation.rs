//! Statistical behavior of the simulation harness at small scale.

use slate_ope::harness::{
    experiment_cardinality_grid, experiment_prior_grid, fit_improvement_regression, run_experiment, CardinalityRule,
    EstimatorKind, ExperimentConfig, ImprovementStats,
};
use slate_ope::reward::ModelKind;

fn config(d: &[usize], seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(CardinalityRule::Fixed(d.to_vec()), seed)
}

#[test]
fn every_elementwise_tensor_is_unbiased() {
    let cfg = ExperimentConfig {
        sample_size: 2000,
        tensor_count: 10,
        replications: 500,
        ..config(&[3, 7], 21)
    };
    for r in run_experiment(&cfg).unwrap() {
        for kind in [EstimatorKind::Pi, EstimatorKind::PiPlusPlus] {
            let s = r.summary(kind);
            let se = (s.variance / cfg.replications as f64).sqrt();
            assert!(
                s.bias.abs() <= 4.0 * se,
                "tensor {} {kind}: bias {} se {se}",
                r.tensor_index,
                s.bias
            );
        }
    }
}

#[test]
fn improvement_changes_sign_past_twice_the_prior() {
    let template = ExperimentConfig {
        sample_size: 2000,
        tensor_count: 20,
        replications: 300,
        ..config(&[2, 20], 22)
    };
    let grid = experiment_prior_grid(&template, &[0.2], &[0.1, 0.3, 0.5], &mut |_| {}).unwrap();
    let at = |p: f64| grid.cell(0.2, p).unwrap().stats;
    assert!(at(0.1).mean_delta_nmse > 0.0);
    assert!(at(0.3).mean_delta_nmse > 0.0);
    assert!(at(0.5).mean_delta_nmse < 0.0);
    assert!(at(0.5).mean_predicted_improvement < 0.0);
}

#[test]
fn pairwise_rewards_run_and_track_the_prediction() {
    let cfg = ExperimentConfig {
        sample_size: 2000,
        tensor_count: 20,
        replications: 300,
        reward_kind: ModelKind::Pairwise,
        true_prior_mean: 0.4,
        assumed_prior_mean: 0.4,
        ..config(&[2, 10, 5], 23)
    };
    let stats = ImprovementStats::of(&run_experiment(&cfg).unwrap());
    assert!(stats.max_clamp_fraction < 0.01);
    assert!(stats.mean_delta_nmse > 0.0, "{stats:?}");
}

#[test]
fn regression_on_random_cardinalities_has_positive_slope() {
    let cfg = ExperimentConfig {
        sample_size: 2000,
        tensor_count: 30,
        replications: 100,
        ..ExperimentConfig::new(CardinalityRule::UniformRandom { slots: 3 }, 24)
    };
    let fits = fit_improvement_regression(&run_experiment(&cfg).unwrap()).unwrap();
    assert_eq!(fits.len(), 1);
    assert!(fits[0].fit.slope > 0.0 && fits[0].fit.r_squared > 0.3, "{:?}", fits[0]);
}

#[test]
fn heavy_clamping_is_reported() {
    let cfg = ExperimentConfig {
        sample_size: 500,
        tensor_count: 2,
        replications: 5,
        true_prior_mean: 0.95,
        assumed_prior_mean: 0.95,
        relative_sd: 2.0,
        ..config(&[4, 4], 25)
    };
    let stats = ImprovementStats::of(&run_experiment(&cfg).unwrap());
    assert!(stats.max_clamp_fraction > 0.01, "{stats:?}");
}

#[test]
fn prior_grid_diagonal_grows_and_vanishes_near_zero() {
    let template = ExperimentConfig {
        sample_size: 2000,
        tensor_count: 10,
        replications: 300,
        ..config(&[2, 20], 26)
    };
    let priors = [0.1, 0.2, 0.3];
    let diagonal: Vec<f64> = priors
        .iter()
        .map(|&p| {
            let grid = experiment_prior_grid(&template, &[p], &[p], &mut |_| {}).unwrap();
            grid.cell(p, p).unwrap().stats.mean_delta_nmse
        })
        .collect();
    assert!(diagonal.windows(2).all(|w| w[0] < w[1]), "{diagonal:?}");

    let grid = experiment_prior_grid(&template, &[0.2], &[0.005], &mut |_| {}).unwrap();
    let near_zero = grid.cell(0.2, 0.005).unwrap().stats;
    assert!(near_zero.mean_predicted_improvement.abs() < 0.05);
    assert!(
        (near_zero.mean_delta_nmse - near_zero.mean_predicted_improvement).abs() <= 4.0 * near_zero.se_delta_nmse,
        "{near_zero:?}"
    );
}

#[test]
fn cardinality_grid_is_null_on_the_diagonal_and_grows_with_the_gap() {
    let template = ExperimentConfig {
        sample_size: 2000,
        tensor_count: 10,
        replications: 200,
        ..config(&[2, 2], 27)
    };
    let grid = experiment_cardinality_grid(&template, &[2, 10, 1000], &mut |_| {}).unwrap();
    for c in &grid.cells {
        let (d1, d2) = c.cardinalities;
        if d1 == d2 {
            assert_eq!(c.stats.mean_delta_nmse, 0.0);
        } else {
            assert!(c.stats.mean_percent_improvement > 0.0, "{c:?}");
        }
    }
    assert!(grid.cell(2, 1000).unwrap().stats.mean_delta_nmse > grid.cell(2, 10).unwrap().stats.mean_delta_nmse);
}
