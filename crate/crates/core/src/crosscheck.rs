//! Cross-validation of the closed forms against exact enumeration and
//! simulation, at a scale small enough to run on every build.

use serde::{Deserialize, Serialize};

use crate::estimators::{optimal_cv_weights, AdditiveEstimatorParams};
use crate::harness::simulate_fold;
use crate::oracle::{exact_bias, exact_moments, exact_variance, predicted_improvement};
use crate::reward::{draw_elementwise_model, draw_model, ModelDrawConfig, ModelKind};
use crate::rng::{stream, StreamPurpose};
use crate::slate::{compute_divergences, FactoredPolicy, Slate, SlateSpec, SlotWeights};
use crate::stats::{mean, standard_error};
use crate::{Error, Result, ENUMERATION_CAP};

/// Absolute tolerance for identities that hold up to rounding.
pub const EXACT_TOLERANCE: f64 = 1e-9;
/// Standard errors allowed for Monte Carlo comparisons.
pub const SE_MULTIPLIER: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckConfig {
    pub cardinalities: Vec<usize>,
    pub true_prior_mean: f64,
    pub assumed_prior_mean: f64,
    pub reward_kind: ModelKind,
    pub relative_sd: f64,
    /// Samples per simulated dataset.
    pub sample_size: u64,
    /// Simulated datasets for the variance comparison.
    pub replications: usize,
    /// Reward models averaged for the prior-level comparison.
    pub model_draws: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            expected,
            tolerance,
            passed: (value - expected).abs() <= tolerance,
        }
    }
}

/// Standard error of a sample variance, from the fourth central moment.
fn variance_standard_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    (var, ((m4 - m2 * m2) / n).max(0.0).sqrt())
}

/// Runs every check and returns one outcome per check, in a fixed order.
pub fn run_cross_checks(cfg: &CrossCheckConfig, progress: &mut dyn FnMut(&str)) -> Result<Vec<CheckOutcome>> {
    if cfg.replications < 2 || cfg.model_draws < 2 || cfg.sample_size == 0 {
        return Err(Error::Precondition(
            "cross checks need at least 2 replications, 2 model draws and 1 sample".into(),
        ));
    }
    let spec = SlateSpec::new(cfg.cardinalities.clone())?;
    spec.check_enumerable(ENUMERATION_CAP)?;
    let logging = FactoredPolicy::uniform(&spec);
    let target = FactoredPolicy::deterministic(&spec, &Slate::zeros(&spec))?;
    let divs = compute_divergences(&target, &logging)?;
    let cv = optimal_cv_weights(&divs, cfg.assumed_prior_mean)?;
    let w = cv.weights();
    let alphas = divs.alphas();
    let pi = AdditiveEstimatorParams::pi(spec.slot_count());
    let pipp = AdditiveEstimatorParams::pi_plus_plus(&cv);
    let draw = ModelDrawConfig::new(cfg.true_prior_mean, cfg.relative_sd, cfg.reward_kind)?;
    let mut out = Vec::new();

    progress("oracle check: closed forms");
    out.push(CheckOutcome::new("zero_sum_weights", w.iter().sum(), 0.0, 1e-12));
    let alpha_error = alphas
        .iter()
        .zip(spec.cardinalities())
        .map(|(a, d)| (a - (*d as f64 - 1.0)).abs())
        .fold(0.0, f64::max);
    out.push(CheckOutcome::new("divergence_formula", alpha_error, 0.0, 0.0));

    let model = draw_model(&spec, &draw, &mut stream(cfg.seed, StreamPurpose::Model, 0, 0))?;
    let moments = exact_moments(&model, &logging, &target, &pipp)?;
    let f2: f64 = w.iter().zip(alphas).map(|(w, a)| w * w * a).sum();
    let gf: f64 = w.iter().zip(alphas).map(|(w, a)| w * a).sum();
    out.push(CheckOutcome::new(
        "control_second_moment",
        moments.f2,
        f2,
        EXACT_TOLERANCE * f2.abs().max(1.0),
    ));
    out.push(CheckOutcome::new(
        "control_cross_moment",
        moments.gf,
        gf,
        EXACT_TOLERANCE * gf.abs().max(1.0),
    ));

    // Unbiasedness needs an additive reward, so it uses an elementwise draw
    // whatever the configured kind.
    let elementwise_cfg = ModelDrawConfig::new(cfg.true_prior_mean, cfg.relative_sd, ModelKind::Elementwise)?;
    let elementwise = draw_elementwise_model(
        &spec,
        &elementwise_cfg,
        &mut stream(cfg.seed, StreamPurpose::Model, 0, 1),
    )?
    .into();
    out.push(CheckOutcome::new(
        "pi_bias",
        exact_bias(&elementwise, &logging, &target, &pi)?,
        0.0,
        1e-12,
    ));
    out.push(CheckOutcome::new(
        "pi_plus_plus_bias",
        exact_bias(&elementwise, &logging, &target, &pipp)?,
        0.0,
        1e-12,
    ));

    progress("oracle check: simulated variance");
    let weights = SlotWeights::new(&target, &logging)?;
    let folds: Vec<_> = (0..cfg.replications)
        .map(|rep| {
            simulate_fold(
                &model,
                &logging,
                &weights,
                cfg.sample_size,
                &mut stream(cfg.seed, StreamPurpose::Replication, 0, rep as u64),
            )
            .0
        })
        .collect();
    for (name, params) in [("pi_variance", &pi), ("pi_plus_plus_variance", &pipp)] {
        let estimates: Vec<f64> = folds.iter().map(|f| f.additive(params)).collect::<Result<_>>()?;
        let (var, se) = variance_standard_error(&estimates);
        let exact = exact_variance(&model, &logging, &target, params)? / cfg.sample_size as f64;
        out.push(CheckOutcome::new(name, var, exact, SE_MULTIPLIER * se));
    }

    progress("oracle check: prior-averaged improvement");
    let mut gaps = Vec::with_capacity(cfg.model_draws);
    for m in 0..cfg.model_draws {
        let model = draw_model(&spec, &draw, &mut stream(cfg.seed, StreamPurpose::Model, m as u64, 0))?;
        gaps.push(exact_variance(&model, &logging, &target, &pi)? - exact_variance(&model, &logging, &target, &pipp)?);
    }
    let predicted = predicted_improvement(&divs, cfg.true_prior_mean, cfg.assumed_prior_mean)?.improvement_per_sample;
    out.push(CheckOutcome::new(
        "prior_averaged_improvement",
        mean(&gaps),
        predicted,
        SE_MULTIPLIER * standard_error(&gaps) + EXACT_TOLERANCE,
    ));
    Ok(out)
}
