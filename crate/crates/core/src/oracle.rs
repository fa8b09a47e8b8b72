//! Exact risk computations by enumeration, and the closed-form improvement
//! of PI++ over PI.
//!
//! For a single sample `T = R·G − F` with `E[F] = 0`,
//!
//! ```text
//! Var(T) = E[P G²] − E[P G]² + E[F²] − 2 E[P G F]
//! ```
//!
//! where expectations are over slates drawn from the logging policy and `P`
//! is the slate's Bernoulli rate. An estimator averaged over `n` samples has
//! variance `Var(T) / n`.

use serde::{Deserialize, Serialize};

use crate::estimators::AdditiveEstimatorParams;
use crate::reward::RewardModel;
use crate::slate::{DivergenceSummary, FactoredPolicy, SlotWeights};
use crate::{Error, Result, ENUMERATION_CAP};

/// Expectations under the logging policy, computed exactly.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExactMoments {
    /// `E[P G²]`
    pub pg2: f64,
    /// `E[P G]`
    pub pg: f64,
    /// `E[F]`
    pub f: f64,
    /// `E[F²]`
    pub f2: f64,
    /// `E[P G F]`
    pub pgf: f64,
    /// `E[G F]`
    pub gf: f64,
}

impl ExactMoments {
    /// `Var(T)` for one sample, valid when `E[F] = 0`.
    pub fn single_sample_variance(&self) -> f64 {
        self.pg2 - self.pg * self.pg + self.f2 - 2.0 * self.pgf
    }
}

fn check_inputs(
    model: &RewardModel,
    logging: &FactoredPolicy,
    target: &FactoredPolicy,
    params: &AdditiveEstimatorParams,
) -> Result<SlotWeights> {
    if model.spec() != logging.spec() {
        return Err(Error::InvalidSpec(
            "model and logging policy have different specs".into(),
        ));
    }
    if params.slot_count() != logging.spec().slot_count() {
        return Err(Error::LengthMismatch {
            what: "estimator weights",
            expected: logging.spec().slot_count(),
            got: params.slot_count(),
        });
    }
    logging.spec().check_enumerable(ENUMERATION_CAP)?;
    SlotWeights::new(target, logging)
}

/// Enumerates every slate to compute the moments entering `Var(T)`.
pub fn exact_moments(
    model: &RewardModel,
    logging: &FactoredPolicy,
    target: &FactoredPolicy,
    params: &AdditiveEstimatorParams,
) -> Result<ExactMoments> {
    let weights = check_inputs(model, logging, target, params)?;
    let mut m = ExactMoments::default();
    let mut y = vec![0.0; weights.slot_count()];
    for slate in logging.spec().slates(ENUMERATION_CAP)? {
        let actions = slate.actions();
        let mu = logging.actions_probability(actions);
        if mu == 0.0 {
            continue;
        }
        weights.fill(actions, &mut y);
        let p = model.rate(actions);
        let g = params.g_value(&y);
        let f = params.f_value(&y);
        m.pg2 += mu * p * g * g;
        m.pg += mu * p * g;
        m.f += mu * f;
        m.f2 += mu * f * f;
        m.pgf += mu * p * g * f;
        m.gf += mu * g * f;
    }
    Ok(m)
}

/// Exact single-sample variance `Var(T)` of an additive estimator.
///
/// The control variate must have zero-sum weights so that `E[F] = 0`.
/// Divide by `n` for the variance of an `n`-sample estimate.
pub fn exact_variance(
    model: &RewardModel,
    logging: &FactoredPolicy,
    target: &FactoredPolicy,
    params: &AdditiveEstimatorParams,
) -> Result<f64> {
    params.check_zero_sum()?;
    Ok(exact_moments(model, logging, target, params)?.single_sample_variance())
}

/// Exact bias `E[P G − F] − v_π` of an additive estimator.
pub fn exact_bias(
    model: &RewardModel,
    logging: &FactoredPolicy,
    target: &FactoredPolicy,
    params: &AdditiveEstimatorParams,
) -> Result<f64> {
    let m = exact_moments(model, logging, target, params)?;
    Ok(m.pg - m.f - model.true_policy_value(target)?)
}

/// `Σ w_k² α_k − 2P Σ w_k α_k`: the part of `n·ρ` that depends on the
/// control-variate weights.
pub fn qp_objective(weights: &[f64], alphas: &[f64], prior_mean: f64) -> f64 {
    let (quad, lin) = weights
        .iter()
        .zip(alphas)
        .fold((0.0, 0.0), |(q, l), (w, a)| (q + w * w * a, l + w * a));
    quad - 2.0 * prior_mean * lin
}

/// Predicted per-sample risk reduction of PI++ over PI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskPrediction {
    /// `n·(ρ_PI − ρ_PI++)`; positive means PI++ has lower risk.
    pub improvement_per_sample: f64,
    pub divergences: DivergenceSummary,
    pub true_prior_mean: f64,
    pub assumed_prior_mean: f64,
}

/// `−P'(P' − 2P̄)·K·(M − H)`, which is `P̄²·K·(M − H)` when `P' = P̄`.
pub fn predicted_improvement(
    divs: &DivergenceSummary,
    true_prior_mean: f64,
    assumed_prior_mean: f64,
) -> Result<RiskPrediction> {
    let gap = divs.arithmetic_mean() - divs.require_harmonic_mean()?;
    let k = divs.slot_count() as f64;
    // `+ 0.0` turns a −0 at P' = 2P̄ into 0.
    let improvement_per_sample = -assumed_prior_mean * (assumed_prior_mean - 2.0 * true_prior_mean) * k * gap + 0.0;
    Ok(RiskPrediction {
        improvement_per_sample,
        divergences: divs.clone(),
        true_prior_mean,
        assumed_prior_mean,
    })
}
