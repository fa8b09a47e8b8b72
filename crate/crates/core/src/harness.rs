//! Replicated simulation experiments.
//!
//! A *tensor* is one random reward model. For each tensor the harness draws
//! `S` independent datasets of `N` slates from a uniform logging policy,
//! evaluates the deterministic target `π(a) = 1[a = (0, …, 0)]` with IPS, PI
//! and PI++, and measures bias, variance and MSE against the exact value.
//!
//! All randomness comes from [`crate::rng::stream`], keyed by the root seed,
//! the tensor index and the replication index. Replications run in parallel
//! but their results are reduced in index order, so a config always produces
//! bit-identical results regardless of the thread count.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimators::{optimal_cv_weights, AdditiveEstimatorParams, EstimateFold, LoggedDataset, LoggedSample};
use crate::oracle::predicted_improvement;
use crate::reward::{draw_model, ModelDrawConfig, ModelKind, RewardModel};
use crate::rng::{stream, SimRng, StreamPurpose};
use crate::slate::{compute_divergences, DivergenceSummary, FactoredPolicy, Slate, SlateSpec, SlotWeights};
use crate::stats::{fit_line, mean, standard_error, LineFit};
use crate::{Error, Result};

pub const DEFAULT_SAMPLE_SIZE: u64 = 100_000;
pub const DEFAULT_TENSOR_COUNT: usize = 50;
pub const DEFAULT_REPLICATIONS: usize = 500;
pub const DEFAULT_PRIOR_MEAN: f64 = 0.25;
pub const DEFAULT_RELATIVE_SD: f64 = 0.1;
pub const MIN_CARDINALITY: usize = 2;
pub const MAX_CARDINALITY: usize = 100;

/// Clamp fraction above which the prior-mean assumption is unreliable.
pub const CLAMP_WARNING_FRACTION: f64 = 0.01;

/// How slot cardinalities are chosen for each tensor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CardinalityRule {
    Fixed(Vec<usize>),
    /// `d_0 = 2`, `d_k = ⌊k·100/(K−1)⌋`; `K = 4` gives `[2, 33, 66, 100]`.
    EvenDivision {
        slots: usize,
    },
    /// `d_k` uniform on `2..=100`, redrawn per tensor.
    UniformRandom {
        slots: usize,
    },
}

impl CardinalityRule {
    pub fn slot_count(&self) -> usize {
        match self {
            CardinalityRule::Fixed(d) => d.len(),
            CardinalityRule::EvenDivision { slots } | CardinalityRule::UniformRandom { slots } => *slots,
        }
    }
}

/// Evenly spread cardinalities between [`MIN_CARDINALITY`] and
/// [`MAX_CARDINALITY`].
pub fn even_division_cardinalities(slots: usize) -> Result<Vec<usize>> {
    if slots < 2 {
        return Err(Error::InvalidSpec(format!("even division needs K >= 2, got {slots}")));
    }
    let d: Vec<usize> = std::iter::once(MIN_CARDINALITY)
        .chain((1..slots).map(|k| k * MAX_CARDINALITY / (slots - 1)))
        .collect();
    if let Some(bad) = d.iter().find(|&&x| x < MIN_CARDINALITY) {
        return Err(Error::InvalidSpec(format!(
            "K = {slots} is too large to divide [{MIN_CARDINALITY}, {MAX_CARDINALITY}] (got d = {bad})"
        )));
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    Ips,
    Pi,
    PiPlusPlus,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::Ips, EstimatorKind::Pi, EstimatorKind::PiPlusPlus];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Ips => "IPS",
            EstimatorKind::Pi => "PI",
            EstimatorKind::PiPlusPlus => "PI++",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub cardinalities: CardinalityRule,
    /// `N`, slates per dataset.
    pub sample_size: u64,
    /// `T`, reward models drawn.
    pub tensor_count: usize,
    /// `S`, datasets per reward model.
    pub replications: usize,
    /// `P̄`, prior mean of the simulated rates.
    pub true_prior_mean: f64,
    /// `P'`, prior mean assumed by PI++.
    pub assumed_prior_mean: f64,
    pub reward_kind: ModelKind,
    pub relative_sd: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Desk-scale defaults for everything except the cardinalities and seed.
    pub fn new(cardinalities: CardinalityRule, seed: u64) -> Self {
        Self {
            cardinalities,
            sample_size: DEFAULT_SAMPLE_SIZE,
            tensor_count: DEFAULT_TENSOR_COUNT,
            replications: DEFAULT_REPLICATIONS,
            true_prior_mean: DEFAULT_PRIOR_MEAN,
            assumed_prior_mean: DEFAULT_PRIOR_MEAN,
            reward_kind: ModelKind::Elementwise,
            relative_sd: DEFAULT_RELATIVE_SD,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_size == 0 || self.tensor_count == 0 || self.replications == 0 {
            return Err(Error::Precondition("N, T and S must all be at least 1".into()));
        }
        for (name, p) in [("true", self.true_prior_mean), ("assumed", self.assumed_prior_mean)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Precondition(format!("{name} prior mean {p} must lie in (0, 1)")));
            }
        }
        ModelDrawConfig::new(self.true_prior_mean, self.relative_sd, self.reward_kind)?;
        match &self.cardinalities {
            CardinalityRule::Fixed(d) => {
                SlateSpec::new(d.clone())?;
            }
            CardinalityRule::EvenDivision { slots } => {
                even_division_cardinalities(*slots)?;
            }
            CardinalityRule::UniformRandom { slots } => {
                if *slots == 0 {
                    return Err(Error::InvalidSpec("K must be at least 1".into()));
                }
            }
        }
        if self.reward_kind == ModelKind::Pairwise && self.cardinalities.slot_count() < 2 {
            return Err(Error::InvalidSpec("pairwise rewards need K >= 2".into()));
        }
        Ok(())
    }

    /// The slate geometry used by tensor `tensor_index`.
    pub fn spec_for_tensor(&self, tensor_index: usize) -> Result<SlateSpec> {
        match &self.cardinalities {
            CardinalityRule::Fixed(d) => SlateSpec::new(d.clone()),
            CardinalityRule::EvenDivision { slots } => SlateSpec::new(even_division_cardinalities(*slots)?),
            CardinalityRule::UniformRandom { slots } => {
                let mut rng = stream(self.seed, StreamPurpose::Cardinalities, tensor_index as u64, 0);
                SlateSpec::new(
                    (0..*slots)
                        .map(|_| rng.random_range(MIN_CARDINALITY..=MAX_CARDINALITY))
                        .collect(),
                )
            }
        }
    }

    fn draw_config(&self) -> Result<ModelDrawConfig> {
        ModelDrawConfig::new(self.true_prior_mean, self.relative_sd, self.reward_kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: EstimatorKind,
    pub mean_estimate: f64,
    pub bias: f64,
    /// Across replications, with a `1/S` denominator so that
    /// `mse = bias² + variance`.
    pub variance: f64,
    pub mse: f64,
    /// `N · mse`.
    pub nmse: f64,
}

impl EstimatorSummary {
    /// Summarizes replicated estimates against the true value. With a single
    /// replication the variance is 0 and the MSE is the squared bias.
    pub fn from_estimates(estimator: EstimatorKind, estimates: &[f64], truth: f64, sample_size: u64) -> Self {
        let s = estimates.len() as f64;
        let mean_estimate = mean(estimates);
        let variance = estimates.iter().map(|e| (e - mean_estimate).powi(2)).sum::<f64>() / s;
        let mse = estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / s;
        Self {
            estimator,
            mean_estimate,
            bias: mean_estimate - truth,
            variance,
            mse,
            nmse: sample_size as f64 * mse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorResult {
    pub tensor_index: usize,
    pub spec: SlateSpec,
    pub divergences: DivergenceSummary,
    pub v_pi: f64,
    pub summaries: Vec<EstimatorSummary>,
    /// `nmse(PI) − nmse(PI++)`.
    pub delta_nmse: f64,
    /// Closed-form `n·(ρ_PI − ρ_PI++)` for this tensor's divergences.
    pub predicted_improvement: f64,
    pub true_prior_mean: f64,
    pub assumed_prior_mean: f64,
    pub sample_size: u64,
    pub replications: usize,
    /// Fraction of simulated slates whose raw rate fell outside `[0, 1]`.
    pub clamp_fraction: f64,
}

impl TensorResult {
    pub fn summary(&self, kind: EstimatorKind) -> &EstimatorSummary {
        self.summaries
            .iter()
            .find(|s| s.estimator == kind)
            .expect("every tensor result summarizes all estimators")
    }

    /// `100 · delta_nmse / nmse(PI)`.
    pub fn percent_improvement(&self) -> f64 {
        100.0 * self.delta_nmse / self.summary(EstimatorKind::Pi).nmse
    }

    pub fn slot_count(&self) -> usize {
        self.spec.slot_count()
    }
}

/// Draws one logged sample: the slate first, then the reward.
#[inline]
fn draw_sample(model: &RewardModel, logging: &FactoredPolicy, rng: &mut SimRng, actions: &mut [usize]) -> (bool, bool) {
    logging.sample_into(rng, actions);
    let raw = model.raw_rate(actions);
    let clamped = !(0.0..=1.0).contains(&raw);
    let reward = rng.random::<f64>() < raw.clamp(0.0, 1.0);
    (reward, clamped)
}

/// `n` i.i.d. slates from `logging` with Bernoulli rewards from `model`.
pub fn generate_dataset(
    model: &RewardModel,
    logging: &FactoredPolicy,
    n: usize,
    rng: &mut SimRng,
) -> Result<LoggedDataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if model.spec() != logging.spec() {
        return Err(Error::InvalidSpec(
            "model and logging policy have different specs".into(),
        ));
    }
    let mut actions = vec![0; logging.spec().slot_count()];
    let samples = (0..n)
        .map(|_| {
            let (reward, _) = draw_sample(model, logging, rng, &mut actions);
            LoggedSample {
                slate: Slate::new(actions.clone()),
                reward,
            }
        })
        .collect();
    LoggedDataset::new(logging.clone(), samples)
}

/// Streams the same draws as [`generate_dataset`] straight into a fold.
/// Returns the fold and the number of clamped slates.
pub fn simulate_fold(
    model: &RewardModel,
    logging: &FactoredPolicy,
    weights: &SlotWeights,
    n: u64,
    rng: &mut SimRng,
) -> (EstimateFold, u64) {
    let k = logging.spec().slot_count();
    let mut fold = EstimateFold::new(k);
    let mut actions = vec![0; k];
    let mut y = vec![0.0; k];
    let mut clamps = 0;
    for _ in 0..n {
        let (reward, clamped) = draw_sample(model, logging, rng, &mut actions);
        clamps += clamped as u64;
        weights.fill(&actions, &mut y);
        fold.push(&y, reward);
    }
    (fold, clamps)
}

/// Runs one tensor and reports it once per assumed prior mean. All priors
/// share the same reward model and datasets.
pub fn run_tensor_priors(
    cfg: &ExperimentConfig,
    tensor_index: usize,
    assumed_priors: &[f64],
) -> Result<Vec<TensorResult>> {
    cfg.validate()?;
    let spec = cfg.spec_for_tensor(tensor_index)?;
    let logging = FactoredPolicy::uniform(&spec);
    let target = FactoredPolicy::deterministic(&spec, &Slate::zeros(&spec))?;
    let divergences = compute_divergences(&target, &logging)?;
    let controls = assumed_priors
        .iter()
        .map(|&p| optimal_cv_weights(&divergences, p))
        .collect::<Result<Vec<_>>>()?;

    let mut model_rng = stream(cfg.seed, StreamPurpose::Model, tensor_index as u64, 0);
    let model = draw_model(&spec, &cfg.draw_config()?, &mut model_rng)?;
    let v_pi = model.true_policy_value(&target)?;
    let weights = SlotWeights::new(&target, &logging)?;

    let runs: Vec<(EstimateFold, u64)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(cfg.seed, StreamPurpose::Replication, tensor_index as u64, rep as u64);
            simulate_fold(&model, &logging, &weights, cfg.sample_size, &mut rng)
        })
        .collect();

    let clamp_total: u64 = runs.iter().map(|(_, c)| c).sum();
    let clamp_fraction = clamp_total as f64 / (cfg.sample_size as f64 * cfg.replications as f64);
    let pi_params = AdditiveEstimatorParams::pi(spec.slot_count());
    let ips: Vec<f64> = runs.iter().map(|(f, _)| f.ips()).collect::<Result<_>>()?;
    let pi: Vec<f64> = runs
        .iter()
        .map(|(f, _)| f.additive(&pi_params))
        .collect::<Result<_>>()?;
    let ips_summary = EstimatorSummary::from_estimates(EstimatorKind::Ips, &ips, v_pi, cfg.sample_size);
    let pi_summary = EstimatorSummary::from_estimates(EstimatorKind::Pi, &pi, v_pi, cfg.sample_size);

    controls
        .iter()
        .map(|cv| {
            let params = AdditiveEstimatorParams::pi_plus_plus(cv);
            let pipp: Vec<f64> = runs.iter().map(|(f, _)| f.additive(&params)).collect::<Result<_>>()?;
            let pipp_summary =
                EstimatorSummary::from_estimates(EstimatorKind::PiPlusPlus, &pipp, v_pi, cfg.sample_size);
            let prediction = predicted_improvement(&divergences, cfg.true_prior_mean, cv.prior_mean())?;
            Ok(TensorResult {
                tensor_index,
                spec: spec.clone(),
                divergences: divergences.clone(),
                v_pi,
                delta_nmse: pi_summary.nmse - pipp_summary.nmse,
                summaries: vec![ips_summary.clone(), pi_summary.clone(), pipp_summary],
                predicted_improvement: prediction.improvement_per_sample,
                true_prior_mean: cfg.true_prior_mean,
                assumed_prior_mean: cv.prior_mean(),
                sample_size: cfg.sample_size,
                replications: cfg.replications,
                clamp_fraction,
            })
        })
        .collect()
}

/// Draws reward model `tensor_index` and runs its `S` replications.
pub fn run_tensor(cfg: &ExperimentConfig, tensor_index: usize) -> Result<TensorResult> {
    Ok(run_tensor_priors(cfg, tensor_index, &[cfg.assumed_prior_mean])?.remove(0))
}

/// All `T` tensors of a config, in index order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TensorResult>> {
    run_experiment_priors(cfg, &[cfg.assumed_prior_mean])
        .map(|per_prior| per_prior.into_iter().next().unwrap_or_default())
}

/// All `T` tensors, reported for each assumed prior. The outer vector is
/// indexed like `assumed_priors`.
pub fn run_experiment_priors(cfg: &ExperimentConfig, assumed_priors: &[f64]) -> Result<Vec<Vec<TensorResult>>> {
    cfg.validate()?;
    let per_tensor: Vec<Vec<TensorResult>> = (0..cfg.tensor_count)
        .into_par_iter()
        .map(|t| run_tensor_priors(cfg, t, assumed_priors))
        .collect::<Result<_>>()?;
    let mut per_prior = vec![Vec::with_capacity(cfg.tensor_count); assumed_priors.len()];
    for results in per_tensor {
        for (slot, r) in per_prior.iter_mut().zip(results) {
            slot.push(r);
        }
    }
    Ok(per_prior)
}

/// Mean and standard error of `delta_nmse` over a set of tensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImprovementStats {
    pub mean_delta_nmse: f64,
    pub se_delta_nmse: f64,
    pub mean_percent_improvement: f64,
    pub mean_predicted_improvement: f64,
    pub max_clamp_fraction: f64,
}

impl ImprovementStats {
    pub fn of(results: &[TensorResult]) -> Self {
        let deltas: Vec<f64> = results.iter().map(|r| r.delta_nmse).collect();
        let percents: Vec<f64> = results.iter().map(TensorResult::percent_improvement).collect();
        let predicted: Vec<f64> = results.iter().map(|r| r.predicted_improvement).collect();
        Self {
            mean_delta_nmse: mean(&deltas),
            se_delta_nmse: standard_error(&deltas),
            mean_percent_improvement: mean(&percents),
            mean_predicted_improvement: mean(&predicted),
            max_clamp_fraction: results.iter().map(|r| r.clamp_fraction).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorGridCell {
    pub true_prior_mean: f64,
    pub assumed_prior_mean: f64,
    pub stats: ImprovementStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorGrid {
    pub cells: Vec<PriorGridCell>,
    pub tensors: Vec<TensorResult>,
}

impl PriorGrid {
    pub fn cell(&self, true_prior_mean: f64, assumed_prior_mean: f64) -> Option<&PriorGridCell> {
        self.cells
            .iter()
            .find(|c| c.true_prior_mean == true_prior_mean && c.assumed_prior_mean == assumed_prior_mean)
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Precondition(format!("{name} grid is empty")));
    }
    if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::Precondition(format!("{name} grid value {p} must lie in (0, 1)")));
    }
    Ok(())
}

/// Mean `delta_nmse` for every `(P̄, P')` pair. Datasets are shared across
/// the `P'` values of one `P̄`.
pub fn experiment_prior_grid(
    template: &ExperimentConfig,
    true_prior_grid: &[f64],
    assumed_prior_grid: &[f64],
    progress: &mut dyn FnMut(&str),
) -> Result<PriorGrid> {
    check_grid("true prior", true_prior_grid)?;
    check_grid("assumed prior", assumed_prior_grid)?;
    let mut grid = PriorGrid {
        cells: Vec::new(),
        tensors: Vec::new(),
    };
    for &p_bar in true_prior_grid {
        progress(&format!("prior grid: P̄ = {p_bar}"));
        let cfg = ExperimentConfig {
            true_prior_mean: p_bar,
            ..template.clone()
        };
        for (results, &p_prime) in run_experiment_priors(&cfg, assumed_prior_grid)?
            .into_iter()
            .zip(assumed_prior_grid)
        {
            grid.cells.push(PriorGridCell {
                true_prior_mean: p_bar,
                assumed_prior_mean: p_prime,
                stats: ImprovementStats::of(&results),
            });
            grid.tensors.extend(results);
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityGridCell {
    pub cardinalities: (usize, usize),
    pub stats: ImprovementStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityGrid {
    pub cells: Vec<CardinalityGridCell>,
    pub tensors: Vec<TensorResult>,
}

impl CardinalityGrid {
    pub fn cell(&self, d1: usize, d2: usize) -> Option<&CardinalityGridCell> {
        self.cells.iter().find(|c| c.cardinalities == (d1, d2))
    }
}

/// Two-slot experiments over every `(d_1, d_2)` pair of `choices`.
pub fn experiment_cardinality_grid(
    template: &ExperimentConfig,
    choices: &[usize],
    progress: &mut dyn FnMut(&str),
) -> Result<CardinalityGrid> {
    if choices.is_empty() {
        return Err(Error::Precondition("no cardinality choices".into()));
    }
    if let Some(d) = choices.iter().find(|&&d| d < 2) {
        return Err(Error::Precondition(format!("cardinality {d} must be at least 2")));
    }
    let mut grid = CardinalityGrid {
        cells: Vec::new(),
        tensors: Vec::new(),
    };
    for &d1 in choices {
        for &d2 in choices {
            progress(&format!("cardinality grid: D = [{d1}, {d2}]"));
            let cfg = ExperimentConfig {
                cardinalities: CardinalityRule::Fixed(vec![d1, d2]),
                ..template.clone()
            };
            let results = run_experiment(&cfg)?;
            grid.cells.push(CardinalityGridCell {
                cardinalities: (d1, d2),
                stats: ImprovementStats::of(&results),
            });
            grid.tensors.extend(results);
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepRule {
    EvenDivision,
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSweepEntry {
    pub slots: usize,
    pub stats: ImprovementStats,
    pub tensors: Vec<TensorResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSweep {
    pub entries: Vec<SlotSweepEntry>,
}

impl SlotSweep {
    /// Least squares of per-K mean `delta_nmse` on per-K mean prediction.
    pub fn trend_fit(&self) -> Result<LineFit> {
        let x: Vec<f64> = self
            .entries
            .iter()
            .map(|e| e.stats.mean_predicted_improvement)
            .collect();
        let y: Vec<f64> = self.entries.iter().map(|e| e.stats.mean_delta_nmse).collect();
        fit_line(&x, &y)
    }

    pub fn tensors(&self) -> impl Iterator<Item = &TensorResult> {
        self.entries.iter().flat_map(|e| e.tensors.iter())
    }
}

pub fn experiment_slot_sweep(
    template: &ExperimentConfig,
    k_values: &[usize],
    rule: SweepRule,
    progress: &mut dyn FnMut(&str),
) -> Result<SlotSweep> {
    if k_values.is_empty() {
        return Err(Error::Precondition("no slot counts to sweep".into()));
    }
    let mut entries = Vec::with_capacity(k_values.len());
    for &slots in k_values {
        if slots < 2 {
            return Err(Error::Precondition(format!("slot sweep needs K >= 2, got {slots}")));
        }
        progress(&format!("slot sweep: K = {slots}"));
        let cardinalities = match rule {
            SweepRule::EvenDivision => CardinalityRule::EvenDivision { slots },
            SweepRule::UniformRandom => CardinalityRule::UniformRandom { slots },
        };
        let cfg = ExperimentConfig {
            cardinalities,
            ..template.clone()
        };
        let tensors = run_experiment(&cfg)?;
        entries.push(SlotSweepEntry {
            slots,
            stats: ImprovementStats::of(&tensors),
            tensors,
        });
    }
    Ok(SlotSweep { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub slots: usize,
    pub fit: LineFit,
}

/// Per-K least squares of `delta_nmse` on the predicted improvement
/// `P̄²K(M − H)`, one point per tensor. Needs at least three tensors per K
/// and some spread in the prediction (random cardinalities).
pub fn fit_improvement_regression<'a>(
    results: impl IntoIterator<Item = &'a TensorResult>,
) -> Result<Vec<RegressionFit>> {
    let mut groups: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in results {
        let g = groups.entry(r.slot_count()).or_default();
        g.0.push(r.predicted_improvement);
        g.1.push(r.delta_nmse);
    }
    if groups.is_empty() {
        return Err(Error::TooFewPoints { needed: 3, got: 0 });
    }
    groups
        .into_iter()
        .map(|(slots, (x, y))| {
            Ok(RegressionFit {
                slots,
                fit: fit_line(&x, &y)?,
            })
        })
        .collect()
}
