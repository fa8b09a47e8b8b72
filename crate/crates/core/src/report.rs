//! Run configuration, experiment dispatch and result files.
//!
//! A run is described by a flat `key = value` text file (`#` starts a
//! comment) plus overrides from the command line; overrides win. Every run
//! writes `manifest.cfg`, which is itself a valid config file that
//! reproduces the run.
//!
//! ```
//! use slate_ope::report::{parse_config_str, ExperimentKind};
//!
//! let cfg = parse_config_str("experiment = prior-grid\nseed = 7\nn = 1e7\n").unwrap();
//! assert_eq!(cfg.experiment, ExperimentKind::PriorGrid);
//! assert_eq!(cfg.sample_size, 10_000_000);
//! assert_eq!(cfg.cardinalities, vec![3, 50, 800]);
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::crosscheck::{run_cross_checks, CheckOutcome, CrossCheckConfig};
use crate::harness::{
    even_division_cardinalities, experiment_cardinality_grid, experiment_prior_grid, experiment_slot_sweep,
    fit_improvement_regression, CardinalityRule, EstimatorKind, ExperimentConfig, ImprovementStats, SweepRule,
    TensorResult, CLAMP_WARNING_FRACTION, DEFAULT_PRIOR_MEAN, DEFAULT_RELATIVE_SD, DEFAULT_REPLICATIONS,
    DEFAULT_SAMPLE_SIZE, DEFAULT_TENSOR_COUNT,
};
use crate::reward::ModelKind;
use crate::stats::LineFit;
use crate::{Error, Result};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const FITS_FILE: &str = "fits.csv";
pub const ORACLE_CHECK_FILE: &str = "oracle_check.csv";
pub const MANIFEST_FILE: &str = "manifest.cfg";

pub const RESULTS_HEADER: &str = "experiment,K,cardinalities,tensor_index,estimator,n,bias,variance,mse,nmse,delta_nmse,am,hm,predicted_improvement,p_bar,p_prime,seed";
const SUMMARY_HEADER: &str = "experiment,K,cardinalities,p_bar,p_prime,tensors,mean_delta_nmse,se_delta_nmse,mean_percent_improvement,mean_predicted_improvement,max_clamp_fraction";
const FITS_HEADER: &str = "experiment,K,slope,intercept,r_squared,points";
const ORACLE_HEADER: &str = "check,value,expected,tolerance,pass";

pub const DEFAULT_PRIOR_GRID_CARDINALITIES: [usize; 3] = [3, 50, 800];
pub const DEFAULT_ORACLE_CARDINALITIES: [usize; 2] = [2, 4];
pub const DEFAULT_CARDINALITY_CHOICES: [usize; 4] = [2, 10, 100, 1000];
pub const DEFAULT_K_VALUES: [usize; 4] = [2, 3, 4, 5];
pub const DEFAULT_ORACLE_MODELS: usize = 200;
pub const DEFAULT_OUT_DIR: &str = "results";

/// `{0.05, 0.10, …, 0.50}`.
pub fn default_prior_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 20.0).collect()
}

/// Every key accepted in a config file, in manifest order.
pub const CONFIG_KEYS: [&str; 20] = [
    "experiment",
    "seed",
    "n",
    "t",
    "s",
    "k",
    "d",
    "p_bar",
    "p_prime",
    "reward_kind",
    "relative_sd",
    "threads",
    "deterministic_reduce",
    "p_bar_grid",
    "p_prime_grid",
    "cardinality_choices",
    "k_values",
    "cardinality_rule",
    "oracle_models",
    "out_dir",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    PriorGrid,
    CardinalityGrid,
    SlotSweep,
    Regression,
    OracleCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::PriorGrid,
        ExperimentKind::CardinalityGrid,
        ExperimentKind::SlotSweep,
        ExperimentKind::Regression,
        ExperimentKind::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PriorGrid => "prior-grid",
            ExperimentKind::CardinalityGrid => "cardinality-grid",
            ExperimentKind::SlotSweep => "slot-sweep",
            ExperimentKind::Regression => "regression",
            ExperimentKind::OracleCheck => "oracle-check",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    /// Accepts `slot-sweep` and `slot_sweep` alike.
    fn from_str(s: &str) -> Result<Self, String> {
        let norm = s.replace('_', "-");
        Self::ALL.into_iter().find(|k| k.name() == norm).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
        })
    }
}

fn sweep_rule_name(rule: SweepRule) -> &'static str {
    match rule {
        SweepRule::EvenDivision => "even",
        SweepRule::UniformRandom => "random",
    }
}

/// A fully resolved run configuration. Defaults that depend on the
/// experiment are filled in at parse time, so the manifest echoes exactly
/// what ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub sample_size: u64,
    pub tensor_count: usize,
    pub replications: usize,
    /// Slate geometry for prior-grid and oracle-check.
    pub cardinalities: Vec<usize>,
    pub true_prior_mean: f64,
    pub assumed_prior_mean: f64,
    pub reward_kind: ModelKind,
    pub relative_sd: f64,
    /// Worker threads; `None` lets the thread pool decide.
    pub threads: Option<usize>,
    /// Accepted for compatibility. Reductions are always in index order, so
    /// output is bit-identical whether or not this is set.
    pub deterministic_reduce: bool,
    pub true_prior_grid: Vec<f64>,
    pub assumed_prior_grid: Vec<f64>,
    pub cardinality_choices: Vec<usize>,
    pub k_values: Vec<usize>,
    pub cardinality_rule: SweepRule,
    pub oracle_models: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn slot_count(&self) -> usize {
        self.cardinalities.len()
    }

    /// The per-experiment harness config; grid experiments override the
    /// geometry or prior per cell.
    pub fn experiment_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            cardinalities: CardinalityRule::Fixed(self.cardinalities.clone()),
            sample_size: self.sample_size,
            tensor_count: self.tensor_count,
            replications: self.replications,
            true_prior_mean: self.true_prior_mean,
            assumed_prior_mean: self.assumed_prior_mean,
            reward_kind: self.reward_kind,
            relative_sd: self.relative_sd,
            seed: self.seed,
        }
    }

    pub fn cross_check_config(&self) -> CrossCheckConfig {
        CrossCheckConfig {
            cardinalities: self.cardinalities.clone(),
            true_prior_mean: self.true_prior_mean,
            assumed_prior_mean: self.assumed_prior_mean,
            reward_kind: self.reward_kind,
            relative_sd: self.relative_sd,
            sample_size: self.sample_size,
            replications: self.replications,
            model_draws: self.oracle_models,
            seed: self.seed,
        }
    }

    /// `key = value` lines for every key, parseable by [`parse_config_str`].
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("experiment", self.experiment.to_string());
        put("seed", self.seed.to_string());
        put("n", self.sample_size.to_string());
        put("t", self.tensor_count.to_string());
        put("s", self.replications.to_string());
        put("k", self.slot_count().to_string());
        put("d", dash_join(&self.cardinalities));
        put("p_bar", self.true_prior_mean.to_string());
        put("p_prime", self.assumed_prior_mean.to_string());
        put("reward_kind", self.reward_kind.to_string());
        put("relative_sd", self.relative_sd.to_string());
        put(
            "threads",
            self.threads.map_or_else(|| "auto".to_string(), |t| t.to_string()),
        );
        put("deterministic_reduce", self.deterministic_reduce.to_string());
        put("p_bar_grid", comma_join(&self.true_prior_grid));
        put("p_prime_grid", comma_join(&self.assumed_prior_grid));
        put("cardinality_choices", comma_join(&self.cardinality_choices));
        put("k_values", comma_join(&self.k_values));
        put("cardinality_rule", sweep_rule_name(self.cardinality_rule).to_string());
        put("oracle_models", self.oracle_models.to_string());
        put("out_dir", self.out_dir.display().to_string());
        out
    }
}

fn dash_join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

fn comma_join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Splits config text into `(key, value)` pairs. Keys are normalized to
/// snake case; duplicate and unknown keys are errors.
pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got `{line}`"),
            )
        })?;
        let key = normalize_key(key.trim())?;
        if seen.insert(key.clone(), ()).is_some() {
            return Err(Error::config(key, "set more than once"));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn normalize_key(key: &str) -> Result<String> {
    let k = key.replace('-', "_");
    if CONFIG_KEYS.contains(&k.as_str()) {
        Ok(k)
    } else {
        Err(Error::config(key, "unknown key"))
    }
}

/// Parses and validates a config file's text.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    build_config(parse_entries(text)?)
}

/// Reads an optional config file and applies `overrides` on top of it.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut entries = match path {
        Some(p) => parse_entries(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => Vec::new(),
    };
    for (k, v) in overrides {
        let k = normalize_key(k)?;
        entries.retain(|(key, _)| *key != k);
        entries.push((k, v.clone()));
    }
    build_config(entries)
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn take<T>(&mut self, key: &str, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>> {
        self.0
            .remove(key)
            .map(|v| parse(&v).map_err(|reason| Error::config(key, reason)))
            .transpose()
    }

    fn required<T>(&mut self, key: &str, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<T> {
        self.take(key, parse)?
            .ok_or_else(|| Error::config(key, "required but missing"))
    }
}

/// Non-negative integers, also in scientific notation (`1e7`).
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f <= 9_007_199_254_740_992.0 {
        Ok(f as u64)
    } else {
        Err(format!("`{s}` is not a non-negative integer"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match parse_count(s)? {
        0 => Err("must be at least 1".into()),
        v => usize::try_from(v).map_err(|_| format!("`{s}` is too large")),
    }
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(format!("{p} is outside (0, 1)"))
    }
}

fn parse_list<T>(s: &str, sep: char, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<T> = s
        .split(sep)
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(item)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        Err("list is empty".into())
    } else {
        Ok(items)
    }
}

fn parse_cardinality(s: &str) -> Result<usize, String> {
    match parse_count(s)? {
        0 | 1 => Err(format!("cardinality {s} must be at least 2")),
        v => usize::try_from(v).map_err(|_| format!("`{s}` is too large")),
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

fn build_config(entries: Vec<(String, String)>) -> Result<RunConfig> {
    let mut f = Fields(entries.into_iter().collect());
    let experiment = f.required("experiment", ExperimentKind::from_str)?;
    let seed = f.required("seed", parse_count)?;
    let sample_size = f
        .take("n", |s| parse_positive(s).map(|v| v as u64))?
        .unwrap_or(DEFAULT_SAMPLE_SIZE);
    let tensor_count = f.take("t", parse_positive)?.unwrap_or(DEFAULT_TENSOR_COUNT);
    let replications = f.take("s", parse_positive)?.unwrap_or(DEFAULT_REPLICATIONS);
    let k = f.take("k", parse_positive)?;
    let d = f.take("d", |s| parse_list(s, '-', parse_cardinality))?;
    let true_prior_mean = f.take("p_bar", parse_probability)?.unwrap_or(DEFAULT_PRIOR_MEAN);
    let assumed_prior_mean = f.take("p_prime", parse_probability)?.unwrap_or(DEFAULT_PRIOR_MEAN);
    let reward_kind = f
        .take("reward_kind", ModelKind::from_str)?
        .unwrap_or(ModelKind::Elementwise);
    let relative_sd = f
        .take("relative_sd", |s| match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
            _ => Err(format!("`{s}` is not a finite non-negative number")),
        })?
        .unwrap_or(DEFAULT_RELATIVE_SD);
    let threads = f
        .take("threads", |s| {
            if s == "auto" {
                Ok(None)
            } else {
                parse_positive(s).map(Some)
            }
        })?
        .flatten();
    let deterministic_reduce = f.take("deterministic_reduce", parse_bool)?.unwrap_or(false);
    let true_prior_grid = f
        .take("p_bar_grid", |s| parse_list(s, ',', parse_probability))?
        .unwrap_or_else(default_prior_grid);
    let assumed_prior_grid = f
        .take("p_prime_grid", |s| parse_list(s, ',', parse_probability))?
        .unwrap_or_else(default_prior_grid);
    let cardinality_choices = f
        .take("cardinality_choices", |s| parse_list(s, ',', parse_cardinality))?
        .unwrap_or_else(|| DEFAULT_CARDINALITY_CHOICES.to_vec());
    let explicit_k_values = f.take("k_values", |s| parse_list(s, ',', parse_positive))?;
    let cardinality_rule = f
        .take("cardinality_rule", |s| match s {
            "even" => Ok(SweepRule::EvenDivision),
            "random" => Ok(SweepRule::UniformRandom),
            _ => Err(format!("`{s}` is not `even` or `random`")),
        })?
        .unwrap_or(match experiment {
            ExperimentKind::Regression => SweepRule::UniformRandom,
            _ => SweepRule::EvenDivision,
        });
    let oracle_models = f
        .take("oracle_models", parse_positive)?
        .unwrap_or(DEFAULT_ORACLE_MODELS);
    let out_dir = f
        .take("out_dir", |s| Ok(PathBuf::from(s)))?
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    debug_assert!(f.0.is_empty(), "unhandled keys: {:?}", f.0.keys());

    let cardinalities = match (d, k) {
        (Some(d), Some(k)) if d.len() != k => {
            return Err(Error::config("k", format!("K = {k} but d has {} slots", d.len())));
        }
        (Some(d), _) => d,
        (None, Some(k)) => even_division_cardinalities(k).map_err(|e| Error::config("k", e.to_string()))?,
        (None, None) => match experiment {
            ExperimentKind::OracleCheck => DEFAULT_ORACLE_CARDINALITIES.to_vec(),
            _ => DEFAULT_PRIOR_GRID_CARDINALITIES.to_vec(),
        },
    };
    let k_values = match (explicit_k_values, k) {
        (Some(v), _) => v,
        (None, Some(k)) if k >= 2 => (2..=k).collect(),
        _ => DEFAULT_K_VALUES.to_vec(),
    };

    if let Some(bad) = k_values.iter().find(|&&k| k < 2) {
        return Err(Error::config("k_values", format!("K = {bad} is below 2")));
    }
    if cardinality_rule == SweepRule::EvenDivision {
        for &k in &k_values {
            even_division_cardinalities(k).map_err(|e| Error::config("k_values", e.to_string()))?;
        }
    }
    let needs_pairs = matches!(experiment, ExperimentKind::PriorGrid | ExperimentKind::OracleCheck);
    if reward_kind == ModelKind::Pairwise && needs_pairs && cardinalities.len() < 2 {
        return Err(Error::config("reward_kind", "pairwise rewards need at least two slots"));
    }
    if experiment == ExperimentKind::OracleCheck {
        if replications < 2 {
            return Err(Error::config("s", "oracle-check needs at least 2 replications"));
        }
        if oracle_models < 2 {
            return Err(Error::config(
                "oracle_models",
                "oracle-check needs at least 2 model draws",
            ));
        }
    }

    Ok(RunConfig {
        experiment,
        seed,
        sample_size,
        tensor_count,
        replications,
        cardinalities,
        true_prior_mean,
        assumed_prior_mean,
        reward_kind,
        relative_sd,
        threads,
        deterministic_reduce,
        true_prior_grid,
        assumed_prior_grid,
        cardinality_choices,
        k_values,
        cardinality_rule,
        oracle_models,
        out_dir,
    })
}

/// Everything needed to reproduce a run, plus where its files went.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: RunConfig,
    pub version: String,
    pub unix_timestamp: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config: RunConfig) -> Self {
        Self {
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            unix_timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            outputs: Vec::new(),
        }
    }

    /// Metadata as comments, then the config. Parsing the text back with
    /// [`parse_config_str`] yields the same config.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# slate-ope {}\n# unix_timestamp {}\n# outputs {}\n",
            self.version,
            self.unix_timestamp,
            self.outputs.join(" ")
        );
        out.push_str(&self.config.to_config_string());
        out
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// Renders a header and rows as CSV text.
fn to_csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Writing into memory cannot fail.
    w.write_record(header.split(',')).expect("in-memory CSV write");
    for row in rows {
        w.write_record(&row).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV of UTF-8 fields")
}

/// One row per estimator per tensor, under [`RESULTS_HEADER`].
pub fn results_csv(experiment: ExperimentKind, seed: u64, results: &[TensorResult]) -> String {
    let rows = results.iter().flat_map(|r| {
        EstimatorKind::ALL.into_iter().map(move |kind| {
            let s = r.summary(kind);
            vec![
                experiment.to_string(),
                r.slot_count().to_string(),
                dash_join(r.spec.cardinalities()),
                r.tensor_index.to_string(),
                kind.to_string(),
                r.sample_size.to_string(),
                s.bias.to_string(),
                s.variance.to_string(),
                s.mse.to_string(),
                s.nmse.to_string(),
                r.delta_nmse.to_string(),
                r.divergences.arithmetic_mean().to_string(),
                opt(r.divergences.harmonic_mean()),
                r.predicted_improvement.to_string(),
                r.true_prior_mean.to_string(),
                r.assumed_prior_mean.to_string(),
                seed.to_string(),
            ]
        })
    });
    to_csv(RESULTS_HEADER, rows)
}

/// Writes `results.csv` and `manifest.cfg` into `out_dir`.
pub fn write_results(results: &[TensorResult], manifest: &mut RunManifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(Error::Precondition("no results to write".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv = out_dir.join(RESULTS_FILE);
    write_file(
        &csv,
        &results_csv(manifest.config.experiment, manifest.config.seed, results),
    )?;
    manifest.outputs.push(RESULTS_FILE.to_string());
    let path = write_manifest(manifest, out_dir)?;
    Ok(vec![csv, path])
}

pub fn write_manifest(manifest: &RunManifest, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(MANIFEST_FILE);
    write_file(&path, &manifest.to_text())?;
    Ok(path)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Aggregate row for one experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub cardinalities: Option<Vec<usize>>,
    pub slots: usize,
    pub true_prior_mean: f64,
    pub assumed_prior_mean: f64,
    pub tensors: usize,
    pub stats: ImprovementStats,
}

fn summary_csv(experiment: ExperimentKind, rows: &[SummaryRow]) -> String {
    to_csv(
        SUMMARY_HEADER,
        rows.iter().map(|r| {
            vec![
                experiment.to_string(),
                r.slots.to_string(),
                r.cardinalities.as_deref().map(dash_join).unwrap_or_default(),
                r.true_prior_mean.to_string(),
                r.assumed_prior_mean.to_string(),
                r.tensors.to_string(),
                r.stats.mean_delta_nmse.to_string(),
                r.stats.se_delta_nmse.to_string(),
                r.stats.mean_percent_improvement.to_string(),
                r.stats.mean_predicted_improvement.to_string(),
                r.stats.max_clamp_fraction.to_string(),
            ]
        }),
    )
}

fn fits_csv(experiment: ExperimentKind, fits: &[(Option<usize>, LineFit)]) -> String {
    to_csv(
        FITS_HEADER,
        fits.iter().map(|(k, f)| {
            vec![
                experiment.to_string(),
                k.map(|k| k.to_string()).unwrap_or_default(),
                f.slope.to_string(),
                f.intercept.to_string(),
                f.r_squared.to_string(),
                f.points.to_string(),
            ]
        }),
    )
}

fn oracle_csv(checks: &[CheckOutcome]) -> String {
    to_csv(
        ORACLE_HEADER,
        checks.iter().map(|c| {
            vec![
                c.name.clone(),
                c.value.to_string(),
                c.expected.to_string(),
                c.tolerance.to_string(),
                c.passed.to_string(),
            ]
        }),
    )
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub tensors: Vec<TensorResult>,
    pub summaries: Vec<SummaryRow>,
    /// `None` for a slot sweep's cross-K trend line.
    pub fits: Vec<(Option<usize>, LineFit)>,
    pub checks: Vec<CheckOutcome>,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    /// False only when an oracle check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Human-readable lines for the terminal.
    pub fn report_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for r in &self.summaries {
            let d = r
                .cardinalities
                .as_deref()
                .map(dash_join)
                .unwrap_or_else(|| format!("random, K={}", r.slots));
            lines.push(format!(
                "D={d} P̄={} P'={}: delta_nmse {:.6} ± {:.6} (predicted {:.6}, {:.2}% of PI)",
                r.true_prior_mean,
                r.assumed_prior_mean,
                r.stats.mean_delta_nmse,
                r.stats.se_delta_nmse,
                r.stats.mean_predicted_improvement,
                r.stats.mean_percent_improvement,
            ));
        }
        for (k, f) in &self.fits {
            let label = k.map_or_else(|| "trend across K".to_string(), |k| format!("K={k}"));
            lines.push(format!(
                "{label}: slope {:.4} intercept {:.4} R² {:.4}",
                f.slope, f.intercept, f.r_squared
            ));
        }
        for c in &self.checks {
            lines.push(format!(
                "{} {}: {} vs {} (tol {})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.expected,
                c.tolerance
            ));
        }
        for f in &self.files {
            lines.push(format!("wrote {}", f.display()));
        }
        lines
    }
}

fn clamp_warnings(tensors: &[TensorResult]) -> Vec<String> {
    let worst = tensors.iter().map(|t| t.clamp_fraction).fold(0.0, f64::max);
    if worst > CLAMP_WARNING_FRACTION {
        vec![format!(
            "{:.2}% of simulated rates were clamped to [0, 1]; the prior mean no longer matches P̄",
            100.0 * worst
        )]
    } else {
        Vec::new()
    }
}

/// Runs the configured experiment and writes its files into `cfg.out_dir`.
pub fn run(cfg: &RunConfig, progress: &mut dyn FnMut(&str)) -> Result<RunOutcome> {
    let template = cfg.experiment_config();
    let mut outcome = RunOutcome {
        files: Vec::new(),
        tensors: Vec::new(),
        summaries: Vec::new(),
        fits: Vec::new(),
        checks: Vec::new(),
        warnings: Vec::new(),
    };
    match cfg.experiment {
        ExperimentKind::PriorGrid => {
            let grid = experiment_prior_grid(&template, &cfg.true_prior_grid, &cfg.assumed_prior_grid, progress)?;
            outcome.summaries = grid
                .cells
                .iter()
                .map(|c| SummaryRow {
                    cardinalities: Some(cfg.cardinalities.clone()),
                    slots: cfg.slot_count(),
                    true_prior_mean: c.true_prior_mean,
                    assumed_prior_mean: c.assumed_prior_mean,
                    tensors: cfg.tensor_count,
                    stats: c.stats,
                })
                .collect();
            outcome.tensors = grid.tensors;
        }
        ExperimentKind::CardinalityGrid => {
            let grid = experiment_cardinality_grid(&template, &cfg.cardinality_choices, progress)?;
            outcome.summaries = grid
                .cells
                .iter()
                .map(|c| SummaryRow {
                    cardinalities: Some(vec![c.cardinalities.0, c.cardinalities.1]),
                    slots: 2,
                    true_prior_mean: cfg.true_prior_mean,
                    assumed_prior_mean: cfg.assumed_prior_mean,
                    tensors: cfg.tensor_count,
                    stats: c.stats,
                })
                .collect();
            outcome.tensors = grid.tensors;
        }
        ExperimentKind::SlotSweep | ExperimentKind::Regression => {
            let sweep = experiment_slot_sweep(&template, &cfg.k_values, cfg.cardinality_rule, progress)?;
            outcome.summaries = sweep
                .entries
                .iter()
                .map(|e| SummaryRow {
                    cardinalities: match cfg.cardinality_rule {
                        SweepRule::EvenDivision => Some(e.tensors[0].spec.cardinalities().to_vec()),
                        SweepRule::UniformRandom => None,
                    },
                    slots: e.slots,
                    true_prior_mean: cfg.true_prior_mean,
                    assumed_prior_mean: cfg.assumed_prior_mean,
                    tensors: e.tensors.len(),
                    stats: e.stats,
                })
                .collect();
            if cfg.experiment == ExperimentKind::Regression {
                outcome.fits = fit_improvement_regression(sweep.tensors())?
                    .into_iter()
                    .map(|f| (Some(f.slots), f.fit))
                    .collect();
            } else if sweep.entries.len() >= 3 {
                outcome.fits = vec![(None, sweep.trend_fit()?)];
            }
            outcome.tensors = sweep.entries.into_iter().flat_map(|e| e.tensors).collect();
        }
        ExperimentKind::OracleCheck => {
            outcome.checks = run_cross_checks(&cfg.cross_check_config(), progress)?;
        }
    }
    outcome.warnings = clamp_warnings(&outcome.tensors);

    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = RunManifest::new(cfg.clone());
    if outcome.checks.is_empty() {
        let csv = dir.join(RESULTS_FILE);
        write_file(&csv, &results_csv(cfg.experiment, cfg.seed, &outcome.tensors))?;
        manifest.outputs.push(RESULTS_FILE.into());
        outcome.files.push(csv);
        let summary = dir.join(SUMMARY_FILE);
        write_file(&summary, &summary_csv(cfg.experiment, &outcome.summaries))?;
        manifest.outputs.push(SUMMARY_FILE.into());
        outcome.files.push(summary);
    } else {
        let path = dir.join(ORACLE_CHECK_FILE);
        write_file(&path, &oracle_csv(&outcome.checks))?;
        manifest.outputs.push(ORACLE_CHECK_FILE.into());
        outcome.files.push(path);
    }
    if !outcome.fits.is_empty() {
        let path = dir.join(FITS_FILE);
        write_file(&path, &fits_csv(cfg.experiment, &outcome.fits))?;
        manifest.outputs.push(FITS_FILE.into());
        outcome.files.push(path);
    }
    outcome.files.push(write_manifest(&manifest, dir)?);
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let cfg = parse_config_str("experiment=slot_sweep\nseed=42\n").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::SlotSweep);
        assert_eq!(cfg.seed, 42);
        assert_eq!(
            (cfg.sample_size, cfg.tensor_count, cfg.replications),
            (100_000, 50, 500)
        );
        assert_eq!((cfg.true_prior_mean, cfg.assumed_prior_mean), (0.25, 0.25));
        assert_eq!(cfg.k_values, vec![2, 3, 4, 5]);
        assert_eq!(cfg.cardinality_rule, SweepRule::EvenDivision);
        assert_eq!(cfg.reward_kind, ModelKind::Elementwise);
        assert_eq!(cfg.relative_sd, 0.1);
        assert_eq!(cfg.true_prior_grid.len(), 10);
        assert!(!cfg.deterministic_reduce);
    }

    #[test]
    fn large_scale_prior_grid_config() {
        let cfg = parse_config_str("experiment = prior-grid\nseed = 1\nd = 3-50-800\nk = 3\nn = 1e7\nt = 50").unwrap();
        assert_eq!(cfg.cardinalities, vec![3, 50, 800]);
        assert_eq!(cfg.sample_size, 10_000_000);
        assert_eq!(cfg.tensor_count, 50);
        assert_eq!(
            cfg.experiment_config().cardinalities,
            CardinalityRule::Fixed(vec![3, 50, 800])
        );
    }

    #[test]
    fn errors_name_the_key() {
        let err = |text: &str| parse_config_str(text).unwrap_err().to_string();
        assert!(err("experiment = prior-grid\nseed = 1\np_bar = 1.5").contains("p_bar"));
        assert!(err("experiment = prior-grid\nseed = 1\ncolour = red").contains("colour"));
        assert!(err("experiment = prior-grid").contains("seed"));
        assert!(err("seed = 3").contains("experiment"));
        assert!(err("experiment = prior-grid\nseed = 1\nseed = 2").contains("seed"));
        assert!(err("experiment = prior-grid\nseed = 1\nd = 3-1").contains("`d`"));
        assert!(err("experiment = prior-grid\nseed = 1\nd = 3-4\nk = 3").contains("`k`"));
        assert!(err("experiment = prior-grid\nseed = 1\nn = 2.5").contains("`n`"));
        assert!(err("experiment = nope\nseed = 1").contains("experiment"));
        assert!(err("experiment = prior-grid\nseed = 1\nno equals sign").contains("line 3"));
    }

    #[test]
    fn k_alone_selects_even_division() {
        let cfg = parse_config_str("experiment = prior-grid\nseed = 1\nk = 4").unwrap();
        assert_eq!(cfg.cardinalities, vec![2, 33, 66, 100]);
        let sweep = parse_config_str("experiment = regression\nseed = 1\nk = 4").unwrap();
        assert_eq!(sweep.k_values, vec![2, 3, 4]);
        assert_eq!(sweep.cardinality_rule, SweepRule::UniformRandom);
    }

    #[test]
    fn overrides_win_and_keys_may_use_dashes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "experiment = prior-grid  # grid\nseed = 1\np_bar = 0.2\n").unwrap();
        let cfg = parse_config(
            Some(&path),
            &[("p-bar".into(), "0.4".into()), ("seed".into(), "9".into())],
        )
        .unwrap();
        assert_eq!(cfg.true_prior_mean, 0.4);
        assert_eq!(cfg.seed, 9);
        assert!(parse_config(Some(&dir.path().join("missing.cfg")), &[]).is_err());
        assert!(parse_config(None, &[("bogus".into(), "1".into())]).is_err());
    }

    #[test]
    fn manifest_round_trips() {
        let cfg = parse_config_str(
            "experiment = cardinality-grid\nseed = 77\nthreads = 3\np_bar = 0.1\np_prime_grid = 0.1,0.35\nout_dir = /tmp/x y",
        )
        .unwrap();
        let mut m = RunManifest::new(cfg.clone());
        m.outputs.push(RESULTS_FILE.into());
        assert_eq!(parse_config_str(&m.to_text()).unwrap(), cfg);
    }
}
