//! Slate-level Bernoulli rate models.
//!
//! Rates are additive over slots (`p(a) = Σ_k φ_k(a^k)`) or over slot pairs
//! (`p(a) = Σ_{k<j} φ_kj(a^k, a^j)`). Sums are clamped into `[0, 1]` when a
//! rate is evaluated; [`RewardModel::raw_rate`] exposes the pre-clamp value.
//! A fully tabulated model is also provided for small oracle checks.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::slate::{FactoredPolicy, SlateSpec};
use crate::{Error, Result, ENUMERATION_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Elementwise,
    Pairwise,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Elementwise => "elementwise",
            ModelKind::Pairwise => "pairwise",
        })
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "elementwise" => Ok(ModelKind::Elementwise),
            "pairwise" => Ok(ModelKind::Pairwise),
            other => Err(format!(
                "unknown reward kind `{other}` (expected elementwise or pairwise)"
            )),
        }
    }
}

/// Prior used to draw random rate models.
///
/// Each additive term is Gaussian with mean `prior_mean / C` and standard
/// deviation `relative_sd · prior_mean / C`, where `C` is the number of terms
/// in a slate's sum (`K` slots, or `K(K−1)/2` pairs). Slate rates therefore
/// have prior mean `prior_mean` under both kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelDrawConfig {
    pub prior_mean: f64,
    pub relative_sd: f64,
    pub kind: ModelKind,
}

impl ModelDrawConfig {
    pub fn new(prior_mean: f64, relative_sd: f64, kind: ModelKind) -> Result<Self> {
        if !(prior_mean > 0.0 && prior_mean < 1.0) {
            return Err(Error::InvalidModel(format!(
                "prior mean {prior_mean} must lie in (0, 1)"
            )));
        }
        if !(relative_sd >= 0.0 && relative_sd.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "relative sd {relative_sd} must be finite and >= 0"
            )));
        }
        Ok(Self {
            prior_mean,
            relative_sd,
            kind,
        })
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + sd * z
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementwiseModel {
    spec: SlateSpec,
    phis: Vec<Vec<f64>>,
}

impl ElementwiseModel {
    pub fn new(spec: &SlateSpec, phis: Vec<Vec<f64>>) -> Result<Self> {
        if phis.len() != spec.slot_count() {
            return Err(Error::LengthMismatch {
                what: "slot terms",
                expected: spec.slot_count(),
                got: phis.len(),
            });
        }
        for (k, phi) in phis.iter().enumerate() {
            if phi.len() != spec.cardinality(k) {
                return Err(Error::InvalidModel(format!(
                    "slot {k} has {} actions but {} terms",
                    spec.cardinality(k),
                    phi.len()
                )));
            }
            if phi.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel(format!("slot {k} has a non-finite term")));
            }
        }
        Ok(Self {
            spec: spec.clone(),
            phis,
        })
    }

    pub fn phis(&self) -> &[Vec<f64>] {
        &self.phis
    }

    #[inline]
    fn raw_rate(&self, actions: &[usize]) -> f64 {
        self.phis.iter().zip(actions).map(|(phi, &a)| phi[a]).sum()
    }

    fn raw_range(&self) -> (f64, f64) {
        self.phis.iter().fold((0.0, 0.0), |(lo, hi), phi| {
            let min = phi.iter().copied().fold(f64::INFINITY, f64::min);
            let max = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo + min, hi + max)
        })
    }
}

/// `φ_kj` for one slot pair `k < j`, stored row-major (`d_k × d_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct PairTerm {
    first: usize,
    second: usize,
    columns: usize,
    values: Vec<f64>,
}

impl PairTerm {
    pub fn slots(&self) -> (usize, usize) {
        (self.first, self.second)
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.columns + b]
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.columns).map(<[f64]>::to_vec).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseModel {
    spec: SlateSpec,
    pairs: Vec<PairTerm>,
}

/// Slot pairs `(k, j)`, `k < j`, in lexicographic order.
pub fn slot_pairs(slot_count: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..slot_count).flat_map(move |k| (k + 1..slot_count).map(move |j| (k, j)))
}

impl PairwiseModel {
    /// `tables` holds one `d_k × d_j` matrix per pair, in [`slot_pairs`] order.
    pub fn new(spec: &SlateSpec, tables: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let k = spec.slot_count();
        if k < 2 {
            return Err(Error::InvalidSpec("a pairwise model needs at least two slots".into()));
        }
        let expected = k * (k - 1) / 2;
        if tables.len() != expected {
            return Err(Error::LengthMismatch {
                what: "pair tables",
                expected,
                got: tables.len(),
            });
        }
        let pairs = slot_pairs(k)
            .zip(tables)
            .map(|((first, second), rows)| {
                let (dr, dc) = (spec.cardinality(first), spec.cardinality(second));
                if rows.len() != dr || rows.iter().any(|r| r.len() != dc) {
                    return Err(Error::InvalidModel(format!(
                        "pair ({first}, {second}) must be a {dr}x{dc} matrix"
                    )));
                }
                let values: Vec<f64> = rows.into_iter().flatten().collect();
                if values.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "pair ({first}, {second}) has a non-finite term"
                    )));
                }
                Ok(PairTerm {
                    first,
                    second,
                    columns: dc,
                    values,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: spec.clone(),
            pairs,
        })
    }

    pub fn pairs(&self) -> &[PairTerm] {
        &self.pairs
    }

    #[inline]
    fn raw_rate(&self, actions: &[usize]) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.values[actions[p.first] * p.columns + actions[p.second]])
            .sum()
    }

    fn raw_range(&self) -> (f64, f64) {
        self.pairs.iter().fold((0.0, 0.0), |(lo, hi), p| {
            let min = p.values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo + min, hi + max)
        })
    }
}

/// An explicit rate for every slate (mixed-radix order, last slot fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct TabularModel {
    spec: SlateSpec,
    rates: Vec<f64>,
}

impl TabularModel {
    pub fn new(spec: &SlateSpec, rates: Vec<f64>) -> Result<Self> {
        let n = spec.check_enumerable(ENUMERATION_CAP)? as usize;
        if rates.len() != n {
            return Err(Error::LengthMismatch {
                what: "slate rates",
                expected: n,
                got: rates.len(),
            });
        }
        if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::InvalidModel(format!("rate {r} outside [0, 1]")));
        }
        Ok(Self {
            spec: spec.clone(),
            rates,
        })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub enum RewardModel {
    Elementwise(ElementwiseModel),
    Pairwise(PairwiseModel),
    Tabular(TabularModel),
}

impl From<ElementwiseModel> for RewardModel {
    fn from(m: ElementwiseModel) -> Self {
        RewardModel::Elementwise(m)
    }
}

impl From<PairwiseModel> for RewardModel {
    fn from(m: PairwiseModel) -> Self {
        RewardModel::Pairwise(m)
    }
}

impl From<TabularModel> for RewardModel {
    fn from(m: TabularModel) -> Self {
        RewardModel::Tabular(m)
    }
}

impl RewardModel {
    pub fn spec(&self) -> &SlateSpec {
        match self {
            RewardModel::Elementwise(m) => &m.spec,
            RewardModel::Pairwise(m) => &m.spec,
            RewardModel::Tabular(m) => &m.spec,
        }
    }

    /// The additive sum before clamping.
    #[inline]
    pub fn raw_rate(&self, actions: &[usize]) -> f64 {
        match self {
            RewardModel::Elementwise(m) => m.raw_rate(actions),
            RewardModel::Pairwise(m) => m.raw_rate(actions),
            RewardModel::Tabular(m) => m.rates[m.spec.linear_index(actions)],
        }
    }

    /// Bernoulli rate of a slate, clamped into `[0, 1]`.
    #[inline]
    pub fn rate(&self, actions: &[usize]) -> f64 {
        self.raw_rate(actions).clamp(0.0, 1.0)
    }

    /// Like [`RewardModel::rate`] but validates the slate first.
    pub fn bernoulli_rate(&self, slate: &crate::slate::Slate) -> Result<f64> {
        self.spec().validate(slate)?;
        Ok(self.rate(slate.actions()))
    }

    /// Whether some slate's raw rate could fall outside `[0, 1]`.
    pub fn may_clamp(&self) -> bool {
        let (lo, hi) = match self {
            RewardModel::Elementwise(m) => m.raw_range(),
            RewardModel::Pairwise(m) => m.raw_range(),
            RewardModel::Tabular(_) => return false,
        };
        lo < 0.0 || hi > 1.0
    }

    /// Exact value `v_π = Σ_a π(a) p(a)` of a target policy.
    ///
    /// Sums over the target's support when it has at most
    /// [`ENUMERATION_CAP`] slates (always the case for deterministic
    /// targets). Otherwise falls back to the additive decomposition, which is
    /// exact only when no slate is clamped; if clamping is possible the
    /// value is not computable and a capacity error is returned.
    pub fn true_policy_value(&self, target: &FactoredPolicy) -> Result<f64> {
        check_spec(self.spec(), target.spec())?;
        if target.support_size() <= ENUMERATION_CAP {
            return Ok(support_value(self, target));
        }
        match self {
            RewardModel::Tabular(_) => unreachable!("tabular specs are within the enumeration cap"),
            _ if self.may_clamp() => Err(Error::Capacity {
                slates: target.support_size().to_string(),
                cap: ENUMERATION_CAP,
            }),
            _ => self.additive_policy_value(target),
        }
    }

    /// `v_π` from the additive decomposition, never enumerating slates.
    ///
    /// Requires an additive model whose rates are never clamped.
    pub fn additive_policy_value(&self, target: &FactoredPolicy) -> Result<f64> {
        check_spec(self.spec(), target.spec())?;
        if self.may_clamp() {
            return Err(Error::Precondition(
                "additive value is only exact for models that never clamp".into(),
            ));
        }
        match self {
            RewardModel::Elementwise(m) => Ok(m
                .phis
                .iter()
                .enumerate()
                .map(|(k, phi)| {
                    phi.iter()
                        .enumerate()
                        .map(|(a, x)| target.slot_probability(k, a) * x)
                        .sum::<f64>()
                })
                .sum()),
            RewardModel::Pairwise(m) => Ok(m
                .pairs
                .iter()
                .map(|p| {
                    let mut total = 0.0;
                    for a in 0..m.spec.cardinality(p.first) {
                        let pa = target.slot_probability(p.first, a);
                        if pa == 0.0 {
                            continue;
                        }
                        for b in 0..p.columns {
                            total += pa * target.slot_probability(p.second, b) * p.get(a, b);
                        }
                    }
                    total
                })
                .sum()),
            RewardModel::Tabular(_) => Err(Error::InvalidModel("tabular models are not additive".into())),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_spec(model: &SlateSpec, policy: &SlateSpec) -> Result<()> {
    if model != policy {
        return Err(Error::InvalidSpec(format!(
            "model spec {:?} differs from policy spec {:?}",
            model.cardinalities(),
            policy.cardinalities()
        )));
    }
    Ok(())
}

fn support_value(model: &RewardModel, target: &FactoredPolicy) -> f64 {
    let support: Vec<Vec<(usize, f64)>> = (0..target.spec().slot_count())
        .map(|k| {
            target
                .slot_distribution(k)
                .into_iter()
                .enumerate()
                .filter(|&(_, p)| p > 0.0)
                .collect()
        })
        .collect();
    let mut cursor = vec![0usize; support.len()];
    let mut actions = vec![0usize; support.len()];
    let mut total = 0.0;
    loop {
        let mut prob = 1.0;
        for (k, &c) in cursor.iter().enumerate() {
            let (a, p) = support[k][c];
            actions[k] = a;
            prob *= p;
        }
        total += prob * model.rate(&actions);
        let mut k = cursor.len();
        loop {
            if k == 0 {
                return total;
            }
            k -= 1;
            cursor[k] += 1;
            if cursor[k] < support[k].len() {
                break;
            }
            cursor[k] = 0;
        }
    }
}

/// Draws `φ_k(a)` independently for every slot and action.
pub fn draw_elementwise_model<R: Rng + ?Sized>(
    spec: &SlateSpec,
    cfg: &ModelDrawConfig,
    rng: &mut R,
) -> Result<ElementwiseModel> {
    if cfg.kind != ModelKind::Elementwise {
        return Err(Error::InvalidModel("draw config is not elementwise".into()));
    }
    let mean = cfg.prior_mean / spec.slot_count() as f64;
    let sd = cfg.relative_sd * mean;
    let phis = spec
        .cardinalities()
        .iter()
        .map(|&d| (0..d).map(|_| gaussian(rng, mean, sd)).collect())
        .collect();
    ElementwiseModel::new(spec, phis)
}

/// Draws `φ_kj(a, b)` independently for every slot pair and action pair.
pub fn draw_pairwise_model<R: Rng + ?Sized>(
    spec: &SlateSpec,
    cfg: &ModelDrawConfig,
    rng: &mut R,
) -> Result<PairwiseModel> {
    if cfg.kind != ModelKind::Pairwise {
        return Err(Error::InvalidModel("draw config is not pairwise".into()));
    }
    let k = spec.slot_count();
    if k < 2 {
        return Err(Error::InvalidSpec("a pairwise model needs at least two slots".into()));
    }
    let pair_count = (k * (k - 1) / 2) as f64;
    let mean = cfg.prior_mean / pair_count;
    let sd = cfg.relative_sd * mean;
    let tables = slot_pairs(k)
        .map(|(a, b)| {
            (0..spec.cardinality(a))
                .map(|_| (0..spec.cardinality(b)).map(|_| gaussian(rng, mean, sd)).collect())
                .collect()
        })
        .collect();
    PairwiseModel::new(spec, tables)
}

pub fn draw_model<R: Rng + ?Sized>(spec: &SlateSpec, cfg: &ModelDrawConfig, rng: &mut R) -> Result<RewardModel> {
    Ok(match cfg.kind {
        ModelKind::Elementwise => draw_elementwise_model(spec, cfg, rng)?.into(),
        ModelKind::Pairwise => draw_pairwise_model(spec, cfg, rng)?.into(),
    })
}

/// On-disk JSON layout of a [`RewardModel`].
///
/// ```json
/// {"kind": "elementwise", "cardinalities": [2, 3], "phis": [[0.1, 0.2], [0.05, 0.0, 0.3]]}
/// {"kind": "pairwise", "cardinalities": [2, 2], "pairs": [{"slots": [0, 1], "phi": [[0.3, 0.1], [0.2, 0.4]]}]}
/// {"kind": "tabular", "cardinalities": [2, 2], "rates": [0.3, 0.1, 0.2, 0.4]}
/// ```
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ModelFile {
    Elementwise {
        cardinalities: Vec<usize>,
        phis: Vec<Vec<f64>>,
    },
    Pairwise {
        cardinalities: Vec<usize>,
        pairs: Vec<PairFile>,
    },
    Tabular {
        cardinalities: Vec<usize>,
        rates: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairFile {
    slots: (usize, usize),
    phi: Vec<Vec<f64>>,
}

impl TryFrom<ModelFile> for RewardModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        match file {
            ModelFile::Elementwise { cardinalities, phis } => {
                Ok(ElementwiseModel::new(&SlateSpec::new(cardinalities)?, phis)?.into())
            }
            ModelFile::Pairwise { cardinalities, pairs } => {
                let spec = SlateSpec::new(cardinalities)?;
                for (p, expected) in pairs.iter().zip(slot_pairs(spec.slot_count())) {
                    if p.slots != expected {
                        return Err(Error::InvalidModel(format!(
                            "pair {:?} out of order, expected {expected:?}",
                            p.slots
                        )));
                    }
                }
                Ok(PairwiseModel::new(&spec, pairs.into_iter().map(|p| p.phi).collect())?.into())
            }
            ModelFile::Tabular { cardinalities, rates } => {
                Ok(TabularModel::new(&SlateSpec::new(cardinalities)?, rates)?.into())
            }
        }
    }
}

impl From<RewardModel> for ModelFile {
    fn from(model: RewardModel) -> Self {
        match model {
            RewardModel::Elementwise(m) => ModelFile::Elementwise {
                cardinalities: m.spec.into(),
                phis: m.phis,
            },
            RewardModel::Pairwise(m) => ModelFile::Pairwise {
                pairs: m
                    .pairs
                    .iter()
                    .map(|p| PairFile {
                        slots: (p.first, p.second),
                        phi: p.rows(),
                    })
                    .collect(),
                cardinalities: m.spec.into(),
            },
            RewardModel::Tabular(m) => ModelFile::Tabular {
                cardinalities: m.spec.into(),
                rates: m.rates,
            },
        }
    }
}
