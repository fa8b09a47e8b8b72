//! Slate geometry, factored policies and slot-level divergences.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on `|Σ p − 1|` for a slot distribution. Vectors outside it are
/// rejected, never renormalized.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Divergences below this are reported as exactly zero. Probability vectors
/// are only pinned down to [`PROBABILITY_TOLERANCE`], so smaller values carry
/// no information.
pub const DIVERGENCE_RESOLUTION: f64 = 1e-12;

/// Number of slots and the number of actions available in each.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SlateSpec {
    cardinalities: Vec<usize>,
}

impl SlateSpec {
    pub fn new(cardinalities: Vec<usize>) -> Result<Self> {
        if cardinalities.is_empty() {
            return Err(Error::InvalidSpec("a slate needs at least one slot".into()));
        }
        if let Some(slot) = cardinalities.iter().position(|&d| d == 0) {
            return Err(Error::InvalidSpec(format!("slot {slot} has no actions")));
        }
        Ok(Self { cardinalities })
    }

    /// Like [`SlateSpec::new`] but also checks an explicitly stated slot count.
    pub fn with_slot_count(slot_count: usize, cardinalities: Vec<usize>) -> Result<Self> {
        if slot_count != cardinalities.len() {
            return Err(Error::InvalidSpec(format!(
                "slot count {slot_count} does not match {} cardinalities",
                cardinalities.len()
            )));
        }
        Self::new(cardinalities)
    }

    pub fn slot_count(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn cardinality(&self, slot: usize) -> usize {
        self.cardinalities[slot]
    }

    /// `Π d_k`, or `None` if it does not fit in a `u64`.
    pub fn slate_count(&self) -> Option<u64> {
        self.cardinalities
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
    }

    pub fn check_enumerable(&self, cap: u64) -> Result<u64> {
        match self.slate_count() {
            Some(n) if n <= cap => Ok(n),
            Some(n) => Err(Error::Capacity {
                slates: n.to_string(),
                cap,
            }),
            None => Err(Error::Capacity {
                slates: "more than 2^64".into(),
                cap,
            }),
        }
    }

    /// Iterates every slate in mixed-radix order (last slot fastest), refusing
    /// specs with more than `cap` slates.
    pub fn slates(&self, cap: u64) -> Result<SlateIter<'_>> {
        self.check_enumerable(cap)?;
        Ok(SlateIter {
            spec: self,
            next: Some(vec![0; self.slot_count()]),
        })
    }

    pub fn validate(&self, slate: &Slate) -> Result<()> {
        self.validate_actions(slate.actions())
    }

    pub(crate) fn validate_actions(&self, actions: &[usize]) -> Result<()> {
        if actions.len() != self.slot_count() {
            return Err(Error::InvalidSlate(format!(
                "slate has {} slots, spec has {}",
                actions.len(),
                self.slot_count()
            )));
        }
        for (slot, (&a, &d)) in actions.iter().zip(&self.cardinalities).enumerate() {
            if a >= d {
                return Err(Error::InvalidSlate(format!(
                    "action {a} out of range for slot {slot} with {d} actions"
                )));
            }
        }
        Ok(())
    }

    /// Mixed-radix index of a slate (last slot fastest).
    pub(crate) fn linear_index(&self, actions: &[usize]) -> usize {
        actions
            .iter()
            .zip(&self.cardinalities)
            .fold(0, |acc, (&a, &d)| acc * d + a)
    }
}

impl TryFrom<Vec<usize>> for SlateSpec {
    type Error = Error;

    fn try_from(value: Vec<usize>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<SlateSpec> for Vec<usize> {
    fn from(spec: SlateSpec) -> Self {
        spec.cardinalities
    }
}

pub struct SlateIter<'a> {
    spec: &'a SlateSpec,
    next: Option<Vec<usize>>,
}

impl Iterator for SlateIter<'_> {
    type Item = Slate;

    fn next(&mut self) -> Option<Slate> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut slot = succ.len();
        let mut carried = true;
        while carried && slot > 0 {
            slot -= 1;
            succ[slot] += 1;
            if succ[slot] == self.spec.cardinalities[slot] {
                succ[slot] = 0;
            } else {
                carried = false;
            }
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(Slate(current))
    }
}

/// One action per slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Slate(Vec<usize>);

impl Slate {
    pub fn new(actions: Vec<usize>) -> Self {
        Slate(actions)
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn zeros(spec: &SlateSpec) -> Self {
        Slate(vec![0; spec.slot_count()])
    }
}

#[derive(Debug, Clone)]
enum SlotDist {
    Uniform {
        size: usize,
    },
    Point {
        size: usize,
        action: usize,
    },
    General {
        probs: Vec<f64>,
        sampler: WeightedAliasIndex<f64>,
    },
}

impl SlotDist {
    fn probability(&self, action: usize) -> f64 {
        match self {
            SlotDist::Uniform { size } => 1.0 / *size as f64,
            SlotDist::Point { action: a, .. } => {
                if *a == action {
                    1.0
                } else {
                    0.0
                }
            }
            SlotDist::General { probs, .. } => probs[action],
        }
    }

    fn size(&self) -> usize {
        match self {
            SlotDist::Uniform { size } | SlotDist::Point { size, .. } => *size,
            SlotDist::General { probs, .. } => probs.len(),
        }
    }

    fn support(&self) -> usize {
        match self {
            SlotDist::Uniform { size } => *size,
            SlotDist::Point { .. } => 1,
            SlotDist::General { probs, .. } => probs.iter().filter(|&&p| p > 0.0).count(),
        }
    }
}

/// A policy that draws each slot independently, `μ(a) = Π_k μ_k(a^k)`.
///
/// Used for both the logging policy and the target policy.
#[derive(Debug, Clone)]
pub struct FactoredPolicy {
    spec: SlateSpec,
    slots: Vec<SlotDist>,
}

impl FactoredPolicy {
    /// Builds a policy from explicit per-slot probability vectors.
    ///
    /// Each vector must have one non-negative finite entry per action and sum
    /// to 1 within [`PROBABILITY_TOLERANCE`].
    pub fn new(spec: &SlateSpec, slot_dists: Vec<Vec<f64>>) -> Result<Self> {
        if slot_dists.len() != spec.slot_count() {
            return Err(Error::LengthMismatch {
                what: "slot distributions",
                expected: spec.slot_count(),
                got: slot_dists.len(),
            });
        }
        let mut slots = Vec::with_capacity(slot_dists.len());
        for (slot, probs) in slot_dists.into_iter().enumerate() {
            let d = spec.cardinality(slot);
            if probs.len() != d {
                return Err(Error::InvalidDistribution {
                    slot,
                    reason: format!("expected {d} probabilities, got {}", probs.len()),
                });
            }
            if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(Error::InvalidDistribution {
                    slot,
                    reason: format!("probability {p} is not a finite non-negative number"),
                });
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
                return Err(Error::InvalidDistribution {
                    slot,
                    reason: format!("probabilities sum to {total}, not 1"),
                });
            }
            let dist = if probs.iter().all(|&p| p == probs[0]) {
                SlotDist::Uniform { size: d }
            } else if let (Some(action), 1) = (
                probs.iter().position(|&p| p == 1.0),
                probs.iter().filter(|&&p| p != 0.0).count(),
            ) {
                SlotDist::Point { size: d, action }
            } else {
                let sampler = WeightedAliasIndex::new(probs.clone()).map_err(|e| Error::InvalidDistribution {
                    slot,
                    reason: e.to_string(),
                })?;
                SlotDist::General { probs, sampler }
            };
            slots.push(dist);
        }
        Ok(Self {
            spec: spec.clone(),
            slots,
        })
    }

    pub fn uniform(spec: &SlateSpec) -> Self {
        Self {
            spec: spec.clone(),
            slots: spec
                .cardinalities()
                .iter()
                .map(|&size| SlotDist::Uniform { size })
                .collect(),
        }
    }

    /// Puts all mass on `slate`.
    pub fn deterministic(spec: &SlateSpec, slate: &Slate) -> Result<Self> {
        spec.validate(slate)?;
        Ok(Self {
            spec: spec.clone(),
            slots: spec
                .cardinalities()
                .iter()
                .zip(slate.actions())
                .map(|(&size, &action)| SlotDist::Point { size, action })
                .collect(),
        })
    }

    pub fn spec(&self) -> &SlateSpec {
        &self.spec
    }

    pub fn slot_probability(&self, slot: usize, action: usize) -> f64 {
        self.slots[slot].probability(action)
    }

    pub fn slot_distribution(&self, slot: usize) -> Vec<f64> {
        let dist = &self.slots[slot];
        (0..dist.size()).map(|a| dist.probability(a)).collect()
    }

    pub fn slot_distributions(&self) -> Vec<Vec<f64>> {
        (0..self.spec.slot_count()).map(|k| self.slot_distribution(k)).collect()
    }

    pub fn is_uniform_slot(&self, slot: usize) -> bool {
        matches!(self.slots[slot], SlotDist::Uniform { .. })
    }

    /// The slate this policy always plays, if it is deterministic.
    pub fn deterministic_slate(&self) -> Option<Slate> {
        self.slots
            .iter()
            .map(|s| match s {
                SlotDist::Point { action, .. } => Some(*action),
                SlotDist::Uniform { size: 1 } => Some(0),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Slate)
    }

    /// Number of slates with positive probability, saturating at `u64::MAX`.
    pub fn support_size(&self) -> u64 {
        self.slots
            .iter()
            .try_fold(1u64, |acc, s| acc.checked_mul(s.support() as u64))
            .unwrap_or(u64::MAX)
    }

    pub fn slate_probability(&self, slate: &Slate) -> f64 {
        self.actions_probability(slate.actions())
    }

    pub(crate) fn actions_probability(&self, actions: &[usize]) -> f64 {
        self.slots.iter().zip(actions).map(|(s, &a)| s.probability(a)).product()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Slate {
        let mut actions = vec![0; self.spec.slot_count()];
        self.sample_into(rng, &mut actions);
        Slate(actions)
    }

    /// Samples a slate into a caller-owned buffer of length `K`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, actions: &mut [usize]) {
        for (slot, out) in self.slots.iter().zip(actions.iter_mut()) {
            *out = match slot {
                SlotDist::Uniform { size } => rng.random_range(0..*size),
                SlotDist::Point { action, .. } => *action,
                SlotDist::General { sampler, .. } => sampler.sample(rng),
            };
        }
    }
}

fn check_same_spec(target: &FactoredPolicy, logging: &FactoredPolicy) -> Result<()> {
    if target.spec != logging.spec {
        return Err(Error::InvalidSpec(format!(
            "target spec {:?} differs from logging spec {:?}",
            target.spec.cardinalities(),
            logging.spec.cardinalities()
        )));
    }
    Ok(())
}

fn ratio(target: &FactoredPolicy, logging: &FactoredPolicy, slot: usize, action: usize) -> Result<f64> {
    let p = target.slot_probability(slot, action);
    if p == 0.0 {
        // Covers the both-zero case: such actions are never logged.
        return Ok(0.0);
    }
    let q = logging.slot_probability(slot, action);
    if q == 0.0 {
        return Err(Error::AbsoluteContinuity { slot, action });
    }
    Ok(match logging.slots[slot] {
        // p / (1/d) without the rounding of 1/d.
        SlotDist::Uniform { size } => p * size as f64,
        _ => p / q,
    })
}

/// Slot-level importance weight `Y_k = π_k(a^k) / μ_k(a^k)` at a slate.
///
/// Returns 0 whenever the target probability is 0, including when the
/// logging probability is 0 as well.
pub fn slot_importance_weight(
    target: &FactoredPolicy,
    logging: &FactoredPolicy,
    slate: &Slate,
    slot: usize,
) -> Result<f64> {
    check_same_spec(target, logging)?;
    logging.spec.validate(slate)?;
    if slot >= logging.spec.slot_count() {
        return Err(Error::InvalidSlate(format!("slot {slot} out of range")));
    }
    ratio(target, logging, slot, slate.actions()[slot])
}

/// Precomputed `Y_k(a)` for every slot and action.
#[derive(Debug, Clone)]
pub struct SlotWeights {
    tables: Vec<Vec<f64>>,
}

impl SlotWeights {
    /// Fails if the target puts mass on any action the logging policy never
    /// plays.
    pub fn new(target: &FactoredPolicy, logging: &FactoredPolicy) -> Result<Self> {
        check_same_spec(target, logging)?;
        let tables = (0..logging.spec.slot_count())
            .map(|k| {
                (0..logging.spec.cardinality(k))
                    .map(|a| ratio(target, logging, k, a))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { tables })
    }

    #[inline]
    pub fn weight(&self, slot: usize, action: usize) -> f64 {
        self.tables[slot][action]
    }

    pub fn slot_count(&self) -> usize {
        self.tables.len()
    }

    /// Writes `Y_k` for every slot of `actions` into `out`.
    #[inline]
    pub fn fill(&self, actions: &[usize], out: &mut [f64]) {
        for ((table, &a), y) in self.tables.iter().zip(actions).zip(out.iter_mut()) {
            *y = table[a];
        }
    }
}

/// The divergences `α_k` and their arithmetic and harmonic means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSummary {
    alphas: Vec<f64>,
    arithmetic_mean: f64,
    harmonic_mean: Option<f64>,
}

impl DivergenceSummary {
    /// Summarizes a list of non-negative divergences. The harmonic mean is
    /// `None` when any entry is zero.
    pub fn from_alphas(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidSpec("no divergences".into()));
        }
        if let Some(slot) = alphas.iter().position(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::DegenerateSlot {
                slot,
                alpha: alphas[slot],
            });
        }
        let k = alphas.len() as f64;
        let (arithmetic_mean, harmonic_mean) = if alphas.iter().all(|&a| a == alphas[0]) {
            // Keeps M == H bit-exact so the control variate vanishes.
            (alphas[0], (alphas[0] > 0.0).then_some(alphas[0]))
        } else {
            let m = alphas.iter().sum::<f64>() / k;
            let h = if alphas.iter().all(|&a| a > 0.0) {
                Some(k / alphas.iter().map(|a| a.recip()).sum::<f64>())
            } else {
                None
            };
            (m, h)
        };
        Ok(Self {
            alphas,
            arithmetic_mean,
            harmonic_mean,
        })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn slot_count(&self) -> usize {
        self.alphas.len()
    }

    pub fn arithmetic_mean(&self) -> f64 {
        self.arithmetic_mean
    }

    pub fn harmonic_mean(&self) -> Option<f64> {
        self.harmonic_mean
    }

    /// `M − H`, when `H` is defined.
    pub fn mean_gap(&self) -> Option<f64> {
        self.harmonic_mean.map(|h| self.arithmetic_mean - h)
    }

    /// The harmonic mean, or an error naming the first zero-divergence slot.
    pub fn require_harmonic_mean(&self) -> Result<f64> {
        self.harmonic_mean.ok_or_else(|| {
            let slot = self.alphas.iter().position(|&a| a <= 0.0).unwrap_or(0);
            Error::DegenerateSlot {
                slot,
                alpha: self.alphas[slot],
            }
        })
    }
}

/// Computes `α_k = Σ_a π_k(a)² / μ_k(a) − 1` exactly by summing over each
/// slot's actions.
pub fn compute_divergences(target: &FactoredPolicy, logging: &FactoredPolicy) -> Result<DivergenceSummary> {
    check_same_spec(target, logging)?;
    let alphas = (0..logging.spec.slot_count())
        .map(|k| {
            let mut second_moment = 0.0;
            for a in 0..logging.spec.cardinality(k) {
                second_moment += target.slot_probability(k, a) * ratio(target, logging, k, a)?;
            }
            let alpha = second_moment - 1.0;
            Ok(if alpha < DIVERGENCE_RESOLUTION { 0.0 } else { alpha })
        })
        .collect::<Result<Vec<_>>>()?;
    DivergenceSummary::from_alphas(alphas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamPurpose};

    fn spec(d: &[usize]) -> SlateSpec {
        SlateSpec::new(d.to_vec()).unwrap()
    }

    #[test]
    fn spec_rejects_empty_and_zero_slots() {
        assert!(SlateSpec::new(vec![]).is_err());
        assert!(SlateSpec::new(vec![3, 0]).is_err());
        assert!(SlateSpec::with_slot_count(3, vec![2, 2]).is_err());
        assert_eq!(spec(&[3, 50, 800]).slate_count(), Some(120_000));
        assert_eq!(SlateSpec::new(vec![usize::MAX, 3]).unwrap().slate_count(), None);
    }

    #[test]
    fn uniform_policy_examples() {
        let p = FactoredPolicy::uniform(&spec(&[2]));
        assert_eq!(p.slot_distributions(), vec![vec![0.5, 0.5]]);
        let p = FactoredPolicy::uniform(&spec(&[2, 4]));
        assert_eq!(
            p.slot_distributions(),
            vec![vec![0.5, 0.5], vec![0.25, 0.25, 0.25, 0.25]]
        );
        let p = FactoredPolicy::uniform(&spec(&[3, 50, 800]));
        for (k, d) in [3usize, 50, 800].into_iter().enumerate() {
            assert!(p.slot_distribution(k).iter().all(|&x| x == 1.0 / d as f64));
        }
    }

    #[test]
    fn deterministic_policy_examples() {
        let s = spec(&[2, 2]);
        let p = FactoredPolicy::deterministic(&s, &Slate::new(vec![0, 0])).unwrap();
        assert_eq!(p.slot_distributions(), vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        let s = spec(&[2, 4]);
        let p = FactoredPolicy::deterministic(&s, &Slate::new(vec![1, 3])).unwrap();
        assert_eq!(p.slot_distributions(), vec![vec![0.0, 1.0], vec![0.0, 0.0, 0.0, 1.0]]);
        let s = spec(&[3, 50, 800]);
        let p = FactoredPolicy::deterministic(&s, &Slate::zeros(&s)).unwrap();
        for k in 0..3 {
            assert_eq!(p.slot_probability(k, 0), 1.0);
            assert_eq!(p.slot_distribution(k).iter().sum::<f64>(), 1.0);
        }
        assert!(matches!(
            FactoredPolicy::deterministic(&s, &Slate::new(vec![3, 0, 0])),
            Err(Error::InvalidSlate(_))
        ));
    }

    #[test]
    fn explicit_distributions_are_validated_not_renormalized() {
        let s = spec(&[2, 3]);
        assert!(FactoredPolicy::new(&s, vec![vec![0.5, 0.5], vec![0.2, 0.3, 0.5]]).is_ok());
        let err = FactoredPolicy::new(&s, vec![vec![0.5, 0.5], vec![0.2, 0.3, 0.6]]).unwrap_err();
        assert!(matches!(err, Error::InvalidDistribution { slot: 1, .. }));
        assert!(FactoredPolicy::new(&s, vec![vec![1.5, -0.5], vec![0.2, 0.3, 0.5]]).is_err());
        assert!(FactoredPolicy::new(&s, vec![vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
        assert!(FactoredPolicy::new(&s, vec![vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn sampling_deterministic_policy_is_constant() {
        let s = spec(&[2, 2]);
        let p = FactoredPolicy::deterministic(&s, &Slate::zeros(&s)).unwrap();
        let mut rng = stream(1, StreamPurpose::Replication, 0, 0);
        for _ in 0..100 {
            assert_eq!(p.sample(&mut rng).actions(), &[0, 0]);
        }
    }

    #[test]
    fn sampling_uniform_matches_marginals() {
        let n = 100_000;
        let mut rng = stream(2, StreamPurpose::Replication, 0, 0);
        let p = FactoredPolicy::uniform(&spec(&[2]));
        let zeros = (0..n).filter(|_| p.sample(&mut rng).actions()[0] == 0).count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt(), "{freq}");

        // Joint frequency of [0, 0] under d = [2, 4] is the product 1/8.
        let p = FactoredPolicy::uniform(&spec(&[2, 4]));
        let hits = (0..n).filter(|_| p.sample(&mut rng).actions() == [0, 0]).count();
        let freq = hits as f64 / n as f64;
        let se = (0.125 * 0.875 / n as f64).sqrt();
        assert!((freq - 0.125).abs() <= 3.0 * se, "{freq}");
    }

    #[test]
    fn sampling_general_policy_matches_marginals() {
        let s = spec(&[3]);
        let p = FactoredPolicy::new(&s, vec![vec![0.2, 0.5, 0.3]]).unwrap();
        let mut rng = stream(3, StreamPurpose::Replication, 0, 0);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[p.sample(&mut rng).actions()[0]] += 1;
        }
        for (a, &c) in counts.iter().enumerate() {
            let q = p.slot_probability(0, a);
            let se = (q * (1.0 - q) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - q).abs() <= 4.0 * se);
        }
    }

    #[test]
    fn slate_probability_examples() {
        let s = spec(&[2, 4]);
        let u = FactoredPolicy::uniform(&s);
        for slate in s.slates(100).unwrap() {
            assert_eq!(u.slate_probability(&slate), 1.0 / 8.0);
        }
        let s2 = spec(&[2, 2]);
        let det = FactoredPolicy::deterministic(&s2, &Slate::zeros(&s2)).unwrap();
        assert_eq!(det.slate_probability(&Slate::new(vec![0, 0])), 1.0);
        assert_eq!(det.slate_probability(&Slate::new(vec![1, 0])), 0.0);
        let s3 = spec(&[3, 50, 800]);
        let u3 = FactoredPolicy::uniform(&s3);
        let p = u3.slate_probability(&Slate::zeros(&s3));
        assert!((p - 1.0 / 120_000.0).abs() <= 1e-15 * p);
    }

    #[test]
    fn importance_weight_examples() {
        let s = spec(&[2, 2]);
        let mu = FactoredPolicy::uniform(&s);
        let pi = FactoredPolicy::deterministic(&s, &Slate::zeros(&s)).unwrap();
        let w = |slate: Vec<usize>, k| slot_importance_weight(&pi, &mu, &Slate::new(slate), k).unwrap();
        assert_eq!(w(vec![0, 0], 0), 2.0);
        assert_eq!(w(vec![1, 0], 0), 0.0);
        for slate in s.slates(10).unwrap() {
            for k in 0..2 {
                assert_eq!(slot_importance_weight(&mu, &mu, &slate, k).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn importance_weight_absolute_continuity() {
        let s = spec(&[2]);
        let mu = FactoredPolicy::deterministic(&s, &Slate::new(vec![0])).unwrap();
        let pi = FactoredPolicy::uniform(&s);
        let err = slot_importance_weight(&pi, &mu, &Slate::new(vec![1]), 0).unwrap_err();
        assert!(matches!(err, Error::AbsoluteContinuity { slot: 0, action: 1 }));
        // Both zero: conventionally 0.
        let pi0 = FactoredPolicy::deterministic(&s, &Slate::new(vec![0])).unwrap();
        assert_eq!(slot_importance_weight(&pi0, &mu, &Slate::new(vec![1]), 0).unwrap(), 0.0);
        assert!(SlotWeights::new(&pi, &mu).is_err());
        assert!(compute_divergences(&pi, &mu).is_err());
    }

    #[test]
    fn divergence_examples() {
        let s = spec(&[3]);
        let mu = FactoredPolicy::uniform(&s);
        let pi = FactoredPolicy::deterministic(&s, &Slate::zeros(&s)).unwrap();
        assert_eq!(compute_divergences(&pi, &mu).unwrap().alphas(), &[2.0]);

        let s = spec(&[2, 4]);
        let mu = FactoredPolicy::uniform(&s);
        let pi = FactoredPolicy::deterministic(&s, &Slate::zeros(&s)).unwrap();
        let d = compute_divergences(&pi, &mu).unwrap();
        assert_eq!(d.alphas(), &[1.0, 3.0]);
        assert_eq!(d.arithmetic_mean(), 2.0);
        assert_eq!(d.harmonic_mean(), Some(1.5));

        let general = FactoredPolicy::new(&s, vec![vec![0.3, 0.7], vec![0.1, 0.2, 0.3, 0.4]]).unwrap();
        let d = compute_divergences(&general, &general).unwrap();
        assert_eq!(d.alphas(), &[0.0, 0.0]);
        assert_eq!(d.harmonic_mean(), None);
        assert!(matches!(
            d.require_harmonic_mean(),
            Err(Error::DegenerateSlot { slot: 0, .. })
        ));
    }

    #[test]
    fn divergence_of_general_pair_matches_hand_value() {
        // π = [0.5, 0.5], μ = [0.25, 0.75]: 0.25/0.25 + 0.25/0.75 − 1 = 1/3.
        let s = spec(&[2]);
        let mu = FactoredPolicy::new(&s, vec![vec![0.25, 0.75]]).unwrap();
        let pi = FactoredPolicy::uniform(&s);
        let a = compute_divergences(&pi, &mu).unwrap().alphas()[0];
        assert!((a - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn enumeration_visits_every_slate_once() {
        let s = spec(&[2, 3, 2]);
        let all: Vec<_> = s.slates(100).unwrap().collect();
        assert_eq!(all.len(), 12);
        for (i, slate) in all.iter().enumerate() {
            assert_eq!(s.linear_index(slate.actions()), i);
        }
        assert!(matches!(s.slates(11), Err(Error::Capacity { .. })));
    }

    #[test]
    fn support_and_deterministic_slate() {
        let s = spec(&[3, 4]);
        let pi = FactoredPolicy::deterministic(&s, &Slate::new(vec![2, 1])).unwrap();
        assert_eq!(pi.support_size(), 1);
        assert_eq!(pi.deterministic_slate(), Some(Slate::new(vec![2, 1])));
        let mu = FactoredPolicy::uniform(&s);
        assert_eq!(mu.support_size(), 12);
        assert_eq!(mu.deterministic_slate(), None);
    }
}
