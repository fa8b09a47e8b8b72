//! Additive slate estimators: IPS, PI and PI++.
//!
//! Every estimator here has the form `t = (1/n) Σ_i (r_i g_i − f_i)` with
//!
//! ```text
//! g_i = λ + Σ_k g_k Y_k,i        f_i = Σ_k f_k Y_k,i
//! ```
//!
//! where `Y_k = π_k(a^k) / μ_k(a^k)`. Because `t` is linear in the weights,
//! a single pass over the data collecting `n`, `Σ r`, `Σ r Y_k`, `Σ Y_k` and
//! `Σ r Π_k Y_k` (for IPS) evaluates any member of the family afterwards.
//! That pass is [`EstimateFold`].

use serde::{Deserialize, Serialize};

use crate::slate::{compute_divergences, DivergenceSummary, FactoredPolicy, Slate, SlateSpec, SlotWeights};
use crate::{Error, Result};

/// Tolerance on `|Σ_k f_k|` for control-variate weights to count as
/// zero-sum, relative to `max(1, Σ_k |f_k|)`.
pub const ZERO_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoggedSample {
    pub slate: Slate,
    pub reward: bool,
}

/// Slates drawn from `logging_policy` together with their binary rewards.
#[derive(Debug, Clone)]
pub struct LoggedDataset {
    logging_policy: FactoredPolicy,
    samples: Vec<LoggedSample>,
}

impl LoggedDataset {
    pub fn new(logging_policy: FactoredPolicy, samples: Vec<LoggedSample>) -> Result<Self> {
        for s in &samples {
            logging_policy.spec().validate(&s.slate)?;
        }
        Ok(Self {
            logging_policy,
            samples,
        })
    }

    pub fn spec(&self) -> &SlateSpec {
        self.logging_policy.spec()
    }

    pub fn logging_policy(&self) -> &FactoredPolicy {
        &self.logging_policy
    }

    pub fn samples(&self) -> &[LoggedSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Folds every sample for evaluating estimators of `target`.
    pub fn fold(&self, target: &FactoredPolicy) -> Result<EstimateFold> {
        let weights = SlotWeights::new(target, &self.logging_policy)?;
        let mut fold = EstimateFold::new(self.spec().slot_count());
        let mut y = vec![0.0; fold.slot_count()];
        for s in &self.samples {
            weights.fill(s.slate.actions(), &mut y);
            fold.push(&y, s.reward);
        }
        Ok(fold)
    }
}

/// Parameters `(λ, g, f)` of an additive estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveEstimatorParams {
    pub lambda: f64,
    pub g_weights: Vec<f64>,
    pub f_weights: Vec<f64>,
}

impl AdditiveEstimatorParams {
    pub fn new(lambda: f64, g_weights: Vec<f64>, f_weights: Vec<f64>) -> Result<Self> {
        if g_weights.len() != f_weights.len() {
            return Err(Error::LengthMismatch {
                what: "f weights",
                expected: g_weights.len(),
                got: f_weights.len(),
            });
        }
        Ok(Self {
            lambda,
            g_weights,
            f_weights,
        })
    }

    /// PI: `λ = 1 − K`, unit `g` weights, no control variate.
    pub fn pi(slot_count: usize) -> Self {
        Self {
            lambda: 1.0 - slot_count as f64,
            g_weights: vec![1.0; slot_count],
            f_weights: vec![0.0; slot_count],
        }
    }

    /// PI with the control variate `F = Σ_k w_k Y_k`. The weights must sum
    /// to zero so that `F` adds no bias.
    pub fn pi_with_control(control: &[f64]) -> Result<Self> {
        let params = Self {
            f_weights: control.to_vec(),
            ..Self::pi(control.len())
        };
        params.check_zero_sum()?;
        Ok(params)
    }

    pub fn pi_plus_plus(cv: &ControlVariateWeights) -> Self {
        Self {
            f_weights: cv.weights.clone(),
            ..Self::pi(cv.weights.len())
        }
    }

    pub fn slot_count(&self) -> usize {
        self.g_weights.len()
    }

    pub fn is_zero_sum(&self) -> bool {
        let total: f64 = self.f_weights.iter().sum();
        let scale = self.f_weights.iter().map(|w| w.abs()).sum::<f64>().max(1.0);
        total.abs() <= ZERO_SUM_TOLERANCE * scale
    }

    pub fn check_zero_sum(&self) -> Result<()> {
        if self.is_zero_sum() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "control-variate weights sum to {}, not 0",
                self.f_weights.iter().sum::<f64>()
            )))
        }
    }

    /// `g(a)` given the slot weights `Y_k(a)`.
    pub fn g_value(&self, y: &[f64]) -> f64 {
        self.lambda + self.g_weights.iter().zip(y).map(|(w, y)| w * y).sum::<f64>()
    }

    /// `f(a)` given the slot weights `Y_k(a)`.
    pub fn f_value(&self, y: &[f64]) -> f64 {
        self.f_weights.iter().zip(y).map(|(w, y)| w * y).sum()
    }
}

/// Optimal control-variate weights `w_k = P'(1 − H/α_k)`.
///
/// They minimize `Σ w_k² α_k − 2P' Σ w_k α_k` subject to `Σ w_k = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlVariateWeights {
    weights: Vec<f64>,
    prior_mean: f64,
    divergences: DivergenceSummary,
}

impl ControlVariateWeights {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn divergences(&self) -> &DivergenceSummary {
        &self.divergences
    }
}

/// Weights of the unit-prior control variate, `1 − H/α_k`.
pub(crate) fn unit_control(divs: &DivergenceSummary) -> Result<Vec<f64>> {
    let h = divs.require_harmonic_mean()?;
    Ok(divs.alphas().iter().map(|&a| 1.0 - h / a).collect())
}

pub fn optimal_cv_weights(divs: &DivergenceSummary, assumed_prior_mean: f64) -> Result<ControlVariateWeights> {
    if !(assumed_prior_mean > 0.0 && assumed_prior_mean < 1.0) {
        return Err(Error::Precondition(format!(
            "assumed prior mean {assumed_prior_mean} must lie in (0, 1)"
        )));
    }
    let weights = unit_control(divs)?
        .into_iter()
        .map(|c| assumed_prior_mean * c)
        .collect();
    Ok(ControlVariateWeights {
        weights,
        prior_mean: assumed_prior_mean,
        divergences: divs.clone(),
    })
}

/// Streaming sufficient statistics for the additive family and IPS.
///
/// Folds merge associatively, so a dataset can be split into chunks and the
/// partial folds combined.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimateFold {
    count: u64,
    reward_sum: f64,
    reward_weight_sums: Vec<f64>,
    weight_sums: Vec<f64>,
    ips_sum: f64,
}

impl EstimateFold {
    pub fn new(slot_count: usize) -> Self {
        Self {
            count: 0,
            reward_sum: 0.0,
            reward_weight_sums: vec![0.0; slot_count],
            weight_sums: vec![0.0; slot_count],
            ips_sum: 0.0,
        }
    }

    pub fn slot_count(&self) -> usize {
        self.weight_sums.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Adds one sample with slot weights `y`.
    #[inline]
    pub fn push(&mut self, y: &[f64], reward: bool) {
        self.count += 1;
        for (s, &v) in self.weight_sums.iter_mut().zip(y) {
            *s += v;
        }
        if reward {
            self.reward_sum += 1.0;
            let mut product = 1.0;
            for (s, &v) in self.reward_weight_sums.iter_mut().zip(y) {
                *s += v;
                product *= v;
            }
            self.ips_sum += product;
        }
    }

    pub fn merge(&mut self, other: &EstimateFold) {
        self.count += other.count;
        self.reward_sum += other.reward_sum;
        self.ips_sum += other.ips_sum;
        for (a, b) in self.reward_weight_sums.iter_mut().zip(&other.reward_weight_sums) {
            *a += b;
        }
        for (a, b) in self.weight_sums.iter_mut().zip(&other.weight_sums) {
            *a += b;
        }
    }

    fn check_nonempty(&self) -> Result<f64> {
        if self.count == 0 {
            Err(Error::EmptyDataset)
        } else {
            Ok(self.count as f64)
        }
    }

    /// `(1/n) Σ r_i Π_k Y_k,i`.
    pub fn ips(&self) -> Result<f64> {
        let n = self.check_nonempty()?;
        Ok(self.ips_sum / n)
    }

    pub fn additive(&self, params: &AdditiveEstimatorParams) -> Result<f64> {
        let n = self.check_nonempty()?;
        if params.slot_count() != self.slot_count() {
            return Err(Error::LengthMismatch {
                what: "estimator weights",
                expected: self.slot_count(),
                got: params.slot_count(),
            });
        }
        let g_part: f64 = params
            .g_weights
            .iter()
            .zip(&self.reward_weight_sums)
            .map(|(w, s)| w * s)
            .sum();
        Ok((params.lambda * self.reward_sum + g_part - self.control_sum(&params.f_weights)) / n)
    }

    pub fn pi(&self) -> Result<f64> {
        self.additive(&AdditiveEstimatorParams::pi(self.slot_count()))
    }

    /// `Σ_i Σ_k w_k Y_k,i`, the unnormalized control variate.
    pub fn control_sum(&self, weights: &[f64]) -> f64 {
        weights.iter().zip(&self.weight_sums).map(|(w, s)| w * s).sum()
    }

    pub fn mean_reward(&self) -> Result<f64> {
        let n = self.check_nonempty()?;
        Ok(self.reward_sum / n)
    }
}

pub fn estimate_ips(data: &LoggedDataset, target: &FactoredPolicy) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    data.fold(target)?.ips()
}

pub fn estimate_additive(
    data: &LoggedDataset,
    target: &FactoredPolicy,
    params: &AdditiveEstimatorParams,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    data.fold(target)?.additive(params)
}

pub fn estimate_pi(data: &LoggedDataset, target: &FactoredPolicy) -> Result<f64> {
    estimate_additive(data, target, &AdditiveEstimatorParams::pi(data.spec().slot_count()))
}

/// PI minus the optimal control variate for the assumed prior mean.
///
/// There is no default prior: the improvement over PI depends on how close
/// `assumed_prior_mean` is to the true mean rate.
pub fn estimate_pi_plus_plus(data: &LoggedDataset, target: &FactoredPolicy, assumed_prior_mean: f64) -> Result<f64> {
    let divs = compute_divergences(target, data.logging_policy())?;
    let cv = optimal_cv_weights(&divs, assumed_prior_mean)?;
    estimate_additive(data, target, &AdditiveEstimatorParams::pi_plus_plus(&cv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: &[usize]) -> SlateSpec {
        SlateSpec::new(d.to_vec()).unwrap()
    }

    fn dataset(d: &[usize], rows: &[(&[usize], bool)]) -> LoggedDataset {
        let s = spec(d);
        LoggedDataset::new(
            FactoredPolicy::uniform(&s),
            rows.iter()
                .map(|(a, r)| LoggedSample {
                    slate: Slate::new(a.to_vec()),
                    reward: *r,
                })
                .collect(),
        )
        .unwrap()
    }

    fn det_zero(d: &[usize]) -> FactoredPolicy {
        let s = spec(d);
        FactoredPolicy::deterministic(&s, &Slate::zeros(&s)).unwrap()
    }

    #[test]
    fn ips_examples() {
        let pi = det_zero(&[2, 2]);
        assert_eq!(estimate_ips(&dataset(&[2, 2], &[(&[0, 0], true)]), &pi).unwrap(), 4.0);
        assert_eq!(estimate_ips(&dataset(&[2, 2], &[(&[1, 1], true)]), &pi).unwrap(), 0.0);
        let data = dataset(&[2, 3], &[(&[0, 0], true), (&[1, 2], false), (&[1, 1], true)]);
        let v = estimate_ips(&data, data.logging_policy()).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let data = dataset(&[2, 2], &[]);
        let pi = det_zero(&[2, 2]);
        assert!(matches!(estimate_ips(&data, &pi), Err(Error::EmptyDataset)));
        assert!(matches!(estimate_pi(&data, &pi), Err(Error::EmptyDataset)));
        assert!(matches!(EstimateFold::new(2).pi(), Err(Error::EmptyDataset)));
    }

    #[test]
    fn invalid_samples_are_rejected() {
        let s = spec(&[2, 2]);
        let bad = LoggedSample {
            slate: Slate::new(vec![2, 0]),
            reward: true,
        };
        assert!(LoggedDataset::new(FactoredPolicy::uniform(&s), vec![bad]).is_err());
    }

    #[test]
    fn additive_examples() {
        let pi = det_zero(&[2, 2]);
        let params = AdditiveEstimatorParams::pi(2);
        assert_eq!(
            estimate_additive(&dataset(&[2, 2], &[(&[0, 0], true)]), &pi, &params).unwrap(),
            3.0
        );
        assert_eq!(
            estimate_additive(&dataset(&[2, 2], &[(&[1, 1], true)]), &pi, &params).unwrap(),
            -1.0
        );
        let cv = AdditiveEstimatorParams::new(0.0, vec![0.0, 0.0], vec![-0.25, 0.25]).unwrap();
        assert_eq!(
            estimate_additive(&dataset(&[2, 2], &[(&[0, 0], false)]), &pi, &cv).unwrap(),
            0.0
        );
        let wrong = AdditiveEstimatorParams::pi(3);
        assert!(matches!(
            estimate_additive(&dataset(&[2, 2], &[(&[0, 0], false)]), &pi, &wrong),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(AdditiveEstimatorParams::new(0.0, vec![1.0], vec![]).is_err());
    }

    #[test]
    fn pi_examples() {
        let pi = det_zero(&[2, 2]);
        let data = dataset(&[2, 2], &[(&[0, 0], true), (&[1, 1], false)]);
        assert_eq!(estimate_pi(&data, &pi).unwrap(), 1.5);
        let same = estimate_pi(&data, data.logging_policy()).unwrap();
        assert_eq!(same, 0.5);

        // One slot: PI is IPS.
        let single = dataset(&[3], &[(&[0], true), (&[2], true), (&[0], false), (&[0], true)]);
        let p = det_zero(&[3]);
        assert_eq!(estimate_pi(&single, &p).unwrap(), estimate_ips(&single, &p).unwrap());
    }

    #[test]
    fn optimal_weights_examples() {
        let divs = DivergenceSummary::from_alphas(vec![1.0, 3.0]).unwrap();
        let cv = optimal_cv_weights(&divs, 0.5).unwrap();
        assert_eq!(cv.weights(), &[-0.25, 0.25]);

        let equal = DivergenceSummary::from_alphas(vec![9.0; 4]).unwrap();
        assert!(optimal_cv_weights(&equal, 0.3)
            .unwrap()
            .weights()
            .iter()
            .all(|&w| w == 0.0));

        let zero = DivergenceSummary::from_alphas(vec![0.0, 2.0]).unwrap();
        assert!(matches!(
            optimal_cv_weights(&zero, 0.3),
            Err(Error::DegenerateSlot { slot: 0, .. })
        ));
        assert!(optimal_cv_weights(&divs, 0.0).is_err());
        assert!(optimal_cv_weights(&divs, 1.0).is_err());
    }

    #[test]
    fn optimal_weights_for_wide_cardinalities() {
        // Independent arithmetic for α = [2, 49, 799], P' = 0.25.
        let alphas = [2.0f64, 49.0, 799.0];
        let h = 3.0 / (0.5 + 1.0 / 49.0 + 1.0 / 799.0);
        let divs = DivergenceSummary::from_alphas(alphas.to_vec()).unwrap();
        assert!((divs.harmonic_mean().unwrap() - h).abs() < 1e-12);
        let cv = optimal_cv_weights(&divs, 0.25).unwrap();
        for (w, a) in cv.weights().iter().zip(alphas) {
            assert!((w - 0.25 * (1.0 - h / a)).abs() < 1e-15);
        }
        assert!(cv.weights().iter().sum::<f64>().abs() < 1e-12);
        assert!(cv.weights()[0] < 0.0 && cv.weights()[2] > 0.0);
    }

    #[test]
    fn pi_plus_plus_examples() {
        // d = [2, 4], P' = 0.5: weights [-0.25, 0.25]; sample [0, 0] with r = 1
        // has Y = [2, 4], PI term 5, control 0.5, PI++ term 4.5.
        let pi = det_zero(&[2, 4]);
        let data = dataset(&[2, 4], &[(&[0, 0], true)]);
        assert_eq!(estimate_pi(&data, &pi).unwrap(), 5.0);
        assert_eq!(estimate_pi_plus_plus(&data, &pi, 0.5).unwrap(), 4.5);

        // Equal cardinalities: PI++ is PI.
        let pi = det_zero(&[5, 5, 5]);
        let data = dataset(
            &[5, 5, 5],
            &[(&[0, 0, 0], true), (&[0, 1, 0], true), (&[4, 0, 0], false)],
        );
        assert_eq!(
            estimate_pi_plus_plus(&data, &pi, 0.3).unwrap(),
            estimate_pi(&data, &pi).unwrap()
        );

        // π = μ has zero divergence everywhere.
        let data = dataset(&[2, 4], &[(&[0, 0], true)]);
        assert!(matches!(
            estimate_pi_plus_plus(&data, data.logging_policy(), 0.5),
            Err(Error::DegenerateSlot { .. })
        ));
    }

    #[test]
    fn params_zero_sum_check() {
        assert!(AdditiveEstimatorParams::pi_with_control(&[0.5, -0.5]).is_ok());
        assert!(matches!(
            AdditiveEstimatorParams::pi_with_control(&[0.5, -0.4]),
            Err(Error::Precondition(_))
        ));
        let p = AdditiveEstimatorParams::pi(3);
        assert_eq!(p.lambda, -2.0);
        assert_eq!(p.g_value(&[1.0, 1.0, 1.0]), 1.0);
    }

    #[test]
    fn folds_merge_to_the_whole() {
        let pi = det_zero(&[2, 3]);
        let rows: Vec<(&[usize], bool)> = vec![
            (&[0, 0], true),
            (&[1, 0], true),
            (&[0, 2], false),
            (&[0, 1], true),
            (&[1, 1], false),
        ];
        let whole = dataset(&[2, 3], &rows).fold(&pi).unwrap();
        let mut left = dataset(&[2, 3], &rows[..2]).fold(&pi).unwrap();
        let right = dataset(&[2, 3], &rows[2..]).fold(&pi).unwrap();
        left.merge(&right);
        assert_eq!(left, whole);
        assert_eq!(whole.count(), 5);
        assert_eq!(whole.mean_reward().unwrap(), 0.6);
    }
}
