//! Exact estimator variances by enumeration, compared with the closed-form
//! improvement of PI++ over PI.
//!
//! Run with `cargo run --release --example risk_oracle`.

use slate_ope::estimators::{optimal_cv_weights, AdditiveEstimatorParams};
use slate_ope::oracle::{exact_bias, exact_variance, predicted_improvement};
use slate_ope::reward::{draw_model, ModelDrawConfig, ModelKind, RewardModel, TabularModel};
use slate_ope::rng::{stream, StreamPurpose};
use slate_ope::slate::{compute_divergences, FactoredPolicy, Slate, SlateSpec};
use slate_ope::stats::{mean, standard_error};

fn main() -> slate_ope::Result<()> {
    let spec = SlateSpec::new(vec![2, 4])?;
    let logging = FactoredPolicy::uniform(&spec);
    let target = FactoredPolicy::deterministic(&spec, &Slate::zeros(&spec))?;
    let divs = compute_divergences(&target, &logging)?;
    let pi = AdditiveEstimatorParams::pi(2);

    // A non-additive rate table: PI is biased here.
    let table = RewardModel::from(TabularModel::new(&spec, vec![0.9, 0.1, 0.1, 0.1, 0.1, 0.5, 0.5, 0.5])?);
    println!(
        "tabular model: v_π = {}, PI bias = {:.4}",
        table.true_policy_value(&target)?,
        exact_bias(&table, &logging, &target, &pi)?
    );

    // Averaged over random additive models, the variance gap matches the
    // closed form, for a correct and for a misspecified prior.
    let p_bar = 0.5;
    let draw = ModelDrawConfig::new(p_bar, 0.1, ModelKind::Elementwise)?;
    for p_prime in [0.25, 0.5, 0.9, 0.99] {
        let pipp = AdditiveEstimatorParams::pi_plus_plus(&optimal_cv_weights(&divs, p_prime)?);
        let gaps: Vec<f64> = (0..500)
            .map(|m| {
                let model = draw_model(&spec, &draw, &mut stream(2, StreamPurpose::Model, m, 0))?;
                Ok(exact_variance(&model, &logging, &target, &pi)? - exact_variance(&model, &logging, &target, &pipp)?)
            })
            .collect::<slate_ope::Result<_>>()?;
        let predicted = predicted_improvement(&divs, p_bar, p_prime)?.improvement_per_sample;
        println!(
            "P' = {p_prime:.3}: exact gap {:+.5} ± {:.5}, predicted {predicted:+.5}",
            mean(&gaps),
            standard_error(&gaps)
        );
    }
    Ok(())
}
