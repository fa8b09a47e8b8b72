//! Per-tensor regression of measured improvement on the prediction, with
//! cardinalities drawn at random for every reward model.
//!
//! Run with `cargo run --release --example regression`.

use slate_ope::harness::{
    experiment_slot_sweep, fit_improvement_regression, CardinalityRule, ExperimentConfig, SweepRule,
};

fn main() -> slate_ope::Result<()> {
    let template = ExperimentConfig {
        sample_size: 5_000,
        tensor_count: 40,
        replications: 100,
        ..ExperimentConfig::new(CardinalityRule::Fixed(vec![2, 2]), 4)
    };
    let sweep = experiment_slot_sweep(&template, &[2, 3, 4], SweepRule::UniformRandom, &mut |l| {
        eprintln!("{l}")
    })?;
    for f in fit_improvement_regression(sweep.tensors())? {
        println!(
            "K = {}: slope {:.3}, intercept {:+.3}, R² = {:.3} over {} tensors",
            f.slots, f.fit.slope, f.fit.intercept, f.fit.r_squared, f.fit.points
        );
    }
    Ok(())
}
