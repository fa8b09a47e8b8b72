//! Measured improvement against the predicted P̄²K(M − H) as the number of
//! slots grows, with evenly spread cardinalities.
//!
//! Run with `cargo run --release --example slot_sweep`.

use slate_ope::harness::{experiment_slot_sweep, CardinalityRule, ExperimentConfig, SweepRule};

fn main() -> slate_ope::Result<()> {
    let template = ExperimentConfig {
        sample_size: 10_000,
        tensor_count: 20,
        replications: 200,
        ..ExperimentConfig::new(CardinalityRule::Fixed(vec![2, 2]), 3)
    };
    let sweep = experiment_slot_sweep(&template, &[2, 3, 4, 5, 6], SweepRule::EvenDivision, &mut |l| {
        eprintln!("{l}")
    })?;
    for e in &sweep.entries {
        println!(
            "K = {}  d = {:?}  measured {:7.3} ± {:.3}  predicted {:7.3}",
            e.slots,
            e.tensors[0].spec.cardinalities(),
            e.stats.mean_delta_nmse,
            e.stats.se_delta_nmse,
            e.stats.mean_predicted_improvement
        );
    }
    let fit = sweep.trend_fit()?;
    println!(
        "measured ≈ {:.3}·predicted + {:.3}, R² = {:.3}",
        fit.slope, fit.intercept, fit.r_squared
    );
    Ok(())
}
