//! Improvement of PI++ over PI as the assumed prior P' drifts from the true
//! prior P̄. Improvement turns negative once P' exceeds 2P̄.
//!
//! Run with `cargo run --release --example prior_grid`.

use slate_ope::harness::{experiment_prior_grid, CardinalityRule, ExperimentConfig};

fn main() -> slate_ope::Result<()> {
    let template = ExperimentConfig {
        sample_size: 5_000,
        tensor_count: 10,
        replications: 200,
        ..ExperimentConfig::new(CardinalityRule::Fixed(vec![3, 50, 800]), 1)
    };
    let p_bars = [0.1, 0.2, 0.3];
    let p_primes = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
    let grid = experiment_prior_grid(&template, &p_bars, &p_primes, &mut |line| eprintln!("{line}"))?;

    print!("{:>6}", "P̄\\P'");
    for p in p_primes {
        print!("{p:>9}");
    }
    println!();
    for p_bar in p_bars {
        print!("{p_bar:>6}");
        for p_prime in p_primes {
            print!(
                "{:>8.1}%",
                grid.cell(p_bar, p_prime).unwrap().stats.mean_percent_improvement
            );
        }
        println!();
    }
    Ok(())
}
