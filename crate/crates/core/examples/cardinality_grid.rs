//! Two-slot experiments over pairs of cardinalities. Equal cardinalities give
//! no improvement; the gain grows with the imbalance.
//!
//! Run with `cargo run --release --example cardinality_grid`.

use slate_ope::harness::{experiment_cardinality_grid, CardinalityRule, ExperimentConfig};

fn main() -> slate_ope::Result<()> {
    let template = ExperimentConfig {
        sample_size: 5_000,
        tensor_count: 10,
        replications: 100,
        ..ExperimentConfig::new(CardinalityRule::Fixed(vec![2, 2]), 2)
    };
    let choices = [2, 10, 100, 1000];
    let grid = experiment_cardinality_grid(&template, &choices, &mut |_| {})?;

    println!("percent improvement in n·MSE (rows d₁, columns d₂)");
    print!("{:>6}", "");
    for d in choices {
        print!("{d:>9}");
    }
    println!();
    for d1 in choices {
        print!("{d1:>6}");
        for d2 in choices {
            print!("{:>8.1}%", grid.cell(d1, d2).unwrap().stats.mean_percent_improvement);
        }
        println!();
    }
    Ok(())
}
