//! Estimating a target policy's value from one logged dataset.
//!
//! Run with `cargo run --release --example estimate_value`.

use slate_ope::estimators::{estimate_ips, estimate_pi, estimate_pi_plus_plus};
use slate_ope::harness::generate_dataset;
use slate_ope::reward::{draw_model, ModelDrawConfig, ModelKind};
use slate_ope::rng::{stream, StreamPurpose};
use slate_ope::slate::{FactoredPolicy, Slate, SlateSpec};

fn main() -> slate_ope::Result<()> {
    let spec = SlateSpec::new(vec![3, 8, 20])?;
    let prior = 0.3;
    let model = draw_model(
        &spec,
        &ModelDrawConfig::new(prior, 0.1, ModelKind::Elementwise)?,
        &mut stream(1, StreamPurpose::Model, 0, 0),
    )?;
    let logging = FactoredPolicy::uniform(&spec);
    let target = FactoredPolicy::deterministic(&spec, &Slate::new(vec![1, 4, 10]))?;
    let truth = model.true_policy_value(&target)?;

    println!("true value {truth:.5}");
    for n in [1_000, 10_000, 100_000] {
        let data = generate_dataset(
            &model,
            &logging,
            n,
            &mut stream(1, StreamPurpose::Replication, 0, n as u64),
        )?;
        println!(
            "n = {n:>6}  IPS {:.5}  PI {:.5}  PI++ {:.5}",
            estimate_ips(&data, &target)?,
            estimate_pi(&data, &target)?,
            estimate_pi_plus_plus(&data, &target, prior)?,
        );
    }
    Ok(())
}
