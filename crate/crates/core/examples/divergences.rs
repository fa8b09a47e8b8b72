//! Slot divergences and the control-variate weights they induce.
//!
//! Run with `cargo run --example divergences`.

use slate_ope::estimators::optimal_cv_weights;
use slate_ope::oracle::predicted_improvement;
use slate_ope::slate::{compute_divergences, FactoredPolicy, Slate, SlateSpec, SlotWeights};

fn main() -> slate_ope::Result<()> {
    let spec = SlateSpec::new(vec![2, 10, 50])?;
    let logging = FactoredPolicy::uniform(&spec);
    let target = FactoredPolicy::deterministic(&spec, &Slate::zeros(&spec))?;

    // Uniform logging against a deterministic target: α_k = d_k − 1.
    let divs = compute_divergences(&target, &logging)?;
    println!("cardinalities  {:?}", spec.cardinalities());
    println!("divergences    {:?}", divs.alphas());
    println!(
        "AM = {:.4}, HM = {:.4}",
        divs.arithmetic_mean(),
        divs.harmonic_mean().unwrap()
    );

    let weights = SlotWeights::new(&target, &logging)?;
    let mut y = vec![0.0; spec.slot_count()];
    weights.fill(&[0, 0, 0], &mut y);
    println!("Y for the target slate   {y:?}");
    weights.fill(&[1, 0, 7], &mut y);
    println!("Y for slate [1, 0, 7]    {y:?}");

    for p in [0.1, 0.25, 0.5] {
        let cv = optimal_cv_weights(&divs, p)?;
        let gain = predicted_improvement(&divs, p, p)?.improvement_per_sample;
        println!("P' = {p:<4}  w* = {:?}  n·Δρ = {gain:.4}", cv.weights());
    }

    // A non-uniform logging policy changes the divergences.
    let skewed = FactoredPolicy::new(
        &spec,
        vec![
            vec![0.8, 0.2],
            std::iter::once(0.5).chain(std::iter::repeat_n(0.5 / 9.0, 9)).collect(),
            vec![1.0 / 50.0; 50],
        ],
    )?;
    println!(
        "skewed logging divergences {:?}",
        compute_divergences(&target, &skewed)?.alphas()
    );
    Ok(())
}
