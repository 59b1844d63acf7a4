//! Run every confidence-interval method on one simulated dataset and print
//! them side by side, together with the target each method aims at.
//!
//! The full and debiased methods target the generating coefficients; the
//! selection-aware methods (refit, refit0, split, exact PSI) and the oracle
//! target the submodel projection, i.e. the coefficients of the best Cox
//! model using only the selected columns.
//!
//! Run with `cargo run --example selective_intervals`.

use selcox::datagen::{
    generate_toy_dataset, submodel_truth, BaselineSpec, CoefficientPattern, SubmodelTruthCache,
    ToyScenario, DEFAULT_N_POP,
};
use selcox::inference::{
    estimate_nodewise_inverse, infer_debiased, infer_exact_psi, infer_full, infer_oracle,
    infer_refit, infer_refit0, infer_split, NodewiseRule, SelectionEvent, SelectiveInterval,
};
use selcox::lasso::{select_model, LassoFlavor, TuningRule};
use selcox::seed::derive_rng;
use selcox::Result;

fn show(name: &str, intervals: &[SelectiveInterval], targets: &[(usize, f64)]) {
    println!("\n{name}:");
    for iv in intervals {
        let target = targets
            .iter()
            .find(|(j, _)| *j == iv.coef_index)
            .map(|(_, t)| *t);
        let covered = match target {
            Some(t) if !iv.degenerate => {
                if iv.covers(t) {
                    "covers"
                } else {
                    "misses"
                }
            }
            _ => "-",
        };
        println!(
            "  beta[{:>2}] = {:>7.3} in [{:>7.3}, {:>7.3}]  target {:>7}  {}",
            iv.coef_index,
            iv.estimate,
            iv.lower,
            iv.upper,
            target.map_or("n/a".into(), |t| format!("{t:.3}")),
            covered
        );
    }
}

fn main() -> Result<()> {
    let scenario = ToyScenario {
        n: 400,
        p: 10,
        rho: 0.3,
        censor_target: 0.2,
        baseline: BaselineSpec::Exponential,
        pattern: CoefficientPattern::Realistic,
        dichotomize: vec![],
    };
    let alpha = 0.10;
    let mut rng = derive_rng(&["selective-intervals-example"]);
    let replicate = generate_toy_dataset(&scenario, &mut rng)?;
    let data = &replicate.data;

    // One lasso selection shared by all selection-aware methods. Intervals
    // below stay on the standardized scale, as do the targets.
    let selection = select_model(data, &LassoFlavor::Standard, &TuningRule::CvMin, 10, &mut rng)?;
    let event = SelectionEvent::from_fit(&selection.fit, &selection.weights);
    println!(
        "lasso at lambda = {:.4} selected columns {:?}",
        selection.lambda, event.active
    );

    let scales = &data.standardization().scale;
    let full_target: Vec<(usize, f64)> = replicate
        .beta_truth
        .iter()
        .enumerate()
        .map(|(j, b)| (j, b * scales[j]))
        .collect();
    let cache = SubmodelTruthCache::new();
    let sub = submodel_truth(&scenario, &event.active, DEFAULT_N_POP, &cache)?;
    let sub_target: Vec<(usize, f64)> = event
        .active
        .iter()
        .zip(&sub)
        .map(|(&j, b)| (j, b * scales[j]))
        .collect();
    let true_active: Vec<usize> = (0..scenario.p)
        .filter(|&j| replicate.beta_truth[j] != 0.0)
        .collect();
    let oracle_sub = submodel_truth(&scenario, &true_active, DEFAULT_N_POP, &cache)?;
    let oracle_target: Vec<(usize, f64)> = true_active
        .iter()
        .zip(&oracle_sub)
        .map(|(&j, b)| (j, b * scales[j]))
        .collect();

    show("full", &infer_full(data, alpha)?, &full_target);
    show("oracle", &infer_oracle(data, &true_active, alpha)?, &oracle_target);
    show("refit", &infer_refit(data, &event, alpha)?, &sub_target);
    show("refit0", &infer_refit0(data, &selection.fit, alpha)?, &sub_target);

    let split = infer_split(
        data,
        &LassoFlavor::Standard,
        &TuningRule::CvMin,
        10,
        alpha,
        &mut rng,
    )?;
    // Split selects on its own half, so its targets come from that set.
    let split_sub = submodel_truth(&scenario, &split.selection.active, DEFAULT_N_POP, &cache)?;
    let split_target: Vec<(usize, f64)> = split
        .selection
        .active
        .iter()
        .zip(&split_sub)
        .map(|(&j, b)| (j, b * scales[j]))
        .collect();
    show("split", &split.intervals, &split_target);

    let nodewise = estimate_nodewise_inverse(data, &selection.fit.beta, &NodewiseRule::default())?;
    show(
        "debiased",
        &infer_debiased(data, &selection.fit, &nodewise, alpha)?,
        &full_target,
    );
    show(
        "exact_psi",
        &infer_exact_psi(data, &selection.fit, &selection.weights, alpha)?,
        &sub_target,
    );
    Ok(())
}
