//! Score fitted models on held-out data with the IPCW integrated Brier
//! score and Harrell's concordance index.
//!
//! Both metrics only need a risk score per subject: the Brier score uses
//! predicted survival curves built from the Breslow baseline, while the
//! concordance index ranks subjects by their linear predictor.
//!
//! Run with `cargo run --release --example predictive_metrics`.

use selcox::datagen::{generate_toy_dataset, BaselineSpec, CoefficientPattern, ToyScenario};
use selcox::lasso::{select_model, LassoFlavor, TuningRule};
use selcox::metrics::{harrell_cindex, integrated_brier, km_censoring_survivor};
use selcox::seed::derive_rng;
use selcox::survival::breslow_from_linear_predictor;
use selcox::Result;

fn main() -> Result<()> {
    let scenario = ToyScenario {
        n: 300,
        p: 10,
        rho: 0.3,
        censor_target: 0.3,
        baseline: BaselineSpec::weibull_default(),
        pattern: CoefficientPattern::Realistic,
        dichotomize: vec![],
    };
    let mut rng = derive_rng(&["predictive-metrics-example"]);
    let train = generate_toy_dataset(&scenario, &mut rng)?.data;
    let test = generate_toy_dataset(&scenario, &mut rng)?.data;

    let selection = select_model(&train, &LassoFlavor::Standard, &TuningRule::CvMin, 10, &mut rng)?;
    println!(
        "selected {:?} at lambda = {:.4}",
        selection.fit.active, selection.lambda
    );

    // Linear predictors on the test set from the training-set coefficients.
    let eta: Vec<f64> = (0..test.n())
        .map(|i| {
            (0..test.p())
                .map(|j| selection.fit.beta[j] * test.covariate(i, j))
                .sum()
        })
        .collect();

    // IPCW weights come from the censoring Kaplan-Meier on the test set;
    // predicted curves S_i(t) = exp(-H0(t) exp(eta_i)) from Breslow.
    let baseline = breslow_from_linear_predictor(&test, &eta)?;
    let censoring = km_censoring_survivor(&test);
    let predict = |i: usize, t: f64| (-baseline.cumulative_hazard_at(t) * eta[i].exp()).exp();
    let ibs = integrated_brier(&test, &predict, &censoring, 100)?;
    let cindex = harrell_cindex(&test, &eta)?;
    println!("integrated Brier score = {:.4} (over [0, {:.3}])", ibs.value, ibs.tau);
    println!("concordance index      = {:.4}", cindex);

    // A null model for comparison: constant risk, baseline-only curves.
    let eta0 = vec![0.0; test.n()];
    let baseline0 = breslow_from_linear_predictor(&test, &eta0)?;
    let predict0 = |_: usize, t: f64| (-baseline0.cumulative_hazard_at(t)).exp();
    let ibs0 = integrated_brier(&test, &predict0, &censoring, 100)?;
    println!("null-model Brier score = {:.4}", ibs0.value);
    Ok(())
}
