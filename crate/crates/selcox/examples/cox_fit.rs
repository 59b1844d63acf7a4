//! Fit a Cox model by Newton-Raphson and read off the usual outputs:
//! coefficients, Wald intervals, and the Breslow baseline hazard.
//!
//! Run with `cargo run --example cox_fit`.

use selcox::datagen::{generate_toy_dataset, BaselineSpec, CoefficientPattern, ToyScenario};
use selcox::seed::derive_rng;
use selcox::survival::{breslow_baseline, fit_cox_mle, wald_ci, FitOptions};
use selcox::Result;

fn main() -> Result<()> {
    let scenario = ToyScenario {
        n: 300,
        p: 5,
        rho: 0.3,
        censor_target: 0.2,
        baseline: BaselineSpec::Exponential,
        pattern: CoefficientPattern::Realistic,
        dichotomize: vec![],
    };
    let mut rng = derive_rng(&["cox-fit-example"]);
    let replicate = generate_toy_dataset(&scenario, &mut rng)?;
    let data = &replicate.data;
    println!(
        "n = {}, p = {}, events = {}",
        data.n(),
        data.p(),
        data.n_events()
    );

    // Fit on all columns. The dataset is standardized, so coefficients are
    // on the per-standard-deviation scale until mapped back.
    let subset: Vec<usize> = (0..data.p()).collect();
    let fit = fit_cox_mle(data, &subset, &FitOptions::default())?;
    println!(
        "converged in {} iterations, log partial likelihood {:.4}",
        fit.iterations, fit.loglik
    );

    let intervals = wald_ci(&fit, 0.05)?;
    println!("\n{:>4} {:>10} {:>10} {:>20}", "col", "truth", "estimate", "95% Wald interval");
    for (k, iv) in intervals.iter().enumerate() {
        let j = subset[k];
        let est = data.to_original_scale(j, fit.beta[k]);
        let lo = data.to_original_scale(j, iv.lower);
        let hi = data.to_original_scale(j, iv.upper);
        println!(
            "{:>4} {:>10.4} {:>10.4} [{:>8.4}, {:>8.4}]",
            j, replicate.beta_truth[j], est, lo, hi
        );
    }

    // Breslow cumulative baseline hazard at the fitted coefficients.
    let baseline = breslow_baseline(data, &fit)?;
    println!("\ncumulative baseline hazard:");
    for q in [0.25, 0.5, 0.75] {
        let mut times: Vec<f64> = data.times().to_vec();
        times.sort_by(f64::total_cmp);
        let t = times[((data.n() - 1) as f64 * q) as usize];
        println!("  H0({t:.3}) = {:.4}", baseline.cumulative_hazard_at(t));
    }
    Ok(())
}
