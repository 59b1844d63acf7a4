//! Trace a Cox lasso regularization path and pick lambda four ways:
//! cross-validation minimum, the one-standard-error rule, AIC, and BIC.
//!
//! Run with `cargo run --example lasso_path`.

use selcox::datagen::{generate_toy_dataset, BaselineSpec, CoefficientPattern, ToyScenario};
use selcox::lasso::{
    cross_validate, default_path_eps, information_criteria, lambda_path, select_lambda,
    LassoFlavor, TuningInput, TuningRule,
};
use selcox::seed::derive_rng;
use selcox::Result;

fn main() -> Result<()> {
    let scenario = ToyScenario {
        n: 200,
        p: 20,
        rho: 0.3,
        censor_target: 0.2,
        baseline: BaselineSpec::weibull_default(),
        pattern: CoefficientPattern::Sparse,
        dichotomize: vec![],
    };
    let mut rng = derive_rng(&["lasso-path-example"]);
    let data = generate_toy_dataset(&scenario, &mut rng)?.data;

    let flavor = LassoFlavor::Standard;
    let weights = flavor.weights(&data)?;
    let path = lambda_path(&data, &weights, 100, default_path_eps(data.n(), data.p()))?;
    println!(
        "path of {} lambdas from {:.4} down to {:.4}",
        path.lambdas.len(),
        path.lambdas[0],
        path.lambdas[path.lambdas.len() - 1]
    );
    println!("\n{:>10} {:>6} {:>12}", "lambda", "active", "loglik");
    for k in (0..path.lambdas.len()).step_by(10) {
        let fit = &path.fits[k];
        println!(
            "{:>10.4} {:>6} {:>12.4}",
            path.lambdas[k],
            fit.active.len(),
            fit.loglik
        );
    }

    // Cross-validation shares one fold assignment across all lambdas;
    // AIC/BIC reuse the path fits directly.
    let cv = cross_validate(&data, &weights, &path, 10, &mut rng)?;
    let criteria = information_criteria(&data, &path)?;
    println!("\n{:>8} {:>10} {:>6}", "rule", "lambda", "size");
    for rule in [
        TuningRule::CvMin,
        TuningRule::Cv1se,
        TuningRule::Aic,
        TuningRule::Bic,
    ] {
        let input = match rule {
            TuningRule::CvMin | TuningRule::Cv1se => TuningInput::Cv(&cv),
            _ => TuningInput::Criteria(&criteria),
        };
        let lambda = select_lambda(&rule, &path, input)?;
        let size = path.fit_at(lambda).map_or(0, |fit| fit.active.len());
        println!("{:>8} {:>10.4} {:>6}", rule.label(), lambda, size);
    }
    Ok(())
}
