//! Lambda selection: cross-validated deviance, information criteria, the
//! five tuning rules, and population calibration of the fixed rule.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datagen::{generate_toy_dataset, ToyScenario};
use crate::error::{Error, Result};
use crate::lasso::{
    default_path_eps, fit_cox_lasso, lambda_path, LambdaPath, LassoFlavor, PenaltyWeights,
    TuningRule,
};
use crate::stats;
use crate::survival::{log_partial_likelihood, SurvivalDataset};

/// One point of the cross-validation curve.
#[derive(Debug, Clone, Copy)]
pub struct CvPoint {
    pub lambda: f64,
    /// Mean fold deviance.
    pub deviance: f64,
    /// Standard error of the fold contributions.
    pub se: f64,
}

/// AIC/BIC at one path point.
#[derive(Debug, Clone, Copy)]
pub struct CriterionPoint {
    pub lambda: f64,
    pub aic: f64,
    pub bic: f64,
    pub df: usize,
}

/// Evidence handed to [`select_lambda`]; which variant is required depends
/// on the rule.
#[derive(Debug, Clone, Copy)]
pub enum TuningInput<'a> {
    None,
    Cv(&'a [CvPoint]),
    Criteria(&'a [CriterionPoint]),
}

/// Fold labels such that every fold contains at least one event;
/// re-randomizes up to 10 times before giving up.
fn assign_folds<R: Rng>(status: &[bool], folds: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = status.len();
    for _ in 0..10 {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut assignment = vec![0usize; n];
        for (pos, &i) in order.iter().enumerate() {
            assignment[i] = pos % folds;
        }
        let mut has_event = vec![false; folds];
        for i in 0..n {
            if status[i] {
                has_event[assignment[i]] = true;
            }
        }
        if has_event.iter().all(|&e| e) {
            return Ok(assignment);
        }
    }
    Err(Error::numerical(
        "could not build folds with at least one event each after 10 attempts",
    ))
}

/// K-fold cross-validated deviance along an existing path, using the
/// difference construction: each held-out fold contributes
/// -2 [ l_full(beta_-k) - l_train(beta_-k) ], which isolates the fold's
/// information without forming fold-local risk sets.
pub fn cross_validate<R: Rng>(
    data: &SurvivalDataset,
    weights: &PenaltyWeights,
    path: &LambdaPath,
    folds: usize,
    rng: &mut R,
) -> Result<Vec<CvPoint>> {
    if folds < 2 {
        return Err(Error::invalid("need at least 2 folds"));
    }
    if folds > data.n() {
        return Err(Error::invalid("more folds than records"));
    }
    if path.lambdas.is_empty() {
        return Err(Error::invalid("empty lambda path"));
    }
    let assignment = assign_folds(data.status(), folds, rng)?;
    let all: Vec<usize> = (0..data.p()).collect();

    let per_fold: Vec<Vec<f64>> = (0..folds)
        .into_par_iter()
        .map(|k| -> Result<Vec<f64>> {
            let train: Vec<usize> = (0..data.n()).filter(|&i| assignment[i] != k).collect();
            let train_data = data.subset_rows(&train)?;
            let mut warm = None;
            let mut devs = Vec::with_capacity(path.lambdas.len());
            for &lambda in &path.lambdas {
                let fit = fit_cox_lasso(&train_data, lambda, weights, warm.as_ref())?;
                let ll_full = log_partial_likelihood(data, &fit.beta, &all)?;
                devs.push(-2.0 * (ll_full - fit.loglik));
                warm = Some(fit.beta);
            }
            Ok(devs)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((0..path.lambdas.len())
        .map(|i| {
            let contributions: Vec<f64> = per_fold.iter().map(|f| f[i]).collect();
            CvPoint {
                lambda: path.lambdas[i],
                deviance: stats::mean(&contributions),
                se: stats::sample_sd(&contributions) / (folds as f64).sqrt(),
            }
        })
        .collect())
}

/// AIC(lambda) = -2 l + 2 df and BIC(lambda) = -2 l + log(d) df with
/// df = |active| and d = number of events.
pub fn information_criteria(
    data: &SurvivalDataset,
    path: &LambdaPath,
) -> Result<Vec<CriterionPoint>> {
    let d = data.n_events();
    if d == 0 {
        return Err(Error::invalid("information criteria need at least one event"));
    }
    let log_d = (d as f64).ln();
    Ok(path
        .fits
        .iter()
        .map(|fit| {
            let df = fit.model_size() as f64;
            CriterionPoint {
                lambda: fit.lambda,
                aic: -2.0 * fit.loglik + 2.0 * df,
                bic: -2.0 * fit.loglik + log_d * df,
                df: fit.model_size(),
            }
        })
        .collect())
}

/// Apply a tuning rule. Curves are ordered by decreasing lambda (path
/// order); ties break toward the larger lambda.
pub fn select_lambda(rule: &TuningRule, path: &LambdaPath, input: TuningInput) -> Result<f64> {
    if path.lambdas.is_empty() {
        return Err(Error::invalid("empty lambda path"));
    }
    match (rule, input) {
        (TuningRule::Fixed(v), _) => {
            if !(*v >= 0.0) {
                return Err(Error::invalid("fixed lambda must be nonnegative"));
            }
            Ok(*v)
        }
        (TuningRule::CvMin, TuningInput::Cv(curve)) => {
            let best = argmin_first(curve.iter().map(|p| p.deviance))?;
            Ok(curve[best].lambda)
        }
        (TuningRule::Cv1se, TuningInput::Cv(curve)) => {
            let best = argmin_first(curve.iter().map(|p| p.deviance))?;
            let threshold = curve[best].deviance + curve[best].se;
            let chosen = curve
                .iter()
                .find(|p| p.deviance <= threshold)
                .expect("the minimizer satisfies its own threshold");
            Ok(chosen.lambda)
        }
        (TuningRule::Aic, TuningInput::Criteria(c)) => {
            Ok(c[argmin_first(c.iter().map(|p| p.aic))?].lambda)
        }
        (TuningRule::Bic, TuningInput::Criteria(c)) => {
            Ok(c[argmin_first(c.iter().map(|p| p.bic))?].lambda)
        }
        (rule, _) => Err(Error::invalid(format!(
            "tuning rule {} did not receive the evidence it needs",
            rule.label()
        ))),
    }
}

/// Index of the first (largest-lambda) strict minimum.
fn argmin_first(values: impl Iterator<Item = f64>) -> Result<usize> {
    let mut best = None;
    let mut best_v = f64::INFINITY;
    for (i, v) in values.enumerate() {
        if !v.is_nan() && v < best_v {
            best_v = v;
            best = Some(i);
        }
    }
    best.ok_or_else(|| Error::invalid("empty or all-NaN selection curve"))
}

/// Calibrate the fixed rule against one large population: draw a dataset of
/// `n_pop` records from the scenario, repeatedly subsample (without
/// replacement) down to the scenario's n, tune each subsample by cv_min,
/// and return the median selected lambda.
pub fn calibrate_fixed_lambda<R: Rng>(
    scenario: &ToyScenario,
    flavor: &LassoFlavor,
    n_pop: usize,
    n_rep: usize,
    rng: &mut R,
) -> Result<f64> {
    scenario.validate()?;
    if n_pop < 2 * scenario.n {
        return Err(Error::invalid("population must dwarf the scenario n"));
    }
    if n_rep == 0 {
        return Err(Error::invalid("need at least one calibration replicate"));
    }
    let pop_scenario = ToyScenario {
        n: n_pop,
        ..scenario.clone()
    };
    let population = generate_toy_dataset(&pop_scenario, rng)?.data;

    // Per-replicate seeds are drawn sequentially so the parallel map below
    // cannot depend on scheduling.
    let seeds: Vec<u64> = (0..n_rep).map(|_| rng.gen()).collect();
    let mut lambdas: Vec<f64> = seeds
        .into_par_iter()
        .map(|seed| -> Result<f64> {
            let mut rep_rng = ChaCha8Rng::seed_from_u64(seed);
            let rows =
                rand::seq::index::sample(&mut rep_rng, population.n(), scenario.n).into_vec();
            let raw = population.subset_rows(&rows)?;
            let sub = SurvivalDataset::standardized(
                raw.times().to_vec(),
                raw.status().to_vec(),
                raw.covariates().clone(),
            )?;
            let weights = flavor.weights(&sub)?;
            let path = lambda_path(&sub, &weights, 100, default_path_eps(sub.n(), sub.p()))?;
            let curve = cross_validate(&sub, &weights, &path, 10, &mut rep_rng)?;
            select_lambda(&TuningRule::CvMin, &path, TuningInput::Cv(&curve))
        })
        .collect::<Result<Vec<_>>>()?;
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stats::median(&lambdas)
}

/// A tuned Lasso fit together with everything needed to condition on it.
#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    pub fit: crate::lasso::PenalizedFit,
    pub weights: PenaltyWeights,
    pub lambda: f64,
}

/// The whole selection pipeline on one dataset: penalty weights from the
/// flavor, a default path, rule-appropriate evidence, and the fit at the
/// selected lambda. The rng is consumed only by cross-validation rules.
pub fn select_model<R: Rng>(
    data: &SurvivalDataset,
    flavor: &LassoFlavor,
    rule: &TuningRule,
    cv_folds: usize,
    rng: &mut R,
) -> Result<SelectionOutcome> {
    let weights = flavor.weights(data)?;
    if let TuningRule::Fixed(v) = rule {
        if !(*v >= 0.0) {
            return Err(Error::invalid("fixed lambda must be nonnegative"));
        }
        let fit = fit_cox_lasso(data, *v, &weights, None)?;
        return Ok(SelectionOutcome {
            lambda: *v,
            fit,
            weights,
        });
    }
    let path = lambda_path(data, &weights, 100, default_path_eps(data.n(), data.p()))?;
    let lambda = if rule.needs_cv() {
        let curve = cross_validate(data, &weights, &path, cv_folds, rng)?;
        select_lambda(rule, &path, TuningInput::Cv(&curve))?
    } else {
        let crit = information_criteria(data, &path)?;
        select_lambda(rule, &path, TuningInput::Criteria(&crit))?
    };
    let fit = path
        .fit_at(lambda)
        .cloned()
        .expect("selected lambda comes from the path");
    Ok(SelectionOutcome {
        fit,
        weights,
        lambda,
    })
}
