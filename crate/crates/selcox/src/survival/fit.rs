//! Newton–Raphson fitting of the Cox partial likelihood with step halving,
//! plus the one-step estimator and Wald intervals.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::stats;
use crate::survival::{eval_partial_likelihood, CoxFit, FitFlags, SurvivalDataset};

/// Newton iteration controls. Defaults match the library-wide contract:
/// convergence when the relative log-likelihood change drops below 1e-9 or
/// the score sup-norm drops below 1e-8.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub score_tol: f64,
    pub max_halvings: usize,
    /// |beta_j| beyond this (standardized scale) is treated as monotone
    /// likelihood and flagged as separation.
    pub separation_bound: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 100,
            rel_tol: 1e-9,
            score_tol: 1e-8,
            max_halvings: 20,
            separation_bound: 50.0,
        }
    }
}

fn penalized_eval(
    data: &SurvivalDataset,
    beta: &DVector<f64>,
    subset: &[usize],
    ridge: f64,
) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
    let (mut ll, u, info) = eval_partial_likelihood(data, beta, subset, true, true)?;
    let mut u = u.unwrap();
    let mut info = info.unwrap();
    if ridge > 0.0 {
        ll -= ridge * beta.norm_squared();
        u.axpy(-2.0 * ridge, beta, 1.0);
        for j in 0..subset.len() {
            info[(j, j)] += 2.0 * ridge;
        }
    }
    Ok((ll, u, info))
}

fn newton_core(
    data: &SurvivalDataset,
    subset: &[usize],
    options: &FitOptions,
    ridge: f64,
) -> Result<CoxFit> {
    if subset.is_empty() {
        return Err(Error::invalid("cannot fit on an empty covariate subset"));
    }
    let mut seen = subset.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != subset.len() {
        return Err(Error::invalid("duplicate indices in covariate subset"));
    }
    if data.n_events() == 0 {
        return Err(Error::invalid("dataset has no events"));
    }
    let k = subset.len();
    let mut flags = FitFlags {
        underdetermined: data.n() <= k,
        ..FitFlags::default()
    };

    let mut beta = DVector::zeros(k);
    let (mut ll, mut u, mut info) = penalized_eval(data, &beta, subset, ridge)?;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=options.max_iter {
        iterations = iter;
        if u.amax() < options.score_tol {
            converged = true;
            break;
        }
        let (delta, used_pinv) = linalg::solve_or_pinv(&info, &u);
        if used_pinv {
            flags.rank_deficient = true;
        }

        let mut step = 1.0;
        let mut accepted = false;
        let mut beta_new = beta.clone();
        let mut next = (ll, u.clone(), info.clone());
        for _ in 0..=options.max_halvings {
            beta_new = &beta + step * &delta;
            let cand = penalized_eval(data, &beta_new, subset, ridge)?;
            if cand.0 >= ll - 1e-12 {
                next = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Step halving exhausted: the quadratic model is unusable here.
            break;
        }
        let (ll_new, u_new, info_new) = next;
        let rel_change = (ll_new - ll).abs() / ll_new.abs().max(1.0);
        beta = beta_new;
        ll = ll_new;
        u = u_new;
        info = info_new;
        if beta.amax() > options.separation_bound {
            flags.separation = true;
            break;
        }
        if rel_change < options.rel_tol {
            converged = true;
            break;
        }
    }
    if flags.separation {
        converged = false;
    }

    Ok(CoxFit {
        beta,
        loglik: ll,
        score_at_solution: u,
        information: info,
        converged,
        iterations,
        subset: subset.to_vec(),
        flags,
    })
}

/// Maximize the log partial likelihood on `subset` by Newton–Raphson with
/// step halving, starting from zero. The objective never decreases across
/// accepted iterations.
pub fn fit_cox_mle(
    data: &SurvivalDataset,
    subset: &[usize],
    options: &FitOptions,
) -> Result<CoxFit> {
    newton_core(data, subset, options, 0.0)
}

/// Maximize the ridge-penalized log partial likelihood
/// l(beta) - ridge * |beta|^2. Used as the adaptive-weight initializer when
/// the unpenalized fit is unstable. The returned `loglik`, `score`, and
/// `information` refer to the penalized objective.
pub fn fit_cox_ridge(
    data: &SurvivalDataset,
    subset: &[usize],
    ridge: f64,
    options: &FitOptions,
) -> Result<CoxFit> {
    if !(ridge > 0.0) {
        return Err(Error::invalid("ridge penalty must be positive"));
    }
    newton_core(data, subset, options, ridge)
}

/// One Newton step from `beta_init`: beta_init + I(beta_init)^{-1}
/// U(beta_init). Errors if the information at `beta_init` is singular.
pub fn one_step_update(
    data: &SurvivalDataset,
    beta_init: &DVector<f64>,
    subset: &[usize],
) -> Result<DVector<f64>> {
    let (_, u, info) = eval_partial_likelihood(data, beta_init, subset, true, true)?;
    let info = info.unwrap();
    let delta = linalg::spd_solve(&info, &u.unwrap())
        .ok_or_else(|| Error::SingularInformation {
            subset: subset.to_vec(),
        })?;
    let out = beta_init + delta;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("one-step update produced non-finite values"));
    }
    Ok(out)
}

/// Two-sided Wald interval for one coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub se: f64,
    /// Interval is (-inf, inf) because the variance was unavailable.
    pub degenerate: bool,
}

/// Wald intervals beta_j +/- z_{1-alpha/2} * sqrt([I^{-1}]_jj) for every
/// coefficient in the fit. A singular information matrix or an unconverged
/// fit yields degenerate infinite intervals rather than an error.
pub fn wald_ci(fit: &CoxFit, alpha: f64) -> Result<Vec<WaldInterval>> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::invalid("alpha must be in (0, 1)"));
    }
    let k = fit.beta.len();
    let degenerate_all = || {
        (0..k)
            .map(|j| WaldInterval {
                estimate: fit.beta[j],
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
                se: f64::INFINITY,
                degenerate: true,
            })
            .collect()
    };
    if !fit.converged {
        return Ok(degenerate_all());
    }
    let cov = match linalg::spd_inverse(&fit.information) {
        Some(c) => c,
        None => return Ok(degenerate_all()),
    };
    let z = stats::z_crit(alpha);
    Ok((0..k)
        .map(|j| {
            let var = cov[(j, j)];
            if var.is_finite() && var > 0.0 {
                let se = var.sqrt();
                WaldInterval {
                    estimate: fit.beta[j],
                    lower: fit.beta[j] - z * se,
                    upper: fit.beta[j] + z * se,
                    se,
                    degenerate: false,
                }
            } else {
                WaldInterval {
                    estimate: fit.beta[j],
                    lower: f64::NEG_INFINITY,
                    upper: f64::INFINITY,
                    se: f64::INFINITY,
                    degenerate: true,
                }
            }
        })
        .collect())
}
