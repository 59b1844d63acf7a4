//! Confidence intervals after model selection: the naive Wald family
//! (full, oracle, refit, refit0), sample splitting, the debiased Lasso, and
//! exact post-selection inference by truncated-Gaussian pivots.

mod debiased;
mod psi;
mod split;

pub use debiased::{estimate_nodewise_inverse, infer_debiased, NodewiseInverse, NodewiseRule};
pub use psi::{infer_exact_psi, truncated_normal_cdf, truncation_interval, TruncatedPivot};
pub use split::{infer_split, SplitInference};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::{PenalizedFit, PenaltyWeights};
use crate::survival::{fit_cox_mle, one_step_update, wald_ci, FitOptions, SurvivalDataset};

/// Inference method tags, matching the simulation study's comparison set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Full,
    Oracle,
    Refit,
    Refit0,
    Split,
    Debiased,
    ExactPsi,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Full,
        Method::Oracle,
        Method::Refit,
        Method::Refit0,
        Method::Split,
        Method::Debiased,
        Method::ExactPsi,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::Oracle => "oracle",
            Method::Refit => "refit",
            Method::Refit0 => "refit0",
            Method::Split => "split",
            Method::Debiased => "debiased",
            Method::ExactPsi => "exact_psi",
        }
    }

    /// Whether the method's target is the submodel projection (true) or the
    /// full-model coefficient (false).
    pub fn targets_submodel(&self) -> bool {
        !matches!(self, Method::Full | Method::Debiased)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method '{s}'")))
    }
}

/// What population quantity an interval aims at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// beta_{j, M}: partial-likelihood projection onto the selected set.
    Submodel,
    /// beta_j of the generating full model.
    FullModel,
}

impl TargetKind {
    pub fn label(&self) -> &'static str {
        match self {
            TargetKind::Submodel => "submodel",
            TargetKind::FullModel => "full_model",
        }
    }
}

/// A confidence interval for one coefficient, produced after (and aware of)
/// selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectiveInterval {
    pub coef_index: usize,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub target_kind: TargetKind,
    pub method: Method,
    /// Unbounded truncation or unavailable variance; such intervals are
    /// excluded from coverage and width summaries but counted.
    pub degenerate: bool,
}

impl SelectiveInterval {
    pub fn covers(&self, target: f64) -> bool {
        self.lower <= target && target <= self.upper
    }

    pub fn rejects_zero(&self) -> bool {
        !self.degenerate && (self.lower > 0.0 || self.upper < 0.0)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// The conditioning information of a Lasso selection.
#[derive(Debug, Clone)]
pub struct SelectionEvent {
    /// Sorted active set E.
    pub active: Vec<usize>,
    /// Signs aligned with `active`.
    pub signs: Vec<f64>,
    pub lambda: f64,
    pub weights: PenaltyWeights,
}

impl SelectionEvent {
    pub fn from_fit(fit: &PenalizedFit, weights: &PenaltyWeights) -> Self {
        SelectionEvent {
            active: fit.active.clone(),
            signs: fit.signs.clone(),
            lambda: fit.lambda,
            weights: weights.clone(),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::invalid("alpha must be in (0, 1)"));
    }
    Ok(())
}

/// Wald intervals from a Newton fit on `subset`, tagged for `method`.
fn wald_family(
    data: &SurvivalDataset,
    subset: &[usize],
    alpha: f64,
    method: Method,
    target_kind: TargetKind,
) -> Result<Vec<SelectiveInterval>> {
    check_alpha(alpha)?;
    if subset.is_empty() {
        return Ok(Vec::new());
    }
    let fit = fit_cox_mle(data, subset, &FitOptions::default())?;
    let cis = wald_ci(&fit, alpha)?;
    Ok(subset
        .iter()
        .zip(cis)
        .map(|(&j, ci)| SelectiveInterval {
            coef_index: j,
            estimate: ci.estimate,
            lower: ci.lower,
            upper: ci.upper,
            alpha,
            target_kind,
            method,
            degenerate: ci.degenerate,
        })
        .collect())
}

/// Wald intervals from the unpenalized fit on all covariates; no selection
/// involved, so the target is the full-model coefficient vector.
pub fn infer_full(data: &SurvivalDataset, alpha: f64) -> Result<Vec<SelectiveInterval>> {
    let all: Vec<usize> = (0..data.p()).collect();
    wald_family(data, &all, alpha, Method::Full, TargetKind::FullModel)
}

/// Wald intervals on the truly active set, which only a simulation oracle
/// knows. Under a correctly specified generating model the submodel target
/// equals the generating coefficients.
pub fn infer_oracle(
    data: &SurvivalDataset,
    true_active: &[usize],
    alpha: f64,
) -> Result<Vec<SelectiveInterval>> {
    wald_family(data, true_active, alpha, Method::Oracle, TargetKind::Submodel)
}

/// Naive selective inference: unpenalized refit on the selected set and
/// plain Wald intervals that ignore how E was chosen.
pub fn infer_refit(
    data: &SurvivalDataset,
    event: &SelectionEvent,
    alpha: f64,
) -> Result<Vec<SelectiveInterval>> {
    wald_family(data, &event.active, alpha, Method::Refit, TargetKind::Submodel)
}

/// Like refit, but the estimate is the one-step update from the penalized
/// solution instead of the fully iterated MLE; intervals use the
/// information at the one-step point.
pub fn infer_refit0(
    data: &SurvivalDataset,
    fit: &PenalizedFit,
    alpha: f64,
) -> Result<Vec<SelectiveInterval>> {
    check_alpha(alpha)?;
    if fit.active.is_empty() {
        return Ok(Vec::new());
    }
    let subset = fit.active.clone();
    let beta_e = DVector::from_iterator(subset.len(), subset.iter().map(|&j| fit.beta[j]));
    let degenerate_all = |estimates: &DVector<f64>| {
        subset
            .iter()
            .zip(estimates.iter())
            .map(|(&j, &est)| SelectiveInterval {
                coef_index: j,
                estimate: est,
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
                alpha,
                target_kind: TargetKind::Submodel,
                method: Method::Refit0,
                degenerate: true,
            })
            .collect::<Vec<_>>()
    };
    let bar = match one_step_update(data, &beta_e, &subset) {
        Ok(b) => b,
        Err(Error::SingularInformation { .. }) => return Ok(degenerate_all(&beta_e)),
        Err(e) => return Err(e),
    };
    let info = crate::survival::information(data, &bar, &subset)?;
    let cov = match crate::linalg::spd_inverse(&info) {
        Some(c) => c,
        None => return Ok(degenerate_all(&bar)),
    };
    let z = crate::stats::z_crit(alpha);
    Ok(subset
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let var = cov[(k, k)];
            if var.is_finite() && var > 0.0 {
                let se = var.sqrt();
                SelectiveInterval {
                    coef_index: j,
                    estimate: bar[k],
                    lower: bar[k] - z * se,
                    upper: bar[k] + z * se,
                    alpha,
                    target_kind: TargetKind::Submodel,
                    method: Method::Refit0,
                    degenerate: false,
                }
            } else {
                SelectiveInterval {
                    coef_index: j,
                    estimate: bar[k],
                    lower: f64::NEG_INFINITY,
                    upper: f64::INFINITY,
                    alpha,
                    target_kind: TargetKind::Submodel,
                    method: Method::Refit0,
                    degenerate: true,
                }
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_toy_dataset, BaselineSpec, CoefficientPattern, ToyScenario};
    use crate::lasso::{fit_cox_lasso, lambda_max, lambda_path, PenaltyWeights};
    use crate::seed::derive_rng;

    fn toy(n: usize, p: usize, tag: &str) -> SurvivalDataset {
        let scenario = ToyScenario {
            n,
            p,
            rho: 0.3,
            censor_target: 0.2,
            baseline: BaselineSpec::Exponential,
            pattern: CoefficientPattern::Sparse,
            dichotomize: vec![],
        };
        let rep = generate_toy_dataset(&scenario, &mut derive_rng(&["infer", tag])).unwrap();
        SurvivalDataset::standardized(
            rep.data.times().to_vec(),
            rep.data.status().to_vec(),
            rep.data.covariates().clone(),
        )
        .unwrap()
    }

    #[test]
    fn full_matches_wald_directly() {
        let data = toy(80, 3, "full");
        let intervals = infer_full(&data, 0.1).unwrap();
        let fit = fit_cox_mle(&data, &[0, 1, 2], &FitOptions::default()).unwrap();
        let cis = wald_ci(&fit, 0.1).unwrap();
        assert_eq!(intervals.len(), 3);
        for (iv, ci) in intervals.iter().zip(&cis) {
            assert_eq!(iv.lower, ci.lower);
            assert_eq!(iv.upper, ci.upper);
            assert_eq!(iv.target_kind, TargetKind::FullModel);
            assert_eq!(iv.method, Method::Full);
            assert!(iv.lower <= iv.estimate && iv.estimate <= iv.upper);
        }
    }

    #[test]
    fn oracle_on_everything_equals_full_bounds() {
        let data = toy(80, 3, "oracle");
        let full = infer_full(&data, 0.1).unwrap();
        let oracle = infer_oracle(&data, &[0, 1, 2], 0.1).unwrap();
        for (f, o) in full.iter().zip(&oracle) {
            assert_eq!(f.lower, o.lower);
            assert_eq!(f.upper, o.upper);
        }
        assert_eq!(oracle[0].target_kind, TargetKind::Submodel);
        assert!(infer_oracle(&data, &[], 0.1).unwrap().is_empty());
    }

    #[test]
    fn refit_equals_oracle_when_selection_is_exact() {
        let data = toy(100, 4, "refit");
        let event = SelectionEvent {
            active: vec![0, 1],
            signs: vec![1.0, 1.0],
            lambda: 0.5,
            weights: PenaltyWeights::uniform(4),
        };
        let refit = infer_refit(&data, &event, 0.1).unwrap();
        let oracle = infer_oracle(&data, &[0, 1], 0.1).unwrap();
        for (r, o) in refit.iter().zip(&oracle) {
            assert_eq!(r.lower, o.lower);
            assert_eq!(r.upper, o.upper);
            assert_eq!(r.method, Method::Refit);
        }
    }

    #[test]
    fn refit0_approaches_refit_as_lambda_vanishes() {
        let data = toy(90, 4, "r0");
        let w = PenaltyWeights::uniform(4);
        let lmax = lambda_max(&data, &w).unwrap();
        let path = lambda_path(&data, &w, 30, 0.001).unwrap();

        // at essentially zero penalty the one-step estimate is the MLE
        let near_zero = path.fits.last().unwrap();
        assert!(near_zero.lambda < 0.005 * lmax);
        let r0 = infer_refit0(&data, near_zero, 0.1).unwrap();
        let event = SelectionEvent::from_fit(near_zero, &w);
        let refit = infer_refit(&data, &event, 0.1).unwrap();
        assert_eq!(r0.len(), refit.len());
        let mut max_gap_small = 0.0f64;
        for (a, b) in r0.iter().zip(&refit) {
            assert_eq!(a.coef_index, b.coef_index);
            max_gap_small = max_gap_small.max((a.estimate - b.estimate).abs());
        }

        // at a mid-path lambda the gap is larger; it must shrink along the path
        let mid = &path.fits[10];
        if !mid.active.is_empty() {
            let r0_mid = infer_refit0(&data, mid, 0.1).unwrap();
            let event_mid = SelectionEvent::from_fit(mid, &w);
            let refit_mid = infer_refit(&data, &event_mid, 0.1).unwrap();
            let gaps: std::collections::HashMap<usize, f64> = refit_mid
                .iter()
                .map(|iv| (iv.coef_index, iv.estimate))
                .collect();
            let mut max_gap_mid = 0.0f64;
            for iv in &r0_mid {
                if let Some(re) = gaps.get(&iv.coef_index) {
                    max_gap_mid = max_gap_mid.max((iv.estimate - re).abs());
                }
            }
            assert!(
                max_gap_small < max_gap_mid,
                "gap did not shrink: {max_gap_small} vs {max_gap_mid}"
            );
        }
        assert!(max_gap_small < 1e-5);
    }

    #[test]
    fn refit0_empty_selection_is_empty() {
        let data = toy(60, 3, "r0e");
        let w = PenaltyWeights::uniform(3);
        let lmax = lambda_max(&data, &w).unwrap();
        let fit = fit_cox_lasso(&data, lmax, &w, None).unwrap();
        assert!(infer_refit0(&data, &fit, 0.1).unwrap().is_empty());
    }

    #[test]
    fn method_parsing_and_labels() {
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!("fulll".parse::<Method>().is_err());
        assert!(Method::Full.targets_submodel() == false);
        assert!(Method::Debiased.targets_submodel() == false);
        assert!(Method::ExactPsi.targets_submodel());
        let m: Method = serde_json::from_str("\"exact_psi\"").unwrap();
        assert_eq!(m, Method::ExactPsi);
    }

    #[test]
    fn interval_helpers() {
        let iv = SelectiveInterval {
            coef_index: 0,
            estimate: 1.0,
            lower: 0.5,
            upper: 1.5,
            alpha: 0.1,
            target_kind: TargetKind::Submodel,
            method: Method::Refit,
            degenerate: false,
        };
        assert!(iv.covers(0.5) && iv.covers(1.5) && !iv.covers(0.49));
        assert!(iv.rejects_zero());
        assert_eq!(iv.width(), 1.0);
        let degen = SelectiveInterval {
            degenerate: true,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            ..iv
        };
        assert!(!degen.rejects_zero());
        assert!(degen.covers(1000.0));
    }
}
