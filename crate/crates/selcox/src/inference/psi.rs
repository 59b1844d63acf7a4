//! Exact post-selection inference: conditional on the Lasso's active set
//! and sign pattern, the one-step estimator is (asymptotically) a Gaussian
//! truncated to a polyhedron, so inverting its truncated-normal pivot
//! yields intervals with exact selective coverage.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::inference::{check_alpha, Method, SelectiveInterval, TargetKind};
use crate::lasso::{PenalizedFit, PenaltyWeights};
use crate::linalg::spd_inverse;
use crate::stats::{norm_log_sf, norm_sf};
use crate::survival::{information, one_step_update, SurvivalDataset};

/// Truncation narrower than this (relative to sigma) is treated as
/// degenerate.
const DEGENERATE_WIDTH: f64 = 1e-10;
/// Bisection stops when the bracket is this small relative to sigma.
const BISECT_TOL: f64 = 1e-9;
/// Doublings of sigma allowed while bracketing a pivot level.
const MAX_EXPAND: u32 = 64;

/// Survivor function of the standard normal in log space; handles
/// +/- infinity.
fn log_q(t: f64) -> f64 {
    if t == f64::NEG_INFINITY {
        0.0
    } else if t == f64::INFINITY {
        f64::NEG_INFINITY
    } else {
        norm_log_sf(t)
    }
}

/// CDF of N(mu, sigma^2) truncated to [lower, upper], evaluated at x.
///
/// Tail-stable in all three regimes: when the whole window sits in the
/// right tail the ratio is formed from log survivor functions, the left
/// tail is handled by reflection, and the central regime uses plain CDF
/// differences. Never returns NaN for valid inputs; x is clamped into the
/// window.
pub fn truncated_normal_cdf(x: f64, mu: f64, sigma: f64, lower: f64, upper: f64) -> Result<f64> {
    if !(sigma > 0.0) || sigma.is_nan() {
        return Err(Error::invalid("truncated normal needs sigma > 0"));
    }
    if !(lower < upper) {
        return Err(Error::invalid("truncation window must satisfy lower < upper"));
    }
    if x.is_nan() || mu.is_nan() {
        return Err(Error::invalid("truncated normal got NaN input"));
    }
    let a = if lower == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        (lower - mu) / sigma
    };
    let b = if upper == f64::INFINITY {
        f64::INFINITY
    } else {
        (upper - mu) / sigma
    };
    let xi = ((x - mu) / sigma).clamp(a, b);
    Ok(standard_truncated_cdf(xi, a, b))
}

fn standard_truncated_cdf(xi: f64, a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        // right tail: F = (Q(a) - Q(xi)) / (Q(a) - Q(b)) via log survivors,
        // exact even when every Q underflows
        let la = log_q(a);
        let num = -f64::exp_m1(log_q(xi) - la);
        let den = -f64::exp_m1(log_q(b) - la);
        if den <= 0.0 {
            // the window carries no resolvable mass; split it evenly
            return 0.5;
        }
        (num / den).clamp(0.0, 1.0)
    } else if b <= 0.0 {
        // left tail by reflection
        1.0 - standard_truncated_cdf(-xi, -b, -a)
    } else {
        // straddles zero: survivor differences keep full precision on
        // each side of the split at the origin
        let den = 1.0 - norm_sf(-a) - norm_sf(b);
        if den <= 0.0 {
            return 0.5;
        }
        let num = if xi <= 0.0 {
            norm_sf(-xi) - norm_sf(-a)
        } else {
            1.0 - norm_sf(-a) - norm_sf(xi)
        };
        (num / den).clamp(0.0, 1.0)
    }
}

/// The polyhedral lemma: for y in {Ay <= b} decomposed along eta, the
/// component eta'y ranges over [V-, V+] where the bounds collect the
/// constraint rows according to the sign of (Ac)_k,
/// c = Sigma eta / (eta' Sigma eta). Rows with (Ac)_k = 0 do not involve
/// eta'y and are skipped.
pub fn truncation_interval(
    sigma: &DMatrix<f64>,
    a_mat: &DMatrix<f64>,
    b_vec: &DVector<f64>,
    y: &DVector<f64>,
    eta: &DVector<f64>,
) -> Result<(f64, f64)> {
    let m = eta.len();
    if sigma.nrows() != m || sigma.ncols() != m || a_mat.ncols() != m || y.len() != m {
        return Err(Error::invalid("polyhedron dimensions disagree"));
    }
    if a_mat.nrows() != b_vec.len() {
        return Err(Error::invalid("constraint rows and offsets disagree"));
    }
    let var = (eta.transpose() * sigma * eta)[(0, 0)];
    if !(var > 0.0) {
        return Err(Error::numerical("eta direction has no variance"));
    }
    let c = sigma * eta / var;
    let proj = eta.dot(y);
    let z = y - &c * proj;
    let ac = a_mat * &c;
    let az = a_mat * &z;
    let mut v_minus = f64::NEG_INFINITY;
    let mut v_plus = f64::INFINITY;
    for k in 0..a_mat.nrows() {
        let slack = b_vec[k] - az[k];
        if ac[k] > 0.0 {
            v_plus = v_plus.min(slack / ac[k]);
        } else if ac[k] < 0.0 {
            v_minus = v_minus.max(slack / ac[k]);
        }
    }
    Ok((v_minus, v_plus))
}

/// A one-dimensional truncated-Gaussian observation: everything needed to
/// evaluate and invert the selective pivot.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedPivot {
    /// Observed value of eta'y.
    pub x: f64,
    pub sigma: f64,
    /// Truncation limits V- and V+.
    pub lower: f64,
    pub upper: f64,
}

impl TruncatedPivot {
    pub fn cdf(&self, mu: f64) -> Result<f64> {
        truncated_normal_cdf(self.x, mu, self.sigma, self.lower, self.upper)
    }

    /// Solve cdf(mu) = target for mu. The pivot is decreasing in mu; None
    /// means the level is unattainable (the bound diverges).
    pub fn invert(&self, target: f64) -> Option<f64> {
        debug_assert!(0.0 < target && target < 1.0);
        let f = |mu: f64| self.cdf(mu).expect("validated parameters");
        // expand a bracket [lo, hi] with f(lo) >= target >= f(hi)
        let mut lo = self.x;
        let mut hi = self.x;
        let mut step = self.sigma;
        let mut have_lo = f(lo) >= target;
        let mut have_hi = f(hi) <= target;
        for _ in 0..MAX_EXPAND {
            if have_lo && have_hi {
                break;
            }
            if !have_lo {
                lo -= step;
                have_lo = f(lo) >= target;
            }
            if !have_hi {
                hi += step;
                have_hi = f(hi) <= target;
            }
            step *= 2.0;
        }
        if !(have_lo && have_hi) {
            return None;
        }
        let mut width = hi - lo;
        while width > BISECT_TOL * self.sigma {
            let mid = 0.5 * (lo + hi);
            if f(mid) >= target {
                lo = mid;
            } else {
                hi = mid;
            }
            let new_width = hi - lo;
            if !(new_width < width) {
                break;
            }
            width = new_width;
        }
        Some(0.5 * (lo + hi))
    }

    /// Equal-tailed selective interval and the median-unbiased estimate;
    /// an unattainable endpoint comes back infinite with the degenerate
    /// flag set.
    pub fn interval(&self, alpha: f64) -> (f64, f64, f64, bool) {
        if self.upper - self.lower < DEGENERATE_WIDTH * self.sigma
            || self.x < self.lower
            || self.x > self.upper
        {
            return (f64::NEG_INFINITY, f64::INFINITY, self.x, true);
        }
        let lo = self.invert(1.0 - alpha / 2.0);
        let hi = self.invert(alpha / 2.0);
        let med = self.invert(0.5);
        match (lo, hi) {
            (Some(l), Some(h)) => {
                let m = med.unwrap_or(0.5 * (l + h)).clamp(l, h);
                (l, h, m, false)
            }
            (l, h) => (
                l.unwrap_or(f64::NEG_INFINITY),
                h.unwrap_or(f64::INFINITY),
                med.unwrap_or(self.x),
                true,
            ),
        }
    }
}

/// Exact post-selection intervals for the submodel coefficients of the
/// active set of `fit`, conditioning on that active set and its signs.
///
/// The conditioning polyhedron restates the Lasso KKT system in terms of
/// the one-step estimator: with s the active signs, W the active penalty
/// weights and Sigma_E the inverse information at the one-step point,
/// sign consistency is diag(s) (beta_bar - lambda Sigma_E W s) >= 0.
pub fn infer_exact_psi(
    data: &SurvivalDataset,
    fit: &PenalizedFit,
    weights: &PenaltyWeights,
    alpha: f64,
) -> Result<Vec<SelectiveInterval>> {
    check_alpha(alpha)?;
    if fit.beta.len() != data.p() || weights.w.len() != data.p() {
        return Err(Error::invalid("fit, weights, and data dimensions disagree"));
    }
    let active = fit.active.clone();
    if active.is_empty() {
        return Ok(Vec::new());
    }
    let m = active.len();
    let beta_e = DVector::from_iterator(m, active.iter().map(|&j| fit.beta[j]));
    let degenerate_all = |estimates: &DVector<f64>| {
        active
            .iter()
            .zip(estimates.iter())
            .map(|(&j, &est)| SelectiveInterval {
                coef_index: j,
                estimate: est,
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
                alpha,
                target_kind: TargetKind::Submodel,
                method: Method::ExactPsi,
                degenerate: true,
            })
            .collect::<Vec<_>>()
    };

    let beta_bar = match one_step_update(data, &beta_e, &active) {
        Ok(b) => b,
        Err(Error::SingularInformation { .. }) => return Ok(degenerate_all(&beta_e)),
        Err(e) => return Err(e),
    };
    let info = information(data, &beta_bar, &active)?;
    let Some(sigma_e) = spd_inverse(&info) else {
        return Ok(degenerate_all(&beta_bar));
    };

    let s = DVector::from_vec(fit.signs.clone());
    let ws = DVector::from_iterator(m, active.iter().zip(s.iter()).map(|(&j, &sk)| weights.w[j] * sk));
    let shift = &sigma_e * &ws; // Sigma_E W s
    // A y <= b with A = -diag(s), b = -lambda diag(s) Sigma_E W s
    let a_mat = DMatrix::from_fn(m, m, |r, c| if r == c { -s[r] } else { 0.0 });
    let b_vec = DVector::from_fn(m, |k, _| -fit.lambda * s[k] * shift[k]);

    let mut intervals = Vec::with_capacity(m);
    for (idx, &j) in active.iter().enumerate() {
        let var = sigma_e[(idx, idx)];
        if !(var > 0.0) {
            intervals.push(SelectiveInterval {
                coef_index: j,
                estimate: beta_bar[idx],
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
                alpha,
                target_kind: TargetKind::Submodel,
                method: Method::ExactPsi,
                degenerate: true,
            });
            continue;
        }
        let eta = DVector::from_fn(m, |r, _| if r == idx { 1.0 } else { 0.0 });
        let (v_minus, v_plus) = truncation_interval(&sigma_e, &a_mat, &b_vec, &beta_bar, &eta)?;
        let pivot = TruncatedPivot {
            x: beta_bar[idx],
            sigma: var.sqrt(),
            lower: v_minus,
            upper: v_plus,
        };
        let (lower, upper, estimate, degenerate) = pivot.interval(alpha);
        intervals.push(SelectiveInterval {
            coef_index: j,
            estimate,
            lower,
            upper,
            alpha,
            target_kind: TargetKind::Submodel,
            method: Method::ExactPsi,
            degenerate,
        });
    }
    Ok(intervals)
}
