//! Breslow estimator of the cumulative baseline hazard and derived survival
//! probabilities.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::survival::{CoxFit, SurvivalDataset};

/// Step function H0(t): cumulative baseline hazard with jumps at event
/// times.
#[derive(Debug, Clone)]
pub struct BreslowBaseline {
    /// Event times, strictly increasing.
    pub event_times: Vec<f64>,
    /// H0 evaluated at each event time (right-continuous step heights).
    pub cumulative_hazard: Vec<f64>,
}

impl BreslowBaseline {
    /// H0(t) via binary search over the jump times; 0 before the first
    /// event.
    pub fn cumulative_hazard_at(&self, t: f64) -> f64 {
        match self
            .event_times
            .partition_point(|&s| s <= t)
        {
            0 => 0.0,
            k => self.cumulative_hazard[k - 1],
        }
    }
}

/// Breslow baseline for a fitted model: each event time contributes
/// 1 / sum_{j in risk set} exp(eta_j).
pub fn breslow_baseline(data: &SurvivalDataset, fit: &CoxFit) -> Result<BreslowBaseline> {
    let eta: Vec<f64> = (0..data.n())
        .map(|i| {
            fit.subset
                .iter()
                .zip(fit.beta.iter())
                .map(|(&j, &b)| data.covariate(i, j) * b)
                .sum()
        })
        .collect();
    breslow_from_linear_predictor(data, &eta)
}

/// Breslow baseline from precomputed linear predictors, for models whose
/// coefficients did not come from a [`CoxFit`].
pub fn breslow_from_linear_predictor(
    data: &SurvivalDataset,
    eta: &[f64],
) -> Result<BreslowBaseline> {
    if eta.len() != data.n() {
        return Err(Error::invalid("one linear predictor per record required"));
    }
    if eta.iter().any(|e| !e.is_finite()) {
        return Err(Error::invalid("linear predictors must be finite"));
    }

    // Descending sweep caches log S0 at each record; ascending replay turns
    // event records into hazard increments.
    let mut log_s0 = vec![0.0; data.n()];
    let mut m = f64::NEG_INFINITY;
    let mut s0 = 0.0;
    for &i in data.order_desc() {
        let e = eta[i];
        if e > m {
            s0 *= (m - e).exp();
            m = e;
        }
        s0 += (e - m).exp();
        log_s0[i] = m + s0.ln();
    }

    let mut event_times = Vec::new();
    let mut cumulative_hazard = Vec::new();
    let mut h = 0.0;
    for &i in data.order_desc().iter().rev() {
        if data.event(i) {
            h += (-log_s0[i]).exp();
            event_times.push(data.time(i));
            cumulative_hazard.push(h);
        }
    }
    Ok(BreslowBaseline {
        event_times,
        cumulative_hazard,
    })
}

/// Model-based survival probability S(t | x) = exp(-H0(t) exp(x' beta)),
/// where `x` is a full covariate row on the same scale as the dataset the
/// model was fitted to.
pub fn survival_probability(
    baseline: &BreslowBaseline,
    fit: &CoxFit,
    x: &DVector<f64>,
    t: f64,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid("survival time must be nonnegative"));
    }
    let eta: f64 = fit
        .subset
        .iter()
        .zip(fit.beta.iter())
        .map(|(&j, &b)| {
            x.get(j)
                .copied()
                .ok_or_else(|| Error::invalid(format!("covariate row too short for index {j}")))
                .map(|v| v * b)
        })
        .sum::<Result<f64>>()?;
    Ok((-baseline.cumulative_hazard_at(t) * eta.exp()).exp())
}
