//! Predictive accuracy on held-out data: Kaplan-Meier censoring weights,
//! the IPCW Brier score and its integral, and Harrell's concordance index.

use crate::error::{Error, Result};
use crate::stats::quantile_type7;
use crate::survival::SurvivalDataset;

/// Kaplan-Meier survivor function of the censoring distribution (status
/// flipped), a right-continuous step function with left limits.
#[derive(Debug, Clone)]
pub struct CensoringSurvivor {
    /// Distinct censoring times, increasing.
    times: Vec<f64>,
    /// Value just after the corresponding drop.
    values: Vec<f64>,
}

impl CensoringSurvivor {
    /// G(t), right-continuous.
    pub fn at(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&u| u <= t);
        if idx == 0 {
            1.0
        } else {
            self.values[idx - 1]
        }
    }

    /// Left limit G(t-).
    pub fn at_left(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&u| u < t);
        if idx == 0 {
            1.0
        } else {
            self.values[idx - 1]
        }
    }
}

/// Estimate the censoring survivor by Kaplan-Meier with the event
/// indicator flipped: censorings are the "events", true events are
/// censored observations.
pub fn km_censoring_survivor(data: &SurvivalDataset) -> CensoringSurvivor {
    let n = data.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| data.times()[a].partial_cmp(&data.times()[b]).unwrap());

    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut surv = 1.0;
    let mut pos = 0;
    while pos < n {
        let t = data.times()[order[pos]];
        let mut here = pos;
        let mut censorings = 0usize;
        while here < n && data.times()[order[here]] == t {
            if !data.status()[order[here]] {
                censorings += 1;
            }
            here += 1;
        }
        if censorings > 0 {
            let at_risk = n - pos;
            surv *= 1.0 - censorings as f64 / at_risk as f64;
            times.push(t);
            values.push(surv);
        }
        pos = here;
    }
    CensoringSurvivor { times, values }
}

/// IPCW Brier score at a single horizon t:
/// n^-1 sum_i [ S(t|x_i)^2 1{Y_i <= t, event} / G(Y_i-)
///            + (1 - S(t|x_i))^2 1{Y_i > t} / G(t) ].
pub fn brier_score_at(
    data: &SurvivalDataset,
    predict: &dyn Fn(usize, f64) -> f64,
    g: &CensoringSurvivor,
    t: f64,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid("Brier horizon must be nonnegative"));
    }
    let g_t = g.at(t);
    let mut acc = 0.0;
    for i in 0..data.n() {
        let y = data.times()[i];
        let s = predict(i, t);
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::numerical("survival prediction outside [0, 1]"));
        }
        if y <= t && data.status()[i] {
            let w = g.at_left(y);
            if w <= 0.0 {
                return Err(Error::numerical("censoring weight collapsed to zero"));
            }
            acc += s * s / w;
        } else if y > t {
            if g_t <= 0.0 {
                return Err(Error::numerical("censoring weight collapsed to zero"));
            }
            acc += (1.0 - s) * (1.0 - s) / g_t;
        }
    }
    Ok(acc / data.n() as f64)
}

/// Integrated Brier score and the horizon it actually used.
#[derive(Debug, Clone, Copy)]
pub struct IbsResult {
    pub value: f64,
    /// Upper integration limit after any weight-driven truncation.
    pub tau: f64,
    /// Set when the 90th-percentile horizon had to be shortened because
    /// the censoring survivor dropped to 0.05.
    pub truncated: bool,
}

/// Trapezoidal integral of the IPCW Brier score over an equispaced grid on
/// [0, tau], divided by tau; tau is the 90th percentile of observed times,
/// shortened if the censoring survivor falls to 0.05 before that.
pub fn integrated_brier(
    data: &SurvivalDataset,
    predict: &dyn Fn(usize, f64) -> f64,
    g: &CensoringSurvivor,
    n_grid: usize,
) -> Result<IbsResult> {
    if n_grid < 2 {
        return Err(Error::invalid("need at least two grid points"));
    }
    let mut sorted = data.times().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tau_raw = quantile_type7(&sorted, 0.9)?;

    // last observed time at which the weights are still usable
    let tau_weights = sorted
        .iter()
        .rev()
        .find(|&&t| g.at(t) > 0.05)
        .copied()
        .ok_or_else(|| Error::numerical("censoring survivor below 0.05 everywhere"))?;
    let truncated = tau_weights < tau_raw;
    let tau = tau_raw.min(tau_weights);
    if !(tau > 0.0) {
        return Err(Error::numerical("degenerate integration horizon"));
    }

    let h = tau / (n_grid - 1) as f64;
    let mut integral = 0.0;
    let mut prev = brier_score_at(data, predict, g, 0.0)?;
    for k in 1..n_grid {
        let cur = brier_score_at(data, predict, g, h * k as f64)?;
        integral += 0.5 * (prev + cur) * h;
        prev = cur;
    }
    Ok(IbsResult {
        value: integral / tau,
        tau,
        truncated,
    })
}

/// Harrell's concordance: over pairs where i is the observed earlier event
/// (event_i and Y_i < Y_j), count risk_i > risk_j as concordant and risk
/// ties as one half.
pub fn harrell_cindex(data: &SurvivalDataset, risk: &[f64]) -> Result<f64> {
    if risk.len() != data.n() {
        return Err(Error::invalid("one risk score per record required"));
    }
    if risk.iter().any(|r| !r.is_finite()) {
        return Err(Error::invalid("risk scores must be finite"));
    }
    let mut comparable = 0u64;
    let mut score = 0.0f64;
    for i in 0..data.n() {
        if !data.status()[i] {
            continue;
        }
        for j in 0..data.n() {
            if data.times()[i] < data.times()[j] {
                comparable += 1;
                if risk[i] > risk[j] {
                    score += 1.0;
                } else if risk[i] == risk[j] {
                    score += 0.5;
                }
            }
        }
    }
    if comparable == 0 {
        return Err(Error::invalid("no comparable pairs for the concordance index"));
    }
    Ok(score / comparable as f64)
}
