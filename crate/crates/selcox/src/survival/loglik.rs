//! Partial likelihood, score, and information via a single descending-time
//! sweep with running-max rescaling of the risk-set accumulators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::survival::SurvivalDataset;

/// Streaming log-sum-exp accumulator: tracks log(sum_i exp(t_i)) without
/// materializing the terms.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub(crate) fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub(crate) fn add(&mut self, term: f64) {
        if term > self.max {
            // exp(-inf) = 0 handles the first insertion
            self.sum = self.sum * (self.max - term).exp() + 1.0;
            self.max = term;
        } else {
            self.sum += (term - self.max).exp();
        }
    }

    /// log of the accumulated sum; -inf when empty.
    pub(crate) fn log_value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

fn check_inputs(data: &SurvivalDataset, beta: &DVector<f64>, subset: &[usize]) -> Result<()> {
    if beta.len() != subset.len() {
        return Err(Error::invalid(format!(
            "beta has {} entries for a subset of {}",
            beta.len(),
            subset.len()
        )));
    }
    if let Some(&j) = subset.iter().find(|&&j| j >= data.p()) {
        return Err(Error::invalid(format!(
            "subset index {j} out of range for p = {}",
            data.p()
        )));
    }
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite coefficient"));
    }
    Ok(())
}

fn linear_predictors(data: &SurvivalDataset, beta: &DVector<f64>, subset: &[usize]) -> Vec<f64> {
    (0..data.n())
        .map(|i| {
            subset
                .iter()
                .zip(beta.iter())
                .map(|(&j, &b)| data.covariate(i, j) * b)
                .sum()
        })
        .collect()
}

/// Partial likelihood and its first two derivatives on `subset`, in one
/// sweep over records sorted by time descending.
///
/// Risk-set sums S0 = sum exp(eta), S1 = sum exp(eta) x, S2 = sum exp(eta)
/// x x' are kept rescaled by exp(-m) for the running max m of eta among
/// records entered so far, so every stored term is at most 1 in magnitude
/// times the set size.
pub(crate) fn eval_partial_likelihood(
    data: &SurvivalDataset,
    beta: &DVector<f64>,
    subset: &[usize],
    want_score: bool,
    want_info: bool,
) -> Result<(f64, Option<DVector<f64>>, Option<DMatrix<f64>>)> {
    check_inputs(data, beta, subset)?;
    let k = subset.len();
    let eta = linear_predictors(data, beta, subset);

    let mut m = f64::NEG_INFINITY;
    let mut s0 = 0.0;
    let mut s1 = DVector::zeros(k);
    let mut s2 = DMatrix::zeros(k, k);

    let mut ll = 0.0;
    let mut u = if want_score {
        Some(DVector::zeros(k))
    } else {
        None
    };
    let mut info = if want_info {
        Some(DMatrix::zeros(k, k))
    } else {
        None
    };

    let mut xi = DVector::zeros(k);
    for &i in data.order_desc() {
        let e = eta[i];
        if e > m {
            let f = (m - e).exp();
            s0 *= f;
            if want_score || want_info {
                s1 *= f;
            }
            if want_info {
                s2 *= f;
            }
            m = e;
        }
        let w = (e - m).exp();
        s0 += w;
        for (r, &j) in subset.iter().enumerate() {
            xi[r] = data.covariate(i, j);
        }
        if want_score || want_info {
            s1.axpy(w, &xi, 1.0);
        }
        if want_info {
            s2.syger(w, &xi, &xi, 1.0);
        }
        if data.event(i) {
            ll += e - (m + s0.ln());
            let mean = if want_score || want_info {
                Some(&s1 / s0)
            } else {
                None
            };
            if let Some(u) = u.as_mut() {
                *u += &xi - mean.as_ref().unwrap();
            }
            if let Some(info) = info.as_mut() {
                let mean = mean.as_ref().unwrap();
                *info += &s2 / s0;
                info.syger(-1.0, mean, mean, 1.0);
            }
        }
    }
    // syger fills the lower triangle; mirror it.
    if let Some(info) = info.as_mut() {
        for r in 0..k {
            for c in (r + 1)..k {
                info[(r, c)] = info[(c, r)];
            }
        }
    }
    Ok((ll, u, info))
}

/// Log partial likelihood at `beta` on the covariate subset.
pub fn log_partial_likelihood(
    data: &SurvivalDataset,
    beta: &DVector<f64>,
    subset: &[usize],
) -> Result<f64> {
    eval_partial_likelihood(data, beta, subset, false, false).map(|(ll, _, _)| ll)
}

/// Score vector (gradient of the log partial likelihood) at `beta`.
pub fn score(
    data: &SurvivalDataset,
    beta: &DVector<f64>,
    subset: &[usize],
) -> Result<DVector<f64>> {
    eval_partial_likelihood(data, beta, subset, true, false).map(|(_, u, _)| u.unwrap())
}

/// Observed information (negative Hessian) at `beta`. Always symmetric
/// positive semidefinite.
pub fn information(
    data: &SurvivalDataset,
    beta: &DVector<f64>,
    subset: &[usize],
) -> Result<DMatrix<f64>> {
    eval_partial_likelihood(data, beta, subset, false, true).map(|(_, _, i)| i.unwrap())
}

/// Per-record working derivatives of the partial likelihood in the linear
/// predictor: gradient g_k = d l / d eta_k and curvature w_k = -d2 l /
/// d eta_k^2 (diagonal of the Hessian in eta).
///
/// With H_k = sum over event times t_i <= Y_k of 1/S0(t_i):
/// g_k = delta_k - exp(eta_k) H_k and w_k = exp(eta_k) H_k - exp(2 eta_k) Q_k
/// where Q_k uses 1/S0(t_i)^2. Both products are bounded by the number of
/// events, so they are accumulated in log space.
pub fn working_derivatives(
    data: &SurvivalDataset,
    eta: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = data.n();
    if eta.len() != n {
        return Err(Error::invalid("eta length mismatch"));
    }
    if eta.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite linear predictor"));
    }

    // First pass, time descending: log S0 at each record's time.
    let mut log_s0 = vec![0.0; n];
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

    // Second pass, time ascending: cumulative hazards in log space. Each
    // record's own event contributes to its own H_k.
    let mut g = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut log_h = LogSumExp::new();
    let mut log_q = LogSumExp::new();
    for &i in data.order_desc().iter().rev() {
        if data.event(i) {
            log_h.add(-log_s0[i]);
            log_q.add(-2.0 * log_s0[i]);
        }
        let eh = if log_h.log_value() == f64::NEG_INFINITY {
            0.0
        } else {
            (eta[i] + log_h.log_value()).exp()
        };
        let eq = if log_q.log_value() == f64::NEG_INFINITY {
            0.0
        } else {
            (2.0 * eta[i] + log_q.log_value()).exp()
        };
        g[i] = if data.event(i) { 1.0 } else { 0.0 } - eh;
        w[i] = (eh - eq).max(0.0);
    }
    Ok((g, w))
}
