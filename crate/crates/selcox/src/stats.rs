//! Scalar probability and summary helpers shared across the crate.
//!
//! Normal tail quantities go through `libm::erfc`, which keeps full relative
//! accuracy far into the tails; beyond the representable range of `erfc`
//! the log survivor switches to a Mills-ratio asymptotic series.

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal survivor function Q(x) = 1 - Phi(x).
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

const LOG_SF_SWITCH: f64 = 30.0;

/// log Q(x), finite for arbitrarily large x.
///
/// Below the switch point `erfc` itself has full relative accuracy; beyond
/// it the Mills expansion log Q(x) ~ -x^2/2 - log(x sqrt(2 pi)) +
/// log(1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8) is used (truncation error
/// below 1e-12 at the switch point).
pub fn norm_log_sf(x: f64) -> f64 {
    if x < LOG_SF_SWITCH {
        norm_sf(x).ln()
    } else {
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)
            + 105.0 / (x2 * x2 * x2 * x2);
        -x2 / 2.0 - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + series.ln()
    }
}

/// log Phi(x) = log Q(-x).
pub fn norm_log_cdf(x: f64) -> f64 {
    norm_log_sf(-x)
}

/// Standard normal quantile (inverse CDF).
pub fn norm_quantile(p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::invalid("quantile probability must be in (0, 1)"));
    }
    use statrs::distribution::ContinuousCDF;
    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
    Ok(normal.inverse_cdf(p))
}

/// Two-sided critical value z_{1 - alpha/2}.
pub fn z_crit(alpha: f64) -> f64 {
    norm_quantile(1.0 - alpha / 2.0).expect("alpha checked by callers")
}

/// Type-7 sample quantile (linear interpolation at h = (n - 1) q), the
/// default convention in most statistical software.
pub fn quantile_type7(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid("quantile level must be in [0, 1]"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation with the n - 1 divisor; 0 for samples of one.
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
}

pub fn median(values: &[f64]) -> Result<f64> {
    quantile_type7(values, 0.5)
}
