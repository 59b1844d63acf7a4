//! L1-penalized Cox estimation: standard and adaptive Lasso, lambda paths,
//! cross-validation, information criteria, and tuning-rule selection.
//!
//! The objective throughout is l(beta) - lambda * sum_j w_j |beta_j| on the
//! sum scale of the log partial likelihood; covariates are assumed
//! standardized upstream.

mod adaptive;
mod fit;
mod tuning;

pub use adaptive::{adaptive_initializer, adaptive_weights, LassoFlavor};
pub use fit::{fit_cox_lasso, kkt_violation, lambda_max, lambda_path, default_path_eps};
pub use tuning::{
    calibrate_fixed_lambda, cross_validate, information_criteria, select_lambda, select_model,
    CriterionPoint, CvPoint, SelectionOutcome, TuningInput,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-coordinate penalty multipliers. An infinite entry excludes the
/// coordinate from every fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyWeights {
    pub w: Vec<f64>,
    /// Exponent used when the weights came from an adaptive initializer.
    pub gamma: u32,
}

impl PenaltyWeights {
    pub fn uniform(p: usize) -> Self {
        PenaltyWeights {
            w: vec![1.0; p],
            gamma: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w.iter().any(|&w| w.is_nan() || w < 0.0) {
            return Err(Error::invalid("penalty weights must be nonnegative"));
        }
        if !self.w.iter().any(|w| w.is_finite()) {
            return Err(Error::invalid("all penalty weights are infinite"));
        }
        Ok(())
    }

    /// Indices that can ever activate.
    pub fn finite_indices(&self) -> Vec<usize> {
        (0..self.w.len()).filter(|&j| self.w[j].is_finite()).collect()
    }
}

/// Solution of the penalized problem at one lambda.
#[derive(Debug, Clone)]
pub struct PenalizedFit {
    pub lambda: f64,
    /// Full-length coefficient vector (zeros at inactive coordinates).
    pub beta: DVector<f64>,
    /// Sorted indices of nonzero coefficients.
    pub active: Vec<usize>,
    /// Signs of the active coefficients, aligned with `active`.
    pub signs: Vec<f64>,
    /// Penalized objective l(beta) - lambda * sum w_j |beta_j|.
    pub objective: f64,
    /// Unpenalized log partial likelihood at `beta`.
    pub loglik: f64,
    /// False when the outer loop stalled or exhausted its budget.
    pub converged: bool,
    pub outer_iterations: usize,
}

impl PenalizedFit {
    pub fn model_size(&self) -> usize {
        self.active.len()
    }
}

/// Decreasing lambda sequence with one fit per value.
#[derive(Debug, Clone)]
pub struct LambdaPath {
    pub lambdas: Vec<f64>,
    pub fits: Vec<PenalizedFit>,
}

impl LambdaPath {
    pub fn fit_at(&self, lambda: f64) -> Option<&PenalizedFit> {
        self.lambdas
            .iter()
            .position(|&l| l == lambda)
            .map(|i| &self.fits[i])
    }
}

/// How lambda is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningRule {
    CvMin,
    Cv1se,
    Fixed(f64),
    Aic,
    Bic,
}

impl TuningRule {
    pub fn label(&self) -> &'static str {
        match self {
            TuningRule::CvMin => "cv_min",
            TuningRule::Cv1se => "cv_1se",
            TuningRule::Fixed(_) => "fixed",
            TuningRule::Aic => "aic",
            TuningRule::Bic => "bic",
        }
    }

    pub fn needs_cv(&self) -> bool {
        matches!(self, TuningRule::CvMin | TuningRule::Cv1se)
    }

    pub fn needs_criteria(&self) -> bool {
        matches!(self, TuningRule::Aic | TuningRule::Bic)
    }
}

impl std::str::FromStr for TuningRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cv_min" => Ok(TuningRule::CvMin),
            "cv_1se" => Ok(TuningRule::Cv1se),
            "aic" => Ok(TuningRule::Aic),
            "bic" => Ok(TuningRule::Bic),
            other => {
                if let Some(v) = other.strip_prefix("fixed=") {
                    let lambda: f64 = v
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad fixed lambda '{v}'")))?;
                    if !(lambda >= 0.0) {
                        return Err(Error::invalid("fixed lambda must be nonnegative"));
                    }
                    Ok(TuningRule::Fixed(lambda))
                } else {
                    Err(Error::invalid(format!(
                        "unknown tuning rule '{other}' (expected cv_min, cv_1se, aic, bic, fixed=<value>)"
                    )))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_validation() {
        assert!(PenaltyWeights::uniform(3).validate().is_ok());
        let w = PenaltyWeights {
            w: vec![1.0, f64::INFINITY],
            gamma: 1,
        };
        assert!(w.validate().is_ok());
        assert_eq!(w.finite_indices(), vec![0]);
        let all_inf = PenaltyWeights {
            w: vec![f64::INFINITY; 2],
            gamma: 1,
        };
        assert!(all_inf.validate().is_err());
        let neg = PenaltyWeights {
            w: vec![-0.1],
            gamma: 1,
        };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn tuning_rule_parsing() {
        assert_eq!("cv_min".parse::<TuningRule>().unwrap(), TuningRule::CvMin);
        assert_eq!("cv_1se".parse::<TuningRule>().unwrap(), TuningRule::Cv1se);
        assert_eq!("aic".parse::<TuningRule>().unwrap(), TuningRule::Aic);
        assert_eq!("bic".parse::<TuningRule>().unwrap(), TuningRule::Bic);
        assert_eq!(
            "fixed=0.25".parse::<TuningRule>().unwrap(),
            TuningRule::Fixed(0.25)
        );
        assert!("fixed=-1".parse::<TuningRule>().is_err());
        assert!("cvmin".parse::<TuningRule>().is_err());
        assert_eq!(TuningRule::Fixed(0.1).label(), "fixed");
    }

    #[test]
    fn tuning_rule_serde() {
        assert_eq!(
            serde_json::to_string(&TuningRule::CvMin).unwrap(),
            "\"cv_min\""
        );
        let r: TuningRule = serde_json::from_str("{\"fixed\": 0.5}").unwrap();
        assert_eq!(r, TuningRule::Fixed(0.5));
    }
}
