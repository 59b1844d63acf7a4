//! Adaptive-Lasso weights and their initial estimator.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::PenaltyWeights;
use crate::survival::{fit_cox_mle, fit_cox_ridge, FitOptions, SurvivalDataset};

/// Coefficients below this are treated as zero by the weight construction.
const EXCLUSION_CUTOFF: f64 = 1e-8;

/// Which penalty family the pipeline runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flavor", rename_all = "lowercase")]
pub enum LassoFlavor {
    Standard,
    Adaptive {
        #[serde(default = "default_gamma")]
        gamma: u32,
    },
}

fn default_gamma() -> u32 {
    1
}

impl LassoFlavor {
    pub fn adaptive_default() -> Self {
        LassoFlavor::Adaptive {
            gamma: default_gamma(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LassoFlavor::Standard => "standard",
            LassoFlavor::Adaptive { .. } => "adaptive",
        }
    }

    /// Penalty weights for a dataset: uniform for the standard Lasso,
    /// initializer-based for the adaptive one.
    pub fn weights(&self, data: &SurvivalDataset) -> Result<PenaltyWeights> {
        match self {
            LassoFlavor::Standard => Ok(PenaltyWeights::uniform(data.p())),
            LassoFlavor::Adaptive { gamma } => {
                let init = adaptive_initializer(data)?;
                adaptive_weights(&init, *gamma)
            }
        }
    }
}

/// w_j = 1 / |init_j|^gamma; coordinates with |init_j| < 1e-8 receive an
/// infinite weight and can never activate.
pub fn adaptive_weights(init_beta: &DVector<f64>, gamma: u32) -> Result<PenaltyWeights> {
    if gamma == 0 {
        return Err(Error::invalid("gamma must be a positive integer"));
    }
    if init_beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite initial estimate"));
    }
    let w: Vec<f64> = init_beta
        .iter()
        .map(|&b| {
            if b.abs() < EXCLUSION_CUTOFF {
                f64::INFINITY
            } else {
                1.0 / b.abs().powi(gamma as i32)
            }
        })
        .collect();
    let weights = PenaltyWeights { w, gamma };
    weights.validate()?;
    Ok(weights)
}

/// Initial estimator for the adaptive weights: the unpenalized MLE when the
/// problem is comfortably overdetermined (p < n/2 and the fit converges
/// cleanly), otherwise a lightly ridge-penalized fit (penalty 1e-3 on the
/// standardized scale).
pub fn adaptive_initializer(data: &SurvivalDataset) -> Result<DVector<f64>> {
    let all: Vec<usize> = (0..data.p()).collect();
    let options = FitOptions::default();
    if 2 * data.p() < data.n() {
        let fit = fit_cox_mle(data, &all, &options)?;
        if fit.converged && !fit.flags.separation && !fit.flags.rank_deficient {
            return Ok(fit.beta);
        }
    }
    let fit = fit_cox_ridge(data, &all, 1e-3, &options)?;
    if !fit.converged {
        return Err(Error::numerical(
            "adaptive initializer failed: ridge fit did not converge",
        ));
    }
    Ok(fit.beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_toy_dataset, BaselineSpec, CoefficientPattern, ToyScenario};
    use crate::lasso::{fit_cox_lasso, lambda_path};
    use crate::seed::derive_rng;
    use approx::assert_relative_eq;

    #[test]
    fn weight_formula() {
        let w = adaptive_weights(&DVector::from_vec(vec![1.0, 1.0, 1.0]), 1).unwrap();
        assert_eq!(w.w, vec![1.0, 1.0, 1.0]);
        let w = adaptive_weights(&DVector::from_vec(vec![2.0, 0.5]), 1).unwrap();
        assert_eq!(w.w, vec![0.5, 2.0]);
        let w = adaptive_weights(&DVector::from_vec(vec![2.0, 0.5]), 2).unwrap();
        assert_eq!(w.w, vec![0.25, 4.0]);
        let w = adaptive_weights(&DVector::from_vec(vec![1.0, 0.0]), 1).unwrap();
        assert_eq!(w.w[1], f64::INFINITY);
        assert!(adaptive_weights(&DVector::from_vec(vec![1.0]), 0).is_err());
    }

    #[test]
    fn zero_initial_coordinate_never_activates() {
        let scenario = ToyScenario {
            n: 80,
            p: 4,
            rho: 0.0,
            censor_target: 0.1,
            baseline: BaselineSpec::Exponential,
            pattern: CoefficientPattern::Sparse,
            dichotomize: vec![],
        };
        let rep = generate_toy_dataset(&scenario, &mut derive_rng(&["adaptive", "z"])).unwrap();
        let data = rep.data;
        let init = DVector::from_vec(vec![0.9, 0.8, 0.0, 0.2]);
        let w = adaptive_weights(&init, 1).unwrap();
        let path = lambda_path(&data, &w, 20, 0.02).unwrap();
        for fit in &path.fits {
            assert_eq!(fit.beta[2], 0.0);
        }
    }

    #[test]
    fn initializer_switches_regimes() {
        // overdetermined: MLE
        let scenario = ToyScenario {
            n: 150,
            p: 3,
            rho: 0.0,
            censor_target: 0.1,
            baseline: BaselineSpec::Exponential,
            pattern: CoefficientPattern::Custom(vec![0.7, -0.4, 0.0]),
            dichotomize: vec![],
        };
        let rep = generate_toy_dataset(&scenario, &mut derive_rng(&["adaptive", "r"])).unwrap();
        let data = rep.data;
        let init = adaptive_initializer(&data).unwrap();
        let mle = fit_cox_mle(&data, &[0, 1, 2], &FitOptions::default()).unwrap();
        assert_relative_eq!(init, mle.beta, epsilon = 1e-12);

        // underdetermined: ridge (shrunken relative to nothing blowing up)
        let scenario = ToyScenario {
            n: 30,
            p: 20,
            rho: 0.0,
            censor_target: 0.0,
            baseline: BaselineSpec::Exponential,
            pattern: CoefficientPattern::Sparse,
            dichotomize: vec![],
        };
        let rep = generate_toy_dataset(&scenario, &mut derive_rng(&["adaptive", "hd"])).unwrap();
        let init = adaptive_initializer(&rep.data).unwrap();
        assert!(init.iter().all(|v| v.is_finite()));
        assert!(init.amax() < 50.0);
    }

    #[test]
    fn adaptive_flavor_produces_usable_weights() {
        let scenario = ToyScenario {
            n: 120,
            p: 5,
            rho: 0.3,
            censor_target: 0.2,
            baseline: BaselineSpec::weibull_default(),
            pattern: CoefficientPattern::Sparse,
            dichotomize: vec![],
        };
        let rep = generate_toy_dataset(&scenario, &mut derive_rng(&["adaptive", "w"])).unwrap();
        let data = SurvivalDataset::standardized(
            rep.data.times().to_vec(),
            rep.data.status().to_vec(),
            rep.data.covariates().clone(),
        )
        .unwrap();
        let w = LassoFlavor::adaptive_default().weights(&data).unwrap();
        w.validate().unwrap();
        // strong true coordinates get the small weights
        assert!(w.w[0] < w.w[4]);
        let fit = fit_cox_lasso(&data, 1.0, &w, None).unwrap();
        assert!(fit.converged);

        let std = LassoFlavor::Standard.weights(&data).unwrap();
        assert_eq!(std.w, vec![1.0; 5]);
    }

    #[test]
    fn flavor_serde() {
        let f: LassoFlavor = serde_json::from_str(r#"{"flavor": "standard"}"#).unwrap();
        assert_eq!(f, LassoFlavor::Standard);
        let f: LassoFlavor = serde_json::from_str(r#"{"flavor": "adaptive"}"#).unwrap();
        assert_eq!(f, LassoFlavor::Adaptive { gamma: 1 });
        let f: LassoFlavor = serde_json::from_str(r#"{"flavor": "adaptive", "gamma": 2}"#).unwrap();
        assert_eq!(f, LassoFlavor::Adaptive { gamma: 2 });
    }
}
