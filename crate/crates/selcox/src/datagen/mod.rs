//! Synthetic survival data: coefficient patterns, correlated covariates,
//! parametric event times, administrative censoring, tie jitter, Weibull
//! calibration against real data, and large-population submodel truths.

mod calibrate;
mod toy;
mod truth;

pub use calibrate::{calibrate_from_dataset, clean_for_calibration, CalibratedScenario};
pub use toy::{
    apply_admin_censoring, dichotomize, jitter_ties, make_beta, sample_covariates,
    sample_event_times, JitterRole,
};
pub use truth::{submodel_truth, SubmodelTruthCache, DEFAULT_N_POP};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::SurvivalDataset;

/// Data-generating coefficient vector shape; expanded to length p by
/// padding with zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientPattern {
    AllOnes,
    HighContrast,
    Realistic,
    Sparse,
    Custom(Vec<f64>),
}

impl CoefficientPattern {
    /// Short name used in scenario labels and output files.
    pub fn label(&self) -> String {
        match self {
            CoefficientPattern::AllOnes => "allones".into(),
            CoefficientPattern::HighContrast => "highcontrast".into(),
            CoefficientPattern::Realistic => "realistic".into(),
            CoefficientPattern::Sparse => "sparse".into(),
            CoefficientPattern::Custom(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                let refs: Vec<&str> = parts.iter().map(|s| s.as_str()).collect();
                let digest = crate::seed::derive_seed(&refs);
                format!(
                    "custom{:02x}{:02x}{:02x}{:02x}",
                    digest[0], digest[1], digest[2], digest[3]
                )
            }
        }
    }
}

/// Baseline hazard family with cumulative hazard H0(t) = s t^k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineSpec {
    /// H0(t) = t (unit-rate exponential).
    Exponential,
    Weibull {
        #[serde(default = "default_weibull_shape")]
        shape: f64,
        #[serde(default = "default_weibull_scale")]
        scale: f64,
    },
}

fn default_weibull_shape() -> f64 {
    2.0
}

fn default_weibull_scale() -> f64 {
    1.0
}

impl BaselineSpec {
    pub fn weibull_default() -> Self {
        BaselineSpec::Weibull {
            shape: default_weibull_shape(),
            scale: default_weibull_scale(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let BaselineSpec::Weibull { shape, scale } = self {
            if !(*shape > 0.0) || !(*scale > 0.0) {
                return Err(Error::invalid("weibull shape and scale must be positive"));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            BaselineSpec::Exponential => "exponential".into(),
            BaselineSpec::Weibull { shape, scale } => format!("weibull(k={shape},s={scale})"),
        }
    }
}

/// One cell of the simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyScenario {
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    /// Target censoring proportion pi_C in [0, 1).
    pub censor_target: f64,
    pub baseline: BaselineSpec,
    pub pattern: CoefficientPattern,
    /// Columns mapped to 1{x > 0} after sampling.
    #[serde(default)]
    pub dichotomize: Vec<usize>,
}

impl ToyScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("scenario needs n >= 2"));
        }
        if self.p == 0 {
            return Err(Error::invalid("scenario needs p >= 1"));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::invalid("rho must be in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.censor_target) {
            return Err(Error::invalid("censor_target must be in [0, 1)"));
        }
        self.baseline.validate()?;
        if let Some(&j) = self.dichotomize.iter().find(|&&j| j >= self.p) {
            return Err(Error::invalid(format!(
                "dichotomize index {j} out of range for p = {}",
                self.p
            )));
        }
        make_beta(&self.pattern, self.p)?;
        Ok(())
    }

    /// Stable identifier used in output files, seed derivation, and caches.
    pub fn label(&self) -> String {
        format!(
            "n{}_p{}_rho{}_cens{}_{}_{}",
            self.n,
            self.p,
            self.rho,
            self.censor_target,
            match self.baseline {
                BaselineSpec::Exponential => "exponential".to_string(),
                BaselineSpec::Weibull { shape, scale } => format!("weibull-k{shape}-s{scale}"),
            },
            self.pattern.label()
        )
    }

    pub fn beta_truth(&self) -> Result<Vec<f64>> {
        make_beta(&self.pattern, self.p)
    }
}

/// One generated replicate: the dataset on the original covariate scale and
/// the truth it was drawn from.
#[derive(Debug, Clone)]
pub struct GeneratedReplicate {
    pub data: SurvivalDataset,
    pub beta_truth: Vec<f64>,
    /// Administrative cutoff used for this replicate.
    pub censor_cutoff: f64,
}

/// Full toy pipeline: covariates -> optional dichotomization -> event times
/// -> administrative censoring -> tie jitter -> dataset.
pub fn generate_toy_dataset<R: Rng>(
    scenario: &ToyScenario,
    rng: &mut R,
) -> Result<GeneratedReplicate> {
    scenario.validate()?;
    let beta = make_beta(&scenario.pattern, scenario.p)?;
    let x = sample_covariates(scenario.n, scenario.p, scenario.rho, rng)?;
    let x = dichotomize(x, &scenario.dichotomize);
    let lp: Vec<f64> = (0..scenario.n)
        .map(|i| (0..scenario.p).map(|j| x[(i, j)] * beta[j]).sum())
        .collect();
    let t = sample_event_times(&lp, &scenario.baseline, rng)?;
    let t = jitter_ties(&t, JitterRole::Event);
    let (y, status, cutoff) = apply_admin_censoring(&t, scenario.censor_target)?;
    let y = jitter_ties(&y, JitterRole::Censoring);
    let data = SurvivalDataset::from_parts(y, status, x)?;
    Ok(GeneratedReplicate {
        data,
        beta_truth: beta,
        censor_cutoff: cutoff,
    })
}

/// Replicate from a calibrated scenario: rows of the pool are resampled
/// with replacement, then the same censoring/jitter pipeline applies.
pub fn generate_calibrated_dataset<R: Rng>(
    scenario: &CalibratedScenario,
    n: usize,
    rng: &mut R,
) -> Result<GeneratedReplicate> {
    if n < 2 {
        return Err(Error::invalid("need n >= 2"));
    }
    let pool = &scenario.covariate_pool;
    let p = pool.ncols();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let row = rng.gen_range(0..pool.nrows());
        for j in 0..p {
            x[(i, j)] = pool[(row, j)];
        }
    }
    let lp: Vec<f64> = (0..n)
        .map(|i| (0..p).map(|j| x[(i, j)] * scenario.beta_truth[j]).sum())
        .collect();
    let baseline = BaselineSpec::Weibull {
        shape: scenario.shape,
        scale: scenario.scale,
    };
    let t = sample_event_times(&lp, &baseline, rng)?;
    let t = jitter_ties(&t, JitterRole::Event);
    let (y, status, cutoff) = apply_admin_censoring(&t, scenario.censor_target)?;
    let y = jitter_ties(&y, JitterRole::Censoring);
    let data = SurvivalDataset::from_parts(y, status, x)?;
    Ok(GeneratedReplicate {
        data,
        beta_truth: scenario.beta_truth.clone(),
        censor_cutoff: cutoff,
    })
}
