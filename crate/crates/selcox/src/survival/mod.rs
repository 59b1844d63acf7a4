//! Cox partial-likelihood machinery: evaluation, derivatives, unpenalized
//! fitting, Breslow baseline, and Wald intervals.
//!
//! All operations are pure functions of their inputs. Datasets require
//! strictly distinct observed times; tie handling happens upstream in
//! [`crate::datagen::jitter_ties`].

mod baseline;
mod fit;
mod loglik;

pub use baseline::{
    breslow_baseline, breslow_from_linear_predictor, survival_probability, BreslowBaseline,
};
pub use fit::{fit_cox_mle, fit_cox_ridge, one_step_update, wald_ci, FitOptions, WaldInterval};
pub use loglik::{information, log_partial_likelihood, score, working_derivatives};

pub(crate) use loglik::eval_partial_likelihood;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// One observed triple: survival time, event indicator, covariate row.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRecord {
    /// Observed time Y = min(T, C), strictly positive.
    pub time: f64,
    /// Event indicator: `true` means the event was observed.
    pub status: bool,
    /// Covariate vector of dataset-wide length p.
    pub covariates: Vec<f64>,
}

/// Per-column centering and scaling applied to the covariate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardization {
    pub fn identity(p: usize) -> Self {
        Standardization {
            center: vec![0.0; p],
            scale: vec![1.0; p],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.center.iter().all(|&c| c == 0.0) && self.scale.iter().all(|&s| s == 1.0)
    }
}

/// Immutable survival dataset with distinct observed times.
///
/// Covariates are stored as an n x p matrix together with the
/// standardization that produced them, so estimates can be reported on the
/// original scale.
#[derive(Debug, Clone)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    status: Vec<bool>,
    x: DMatrix<f64>,
    standardization: Standardization,
    /// Record indices sorted by time, largest first. Cached because every
    /// partial-likelihood sweep needs it.
    order_desc: Vec<usize>,
}

impl SurvivalDataset {
    /// Build from raw parts without rescaling (identity standardization).
    pub fn from_parts(times: Vec<f64>, status: Vec<bool>, x: DMatrix<f64>) -> Result<Self> {
        let p = x.ncols();
        Self::with_standardization(times, status, x, Standardization::identity(p))
    }

    /// Build from records without rescaling.
    pub fn from_records(records: &[SurvivalRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::invalid("dataset needs at least 2 records"));
        }
        let p = records[0].covariates.len();
        for (i, r) in records.iter().enumerate() {
            if r.covariates.len() != p {
                return Err(Error::invalid(format!(
                    "record {i} has {} covariates, expected {p}",
                    r.covariates.len()
                )));
            }
        }
        let times = records.iter().map(|r| r.time).collect();
        let status = records.iter().map(|r| r.status).collect();
        let x = DMatrix::from_fn(records.len(), p, |i, j| records[i].covariates[j]);
        Self::from_parts(times, status, x)
    }

    /// Build after centering and scaling each column. Constant columns keep
    /// scale 1 so the invariant `scale > 0` holds.
    pub fn standardized(times: Vec<f64>, status: Vec<bool>, x: DMatrix<f64>) -> Result<Self> {
        let n = x.nrows();
        let p = x.ncols();
        if n < 2 {
            return Err(Error::invalid("dataset needs at least 2 records"));
        }
        let mut center = vec![0.0; p];
        let mut scale = vec![1.0; p];
        let mut z = x;
        for j in 0..p {
            let col = z.column(j);
            let m = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
            let s = var.sqrt();
            center[j] = m;
            scale[j] = if s > 1e-12 { s } else { 1.0 };
            for i in 0..n {
                z[(i, j)] = (z[(i, j)] - center[j]) / scale[j];
            }
        }
        Self::with_standardization(times, status, z, Standardization { center, scale })
    }

    pub fn with_standardization(
        times: Vec<f64>,
        status: Vec<bool>,
        x: DMatrix<f64>,
        standardization: Standardization,
    ) -> Result<Self> {
        let n = times.len();
        if n < 2 {
            return Err(Error::invalid("dataset needs at least 2 records"));
        }
        if status.len() != n || x.nrows() != n {
            return Err(Error::invalid("times, status, covariates length mismatch"));
        }
        let p = x.ncols();
        if standardization.center.len() != p || standardization.scale.len() != p {
            return Err(Error::invalid("standardization length mismatch"));
        }
        if standardization.scale.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("standardization scales must be positive"));
        }
        for (i, &t) in times.iter().enumerate() {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::invalid(format!("time {i} is not a positive real")));
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite covariate value"));
        }
        let mut order_desc: Vec<usize> = (0..n).collect();
        order_desc.sort_by(|&a, &b| times[b].partial_cmp(&times[a]).unwrap());
        for w in order_desc.windows(2) {
            if times[w[0]] == times[w[1]] {
                return Err(Error::invalid(format!(
                    "tied observed times at {} — jitter ties before construction",
                    times[w[0]]
                )));
            }
        }
        Ok(SurvivalDataset {
            times,
            status,
            x,
            standardization,
            order_desc,
        })
    }

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_events(&self) -> usize {
        self.status.iter().filter(|&&s| s).count()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn event(&self, i: usize) -> bool {
        self.status[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn status(&self) -> &[bool] {
        &self.status
    }

    pub fn covariates(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn covariate(&self, i: usize, j: usize) -> f64 {
        self.x[(i, j)]
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub(crate) fn order_desc(&self) -> &[usize] {
        &self.order_desc
    }

    pub fn record(&self, i: usize) -> SurvivalRecord {
        SurvivalRecord {
            time: self.times[i],
            status: self.status[i],
            covariates: (0..self.p()).map(|j| self.x[(i, j)]).collect(),
        }
    }

    /// New dataset from a subset of record indices, keeping the parent
    /// standardization record.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<SurvivalDataset> {
        let times = rows.iter().map(|&i| self.times[i]).collect();
        let status = rows.iter().map(|&i| self.status[i]).collect();
        let x = DMatrix::from_fn(rows.len(), self.p(), |r, j| self.x[(rows[r], j)]);
        Self::with_standardization(times, status, x, self.standardization.clone())
    }

    /// Back-transform a coefficient for column `j` to the original covariate
    /// scale.
    pub fn to_original_scale(&self, j: usize, beta_std: f64) -> f64 {
        beta_std / self.standardization.scale[j]
    }
}

/// Diagnostic flags carried by a fitted Cox model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FitFlags {
    /// Monotone likelihood detected: a coefficient ran away on the
    /// standardized scale.
    pub separation: bool,
    /// The information matrix was rank deficient at some Newton step.
    pub rank_deficient: bool,
    /// Fewer observations than fitted coefficients.
    pub underdetermined: bool,
}

/// Unpenalized Cox fit on a declared index subset.
#[derive(Debug, Clone)]
pub struct CoxFit {
    /// Estimated coefficients, aligned with `subset`.
    pub beta: nalgebra::DVector<f64>,
    /// Log partial likelihood at `beta`.
    pub loglik: f64,
    /// Score vector at `beta`.
    pub score_at_solution: nalgebra::DVector<f64>,
    /// Negative Hessian of the log partial likelihood at `beta`.
    pub information: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Column indices (into 0..p) the fit was computed on.
    pub subset: Vec<usize>,
    pub flags: FitFlags,
}
