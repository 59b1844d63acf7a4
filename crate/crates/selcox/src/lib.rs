//! Penalized Cox proportional-hazards estimation with inference after
//! variable selection, plus a reproducible Monte Carlo harness.
//!
//! The crate is organised around the analysis pipeline:
//!
//! - [`survival`] — partial-likelihood machinery: log likelihood, score,
//!   information, Newton fitting, Breslow baseline, Wald intervals
//! - [`lasso`] — L1-penalized Cox estimation (standard and adaptive),
//!   lambda paths, cross-validation, AIC/BIC and fixed tuning rules
//! - [`inference`] — selective confidence intervals: full, oracle, refit,
//!   refit0, sample splitting, debiased Lasso, exact post-selection
//!   inference via truncated-Gaussian pivots
//! - [`datagen`] — toy and calibrated survival data generators with
//!   administrative censoring and submodel-truth projection
//! - [`metrics`] — selective coverage, interval width, power/type I error,
//!   selection quality, IPCW Brier score, concordance index
//! - [`harness`] — scenario grids, seeded parallel execution, CSV/SVG
//!   outputs, and real-data subsampling analysis
//!
//! See the `examples/` directory for one runnable example per capability;
//! the `selcox` binary exposes the same pipeline as subcommands.

pub mod datagen;
pub mod error;
pub mod harness;
pub mod inference;
pub mod lasso;
pub mod linalg;
pub mod metrics;
pub mod seed;
pub mod stats;
pub mod survival;

pub use error::{Error, Result};
pub use survival::{CoxFit, SurvivalDataset, SurvivalRecord};
