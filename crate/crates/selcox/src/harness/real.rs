//! Real-data subsampling analysis.
//!
//! - [`load_real_dataset`] ingests a survival CSV with declared covariate
//!   types; categorical columns become reference-coded dummies (first level
//!   in sort order dropped), named `column=level`.
//! - [`analyze_real`] draws repeated without-replacement subsamples, runs
//!   selection plus the requested inference methods on each, and reports
//!   selection frequencies (in percent) and per-subsample intervals, both
//!   ordered by increasing standardized effect size.
//! - The cleaned design can be exported as a calibrated scenario for
//!   matched synthetic experiments.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::datagen::{
    calibrate_from_dataset, clean_for_calibration, jitter_ties, CalibratedScenario, JitterRole,
};
use crate::error::{Error, Result};
use crate::inference::{
    estimate_nodewise_inverse, infer_debiased, infer_exact_psi, infer_full, infer_refit,
    infer_refit0, infer_split, Method, NodewiseRule, SelectionEvent, SelectiveInterval,
};
use crate::lasso::{select_model, LassoFlavor, TuningRule};
use crate::seed::derive_rng;
use crate::stats;
use crate::survival::SurvivalDataset;

/// Declared type of one covariate column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovariateKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovariateSpec {
    pub name: String,
    pub kind: CovariateKind,
}

/// Parse a covariate declaration like `"age:num,karno:num,cell:cat"`.
pub fn parse_covariate_spec(spec: &str) -> Result<Vec<CovariateSpec>> {
    let mut out = Vec::new();
    for entry in spec.split(',') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let (name, kind) = entry.split_once(':').ok_or_else(|| {
            Error::schema(
                format!("covariate spec entry '{entry}'"),
                "expected name:num or name:cat",
            )
        })?;
        let kind = match kind.trim() {
            "num" => CovariateKind::Numeric,
            "cat" => CovariateKind::Categorical,
            other => {
                return Err(Error::schema(
                    format!("covariate spec entry '{entry}'"),
                    format!("unknown type '{other}', expected num or cat"),
                ))
            }
        };
        out.push(CovariateSpec {
            name: name.trim().to_string(),
            kind,
        });
    }
    if out.is_empty() {
        return Err(Error::schema(
            "covariate spec",
            "at least one covariate is required",
        ));
    }
    Ok(out)
}

/// Survival design assembled from an external CSV, on the original
/// measurement scale. Exact time ties are already jittered away.
#[derive(Debug, Clone)]
pub struct RealDesign {
    pub times: Vec<f64>,
    pub status: Vec<bool>,
    pub matrix: DMatrix<f64>,
    pub column_names: Vec<String>,
}

fn parse_event(raw: &str, location: &str) -> Result<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(Error::schema(
            location,
            format!("event must be 0/1/true/false, got '{other}'"),
        )),
    }
}

/// Read a survival CSV: a positive time column, a 0/1 event column, and the
/// declared covariates. Schema problems name the offending row and column.
pub fn load_real_dataset(
    path: &Path,
    time_col: &str,
    event_col: &str,
    covariates: &[CovariateSpec],
) -> Result<RealDesign> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::schema(path.display().to_string(), format!("missing column '{name}'")))
    };
    let time_idx = col_index(time_col)?;
    let event_idx = col_index(event_col)?;
    let cov_idx: Vec<usize> = covariates
        .iter()
        .map(|c| col_index(&c.name))
        .collect::<Result<_>>()?;

    let mut times = Vec::new();
    let mut status = Vec::new();
    // Numeric cells parsed eagerly; categorical cells kept as strings until
    // all levels are known.
    let mut raw_columns: Vec<Vec<String>> = vec![Vec::new(); covariates.len()];
    for (row_number, record) in reader.records().enumerate() {
        let record = record?;
        // +2: header line plus 1-based counting.
        let line = row_number + 2;
        let cell = |idx: usize, name: &str| -> Result<&str> {
            record.get(idx).ok_or_else(|| {
                Error::schema(format!("row {line}, column {name}"), "missing value")
            })
        };
        let loc = |name: &str| format!("row {line}, column {name}");
        let t: f64 = cell(time_idx, time_col)?
            .trim()
            .parse()
            .map_err(|_| Error::schema(loc(time_col), "time is not a number"))?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::schema(loc(time_col), "time must be positive"));
        }
        times.push(t);
        status.push(parse_event(cell(event_idx, event_col)?, &loc(event_col))?);
        for (k, spec) in covariates.iter().enumerate() {
            let raw = cell(cov_idx[k], &spec.name)?.trim().to_string();
            if raw.is_empty() {
                return Err(Error::schema(loc(&spec.name), "missing value"));
            }
            if spec.kind == CovariateKind::Numeric {
                let value: f64 = raw
                    .parse()
                    .map_err(|_| Error::schema(loc(&spec.name), "expected a number"))?;
                if !value.is_finite() {
                    return Err(Error::schema(loc(&spec.name), "value must be finite"));
                }
            }
            raw_columns[k].push(raw);
        }
    }
    let n = times.len();
    if n < 2 {
        return Err(Error::schema(
            path.display().to_string(),
            "need at least two data rows",
        ));
    }

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for (k, spec) in covariates.iter().enumerate() {
        match spec.kind {
            CovariateKind::Numeric => {
                let values = raw_columns[k]
                    .iter()
                    .map(|s| s.parse::<f64>().expect("validated above"))
                    .collect();
                columns.push((spec.name.clone(), values));
            }
            CovariateKind::Categorical => {
                let mut levels: Vec<&String> = raw_columns[k].iter().collect();
                levels.sort();
                levels.dedup();
                // Reference coding: the first level in sort order carries no
                // column of its own.
                for level in levels.iter().skip(1) {
                    let values = raw_columns[k]
                        .iter()
                        .map(|s| (s == *level) as u8 as f64)
                        .collect();
                    columns.push((format!("{}={}", spec.name, level), values));
                }
            }
        }
    }
    if columns.is_empty() {
        return Err(Error::schema(
            path.display().to_string(),
            "covariate columns expand to an empty design",
        ));
    }

    let p = columns.len();
    let mut matrix = DMatrix::zeros(n, p);
    for (j, (_, values)) in columns.iter().enumerate() {
        for i in 0..n {
            matrix[(i, j)] = values[i];
        }
    }
    Ok(RealDesign {
        times: jitter_ties(&times, JitterRole::Event),
        status,
        matrix,
        column_names: columns.into_iter().map(|(name, _)| name).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct RealAnalysisOptions {
    /// Number of without-replacement subsamples (default 100).
    pub n_subsamples: usize,
    /// Fraction of rows per subsample (default 0.8).
    pub fraction: f64,
    pub methods: Vec<Method>,
    pub tuning: TuningRule,
    pub flavor: LassoFlavor,
    pub alpha: f64,
    pub cv_folds: usize,
    pub seed: u64,
    /// Dummy columns rarer than this are dropped during cleaning.
    pub rare_threshold: f64,
    pub nodewise_scale: f64,
    /// Also calibrate a synthetic scenario from the cleaned data.
    pub export_scenario: bool,
}

impl Default for RealAnalysisOptions {
    fn default() -> Self {
        RealAnalysisOptions {
            n_subsamples: 100,
            fraction: 0.8,
            methods: vec![Method::Refit],
            tuning: TuningRule::CvMin,
            flavor: LassoFlavor::Standard,
            alpha: 0.10,
            cv_folds: 10,
            seed: 0,
            rare_threshold: 0.01,
            nodewise_scale: 1.0,
            export_scenario: false,
        }
    }
}

/// Selection frequency of one cleaned covariate, in percent, with the
/// standardized effect size used to order the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub covariate: String,
    pub frequency_pct: f64,
    /// Median |standardized lasso estimate| across subsamples.
    pub median_abs_estimate: f64,
}

/// One interval from one subsample, on the original covariate scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsampleIntervalRow {
    pub subsample: usize,
    pub method: String,
    pub covariate: String,
    pub estimate: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub degenerate: u8,
}

#[derive(Debug, Clone)]
pub struct RealAnalysisReport {
    /// Cleaned column names, in increasing standardized effect order.
    pub ordered_covariates: Vec<String>,
    pub n_rows: usize,
    pub n_completed: usize,
    pub frequencies: Vec<FrequencyRow>,
    pub intervals: Vec<SubsampleIntervalRow>,
    pub calibrated: Option<CalibratedScenario>,
    pub warnings: Vec<String>,
}

fn run_methods<R: rand::Rng>(
    data: &SurvivalDataset,
    selection: &crate::lasso::SelectionOutcome,
    opts: &RealAnalysisOptions,
    rng: &mut R,
) -> Vec<(Method, Result<Vec<SelectiveInterval>>)> {
    opts.methods
        .iter()
        .map(|m| {
            let out = match m {
                Method::Full => infer_full(data, opts.alpha),
                Method::Refit => {
                    let event = SelectionEvent::from_fit(&selection.fit, &selection.weights);
                    infer_refit(data, &event, opts.alpha)
                }
                Method::Refit0 => infer_refit0(data, &selection.fit, opts.alpha),
                Method::Split => infer_split(
                    data,
                    &opts.flavor,
                    &opts.tuning,
                    opts.cv_folds,
                    opts.alpha,
                    rng,
                )
                .map(|s| s.intervals),
                Method::Debiased => estimate_nodewise_inverse(
                    data,
                    &selection.fit.beta,
                    &NodewiseRule {
                        c: opts.nodewise_scale,
                    },
                )
                .and_then(|nw| infer_debiased(data, &selection.fit, &nw, opts.alpha)),
                Method::ExactPsi => {
                    infer_exact_psi(data, &selection.fit, &selection.weights, opts.alpha)
                }
                Method::Oracle => unreachable!("rejected during validation"),
            };
            (*m, out)
        })
        .collect()
}

/// Repeated subsample selection on a real design: clean the columns, draw
/// `n_subsamples` without-replacement subsamples, select on each, run the
/// requested methods, and aggregate.
pub fn analyze_real(design: &RealDesign, opts: &RealAnalysisOptions) -> Result<RealAnalysisReport> {
    if opts.methods.is_empty() {
        return Err(Error::invalid("at least one inference method is required"));
    }
    if opts.methods.contains(&Method::Oracle) {
        return Err(Error::invalid(
            "the oracle method needs generating coefficients and cannot run on real data",
        ));
    }
    if opts.n_subsamples == 0 {
        return Err(Error::invalid("need at least one subsample"));
    }
    if !(opts.fraction > 0.0 && opts.fraction <= 1.0) {
        return Err(Error::invalid("subsample fraction must lie in (0, 1]"));
    }

    let raw = SurvivalDataset::from_parts(
        design.times.clone(),
        design.status.clone(),
        design.matrix.clone(),
    )?;
    let (cleaned_std, kept) = clean_for_calibration(&raw, opts.rare_threshold)?;
    let mut warnings: Vec<String> = Vec::new();
    let dropped: Vec<&String> = design
        .column_names
        .iter()
        .enumerate()
        .filter(|(j, _)| !kept.contains(j))
        .map(|(_, name)| name)
        .collect();
    if !dropped.is_empty() {
        warnings.push(format!(
            "dropped {} constant or rare column(s) during cleaning: {}",
            dropped.len(),
            dropped
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    let names: Vec<String> = kept.iter().map(|&j| design.column_names[j].clone()).collect();
    let cleaned_raw = SurvivalDataset::from_parts(
        design.times.clone(),
        design.status.clone(),
        design.matrix.select_columns(&kept),
    )?;
    let n = cleaned_raw.n();
    let p = cleaned_raw.p();

    let mut counts = vec![0usize; p];
    let mut abs_estimates: Vec<Vec<f64>> = vec![Vec::new(); p];
    let mut raw_intervals: Vec<SubsampleIntervalRow> = Vec::new();
    let mut completed = 0usize;

    for b in 0..opts.n_subsamples {
        let mut rng = derive_rng(&[
            &opts.seed.to_string(),
            "real-subsample",
            &b.to_string(),
        ]);
        let m = ((opts.fraction * n as f64).round() as usize).clamp(2, n);
        let rows: Vec<usize> = if m == n {
            (0..n).collect()
        } else {
            let mut picked = index::sample(&mut rng, n, m).into_vec();
            picked.sort_unstable();
            picked
        };
        let attempt = cleaned_raw.subset_rows(&rows).and_then(|sub| {
            SurvivalDataset::standardized(
                sub.times().to_vec(),
                sub.status().to_vec(),
                sub.covariates().clone(),
            )
        });
        let sub = match attempt {
            Ok(sub) if sub.n_events() >= 2 => sub,
            Ok(_) => {
                warnings.push(format!("subsample {b} skipped: fewer than two events"));
                continue;
            }
            Err(e) => {
                warnings.push(format!("subsample {b} skipped: {e}"));
                continue;
            }
        };
        let selection = match select_model(&sub, &opts.flavor, &opts.tuning, opts.cv_folds, &mut rng)
        {
            Ok(sel) => sel,
            Err(e) => {
                warnings.push(format!("subsample {b} skipped: selection failed: {e}"));
                continue;
            }
        };
        completed += 1;
        for &j in &selection.fit.active {
            counts[j] += 1;
        }
        for j in 0..p {
            abs_estimates[j].push(selection.fit.beta[j].abs());
        }
        let scales = sub.standardization().scale.clone();
        for (method, outcome) in run_methods(&sub, &selection, opts, &mut rng) {
            match outcome {
                Ok(intervals) => {
                    for iv in intervals {
                        let scale = scales[iv.coef_index];
                        raw_intervals.push(SubsampleIntervalRow {
                            subsample: b,
                            method: method.label().to_string(),
                            covariate: names[iv.coef_index].clone(),
                            estimate: iv.estimate / scale,
                            lower: (iv.lower / scale).is_finite().then(|| iv.lower / scale),
                            upper: (iv.upper / scale).is_finite().then(|| iv.upper / scale),
                            degenerate: iv.degenerate as u8,
                        });
                    }
                }
                Err(e) => warnings.push(format!(
                    "subsample {b}: {} failed: {e}",
                    method.label()
                )),
            }
        }
    }
    if completed == 0 {
        return Err(Error::numerical(
            "every subsample failed; see warnings for details",
        ));
    }

    // Order covariates by increasing standardized effect size.
    let mut order: Vec<usize> = (0..p).collect();
    let medians: Vec<f64> = abs_estimates
        .iter()
        .map(|v| {
            let mut sorted = v.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            stats::quantile_type7(&sorted, 0.5).unwrap_or(0.0)
        })
        .collect();
    order.sort_by(|&a, &b| {
        medians[a]
            .partial_cmp(&medians[b])
            .unwrap()
            .then_with(|| names[a].cmp(&names[b]))
    });

    let frequencies: Vec<FrequencyRow> = order
        .iter()
        .map(|&j| FrequencyRow {
            covariate: names[j].clone(),
            frequency_pct: 100.0 * counts[j] as f64 / completed as f64,
            median_abs_estimate: medians[j],
        })
        .collect();
    let rank: BTreeMap<&str, usize> = order
        .iter()
        .enumerate()
        .map(|(r, &j)| (names[j].as_str(), r))
        .collect();
    let mut intervals = raw_intervals;
    intervals.sort_by(|a, b| {
        rank[a.covariate.as_str()]
            .cmp(&rank[b.covariate.as_str()])
            .then(a.subsample.cmp(&b.subsample))
            .then(a.method.cmp(&b.method))
    });

    let calibrated = if opts.export_scenario {
        Some(calibrate_from_dataset(&cleaned_std)?)
    } else {
        None
    };

    Ok(RealAnalysisReport {
        ordered_covariates: order.iter().map(|&j| names[j].clone()).collect(),
        n_rows: n,
        n_completed: completed,
        frequencies,
        intervals,
        calibrated,
        warnings,
    })
}

/// Convenience wrapper: ingest the CSV and run the analysis in one call.
pub fn analyze_real_csv(
    path: &Path,
    time_col: &str,
    event_col: &str,
    covariates: &[CovariateSpec],
    opts: &RealAnalysisOptions,
) -> Result<RealAnalysisReport> {
    let design = load_real_dataset(path, time_col, event_col, covariates)?;
    analyze_real(&design, opts)
}
