//! Performance measures over simulation iterations: selective coverage,
//! interval width, power and type-1 error, selection quality, and the
//! predictive scores (IPCW Brier, concordance).

mod predictive;

pub use predictive::{
    harrell_cindex, integrated_brier, km_censoring_survivor, CensoringSurvivor, IbsResult,
};

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::inference::{Method, SelectiveInterval, TargetKind};
use crate::stats;

/// Everything one simulation iteration produced for one method.
#[derive(Debug, Clone)]
pub struct IterationResult {
    pub scenario_id: String,
    pub method: Method,
    /// Tuning-rule label, e.g. "cv_min".
    pub tuning: String,
    pub iteration: usize,
    /// Selected index set for this iteration.
    pub selected: Vec<usize>,
    pub intervals: Vec<SelectiveInterval>,
    pub runtime_seconds: f64,
    pub flags: IterationFlags,
}

impl IterationResult {
    pub fn model_size(&self) -> usize {
        self.selected.len()
    }
}

/// Failure accounting carried along with each iteration.
#[derive(Debug, Clone, Copy, Default)]
pub struct IterationFlags {
    pub separation: bool,
    /// The selection-stage Lasso did not meet its optimality tolerance.
    pub selection_nonconverged: bool,
    /// No event-balanced split existed (split method only).
    pub split_failed: bool,
}

/// True targets: submodel projections keyed by (scenario, subset) plus the
/// generating coefficients per scenario.
#[derive(Debug, Clone, Default)]
pub struct TargetTable {
    submodel: HashMap<(String, Vec<usize>), Vec<f64>>,
    full: HashMap<String, Vec<f64>>,
}

impl TargetTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_full(&mut self, scenario_id: &str, beta: Vec<f64>) {
        self.full.insert(scenario_id.to_string(), beta);
    }

    pub fn insert_submodel(&mut self, scenario_id: &str, subset: &[usize], beta: Vec<f64>) {
        debug_assert_eq!(subset.len(), beta.len());
        self.submodel
            .insert((scenario_id.to_string(), subset.to_vec()), beta);
    }

    pub fn full_truth(&self, scenario_id: &str) -> Option<&[f64]> {
        self.full.get(scenario_id).map(|v| v.as_slice())
    }

    /// Target value for one interval: the submodel projection onto the
    /// iteration's selected set, or the generating coefficient.
    pub fn target_for(
        &self,
        scenario_id: &str,
        kind: TargetKind,
        selected: &[usize],
        coef_index: usize,
    ) -> Result<f64> {
        match kind {
            TargetKind::FullModel => self
                .full
                .get(scenario_id)
                .and_then(|b| b.get(coef_index))
                .copied()
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "no full-model truth for scenario {scenario_id} coefficient {coef_index}"
                    ))
                }),
            TargetKind::Submodel => {
                let key = (scenario_id.to_string(), selected.to_vec());
                let beta = self.submodel.get(&key).ok_or_else(|| {
                    Error::invalid(format!(
                        "no submodel truth for scenario {scenario_id} subset {selected:?}"
                    ))
                })?;
                let pos = selected
                    .iter()
                    .position(|&j| j == coef_index)
                    .ok_or_else(|| {
                        Error::invalid(format!(
                            "coefficient {coef_index} not in selected set {selected:?}"
                        ))
                    })?;
                Ok(beta[pos])
            }
        }
    }
}

/// Identifies one aggregation cell; `coef_index = None` is the pooled row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub scenario_id: String,
    pub method: &'static str,
    pub tuning: String,
    pub coef_index: Option<usize>,
}

fn cell_key(r: &IterationResult, coef: Option<usize>) -> CellKey {
    CellKey {
        scenario_id: r.scenario_id.clone(),
        method: r.method.label(),
        tuning: r.tuning.clone(),
        coef_index: coef,
    }
}

/// Coverage of one cell: counts plus the rate and its Monte Carlo SE.
#[derive(Debug, Clone)]
pub struct CoverageCell {
    pub key: CellKey,
    /// Non-degenerate intervals scored.
    pub reported: usize,
    pub covered: usize,
    pub degenerate: usize,
    pub rate: Option<f64>,
    pub mc_se: Option<f64>,
}

/// Proportion of non-degenerate intervals containing their target, per
/// cell and pooled; degenerate intervals are counted separately.
pub fn selective_coverage(
    results: &[IterationResult],
    targets: &TargetTable,
) -> Result<Vec<CoverageCell>> {
    let mut cells: BTreeMap<CellKey, (usize, usize, usize)> = BTreeMap::new();
    for r in results {
        for iv in &r.intervals {
            for coef in [None, Some(iv.coef_index)] {
                let entry = cells.entry(cell_key(r, coef)).or_insert((0, 0, 0));
                if iv.degenerate {
                    entry.2 += 1;
                    continue;
                }
                let target =
                    targets.target_for(&r.scenario_id, iv.target_kind, &r.selected, iv.coef_index)?;
                entry.0 += 1;
                if iv.covers(target) {
                    entry.1 += 1;
                }
            }
        }
    }
    Ok(cells
        .into_iter()
        .map(|(key, (reported, covered, degenerate))| {
            let rate = (reported > 0).then(|| covered as f64 / reported as f64);
            let mc_se = rate.map(|p| (p * (1.0 - p) / reported as f64).sqrt());
            CoverageCell {
                key,
                reported,
                covered,
                degenerate,
                rate,
                mc_se,
            }
        })
        .collect())
}

/// Width distribution of one cell.
#[derive(Debug, Clone)]
pub struct WidthCell {
    pub key: CellKey,
    /// Finite, non-degenerate widths scored.
    pub reported: usize,
    pub excluded: usize,
    pub median: Option<f64>,
    pub iqr: Option<f64>,
}

/// Median and interquartile range of interval widths per cell; degenerate
/// or infinite intervals are excluded and counted.
pub fn sci_width(results: &[IterationResult]) -> Vec<WidthCell> {
    let mut cells: BTreeMap<CellKey, (Vec<f64>, usize)> = BTreeMap::new();
    for r in results {
        for iv in &r.intervals {
            for coef in [None, Some(iv.coef_index)] {
                let entry = cells.entry(cell_key(r, coef)).or_insert((Vec::new(), 0));
                let w = iv.width();
                if iv.degenerate || !w.is_finite() {
                    entry.1 += 1;
                } else {
                    entry.0.push(w);
                }
            }
        }
    }
    cells
        .into_iter()
        .map(|(key, (mut widths, excluded))| {
            widths.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q = |p: f64| stats::quantile_type7(&widths, p).expect("nonempty widths");
            let median = (!widths.is_empty()).then(|| q(0.5));
            let iqr = (!widths.is_empty()).then(|| q(0.75) - q(0.25));
            WidthCell {
                key,
                reported: widths.len(),
                excluded,
                median,
                iqr,
            }
        })
        .collect()
}

/// Power and type-1 error of one cell.
#[derive(Debug, Clone)]
pub struct PowerCell {
    pub key: CellKey,
    /// Intervals whose generating coefficient is nonzero / zero.
    pub power_n: usize,
    pub type1_n: usize,
    pub power: Option<f64>,
    pub type1: Option<f64>,
}

/// Rejection (0 outside the SCI) rates split by whether the generating
/// coefficient is truly nonzero (power) or zero (type-1 error), per cell
/// and pooled over coefficients.
pub fn selective_power_type1(
    results: &[IterationResult],
    targets: &TargetTable,
) -> Result<Vec<PowerCell>> {
    let mut cells: BTreeMap<CellKey, (usize, usize, usize, usize)> = BTreeMap::new();
    for r in results {
        let beta0 = targets.full_truth(&r.scenario_id).ok_or_else(|| {
            Error::invalid(format!("no full-model truth for scenario {}", r.scenario_id))
        })?;
        for iv in &r.intervals {
            if iv.degenerate {
                continue;
            }
            let truly_active = beta0
                .get(iv.coef_index)
                .copied()
                .ok_or_else(|| Error::invalid("coefficient index beyond the generating model"))?
                != 0.0;
            let reject = iv.rejects_zero();
            for coef in [None, Some(iv.coef_index)] {
                let entry = cells.entry(cell_key(r, coef)).or_insert((0, 0, 0, 0));
                if truly_active {
                    entry.0 += 1;
                    entry.1 += usize::from(reject);
                } else {
                    entry.2 += 1;
                    entry.3 += usize::from(reject);
                }
            }
        }
    }
    Ok(cells
        .into_iter()
        .map(|(key, (pn, pr, tn, tr))| PowerCell {
            key,
            power_n: pn,
            type1_n: tn,
            power: (pn > 0).then(|| pr as f64 / pn as f64),
            type1: (tn > 0).then(|| tr as f64 / tn as f64),
        })
        .collect())
}

/// Selection quality of one cell (always pooled over coefficients).
#[derive(Debug, Clone)]
pub struct SelectionCell {
    pub key: CellKey,
    pub iterations: usize,
    pub mean_size: f64,
    /// Iterations with a nonempty selection, the denominator of p_true.
    pub nonempty: usize,
    /// Mean share of truly active covariates among the selected.
    pub p_true: Option<f64>,
    /// Mean share of truly active covariates that were selected.
    pub tpr: Option<f64>,
    /// Mean share of truly inactive covariates that were selected.
    pub fpr: Option<f64>,
}

/// Model size, P_true, and true/false positive selection rates per cell.
pub fn selection_quality(
    results: &[IterationResult],
    targets: &TargetTable,
) -> Result<Vec<SelectionCell>> {
    struct Acc {
        iterations: usize,
        size_sum: usize,
        nonempty: usize,
        p_true_sum: f64,
        tpr_sum: f64,
        tpr_n: usize,
        fpr_sum: f64,
        fpr_n: usize,
    }
    let mut cells: BTreeMap<CellKey, Acc> = BTreeMap::new();
    for r in results {
        let beta0 = targets.full_truth(&r.scenario_id).ok_or_else(|| {
            Error::invalid(format!("no full-model truth for scenario {}", r.scenario_id))
        })?;
        let active: Vec<bool> = beta0.iter().map(|&b| b != 0.0).collect();
        let n_active = active.iter().filter(|&&a| a).count();
        let n_inactive = active.len() - n_active;
        let hits = r
            .selected
            .iter()
            .filter(|&&j| active.get(j).copied().unwrap_or(false))
            .count();
        let acc = cells.entry(cell_key(r, None)).or_insert(Acc {
            iterations: 0,
            size_sum: 0,
            nonempty: 0,
            p_true_sum: 0.0,
            tpr_sum: 0.0,
            tpr_n: 0,
            fpr_sum: 0.0,
            fpr_n: 0,
        });
        acc.iterations += 1;
        acc.size_sum += r.selected.len();
        if !r.selected.is_empty() {
            acc.nonempty += 1;
            acc.p_true_sum += hits as f64 / r.selected.len() as f64;
        }
        if n_active > 0 {
            acc.tpr_n += 1;
            acc.tpr_sum += hits as f64 / n_active as f64;
        }
        if n_inactive > 0 {
            acc.fpr_n += 1;
            acc.fpr_sum += (r.selected.len() - hits) as f64 / n_inactive as f64;
        }
    }
    Ok(cells
        .into_iter()
        .map(|(key, a)| SelectionCell {
            key,
            iterations: a.iterations,
            mean_size: a.size_sum as f64 / a.iterations as f64,
            nonempty: a.nonempty,
            p_true: (a.nonempty > 0).then(|| a.p_true_sum / a.nonempty as f64),
            tpr: (a.tpr_n > 0).then(|| a.tpr_sum / a.tpr_n as f64),
            fpr: (a.fpr_n > 0).then(|| a.fpr_sum / a.fpr_n as f64),
        })
        .collect())
}
