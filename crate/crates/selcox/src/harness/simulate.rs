//! Grid runner: deterministic per-iteration engine, per-scenario shards,
//! merged long/summary CSVs, and a resumable manifest.
//!
//! - Each (scenario, iteration) derives its own RNG from (base seed,
//!   scenario id, iteration), so results never depend on scheduling.
//! - Scenarios are independent work units; each writes one shard atomically
//!   and flips its manifest entry. The merge step re-reads shards in a fixed
//!   order and sorts rows, so thread count cannot change the output bytes.
//! - A failing replicate records flags on its rows and the run continues;
//!   cells where more than 20% of iterations failed are flagged in the
//!   summary.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::datagen::{generate_toy_dataset, submodel_truth, SubmodelTruthCache, ToyScenario};
use crate::error::{Error, Result};
use crate::inference::{
    estimate_nodewise_inverse, infer_debiased, infer_exact_psi, infer_full, infer_oracle,
    infer_refit, infer_refit0, infer_split, Method, NodewiseRule, SelectionEvent,
    SelectiveInterval, TargetKind,
};
use crate::lasso::select_model;
use crate::metrics::{
    harrell_cindex, integrated_brier, km_censoring_survivor, sci_width, selection_quality,
    selective_coverage, selective_power_type1, IterationResult, TargetTable,
};
use crate::seed::derive_rng;
use crate::survival::{breslow_from_linear_predictor, SurvivalDataset};

use super::{
    flavor_label, load_manifest, read_csv, write_csv_atomic, write_json_atomic, LongRow,
    RunManifest, RuntimeRow, ScenarioGrid, SummaryRow, TUNING_NONE,
};

/// Output locations and counts of one completed run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub long_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub runtimes_csv: PathBuf,
    pub manifest_path: PathBuf,
    pub scenarios_total: usize,
    /// Scenarios executed in this invocation (the rest were resumed).
    pub scenarios_run: usize,
    pub long_rows: usize,
    pub warnings: Vec<String>,
}

/// Everything one method contributed to one iteration, still on the
/// standardized covariate scale.
struct BlockOutcome {
    method: Method,
    tuning: String,
    /// Sorted coefficient set the block's inference is anchored on.
    selected: Vec<usize>,
    intervals: Vec<SelectiveInterval>,
    flags: BTreeSet<&'static str>,
    runtime: f64,
}

impl BlockOutcome {
    fn empty(method: Method, tuning: &str, flag: Option<&'static str>) -> Self {
        BlockOutcome {
            method,
            tuning: tuning.to_string(),
            selected: Vec::new(),
            intervals: Vec::new(),
            flags: flag.into_iter().collect(),
            runtime: 0.0,
        }
    }
}

/// The (method, tuning) blocks every iteration must emit, in config order.
fn block_plan(grid: &ScenarioGrid) -> Vec<(Method, String)> {
    let mut plan = Vec::new();
    for m in &grid.methods {
        if matches!(m, Method::Full | Method::Oracle) {
            plan.push((*m, TUNING_NONE.to_string()));
        } else {
            for rule in &grid.tuning_rules {
                plan.push((*m, rule.label().to_string()));
            }
        }
    }
    plan
}

fn time_inference<F>(f: F) -> (Result<Vec<SelectiveInterval>>, f64)
where
    F: FnOnce() -> Result<Vec<SelectiveInterval>>,
{
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed().as_secs_f64())
}

/// All rows for an iteration whose data generation failed: every planned
/// block is emitted empty so the row grain stays intact for aggregation.
fn failed_iteration(
    grid: &ScenarioGrid,
    scenario: &ToyScenario,
    sid: &str,
    iteration: usize,
    flag: &'static str,
) -> Vec<LongRow> {
    let mut rows = Vec::new();
    for (method, tuning) in block_plan(grid) {
        let block = BlockOutcome::empty(method, &tuning, Some(flag));
        emit_block_rows(
            grid,
            scenario,
            sid,
            iteration,
            &block,
            &[],
            &[],
            &BTreeMap::new(),
            None,
            None,
            None,
            &mut rows,
        );
    }
    rows
}

/// One simulation iteration: generate data, run every requested method under
/// every tuning rule, compute targets and predictive metrics, and emit one
/// row per (method, tuning, coefficient). Never fails; problems become row
/// flags.
fn run_iteration(
    grid: &ScenarioGrid,
    scenario: &ToyScenario,
    sid: &str,
    iteration: usize,
    cache: &SubmodelTruthCache,
) -> (Vec<LongRow>, Vec<RuntimeRow>) {
    let mut rng = derive_rng(&[&grid.base_seed.to_string(), sid, &iteration.to_string()]);
    let mut runtimes = Vec::new();

    let rep = match generate_toy_dataset(scenario, &mut rng) {
        Ok(rep) => rep,
        Err(_) => {
            return (
                failed_iteration(grid, scenario, sid, iteration, "generation_failed"),
                runtimes,
            )
        }
    };
    let data = match SurvivalDataset::standardized(
        rep.data.times().to_vec(),
        rep.data.status().to_vec(),
        rep.data.covariates().clone(),
    ) {
        Ok(d) => d,
        Err(_) => {
            return (
                failed_iteration(grid, scenario, sid, iteration, "generation_failed"),
                runtimes,
            )
        }
    };
    let beta0 = rep.beta_truth;
    let true_active: Vec<usize> = (0..beta0.len()).filter(|&j| beta0[j] != 0.0).collect();

    let mut blocks: Vec<BlockOutcome> = Vec::new();
    for m in &grid.methods {
        let subset: &[usize] = match m {
            Method::Full => &[],
            Method::Oracle => &true_active,
            _ => continue,
        };
        let (outcome, secs) = match m {
            Method::Full => time_inference(|| infer_full(&data, grid.alpha)),
            _ => time_inference(|| infer_oracle(&data, subset, grid.alpha)),
        };
        let mut block = match outcome {
            Ok(intervals) => BlockOutcome {
                method: *m,
                tuning: TUNING_NONE.to_string(),
                selected: match m {
                    Method::Full => (0..data.p()).collect(),
                    _ => true_active.clone(),
                },
                intervals,
                flags: BTreeSet::new(),
                runtime: secs,
            },
            Err(_) => BlockOutcome::empty(*m, TUNING_NONE, Some("inference_failed")),
        };
        block.runtime = secs;
        blocks.push(block);
    }

    let selection_methods = [
        Method::Refit,
        Method::Refit0,
        Method::Debiased,
        Method::ExactPsi,
    ];
    for rule in &grid.tuning_rules {
        let needs_selection = grid
            .methods
            .iter()
            .any(|m| selection_methods.contains(m));
        let selection = if needs_selection {
            let t0 = Instant::now();
            let out = select_model(&data, &grid.lasso, rule, grid.cv_folds, &mut rng);
            runtimes.push(RuntimeRow {
                scenario_id: sid.to_string(),
                iteration,
                method: "selection".into(),
                tuning: rule.label().to_string(),
                seconds: t0.elapsed().as_secs_f64(),
            });
            Some(out)
        } else {
            None
        };

        for m in &grid.methods {
            if !selection_methods.contains(m) && *m != Method::Split {
                continue;
            }
            let tuning = rule.label();
            let block = match m {
                Method::Split => {
                    let t0 = Instant::now();
                    let out = infer_split(
                        &data,
                        &grid.lasso,
                        rule,
                        grid.cv_folds,
                        grid.alpha,
                        &mut rng,
                    );
                    let secs = t0.elapsed().as_secs_f64();
                    match out {
                        Ok(split) => {
                            let mut flags = BTreeSet::new();
                            if split.failed {
                                flags.insert("split_failed");
                            }
                            BlockOutcome {
                                method: *m,
                                tuning: tuning.to_string(),
                                selected: split.selection.active.clone(),
                                intervals: split.intervals,
                                flags,
                                runtime: secs,
                            }
                        }
                        Err(_) => BlockOutcome::empty(*m, tuning, Some("inference_failed")),
                    }
                }
                _ => match &selection {
                    Some(Ok(sel)) => {
                        let (out, secs) = time_inference(|| match m {
                            Method::Refit => {
                                let event = SelectionEvent::from_fit(&sel.fit, &sel.weights);
                                infer_refit(&data, &event, grid.alpha)
                            }
                            Method::Refit0 => infer_refit0(&data, &sel.fit, grid.alpha),
                            Method::Debiased => {
                                let rule = NodewiseRule {
                                    c: grid.nodewise_scale,
                                };
                                let nodewise =
                                    estimate_nodewise_inverse(&data, &sel.fit.beta, &rule)?;
                                infer_debiased(&data, &sel.fit, &nodewise, grid.alpha)
                            }
                            Method::ExactPsi => {
                                infer_exact_psi(&data, &sel.fit, &sel.weights, grid.alpha)
                            }
                            _ => unreachable!(),
                        });
                        let mut flags = BTreeSet::new();
                        if !sel.fit.converged {
                            flags.insert("selection_nonconverged");
                        }
                        match out {
                            Ok(intervals) => BlockOutcome {
                                method: *m,
                                tuning: tuning.to_string(),
                                selected: sel.fit.active.clone(),
                                intervals,
                                flags,
                                runtime: secs,
                            },
                            Err(_) => {
                                flags.insert("inference_failed");
                                BlockOutcome {
                                    method: *m,
                                    tuning: tuning.to_string(),
                                    selected: sel.fit.active.clone(),
                                    intervals: Vec::new(),
                                    flags,
                                    runtime: secs,
                                }
                            }
                        }
                    }
                    Some(Err(_)) => BlockOutcome::empty(*m, tuning, Some("selection_failed")),
                    None => unreachable!("selection methods imply a selection"),
                },
            };
            blocks.push(block);
        }
    }

    // Monte Carlo submodel targets, one lookup per distinct selected set.
    let mut submodel_targets: BTreeMap<Vec<usize>, Option<Vec<f64>>> = BTreeMap::new();
    for block in &mut blocks {
        if !block.method.targets_submodel() || block.selected.is_empty() {
            continue;
        }
        let entry = submodel_targets
            .entry(block.selected.clone())
            .or_insert_with(|| {
                submodel_truth(scenario, &block.selected, grid.truth_population, cache).ok()
            });
        if entry.is_none() {
            block.flags.insert("truth_unavailable");
        }
    }

    let censoring = km_censoring_survivor(&data);
    let scales = data.standardization().scale.clone();
    let mut rows = Vec::new();
    for block in &mut blocks {
        // Point predictions from the block's own estimates: coefficients
        // without an interval are zero in the block's working model.
        let mut beta_std = DVector::zeros(data.p());
        for iv in &block.intervals {
            beta_std[iv.coef_index] = iv.estimate;
        }
        let eta = data.covariates() * &beta_std;
        let predictive = breslow_from_linear_predictor(&data, eta.as_slice())
            .and_then(|baseline| {
                let predict = |i: usize, t: f64| {
                    (-(baseline.cumulative_hazard_at(t)) * eta[i].exp()).exp()
                };
                let ibs = integrated_brier(&data, &predict, &censoring, 100)?;
                let cindex = harrell_cindex(&data, eta.as_slice())?;
                Ok((ibs.value, cindex))
            });
        let (ibs, cindex) = match predictive {
            Ok((ibs, cindex)) => (Some(ibs), Some(cindex)),
            Err(_) => {
                block.flags.insert("predictive_failed");
                (None, None)
            }
        };
        let p_true = if block.selected.is_empty() {
            None
        } else {
            let hits = block
                .selected
                .iter()
                .filter(|j| true_active.contains(j))
                .count();
            Some(hits as f64 / block.selected.len() as f64)
        };
        emit_block_rows(
            grid,
            scenario,
            sid,
            iteration,
            block,
            &scales,
            &beta0,
            &submodel_targets,
            p_true,
            ibs,
            cindex,
            &mut rows,
        );
        runtimes.push(RuntimeRow {
            scenario_id: sid.to_string(),
            iteration,
            method: block.method.label().to_string(),
            tuning: block.tuning.clone(),
            seconds: block.runtime,
        });
    }
    (rows, runtimes)
}

/// Append one row per coefficient for a block, back-transforming interval
/// endpoints from the standardized to the original covariate scale.
#[allow(clippy::too_many_arguments)]
fn emit_block_rows(
    grid: &ScenarioGrid,
    scenario: &ToyScenario,
    sid: &str,
    iteration: usize,
    block: &BlockOutcome,
    scales: &[f64],
    beta0: &[f64],
    submodel_targets: &BTreeMap<Vec<usize>, Option<Vec<f64>>>,
    p_true: Option<f64>,
    ibs: Option<f64>,
    cindex: Option<f64>,
    rows: &mut Vec<LongRow>,
) {
    let flags = block
        .flags
        .iter()
        .copied()
        .collect::<Vec<_>>()
        .join(";");
    for j in 0..scenario.p {
        let iv = block.intervals.iter().find(|iv| iv.coef_index == j);
        let selected = block.selected.binary_search(&j).is_ok();
        let mut row = LongRow {
            scenario_id: sid.to_string(),
            n: scenario.n,
            p: scenario.p,
            rho: scenario.rho,
            censor_target: scenario.censor_target,
            baseline: scenario.baseline.label(),
            pattern: scenario.pattern.label(),
            lasso_flavor: flavor_label(&grid.lasso).to_string(),
            method: block.method.label().to_string(),
            tuning: block.tuning.clone(),
            iteration,
            coef_index: j,
            selected: selected as u8,
            estimate: None,
            lower: None,
            upper: None,
            degenerate: None,
            target_kind: None,
            target_value: None,
            covered: None,
            rejected_zero: None,
            runtime_seconds: 0.0,
            model_size: block.selected.len(),
            p_true,
            ibs,
            cindex,
            flags: flags.clone(),
        };
        if let Some(iv) = iv {
            let target = match iv.target_kind {
                TargetKind::FullModel => beta0.get(j).copied(),
                TargetKind::Submodel => submodel_targets
                    .get(&block.selected)
                    .and_then(|t| t.as_ref())
                    .and_then(|values| {
                        block
                            .selected
                            .binary_search(&j)
                            .ok()
                            .map(|pos| values[pos])
                    }),
            };
            // Estimates were produced on standardized covariates; dividing
            // by the column scale moves them to the original scale, where
            // the targets live. Scales are positive, so order is preserved.
            let scale = scales.get(j).copied().unwrap_or(1.0);
            let mut back = iv.clone();
            back.estimate /= scale;
            back.lower /= scale;
            back.upper /= scale;
            row.estimate = Some(back.estimate);
            row.lower = back.lower.is_finite().then_some(back.lower);
            row.upper = back.upper.is_finite().then_some(back.upper);
            row.degenerate = Some(back.degenerate as u8);
            row.target_kind = Some(back.target_kind.label().to_string());
            row.target_value = target;
            if !back.degenerate {
                if let Some(t) = target {
                    row.covered = Some(back.covers(t) as u8);
                }
                row.rejected_zero = Some(back.rejects_zero() as u8);
            }
        }
        rows.push(row);
    }
}

/// Run every iteration of one scenario and return its sorted rows.
fn run_scenario(
    grid: &ScenarioGrid,
    scenario: &ToyScenario,
) -> (Vec<LongRow>, Vec<RuntimeRow>) {
    let sid = scenario.label();
    let cache = SubmodelTruthCache::new();
    let per_iteration: Vec<(Vec<LongRow>, Vec<RuntimeRow>)> = (0..grid.n_sim)
        .into_par_iter()
        .map(|iteration| run_iteration(grid, scenario, &sid, iteration, &cache))
        .collect();
    let mut rows = Vec::new();
    let mut runtimes = Vec::new();
    for (r, t) in per_iteration {
        rows.extend(r);
        runtimes.extend(t);
    }
    rows.sort_by_key(LongRow::sort_key);
    runtimes.sort_by(|a, b| {
        (&a.scenario_id, a.iteration, &a.method, &a.tuning).cmp(&(
            &b.scenario_id,
            b.iteration,
            &b.method,
            &b.tuning,
        ))
    });
    (rows, runtimes)
}

fn shard_path(out_dir: &Path, sid: &str) -> PathBuf {
    out_dir.join("shards").join(format!("{sid}.csv"))
}

fn shard_runtime_path(out_dir: &Path, sid: &str) -> PathBuf {
    out_dir.join("shards").join(format!("{sid}.runtimes.csv"))
}

/// Execute a grid into `out_dir`: per-scenario shards plus merged
/// `long.csv`, `summary.csv`, `runtimes.csv`, and `manifest.json`.
///
/// An existing manifest with matching config digest and seed resumes the
/// run: complete scenarios are not recomputed, and rerunning a finished grid
/// reproduces the merged files byte for byte.
pub fn run_simulation(grid: &ScenarioGrid, out_dir: &Path, threads: usize) -> Result<RunReport> {
    if threads == 0 {
        return Err(Error::invalid("need at least one thread"));
    }
    std::fs::create_dir_all(out_dir.join("shards"))?;
    let manifest_path = out_dir.join("manifest.json");

    let manifest = match load_manifest(&manifest_path)? {
        Some(existing) if existing.matches(grid) => existing,
        _ => RunManifest::fresh(grid),
    };
    // The manifest is on disk before any scenario result.
    write_json_atomic(&manifest_path, &manifest)?;

    let pending: Vec<&ToyScenario> = grid
        .scenarios
        .iter()
        .filter(|s| {
            let sid = s.label();
            let done = manifest
                .scenarios
                .get(&sid)
                .map(|st| st.complete)
                .unwrap_or(false);
            !done || !shard_path(out_dir, &sid).exists()
        })
        .collect();
    let scenarios_run = pending.len();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let manifest = Mutex::new(manifest);
    pool.install(|| -> Result<()> {
        pending
            .par_iter()
            .map(|scenario| {
                let sid = scenario.label();
                let t0 = Instant::now();
                let (rows, runtimes) = run_scenario(grid, scenario);
                write_csv_atomic(&shard_path(out_dir, &sid), &rows)?;
                write_csv_atomic(&shard_runtime_path(out_dir, &sid), &runtimes)?;
                let mut m = manifest.lock().expect("manifest lock");
                let status = m.scenarios.get_mut(&sid).expect("scenario in manifest");
                status.complete = true;
                status.wall_seconds = t0.elapsed().as_secs_f64();
                write_json_atomic(&manifest_path, &*m)
            })
            .collect::<Result<Vec<()>>>()?;
        Ok(())
    })?;

    // Merge in fixed scenario order, then sort; shard layout can never leak
    // scheduling into the merged bytes.
    let mut long_rows: Vec<LongRow> = Vec::new();
    let mut runtime_rows: Vec<RuntimeRow> = Vec::new();
    for scenario in &grid.scenarios {
        let sid = scenario.label();
        long_rows.extend(read_csv::<LongRow>(&shard_path(out_dir, &sid))?);
        runtime_rows.extend(read_csv::<RuntimeRow>(&shard_runtime_path(out_dir, &sid))?);
    }
    long_rows.sort_by_key(LongRow::sort_key);

    let long_csv = out_dir.join("long.csv");
    let runtimes_csv = out_dir.join("runtimes.csv");
    let summary_csv = out_dir.join("summary.csv");
    write_csv_atomic(&long_csv, &long_rows)?;
    write_csv_atomic(&runtimes_csv, &runtime_rows)?;
    let summary = summarize(&long_rows, grid)?;
    write_csv_atomic(&summary_csv, &summary)?;

    Ok(RunReport {
        long_csv,
        summary_csv,
        runtimes_csv,
        manifest_path,
        scenarios_total: grid.scenarios.len(),
        scenarios_run,
        long_rows: long_rows.len(),
        warnings: grid.warnings.clone(),
    })
}

/// Aggregate long rows into summary rows, one per (scenario, method,
/// tuning, coefficient) plus a pooled row per cell (empty coefficient).
///
/// Summaries are always computed from rows as persisted — the same path a
/// reader of the long CSV would take — never from in-memory state.
pub fn summarize(rows: &[LongRow], grid: &ScenarioGrid) -> Result<Vec<SummaryRow>> {
    let results = super::rebuild_results(rows, grid.alpha)?;

    let mut targets = TargetTable::default();
    for scenario in &grid.scenarios {
        targets.insert_full(&scenario.label(), scenario.beta_truth()?);
    }
    // Submodel targets ride along in the rows; regroup them per block.
    type BlockKey = (String, String, String, usize);
    let mut block_targets: BTreeMap<BlockKey, BTreeMap<usize, Option<f64>>> = BTreeMap::new();
    let mut block_selected: BTreeMap<BlockKey, Vec<usize>> = BTreeMap::new();
    for row in rows {
        let key = (
            row.scenario_id.clone(),
            row.method.clone(),
            row.tuning.clone(),
            row.iteration,
        );
        if row.selected == 1 {
            block_selected.entry(key.clone()).or_default().push(row.coef_index);
        }
        if row.target_kind.as_deref() == Some("submodel") && row.estimate.is_some() {
            block_targets
                .entry(key)
                .or_default()
                .insert(row.coef_index, row.target_value);
        }
    }
    let mut excluded: BTreeSet<BlockKey> = BTreeSet::new();
    for (key, coef_targets) in &block_targets {
        if coef_targets.values().any(|t| t.is_none()) {
            excluded.insert(key.clone());
            continue;
        }
        let subset: Vec<usize> = coef_targets.keys().copied().collect();
        let values: Vec<f64> = coef_targets.values().map(|t| t.unwrap()).collect();
        targets.insert_submodel(&key.0, &subset, values);
    }

    let scored: Vec<IterationResult> = results
        .iter()
        .filter(|r| {
            !excluded.contains(&(
                r.scenario_id.clone(),
                r.method.label().to_string(),
                r.tuning.clone(),
                r.iteration,
            ))
        })
        .cloned()
        .collect();

    let coverage = selective_coverage(&scored, &targets)?;
    let widths = sci_width(&results);
    let power = selective_power_type1(&scored, &targets)?;
    let quality = selection_quality(&results, &targets)?;

    // Iteration and failure counts per cell, straight from the rows.
    let mut cell_iters: BTreeMap<(String, String, String), BTreeSet<usize>> = BTreeMap::new();
    let mut cell_failures: BTreeMap<(String, String, String), BTreeSet<usize>> = BTreeMap::new();
    for row in rows {
        let key = (
            row.scenario_id.clone(),
            row.method.clone(),
            row.tuning.clone(),
        );
        cell_iters.entry(key.clone()).or_default().insert(row.iteration);
        if !row.flags.is_empty() {
            cell_failures.entry(key).or_default().insert(row.iteration);
        }
    }

    #[derive(Default)]
    struct Partial {
        reported: usize,
        covered: usize,
        coverage: Option<f64>,
        coverage_se: Option<f64>,
        degenerate: usize,
        width_n: usize,
        width_excluded: usize,
        width_median: Option<f64>,
        width_iqr: Option<f64>,
        power_n: usize,
        power: Option<f64>,
        type1_n: usize,
        type1: Option<f64>,
        mean_model_size: Option<f64>,
        nonempty: Option<usize>,
        p_true: Option<f64>,
        tpr: Option<f64>,
        fpr: Option<f64>,
    }
    let mut cells: BTreeMap<crate::metrics::CellKey, Partial> = BTreeMap::new();
    for c in coverage {
        let e = cells.entry(c.key.clone()).or_default();
        e.reported = c.reported;
        e.covered = c.covered;
        e.coverage = c.rate;
        e.coverage_se = c.mc_se;
        e.degenerate = c.degenerate;
    }
    for w in widths {
        let e = cells.entry(w.key.clone()).or_default();
        e.width_n = w.reported;
        e.width_excluded = w.excluded;
        e.width_median = w.median;
        e.width_iqr = w.iqr;
    }
    for pw in power {
        let e = cells.entry(pw.key.clone()).or_default();
        e.power_n = pw.power_n;
        e.power = pw.power;
        e.type1_n = pw.type1_n;
        e.type1 = pw.type1;
    }
    for q in quality {
        let e = cells.entry(q.key.clone()).or_default();
        e.mean_model_size = Some(q.mean_size);
        e.nonempty = Some(q.nonempty);
        e.p_true = q.p_true;
        e.tpr = q.tpr;
        e.fpr = q.fpr;
    }

    let mut out = Vec::with_capacity(cells.len());
    for (key, partial) in cells {
        let scenario = grid
            .scenario_by_id(&key.scenario_id)
            .ok_or_else(|| Error::invalid(format!("unknown scenario id {}", key.scenario_id)))?;
        let pooled_key = (
            key.scenario_id.clone(),
            key.method.to_string(),
            key.tuning.clone(),
        );
        let iterations = cell_iters.get(&pooled_key).map_or(0, |s| s.len());
        let failures = cell_failures.get(&pooled_key).map_or(0, |s| s.len());
        let failure_rate = if iterations == 0 {
            0.0
        } else {
            failures as f64 / iterations as f64
        };
        out.push(SummaryRow {
            scenario_id: key.scenario_id.clone(),
            n: scenario.n,
            p: scenario.p,
            rho: scenario.rho,
            censor_target: scenario.censor_target,
            baseline: scenario.baseline.label(),
            pattern: scenario.pattern.label(),
            lasso_flavor: flavor_label(&grid.lasso).to_string(),
            method: key.method.to_string(),
            tuning: key.tuning.clone(),
            coef_index: key.coef_index,
            iterations,
            reported: partial.reported,
            covered: partial.covered,
            coverage: partial.coverage,
            coverage_se: partial.coverage_se,
            degenerate: partial.degenerate,
            width_n: partial.width_n,
            width_excluded: partial.width_excluded,
            width_median: partial.width_median,
            width_iqr: partial.width_iqr,
            power_n: partial.power_n,
            power: partial.power,
            type1_n: partial.type1_n,
            type1: partial.type1,
            mean_model_size: partial.mean_model_size,
            nonempty: partial.nonempty,
            p_true: partial.p_true,
            tpr: partial.tpr,
            fpr: partial.fpr,
            failure_rate,
            flagged: (failure_rate > 0.2) as u8,
        });
    }
    Ok(out)
}
