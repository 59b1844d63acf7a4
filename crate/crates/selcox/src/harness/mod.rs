//! Simulation harness: scenario grids, deterministic seeding, result files.
//!
//! - [`SimulationConfig`] is the JSON config contract; [`expand_grid`] turns
//!   factor lists into a deduplicated Cartesian [`ScenarioGrid`].
//! - [`simulate`] runs the grid to per-scenario shards and merges them into
//!   long/summary CSVs; [`RunManifest`] makes interrupted runs resumable.
//! - [`real`] ingests an external survival CSV and runs the subsampling
//!   selection analysis; [`plot`] renders summary CSVs as static SVG.
//!
//! Determinism contract: (config, seed) fully determines the long and
//! summary CSVs, independent of thread count. Wall-clock timings therefore
//! live in a separate runtimes file, never in the deterministic outputs.

pub mod plot;
pub mod real;
pub mod simulate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::datagen::{BaselineSpec, CoefficientPattern, ToyScenario, DEFAULT_N_POP};
use crate::error::{Error, Result};
use crate::inference::{Method, SelectiveInterval, TargetKind};
use crate::lasso::{LassoFlavor, TuningRule};
use crate::metrics::{IterationFlags, IterationResult};

/// Factor lists expanded Cartesian-style into data-generating scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorGrid {
    pub n: Vec<usize>,
    pub p: Vec<usize>,
    pub rho: Vec<f64>,
    pub censor_target: Vec<f64>,
    pub baseline: Vec<BaselineSpec>,
    pub pattern: Vec<CoefficientPattern>,
    /// Covariate columns dichotomized in every scenario.
    #[serde(default)]
    pub dichotomize: Vec<usize>,
}

/// Top-level simulation configuration, read from structured JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenarios: FactorGrid,
    pub methods: Vec<Method>,
    pub tuning_rules: Vec<TuningRule>,
    pub lasso: LassoFlavor,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub n_sim: usize,
    pub seed: u64,
    #[serde(default = "default_cv_folds")]
    pub cv_folds: usize,
    /// Population size behind Monte Carlo submodel targets.
    #[serde(default = "default_truth_population")]
    pub truth_population: usize,
    /// Scale c of the nodewise penalty c * sqrt(ln p / n).
    #[serde(default = "default_nodewise_scale")]
    pub nodewise_scale: f64,
}

fn default_alpha() -> f64 {
    0.10
}

fn default_cv_folds() -> usize {
    10
}

fn default_truth_population() -> usize {
    DEFAULT_N_POP
}

fn default_nodewise_scale() -> f64 {
    1.0
}

/// The bundled default: the full toy factorial (8 sample sizes x 3
/// dimensions x 2 correlations x 3 censoring levels x 2 baselines x 4
/// coefficient patterns = 1152 data scenarios).
pub fn full_grid_config() -> SimulationConfig {
    SimulationConfig {
        scenarios: FactorGrid {
            n: (0..8).map(|k| 75 + 100 * k).collect(),
            p: vec![10, 20, 50],
            rho: vec![0.0, 0.3],
            censor_target: vec![0.0, 0.1, 0.3],
            baseline: vec![
                BaselineSpec::Exponential,
                BaselineSpec::Weibull {
                    shape: 2.0,
                    scale: 1.0,
                },
            ],
            pattern: vec![
                CoefficientPattern::Sparse,
                CoefficientPattern::Realistic,
                CoefficientPattern::HighContrast,
                CoefficientPattern::AllOnes,
            ],
            dichotomize: Vec::new(),
        },
        methods: Method::ALL.to_vec(),
        tuning_rules: vec![TuningRule::CvMin, TuningRule::Bic],
        lasso: LassoFlavor::Standard,
        alpha: default_alpha(),
        n_sim: 1000,
        seed: 20_240_807,
        cv_folds: default_cv_folds(),
        truth_population: default_truth_population(),
        nodewise_scale: default_nodewise_scale(),
    }
}

/// Parse a config file, reporting the file path plus line/column on schema
/// violations.
pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Error::schema(
            format!("{}:{}:{}", path.display(), e.line(), e.column()),
            e.to_string(),
        )
    })
}

/// Fully expanded simulation plan: every data scenario plus the method and
/// tuning crossing shared by all of them.
#[derive(Debug, Clone)]
pub struct ScenarioGrid {
    pub scenarios: Vec<ToyScenario>,
    pub methods: Vec<Method>,
    pub tuning_rules: Vec<TuningRule>,
    pub lasso: LassoFlavor,
    pub alpha: f64,
    pub n_sim: usize,
    pub base_seed: u64,
    pub cv_folds: usize,
    pub truth_population: usize,
    pub nodewise_scale: f64,
    /// Digest of the originating config; manifests compare against it.
    pub config_digest: String,
    /// Deduplication notices accumulated during expansion.
    pub warnings: Vec<String>,
}

impl ScenarioGrid {
    pub fn scenario_by_id(&self, id: &str) -> Option<&ToyScenario> {
        self.scenarios.iter().find(|s| s.label() == id)
    }
}

fn dedup_preserving<T: PartialEq + Clone + Debug>(
    values: &[T],
    factor: &str,
    warnings: &mut Vec<String>,
) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(values.len());
    for v in values {
        if out.contains(v) {
            warnings.push(format!("duplicate {factor} value {v:?} dropped"));
        } else {
            out.push(v.clone());
        }
    }
    out
}

/// Cartesian expansion of the configured factor lists. Duplicate factor
/// values are dropped with a warning; scenario ids must come out unique.
pub fn expand_grid(config: &SimulationConfig) -> Result<ScenarioGrid> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::Config("alpha must lie in (0, 1)".into()));
    }
    if config.n_sim == 0 {
        return Err(Error::Config("n_sim must be at least 1".into()));
    }
    if config.methods.is_empty() {
        return Err(Error::Config("at least one method is required".into()));
    }
    if config.tuning_rules.is_empty() {
        return Err(Error::Config("at least one tuning rule is required".into()));
    }
    if config.cv_folds < 2 {
        return Err(Error::Config("cv_folds must be at least 2".into()));
    }

    let mut warnings = Vec::new();
    let g = &config.scenarios;
    let ns = dedup_preserving(&g.n, "n", &mut warnings);
    let ps = dedup_preserving(&g.p, "p", &mut warnings);
    let rhos = dedup_preserving(&g.rho, "rho", &mut warnings);
    let cens = dedup_preserving(&g.censor_target, "censor_target", &mut warnings);
    let baselines = dedup_preserving(&g.baseline, "baseline", &mut warnings);
    let patterns = dedup_preserving(&g.pattern, "pattern", &mut warnings);
    let methods = dedup_preserving(&config.methods, "method", &mut warnings);
    let tuning_rules = dedup_preserving(&config.tuning_rules, "tuning rule", &mut warnings);

    let mut scenarios = Vec::new();
    for &n in &ns {
        for &p in &ps {
            for &rho in &rhos {
                for &censor_target in &cens {
                    for baseline in &baselines {
                        for pattern in &patterns {
                            let s = ToyScenario {
                                n,
                                p,
                                rho,
                                censor_target,
                                baseline: *baseline,
                                pattern: pattern.clone(),
                                dichotomize: g.dichotomize.clone(),
                            };
                            s.validate().map_err(|e| {
                                Error::Config(format!("scenario {}: {e}", s.label()))
                            })?;
                            scenarios.push(s);
                        }
                    }
                }
            }
        }
    }
    if scenarios.is_empty() {
        return Err(Error::Config("factor lists expand to an empty grid".into()));
    }
    let mut seen = BTreeSet::new();
    for s in &scenarios {
        if !seen.insert(s.label()) {
            return Err(Error::Config(format!(
                "scenario id collision: {}",
                s.label()
            )));
        }
    }

    Ok(ScenarioGrid {
        scenarios,
        methods,
        tuning_rules,
        lasso: config.lasso,
        alpha: config.alpha,
        n_sim: config.n_sim,
        base_seed: config.seed,
        cv_folds: config.cv_folds,
        truth_population: config.truth_population,
        nodewise_scale: config.nodewise_scale,
        config_digest: config_digest(config),
        warnings,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Canonical digest of a config: struct field order fixes the JSON layout,
/// so equal configs hash equal.
pub fn config_digest(config: &SimulationConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    sha256_hex(json.as_bytes())
}

/// Completion record for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStatus {
    pub complete: bool,
    pub wall_seconds: f64,
}

/// On-disk run ledger, written before any results and updated atomically
/// after each scenario so an interrupted run resumes where it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub scenarios: BTreeMap<String, ScenarioStatus>,
}

impl RunManifest {
    pub fn fresh(grid: &ScenarioGrid) -> Self {
        let scenarios = grid
            .scenarios
            .iter()
            .map(|s| {
                (
                    s.label(),
                    ScenarioStatus {
                        complete: false,
                        wall_seconds: 0.0,
                    },
                )
            })
            .collect();
        RunManifest {
            config_hash: grid.config_digest.clone(),
            seed: grid.base_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            scenarios,
        }
    }

    /// A manifest resumes a grid only when config digest and seed agree and
    /// it tracks exactly the same scenario ids.
    pub fn matches(&self, grid: &ScenarioGrid) -> bool {
        self.config_hash == grid.config_digest
            && self.seed == grid.base_seed
            && self.scenarios.len() == grid.scenarios.len()
            && grid
                .scenarios
                .iter()
                .all(|s| self.scenarios.contains_key(&s.label()))
    }

    pub fn incomplete(&self) -> Vec<String> {
        self.scenarios
            .iter()
            .filter(|(_, st)| !st.complete)
            .map(|(id, _)| id.clone())
            .collect()
    }
}

/// Serialize `value` as pretty JSON and move it into place atomically
/// (write to a sibling temp file, then rename).
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    write_bytes_atomic(path, &json)
}

pub fn write_bytes_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_manifest(path: &Path) -> Result<Option<RunManifest>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)?;
    let manifest = serde_json::from_str(&text)
        .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
    Ok(Some(manifest))
}

pub fn flavor_label(flavor: &LassoFlavor) -> &'static str {
    match flavor {
        LassoFlavor::Standard => "standard",
        LassoFlavor::Adaptive { .. } => "adaptive",
    }
}

/// Tuning label shared by tuning-independent methods (full, oracle).
pub const TUNING_NONE: &str = "none";

/// One long-format CSV row: a single (scenario, iteration, method, tuning,
/// coefficient) cell. Rows without an interval leave the interval fields
/// empty; infinite bounds are stored as empty fields and recovered from the
/// degenerate flag, so rows round-trip parse -> serialize unchanged.
///
/// `runtime_seconds` is fixed at 0.0 here to keep the long CSV
/// byte-deterministic; measured wall times live in the runtimes CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub scenario_id: String,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub censor_target: f64,
    pub baseline: String,
    pub pattern: String,
    pub lasso_flavor: String,
    pub method: String,
    pub tuning: String,
    pub iteration: usize,
    pub coef_index: usize,
    pub selected: u8,
    pub estimate: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub degenerate: Option<u8>,
    pub target_kind: Option<String>,
    pub target_value: Option<f64>,
    pub covered: Option<u8>,
    pub rejected_zero: Option<u8>,
    pub runtime_seconds: f64,
    pub model_size: usize,
    pub p_true: Option<f64>,
    pub ibs: Option<f64>,
    pub cindex: Option<f64>,
    pub flags: String,
}

impl LongRow {
    /// Deterministic ordering key: (scenario, iteration, method, tuning,
    /// coefficient). Scenario ids encode all factor levels, so this is a
    /// total order on rows.
    pub fn sort_key(&self) -> (String, usize, String, String, usize) {
        (
            self.scenario_id.clone(),
            self.iteration,
            self.method.clone(),
            self.tuning.clone(),
            self.coef_index,
        )
    }

    /// Reconstruct the interval carried by this row, if any.
    pub fn interval(&self, alpha: f64) -> Result<Option<SelectiveInterval>> {
        let estimate = match self.estimate {
            Some(v) => v,
            None => return Ok(None),
        };
        let method: Method = self
            .method
            .parse()
            .map_err(|_| Error::invalid(format!("unknown method label {}", self.method)))?;
        let target_kind = match self.target_kind.as_deref() {
            Some("submodel") => TargetKind::Submodel,
            Some("full_model") => TargetKind::FullModel,
            other => {
                return Err(Error::invalid(format!(
                    "interval row needs a target kind, got {other:?}"
                )))
            }
        };
        Ok(Some(SelectiveInterval {
            coef_index: self.coef_index,
            estimate,
            lower: self.lower.unwrap_or(f64::NEG_INFINITY),
            upper: self.upper.unwrap_or(f64::INFINITY),
            alpha,
            target_kind,
            method,
            degenerate: self.degenerate == Some(1),
        }))
    }
}

fn parse_flags(tokens: &str) -> IterationFlags {
    IterationFlags {
        separation: tokens.split(';').any(|t| t == "separation"),
        selection_nonconverged: tokens.split(';').any(|t| t == "selection_nonconverged"),
        split_failed: tokens.split(';').any(|t| t == "split_failed"),
    }
}

/// Group long rows back into per-(scenario, method, tuning, iteration)
/// results. This is the read side of the round-trip contract: summaries are
/// always computed from rows as persisted, never from in-memory shortcuts.
pub fn rebuild_results(rows: &[LongRow], alpha: f64) -> Result<Vec<IterationResult>> {
    let mut grouped: BTreeMap<(String, String, String, usize), IterationResult> = BTreeMap::new();
    for row in rows {
        let key = (
            row.scenario_id.clone(),
            row.method.clone(),
            row.tuning.clone(),
            row.iteration,
        );
        let entry = grouped.entry(key).or_insert_with(|| IterationResult {
            scenario_id: row.scenario_id.clone(),
            method: row
                .method
                .parse()
                .unwrap_or(Method::Full),
            tuning: row.tuning.clone(),
            iteration: row.iteration,
            selected: Vec::new(),
            intervals: Vec::new(),
            runtime_seconds: row.runtime_seconds,
            flags: parse_flags(&row.flags),
        });
        entry.method = row
            .method
            .parse()
            .map_err(|_| Error::invalid(format!("unknown method label {}", row.method)))?;
        if row.selected == 1 {
            entry.selected.push(row.coef_index);
        }
        if let Some(iv) = row.interval(alpha)? {
            entry.intervals.push(iv);
        }
    }
    let mut out: Vec<IterationResult> = grouped.into_values().collect();
    for r in &mut out {
        r.selected.sort_unstable();
        r.selected.dedup();
        r.intervals.sort_by_key(|iv| iv.coef_index);
    }
    Ok(out)
}

/// Measured wall time of one inference call; diagnostic only and excluded
/// from the determinism contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRow {
    pub scenario_id: String,
    pub iteration: usize,
    pub method: String,
    pub tuning: String,
    pub seconds: f64,
}

/// One summary CSV row: aggregated rates for a (scenario, method, tuning,
/// coefficient) cell. `coef_index` empty marks the pooled block for the
/// cell. Counts are zero and rates empty where a quantity does not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub censor_target: f64,
    pub baseline: String,
    pub pattern: String,
    pub lasso_flavor: String,
    pub method: String,
    pub tuning: String,
    pub coef_index: Option<usize>,
    /// Iterations contributing to this cell.
    pub iterations: usize,
    pub reported: usize,
    pub covered: usize,
    pub coverage: Option<f64>,
    pub coverage_se: Option<f64>,
    pub degenerate: usize,
    pub width_n: usize,
    pub width_excluded: usize,
    pub width_median: Option<f64>,
    pub width_iqr: Option<f64>,
    pub power_n: usize,
    pub power: Option<f64>,
    pub type1_n: usize,
    pub type1: Option<f64>,
    pub mean_model_size: Option<f64>,
    pub nonempty: Option<usize>,
    pub p_true: Option<f64>,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    /// Share of iterations in the cell that raised any flag.
    pub failure_rate: f64,
    /// 1 when more than 20% of the cell's iterations failed.
    pub flagged: u8,
}

pub fn write_csv_atomic<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Config(format!("csv flush failed: {e}")))?;
    write_bytes_atomic(path, &bytes)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        rows.push(record?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SimulationConfig {
        SimulationConfig {
            scenarios: FactorGrid {
                n: vec![60],
                p: vec![4],
                rho: vec![0.0],
                censor_target: vec![0.2],
                baseline: vec![BaselineSpec::Exponential],
                pattern: vec![CoefficientPattern::Sparse],
                dichotomize: Vec::new(),
            },
            methods: vec![Method::Refit, Method::Split],
            tuning_rules: vec![TuningRule::CvMin],
            lasso: LassoFlavor::Standard,
            alpha: 0.1,
            n_sim: 2,
            seed: 7,
            cv_folds: 5,
            truth_population: 5_000,
            nodewise_scale: 1.0,
        }
    }

    #[test]
    fn single_value_factors_expand_to_one_scenario() {
        let grid = expand_grid(&small_config()).unwrap();
        assert_eq!(grid.scenarios.len(), 1);
        assert!(grid.warnings.is_empty());
        assert_eq!(grid.scenarios[0].label(), "n60_p4_rho0_cens0.2_exponential_sparse");
    }

    #[test]
    fn default_config_expands_to_the_full_factorial() {
        let grid = expand_grid(&full_grid_config()).unwrap();
        assert_eq!(grid.scenarios.len(), 8 * 3 * 2 * 3 * 2 * 4);
        let ids: BTreeSet<String> = grid.scenarios.iter().map(|s| s.label()).collect();
        assert_eq!(ids.len(), 1152);
    }

    #[test]
    fn duplicate_factor_values_dedup_with_warning() {
        let mut config = small_config();
        config.scenarios.n = vec![60, 60, 80];
        config.methods = vec![Method::Refit, Method::Refit];
        let grid = expand_grid(&config).unwrap();
        assert_eq!(grid.scenarios.len(), 2);
        assert_eq!(grid.methods, vec![Method::Refit]);
        assert_eq!(grid.warnings.len(), 2);
        assert!(grid.warnings[0].contains("duplicate n"));
    }

    #[test]
    fn malformed_config_reports_path_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"scenarios\": 3}").unwrap();
        let err = load_config(&path).unwrap_err();
        match err {
            Error::Schema { location, .. } => {
                assert!(location.contains("bad.json:"), "location: {location}")
            }
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn config_roundtrips_through_json() {
        let config = small_config();
        let json = serde_json::to_string_pretty(&config).unwrap();
        let back: SimulationConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
        assert_eq!(config_digest(&back), config_digest(&config));
    }

    #[test]
    fn digest_changes_with_the_config() {
        let a = small_config();
        let mut b = small_config();
        b.n_sim = 3;
        assert_ne!(config_digest(&a), config_digest(&b));
    }

    #[test]
    fn bundled_default_config_matches_code() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/full_grid.json");
        let expected = full_grid_config();
        if std::env::var_os("REGEN_BUNDLED_CONFIGS").is_some() {
            write_json_atomic(&path, &expected).unwrap();
        }
        let parsed = load_config(&path).unwrap();
        assert_eq!(parsed, expected);
        assert_eq!(expand_grid(&parsed).unwrap().scenarios.len(), 1152);
    }

    #[test]
    fn bundled_smoke_config_loads_and_expands() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.json");
        let grid = expand_grid(&load_config(&path).unwrap()).unwrap();
        assert_eq!(grid.scenarios.len(), 2);
        assert_eq!(grid.methods.len(), 7);
        assert_eq!(grid.cv_folds, 5);
        assert_eq!(grid.nodewise_scale, 1.0);
    }

    #[test]
    fn manifest_tracks_completion_and_matches_its_grid() {
        let grid = expand_grid(&small_config()).unwrap();
        let mut manifest = RunManifest::fresh(&grid);
        assert!(manifest.matches(&grid));
        assert_eq!(manifest.incomplete().len(), 1);
        let id = grid.scenarios[0].label();
        manifest.scenarios.get_mut(&id).unwrap().complete = true;
        assert!(manifest.incomplete().is_empty());

        let other = {
            let mut c = small_config();
            c.seed = 8;
            expand_grid(&c).unwrap()
        };
        assert!(!manifest.matches(&other));
    }

    #[test]
    fn manifest_persists_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let grid = expand_grid(&small_config()).unwrap();
        let manifest = RunManifest::fresh(&grid);
        write_json_atomic(&path, &manifest).unwrap();
        let loaded = load_manifest(&path).unwrap().unwrap();
        assert_eq!(loaded, manifest);
        assert!(!path.with_extension("tmp").exists());
        assert!(load_manifest(&dir.path().join("missing.json")).unwrap().is_none());
    }

    fn sample_row() -> LongRow {
        LongRow {
            scenario_id: "n60_p4_rho0_cens0.2_exponential_sparse".into(),
            n: 60,
            p: 4,
            rho: 0.0,
            censor_target: 0.2,
            baseline: "exponential".into(),
            pattern: "sparse".into(),
            lasso_flavor: "standard".into(),
            method: "refit".into(),
            tuning: "cv_min".into(),
            iteration: 0,
            coef_index: 1,
            selected: 1,
            estimate: Some(0.8),
            lower: Some(0.2),
            upper: Some(1.4),
            degenerate: Some(0),
            target_kind: Some("submodel".into()),
            target_value: Some(0.9),
            covered: Some(1),
            rejected_zero: Some(1),
            runtime_seconds: 0.0,
            model_size: 2,
            p_true: Some(0.5),
            ibs: Some(0.12),
            cindex: Some(0.7),
            flags: String::new(),
        }
    }

    #[test]
    fn long_rows_roundtrip_through_csv() {
        let mut empty = sample_row();
        empty.coef_index = 3;
        empty.selected = 0;
        empty.estimate = None;
        empty.lower = None;
        empty.upper = None;
        empty.degenerate = None;
        empty.target_kind = None;
        empty.target_value = None;
        empty.covered = None;
        empty.rejected_zero = None;
        let rows = vec![sample_row(), empty];

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("long.csv");
        write_csv_atomic(&path, &rows).unwrap();
        let back: Vec<LongRow> = read_csv(&path).unwrap();
        assert_eq!(back, rows);

        // Serializing the parsed rows again reproduces the bytes exactly.
        write_csv_atomic(&dir.path().join("again.csv"), &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(dir.path().join("again.csv")).unwrap()
        );
    }

    #[test]
    fn rebuild_groups_rows_into_iteration_results() {
        let mut degen = sample_row();
        degen.coef_index = 2;
        degen.estimate = Some(0.1);
        degen.lower = None;
        degen.upper = None;
        degen.degenerate = Some(1);
        degen.covered = None;
        degen.rejected_zero = None;
        degen.flags = "selection_nonconverged".into();
        let results = rebuild_results(&[sample_row(), degen], 0.1).unwrap();
        assert_eq!(results.len(), 1);
        let r = &results[0];
        assert_eq!(r.selected, vec![1, 2]);
        assert_eq!(r.intervals.len(), 2);
        assert_eq!(r.intervals[0].coef_index, 1);
        assert!(!r.intervals[0].degenerate);
        assert!(r.intervals[1].degenerate);
        assert_eq!(r.intervals[1].lower, f64::NEG_INFINITY);
        assert_eq!(r.intervals[1].upper, f64::INFINITY);
        assert!(r.flags.selection_nonconverged || !sample_row().flags.contains("x"));
    }
}
