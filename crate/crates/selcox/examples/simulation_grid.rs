//! Run a small simulation grid end to end: expand a config into scenarios,
//! execute every (scenario, iteration, method, tuning) cell with per-cell
//! seeding, and read coverage off the summary CSV.
//!
//! The same machinery backs `selcox simulate`; rerunning with the same
//! config and seed reproduces the output byte for byte, whatever the
//! thread count.
//!
//! Run with `cargo run --release --example simulation_grid`.

use selcox::datagen::{BaselineSpec, CoefficientPattern};
use selcox::harness::simulate::run_simulation;
use selcox::harness::{expand_grid, read_csv, FactorGrid, SimulationConfig, SummaryRow};
use selcox::inference::Method;
use selcox::lasso::{LassoFlavor, TuningRule};
use selcox::Result;

fn main() -> Result<()> {
    let config = SimulationConfig {
        scenarios: FactorGrid {
            n: vec![100, 200],
            p: vec![6],
            rho: vec![0.3],
            censor_target: vec![0.2],
            baseline: vec![BaselineSpec::Exponential],
            pattern: vec![CoefficientPattern::Sparse],
            dichotomize: vec![],
        },
        methods: vec![Method::Refit, Method::Split, Method::ExactPsi],
        tuning_rules: vec![TuningRule::CvMin],
        lasso: LassoFlavor::Standard,
        alpha: 0.10,
        n_sim: 20,
        seed: 42,
        cv_folds: 5,
        truth_population: 20_000,
        nodewise_scale: 1.0,
    };
    let grid = expand_grid(&config)?;
    println!(
        "{} scenarios x {} iterations, digest {}",
        grid.scenarios.len(),
        grid.n_sim,
        &grid.config_digest[..12]
    );

    let out = std::env::temp_dir().join("selcox_simulation_grid_example");
    let report = run_simulation(&grid, &out, 2)?;
    println!(
        "executed {} of {} scenarios, {} long rows -> {}",
        report.scenarios_run,
        report.scenarios_total,
        report.long_rows,
        report.long_csv.display()
    );

    // Pooled rows (coef_index empty) aggregate over coefficients.
    let summary: Vec<SummaryRow> = read_csv(&report.summary_csv)?;
    println!(
        "\n{:>24} {:>10} {:>9} {:>9} {:>7}",
        "scenario", "method", "coverage", "width", "size"
    );
    for row in summary.iter().filter(|r| r.coef_index.is_none()) {
        println!(
            "{:>24} {:>10} {:>9} {:>9} {:>7}",
            format!("n={} p={}", row.n, row.p),
            row.method,
            row.coverage.map_or("-".into(), |c| format!("{c:.3}")),
            row.width_median.map_or("-".into(), |w| format!("{w:.3}")),
            row.mean_model_size.map_or("-".into(), |s| format!("{s:.2}")),
        );
    }
    Ok(())
}
