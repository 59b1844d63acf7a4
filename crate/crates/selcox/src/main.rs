//! Command-line front end for the selcox harness.
//!
//! Four subcommands, all thin wrappers over library calls:
//!
//! - `simulate`: run a scenario grid from a JSON config and write the
//!   long/summary/runtimes CSVs plus a resume manifest.
//! - `analyze-real`: subsampled selection analysis of a survival CSV.
//! - `plot`: render SVG figures from a summary CSV.
//! - `calibrate-lambda`: print a per-scenario fixed-lambda table.
//!
//! Human-readable progress goes to stderr; machine-readable output (paths,
//! the calibration table) goes to stdout.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use selcox::harness::real::{analyze_real_csv, parse_covariate_spec, RealAnalysisOptions};
use selcox::harness::{
    expand_grid, load_config, read_csv, write_csv_atomic, write_json_atomic,
};
use selcox::harness::plot::emit_plots;
use selcox::harness::simulate::run_simulation;
use selcox::harness::SummaryRow;
use selcox::inference::Method;
use selcox::lasso::{calibrate_fixed_lambda, LassoFlavor, TuningRule};
use selcox::seed::derive_rng;
use selcox::{Error, Result};

#[derive(Parser)]
#[command(
    name = "selcox",
    version,
    about = "Penalized Cox regression with post-selection inference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation grid described by a JSON config.
    Simulate {
        /// Path to the JSON configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for CSVs, shards, and the manifest.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        threads: Option<usize>,
        /// Override the config's replicate count.
        #[arg(long)]
        nsim: Option<usize>,
    },
    /// Subsampled variable-selection analysis of a survival CSV.
    AnalyzeReal {
        /// Input CSV with one row per subject.
        #[arg(long)]
        data: PathBuf,
        /// Column holding follow-up times.
        #[arg(long = "time-col")]
        time_col: String,
        /// Column holding the event indicator (1/0, true/false, yes/no).
        #[arg(long = "event-col")]
        event_col: String,
        /// Covariates as comma-separated name:num or name:cat entries.
        #[arg(long)]
        covariates: String,
        /// Number of without-replacement subsamples.
        #[arg(long, default_value_t = 100)]
        subsamples: usize,
        /// Fraction of rows drawn into each subsample.
        #[arg(long, default_value_t = 0.8)]
        fraction: f64,
        /// Comma-separated inference methods to run per subsample.
        #[arg(long, default_value = "refit")]
        methods: String,
        /// Tuning rule: cv_min, cv_1se, aic, bic, or fixed=<value>.
        #[arg(long, default_value = "cv_min")]
        tuning: TuningRule,
        /// Adaptive-lasso exponent; omit for the standard lasso.
        #[arg(long)]
        gamma: Option<u32>,
        /// Interval miscoverage level.
        #[arg(long, default_value_t = 0.10)]
        alpha: f64,
        /// Base seed for subsample draws.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for the frequency and interval tables.
        #[arg(long)]
        out: PathBuf,
        /// Also write calibrated_scenario.json for matched simulations.
        #[arg(long)]
        export_scenario: bool,
    },
    /// Render SVG figures from a summary CSV.
    Plot {
        /// Summary CSV produced by `simulate`.
        #[arg(long)]
        summary: PathBuf,
        /// Output directory for the SVG files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a scenario_id,lambda table for fixed-lambda tuning.
    CalibrateLambda {
        /// Path to the JSON configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Population size drawn per scenario (must be at least 2n).
        #[arg(long, default_value_t = 20_000)]
        npop: usize,
        /// Calibration subsamples per scenario.
        #[arg(long, default_value_t = 25)]
        nreps: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            threads,
            nsim,
        } => simulate(&config, &out, seed, threads, nsim),
        Command::AnalyzeReal {
            data,
            time_col,
            event_col,
            covariates,
            subsamples,
            fraction,
            methods,
            tuning,
            gamma,
            alpha,
            seed,
            out,
            export_scenario,
        } => {
            let opts = RealAnalysisOptions {
                n_subsamples: subsamples,
                fraction,
                methods: parse_methods(&methods)?,
                tuning,
                flavor: match gamma {
                    Some(gamma) => LassoFlavor::Adaptive { gamma },
                    None => LassoFlavor::Standard,
                },
                alpha,
                seed,
                export_scenario,
                ..RealAnalysisOptions::default()
            };
            analyze_real(&data, &time_col, &event_col, &covariates, &opts, &out)
        }
        Command::Plot { summary, out } => plot(&summary, &out),
        Command::CalibrateLambda {
            config,
            seed,
            npop,
            nreps,
        } => calibrate_lambda(&config, seed, npop, nreps),
    }
}

fn simulate(
    config: &PathBuf,
    out: &PathBuf,
    seed: Option<u64>,
    threads: Option<usize>,
    nsim: Option<usize>,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(nsim) = nsim {
        cfg.n_sim = nsim;
    }
    let threads = threads.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    let grid = expand_grid(&cfg)?;
    for warning in &grid.warnings {
        eprintln!("warning: {warning}");
    }
    eprintln!(
        "running {} scenarios x {} iterations on {} thread(s)",
        grid.scenarios.len(),
        grid.n_sim,
        threads
    );
    let report = run_simulation(&grid, out, threads)?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    eprintln!(
        "executed {} of {} scenarios ({} resumed); {} long rows",
        report.scenarios_run,
        report.scenarios_total,
        report.scenarios_total - report.scenarios_run,
        report.long_rows
    );
    println!("{}", report.long_csv.display());
    println!("{}", report.summary_csv.display());
    println!("{}", report.runtimes_csv.display());
    Ok(())
}

fn parse_methods(spec: &str) -> Result<Vec<Method>> {
    let methods: Vec<Method> = spec
        .split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::invalid("at least one method is required"));
    }
    Ok(methods)
}

fn analyze_real(
    data: &PathBuf,
    time_col: &str,
    event_col: &str,
    covariates: &str,
    opts: &RealAnalysisOptions,
    out: &PathBuf,
) -> Result<()> {
    let spec = parse_covariate_spec(covariates)?;
    let report = analyze_real_csv(data, time_col, event_col, &spec, opts)?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    eprintln!(
        "analyzed {} rows; {} of {} subsamples completed",
        report.n_rows, report.n_completed, opts.n_subsamples
    );
    std::fs::create_dir_all(out)?;
    let frequencies = out.join("selection_frequencies.csv");
    write_csv_atomic(&frequencies, &report.frequencies)?;
    println!("{}", frequencies.display());
    let intervals = out.join("subsample_intervals.csv");
    write_csv_atomic(&intervals, &report.intervals)?;
    println!("{}", intervals.display());
    if let Some(calibrated) = &report.calibrated {
        let path = out.join("calibrated_scenario.json");
        write_json_atomic(&path, calibrated)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn plot(summary: &PathBuf, out: &PathBuf) -> Result<()> {
    let rows: Vec<SummaryRow> = read_csv(summary)?;
    let report = emit_plots(&rows, out)?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    for file in &report.files {
        println!("{}", file.display());
    }
    Ok(())
}

fn calibrate_lambda(
    config: &PathBuf,
    seed: Option<u64>,
    npop: usize,
    nreps: usize,
) -> Result<()> {
    let cfg = load_config(config)?;
    let grid = expand_grid(&cfg)?;
    for warning in &grid.warnings {
        eprintln!("warning: {warning}");
    }
    let base_seed = seed.unwrap_or(grid.base_seed);
    println!("scenario_id,lambda");
    for scenario in &grid.scenarios {
        let label = scenario.label();
        // The population must dwarf every subsample, whatever n the grid uses.
        let n_pop = npop.max(2 * scenario.n);
        let mut rng = derive_rng(&[&base_seed.to_string(), "calibrate-lambda", &label]);
        let lambda = calibrate_fixed_lambda(scenario, &grid.lasso, n_pop, nreps, &mut rng)?;
        println!("{label},{lambda:.6}");
        eprintln!("calibrated {label}");
    }
    Ok(())
}
