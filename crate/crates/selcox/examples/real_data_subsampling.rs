//! Stability-style analysis of a survival CSV: draw without-replacement
//! subsamples, run the lasso on each, and tabulate how often every
//! covariate is selected alongside per-subsample confidence intervals.
//!
//! The example writes a small synthetic CSV first so it runs out of the
//! box; point `load_real_dataset` at your own file in practice.
//!
//! Run with `cargo run --release --example real_data_subsampling`.

use std::io::Write;

use selcox::harness::real::{
    analyze_real, load_real_dataset, parse_covariate_spec, RealAnalysisOptions,
};
use selcox::inference::Method;
use selcox::seed::derive_rng;
use selcox::Result;

fn write_demo_csv(path: &std::path::Path) -> Result<()> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let mut rng = derive_rng(&["real-data-example"]);
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "time,status,age,biomarker,noise,stage")?;
    for _ in 0..400 {
        let age: f64 = 60.0 + 10.0 * rng.sample::<f64, _>(StandardNormal);
        let biomarker: f64 = rng.sample(StandardNormal);
        let noise: f64 = rng.sample(StandardNormal);
        let stage = ["I", "II", "III"][rng.gen_range(0..3)];
        let eta = 0.03 * (age - 60.0)
            + 0.9 * biomarker
            + match stage {
                "II" => 0.5,
                "III" => 1.0,
                _ => 0.0,
            };
        let u: f64 = rng.gen_range(0.0..1.0);
        let event_time = -u.ln() / eta.exp();
        let censor_time = -rng.gen_range(0.0f64..1.0).ln() / 0.3;
        let (time, status) = if event_time <= censor_time {
            (event_time, 1)
        } else {
            (censor_time, 0)
        };
        writeln!(
            file,
            "{time:.6},{status},{age:.3},{biomarker:.3},{noise:.3},{stage}"
        )?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let csv = std::env::temp_dir().join("selcox_real_data_example.csv");
    write_demo_csv(&csv)?;

    // Categorical columns become reference-coded dummies named
    // "stage=II", "stage=III"; the first sorted level is the reference.
    let spec = parse_covariate_spec("age:num,biomarker:num,noise:num,stage:cat")?;
    let design = load_real_dataset(&csv, "time", "status", &spec)?;
    println!(
        "{} rows, columns: {:?}",
        design.times.len(),
        design.column_names
    );

    let opts = RealAnalysisOptions {
        n_subsamples: 20,
        methods: vec![Method::Refit],
        seed: 7,
        ..RealAnalysisOptions::default()
    };
    let report = analyze_real(&design, &opts)?;
    for warning in &report.warnings {
        println!("warning: {warning}");
    }

    // Rows are ordered by increasing median |standardized estimate|, so
    // the strongest signals print last.
    println!(
        "\n{:>12} {:>10} {:>12}",
        "covariate", "selected%", "median|est|"
    );
    for row in &report.frequencies {
        println!(
            "{:>12} {:>10.1} {:>12.4}",
            row.covariate, row.frequency_pct, row.median_abs_estimate
        );
    }

    let shown = 6.min(report.intervals.len());
    println!("\nfirst {shown} of {} subsample intervals:", report.intervals.len());
    for row in &report.intervals[..shown] {
        println!(
            "  subsample {:>2} {:>8} {:>12}: {:>7.3} in [{:>7.3}, {:>7.3}]",
            row.subsample,
            row.method,
            row.covariate,
            row.estimate,
            row.lower.unwrap_or(f64::NEG_INFINITY),
            row.upper.unwrap_or(f64::INFINITY)
        );
    }
    Ok(())
}
