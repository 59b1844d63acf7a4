//! Static SVG rendering of summary CSVs.
//!
//! Plots are views: every mark is a value taken verbatim from a summary row
//! (pooled rows only), never a recomputed statistic. Output is deterministic
//! byte for byte — fixed float formatting, BTreeMap iteration, no
//! timestamps — so identical inputs give identical files.
//!
//! Three figure families, one file each:
//! - `coverage_vs_n.svg`: selective coverage against sample size, one line
//!   per method, one panel per remaining factor combination.
//! - `width_vs_n.svg`: median interval width on a log10 scale.
//! - `power_type1_vs_n.svg`: selective power (solid) and type-1 error
//!   (dashed) against sample size.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::{write_bytes_atomic, SummaryRow};

const PANEL_W: f64 = 340.0;
const PANEL_H: f64 = 220.0;
const PANEL_GAP: f64 = 46.0;
const MARGIN: f64 = 56.0;
const LEGEND_H: f64 = 26.0;

const PALETTE: [&str; 7] = [
    "#1b6ca8", "#d1495b", "#2e933c", "#8a4fff", "#e0861a", "#3bb4c1", "#6b4226",
];

/// Files written plus anything skipped.
#[derive(Debug, Clone)]
pub struct PlotReport {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum YAxis {
    /// Fixed [0, 1] scale for rates.
    Unit,
    /// log10 scale spanning the data, for widths.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LineStyle {
    Solid,
    Dashed,
}

/// One drawable line: a method's values against n within one facet.
struct Series {
    method: String,
    style: LineStyle,
    points: Vec<(f64, f64)>,
}

fn escape_xml(raw: &str) -> String {
    raw.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Everything that distinguishes panels once n is on the x axis and method
/// is the line color.
fn facet_label(row: &SummaryRow) -> String {
    format!(
        "p={} rho={} cens={} {} {} {} {}",
        row.p,
        row.rho,
        row.censor_target,
        row.baseline,
        row.pattern,
        row.lasso_flavor,
        row.tuning
    )
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

/// Assemble one figure from per-facet series. Returns None when no facet
/// has a drawable point.
fn render_figure(
    title: &str,
    y_label: &str,
    y_axis: YAxis,
    facets: &BTreeMap<String, Vec<Series>>,
) -> Option<String> {
    let drawable: BTreeMap<&String, &Vec<Series>> = facets
        .iter()
        .filter(|(_, series)| series.iter().any(|s| !s.points.is_empty()))
        .collect();
    if drawable.is_empty() {
        return None;
    }

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut methods: BTreeSet<String> = BTreeSet::new();
    for series in drawable.values() {
        for s in series.iter() {
            methods.insert(s.method.clone());
            for &(x, y) in &s.points {
                xs.push(x);
                ys.push(y);
            }
        }
    }
    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let x_pad = if x_max > x_min { 0.05 * (x_max - x_min) } else { 1.0 };
    let (x_lo, x_hi) = (x_min - x_pad, x_max + x_pad);
    let (y_lo, y_hi) = match y_axis {
        YAxis::Unit => (0.0, 1.0),
        YAxis::Log => {
            let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min).log10();
            let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max).log10();
            (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
        }
    };
    let to_y = |v: f64| match y_axis {
        YAxis::Unit => v,
        YAxis::Log => v.log10(),
    };

    let n_panels = drawable.len();
    let cols = (n_panels as f64).sqrt().ceil() as usize;
    let rows = n_panels.div_ceil(cols);
    let width = MARGIN * 2.0 + cols as f64 * PANEL_W + (cols - 1) as f64 * PANEL_GAP;
    let height =
        MARGIN * 2.0 + LEGEND_H + rows as f64 * PANEL_H + (rows - 1) as f64 * PANEL_GAP + 24.0;

    let color: BTreeMap<&String, &str> = methods
        .iter()
        .enumerate()
        .map(|(i, m)| (m, PALETTE[i % PALETTE.len()]))
        .collect();

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"sans-serif\">\n",
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        fmt(width / 2.0),
        escape_xml(title)
    ));

    // Legend: one swatch per method, in method name order.
    let mut lx = MARGIN;
    let ly = 40.0;
    for m in &methods {
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2.5\"/>\n",
            fmt(lx),
            fmt(ly),
            fmt(lx + 22.0),
            fmt(ly),
            color[m]
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n",
            fmt(lx + 27.0),
            fmt(ly + 4.0),
            escape_xml(m)
        ));
        lx += 34.0 + 7.0 * m.len() as f64;
    }

    for (panel_idx, (facet, series)) in drawable.iter().enumerate() {
        let row = panel_idx / cols;
        let col = panel_idx % cols;
        let ox = MARGIN + col as f64 * (PANEL_W + PANEL_GAP);
        let oy = MARGIN + LEGEND_H + row as f64 * (PANEL_H + PANEL_GAP);
        let sx = |x: f64| ox + (x - x_lo) / (x_hi - x_lo) * PANEL_W;
        let sy = |y: f64| oy + PANEL_H - (to_y(y) - y_lo) / (y_hi - y_lo) * PANEL_H;

        svg.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
            fmt(ox),
            fmt(oy),
            fmt(PANEL_W),
            fmt(PANEL_H)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
            fmt(ox + PANEL_W / 2.0),
            fmt(oy - 6.0),
            escape_xml(facet)
        ));

        // y gridlines and tick labels.
        let ticks: Vec<f64> = match y_axis {
            YAxis::Unit => vec![0.0, 0.25, 0.5, 0.75, 1.0],
            YAxis::Log => {
                let mut t = Vec::new();
                let mut k = y_lo;
                while k <= y_hi + 1e-9 {
                    t.push(k);
                    k += 1.0;
                }
                t
            }
        };
        for t in &ticks {
            let y = oy + PANEL_H - (t - y_lo) / (y_hi - y_lo) * PANEL_H;
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#ddd\"/>\n",
                fmt(ox),
                fmt(y),
                fmt(ox + PANEL_W),
                fmt(y)
            ));
            let label = match y_axis {
                YAxis::Unit => format!("{t:.2}"),
                YAxis::Log => format!("1e{t:.0}"),
            };
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"end\">{}</text>\n",
                fmt(ox - 4.0),
                fmt(y + 3.0),
                label
            ));
        }
        // x ticks at observed sample sizes.
        let mut x_ticks: Vec<f64> = xs.clone();
        x_ticks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        x_ticks.dedup();
        for x in &x_ticks {
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\">{}</text>\n",
                fmt(sx(*x)),
                fmt(oy + PANEL_H + 13.0),
                format_args!("{x:.0}")
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">n</text>\n",
            fmt(ox + PANEL_W / 2.0),
            fmt(oy + PANEL_H + 28.0)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\" \
             transform=\"rotate(-90 {} {})\">{}</text>\n",
            fmt(ox - 38.0),
            fmt(oy + PANEL_H / 2.0),
            fmt(ox - 38.0),
            fmt(oy + PANEL_H / 2.0),
            escape_xml(y_label)
        ));

        for s in series.iter() {
            if s.points.is_empty() {
                continue;
            }
            let stroke = color[&s.method];
            let dash = match s.style {
                LineStyle::Solid => "",
                LineStyle::Dashed => " stroke-dasharray=\"5 3\"",
            };
            if s.points.len() > 1 {
                let path: Vec<String> = s
                    .points
                    .iter()
                    .map(|&(x, y)| format!("{},{}", fmt(sx(x)), fmt(sy(y))))
                    .collect();
                svg.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"{}/>\n",
                    path.join(" "),
                    stroke,
                    dash
                ));
            }
            for &(x, y) in &s.points {
                svg.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
                    fmt(sx(x)),
                    fmt(sy(y)),
                    stroke
                ));
            }
        }
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

/// Collect one series per (facet, method) from pooled rows, reading the
/// y value with `value`; rows where it is absent are dropped.
fn collect_series<F>(
    rows: &[SummaryRow],
    style: LineStyle,
    value: F,
) -> BTreeMap<String, Vec<Series>>
where
    F: Fn(&SummaryRow) -> Option<f64>,
{
    let mut by_facet: BTreeMap<String, BTreeMap<String, Vec<(f64, f64)>>> = BTreeMap::new();
    for row in rows {
        if row.coef_index.is_some() {
            continue;
        }
        if let Some(v) = value(row) {
            by_facet
                .entry(facet_label(row))
                .or_default()
                .entry(row.method.clone())
                .or_default()
                .push((row.n as f64, v));
        }
    }
    by_facet
        .into_iter()
        .map(|(facet, methods)| {
            let series = methods
                .into_iter()
                .map(|(method, mut points)| {
                    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    Series {
                        method,
                        style,
                        points,
                    }
                })
                .collect();
            (facet, series)
        })
        .collect()
}

/// Render the three figure families from summary rows. An empty summary
/// writes nothing and returns a warning.
pub fn emit_plots(summary: &[SummaryRow], out_dir: &Path) -> Result<PlotReport> {
    let mut report = PlotReport {
        files: Vec::new(),
        warnings: Vec::new(),
    };
    if summary.is_empty() {
        report
            .warnings
            .push("summary is empty; no plots emitted".into());
        return Ok(report);
    }
    std::fs::create_dir_all(out_dir)?;

    let figures: Vec<(&str, Option<String>)> = vec![
        (
            "coverage_vs_n.svg",
            render_figure(
                "Selective coverage by sample size",
                "coverage",
                YAxis::Unit,
                &collect_series(summary, LineStyle::Solid, |r| r.coverage),
            ),
        ),
        (
            "width_vs_n.svg",
            render_figure(
                "Median interval width by sample size (log scale)",
                "median width",
                YAxis::Log,
                &collect_series(summary, LineStyle::Solid, |r| {
                    r.width_median.filter(|w| *w > 0.0)
                }),
            ),
        ),
        ("power_type1_vs_n.svg", {
            let mut facets = collect_series(summary, LineStyle::Solid, |r| r.power);
            for (facet, series) in collect_series(summary, LineStyle::Dashed, |r| r.type1) {
                facets.entry(facet).or_default().extend(series);
            }
            render_figure(
                "Selective power (solid) and type-1 error (dashed)",
                "rate",
                YAxis::Unit,
                &facets,
            )
        }),
    ];
    for (name, svg) in figures {
        match svg {
            Some(svg) => {
                let path = out_dir.join(name);
                write_bytes_atomic(&path, svg.as_bytes())?;
                report.files.push(path);
            }
            None => report
                .warnings
                .push(format!("no drawable values for {name}; skipped")),
        }
    }
    Ok(report)
}
