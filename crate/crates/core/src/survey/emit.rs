//! Survey artifacts.
//!
//! | file             | contents                                                    |
//! |------------------|-------------------------------------------------------------|
//! | `report.json`    | config, provenance, summary and every model record          |
//! | `histograms.csv` | `method,resolution,bin_lo,bin_hi,probability`               |
//! | `cdf.csv`        | `method,resolution,x,p` with `p = P(|ε| < x)`               |
//! | `histograms.svg` | ε histograms, one row per resolution, one column per method |
//! | `cdf.svg`        | CDF panels per method, plus all methods at the lowest level |
//!
//! Output bytes depend only on the report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{cdf_table, SurveyReport};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::upscale::Method;

/// Points on the shared `x` grid of the CDF tables.
pub const CDF_POINTS: usize = 201;

/// Common CDF grid: `0 ..= 1.01 · max|ε|` over every panel.
fn cdf_grid(report: &SurveyReport) -> Vec<f64> {
    let max = report
        .summary
        .panels
        .iter()
        .flat_map(|p| report.errors(p.method, p.resolution))
        .map(f64::abs)
        .fold(0.0, f64::max);
    let top = if max > 0.0 { 1.01 * max } else { 1.0 };
    (0..CDF_POINTS)
        .map(|k| top * k as f64 / (CDF_POINTS - 1) as f64)
        .collect()
}

pub fn write_histograms_csv(report: &SurveyReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "resolution", "bin_lo", "bin_hi", "probability"])?;
    for p in &report.summary.panels {
        let h = &p.histogram;
        for (k, prob) in h.probabilities.iter().enumerate() {
            w.write_record([
                p.method.name().to_string(),
                p.resolution.to_string(),
                h.edges[k].to_string(),
                h.edges[k + 1].to_string(),
                prob.to_string(),
            ])?;
        }
    }
    w.into_inner().map_err(|e| Error::Domain(e.to_string()))
}

pub fn write_cdf_csv(report: &SurveyReport) -> Result<Vec<u8>> {
    let grid = cdf_grid(report);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "resolution", "x", "p"])?;
    for p in &report.summary.panels {
        let probs = cdf_table(&report.errors(p.method, p.resolution), &grid)?;
        for (x, pr) in grid.iter().zip(probs) {
            w.write_record([
                p.method.name().to_string(),
                p.resolution.to_string(),
                x.to_string(),
                pr.to_string(),
            ])?;
        }
    }
    w.into_inner().map_err(|e| Error::Domain(e.to_string()))
}

const PANEL_W: f64 = 240.0;
const PANEL_H: f64 = 160.0;
const MARGIN: f64 = 40.0;
const COLOURS: [&str; 6] = ["#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6b4e9b", "#444444"];

struct Frame {
    x0: f64,
    y0: f64,
    xmin: f64,
    xmax: f64,
    ymax: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let span = (self.xmax - self.xmin).max(f64::MIN_POSITIVE);
        self.x0 + (x - self.xmin) / span * PANEL_W
    }
    fn py(&self, y: f64) -> f64 {
        self.y0 + PANEL_H - y / self.ymax * PANEL_H
    }

    fn axes(&self, svg: &mut String, title: &str, xlabel: &str) {
        let (x0, y0) = (self.x0, self.y0);
        let _ = write!(
            svg,
            r##"<rect x="{x0:.1}" y="{y0:.1}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#000"/>"##
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{title}</text>"#,
            x0 + PANEL_W / 2.0,
            y0 - 6.0
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="middle">{xlabel}</text>"#,
            x0 + PANEL_W / 2.0,
            y0 + PANEL_H + 24.0
        );
        for (v, anchor) in [(self.xmin, "start"), (self.xmax, "end")] {
            let _ = write!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="{anchor}">{}</text>"#,
                self.px(v),
                y0 + PANEL_H + 11.0,
                tick(v)
            );
        }
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end">{}</text>"#,
            x0 - 3.0,
            y0 + 8.0,
            tick(self.ymax)
        );
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn svg_open(w: f64, h: f64) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif"><rect width="100%" height="100%" fill="white"/>"#
    )
}

fn methods(report: &SurveyReport) -> Vec<Method> {
    report.config.methods.clone()
}

pub fn histograms_svg(report: &SurveyReport) -> String {
    let methods = methods(report);
    let ladder = report.config.ladder();
    let cell_w = PANEL_W + 2.0 * MARGIN;
    let cell_h = PANEL_H + 2.0 * MARGIN;
    let mut svg = svg_open(cell_w * methods.len() as f64, cell_h * ladder.len() as f64);
    for (row, &res) in ladder.iter().enumerate() {
        for (col, &m) in methods.iter().enumerate() {
            let Some(p) = report.panel(m, res) else { continue };
            let h = &p.histogram;
            let f = Frame {
                x0: col as f64 * cell_w + MARGIN,
                y0: row as f64 * cell_h + MARGIN,
                xmin: h.edges[0],
                xmax: *h.edges.last().expect("edges"),
                ymax: h.probabilities.iter().copied().fold(0.0, f64::max).max(1e-12),
            };
            f.axes(&mut svg, &format!("{} {res}×{res} (n={})", m.name().to_uppercase(), p.count), "ε (%)");
            for (k, &pr) in h.probabilities.iter().enumerate() {
                let (xa, xb) = (f.px(h.edges[k]), f.px(h.edges[k + 1]));
                let y = f.py(pr);
                let _ = write!(
                    svg,
                    r#"<rect x="{xa:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.7"/>"#,
                    (xb - xa).max(0.0),
                    f.y0 + PANEL_H - y,
                    COLOURS[col % COLOURS.len()]
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn polyline(svg: &mut String, f: &Frame, xs: &[f64], ys: &[f64], colour: &str) {
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    let _ = write!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
        pts.join(" ")
    );
}

fn legend(svg: &mut String, f: &Frame, labels: &[String]) {
    for (k, l) in labels.iter().enumerate() {
        let y = f.y0 + PANEL_H - 10.0 - 12.0 * (labels.len() - 1 - k) as f64;
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{y:.1}" font-size="9" text-anchor="end" fill="{}">{l}</text>"#,
            f.x0 + PANEL_W - 4.0,
            COLOURS[k % COLOURS.len()]
        );
    }
}

pub fn cdf_svg(report: &SurveyReport) -> Result<String> {
    let methods = methods(report);
    let ladder = report.config.ladder();
    let grid = cdf_grid(report);
    let xmax = *grid.last().expect("grid");
    let cell_w = PANEL_W + 2.0 * MARGIN;
    let cell_h = PANEL_H + 2.0 * MARGIN;
    let mut svg = svg_open(cell_w * (methods.len() + 1) as f64, cell_h);
    let frame = |col: usize| Frame {
        x0: col as f64 * cell_w + MARGIN,
        y0: MARGIN,
        xmin: 0.0,
        xmax,
        ymax: 1.0,
    };
    for (col, &m) in methods.iter().enumerate() {
        let f = frame(col);
        f.axes(&mut svg, &format!("{}: P(|ε| < x)", m.name().to_uppercase()), "x (%)");
        let mut labels = Vec::new();
        for (k, &res) in ladder.iter().enumerate() {
            let errs = report.errors(m, res);
            if errs.is_empty() {
                continue;
            }
            polyline(&mut svg, &f, &grid, &cdf_table(&errs, &grid)?, COLOURS[k % COLOURS.len()]);
            labels.push(format!("{res}×{res}"));
        }
        legend(&mut svg, &f, &labels);
    }
    let lowest = *ladder.last().expect("ladder");
    let f = frame(methods.len());
    f.axes(&mut svg, &format!("{lowest}×{lowest}: P(|ε| < x)"), "x (%)");
    let mut labels = Vec::new();
    for (k, &m) in methods.iter().enumerate() {
        let errs = report.errors(m, lowest);
        if errs.is_empty() {
            continue;
        }
        polyline(&mut svg, &f, &grid, &cdf_table(&errs, &grid)?, COLOURS[k % COLOURS.len()]);
        labels.push(m.name().to_uppercase());
    }
    legend(&mut svg, &f, &labels);
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the five artifacts into `out_dir` (created if missing) and
/// returns their paths.
pub fn emit_report(report: &SurveyReport, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files: [(&str, Vec<u8>); 5] = [
        ("report.json", report.to_json()?.into_bytes()),
        ("histograms.csv", write_histograms_csv(report)?),
        ("cdf.csv", write_cdf_csv(report)?),
        ("histograms.svg", histograms_svg(report).into_bytes()),
        ("cdf.svg", cdf_svg(report)?.into_bytes()),
    ];
    let mut paths = Vec::new();
    for (name, bytes) in files {
        let p = dir.join(name);
        write_atomic(&p, &bytes)?;
        paths.push(p);
    }
    Ok(paths)
}
