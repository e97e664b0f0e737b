//! Human-readable summaries and SVG plots from a manifest.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use super::manifest::{Manifest, PlotSpec};
use super::svg::{Axis, Figure, Marker, Series, Style};
use super::table::Table;
use crate::error::{Error, Result};
use crate::propagator::geometric_times;

pub const SUMMARY_FILE: &str = "report.txt";

#[derive(Debug, Clone)]
pub struct Report {
    pub summary: String,
    pub svgs: Vec<PathBuf>,
    /// Outputs or plot inputs listed in the manifest but absent on disk.
    pub missing: Vec<String>,
}

/// Reads `manifest_path`, writes the summary next to it and, with `plots`, one SVG per plot.
pub fn report(manifest_path: &Path, plots: bool) -> Result<Report> {
    let manifest = Manifest::read(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut missing: Vec<String> = manifest.outputs.iter().map(|o| o.path.clone()).filter(|p| !dir.join(p).exists()).collect();
    let mut svgs = Vec::new();
    if plots {
        for plot in &manifest.plots {
            let data = dir.join(plot.data());
            if !data.exists() {
                if !missing.contains(&plot.data().to_string()) {
                    missing.push(plot.data().to_string());
                }
                continue;
            }
            let table = Table::read(&data)?;
            let svg = render(plot, &table).render();
            let out = dir.join(plot.file());
            std::fs::write(&out, svg).map_err(|e| Error::io(&out, e))?;
            svgs.push(out);
        }
    }
    let summary = summarize(&manifest, &missing);
    let out = dir.join(SUMMARY_FILE);
    std::fs::write(&out, &summary).map_err(|e| Error::io(&out, e))?;
    Ok(Report { summary, svgs, missing })
}

pub fn summarize(m: &Manifest, missing: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} ({}), seed {}", m.name, m.kind, m.seed);
    let _ = writeln!(s, "overall: {}", if m.all_passed { "PASS" } else { "FAIL" });
    let _ = writeln!(s, "\nchecks:");
    for c in &m.checks {
        let _ = writeln!(s, "  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if !m.fitted_rates.is_empty() {
        let _ = writeln!(s, "\nfitted rates:");
        for r in &m.fitted_rates {
            let expected = r.expected.map(|e| format!(", expected {e:.4}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "  {}: {:.4} (rms {:.3e}, window [{}, {}]{expected})",
                r.label, r.exponent_or_rate, r.rms_residual, r.window.0, r.window.1
            );
        }
    }
    if !m.tags.is_empty() {
        let _ = writeln!(s, "\ntags:");
        for t in &m.tags {
            let _ = writeln!(s, "  {t}");
        }
    }
    let _ = writeln!(s, "\ntimings:");
    for t in &m.timings {
        let _ = writeln!(s, "  {:<40} {:>9.3} s", t.stage, t.seconds);
    }
    let _ = writeln!(s, "\noutputs: {}", m.outputs.len());
    if !missing.is_empty() {
        let _ = writeln!(s, "\nmissing files:");
        for f in missing {
            let _ = writeln!(s, "  {f}");
        }
    }
    s
}

fn pairs(table: &Table, x: &str, y: &str) -> Vec<(f64, f64)> {
    match (table.column(x), table.column(y)) {
        (Some(xs), Some(ys)) => xs.into_iter().zip(ys).collect(),
        _ => Vec::new(),
    }
}

fn render(plot: &PlotSpec, table: &Table) -> Figure {
    match plot {
        PlotSpec::RateFit { y, x, fit, .. } => {
            let mut f = Figure::new(fit.label.clone(), Axis::log(x.clone()), Axis::log(y.clone()));
            f.series.push(Series { label: "measured".into(), points: pairs(table, x, y), style: Style::Points });
            let rf = fit.as_fit();
            let (lo, hi) = fit.window;
            let ts = if lo > 0.0 { geometric_times(lo, hi, 60) } else { (0..60).map(|i| lo + (hi - lo) * i as f64 / 59.0).collect() };
            f.series.push(Series {
                label: "fit".into(),
                points: ts.into_iter().map(|t| (t, rf.predict(t))).collect(),
                style: Style::Line,
            });
            f.notes.push(format!("{:?}: {:.4}", fit.model, fit.exponent_or_rate));
            if let Some(e) = fit.expected {
                f.notes.push(format!("expected {e:.4}"));
            }
            f.notes.push(format!("rms {:.2e}", fit.rms_residual));
            f
        }
        PlotSpec::Order { x, ys, slopes, data, .. } => {
            let mut f = Figure::new(format!("convergence ({data})"), Axis::log(x.clone()), Axis::log("error"));
            for (y, slope) in ys.iter().zip(slopes) {
                let pts = pairs(table, x, y);
                f.series.push(Series { label: y.clone(), points: pts.clone(), style: Style::Points });
                if let Some(p) = slope {
                    let good: Vec<(f64, f64)> = pts.into_iter().filter(|(a, b)| *a > 0.0 && *b > 0.0).collect();
                    if !good.is_empty() {
                        let n = good.len() as f64;
                        let mx = good.iter().map(|q| q.0.ln()).sum::<f64>() / n;
                        let my = good.iter().map(|q| q.1.ln()).sum::<f64>() / n;
                        let line = good.iter().map(|q| (q.0, (my + p * (q.0.ln() - mx)).exp())).collect();
                        f.series.push(Series { label: format!("slope {p:.3}"), points: line, style: Style::Dashed });
                    }
                }
            }
            f
        }
        PlotSpec::Margin { x, y, group, data, .. } => {
            let mut f = Figure::new(format!("energy margin ({data})"), Axis::linear(x.clone()), Axis::linear(y.clone()));
            let xs = table.column(x).unwrap_or_default();
            let ys = table.column(y).unwrap_or_default();
            let groups = group.as_ref().and_then(|g| table.text_column(g)).unwrap_or_else(|| vec![String::new(); xs.len()]);
            let mut by: BTreeMap<String, (usize, Vec<(f64, f64)>)> = BTreeMap::new();
            for (i, ((a, b), g)) in xs.iter().zip(&ys).zip(&groups).enumerate() {
                by.entry(g.clone()).or_insert((i, Vec::new())).1.push((*a, *b));
            }
            let mut ordered: Vec<(String, (usize, Vec<(f64, f64)>))> = by.into_iter().collect();
            ordered.sort_by_key(|(_, (first, _))| *first);
            for (g, (_, pts)) in ordered {
                let label = match group {
                    Some(name) => format!("{name}={}", g.parse::<f64>().map(|v| format!("{v:.3}")).unwrap_or(g)),
                    None => y.clone(),
                };
                f.series.push(Series { label, points: pts, style: Style::Line });
            }
            if let Some((i, v)) = ys.iter().enumerate().filter(|(_, v)| v.is_finite()).min_by(|a, b| a.1.total_cmp(b.1)) {
                f.markers.push(Marker { x: xs[i], y: *v, label: format!("min {v:.3e}") });
            }
            f
        }
        PlotSpec::Layer { x, y, rate, amplitude, tau, .. } => {
            let mut f = Figure::new(format!("initial layer, tau = {tau}"), Axis::linear(x.clone()), Axis::log(format!("|{y}|")));
            let pts: Vec<(f64, f64)> = pairs(table, x, y).into_iter().map(|(a, b)| (a, b.abs())).filter(|(a, _)| *a <= 6.0 * tau).collect();
            f.series.push(Series { label: "measured".into(), points: pts, style: Style::Points });
            if let (Some(r), Some(a)) = (rate, amplitude) {
                let line = (0..40).map(|i| 0.2 * tau + 2.8 * tau * i as f64 / 39.0).map(|t| (t, a * (-r * t).exp())).collect();
                f.series.push(Series { label: "exp fit".into(), points: line, style: Style::Line });
                f.notes.push(format!("slope -{r:.4}"));
                f.notes.push(format!("rate x tau = {:.4}", r * tau));
            }
            f
        }
    }
}
