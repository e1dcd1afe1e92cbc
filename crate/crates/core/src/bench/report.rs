//! Pareto plots and summary tables from run-record CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::{read_records, summarize, RunRecord};

use super::plot::{Axis, Svg, PALETTE};

/// Mean ± std-dev of one (app, method, param) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub param: u64,
    pub reps: usize,
    pub w1_mean: f64,
    pub w1_std: f64,
    pub ms_mean: f64,
    pub ms_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub app: String,
    pub method: String,
    /// Points in increasing parameter order.
    pub points: Vec<SeriesPoint>,
}

impl Series {
    /// Parameters at which mean W1 rises above the previous point by more
    /// than one pooled std-dev. Empty means the series is monotone within
    /// its error bars.
    pub fn trend_violations(&self) -> Vec<u64> {
        self.points
            .windows(2)
            .filter(|w| {
                let pooled = ((w[0].w1_std.powi(2) + w[1].w1_std.powi(2)) / 2.0).sqrt();
                w[1].w1_mean - w[0].w1_mean > pooled
            })
            .map(|w| w[1].param)
            .collect()
    }

    pub fn trend_note(&self) -> String {
        let v = self.trend_violations();
        if v.is_empty() {
            format!(
                "{} {}: W1 nonincreasing in parameter within error bars",
                self.app, self.method
            )
        } else {
            let list: Vec<String> = v.iter().map(u64::to_string).collect();
            format!(
                "{} {}: W1 increases beyond error bars at {}",
                self.app,
                self.method,
                list.join(", ")
            )
        }
    }
}

pub fn load_records(paths: &[PathBuf]) -> Result<Vec<RunRecord>> {
    let mut all = Vec::new();
    for p in paths {
        let recs = read_records(fs::File::open(p)?).map_err(|e| Error::Format(format!("{}: {e}", p.display())))?;
        all.extend(recs);
    }
    Ok(all)
}

/// Groups records into series. Single-repetition cells get zero spread.
pub fn build_series(records: &[RunRecord]) -> Result<Vec<Series>> {
    let mut groups: BTreeMap<(String, String), BTreeMap<u64, Vec<RunRecord>>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.app.clone(), r.method.clone()))
            .or_default()
            .entry(r.param)
            .or_default()
            .push(r.clone());
    }
    let mut out = Vec::new();
    for ((app, method), cells) in groups {
        let mut points = Vec::new();
        for (param, recs) in cells {
            let p = if recs.len() >= 2 {
                let s = summarize(&recs)?;
                SeriesPoint {
                    param,
                    reps: recs.len(),
                    w1_mean: s.wasserstein_mean,
                    w1_std: s.wasserstein_std,
                    ms_mean: s.runtime_mean_ms,
                    ms_std: s.runtime_std_ms,
                }
            } else {
                SeriesPoint {
                    param,
                    reps: 1,
                    w1_mean: recs[0].wasserstein,
                    w1_std: 0.0,
                    ms_mean: recs[0].runtime_ms,
                    ms_std: 0.0,
                }
            };
            points.push(p);
        }
        out.push(Series { app, method, points });
    }
    Ok(out)
}

/// Fixed-width table with mean ± std-dev columns.
pub fn table(series: &[Series]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22} {:<12} {:>9} {:>4}  {:>24}  {:>22}",
        "app", "method", "n or r", "reps", "wasserstein", "runtime ms"
    );
    for ser in series {
        for p in &ser.points {
            let _ = writeln!(
                s,
                "{:<22} {:<12} {:>9} {:>4}  {:>24}  {:>22}",
                ser.app,
                ser.method,
                p.param,
                p.reps,
                format!("{:.5} ± {:.5}", p.w1_mean, p.w1_std),
                format!("{:.3} ± {:.3}", p.ms_mean, p.ms_std),
            );
        }
    }
    s
}

/// Run time (log x) against W1 (log y) for every series of one application,
/// with ±1 std-dev error bars on both.
pub fn pareto_svg(app: &str, series: &[&Series]) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (90.0, w - 190.0, 40.0, h - 60.0);
    let pts = || series.iter().flat_map(|s| s.points.iter());
    let x = Axis::fit(
        pts().flat_map(|p| [p.ms_mean - p.ms_std, p.ms_mean + p.ms_std]),
        true,
        left,
        right,
    );
    let y = Axis::fit(
        pts().flat_map(|p| [p.w1_mean - p.w1_std, p.w1_mean + p.w1_std]),
        true,
        bottom,
        top,
    );
    let mut svg = Svg::new(w, h);
    svg.text(
        0.5 * (left + right),
        24.0,
        14.0,
        "middle",
        &format!("{app}: accuracy vs run time"),
    );
    svg.axes(&x, &y, "mean run time (ms)", "mean Wasserstein-1 distance");
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let line: Vec<(f64, f64)> = s.points.iter().map(|p| (x.map(p.ms_mean), y.map(p.w1_mean))).collect();
        svg.polyline(&line, color, 1.0);
        for p in &s.points {
            let (cx, cy) = (x.map(p.ms_mean), y.map(p.w1_mean));
            let (ylo, yhi) = (y.map(p.w1_mean - p.w1_std), y.map(p.w1_mean + p.w1_std));
            svg.line(cx, ylo, cx, yhi, color, 1.0);
            svg.line(cx - 3.0, ylo, cx + 3.0, ylo, color, 1.0);
            svg.line(cx - 3.0, yhi, cx + 3.0, yhi, color, 1.0);
            let (xlo, xhi) = (x.map(p.ms_mean - p.ms_std), x.map(p.ms_mean + p.ms_std));
            svg.line(xlo, cy, xhi, cy, color, 1.0);
            svg.circle(cx, cy, 3.5, color);
        }
        let ly = top + 18.0 * k as f64 + 10.0;
        svg.circle(right + 20.0, ly - 4.0, 4.0, color);
        svg.text(right + 30.0, ly, 12.0, "start", &s.method);
        let note = if s.trend_violations().is_empty() {
            "monotone"
        } else {
            "not monotone"
        };
        let ny = top + 18.0 * series.len() as f64 + 30.0 + 14.0 * k as f64;
        svg.text(right + 12.0, ny, 10.0, "start", &format!("{}: {note}", s.method));
    }
    svg.finish()
}

#[derive(Debug, Clone)]
pub struct ReportOutput {
    pub svgs: Vec<PathBuf>,
    pub table: String,
    pub trends: Vec<String>,
}

/// Reads run-record CSVs and writes one Pareto SVG per application plus a
/// text table into `out`.
pub fn report_pareto(csvs: &[PathBuf], out: &Path) -> Result<ReportOutput> {
    let records = load_records(csvs)?;
    if records.is_empty() {
        return Err(Error::Format("no run records to report".into()));
    }
    let series = build_series(&records)?;
    fs::create_dir_all(out)?;
    let mut by_app: BTreeMap<&str, Vec<&Series>> = BTreeMap::new();
    for s in &series {
        by_app.entry(s.app.as_str()).or_default().push(s);
    }
    let mut svgs = Vec::new();
    for (app, ss) in by_app {
        let path = out.join(format!("pareto-{app}.svg"));
        fs::write(&path, pareto_svg(app, &ss))?;
        svgs.push(path);
    }
    let table = table(&series);
    let trends: Vec<String> = series.iter().map(Series::trend_note).collect();
    let mut text = table.clone();
    text.push('\n');
    for t in &trends {
        text.push_str(t);
        text.push('\n');
    }
    fs::write(out.join("summary.txt"), text)?;
    Ok(ReportOutput { svgs, table, trends })
}
