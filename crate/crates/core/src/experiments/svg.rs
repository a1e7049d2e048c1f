//! Line plots of result tables as standalone SVG.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::table::Table;
use crate::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AxesSpec {
    pub x: String,
    pub y: String,
    /// Columns whose joined values name a series; one series when empty.
    pub series: Vec<String>,
    /// Only rows with these `(column, text)` values are plotted.
    pub filter: Vec<(String, String)>,
    pub x_log: bool,
    pub y_log: bool,
    /// Columns drawn dashed against `x`, rescaled to meet the data at
    /// the row where the reference is largest.
    pub references: Vec<String>,
    /// Guide lines `y ∝ x^s` through the first point (log-log only).
    pub slopes: Vec<f64>,
    pub title: String,
}

impl AxesSpec {
    /// Extension ratio against `h` for one dimension.
    pub fn fig2(d: usize) -> Self {
        AxesSpec {
            x: "h".into(),
            y: "ratio".into(),
            series: vec!["scheme".into()],
            filter: vec![("d".into(), d.to_string())],
            x_log: true,
            y_log: true,
            title: format!("extension ratio, d = {d}"),
            ..Default::default()
        }
    }

    /// Minimal `γ` against `ν` for one dimension, with both asymptotes.
    pub fn fig3(d: usize) -> Self {
        AxesSpec {
            x: "nu".into(),
            y: "gamma_star".into(),
            series: vec!["kind".into()],
            filter: vec![("d".into(), d.to_string())],
            x_log: true,
            y_log: true,
            references: vec!["ref_nu_inv_sqrt".into(), "ref_sqrt_nu_log_nu".into()],
            title: format!("minimal gamma, d = {d}"),
            ..Default::default()
        }
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    px0: f64,
    px1: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool, px0: f64, px1: f64) -> Axis {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            let v = if log { v.log10() } else { v };
            (a.min(v), b.max(v))
        });
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            lo -= 0.5;
            hi += 0.5;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, log, px0, px1 }
    }

    fn map(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        self.px0 + (t - self.lo) / (self.hi - self.lo) * (self.px1 - self.px0)
    }

    /// Tick values and labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            if b > a {
                let step = ((b - a) / 8 + 1) as usize;
                return (a..=b)
                    .step_by(step)
                    .map(|k| (10f64.powi(k), format!("1e{k}")))
                    .collect();
            }
            // less than a decade: 1-2-5 ticks, else three log-spaced labels
            let (lo, hi) = (10f64.powf(self.lo), 10f64.powf(self.hi));
            let k0 = self.lo.floor() as i32;
            let fine: Vec<(f64, String)> = (k0..=k0 + 1)
                .flat_map(|k| [1.0, 2.0, 5.0].map(|m| (m * 10f64.powi(k), format!("{m}e{k}"))))
                .filter(|&(v, _)| v >= lo && v <= hi)
                .collect();
            if fine.len() >= 2 {
                return fine;
            }
            return (0..3)
                .map(|i| {
                    let v = 10f64.powf(self.lo + (self.hi - self.lo) * (0.1 + 0.4 * i as f64));
                    (v, format!("{v:.3e}"))
                })
                .collect();
        }
        let span = self.hi - self.lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| span / s <= 6.0)
            .unwrap_or(10.0 * mag);
        let mut v = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while v <= self.hi {
            out.push((v, format!("{}", (v / step).round() * step)));
            v += step;
        }
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn points(xs: &[(f64, f64)], ax: &Axis, ay: &Axis) -> String {
    xs.iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", ax.map(x), ay.map(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Deterministic line plot of `spec.y` against `spec.x`. Rows with an
/// empty cell, a non-`ok` status or a non-positive value on a log axis are
/// skipped. A series of one point is drawn as a marker only.
pub fn svg_plot(table: &Table, spec: &AxesSpec) -> Result<String> {
    if table.is_empty() {
        return Err(Error::MalformedTable("table has no rows".into()));
    }
    let xs = table.numeric(&spec.x)?;
    let ys = table.numeric(&spec.y)?;
    let series_cols: Vec<usize> = spec.series.iter().map(|c| table.column_index(c)).collect::<Result<_>>()?;
    let filters: Vec<(usize, &str)> = spec
        .filter
        .iter()
        .map(|(c, v)| Ok((table.column_index(c)?, v.as_str())))
        .collect::<Result<_>>()?;
    let refs: Vec<Vec<Option<f64>>> = spec.references.iter().map(|c| table.numeric(c)).collect::<Result<_>>()?;
    let status = table.column_index("status").ok();
    if !spec.slopes.is_empty() && !(spec.x_log && spec.y_log) {
        return Err(Error::InvalidParameter("slope guides need log-log axes".into()));
    }

    let usable = |v: f64, log: bool| v.is_finite() && (!log || v > 0.0);
    let mut names: Vec<String> = Vec::new();
    let mut series: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut kept = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        if filters.iter().any(|&(c, v)| row[c] != v) || status.is_some_and(|c| row[c] != "ok") {
            continue;
        }
        let (Some(x), Some(y)) = (xs[i], ys[i]) else { continue };
        if !usable(x, spec.x_log) || !usable(y, spec.y_log) {
            continue;
        }
        let name = series_cols.iter().map(|&c| row[c].as_str()).collect::<Vec<_>>().join(" ");
        let k = match names.iter().position(|n| *n == name) {
            Some(k) => k,
            None => {
                names.push(name);
                series.push(Vec::new());
                names.len() - 1
            }
        };
        series[k].push((x, y));
        kept.push(i);
    }
    if kept.is_empty() {
        return Err(Error::MalformedTable(format!(
            "no plottable rows for {} against {}",
            spec.y, spec.x
        )));
    }
    for s in &mut series {
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    // reference curves, one point per distinct x
    let mut ref_curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (name, col) in spec.references.iter().zip(&refs) {
        let raw: Vec<(f64, f64, f64)> = kept
            .iter()
            .filter_map(|&i| Some((xs[i]?, col[i]?, ys[i]?)))
            .filter(|&(_, r, _)| usable(r, spec.y_log) && r != 0.0)
            .collect();
        let Some(&(_, r_at, y_at)) = raw.iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())) else {
            continue;
        };
        let scale = y_at / r_at;
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for &(x, r, _) in &raw {
            if !pts.iter().any(|p| p.0 == x) {
                pts.push((x, r * scale));
            }
        }
        pts.retain(|p| usable(p.1, spec.y_log));
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.len() >= 2 {
            ref_curves.push((name.clone(), pts));
        }
    }

    let all_x = series.iter().flatten().map(|p| p.0);
    let all_y = series
        .iter()
        .flatten()
        .chain(ref_curves.iter().flat_map(|c| &c.1))
        .map(|p| p.1);
    let ax = Axis::new(all_x, spec.x_log, LEFT, WIDTH - RIGHT);
    let ay = Axis::new(all_y, spec.y_log, HEIGHT - BOTTOM, TOP);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - RIGHT - LEFT,
        HEIGHT - BOTTOM - TOP
    );
    for (v, label) in ax.ticks() {
        let px = ax.map(v);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 5.0,
            HEIGHT - BOTTOM + 18.0,
            escape(&label)
        );
    }
    for (v, label) in ay.ticks() {
        let py = ay.map(v);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            escape(&label)
        );
    }
    let x_label = if spec.x_log { format!("{} (log)", spec.x) } else { spec.x.clone() };
    let y_label = if spec.y_log { format!("{} (log)", spec.y) } else { spec.y.clone() };
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape(&x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(&y_label)
    );

    let mut legend: Vec<(String, &str, bool)> = Vec::new();
    for (k, (name, pts)) in names.iter().zip(&series).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if pts.len() == 1 {
            let (x, y) = pts[0];
            let _ = writeln!(
                out,
                r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
                ax.map(x),
                ay.map(y)
            );
        } else {
            let _ = writeln!(
                out,
                r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                points(pts, &ax, &ay)
            );
        }
        legend.push((name.clone(), color, false));
    }
    for (k, (name, pts)) in ref_curves.iter().enumerate() {
        let color = PALETTE[(names.len() + k) % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<polyline class="reference" fill="none" stroke="{color}" stroke-dasharray="6,4" points="{}"/>"#,
            points(pts, &ax, &ay)
        );
        legend.push((name.clone(), color, true));
    }
    if let Some(&(x0, y0)) = series.first().and_then(|s| s.first()) {
        let x1 = 10f64.powf(ax.hi);
        for &s in &spec.slopes {
            let y1 = y0 * (x1 / x0).powf(s);
            let _ = writeln!(
                out,
                r#"<line class="slope" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="2,3"/>"#,
                ax.map(x0),
                ay.map(y0),
                ax.map(x1),
                ay.map(y1)
            );
            legend.push((format!("slope {s}"), "gray", true));
        }
    }
    for (k, (name, color, dashed)) in legend.iter().enumerate() {
        let y = TOP + 14.0 + 18.0 * k as f64;
        let x = WIDTH - RIGHT + 12.0;
        let dash = if *dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 24.0,
            x + 30.0,
            y + 4.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
