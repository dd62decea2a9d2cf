//! CSV, JSON and SVG emission of result tables.
//!
//! Every file embeds the canonical config of the run, so it can be
//! reproduced exactly. Only the `# run:` metadata line varies between
//! identical runs.

use std::fs;
use std::io;
use std::path::Path;

use oscbath_core::observables::ObservableRecord;
use serde_json::{json, Value};

use crate::config::{emit_config, emit_simulation, format_number, Axis, Output, Scale};
use crate::sweep::{ResultTable, RunInfo, TimeSeries};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = concat!("oscbath ", env!("CARGO_PKG_VERSION"));

pub const COLUMNS: [&str; 11] = [
    "axis",
    "Jx",
    "Jx_vacuum",
    "Jx_thermal",
    "Jy",
    "Jz",
    "quad_err",
    "solver",
    "omega_min_sens",
    "axis_unit",
    "error",
];

pub const TIME_COLUMNS: [&str; 9] = [
    "time",
    "Jx",
    "Jx_vacuum",
    "Jx_thermal",
    "Jy",
    "Jz",
    "quad_err",
    "solver",
    "omega_min_sens",
];

pub const DELTA_CONVENTION: &str = "omega1 = mean + delta/2, omega2 = mean - delta/2, mean = config omega1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "svg" => Some(Format::Svg),
            _ => None,
        }
    }
}

fn run_line(run: &RunInfo) -> String {
    format!("# run: unix_time = {}, wall_seconds = {:.3}\n", run.unix_time, run.wall_seconds)
}

fn axis_note(axis: Axis) -> String {
    match axis {
        Axis::Theta => "# axis = theta in radians; axis_unit = theta/(pi/2)\n".into(),
        Axis::Gamma => "# axis = gamma; axis_unit = gamma/Gamma\n".into(),
        Axis::Delta => format!("# axis = delta = omega1 - omega2; {DELTA_CONVENTION}\n"),
        a => format!("# axis = {}; axis_unit = axis\n", a.name()),
    }
}

fn config_lines(config: &str) -> String {
    config.lines().map(|l| format!("# config: {l}\n")).collect()
}

fn num(x: f64) -> String {
    format_number(x)
}

/// Table as CSV: `#` metadata lines, then the header and one row per axis
/// value. Failed points leave the numeric fields empty and fill `error`.
pub fn table_csv(table: &ResultTable) -> String {
    let mut out = format!("# {TOOL} steady-state sweep\n");
    out.push_str(&axis_note(table.spec.axis));
    out.push_str("# solver: closedform when omega1 = omega2, laplace otherwise; +theta0 marks the decoherence-free vacuum branch\n");
    out.push_str(&config_lines(&emit_config(&table.spec)));
    out.push_str(&run_line(&table.run));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for row in &table.rows {
        let axis = num(row.axis);
        let unit = num(table.axis_unit(row.axis));
        let fields: Vec<String> = match &row.record {
            Ok(r) => vec![
                axis,
                num(r.jx),
                num(r.jx_vacuum),
                num(r.jx_thermal),
                num(r.jy),
                num(r.jz),
                num(r.quad_err),
                r.solver.clone(),
                num(r.omega_min_sensitivity),
                unit,
                String::new(),
            ],
            Err(e) => {
                let mut f = vec![axis];
                f.extend(std::iter::repeat_n(String::new(), 6));
                f.push("failed".into());
                f.push(String::new());
                f.push(unit);
                f.push(e.clone());
                f
            }
        };
        w.write_record(&fields).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
    out
}

pub fn timeseries_csv(ts: &TimeSeries) -> String {
    let mut out = format!("# {TOOL} time series\n");
    out.push_str(&config_lines(&emit_simulation(&ts.spec)));
    out.push_str(&run_line(&ts.run));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TIME_COLUMNS).expect("in-memory write");
    for r in &ts.records {
        w.write_record([
            num(r.time.unwrap_or(f64::NAN)),
            num(r.jx),
            num(r.jx_vacuum),
            num(r.jx_thermal),
            num(r.jy),
            num(r.jz),
            num(r.quad_err),
            r.solver.clone(),
            num(r.omega_min_sensitivity),
        ])
        .expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
    out
}

/// A CSV read back from text: metadata lines and the rows by column name.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub metadata: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r.get(k).and_then(|s| s.parse().ok())).collect())
    }

    /// The embedded config, ready for `parse_config`.
    pub fn config(&self) -> String {
        self.metadata
            .iter()
            .filter_map(|l| l.strip_prefix("# config: "))
            .map(|l| format!("{l}\n"))
            .collect()
    }
}

pub fn read_csv(text: &str) -> Result<ParsedCsv, csv::Error> {
    let metadata = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(str::to_string)
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok(ParsedCsv { metadata, header, rows })
}

fn record_json(r: &ObservableRecord) -> Value {
    json!({
        "Jx": r.jx,
        "Jx_vacuum": r.jx_vacuum,
        "Jx_thermal": r.jx_thermal,
        "Jy": r.jy,
        "Jz": r.jz,
        "quad_err": r.quad_err,
        "solver": r.solver,
        "omega_min_sens": r.omega_min_sensitivity,
    })
}

/// The tables of one sweep family as a JSON document.
pub fn tables_json(tables: &[ResultTable]) -> Value {
    let first = tables.first();
    let wall: f64 = tables.iter().map(|t| t.run.wall_seconds).sum();
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL,
        "kind": "sweep",
        "axis": first.map(|t| t.spec.axis.name()),
        "delta_convention": DELTA_CONVENTION,
        "tables": tables.iter().map(|t| json!({
            "theta": t.spec.base.theta,
            "kappa": t.spec.kappa,
            "params": t.spec.base,
            "gamma_ratio": t.spec.gamma_ratio,
            "numerics": t.spec.numerics,
            "config": emit_config(&t.spec),
            "rows": t.rows.iter().map(|row| {
                let mut v = match &row.record {
                    Ok(r) => record_json(r),
                    Err(e) => json!({ "solver": "failed", "error": e }),
                };
                v["axis"] = json!(row.axis);
                v["axis_unit"] = json!(t.axis_unit(row.axis));
                v
            }).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "run": {
            "unix_time": first.map(|t| t.run.unix_time),
            "wall_seconds": wall,
        },
    })
}

pub fn timeseries_json(ts: &TimeSeries) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL,
        "kind": "time_series",
        "params": ts.spec.params,
        "kappa": ts.spec.kappa,
        "numerics": ts.spec.numerics,
        "config": emit_simulation(&ts.spec),
        "rows": ts.records.iter().map(|r| {
            let mut v = record_json(r);
            v["time"] = json!(r.time);
            v
        }).collect::<Vec<_>>(),
        "run": { "unix_time": ts.run.unix_time, "wall_seconds": ts.run.wall_seconds },
    })
}

/// A named polyline; NaN values break the line.
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let (a, b) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
        let step = ((b - a) as f64 / 8.0).ceil().max(1.0) as i32;
        return (a..=b)
            .step_by(step as usize)
            .map(|e| 10f64.powi(e))
            .filter(|t| *t >= lo * (1.0 - 1e-12) && *t <= hi * (1.0 + 1e-12))
            .collect();
    }
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(x: f64) -> String {
    let s = format!("{x:.3e}");
    let short = format!("{}", (x * 1e6).round() / 1e6);
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e4) {
        // 1.000e-5 -> 1e-5
        let (m, e) = s.split_once('e').unwrap_or((&s, "0"));
        let m = m.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{e}")
    } else {
        short
    }
}

/// Self-contained SVG line chart.
pub fn svg_chart(title: &str, x_label: &str, log_x: bool, curves: &[Curve]) -> String {
    let (w, h) = (760.0, 480.0);
    let (left, right, top, bottom) = (90.0, 190.0, 40.0, 60.0);
    let finite = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!log_x || x > 0.0);
    let pts: Vec<(f64, f64)> = curves.iter().flat_map(|c| c.points.iter().copied().filter(finite)).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for (x, y) in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if pts.is_empty() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + if log_x { x0 } else { 1.0 };
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let tx = |x: f64| {
        let f = if log_x {
            (x.log10() - x0.log10()) / (x1.log10() - x0.log10())
        } else {
            (x - x0) / (x1 - x0)
        };
        left + f * (w - left - right)
    };
    let ty = |y: f64| top + (y1 - y) / (y1 - y0) * (h - top - bottom);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    s.push_str(&format!("<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        (left + w - right) / 2.0,
        escape(title)
    ));
    let (px0, px1, py0, py1) = (left, w - right, top, h - bottom);
    s.push_str(&format!(
        "<rect x=\"{px0}\" y=\"{py0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        px1 - px0,
        py1 - py0
    ));
    for t in ticks(x0, x1, log_x) {
        let x = tx(t);
        s.push_str(&format!("<line x1=\"{x:.2}\" y1=\"{py1}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>\n", py1 + 5.0));
        s.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            py1 + 18.0,
            tick_label(t)
        ));
    }
    for t in ticks(y0, y1, false) {
        let y = ty(t);
        s.push_str(&format!("<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{px0}\" y2=\"{y:.2}\" stroke=\"black\"/>\n", px0 - 5.0));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            px0 - 8.0,
            y + 4.0,
            tick_label(t)
        ));
    }
    if y0 < 0.0 && y1 > 0.0 {
        let y = ty(0.0);
        s.push_str(&format!(
            "<line x1=\"{px0}\" y1=\"{y:.2}\" x2=\"{px1}\" y2=\"{y:.2}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n"
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (px0 + px1) / 2.0,
        h - 15.0,
        escape(x_label)
    ));
    for (k, c) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for p in &c.points {
            if finite(p) {
                segments.last_mut().expect("nonempty").push((tx(p.0), ty(p.1)));
            } else if !segments.last().expect("nonempty").is_empty() {
                segments.push(Vec::new());
            }
        }
        for seg in segments.iter().filter(|s| !s.is_empty()) {
            let path: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            s.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\" points=\"{}\"/>\n",
                path.join(" ")
            ));
        }
        let ly = top + 10.0 + 18.0 * k as f64;
        s.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            px1 + 12.0,
            px1 + 36.0
        ));
        s.push_str(&format!("<text x=\"{}\" y=\"{}\">{}</text>\n", px1 + 42.0, ly + 4.0, escape(&c.label)));
    }
    s.push_str("</svg>\n");
    s
}

fn output_value(r: &ObservableRecord, o: Output) -> f64 {
    match o {
        Output::Jx => r.jx,
        Output::JxVacuum => r.jx_vacuum,
        Output::JxThermal => r.jx_thermal,
        Output::Jy => r.jy,
        Output::Jz => r.jz,
    }
}

/// Chart of a sweep family: every requested output for a single table, or
/// the first requested output per mixing angle for a family.
pub fn tables_svg(title: &str, tables: &[ResultTable]) -> String {
    let Some(first) = tables.first() else {
        return svg_chart(title, "", false, &[]);
    };
    let axis = first.spec.axis;
    let x_label = match axis {
        Axis::Theta => "theta / (pi/2)".to_string(),
        Axis::Gamma => "gamma / Gamma".to_string(),
        a => a.name().to_string(),
    };
    let log_x = first.spec.values.scale() == Scale::Log;
    let series = |t: &ResultTable, o: Output| -> Vec<(f64, f64)> {
        t.rows
            .iter()
            .map(|row| {
                let y = row.record.as_ref().map_or(f64::NAN, |r| output_value(r, o));
                (t.axis_unit(row.axis), y)
            })
            .collect()
    };
    let curves: Vec<Curve> = if tables.len() == 1 {
        first
            .spec
            .outputs
            .iter()
            .map(|&o| Curve {
                label: o.name().to_string(),
                points: series(first, o),
            })
            .collect()
    } else {
        let o = first.spec.outputs.first().copied().unwrap_or(Output::Jx);
        tables
            .iter()
            .map(|t| Curve {
                label: format!("{} theta={:.4}", o.name(), t.spec.base.theta),
                points: series(t, o),
            })
            .collect()
    };
    svg_chart(title, &x_label, log_x, &curves)
}

pub fn timeseries_svg(title: &str, ts: &TimeSeries) -> String {
    let curves: Vec<Curve> = ts
        .spec
        .outputs
        .iter()
        .map(|&o| Curve {
            label: o.name().to_string(),
            points: ts.records.iter().map(|r| (r.time.unwrap_or(f64::NAN), output_value(r, o))).collect(),
        })
        .collect();
    svg_chart(title, "time", false, &curves)
}

/// File stem for table `k` of a family of `n`.
pub fn member_stem(stem: &str, k: usize, n: usize) -> String {
    if n == 1 {
        stem.to_string()
    } else {
        format!("{stem}_theta{k}")
    }
}

/// Writes the family in the requested formats under `dir`; returns the
/// paths written.
pub fn write_tables(dir: &Path, stem: &str, tables: &[ResultTable], formats: &[Format]) -> io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path.display().to_string());
        Ok(())
    };
    for f in formats {
        match f {
            Format::Csv => {
                for (k, t) in tables.iter().enumerate() {
                    put(format!("{}.csv", member_stem(stem, k, tables.len())), table_csv(t))?;
                }
            }
            Format::Json => {
                let body = serde_json::to_string_pretty(&tables_json(tables)).expect("serializable table");
                put(format!("{stem}.json"), body + "\n")?;
            }
            Format::Svg => put(format!("{stem}.svg"), tables_svg(stem, tables))?,
        }
    }
    Ok(written)
}

pub fn write_timeseries(dir: &Path, stem: &str, ts: &TimeSeries, formats: &[Format]) -> io::Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in formats {
        let body = match f {
            Format::Csv => timeseries_csv(ts),
            Format::Json => serde_json::to_string_pretty(&timeseries_json(ts)).expect("serializable series") + "\n",
            Format::Svg => timeseries_svg(stem, ts),
        };
        let path = dir.join(format!("{stem}.{}", f.extension()));
        fs::write(&path, body)?;
        written.push(path.display().to_string());
    }
    Ok(written)
}
