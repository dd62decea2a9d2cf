//! Flat `key = value` configuration files for sweeps and time series.
//!
//! Blank lines and lines starting with `#` are ignored. Numbers accept the
//! usual float syntax plus multiples and fractions of `pi` (`pi/2`,
//! `-pi/4`, `3*pi/8`). Lists are comma separated.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use oscbath_core::observables::SpectralOptions;
use oscbath_core::ModelParams;
use serde::Serialize;

/// Keys in canonical emission order.
pub const KEYS: [&str; 24] = [
    "omega1",
    "omega2",
    "theta",
    "Gamma",
    "gamma",
    "gamma_ratio",
    "omega0",
    "temperature",
    "kappa",
    "axis",
    "axis_values",
    "axis_range",
    "axis_points",
    "axis_scale",
    "thetas",
    "omega_min",
    "omega_max",
    "grid_points",
    "rel_tol",
    "abs_tol",
    "workers",
    "t_end",
    "t_points",
    "outputs",
];

const SWEEP_ONLY: [&str; 6] = ["axis", "axis_values", "axis_range", "axis_points", "axis_scale", "thetas"];
const SIMULATION_ONLY: [&str; 2] = ["t_end", "t_points"];

pub const DEFAULT_AXIS_POINTS: usize = 101;
pub const DEFAULT_GRID_POINTS: usize = 1024;
pub const DEFAULT_T_END: f64 = 100.0;
pub const DEFAULT_T_POINTS: usize = 201;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    Theta,
    /// Spectral width γ.
    Gamma,
    /// Coupling strength Γ.
    Coupling,
    Omega0,
    Temperature,
    /// Frequency difference Δ = ω1 − ω2 about a fixed mean.
    Delta,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::Theta, Axis::Gamma, Axis::Coupling, Axis::Omega0, Axis::Temperature, Axis::Delta];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Theta => "theta",
            Axis::Gamma => "gamma",
            Axis::Coupling => "Gamma",
            Axis::Omega0 => "omega0",
            Axis::Temperature => "temperature",
            Axis::Delta => "delta",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AxisValues {
    List(Vec<f64>),
    Range { start: f64, end: f64, points: usize, scale: Scale },
}

impl AxisValues {
    /// Sampled values; range endpoints are reproduced exactly.
    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisValues::List(v) => v.clone(),
            AxisValues::Range { start, end, points, scale } => {
                let (a, b, n) = (*start, *end, *points);
                if n == 1 {
                    return vec![a];
                }
                (0..n)
                    .map(|k| {
                        if k == 0 {
                            return a;
                        }
                        if k == n - 1 {
                            return b;
                        }
                        let f = k as f64 / (n - 1) as f64;
                        match scale {
                            Scale::Linear => a + (b - a) * f,
                            Scale::Log => a * (b / a).powf(f),
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn scale(&self) -> Scale {
        match self {
            AxisValues::List(_) => Scale::Linear,
            AxisValues::Range { scale, .. } => *scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Output {
    Jx,
    JxVacuum,
    JxThermal,
    Jy,
    Jz,
}

impl Output {
    pub const ALL: [Output; 5] = [Output::Jx, Output::JxVacuum, Output::JxThermal, Output::Jy, Output::Jz];

    pub fn name(self) -> &'static str {
        match self {
            Output::Jx => "Jx",
            Output::JxVacuum => "Jx_vacuum",
            Output::JxThermal => "Jx_thermal",
            Output::Jy => "Jy",
            Output::Jz => "Jz",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

pub const DEFAULT_OUTPUTS: [Output; 4] = [Output::Jx, Output::JxVacuum, Output::JxThermal, Output::Jz];

/// Integration domain, tolerances and parallelism shared by every command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Numerics {
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    /// Nodes of the time-domain frequency grid; steady-state quadrature
    /// starts from grid_points/16 geometric panels.
    pub grid_points: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        let s = SpectralOptions::default();
        Self {
            omega_min: None,
            omega_max: None,
            grid_points: DEFAULT_GRID_POINTS,
            rel_tol: s.rel_tol,
            abs_tol: s.abs_tol,
            workers: 0,
        }
    }
}

impl Numerics {
    pub fn spectral_options(&self) -> SpectralOptions {
        SpectralOptions {
            omega_min: self.omega_min,
            omega_max: self.omega_max,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            initial_panels: (self.grid_points / 16).max(1),
            ..SpectralOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    /// Parameters of the unswept quantities. For a delta sweep ω1 holds the
    /// mean frequency.
    pub base: ModelParams,
    /// When set, γ follows Γ as γ = gamma_ratio·Γ.
    pub gamma_ratio: Option<f64>,
    pub kappa: f64,
    pub axis: Axis,
    pub values: AxisValues,
    /// Mixing angles to repeat the sweep for; empty runs `base.theta` only.
    pub thetas: Vec<f64>,
    pub outputs: Vec<Output>,
    pub numerics: Numerics,
}

impl SweepSpec {
    /// Parameters at one axis value, with the mixing angle `theta`.
    pub fn point(&self, value: f64, theta: f64) -> ModelParams {
        let mut p = ModelParams { theta, ..self.base };
        match self.axis {
            Axis::Theta => p.theta = value,
            Axis::Gamma => p.width = value,
            Axis::Coupling => p.coupling = value,
            Axis::Omega0 => p.omega0 = value,
            Axis::Temperature => p.temperature = value,
            Axis::Delta => {
                p.omega1 = self.base.omega1 + 0.5 * value;
                p.omega2 = self.base.omega1 - 0.5 * value;
            }
        }
        if let Some(r) = self.gamma_ratio {
            p.width = r * p.coupling;
        }
        p
    }

    /// The mixing angles of the family, or the base angle alone.
    pub fn family(&self) -> Vec<f64> {
        if self.thetas.is_empty() {
            vec![self.base.theta]
        } else {
            self.thetas.clone()
        }
    }

    /// The same sweep restricted to one mixing angle.
    pub fn member(&self, theta: f64) -> SweepSpec {
        SweepSpec {
            base: ModelParams { theta, ..self.base },
            thetas: Vec::new(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSpec {
    pub params: ModelParams,
    pub kappa: f64,
    pub t_end: f64,
    pub t_points: usize,
    pub outputs: Vec<Output>,
    pub numerics: Numerics,
}

impl SimulationSpec {
    pub fn times(&self) -> Vec<f64> {
        AxisValues::Range {
            start: 0.0,
            end: self.t_end,
            points: self.t_points,
            scale: Scale::Linear,
        }
        .values()
    }
}

pub fn parse_config(text: &str) -> Result<SweepSpec, ConfigError> {
    let raw = Raw::parse(text)?;
    raw.reject(&SIMULATION_ONLY, "time-series key in a sweep config")?;
    raw.sweep()
}

pub fn parse_simulation(text: &str) -> Result<SimulationSpec, ConfigError> {
    let raw = Raw::parse(text)?;
    raw.reject(&SWEEP_ONLY, "sweep key in a time-series config")?;
    let (params, gamma_ratio) = raw.params(None)?;
    if gamma_ratio.is_some() {
        return Err(raw.error("gamma_ratio", "gamma_ratio only applies to sweeps"));
    }
    let t_end = raw.number("t_end")?.unwrap_or(DEFAULT_T_END);
    if !(t_end > 0.0) {
        return Err(raw.error("t_end", "t_end must be positive"));
    }
    let t_points = raw.count("t_points")?.unwrap_or(DEFAULT_T_POINTS);
    if t_points < 2 {
        return Err(raw.error("t_points", "t_points must be at least 2"));
    }
    Ok(SimulationSpec {
        params,
        kappa: raw.number("kappa")?.unwrap_or(-FRAC_PI_4),
        t_end,
        t_points,
        outputs: raw.outputs()?,
        numerics: raw.numerics()?,
    })
}

/// Canonical text of a sweep spec; `parse_config` reads it back unchanged.
pub fn emit_config(spec: &SweepSpec) -> String {
    let mut out = Emitter::default();
    emit_params(&mut out, &spec.base, spec.gamma_ratio);
    out.num("kappa", spec.kappa);
    out.line("axis", spec.axis.name().to_string());
    match &spec.values {
        AxisValues::List(v) => out.line("axis_values", join(v)),
        AxisValues::Range { start, end, points, scale } => {
            out.line("axis_range", join(&[*start, *end]));
            out.line("axis_points", points.to_string());
            out.line("axis_scale", scale.name().to_string());
        }
    }
    if !spec.thetas.is_empty() {
        out.line("thetas", join(&spec.thetas));
    }
    emit_numerics(&mut out, &spec.numerics);
    out.line("outputs", output_list(&spec.outputs));
    out.text
}

pub fn emit_simulation(spec: &SimulationSpec) -> String {
    let mut out = Emitter::default();
    emit_params(&mut out, &spec.params, None);
    out.num("kappa", spec.kappa);
    emit_numerics(&mut out, &spec.numerics);
    out.num("t_end", spec.t_end);
    out.line("t_points", spec.t_points.to_string());
    out.line("outputs", output_list(&spec.outputs));
    out.text
}

/// Shortest text that reads back to exactly `x`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A float, or a rational multiple of pi such as `-3*pi/8`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, s),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (body, 1.0),
    };
    let coef = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c.trim().strip_suffix('*')?.trim().parse::<f64>().ok()?,
        None => return None,
    };
    let x = sign * coef * PI / den;
    x.is_finite().then_some(x)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|&x| format_number(x)).collect::<Vec<_>>().join(", ")
}

fn output_list(v: &[Output]) -> String {
    v.iter().map(|o| o.name()).collect::<Vec<_>>().join(", ")
}

#[derive(Default)]
struct Emitter {
    text: String,
}

impl Emitter {
    fn line(&mut self, key: &str, value: String) {
        self.text.push_str(key);
        self.text.push_str(" = ");
        self.text.push_str(&value);
        self.text.push('\n');
    }

    fn num(&mut self, key: &str, x: f64) {
        self.line(key, format_number(x));
    }
}

fn emit_params(out: &mut Emitter, p: &ModelParams, gamma_ratio: Option<f64>) {
    out.num("omega1", p.omega1);
    out.num("omega2", p.omega2);
    out.num("theta", p.theta);
    out.num("Gamma", p.coupling);
    match gamma_ratio {
        Some(r) => out.num("gamma_ratio", r),
        None => out.num("gamma", p.width),
    }
    out.num("omega0", p.omega0);
    out.num("temperature", p.temperature);
}

fn emit_numerics(out: &mut Emitter, n: &Numerics) {
    if let Some(x) = n.omega_min {
        out.num("omega_min", x);
    }
    if let Some(x) = n.omega_max {
        out.num("omega_max", x);
    }
    out.line("grid_points", n.grid_points.to_string());
    out.num("rel_tol", n.rel_tol);
    out.num("abs_tol", n.abs_tol);
    out.line("workers", n.workers.to_string());
}

/// Key-value pairs with the line each came from.
struct Raw {
    entries: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let n = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(at(n, format!("expected `key = value`, got `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(at(n, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(at(n, format!("missing value for `{key}`")));
            }
            if let Some((first, _)) = entries.insert(key.to_string(), (n, value.to_string())) {
                return Err(at(n, format!("duplicate key `{key}` (first set on line {first})")));
            }
        }
        Ok(Self { entries })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.entries.get(key).map(|(n, _)| *n),
            message: message.into(),
        }
    }

    fn reject(&self, keys: &[&str], why: &str) -> Result<(), ConfigError> {
        match keys.iter().find(|k| self.entries.contains_key(**k)) {
            Some(k) => Err(self.error(k, format!("{why}: `{k}`"))),
            None => Ok(()),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| parse_number(v).ok_or_else(|| self.error(key, format!("`{key}` expects a number, got `{v}`"))))
            .transpose()
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| self.error(key, format!("`{key}` expects a non-negative integer, got `{v}`")))
            })
            .transpose()
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        parse_number(item)
                            .ok_or_else(|| self.error(key, format!("`{key}` expects numbers, got `{}`", item.trim())))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Model parameters with documented defaults; the second value is the
    /// optional γ/Γ ratio.
    fn params(&self, axis: Option<Axis>) -> Result<(ModelParams, Option<f64>), ConfigError> {
        let omega1 = self.number("omega1")?.unwrap_or(1.0);
        let omega2 = self.number("omega2")?.unwrap_or(omega1);
        let coupling = self.number("Gamma")?.unwrap_or(1.0);
        let gamma_ratio = self.number("gamma_ratio")?;
        let width = match (self.number("gamma")?, gamma_ratio) {
            (Some(_), Some(_)) => return Err(self.error("gamma_ratio", "set either gamma or gamma_ratio, not both")),
            (Some(g), None) => g,
            (None, Some(r)) => r * coupling,
            (None, None) => 0.1 * coupling,
        };
        if let Some(r) = gamma_ratio {
            if !(r > 0.0) {
                return Err(self.error("gamma_ratio", "gamma_ratio must be positive"));
            }
        }
        let omega0 = self.number("omega0")?.unwrap_or(omega1);
        let p = ModelParams {
            omega1,
            omega2,
            theta: self.number("theta")?.unwrap_or(0.0),
            coupling,
            width,
            omega0,
            temperature: self.number("temperature")?.unwrap_or(omega0),
        };
        if axis == Some(Axis::Delta) && omega2 != omega1 {
            return Err(self.error("omega2", "a delta sweep splits omega1 symmetrically; omega2 must equal omega1"));
        }
        // The swept quantity is validated per point.
        let mut probe = p;
        match axis {
            Some(Axis::Theta) => probe.theta = 0.0,
            Some(Axis::Gamma) => probe.width = 1.0,
            Some(Axis::Coupling) => probe.coupling = 1.0,
            Some(Axis::Omega0) => probe.omega0 = 1.0,
            Some(Axis::Temperature) => probe.temperature = 1.0,
            _ => {}
        }
        if gamma_ratio.is_some() {
            probe.width = 1.0;
        }
        if let Err(e) = probe.validate() {
            let key = match e.to_string() {
                m if m.contains("theta") => "theta",
                m if m.contains("Gamma") => "Gamma",
                m if m.contains("gamma") => "gamma",
                m if m.contains("omega0") => "omega0",
                m if m.contains("temperature") => "temperature",
                _ if omega1 > 0.0 => "omega2",
                _ => "omega1",
            };
            return Err(self.error(key, e.to_string()));
        }
        Ok((p, gamma_ratio))
    }

    fn numerics(&self) -> Result<Numerics, ConfigError> {
        let d = Numerics::default();
        let n = Numerics {
            omega_min: self.number("omega_min")?,
            omega_max: self.number("omega_max")?,
            grid_points: self.count("grid_points")?.unwrap_or(d.grid_points),
            rel_tol: self.number("rel_tol")?.unwrap_or(d.rel_tol),
            abs_tol: self.number("abs_tol")?.unwrap_or(d.abs_tol),
            workers: self.count("workers")?.unwrap_or(d.workers),
        };
        if let Some(lo) = n.omega_min {
            if !(lo > 0.0) {
                return Err(self.error("omega_min", "omega_min must be positive"));
            }
        }
        if let (Some(lo), Some(hi)) = (n.omega_min, n.omega_max) {
            if !(hi > lo) {
                return Err(self.error("omega_max", "omega_max must exceed omega_min"));
            }
        }
        if n.grid_points < 16 {
            return Err(self.error("grid_points", "grid_points must be at least 16"));
        }
        if !(n.rel_tol > 0.0) {
            return Err(self.error("rel_tol", "rel_tol must be positive"));
        }
        if !(n.abs_tol >= 0.0) {
            return Err(self.error("abs_tol", "abs_tol must be non-negative"));
        }
        Ok(n)
    }

    fn outputs(&self) -> Result<Vec<Output>, ConfigError> {
        let Some(v) = self.get("outputs") else {
            return Ok(DEFAULT_OUTPUTS.to_vec());
        };
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim) {
            let o = Output::parse(item).ok_or_else(|| {
                let names: Vec<_> = Output::ALL.iter().map(|o| o.name()).collect();
                self.error("outputs", format!("unknown output `{item}` (expected one of {})", names.join(", ")))
            })?;
            if !out.contains(&o) {
                out.push(o);
            }
        }
        Ok(out)
    }

    fn sweep(&self) -> Result<SweepSpec, ConfigError> {
        let axis_name = self.get("axis").ok_or_else(|| at0("missing required key `axis`"))?;
        let axis = Axis::parse(axis_name).ok_or_else(|| {
            let names: Vec<_> = Axis::ALL.iter().map(|a| a.name()).collect();
            self.error("axis", format!("unknown axis `{axis_name}` (expected one of {})", names.join(", ")))
        })?;
        let (base, gamma_ratio) = self.params(Some(axis))?;
        if axis == Axis::Gamma && gamma_ratio.is_some() {
            return Err(self.error("gamma_ratio", "gamma_ratio cannot be combined with a gamma sweep"));
        }
        let values = self.axis_values()?;
        let sampled = values.values();
        let key = if self.get("axis_values").is_some() { "axis_values" } else { "axis_range" };
        if sampled.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(self.error(key, "axis values must be strictly increasing"));
        }
        let thetas = self.numbers("thetas")?.unwrap_or_default();
        if axis == Axis::Theta && !thetas.is_empty() {
            return Err(self.error("thetas", "a theta sweep cannot also carry a theta family"));
        }
        if let Some(t) = thetas.iter().find(|t| !(0.0..=FRAC_PI_2).contains(*t)) {
            return Err(self.error("thetas", format!("theta must lie in [0, pi/2], got {t}")));
        }
        let spec = SweepSpec {
            base,
            gamma_ratio,
            kappa: self.number("kappa")?.unwrap_or(-FRAC_PI_4),
            axis,
            values,
            thetas,
            outputs: self.outputs()?,
            numerics: self.numerics()?,
        };
        for &v in &sampled {
            for theta in spec.family() {
                if let Err(e) = spec.point(v, theta).validate() {
                    return Err(self.error(key, format!("{} = {}: {e}", axis.name(), format_number(v))));
                }
            }
        }
        Ok(spec)
    }

    fn axis_values(&self) -> Result<AxisValues, ConfigError> {
        let list = self.numbers("axis_values")?;
        let range = self.numbers("axis_range")?;
        match (list, range) {
            (Some(_), Some(_)) => Err(self.error("axis_range", "set either axis_values or axis_range, not both")),
            (None, None) => Err(at0("missing axis samples: set axis_values or axis_range")),
            (Some(v), None) => {
                for k in ["axis_points", "axis_scale"] {
                    if self.get(k).is_some() {
                        return Err(self.error(k, format!("`{k}` only applies to axis_range")));
                    }
                }
                Ok(AxisValues::List(v))
            }
            (None, Some(r)) => {
                let [start, end] = r[..] else {
                    return Err(self.error("axis_range", "axis_range expects `start, end`"));
                };
                let points = self.count("axis_points")?.unwrap_or(DEFAULT_AXIS_POINTS);
                if points == 0 {
                    return Err(self.error("axis_points", "axis_points must be positive"));
                }
                let scale = match self.get("axis_scale").unwrap_or("linear") {
                    "linear" => Scale::Linear,
                    "log" => Scale::Log,
                    other => {
                        return Err(self.error("axis_scale", format!("axis_scale must be linear or log, got `{other}`")))
                    }
                };
                if scale == Scale::Log && !(start > 0.0 && end > 0.0) {
                    return Err(self.error("axis_range", "a log-scaled range needs positive endpoints"));
                }
                Ok(AxisValues::Range { start, end, points, scale })
            }
        }
    }
}

fn at(line: usize, message: String) -> ConfigError {
    ConfigError {
        line: Some(line),
        message,
    }
}

fn at0(message: &str) -> ConfigError {
    ConfigError {
        line: None,
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_multiples() {
        assert_eq!(parse_number("pi/2"), Some(FRAC_PI_2));
        assert_eq!(parse_number("-pi/4"), Some(-FRAC_PI_4));
        assert_eq!(parse_number("3*pi/8"), Some(3.0 * PI / 8.0));
        assert_eq!(parse_number("pi"), Some(PI));
        assert_eq!(parse_number("1e-3"), Some(1e-3));
        assert_eq!(parse_number("2pi"), None);
        assert_eq!(parse_number("x"), None);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -0.25, 1e-10, 3.3e20, FRAC_PI_4, 1.0 / 3.0, 5e-324, f64::MAX] {
            assert_eq!(parse_number(&format_number(x)), Some(x));
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let spec = parse_config("axis = theta\naxis_values = 0, 0.5, 1\n").unwrap();
        assert_eq!(spec.axis, Axis::Theta);
        assert_eq!(spec.values.values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(spec.base, ModelParams::symmetric(1.0, 0.0, 1.0, 0.1, 1.0, 1.0));
        assert_eq!(spec.kappa, -FRAC_PI_4);
        assert_eq!(spec.numerics, Numerics::default());
        assert_eq!(spec.outputs, DEFAULT_OUTPUTS.to_vec());
        assert!(spec.thetas.is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_config("axis = theta\n\nfoo = 1\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.message.contains("foo"));
        let e = parse_config("axis = theta\naxis_values = 0, 1\ngamma = fast\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = parse_config("axis = theta\naxis_values = 1, 0\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = parse_config("axis = theta\naxis_values = 0, 2\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = parse_config("theta = 0.3\ngamma = -1\naxis = Gamma\naxis_values = 1\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = parse_config("axis_values = 1\n").unwrap_err();
        assert_eq!(e.line, None);
        let e = parse_config("axis = theta\naxis = gamma\n").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn delta_axis_splits_the_mean() {
        let spec = parse_config("omega1 = 100\naxis = delta\naxis_values = 0, 10\n").unwrap();
        let p = spec.point(10.0, 0.2);
        assert_eq!((p.omega1, p.omega2, p.theta), (105.0, 95.0, 0.2));
        assert!(parse_config("omega1 = 1\naxis = delta\naxis_values = 0, 3\n").is_err());
        assert!(parse_config("omega2 = 2\naxis = delta\naxis_values = 0\n").is_err());
    }

    #[test]
    fn gamma_ratio_follows_the_coupling() {
        let spec = parse_config("gamma_ratio = 10\naxis = Gamma\naxis_range = 1e-3, 1e3\naxis_scale = log\n").unwrap();
        let p = spec.point(2.0, 0.0);
        assert_eq!((p.coupling, p.width), (2.0, 20.0));
        assert!(parse_config("gamma = 1\ngamma_ratio = 1\naxis = theta\naxis_values = 0\n").is_err());
    }

    #[test]
    fn log_range_hits_endpoints() {
        let v = AxisValues::Range {
            start: 1e-10,
            end: 1e4,
            points: 101,
            scale: Scale::Log,
        }
        .values();
        assert_eq!((v[0], v[100]), (1e-10, 1e4));
        assert!((v[20] / 1e-10 - 10f64.powf(20.0 * 14.0 / 100.0)).abs() < 1e-9 * v[20] / 1e-10);
    }

    #[test]
    fn emission_round_trips() {
        let text = "theta = pi/8\nthetas = 0, pi/16\naxis = omega0\naxis_range = 0.01, 10\naxis_points = 11\nworkers = 2\noutputs = Jz, Jx\ntemperature = 1\n";
        let spec = parse_config(text).unwrap();
        let emitted = emit_config(&spec);
        assert_eq!(parse_config(&emitted).unwrap(), spec);
        assert_eq!(emit_config(&parse_config(&emitted).unwrap()), emitted);
    }

    #[test]
    fn simulation_keys_are_separate() {
        let sim = parse_simulation("theta = 0.3\nt_end = 10\nt_points = 11\n").unwrap();
        assert_eq!(sim.times().len(), 11);
        assert_eq!(parse_simulation(&emit_simulation(&sim)).unwrap(), sim);
        assert!(parse_simulation("axis = theta\n").is_err());
        assert!(parse_config("t_end = 3\naxis = theta\naxis_values = 0\n").is_err());
    }
}
