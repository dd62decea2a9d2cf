//! Parallel steady-state sweeps and time series.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use oscbath_core::observables::{steady_state_record, time_dependent_record, ObservableRecord};
use oscbath_core::propagator::{default_grid, evolve_coefficients, SolverControls};
use oscbath_core::InitialMoments;
use rayon::prelude::*;

use crate::config::{Axis, SimulationSpec, SweepSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum SweepError {
    /// Every point of the sweep failed; carries the first failure.
    AllFailed(String),
    /// The worker pool could not be built.
    Pool(String),
    /// A time series failed.
    Numerical(String),
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepError::AllFailed(e) => write!(f, "every sweep point failed; first failure: {e}"),
            SweepError::Pool(e) => write!(f, "cannot start worker pool: {e}"),
            SweepError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for SweepError {}

/// Wall-clock facts about a run; the only nondeterministic part of a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunInfo {
    pub unix_time: u64,
    pub wall_seconds: f64,
}

impl RunInfo {
    fn since(start: Instant) -> Self {
        Self {
            unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            wall_seconds: start.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub axis: f64,
    pub record: Result<ObservableRecord, String>,
}

/// One steady-state sweep at a single mixing angle.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    /// The sweep that produced the table, with its theta family collapsed.
    pub spec: SweepSpec,
    pub rows: Vec<Row>,
    pub run: RunInfo,
}

impl ResultTable {
    /// Axis value in figure units: θ in units of π/2, γ in units of Γ,
    /// everything else unchanged.
    pub fn axis_unit(&self, value: f64) -> f64 {
        match self.spec.axis {
            Axis::Theta => value / FRAC_PI_2,
            Axis::Gamma => value / self.spec.base.coupling,
            _ => value,
        }
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.record.is_err()).count()
    }

    /// Successful (axis, record) pairs in axis order.
    pub fn records(&self) -> impl Iterator<Item = (f64, &ObservableRecord)> {
        self.rows.iter().filter_map(|r| r.record.as_ref().ok().map(|rec| (r.axis, rec)))
    }
}

/// Steady-state observables at one axis value and mixing angle.
pub fn evaluate_point(spec: &SweepSpec, value: f64, theta: f64) -> Result<ObservableRecord, String> {
    let p = spec.point(value, theta);
    let m = InitialMoments::from_kappa(spec.kappa);
    steady_state_record(&p, &m, &spec.numerics.spectral_options()).map_err(|e| e.to_string())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, SweepError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))
}

/// Sweeps the axis at `spec.base.theta`. Points run concurrently and are
/// merged by axis index; a failing point is recorded in its row.
pub fn run_sweep(spec: &SweepSpec) -> Result<ResultTable, SweepError> {
    let start = Instant::now();
    let member = spec.member(spec.base.theta);
    let values = member.values.values();
    let theta = member.base.theta;
    let rows: Vec<Row> = pool(member.numerics.workers)?.install(|| {
        values
            .par_iter()
            .map(|&v| Row {
                axis: v,
                record: evaluate_point(&member, v, theta),
            })
            .collect()
    });
    if !rows.is_empty() && rows.iter().all(|r| r.record.is_err()) {
        let first = rows[0].record.clone().unwrap_err();
        return Err(SweepError::AllFailed(first));
    }
    Ok(ResultTable {
        spec: member,
        rows,
        run: RunInfo::since(start),
    })
}

/// One table per mixing angle of the family.
pub fn run_family(spec: &SweepSpec) -> Result<Vec<ResultTable>, SweepError> {
    spec.family().into_iter().map(|theta| run_sweep(&spec.member(theta))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub spec: SimulationSpec,
    pub records: Vec<ObservableRecord>,
    pub run: RunInfo,
}

/// Time-dependent observables from the coefficient equations on the default
/// frequency grid.
pub fn run_simulation(spec: &SimulationSpec) -> Result<TimeSeries, SweepError> {
    let start = Instant::now();
    let p = &spec.params;
    let omega_min = spec.numerics.spectral_options().bounds(p).0;
    let numerical = |e: oscbath_core::Error| SweepError::Numerical(e.to_string());
    let records = pool(spec.numerics.workers)?.install(|| {
        let grid = default_grid(p, omega_min, spec.numerics.grid_points).map_err(numerical)?;
        let traj = evolve_coefficients(p, &grid, &spec.times(), &SolverControls::default()).map_err(numerical)?;
        time_dependent_record(&traj, &InitialMoments::from_kappa(spec.kappa), p, &grid, omega_min).map_err(numerical)
    })?;
    Ok(TimeSeries {
        spec: spec.clone(),
        records,
        run: RunInfo::since(start),
    })
}
