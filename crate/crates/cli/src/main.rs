use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use oscbath::config::{format_number, parse_number};
use oscbath::emit::{self, Format};
use oscbath::{figure_preset, parse_config, parse_simulation, preset_config, run_family, run_simulation, SweepError};
use oscbath_core::closedform::{limit_markovian_sstc, limit_narrowband_sstc};
use oscbath_core::observables::steady_thermal;
use oscbath_core::propagator::{evolve_coefficients, DiscreteBath, SolverControls};
use oscbath_core::{spectral_density, ModelParams};

#[derive(Parser)]
#[command(name = "oscbath", version, about = "Steady-state and time-dependent coherence of two oscillators in common and private Lorentzian reservoirs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of the observables from a config file.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Steady-state sweep described by a config file.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sweep of a figure preset.
    Figure {
        /// One of fig1a, fig1b, fig2, fig3a, fig3b, fig4a, fig4b, fig5.
        name: String,
        /// Print the preset config and exit.
        #[arg(long)]
        print_config: bool,
        /// Override the number of axis points.
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare the coefficient propagator with an exactly diagonalized
    /// discrete bath.
    OracleCheck {
        /// Modes per reservoir.
        #[arg(long, default_value_t = 400)]
        modes: usize,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        /// Spectral width; the other parameters are ω1 = ω2 = ω0 = Γ = T = 1.
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        /// Mixing angles, comma separated (pi fractions allowed).
        #[arg(long, default_value = "0, pi/8, pi/4")]
        thetas: String,
    },
    /// Closed-form limits next to the full steady-state pipeline.
    Limits {
        /// γ/Γ of the broad-spectrum (Markovian) check.
        #[arg(long, default_value_t = 1e3)]
        broad: f64,
        /// γ/Γ of the narrow-band check.
        #[arg(long, default_value_t = 1e-4)]
        narrow: f64,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Directory for output files; CSV goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats, comma separated: csv, json, svg.
    #[arg(long, default_value = "csv")]
    format: String,
    /// File stem; defaults to the config file stem or preset name.
    #[arg(long)]
    stem: Option<String>,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn io(e: std::io::Error, what: &Path) -> Failure {
    Failure::Io(format!("{}: {e}", what.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io(e, path))
}

fn formats(s: &str) -> Result<Vec<Format>, Failure> {
    s.split(',')
        .map(|f| Format::parse(f.trim()).ok_or_else(|| Failure::Config(format!("unknown format `{}` (expected csv, json, svg)", f.trim()))))
        .collect()
}

fn stem_of(out: &OutputArgs, fallback: &str) -> String {
    out.stem.clone().unwrap_or_else(|| fallback.to_string())
}

fn path_stem(p: &Path) -> String {
    p.file_stem().map_or("oscbath".into(), |s| s.to_string_lossy().into_owned())
}

fn stdout(text: &str) -> Result<(), Failure> {
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Io(format!("stdout: {e}")))
}

fn emit_sweep(spec: &oscbath::SweepSpec, out: &OutputArgs, stem: &str) -> Result<(), Failure> {
    let fmts = formats(&out.format)?;
    let tables = run_family(spec)?;
    for t in &tables {
        if t.failures() > 0 {
            eprintln!("theta = {}: {} of {} points failed", format_number(t.spec.base.theta), t.failures(), t.rows.len());
        }
    }
    match &out.out {
        Some(dir) => {
            for path in emit::write_tables(dir, stem, &tables, &fmts).map_err(|e| io(e, dir))? {
                eprintln!("wrote {path}");
            }
            Ok(())
        }
        None => {
            let text: Vec<String> = tables.iter().map(emit::table_csv).collect();
            stdout(&text.join("\n"))
        }
    }
}

fn oracle_check(modes: usize, tolerance: f64, gamma: f64, thetas: &str) -> Result<(), Failure> {
    let thetas: Vec<f64> = thetas
        .split(',')
        .map(|t| parse_number(t).ok_or_else(|| Failure::Config(format!("bad theta `{}`", t.trim()))))
        .collect::<Result<_, _>>()?;
    let mut report = String::from("theta,modes,t_max,max_deviation,seconds,status\n");
    let mut failed = false;
    for theta in thetas {
        let start = Instant::now();
        let p = ModelParams::symmetric(1.0, theta, 1.0, gamma, 1.0, 1.0);
        let span = (p.omega0 - 40.0 * gamma, p.omega0 + 40.0 * gamma);
        let bath = DiscreteBath::new(&p, modes, span).map_err(|e| Failure::Config(e.to_string()))?;
        let times: Vec<f64> = (0..=10).map(|n| n as f64 / gamma).collect();
        let traj = evolve_coefficients(&p, bath.grid(), &times, &SolverControls::default())
            .map_err(|e| Failure::Numerical(e.to_string()))?;
        let w = p.kernel_weights();
        let mut worst: f64 = 0.0;
        for snap in &traj.snapshots {
            let exact = bath.coefficient_set(snap.time);
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max((exact.c[i][j] - snap.c[i][j]).norm());
                }
            }
            for (n, (omega, dw)) in bath.grid().iter().enumerate() {
                let g = (spectral_density(omega, &p) * dw).sqrt();
                for k in 0..3 {
                    let gk = g * w.channel(k).sqrt();
                    for j in 0..2 {
                        worst = worst.max(gk * (exact.btilde[n][k][j] - snap.btilde[n][k][j]).norm());
                    }
                }
            }
        }
        let ok = worst <= tolerance;
        failed |= !ok;
        report.push_str(&format!(
            "{},{modes},{},{worst:.3e},{:.2},{}\n",
            format_number(theta),
            format_number(10.0 / gamma),
            start.elapsed().as_secs_f64(),
            if ok { "ok" } else { "exceeds tolerance" }
        ));
    }
    stdout(&report)?;
    if failed {
        return Err(Failure::Numerical(format!("propagator deviates from the discrete bath by more than {tolerance:e}")));
    }
    Ok(())
}

fn limits(broad: f64, narrow: f64) -> Result<(), Failure> {
    let mut report = String::from("regime,gamma_over_Gamma,theta,formula,pipeline,quad_err,relative_difference\n");
    for (regime, ratio) in [("markovian", broad), ("narrow_band", narrow)] {
        for theta in [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8] {
            let p = ModelParams::symmetric(1.0, theta, 1.0 / ratio.max(1.0), ratio.min(1.0), 1.0, 1.0);
            let formula = if regime == "markovian" {
                limit_markovian_sstc(&p)
            } else {
                limit_narrowband_sstc(&p)
            };
            let (thermal, _, _) = steady_thermal(&p, &Default::default()).map_err(|e| Failure::Numerical(e.to_string()))?;
            let value = thermal.values[0];
            report.push_str(&format!(
                "{regime},{},{},{},{},{:.3e},{:.3e}\n",
                format_number(ratio),
                format_number(theta),
                format_number(formula),
                format_number(value),
                thermal.error,
                (value - formula).abs() / formula.abs()
            ));
        }
    }
    stdout(&report)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { config, out } => {
            let spec = parse_simulation(&read(&config)?).map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
            let fmts = formats(&out.format)?;
            let ts = run_simulation(&spec)?;
            match &out.out {
                Some(dir) => {
                    let stem = stem_of(&out, &path_stem(&config));
                    for path in emit::write_timeseries(dir, &stem, &ts, &fmts).map_err(|e| io(e, dir))? {
                        eprintln!("wrote {path}");
                    }
                    Ok(())
                }
                None => stdout(&emit::timeseries_csv(&ts)),
            }
        }
        Command::Sweep { config, out } => {
            let spec = parse_config(&read(&config)?).map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
            emit_sweep(&spec, &out, &stem_of(&out, &path_stem(&config)))
        }
        Command::Figure {
            name,
            print_config,
            points,
            out,
        } => {
            let text = preset_config(&name).map_err(|e| Failure::Config(e.to_string()))?;
            if print_config {
                return stdout(&text);
            }
            let mut spec = figure_preset(&name).map_err(|e| Failure::Config(e.to_string()))?;
            if let Some(n) = points {
                match &mut spec.values {
                    oscbath::AxisValues::Range { points, .. } if n > 0 => *points = n,
                    _ => return Err(Failure::Config("--points must be positive".into())),
                }
            }
            emit_sweep(&spec, &out, &stem_of(&out, &name))
        }
        Command::OracleCheck {
            modes,
            tolerance,
            gamma,
            thetas,
        } => oracle_check(modes, tolerance, gamma, &thetas),
        Command::Limits { broad, narrow } => limits(broad, narrow),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
