//! Coherence observables Jx = c1†c2 + c2†c1, Jy = i(c2†c1 − c1†c2) and
//! Jz = c2†c2 − c1†c1, split into a vacuum part (initial oscillator state
//! propagated by C) and a thermal part (reservoir occupations propagated by
//! B̃ and weighted by J(ω)·n̄(ω)).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closedform::{steady_resonances, steady_state_B_offset, theta_zero_vacuum_C};
use crate::error::{domain, Error, Result};
use crate::grid::FrequencyGrid;
use crate::laplace::LaplaceSystem;
use crate::model::{occupation, spectral_density, InitialMoments, KernelWeights, ModelParams};
use crate::propagator::{ChannelAmplitudes, CoefficientSet, Trajectory};
use crate::quadrature::{self, QuadOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    /// Time of the snapshot; `None` for steady-state values.
    pub time: Option<f64>,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub jx_vacuum: f64,
    pub jx_thermal: f64,
    pub solver: String,
    /// Error estimate of the thermal frequency integral.
    pub quad_err: f64,
    /// Thermal contribution of [ω_min, 10·ω_min]: how much the reported
    /// values would move if the infrared cutoff were raised tenfold.
    pub omega_min_sensitivity: f64,
}

impl ObservableRecord {
    pub fn split(&self) -> CoherenceSplit {
        CoherenceSplit {
            vacuum: self.jx_vacuum,
            thermal: self.jx_thermal,
        }
    }
}

/// Steady-state coherence split into vacuum and thermal contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSplit {
    pub vacuum: f64,
    pub thermal: f64,
}

impl CoherenceSplit {
    pub fn total(&self) -> f64 {
        self.vacuum + self.thermal
    }
}

/// (Jx, Jy, Jz) carried by the initial oscillator state.
pub fn vacuum_part(c: &[[Complex64; 2]; 2], m: &InitialMoments) -> [f64; 3] {
    let mut s21 = Complex64::new(0.0, 0.0); // Σ C_i^{2*} C_j^1 m_ij = ⟨c2†c1⟩
    let mut n1 = Complex64::new(0.0, 0.0);
    let mut n2 = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            let mij = m.get(i, j);
            s21 += c[i][1].conj() * c[j][0] * mij;
            n1 += c[i][0].conj() * c[j][0] * mij;
            n2 += c[i][1].conj() * c[j][1] * mij;
        }
    }
    // Σ C_i^{1*} C_j^2 m_ij is the conjugate of s21.
    [2.0 * s21.re, -2.0 * s21.im, n2.re - n1.re]
}

/// Spectral kernels (𝓑x, i·𝓑y, 𝓑z) at one frequency: channel-weighted
/// bilinears of B̃ with weights cos⁴θ (common) and sin⁴θ (private).
pub fn spectral_kernels(amp: &ChannelAmplitudes, w: &KernelWeights) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, a) in amp.iter().enumerate() {
        let wk = w.channel(k);
        if wk == 0.0 {
            continue;
        }
        let cross = a[1].conj() * a[0]; // B̃^{2*} B̃^1
        out[0] += wk * 2.0 * cross.re;
        out[1] += wk * -2.0 * cross.im;
        out[2] += wk * (a[1].norm_sqr() - a[0].norm_sqr());
    }
    out
}

/// Thermal integral result with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalPart {
    /// (Jx, Jy, Jz) thermal contributions.
    pub values: [f64; 3],
    pub error: f64,
}

/// Thermal parts from B̃ sampled on `grid`, summing nodes above `omega_min`.
/// The error estimate is the difference between the Gauss–Legendre sum and
/// a trapezoidal sum through the same nodes.
pub fn thermal_part(cs: &CoefficientSet, p: &ModelParams, grid: &FrequencyGrid, omega_min: f64) -> Result<ThermalPart> {
    if cs.btilde.len() != grid.len() {
        return Err(domain(format!(
            "coefficient set has {} frequency samples but the grid has {} nodes",
            cs.btilde.len(),
            grid.len()
        )));
    }
    if !(omega_min > 0.0) {
        return Err(domain("thermal cutoff omega_min must be positive"));
    }
    let w = p.kernel_weights();
    let mut values = [0.0; 3];
    let mut trap = [0.0; 3];
    let mut prev: Option<(f64, [f64; 3])> = None;
    for ((omega, wt), amp) in grid.iter().zip(&cs.btilde) {
        if omega <= omega_min {
            continue;
        }
        let n = occupation(omega, p.temperature);
        if n == 0.0 {
            prev = None;
            continue;
        }
        let k = spectral_kernels(amp, &w);
        let scale = spectral_density(omega, p) * n;
        let f = [k[0] * scale, k[1] * scale, k[2] * scale];
        for c in 0..3 {
            values[c] += wt * f[c];
        }
        if let Some((w0, f0)) = prev {
            for c in 0..3 {
                trap[c] += 0.5 * (omega - w0) * (f0[c] + f[c]);
            }
        }
        prev = Some((omega, f));
    }
    let error = (0..3).map(|c| (values[c] - trap[c]).abs()).fold(0.0, f64::max);
    Ok(ThermalPart { values, error })
}

/// The printed closed-form kernels (𝓑x^c, 𝓑x^i) for ω0 = ω1 = ω2.
pub fn bx_kernels_closedform(p: &ModelParams, omega: f64) -> Result<(f64, f64)> {
    p.validate()?;
    let tol = 4.0 * f64::EPSILON * p.omega1;
    if (p.omega1 - p.omega2).abs() > tol || (p.omega0 - p.omega1).abs() > tol {
        return Err(Error::Unsupported(
            "printed kernels assume omega0 = omega1 = omega2; use the numeric assembly".into(),
        ));
    }
    let w = p.kernel_weights();
    let (c4, s4) = (w.collective, w.individual);
    let (gg, g) = (p.coupling * p.width, p.width);
    let d2 = (p.omega1 - omega).powi(2);
    let kc = (gg * (c4 + s4 / 2.0) - d2).powi(2) + g * g * d2;
    let ks = g * g * d2 + (gg * s4 / 2.0 - d2).powi(2);
    let collective = 2.0 * c4 * (d2 + g * g) / kc;
    let individual = -2.0 * gg * c4 * s4 * (g * g + d2) * (gg / 2.0 * (s4 + c4) - d2) / (ks * kc);
    Ok((collective, individual))
}

/// Integration domain and tolerances for steady-state thermal integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    /// Infrared cutoff; defaults to 1e−6·ω1.
    pub omega_min: Option<f64>,
    /// Upper limit; defaults to ω0 + 50·max(γ, Γ, ω1).
    pub omega_max: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Geometrically spaced panels laid over [ω_min, ω_max] before
    /// adaptive refinement starts.
    pub initial_panels: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            omega_min: None,
            omega_max: None,
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_intervals: 20_000,
            initial_panels: 64,
        }
    }
}

impl SpectralOptions {
    pub fn bounds(&self, p: &ModelParams) -> (f64, f64) {
        (
            self.omega_min.unwrap_or(1e-6 * p.omega1),
            self.omega_max
                .unwrap_or(p.omega0 + 50.0 * p.width.max(p.coupling).max(p.omega1)),
        )
    }
}

enum AmplitudeSource {
    ClosedForm,
    Laplace(Box<LaplaceSystem>),
}

impl AmplitudeSource {
    /// Amplitudes at ω = ω1 + u.
    fn amplitudes(&self, p: &ModelParams, u: f64) -> Result<ChannelAmplitudes> {
        match self {
            AmplitudeSource::ClosedForm => steady_state_B_offset(p, u),
            AmplitudeSource::Laplace(sys) => sys.steady_amplitudes_offset(u),
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            AmplitudeSource::ClosedForm => "closedform",
            AmplitudeSource::Laplace(_) => "laplace",
        }
    }
}

/// Subdivision points for the thermal integrand, as offsets from ω1: the
/// kernel peaks (ω0, ω1, ω2, and every resonance with a geometric ladder of
/// multiples of its width), a decade ladder above the infrared cutoff and
/// `panels` geometric panels over the whole domain. Resonances are given as
/// (offset, width).
fn breakpoints(p: &ModelParams, resonances: &[(f64, f64)], lo: f64, hi: f64, panels: usize) -> Vec<f64> {
    let origin = p.omega1;
    let d0 = p.omega0 - origin;
    let mut pts = vec![lo - origin, hi - origin, d0, 0.0, p.omega2 - origin];
    let ratio = hi / lo;
    for k in 1..panels {
        pts.push(lo * ratio.powf(k as f64 / panels as f64) - origin);
    }
    let mut x = 10.0 * lo;
    while x < hi {
        pts.push(x - origin);
        x *= 10.0;
    }
    for &(center, width) in resonances {
        pts.push(center);
        if !(width > 0.0) {
            continue;
        }
        // Half-decade ladder out to 10⁸ widths and at least γ: Lorentzian
        // tails are not integrated reliably by a single rule spanning
        // several decades.
        let reach = (1e8 * width).max(p.width);
        let mut k = 0;
        loop {
            let step = 10f64.powf(0.5 * k as f64) * width;
            pts.push(center - step);
            pts.push(center + step);
            if step >= reach {
                break;
            }
            k += 1;
        }
    }
    for m in [1.0, 3.0, 10.0, 30.0] {
        pts.push(d0 - m * p.width);
        pts.push(d0 + m * p.width);
    }
    let (a, b) = (lo - origin, hi - origin);
    let mut pts: Vec<f64> = pts.into_iter().filter(|x| x.is_finite() && *x >= a && *x <= b).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Adaptive thermal integrals ∫ J(ω)·(𝓑x, i𝓑y, 𝓑z)(ω)·n̄(ω) dω over the
/// steady-state amplitudes, plus the [ω_min, 10ω_min] sensitivity piece.
/// The integration variable is the offset ω − ω1.
pub fn steady_thermal(p: &ModelParams, opts: &SpectralOptions) -> Result<(ThermalPart, f64, &'static str)> {
    if uncoupled_limit(p)? {
        return Ok((ThermalPart { values: [0.0; 3], error: 0.0 }, 0.0, "uncoupled"));
    }
    let sys = LaplaceSystem::new(p)?;
    // Polynomial roots carry an absolute error near the root precision, so
    // their widths are floored.
    let floor = 1e-3 * p.width;
    let mut resonances: Vec<(f64, f64)> = sys.poles().iter().map(|s| (-s.im - p.omega1, s.re.abs().max(floor))).collect();
    let source = if p.is_symmetric() {
        // The polynomial roots lose accuracy when the spectrum is much
        // narrower than the coupling; the closed-form resonances do not.
        resonances.extend(steady_resonances(p)?.iter().map(|u| (u.re, u.im.abs())));
        AmplitudeSource::ClosedForm
    } else {
        AmplitudeSource::Laplace(Box::new(sys))
    };
    let (lo, hi) = opts.bounds(p);
    if !(lo > 0.0 && lo < hi) {
        return Err(domain(format!("invalid spectral bounds [{lo}, {hi}]")));
    }
    if p.temperature == 0.0 {
        return Ok((ThermalPart { values: [0.0; 3], error: 0.0 }, 0.0, source.tag()));
    }
    let w = p.kernel_weights();
    let g2 = p.width * p.width;
    let d1 = p.omega1 - p.omega0;
    let failure: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let integrand = |u: f64| -> [f64; 3] {
        let n = occupation(p.omega1 + u, p.temperature);
        if n == 0.0 {
            return [0.0; 3];
        }
        match source.amplitudes(p, u) {
            Ok(amp) => {
                let k = spectral_kernels(&amp, &w);
                let d = d1 + u;
                let s = p.coupling / (2.0 * PI) * g2 / (d * d + g2) * n;
                [k[0] * s, k[1] * s, k[2] * s]
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                [0.0; 3]
            }
        }
    };
    let qopts = QuadOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_intervals: opts.max_intervals,
    };
    let pts = breakpoints(p, &resonances, lo, hi, opts.initial_panels);
    let main = quadrature::integrate(integrand, &pts, &qopts)?;
    let edge_hi = (10.0 * lo).min(hi);
    let edge = quadrature::integrate(integrand, &[lo - p.omega1, edge_hi - p.omega1], &qopts)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let sensitivity = edge.value[0];
    Ok((
        ThermalPart {
            values: main.value,
            error: main.error,
        },
        sensitivity,
        source.tag(),
    ))
}

/// Long-time observables. For θ > 0 every C decays and the vacuum part is
/// zero; at θ = 0 with identical oscillators the antisymmetric mode survives
/// and the vacuum part comes from the decoherence-free long-time C.
pub fn steady_state_record(p: &ModelParams, m: &InitialMoments, opts: &SpectralOptions) -> Result<ObservableRecord> {
    if uncoupled_limit(p)? {
        // Free evolution: identical oscillators keep their initial coherence.
        if !p.is_symmetric() {
            return Err(Error::NoSteadyState(Complex64::new(0.0, -p.omega2)));
        }
        let zero = ThermalPart { values: [0.0; 3], error: 0.0 };
        let vacuum = vacuum_part(&CoefficientSet::initial(0).c, m);
        return Ok(combine(None, vacuum, &zero, 0.0, "uncoupled".into()));
    }
    let (vacuum, vac_tag) = if p.theta == 0.0 && p.is_symmetric() {
        (vacuum_part(&theta_zero_vacuum_C(p.omega1, 0.0), m), "+theta0")
    } else {
        check_decaying(p)?;
        ([0.0; 3], "")
    };
    let (thermal, sensitivity, tag) = steady_thermal(p, opts)?;
    Ok(combine(None, vacuum, &thermal, sensitivity, format!("{tag}{vac_tag}")))
}

/// Errors unless every mode decays. In the symmetric case the rates come
/// from the offset-frame resonances, which resolve rates far below the
/// root precision of the full determinant.
fn check_decaying(p: &ModelParams) -> Result<()> {
    if !p.is_symmetric() {
        return LaplaceSystem::new(p)?.check_decaying();
    }
    for u in steady_resonances(p)? {
        if u.im >= 0.0 {
            return Err(Error::NoSteadyState(Complex64::new(u.im, -(p.omega1 + u.re))));
        }
    }
    Ok(())
}

/// True for Γ = 0 or γ = 0, where J(ω) vanishes identically. γ = 0 is
/// otherwise outside the model domain and is accepted only here.
fn uncoupled_limit(p: &ModelParams) -> Result<bool> {
    if p.width == 0.0 {
        ModelParams { width: 1.0, ..*p }.validate()?;
        return Ok(true);
    }
    p.validate()?;
    Ok(p.coupling == 0.0)
}

fn combine(time: Option<f64>, vacuum: [f64; 3], thermal: &ThermalPart, sensitivity: f64, solver: String) -> ObservableRecord {
    ObservableRecord {
        time,
        jx: vacuum[0] + thermal.values[0],
        jy: vacuum[1] + thermal.values[1],
        jz: vacuum[2] + thermal.values[2],
        jx_vacuum: vacuum[0],
        jx_thermal: thermal.values[0],
        solver,
        quad_err: thermal.error,
        omega_min_sensitivity: sensitivity,
    }
}

/// Observables for every snapshot of a trajectory sampled on `grid`; the
/// thermal sum uses nodes above `omega_min`.
pub fn time_dependent_record(
    traj: &Trajectory,
    m: &InitialMoments,
    p: &ModelParams,
    grid: &FrequencyGrid,
    omega_min: f64,
) -> Result<Vec<ObservableRecord>> {
    traj.snapshots
        .iter()
        .map(|cs| {
            let vacuum = vacuum_part(&cs.c, m);
            let thermal = thermal_part(cs, p, grid, omega_min)?;
            let edge = grid
                .iter()
                .zip(&cs.btilde)
                .filter(|((w, _), _)| *w > omega_min && *w <= 10.0 * omega_min)
                .map(|((w, wt), amp)| {
                    wt * spectral_density(w, p)
                        * occupation(w, p.temperature)
                        * spectral_kernels(amp, &p.kernel_weights())[0]
                })
                .sum();
            Ok(combine(Some(cs.time), vacuum, &thermal, edge, traj.solver.as_str().to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::{steady_state_B, theta_zero_vacuum_C};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn fig1a(theta: f64) -> ModelParams {
        ModelParams::symmetric(1.0, theta, 1.0, 0.1, 1.0, 1.0)
    }

    #[test]
    fn vacuum_at_start_and_theta_zero() {
        let id = CoefficientSet::initial(0).c;
        let m = InitialMoments::from_kappa(-FRAC_PI_4);
        let v = vacuum_part(&id, &m);
        assert!((v[0] + 1.0).abs() < 1e-15 && v[1].abs() < 1e-15 && v[2].abs() < 1e-15);
        let c = theta_zero_vacuum_C(1.0, 12.3);
        assert!((vacuum_part(&c, &m)[0] + 1.0).abs() < 1e-14);
        assert!(vacuum_part(&c, &InitialMoments::from_kappa(FRAC_PI_4))[0].abs() < 1e-14);
    }

    #[test]
    fn jy_is_twice_imaginary_cross_moment() {
        let m = InitialMoments::new(0.3, 0.6, Complex64::new(0.1, 0.2)).unwrap();
        let v = vacuum_part(&CoefficientSet::initial(0).c, &m);
        assert!((v[1] - 2.0 * 0.2).abs() < 1e-15);
        assert!((v[2] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn printed_kernels_match_numeric_assembly() {
        for theta in [0.0, 0.3, FRAC_PI_4, 1.2, FRAC_PI_2] {
            let p = fig1a(theta);
            for omega in [0.4, 0.95, 1.2, 2.5] {
                let (c, i) = bx_kernels_closedform(&p, omega).unwrap();
                let k = spectral_kernels(&steady_state_B(&p, omega).unwrap(), &p.kernel_weights());
                assert!((c + i - k[0]).abs() < 1e-10 * (1.0 + k[0].abs()), "theta {theta}, omega {omega}");
            }
        }
        let (c, _) = bx_kernels_closedform(&fig1a(FRAC_PI_2), 1.2).unwrap();
        assert_eq!(c, 0.0);
        let (_, i) = bx_kernels_closedform(&fig1a(0.0), 1.2).unwrap();
        assert_eq!(i, 0.0);
        assert!(bx_kernels_closedform(&ModelParams { omega0: 2.0, ..fig1a(0.3) }, 1.0).is_err());
    }

    #[test]
    fn steady_state_edge_cases() {
        let m = InitialMoments::from_kappa(-FRAC_PI_4);
        let r = steady_state_record(&fig1a(FRAC_PI_2), &m, &SpectralOptions::default()).unwrap();
        assert_eq!(r.jx, 0.0);
        let cold = ModelParams { temperature: 0.0, ..fig1a(0.5) };
        let r = steady_state_record(&cold, &m, &SpectralOptions::default()).unwrap();
        assert_eq!((r.jx_thermal, r.jy, r.jz), (0.0, 0.0, 0.0));
        let r = steady_state_record(&fig1a(0.0), &m, &SpectralOptions::default()).unwrap();
        assert!((r.jx_vacuum + 1.0).abs() < 1e-14);
        assert_eq!(r.jx, r.jx_vacuum + r.jx_thermal);
    }

    #[test]
    fn zero_width_is_uncoupled() {
        let m = InitialMoments::from_kappa(-FRAC_PI_4);
        for theta in [0.0, FRAC_PI_4] {
            let p = ModelParams { width: 0.0, ..fig1a(theta) };
            let (t, _, _) = steady_thermal(&p, &SpectralOptions::default()).unwrap();
            assert_eq!(t.values, [0.0; 3]);
            let r = steady_state_record(&p, &m, &SpectralOptions::default()).unwrap();
            assert_eq!((r.jx_thermal, r.jx_vacuum), (0.0, -1.0));
        }
        let bad = ModelParams { width: -1.0, ..fig1a(0.3) };
        assert!(steady_thermal(&bad, &SpectralOptions::default()).is_err());
    }
}
