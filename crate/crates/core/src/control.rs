//! Control pulses that keep the Lambda system on its designed path, plus the
//! speed and energy metrics of those pulses.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::numerics::simpson;
use crate::schedule::{self, ScheduleParams, ScheduleSample};

/// Grid size used for quadratures when the caller has no preference.
pub const DEFAULT_GRID_SIZE: usize = 4001;

/// Smallest grid accepted by [`pulse_metrics`].
pub const MIN_METRICS_GRID: usize = 512;

/// Area of two successive resonant pi pulses, one per transition.
pub const TWO_PI_PULSE_AREA: f64 = 2.0 * PI;

/// Minimum transfer area of the singular-Riemannian geodesic, sqrt(3) pi.
pub const GEODESIC_MIN_AREA: f64 = 1.732_050_807_568_877_2 * PI;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ControlSample {
    pub t: f64,
    pub omega_p: f64,
    pub omega_s: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl ControlSample {
    pub fn zero(t: f64) -> Self {
        Self { t, omega_p: 0.0, omega_s: 0.0, delta1: 0.0, delta2: 0.0 }
    }

    /// sqrt(omega_p^2 + omega_s^2)
    pub fn rabi_norm(&self) -> f64 {
        self.omega_p.hypot(self.omega_s)
    }

    /// Both Rabi frequencies multiplied by `factor`, detunings untouched.
    pub fn scale_rabi(&self, factor: f64) -> Self {
        Self { omega_p: self.omega_p * factor, omega_s: self.omega_s * factor, ..*self }
    }
}

/// Path angles, phases and their rates at one instant, for the general
/// synthesis with independent phases.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PathPoint {
    pub t: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub gamma: f64,
    pub gamma_dot: f64,
    pub phi1: f64,
    pub phi1_dot: f64,
    pub phi2: f64,
    pub phi2_dot: f64,
}

impl PathPoint {
    pub fn from_schedule(s: &ScheduleSample, phi: f64) -> Self {
        Self {
            t: s.t,
            theta: s.theta,
            theta_dot: s.theta_dot,
            gamma: s.gamma,
            gamma_dot: s.gamma_dot,
            phi1: phi,
            phi1_dot: 0.0,
            phi2: -phi,
            phi2_dot: 0.0,
        }
    }
}

/// Controls for arbitrary (possibly time-dependent) phases phi1, phi2.
///
/// The delta1 expression uses -cot(2 gamma) in front of the Rabi term; this is
/// the coefficient that nulls the path couplings and that reduces to the
/// constant-phase form used by [`synthesize`].
pub fn synthesize_general(p: &PathPoint) -> ControlSample {
    let (st, ct) = p.theta.sin_cos();
    let (sg, cg) = p.gamma.sin_cos();
    let cot_g = cg / sg;
    let omega_p = 2.0 / p.phi1.sin() * (p.theta_dot * cot_g * st + p.gamma_dot * ct);
    let omega_s = 2.0 / p.phi2.sin() * (-p.theta_dot * cot_g * ct + p.gamma_dot * st);
    let (c1, c2) = (p.phi1.cos(), p.phi2.cos());
    let delta2 = (omega_p * c1 / (2.0 * ct) - omega_s * c2 / (2.0 * st)) * sg / cg + p.phi1_dot - p.phi2_dot;
    let delta1 = -(omega_p * ct * c1 + omega_s * st * c2) / (2.0 * p.gamma).tan()
        + p.phi1_dot * ct * ct
        + p.phi2_dot * st * st
        + delta2 * st * st;
    ControlSample { t: p.t, omega_p, omega_s, delta1, delta2 }
}

fn require_nonsingular(params: &ScheduleParams, s: &ScheduleSample) -> Result<()> {
    if params.gamma0 <= 0.0 || s.gamma <= 0.0 {
        return Err(Error::SingularSchedule(format!(
            "gamma({}) = {} makes cot(gamma) diverge; gamma0 must be positive",
            s.t, s.gamma
        )));
    }
    Ok(())
}

/// cot(phi), snapped to exactly zero on resonance so that phi = pi/2 yields
/// identically vanishing detunings and global phase.
pub(crate) fn cot_phi(phi: f64) -> f64 {
    if (phi - std::f64::consts::FRAC_PI_2).abs() <= 1e-12 {
        0.0
    } else {
        phi.cos() / phi.sin()
    }
}

/// Controls from a schedule sample with phi1 = -phi2 = phi.
pub(crate) fn controls_from_sample(phi: f64, s: &ScheduleSample) -> ControlSample {
    let (st, ct) = s.theta.sin_cos();
    let (sg, cg) = s.gamma.sin_cos();
    let rate = s.theta_dot * cg / sg;
    let k = 2.0 / phi.sin();
    let omega_p = k * (rate * st + s.gamma_dot * ct);
    let omega_s = k * (rate * ct - s.gamma_dot * st);

    let cot_phi = cot_phi(phi);
    let (delta1, delta2) = if cot_phi == 0.0 {
        (0.0, 0.0)
    } else {
        let ramp = s.theta_dot_cot_2theta() - s.gamma_dot * sg / cg;
        let s2t = (2.0 * s.theta).sin();
        let c2t = (2.0 * s.theta).cos();
        let d2 = -2.0 * cot_phi * ramp;
        let d1 = -2.0 * cot_phi * ((rate * s2t + s.gamma_dot * c2t) / (2.0 * s.gamma).tan() + ramp * st * st);
        (d1, d2)
    };
    ControlSample { t: s.t, omega_p, omega_s, delta1, delta2 }
}

/// Pump, Stokes and detunings at time `t`.
///
/// phi = pi/2 gives exactly zero detunings.
pub fn synthesize(params: &ScheduleParams, t: f64) -> Result<ControlSample> {
    let s = schedule::evaluate(params, t)?;
    require_nonsingular(params, &s)?;
    Ok(controls_from_sample(params.phi, &s))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Envelope {
    pub omega0: f64,
    pub theta_tilde: f64,
}

pub(crate) fn envelope_from_sample(phi: f64, s: &ScheduleSample) -> Envelope {
    let rate = s.theta_dot / s.gamma.tan();
    Envelope {
        omega0: 2.0 / phi.sin() * rate.hypot(s.gamma_dot),
        theta_tilde: s.theta + s.gamma_dot.atan2(rate),
    }
}

/// Polar form: omega_p = omega0 sin(theta_tilde), omega_s = omega0 cos(theta_tilde).
pub fn envelope(params: &ScheduleParams, t: f64) -> Result<Envelope> {
    let s = schedule::evaluate(params, t)?;
    require_nonsingular(params, &s)?;
    Ok(envelope_from_sample(params.phi, &s))
}

fn phase_integrand(params: &ScheduleParams, t: f64) -> f64 {
    let s = schedule::evaluate_unchecked(params, t);
    let cot_phi = cot_phi(params.phi);
    (s.theta_dot_tan_theta() + s.gamma_dot * s.gamma.tan()) * cot_phi
}

/// Global phase beta0 at every node of a uniform grid with `steps`
/// intervals over the window. Each interval is integrated with Simpson's rule
/// through its midpoint, matching the RK4 stage times.
pub fn global_phase_profile(params: &ScheduleParams, steps: usize) -> Vec<f64> {
    let grid = params.grid(steps + 1);
    let mut out = Vec::with_capacity(grid.len());
    let mut beta = 0.0;
    out.push(beta);
    if cot_phi(params.phi) == 0.0 {
        out.resize(grid.len(), 0.0);
        return out;
    }
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = 0.5 * (a + b);
        let inc = (b - a) / 6.0 * (phase_integrand(params, a) + 4.0 * phase_integrand(params, m) + phase_integrand(params, b));
        beta -= inc;
        out.push(beta);
    }
    out
}

/// beta0(t) = -int_{t_i}^{t} (theta_dot tan theta + gamma_dot tan gamma) cot phi dt'.
pub fn global_phase(params: &ScheduleParams, t: f64) -> Result<f64> {
    let s = schedule::evaluate(params, t)?;
    let ti = params.t_initial();
    if cot_phi(params.phi) == 0.0 || s.t <= ti {
        return Ok(0.0);
    }
    // interval count proportional to the covered fraction, always even
    let frac = (t - ti) / params.total_time;
    let n = (((DEFAULT_GRID_SIZE - 1) as f64 * frac).ceil() as usize).max(2);
    let n = n + n % 2;
    let nodes = schedule::uniform_grid(ti, t, n + 1);
    let vals: Vec<f64> = nodes.iter().map(|&x| phase_integrand(params, x)).collect();
    Ok(-simpson(&vals, (t - ti) / n as f64))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PulseMetrics {
    /// int sqrt(omega_p^2 + omega_s^2) dt over the window (rad).
    pub area: f64,
    pub omega0_max: f64,
    /// T * omega0_max
    pub time_scale: f64,
}

pub fn pulse_metrics(params: &ScheduleParams, grid_size: usize) -> Result<PulseMetrics> {
    if grid_size < MIN_METRICS_GRID {
        return Err(Error::Range(format!("metrics grid needs at least {MIN_METRICS_GRID} points, got {grid_size}")));
    }
    let grid = params.grid(grid_size);
    let mut omega0 = Vec::with_capacity(grid_size);
    for &t in &grid {
        let s = schedule::evaluate_unchecked(params, t);
        require_nonsingular(params, &s)?;
        omega0.push(envelope_from_sample(params.phi, &s).omega0);
    }
    let h = params.total_time / (grid_size - 1) as f64;
    let area = simpson(&omega0, h);
    let omega0_max = omega0.iter().copied().fold(0.0, f64::max);
    Ok(PulseMetrics { area, omega0_max, time_scale: params.total_time * omega0_max })
}

/// Closed-form metrics of the constant-gamma (adiabatic, dark-state) limit.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct AdiabaticReference {
    pub area: f64,
    pub omega0_max: f64,
    pub time_scale: f64,
    /// sqrt(2) cot(gamma0); the limit is adiabatic when this is much larger than 1.
    pub adiabaticity: f64,
}

/// `tau1` is the logistic width in units of the total time T (T = 1).
pub fn adiabatic_reference(gamma0: f64, tau1: f64, phi: f64) -> Result<AdiabaticReference> {
    check_reference_inputs(gamma0, tau1, phi)?;
    let cot_g = 1.0 / gamma0.tan();
    let omega0_max = PI * cot_g / (4.0 * tau1 * phi.sin());
    Ok(AdiabaticReference {
        area: PI * cot_g / phi.sin(),
        omega0_max,
        time_scale: omega0_max,
        adiabaticity: SQRT_2 * cot_g,
    })
}

/// Quadrature of the constant-gamma envelope (2/sin phi) theta_dot cot(gamma0)
/// over `[-half_width, half_width]` (units of T) on `grid_size` points.
pub fn constant_gamma_metrics(gamma0: f64, tau1: f64, phi: f64, half_width: f64, grid_size: usize) -> Result<PulseMetrics> {
    check_reference_inputs(gamma0, tau1, phi)?;
    if grid_size < MIN_METRICS_GRID || half_width <= 0.0 {
        return Err(Error::Range("constant-gamma quadrature needs a positive window and >= 512 points".into()));
    }
    let k = 2.0 / (phi.sin() * gamma0.tan());
    let grid = schedule::uniform_grid(-half_width, half_width, grid_size);
    let omega0: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let x = t / tau1;
            let e = (-x.abs()).exp();
            k * 0.5 * PI * e / (tau1 * (1.0 + e) * (1.0 + e))
        })
        .collect();
    let area = simpson(&omega0, 2.0 * half_width / (grid_size - 1) as f64);
    let omega0_max = omega0.iter().copied().fold(0.0, f64::max);
    Ok(PulseMetrics { area, omega0_max, time_scale: omega0_max })
}

fn check_reference_inputs(gamma0: f64, tau1: f64, phi: f64) -> Result<()> {
    if !(gamma0 > 0.0 && gamma0 < 0.5 * PI) {
        return Err(Error::Range(format!("gamma0 must lie in (0, pi/2), got {gamma0}")));
    }
    if !(tau1 > 0.0 && phi > 0.0 && phi <= 0.5 * PI + 1e-12) {
        return Err(Error::Range(format!("need tau1 > 0 and 0 < phi <= pi/2, got tau1 = {tau1}, phi = {phi}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Waveforms {
    pub grid: Vec<f64>,
    pub samples: Vec<ControlSample>,
    pub params: ScheduleParams,
}

impl Waveforms {
    pub fn max_rabi_norm(&self) -> f64 {
        self.samples.iter().map(ControlSample::rabi_norm).fold(0.0, f64::max)
    }
}

pub fn sample_waveforms(params: &ScheduleParams, grid_size: usize) -> Result<Waveforms> {
    if grid_size < 2 {
        return Err(Error::Range(format!("waveform grid needs at least 2 points, got {grid_size}")));
    }
    let grid = params.grid(grid_size);
    let samples = grid.iter().map(|&t| synthesize(params, t)).collect::<Result<Vec<_>>>()?;
    Ok(Waveforms { grid, samples, params: *params })
}
