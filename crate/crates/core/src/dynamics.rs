//! Pure-state dynamics under the Lambda Hamiltonian and the checks that the
//! synthesized controls keep the state on the designed path.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64 as C64;

use crate::basis::{lambda_frame, FrameBasis, FrameRates};
use crate::control::{self, ControlSample};
use crate::error::{Error, Result};
use crate::numerics::rk4_step;
use crate::schedule::{self, ScheduleParams};

/// Integration steps used when the caller has no preference.
pub const DEFAULT_STEPS: usize = 4000;

/// Fewest steps accepted by the integrators.
pub const MIN_STEPS: usize = 1000;

/// Norm drift beyond which a trajectory is rejected.
pub const MAX_NORM_DRIFT: f64 = 1e-6;

/// Floor applied to 1 - P_d before taking log10.
pub const INFIDELITY_FLOOR: f64 = 1e-16;

pub const G: usize = 0;
pub const A: usize = 1;
pub const E: usize = 2;

/// Three amplitudes in the order (|g>, |a>, |e>).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct QuantumState(Vector3<C64>);

impl QuantumState {
    pub const NORM_TOL: f64 = 1e-10;

    pub fn new(amplitudes: Vector3<C64>) -> Result<Self> {
        let drift = (amplitudes.norm_squared() - 1.0).abs();
        if drift > Self::NORM_TOL {
            return Err(Error::InvariantViolation(format!("state norm differs from 1 by {drift:e}")));
        }
        Ok(Self(amplitudes))
    }

    fn basis(k: usize) -> Self {
        let mut v = Vector3::zeros();
        v[k] = C64::ONE;
        Self(v)
    }

    pub fn ground() -> Self {
        Self::basis(G)
    }

    pub fn intermediate() -> Self {
        Self::basis(A)
    }

    pub fn excited() -> Self {
        Self::basis(E)
    }

    /// |g> carrying the phase of the path's g component, e^{i phi}|g>. Same
    /// physical state as [`QuantumState::ground`]; used where phases are compared.
    pub fn path_start(params: &ScheduleParams) -> Self {
        let mut v = Vector3::zeros();
        v[G] = C64::from_polar(1.0, params.phi);
        Self(v)
    }

    pub fn amplitudes(&self) -> &Vector3<C64> {
        &self.0
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.0[G].norm_sqr(), self.0[A].norm_sqr(), self.0[E].norm_sqr()]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateTrajectory {
    pub grid: Vec<f64>,
    pub states: Vec<QuantumState>,
    /// (P_g, P_a, P_e) per sample.
    pub populations: Vec<[f64; 3]>,
    /// max_t | ||psi(t)|| - 1 |
    pub norm_drift: f64,
}

impl StateTrajectory {
    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("trajectories hold at least two samples")
    }

    pub fn final_populations(&self) -> [f64; 3] {
        *self.populations.last().expect("trajectories hold at least two samples")
    }

    pub fn steps(&self) -> usize {
        self.grid.len() - 1
    }
}

/// H = (1/2)[omega_p |a><g| + omega_s |a><e| + h.c.] + delta1 |a><a| + delta2 |e><e|
pub fn hamiltonian(c: &ControlSample) -> Matrix3<C64> {
    let mut h = coupling_hamiltonian(c);
    h[(A, A)] = c.delta1.into();
    h[(E, E)] = c.delta2.into();
    h
}

/// Rabi part of [`hamiltonian`] alone, (1/2)[omega_p |a><g| + omega_s |a><e|] + h.c.
pub fn coupling_hamiltonian(c: &ControlSample) -> Matrix3<C64> {
    let mut h = Matrix3::zeros();
    h[(A, G)] = (0.5 * c.omega_p).into();
    h[(G, A)] = (0.5 * c.omega_p).into();
    h[(A, E)] = (0.5 * c.omega_s).into();
    h[(E, A)] = (0.5 * c.omega_s).into();
    h
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < MIN_STEPS {
        return Err(Error::Range(format!("at least {MIN_STEPS} integration steps are required, got {steps}")));
    }
    Ok(())
}

/// Designed controls at `t`, with the window and singularity checks hoisted
/// out of the time loop.
pub(crate) fn controls_at(params: &ScheduleParams, t: f64) -> ControlSample {
    control::controls_from_sample(params.phi, &schedule::evaluate_unchecked(params, t))
}

pub(crate) fn check_synthesizable(params: &ScheduleParams) -> Result<()> {
    params.validate()?;
    // probes the singular-schedule condition once
    control::synthesize(params, params.t_initial()).map(|_| ())
}

/// Integrates i d/dt psi = H(t) psi over the window with fixed-step RK4.
pub fn evolve_hamiltonian<F>(params: &ScheduleParams, psi0: &QuantumState, steps: usize, mut h: F) -> Result<StateTrajectory>
where
    F: FnMut(f64) -> Matrix3<C64>,
{
    check_steps(steps)?;
    let grid = params.grid(steps + 1);
    let dt = params.total_time / steps as f64;
    let mut rhs = |t: f64, y: &Vector3<C64>| (h(t) * y) * C64::new(0.0, -1.0);

    let mut states = Vec::with_capacity(grid.len());
    let mut populations = Vec::with_capacity(grid.len());
    let mut psi = *psi0.amplitudes();
    let mut drift: f64 = (psi.norm() - 1.0).abs();
    states.push(QuantumState(psi));
    populations.push(QuantumState(psi).populations());
    for &t in &grid[..steps] {
        psi = rk4_step(&mut rhs, t, &psi, dt);
        drift = drift.max((psi.norm() - 1.0).abs());
        let s = QuantumState(psi);
        populations.push(s.populations());
        states.push(s);
    }
    if !drift.is_finite() || drift > MAX_NORM_DRIFT {
        return Err(Error::IntegrationAccuracy(format!(
            "norm drifted by {drift:e} over {steps} steps; raise the step count"
        )));
    }
    Ok(StateTrajectory { grid, states, populations, norm_drift: drift })
}

/// Evolution under the designed controls. No renormalization is applied.
pub fn evolve(params: &ScheduleParams, psi0: &QuantumState, steps: usize) -> Result<StateTrajectory> {
    check_synthesizable(params)?;
    evolve_hamiltonian(params, psi0, steps, |t| hamiltonian(&controls_at(params, t)))
}

/// Frame of the designed path at a schedule time.
pub fn path_frame(params: &ScheduleParams, t: f64) -> Result<FrameBasis> {
    let s = schedule::evaluate(params, t)?;
    Ok(frame_from_sample(params, &s))
}

fn frame_from_sample(params: &ScheduleParams, s: &schedule::ScheduleSample) -> FrameBasis {
    let rates = FrameRates { theta: s.theta_dot, gamma: s.gamma_dot, phi1: 0.0, phi2: 0.0 };
    lambda_frame(s.theta, s.gamma, params.phi, -params.phi, rates)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PathFidelity {
    pub t: f64,
    /// |<phi0(t)|psi(t)>|^2
    pub p_d: f64,
    /// log10(1 - P_d), floored
    pub epsilon: f64,
}

pub fn path_fidelity(traj: &StateTrajectory, params: &ScheduleParams) -> Vec<PathFidelity> {
    traj.grid
        .iter()
        .zip(&traj.states)
        .map(|(&t, psi)| {
            let f = frame_from_sample(params, &schedule::evaluate_unchecked(params, t));
            let p_d = f.phi0.dotc(psi.amplitudes()).norm_sqr();
            let epsilon = (1.0 - p_d).max(INFIDELITY_FLOOR).log10();
            PathFidelity { t, p_d, epsilon }
        })
        .collect()
}

/// Couplings <phi_m| H_1 |phi_0> of the path to its partners in the moving frame.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DecouplingResidual {
    pub t: f64,
    pub r1: C64,
    pub r2: C64,
}

impl DecouplingResidual {
    pub fn max_abs(&self) -> f64 {
        self.r1.norm().max(self.r2.norm())
    }
}

/// <phi_m| R H R^dagger - i R dR^dagger/dt |phi_0> for m = 1, 2, from the
/// analytic frame derivatives.
pub fn frame_residual(frame: &FrameBasis, h: &Matrix3<C64>, t: f64) -> DecouplingResidual {
    let h_phi0 = h * frame.phi0;
    let i = C64::i();
    let r = |m: &Vector3<C64>| m.dotc(&h_phi0) - i * m.dotc(&frame.dphi0);
    DecouplingResidual { t, r1: r(&frame.phi1), r2: r(&frame.phi2) }
}

pub fn decoupling_residual(params: &ScheduleParams, t: f64) -> Result<DecouplingResidual> {
    let c = control::synthesize(params, t)?;
    let frame = path_frame(params, t)?;
    Ok(frame_residual(&frame, &hamiltonian(&c), t))
}

/// || psi(t) - e^{i beta0(t)} phi0(t) || at every trajectory sample. The
/// trajectory must sit on a uniform grid over the schedule window.
pub fn phase_consistency(traj: &StateTrajectory, params: &ScheduleParams) -> Vec<f64> {
    let beta = control::global_phase_profile(params, traj.steps());
    traj.grid
        .iter()
        .zip(&traj.states)
        .zip(beta)
        .map(|((&t, psi), b)| {
            let f = frame_from_sample(params, &schedule::evaluate_unchecked(params, t));
            (psi.amplitudes() - f.phi0 * C64::from_polar(1.0, b)).norm()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenRow {
    pub t: f64,
    /// Eigenvalue whose eigenvector best overlaps phi0, phi1, phi2.
    pub energies: [f64; 3],
    /// |<v_n|phi_n>| for the matched eigenvectors.
    pub overlaps: [f64; 3],
    /// theta_dot cot(gamma0), the magnitude expected for the bright pair.
    pub bright_energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DarkStateReport {
    pub gamma0: f64,
    pub tau1: f64,
    pub rows: Vec<EigenRow>,
    /// sqrt(2) cot(gamma0)
    pub adiabaticity: f64,
}

/// Diagonalizes the Hamiltonian of the constant-gamma, phi = pi/2 limit on
/// `points` uniform times over a unit window, with `tau1` in units of T.
pub fn dark_state_analysis(gamma0: f64, tau1: f64, points: usize) -> Result<DarkStateReport> {
    if !(gamma0 > 0.0 && gamma0 < FRAC_PI_2 && tau1 > 0.0) || points < 2 {
        return Err(Error::Range(format!(
            "dark-state analysis needs 0 < gamma0 < pi/2, tau1 > 0 and >= 2 points (got {gamma0}, {tau1}, {points})"
        )));
    }
    let cot_g = 1.0 / gamma0.tan();
    let rows = schedule::uniform_grid(-0.5, 0.5, points)
        .into_iter()
        .map(|t| {
            let x = t / tau1;
            let e = (-x.abs()).exp();
            let theta = if x >= 0.0 { FRAC_PI_2 / (1.0 + e) } else { FRAC_PI_2 * e / (1.0 + e) };
            let theta_dot = FRAC_PI_2 * e / (tau1 * (1.0 + e) * (1.0 + e));
            let c = control::synthesize_general(&control::PathPoint {
                t,
                theta,
                theta_dot,
                gamma: gamma0,
                gamma_dot: 0.0,
                phi1: FRAC_PI_2,
                phi1_dot: 0.0,
                phi2: -FRAC_PI_2,
                phi2_dot: 0.0,
            });
            let frame = lambda_frame(theta, gamma0, FRAC_PI_2, -FRAC_PI_2, FrameRates { theta: theta_dot, ..Default::default() });
            let eig = SymmetricEigen::new(hamiltonian(&c));
            let mut energies = [0.0; 3];
            let mut overlaps = [0.0; 3];
            for (n, phi_n) in frame.vectors().into_iter().enumerate() {
                let (k, ov) = (0..3)
                    .map(|k| (k, eig.eigenvectors.column(k).dotc(phi_n).norm()))
                    .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
                energies[n] = eig.eigenvalues[k];
                overlaps[n] = ov;
            }
            EigenRow { t, energies, overlaps, bright_energy: theta_dot * cot_g }
        })
        .collect();
    Ok(DarkStateReport { gamma0, tau1, rows, adiabaticity: std::f64::consts::SQRT_2 * cot_g })
}
