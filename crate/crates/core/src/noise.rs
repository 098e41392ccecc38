//! Robustness of the transfer against a systematic miscalibration of both
//! Rabi frequencies and against independent white amplitude noise on each.
//!
//! Amplitude noise is averaged through the double-commutator master
//! equation; the noise strength eta has units of time^(1/2) (hbar = 1).

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::control::ControlSample;
use crate::dynamics::{self, coupling_hamiltonian, hamiltonian, QuantumState, A, E, G, MIN_STEPS};
use crate::error::{Error, Result};
use crate::numerics::rk4_step;
use crate::schedule::ScheduleParams;

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;

/// Default systematic-error axis: 41 points over [-0.2, 0.2].
pub fn default_lambda_grid() -> Vec<f64> {
    linspace(-0.2, 0.2, 41)
}

/// Default amplitude-noise axis in units of sqrt(T): 31 points over [0, 0.3].
pub fn default_eta_grid() -> Vec<f64> {
    linspace(0.0, 0.3, 31)
}

/// `count` evenly spaced values from `lo` to `hi`; values are computed as
/// lo + k * step so that a zero crossing on the grid is exact.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let n = (count - 1) as f64;
            (0..count).map(|k| (lo * (n - k as f64) + hi * k as f64) / n).collect()
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DensityMatrix(Matrix3<C64>);

impl DensityMatrix {
    pub fn new(entries: Matrix3<C64>) -> Result<Self> {
        let rho = Self(entries);
        rho.check()?;
        Ok(rho)
    }

    pub fn from_state(psi: &QuantumState) -> Self {
        let v = psi.amplitudes();
        Self(v * v.adjoint())
    }

    /// Unchecked constructor for intermediate or deliberately invalid values.
    pub fn from_matrix_unchecked(entries: Matrix3<C64>) -> Self {
        Self(entries)
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix3::identity() / C64::from(3.0))
    }

    pub fn matrix(&self) -> &Matrix3<C64> {
        &self.0
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0[(level, level)].re
    }

    pub fn trace_error(&self) -> f64 {
        (self.0.trace() - C64::ONE).norm()
    }

    /// max |rho - rho^dagger| entry
    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.0 + self.0.adjoint()) * C64::from(0.5);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check(&self) -> Result<()> {
        let (tr, he, ev) = (self.trace_error(), self.hermiticity_error(), self.min_eigenvalue());
        if he > HERMITICITY_TOL {
            return Err(Error::InvariantViolation(format!("density matrix not Hermitian ({he:e})")));
        }
        if tr > TRACE_TOL {
            return Err(Error::InvariantViolation(format!("density matrix trace off by {tr:e}")));
        }
        if ev < -POSITIVITY_TOL {
            return Err(Error::InvariantViolation(format!("density matrix has eigenvalue {ev:e}")));
        }
        Ok(())
    }
}

fn commutator(a: &Matrix3<C64>, b: &Matrix3<C64>) -> Matrix3<C64> {
    a * b - b * a
}

fn pump_noise_operator(c: &ControlSample) -> Matrix3<C64> {
    let mut h = Matrix3::zeros();
    h[(A, G)] = (0.5 * c.omega_p).into();
    h[(G, A)] = (0.5 * c.omega_p).into();
    h
}

fn stokes_noise_operator(c: &ControlSample) -> Matrix3<C64> {
    let mut h = Matrix3::zeros();
    h[(A, E)] = (0.5 * c.omega_s).into();
    h[(E, A)] = (0.5 * c.omega_s).into();
    h
}

fn master_rhs_matrix(rho: &Matrix3<C64>, c: &ControlSample, eta: f64) -> Matrix3<C64> {
    let coherent = commutator(&hamiltonian(c), rho) * C64::new(0.0, -1.0);
    if eta == 0.0 {
        return coherent;
    }
    let hp = pump_noise_operator(c);
    let hs = stokes_noise_operator(c);
    let dissipative = commutator(&hp, &commutator(&hp, rho)) + commutator(&hs, &commutator(&hs, rho));
    coherent - dissipative * C64::from(0.5 * eta * eta)
}

/// d rho/dt = -i[H, rho] - (eta^2/2)[H_p, [H_p, rho]] - (eta^2/2)[H_s, [H_s, rho]]
pub fn master_rhs(rho: &DensityMatrix, sample: &ControlSample, eta: f64) -> Matrix3<C64> {
    master_rhs_matrix(&rho.0, sample, eta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityEvolution {
    pub final_rho: DensityMatrix,
    /// <e| rho(t_f) |e>
    pub p_e: f64,
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub final_min_eigenvalue: f64,
}

/// RK4 integration of the master equation over the schedule window. The
/// density-matrix invariants are checked along the way, never projected.
pub fn evolve_density(params: &ScheduleParams, eta: f64, rho0: &DensityMatrix, steps: usize) -> Result<DensityEvolution> {
    if steps < MIN_STEPS {
        return Err(Error::Range(format!("at least {MIN_STEPS} integration steps are required, got {steps}")));
    }
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::Range(format!("noise strength must be finite and non-negative, got {eta}")));
    }
    rho0.check()?;
    dynamics::check_synthesizable(params)?;

    let dt = params.total_time / steps as f64;
    let grid = params.grid(steps + 1);
    let mut rhs = |t: f64, r: &Matrix3<C64>| master_rhs_matrix(r, &dynamics::controls_at(params, t), eta);
    let mut rho = rho0.0;
    let mut max_trace: f64 = 0.0;
    let mut max_herm: f64 = 0.0;
    for &t in &grid[..steps] {
        rho = rk4_step(&mut rhs, t, &rho, dt);
        let r = DensityMatrix(rho);
        max_trace = max_trace.max(r.trace_error());
        max_herm = max_herm.max(r.hermiticity_error());
        if !(max_trace <= TRACE_TOL && max_herm <= HERMITICITY_TOL) {
            return Err(Error::IntegrationAccuracy(format!(
                "density matrix invariants breached at t = {t}: trace drift {max_trace:e}, hermiticity {max_herm:e}"
            )));
        }
    }
    let final_rho = DensityMatrix(rho);
    let min_ev = final_rho.min_eigenvalue();
    if min_ev < -POSITIVITY_TOL {
        return Err(Error::IntegrationAccuracy(format!("final density matrix has eigenvalue {min_ev:e}")));
    }
    Ok(DensityEvolution {
        p_e: final_rho.population(E),
        final_rho,
        max_trace_drift: max_trace,
        max_hermiticity_error: max_herm,
        final_min_eigenvalue: min_ev,
    })
}

/// Final excited population under H_0 + lambda H_s, where H_s is the Rabi part
/// of H_0; the detunings are not perturbed.
pub fn systematic_evolve(params: &ScheduleParams, lambda: f64, psi0: &QuantumState, steps: usize) -> Result<f64> {
    dynamics::check_synthesizable(params)?;
    let traj = dynamics::evolve_hamiltonian(params, psi0, steps, |t| {
        let c = dynamics::controls_at(params, t);
        hamiltonian(&c) + coupling_hamiltonian(&c) * C64::from(lambda)
    })?;
    Ok(traj.final_populations()[E])
}

/// How sweep points are distributed. Results do not depend on the choice.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon fan-out on the global pool.
    #[default]
    Parallel,
    Threads(usize),
}

impl Execution {
    /// Maps `f` over `items`, preserving order. Each item is evaluated
    /// independently, so the output does not depend on the worker count.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            Execution::Parallel => items.par_iter().map(f).collect(),
            Execution::Threads(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Error::Range(format!("cannot build a {n}-thread pool: {e}")))?;
                pool.install(|| items.par_iter().map(f).collect())
            }
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Lambda,
    Eta,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::Eta => "eta",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub final_populations: Vec<f64>,
    pub params: ScheduleParams,
}

impl SweepResult {
    pub fn axis_name(&self) -> &'static str {
        self.axis.name()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.axis_values.iter().copied().zip(self.final_populations.iter().copied())
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Range("sweep grid is empty".into()));
    }
    Ok(())
}

/// Systematic-error sweep from |g>.
pub fn systematic_sweep(params: &ScheduleParams, lambda_grid: &[f64], steps: usize, exec: Execution) -> Result<SweepResult> {
    check_grid(lambda_grid)?;
    let psi0 = QuantumState::ground();
    let pops = exec.map(lambda_grid, |&lam| systematic_evolve(params, lam, &psi0, steps))?;
    Ok(SweepResult { axis: SweepAxis::Lambda, axis_values: lambda_grid.to_vec(), final_populations: pops, params: *params })
}

/// Amplitude-noise sweep from |g><g|; `eta_grid` is in units of time^(1/2)
/// of the schedule's own clock.
pub fn amplitude_sweep(params: &ScheduleParams, eta_grid: &[f64], steps: usize, exec: Execution) -> Result<SweepResult> {
    check_grid(eta_grid)?;
    let rho0 = DensityMatrix::from_state(&QuantumState::ground());
    let pops = exec.map(eta_grid, |&eta| evolve_density(params, eta, &rho0, steps).map(|d| d.p_e))?;
    Ok(SweepResult { axis: SweepAxis::Eta, axis_values: eta_grid.to_vec(), final_populations: pops, params: *params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, evolve_hamiltonian, DEFAULT_STEPS};
    use proptest::prelude::*;

    fn params(tau1: f64, tau2: f64, g0_pi: f64, phi_pi: f64) -> ScheduleParams {
        ScheduleParams::dimensionless(tau1, tau2, g0_pi, phi_pi).unwrap()
    }

    fn defaults() -> ScheduleParams {
        params(0.12, 0.3, 0.15, 0.5)
    }

    fn sample() -> ControlSample {
        ControlSample { t: 0.0, omega_p: 1.7, omega_s: -0.9, delta1: 0.4, delta2: -0.3 }
    }

    fn random_hermitian(entries: [f64; 9]) -> Matrix3<C64> {
        let mut m = Matrix3::zeros();
        let mut k = 0;
        for i in 0..3 {
            m[(i, i)] = entries[k].into();
            k += 1;
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            m[(i, j)] = C64::new(entries[k], entries[k + 1]);
            m[(j, i)] = m[(i, j)].conj();
            k += 2;
        }
        m
    }

    #[test]
    fn noiseless_rhs_is_von_neumann() {
        let rho = DensityMatrix::from_state(&QuantumState::ground());
        let h = hamiltonian(&sample());
        let want = (h * rho.matrix() - rho.matrix() * h) * C64::new(0.0, -1.0);
        assert_eq!(master_rhs(&rho, &sample(), 0.0), want);
    }

    #[test]
    fn identity_has_no_dissipation() {
        let rho = DensityMatrix::maximally_mixed();
        let d = master_rhs(&rho, &sample(), 0.7);
        assert!(d.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn invalid_density_rejected() {
        let mut m = Matrix3::zeros();
        m[(0, 0)] = C64::from(0.5);
        assert!(DensityMatrix::new(m).is_err());
        m[(1, 1)] = C64::from(0.5);
        m[(0, 1)] = C64::new(0.0, 0.3);
        assert!(DensityMatrix::new(m).is_err());
        m[(1, 0)] = C64::new(0.0, -0.3);
        assert!(DensityMatrix::new(m).is_ok());
        let mut neg = Matrix3::zeros();
        neg[(0, 0)] = C64::from(1.5);
        neg[(1, 1)] = C64::from(-0.5);
        assert!(DensityMatrix::new(neg).is_err());
    }

    #[test]
    fn eta_zero_matches_pure_state() {
        let p = params(0.115, 0.3, 0.15, 0.25);
        let rho0 = DensityMatrix::from_state(&QuantumState::ground());
        let d = evolve_density(&p, 0.0, &rho0, DEFAULT_STEPS).unwrap();
        let traj = evolve(&p, &QuantumState::ground(), DEFAULT_STEPS).unwrap();
        let pure = DensityMatrix::from_state(traj.final_state());
        let diff = (d.final_rho.matrix() - pure.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-8, "{diff:e}");
        assert!((d.p_e - traj.final_populations()[E]).abs() <= 1e-8);
    }

    #[test]
    fn density_invariants_hold_under_noise() {
        let rho0 = DensityMatrix::from_state(&QuantumState::ground());
        let d = evolve_density(&defaults(), 0.3, &rho0, DEFAULT_STEPS).unwrap();
        assert!(d.max_trace_drift <= TRACE_TOL);
        assert!(d.max_hermiticity_error <= HERMITICITY_TOL);
        assert!(d.final_min_eigenvalue >= -POSITIVITY_TOL);
        assert!(d.final_rho.check().is_ok());
    }

    #[test]
    fn density_preconditions() {
        let rho0 = DensityMatrix::from_state(&QuantumState::ground());
        assert!(matches!(evolve_density(&defaults(), 0.1, &rho0, 10), Err(Error::Range(_))));
        assert!(matches!(evolve_density(&defaults(), -0.1, &rho0, 2000), Err(Error::Range(_))));
        let bad = DensityMatrix::from_matrix_unchecked(Matrix3::identity());
        assert!(evolve_density(&defaults(), 0.1, &bad, 2000).is_err());
    }

    #[test]
    fn systematic_zero_is_noiseless() {
        let p = defaults();
        let a = systematic_evolve(&p, 0.0, &QuantumState::ground(), DEFAULT_STEPS).unwrap();
        let b = evolve(&p, &QuantumState::ground(), DEFAULT_STEPS).unwrap().final_populations()[E];
        assert_eq!(a, b);
    }

    #[test]
    fn systematic_matches_scaled_pulses() {
        for phi_pi in [0.5, 0.3] {
            let p = params(0.12, 0.3, 0.15, phi_pi);
            for lam in [1.0, -0.15, 0.1] {
                let a = systematic_evolve(&p, lam, &QuantumState::ground(), 2000).unwrap();
                let scaled = evolve_hamiltonian(&p, &QuantumState::ground(), 2000, |t| {
                    hamiltonian(&dynamics::controls_at(&p, t).scale_rabi(1.0 + lam))
                })
                .unwrap();
                assert!((a - scaled.final_populations()[E]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn sweep_grid_shapes() {
        let p = defaults();
        assert!(systematic_sweep(&p, &[], 1000, Execution::Sequential).is_err());
        let s = systematic_sweep(&p, &[0.0], 1000, Execution::Sequential).unwrap();
        let noiseless = evolve(&p, &QuantumState::ground(), 1000).unwrap().final_populations()[E];
        assert_eq!(s.final_populations, vec![noiseless]);
        assert_eq!(s.axis_name(), "lambda");

        let s = systematic_sweep(&p, &[-0.1, 0.0, 0.1], 2000, Execution::Parallel).unwrap();
        assert!(s.final_populations[1] > s.final_populations[0]);
        assert!(s.final_populations[1] > s.final_populations[2]);

        let a = amplitude_sweep(&p, &[0.0], 1000, Execution::Sequential).unwrap();
        assert!((a.final_populations[0] - noiseless).abs() <= 1e-8);
        assert_eq!(a.axis_name(), "eta");
    }

    #[test]
    fn amplitude_noise_lowers_transfer() {
        let p = defaults();
        let s = amplitude_sweep(&p, &[0.0, 0.02, 0.05, 0.1, 0.2], 2000, Execution::Parallel).unwrap();
        assert!(s.final_populations.windows(2).all(|w| w[1] <= w[0]));
        assert!(s.final_populations.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn sweeps_are_execution_independent() {
        let p = defaults();
        let grid = [0.0, 0.1, 0.05, 0.2];
        let seq = amplitude_sweep(&p, &grid, 1000, Execution::Sequential).unwrap();
        let par = amplitude_sweep(&p, &grid, 1000, Execution::Threads(3)).unwrap();
        assert_eq!(seq, par);
        let lam = [0.1, -0.2, 0.0];
        let seq = systematic_sweep(&p, &lam, 1000, Execution::Sequential).unwrap();
        let par = systematic_sweep(&p, &lam, 1000, Execution::Threads(2)).unwrap();
        assert_eq!(seq, par);
        // pointwise: a permuted grid gives the permuted results
        let perm = systematic_sweep(&p, &[0.0, 0.1, -0.2], 1000, Execution::Parallel).unwrap();
        assert_eq!(perm.final_populations, vec![seq.final_populations[2], seq.final_populations[0], seq.final_populations[1]]);
    }

    #[test]
    fn default_grids() {
        let l = default_lambda_grid();
        assert_eq!(l.len(), 41);
        assert_eq!(l[20], 0.0);
        assert_eq!((l[0], l[40]), (-0.2, 0.2));
        let e = default_eta_grid();
        assert_eq!(e.len(), 31);
        assert_eq!((e[0], e[30]), (0.0, 0.3));
    }

    proptest! {
        #[test]
        fn rhs_is_traceless_and_hermitian(entries in prop::array::uniform9(-1.0f64..1.0), eta in 0.0f64..2.0) {
            let rho = DensityMatrix::from_matrix_unchecked(random_hermitian(entries));
            let d = master_rhs(&rho, &sample(), eta);
            prop_assert!(d.trace().norm() <= 1e-12);
            prop_assert!((d - d.adjoint()).iter().all(|z| z.norm() <= 1e-12));
        }
    }
}
