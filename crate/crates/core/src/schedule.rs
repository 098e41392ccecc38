//! Path-angle schedules: a logistic ramp for theta and a Gaussian for gamma,
//! centred on the symmetric window [-T/2, T/2].

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Boundary tolerance used when none is given (radians).
pub const DEFAULT_BOUNDARY_TOL: f64 = 0.05;

/// Slack on the window edges so grid endpoints computed in floating point
/// are not rejected.
const WINDOW_SLACK: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScheduleParams {
    /// Total interaction time T.
    pub total_time: f64,
    /// Width of the logistic theta ramp.
    pub tau1: f64,
    /// Width of the Gaussian gamma pulse.
    pub tau2: f64,
    /// Peak mixing angle.
    pub gamma0: f64,
    /// Constant phase, with phi1 = -phi2 = phi.
    pub phi: f64,
}

impl ScheduleParams {
    pub fn new(total_time: f64, tau1: f64, tau2: f64, gamma0: f64, phi: f64) -> Result<Self> {
        let p = Self { total_time, tau1, tau2, gamma0, phi };
        p.validate()?;
        Ok(p)
    }

    /// Parameters in units of T (widths) and pi (angles), with T = 1.
    pub fn dimensionless(tau1_t: f64, tau2_t: f64, gamma0_pi: f64, phi_pi: f64) -> Result<Self> {
        Self::new(1.0, tau1_t, tau2_t, gamma0_pi * PI, phi_pi * PI)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.total_time;
        let bad = |what: String| Err(Error::Range(what));
        if !(t.is_finite() && t > 0.0) {
            return bad(format!("total time must be positive, got {t}"));
        }
        // widths compared in units of T with a relative slack so 0.12*T passes
        let rel = 1e-12;
        if !(self.tau1 > 0.0 && self.tau1 / t <= 0.12 + rel) {
            return bad(format!("tau1 must satisfy 0 < tau1 <= 0.12 T, got {} T", self.tau1 / t));
        }
        let r2 = self.tau2 / t;
        if !(r2 >= 0.2 - rel && r2 <= 0.3 + rel) {
            return bad(format!("tau2 must satisfy 0.2 T <= tau2 <= 0.3 T, got {r2} T"));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 < FRAC_PI_2) {
            return bad(format!("gamma0 must satisfy 0 < gamma0 < pi/2, got {}", self.gamma0));
        }
        if !(self.phi > 0.0 && self.phi <= FRAC_PI_2 * (1.0 + rel)) {
            return bad(format!("phi must satisfy 0 < phi <= pi/2, got {}", self.phi));
        }
        Ok(())
    }

    pub fn t_initial(&self) -> f64 {
        -0.5 * self.total_time
    }

    pub fn t_final(&self) -> f64 {
        0.5 * self.total_time
    }

    /// Same shape on a window stretched by `s`.
    pub fn rescaled(&self, s: f64) -> Self {
        Self {
            total_time: self.total_time * s,
            tau1: self.tau1 * s,
            tau2: self.tau2 * s,
            ..*self
        }
    }

    /// Uniform grid of `n >= 2` points covering the window, endpoints exact.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        uniform_grid(self.t_initial(), self.t_final(), n)
    }
}

pub(crate) fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs at least two points");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + step * k as f64 })
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScheduleSample {
    pub t: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub gamma: f64,
    pub gamma_dot: f64,
    /// 1 - s where s = 1/(1 + e^{-t/tau1}); kept for the finite forms below.
    upper: f64,
    lower: f64,
    tau1: f64,
}

impl ScheduleSample {
    /// theta_dot * tan(theta), finite as theta -> pi/2.
    pub fn theta_dot_tan_theta(&self) -> f64 {
        // (pi/2) s u / tau1 * cot(pi u / 2), with u = 1 - s
        let (s, u) = (self.lower, self.upper);
        s * (FRAC_PI_2 * u).cos() / (self.tau1 * sinc(FRAC_PI_2 * u))
    }

    /// theta_dot * cot(2 theta), finite at both ends of the ramp.
    pub fn theta_dot_cot_2theta(&self) -> f64 {
        // (pi/2) s u cos(pi s) / (tau1 sin(pi min(s,u)))
        let (s, u) = (self.lower, self.upper);
        let (lo, hi) = if s < u { (s, u) } else { (u, s) };
        0.5 * hi * (PI * s).cos() / (self.tau1 * sinc(PI * lo))
    }
}

/// sin(x)/x with the removable singularity filled in.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Logistic pair (s, 1 - s) evaluated without cancellation.
fn logistic_pair(x: f64) -> (f64, f64) {
    if x >= 0.0 {
        let e = (-x).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = x.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

/// Schedule values and rates at `t`, which must lie in [-T/2, T/2].
pub fn evaluate(params: &ScheduleParams, t: f64) -> Result<ScheduleSample> {
    let (lo, hi) = (params.t_initial(), params.t_final());
    let slack = WINDOW_SLACK * params.total_time;
    if !(t >= lo - slack && t <= hi + slack) {
        return Err(Error::Domain { t, lo, hi });
    }
    Ok(evaluate_unchecked(params, t))
}

/// Closed-form evaluation with no window check; used by integrators whose
/// stage times are known to be in range.
pub(crate) fn evaluate_unchecked(params: &ScheduleParams, t: f64) -> ScheduleSample {
    let (s, u) = logistic_pair(t / params.tau1);
    let theta = FRAC_PI_2 * s;
    let theta_dot = FRAC_PI_2 * s * u / params.tau1;
    let tau2_sq = params.tau2 * params.tau2;
    let gamma = params.gamma0 * (-t * t / tau2_sq).exp();
    let gamma_dot = -2.0 * t / tau2_sq * gamma;
    ScheduleSample {
        t,
        theta,
        theta_dot,
        gamma,
        gamma_dot,
        upper: u,
        lower: s,
        tau1: params.tau1,
    }
}

/// How far the finite-window schedule is from the ideal endpoint values.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BoundaryReport {
    pub theta_initial: f64,
    pub theta_final_deficit: f64,
    pub gamma_initial: f64,
    pub gamma_final: f64,
    pub gamma_dot_initial: f64,
    pub gamma_dot_final: f64,
    /// Every angle deviation is within the tolerance. The gamma-rate entries
    /// carry units of rad/time and are reported but not compared to `tol`.
    pub pass: bool,
}

impl BoundaryReport {
    pub fn max_angle_deviation(&self) -> f64 {
        [self.theta_initial, self.theta_final_deficit, self.gamma_initial, self.gamma_final]
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

pub fn check_boundaries(params: &ScheduleParams, tol: f64) -> BoundaryReport {
    let a = evaluate_unchecked(params, params.t_initial());
    let b = evaluate_unchecked(params, params.t_final());
    let mut report = BoundaryReport {
        theta_initial: a.theta,
        theta_final_deficit: b.theta - FRAC_PI_2,
        gamma_initial: a.gamma,
        gamma_final: b.gamma,
        gamma_dot_initial: a.gamma_dot,
        gamma_dot_final: b.gamma_dot,
        pass: false,
    };
    report.pass = report.max_angle_deviation() <= tol;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig3() -> ScheduleParams {
        ScheduleParams::dimensionless(0.115, 0.3, 0.15, 0.25).unwrap()
    }

    #[test]
    fn midpoint_values() {
        let p = fig3();
        let s = evaluate(&p, 0.0).unwrap();
        assert!((s.theta - PI / 4.0).abs() < 1e-15);
        assert_eq!(s.gamma, p.gamma0);
        assert_eq!(s.gamma_dot, 0.0);
    }

    #[test]
    fn logistic_rate_at_centre() {
        let p = ScheduleParams::dimensionless(0.12, 0.3, 0.15, 0.5).unwrap();
        let s = evaluate(&p, 0.0).unwrap();
        assert!((s.theta_dot - PI / (8.0 * 0.12)).abs() < 1e-14);
        assert!((s.theta_dot - 3.2725).abs() < 1e-4);
    }

    #[test]
    fn gaussian_at_window_edge() {
        let p = ScheduleParams::dimensionless(0.12, 0.3, 0.15, 0.5).unwrap();
        let s = evaluate(&p, -0.5).unwrap();
        let ratio = s.gamma / p.gamma0;
        assert!((ratio - (-25.0f64 / 9.0).exp()).abs() < 1e-15);
        assert!((ratio - 0.0622).abs() < 1e-4);
    }

    #[test]
    fn outside_window_is_domain_error() {
        let p = fig3();
        assert!(matches!(evaluate(&p, 0.5001), Err(Error::Domain { .. })));
        assert!(matches!(evaluate(&p, f64::NAN), Err(Error::Domain { .. })));
        assert!(evaluate(&p, -0.5).is_ok());
    }

    #[test]
    fn params_ranges() {
        assert!(ScheduleParams::dimensionless(0.12, 0.3, 0.3, 0.5).is_ok());
        assert!(ScheduleParams::dimensionless(0.5, 0.3, 0.3, 0.5).is_err());
        assert!(ScheduleParams::dimensionless(0.0, 0.3, 0.3, 0.5).is_err());
        assert!(ScheduleParams::dimensionless(0.1, 0.19, 0.3, 0.5).is_err());
        assert!(ScheduleParams::dimensionless(0.1, 0.31, 0.3, 0.5).is_err());
        assert!(ScheduleParams::dimensionless(0.1, 0.2, 0.0, 0.5).is_err());
        assert!(ScheduleParams::dimensionless(0.1, 0.2, 0.5, 0.5).is_err());
        assert!(ScheduleParams::dimensionless(0.1, 0.2, 0.2, 0.0).is_err());
        assert!(ScheduleParams::dimensionless(0.1, 0.2, 0.2, 0.51).is_err());
        // widths are relative to T
        assert!(ScheduleParams::new(10.0, 1.2, 3.0, 0.3, 1.0).is_ok());
    }

    #[test]
    fn boundaries_for_fig3_schedule() {
        let p = fig3();
        let r = check_boundaries(&p, DEFAULT_BOUNDARY_TOL);
        assert!(r.pass);
        let theta_i = FRAC_PI_2 / (1.0 + (0.5f64 / 0.115).exp());
        assert!((r.theta_initial - theta_i).abs() < 1e-15);
        assert!((r.theta_initial - 0.0200).abs() < 1e-3);
        assert!((r.theta_final_deficit + theta_i).abs() < 1e-14);
        assert!((r.gamma_initial - 0.0293).abs() < 1e-4);
        assert_eq!(r.gamma_initial, r.gamma_final);
        assert_eq!(r.gamma_dot_initial, -r.gamma_dot_final);

        assert!(!check_boundaries(&p, 1e-12).pass);
    }

    #[test]
    fn gamma_boundaries_vanish_with_gamma0() {
        let mut last = f64::INFINITY;
        for g in [0.2, 0.02, 0.002, 0.0002] {
            let p = ScheduleParams::new(1.0, 0.1, 0.25, g, 1.0).unwrap();
            let r = check_boundaries(&p, 1.0);
            assert!(r.gamma_initial.abs() < last);
            assert!((r.gamma_initial / g - (-4.0f64).exp()).abs() < 1e-15);
            last = r.gamma_initial.abs();
        }
    }

    #[test]
    fn finite_products_near_ramp_ends() {
        // tiny tau1 drives theta to within rounding of 0 and pi/2 at the edges
        let p = ScheduleParams::new(1.0, 0.004, 0.25, 0.4, 1.0).unwrap();
        for t in [-0.5, -0.3, 0.3, 0.5] {
            let s = evaluate(&p, t).unwrap();
            assert!(s.theta_dot_tan_theta().is_finite());
            assert!(s.theta_dot_cot_2theta().is_finite());
        }
        let hi = evaluate(&p, 0.5).unwrap();
        assert!((hi.theta_dot_tan_theta() - 1.0 / p.tau1).abs() < 1e-9 / p.tau1);
        assert!((hi.theta_dot_cot_2theta() + 0.5 / p.tau1).abs() < 1e-9 / p.tau1);
        let lo = evaluate(&p, -0.5).unwrap();
        assert!((lo.theta_dot_cot_2theta() - 0.5 / p.tau1).abs() < 1e-9 / p.tau1);
    }

    proptest! {
        #[test]
        fn finite_products_match_direct_forms(tau1 in 0.05f64..0.12, t in -0.3f64..0.3) {
            let p = ScheduleParams::new(1.0, tau1, 0.25, 0.4, 1.0).unwrap();
            let s = evaluate(&p, t).unwrap();
            let direct_tan = s.theta_dot * s.theta.tan();
            let direct_cot = s.theta_dot / (2.0 * s.theta).tan();
            prop_assert!((s.theta_dot_tan_theta() - direct_tan).abs() <= 1e-9 * (1.0 + direct_tan.abs()));
            prop_assert!((s.theta_dot_cot_2theta() - direct_cot).abs() <= 1e-9 * (1.0 + direct_cot.abs()));
        }

        #[test]
        fn rates_match_finite_differences(
            tau1 in 0.02f64..0.12, tau2 in 0.2f64..0.3, g0 in 0.05f64..1.5, t in -0.49f64..0.49,
        ) {
            let p = ScheduleParams::new(1.0, tau1, tau2, g0, 1.0).unwrap();
            let h = 1e-6;
            let s = evaluate(&p, t).unwrap();
            let (a, b) = (evaluate(&p, t - h).unwrap(), evaluate(&p, t + h).unwrap());
            let fd_theta = (b.theta - a.theta) / (2.0 * h);
            let fd_gamma = (b.gamma - a.gamma) / (2.0 * h);
            // absolute floor for rates that are themselves tiny
            let floor = 1e-9;
            prop_assert!((fd_theta - s.theta_dot).abs() <= 1e-6 * s.theta_dot.abs() + floor);
            prop_assert!((fd_gamma - s.gamma_dot).abs() <= 1e-6 * s.gamma_dot.abs() + floor);
        }

        #[test]
        fn shape_properties(tau1 in 0.01f64..0.12, tau2 in 0.2f64..0.3, g0 in 0.01f64..1.5, t in 0.0f64..0.5) {
            let p = ScheduleParams::new(1.0, tau1, tau2, g0, 0.8).unwrap();
            let (a, b) = (evaluate(&p, -t).unwrap(), evaluate(&p, t).unwrap());
            prop_assert!(a.theta_dot > 0.0 && b.theta_dot > 0.0);
            prop_assert!(a.theta <= b.theta);
            prop_assert!(b.theta >= 0.0 && b.theta <= FRAC_PI_2);
            prop_assert!(b.gamma > 0.0 && b.gamma <= g0);
            prop_assert_eq!(a.gamma_dot, -b.gamma_dot);
        }

        #[test]
        fn time_rescaling(s in 0.1f64..10.0, t in -0.5f64..0.5) {
            let p = ScheduleParams::dimensionless(0.11, 0.27, 0.2, 0.4).unwrap();
            let q = p.rescaled(s);
            let (a, b) = (evaluate(&p, t).unwrap(), evaluate(&q, t * s).unwrap());
            prop_assert!((a.theta - b.theta).abs() <= 1e-14);
            prop_assert!((a.gamma - b.gamma).abs() <= 1e-14);
            prop_assert!((a.theta_dot / s - b.theta_dot).abs() <= 1e-12 * a.theta_dot.abs() / s);
            prop_assert!((a.gamma_dot / s - b.gamma_dot).abs() <= 1e-12 * a.gamma_dot.abs() / s + 1e-300);
        }
    }
}
