//! Fixed-step integration and quadrature helpers shared by the simulators.

use std::ops::{Add, Mul};

use num_complex::Complex64 as C64;

/// One classical fourth-order Runge-Kutta step of dy/dt = f(t, y).
pub fn rk4_step<S, F>(f: &mut F, t: f64, y: &S, dt: f64) -> S
where
    S: Clone + Add<Output = S> + Mul<C64, Output = S>,
    F: FnMut(f64, &S) -> S,
{
    let half = 0.5 * dt;
    let k1 = f(t, y);
    let k2 = f(t + half, &(y.clone() + k1.clone() * C64::from(half)));
    let k3 = f(t + half, &(y.clone() + k2.clone() * C64::from(half)));
    let k4 = f(t + dt, &(y.clone() + k3.clone() * C64::from(dt)));
    let sum = k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4;
    y.clone() + sum * C64::from(dt / 6.0)
}

/// Composite Simpson rule on uniformly spaced samples. An odd number of
/// intervals closes with the 3/8 rule on the last three.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let (simpson_end, tail) = if intervals.is_multiple_of(2) { (n - 1, None) } else { (n - 4, Some(n - 4)) };
            let mut acc = values[0] + values[simpson_end];
            for (k, v) in values.iter().enumerate().take(simpson_end).skip(1) {
                acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = h / 3.0 * acc;
            if let Some(s) = tail {
                total += 3.0 * h / 8.0
                    * (values[s] + 3.0 * values[s + 1] + 3.0 * values[s + 2] + values[s + 3]);
            }
            total
        }
    }
}
