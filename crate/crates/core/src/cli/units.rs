use std::f64::consts::PI;

use crate::control::PulseMetrics;
use crate::error::{Error, Result};

/// Physical duration implied by anchoring the dimensionless peak envelope
/// T * omega0_max to a hardware Rabi frequency.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PhysicalScale {
    /// rad/s
    pub omega0_max_physical: f64,
    /// seconds
    pub t_physical: f64,
}

pub fn physical_units(metrics: &PulseMetrics, omega0_max_physical: f64) -> Result<PhysicalScale> {
    if !(omega0_max_physical.is_finite() && omega0_max_physical > 0.0) {
        return Err(Error::Range(format!("physical Rabi frequency must be positive, got {omega0_max_physical}")));
    }
    Ok(PhysicalScale { omega0_max_physical, t_physical: metrics.time_scale / omega0_max_physical })
}

/// Angular frequency in rad/s of a cyclic frequency given in GHz.
pub fn angular_from_ghz(ghz: f64) -> f64 {
    2.0 * PI * ghz * 1e9
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{pulse_metrics, DEFAULT_GRID_SIZE};
    use crate::schedule::ScheduleParams;

    fn metrics(time_scale: f64) -> PulseMetrics {
        PulseMetrics { area: 0.0, omega0_max: time_scale, time_scale }
    }

    #[test]
    fn unit_case() {
        assert_eq!(physical_units(&metrics(1.0), 1.0).unwrap().t_physical, 1.0);
    }

    #[test]
    fn doubling_omega_halves_duration() {
        let a = physical_units(&metrics(7.3), 3.0).unwrap().t_physical;
        let b = physical_units(&metrics(7.3), 6.0).unwrap().t_physical;
        assert!((a - 2.0 * b).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_rejected() {
        for w in [0.0, -1.0, f64::NAN] {
            assert!(matches!(physical_units(&metrics(1.0), w), Err(Error::Range(_))));
        }
    }

    #[test]
    fn off_resonant_configuration_in_nanoseconds() {
        // peak envelope anchored at 2 pi x 0.16 GHz gives just under 19 ns
        let p = ScheduleParams::dimensionless(0.115, 0.3, 0.15, 0.25).unwrap();
        let m = pulse_metrics(&p, DEFAULT_GRID_SIZE).unwrap();
        let t_ns = physical_units(&m, angular_from_ghz(0.16)).unwrap().t_physical * 1e9;
        assert!((t_ns - 18.86).abs() < 0.05, "{t_ns}");
    }
}
