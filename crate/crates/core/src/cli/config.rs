//! Flat `key = value` run configuration.
//!
//! ```text
//! # resonant run, finer integration
//! schedule.gamma0_pi = 0.15
//! schedule.phi_pi    = 0.5
//! integrator.steps   = 8000
//! ```
//!
//! Angles are given in units of pi, widths in units of the total time T, and
//! the amplitude-noise axis in units of sqrt(T). Keys not present keep the
//! defaults listed in [`KEYS`].

use std::f64::consts::PI;
use std::path::PathBuf;

use crate::control::MIN_METRICS_GRID;
use crate::dynamics::MIN_STEPS;
use crate::error::{Error, Result};
use crate::noise::{linspace, Execution};
use crate::schedule::ScheduleParams;

/// Every accepted key with its default, in documentation order.
pub const KEYS: &[(&str, &str)] = &[
    ("schedule.gamma0_pi", "0.15"),
    ("schedule.tau1_T", "0.12"),
    ("schedule.tau2_T", "0.3"),
    ("schedule.phi_pi", "0.5"),
    ("schedule.T", "1"),
    ("integrator.steps", "4000"),
    ("integrator.grid_size", "4001"),
    ("sweep.lambda_min", "-0.2"),
    ("sweep.lambda_max", "0.2"),
    ("sweep.lambda_count", "41"),
    ("sweep.eta_min", "0"),
    ("sweep.eta_max", "0.3"),
    ("sweep.eta_count", "31"),
    ("sweep.threads", "0"),
    ("metrics.gamma0_min_pi", "0.05"),
    ("metrics.gamma0_max_pi", "0.45"),
    ("metrics.gamma0_count", "41"),
    ("verify.draws", "50"),
    ("units.omega0_max_ghz", "0.16"),
    ("seed", "42"),
    ("output_dir", "."),
];

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleConfig {
    pub gamma0_pi: f64,
    pub tau1_t: f64,
    pub tau2_t: f64,
    pub phi_pi: f64,
    pub total_time: f64,
}

impl ScheduleConfig {
    pub fn params(&self) -> Result<ScheduleParams> {
        self.with_gamma0_pi(self.gamma0_pi)
    }

    /// Same schedule with a different gamma0 (units of pi).
    pub fn with_gamma0_pi(&self, gamma0_pi: f64) -> Result<ScheduleParams> {
        let t = self.total_time;
        ScheduleParams::new(t, self.tau1_t * t, self.tau2_t * t, gamma0_pi * PI, self.phi_pi * PI)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_count: usize,
    /// 0 selects the global rayon pool.
    pub threads: usize,
}

impl SweepConfig {
    pub fn lambda_grid(&self) -> Vec<f64> {
        linspace(self.lambda_min, self.lambda_max, self.lambda_count)
    }

    /// Noise strengths in units of sqrt(T).
    pub fn eta_grid(&self) -> Vec<f64> {
        linspace(self.eta_min, self.eta_max, self.eta_count)
    }

    pub fn execution(&self) -> Execution {
        match self.threads {
            0 => Execution::Parallel,
            n => Execution::Threads(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsConfig {
    pub gamma0_min_pi: f64,
    pub gamma0_max_pi: f64,
    pub gamma0_count: usize,
}

impl MetricsConfig {
    pub fn gamma0_grid(&self) -> Vec<f64> {
        linspace(self.gamma0_min_pi, self.gamma0_max_pi, self.gamma0_count)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub schedule: ScheduleConfig,
    pub steps: usize,
    pub grid_size: usize,
    pub sweep: SweepConfig,
    pub metrics: MetricsConfig,
    pub draws: usize,
    /// Cyclic frequency in GHz; the angular value is 2 pi times this.
    pub omega0_max_ghz: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut b = ConfigBuilder::default();
        for (k, v) in KEYS {
            b.set(k, v, None).expect("defaults parse");
        }
        b.config
    }
}

/// Where a value came from, for error messages.
#[derive(Copy, Clone, Debug)]
enum Origin {
    Line(usize),
    Flag,
}

struct ConfigBuilder {
    config: RunConfig,
    origins: Vec<(&'static str, Origin)>,
}

impl Default for ConfigBuilder {
    fn default() -> Self {
        let schedule = ScheduleConfig { gamma0_pi: 0.0, tau1_t: 0.0, tau2_t: 0.0, phi_pi: 0.0, total_time: 0.0 };
        let sweep = SweepConfig { lambda_min: 0.0, lambda_max: 0.0, lambda_count: 0, eta_min: 0.0, eta_max: 0.0, eta_count: 0, threads: 0 };
        let metrics = MetricsConfig { gamma0_min_pi: 0.0, gamma0_max_pi: 0.0, gamma0_count: 0 };
        ConfigBuilder {
            config: RunConfig {
                schedule,
                steps: 0,
                grid_size: 0,
                sweep,
                metrics,
                draws: 0,
                omega0_max_ghz: 0.0,
                seed: 0,
                output_dir: PathBuf::new(),
            },
            origins: Vec::new(),
        }
    }
}

fn fail(origin: Option<Origin>, msg: String) -> Error {
    match origin {
        Some(Origin::Line(line)) => Error::Config { line, msg },
        Some(Origin::Flag) => Error::Range(format!("command-line override: {msg}")),
        None => Error::Config { line: 0, msg },
    }
}

impl ConfigBuilder {
    fn set(&mut self, key: &str, raw: &str, origin: Option<Origin>) -> Result<()> {
        let Some(&(name, _)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(fail(origin, format!("unknown key `{key}`")));
        };
        let float = || -> Result<f64> {
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| fail(origin, format!("`{key}` expects a finite number, got `{raw}`")))
        };
        let count = || -> Result<usize> {
            raw.parse::<usize>().map_err(|_| fail(origin, format!("`{key}` expects a non-negative integer, got `{raw}`")))
        };
        let c = &mut self.config;
        match name {
            "schedule.gamma0_pi" => c.schedule.gamma0_pi = float()?,
            "schedule.tau1_T" => c.schedule.tau1_t = float()?,
            "schedule.tau2_T" => c.schedule.tau2_t = float()?,
            "schedule.phi_pi" => c.schedule.phi_pi = float()?,
            "schedule.T" => c.schedule.total_time = float()?,
            "integrator.steps" => c.steps = count()?,
            "integrator.grid_size" => c.grid_size = count()?,
            "sweep.lambda_min" => c.sweep.lambda_min = float()?,
            "sweep.lambda_max" => c.sweep.lambda_max = float()?,
            "sweep.lambda_count" => c.sweep.lambda_count = count()?,
            "sweep.eta_min" => c.sweep.eta_min = float()?,
            "sweep.eta_max" => c.sweep.eta_max = float()?,
            "sweep.eta_count" => c.sweep.eta_count = count()?,
            "sweep.threads" => c.sweep.threads = count()?,
            "metrics.gamma0_min_pi" => c.metrics.gamma0_min_pi = float()?,
            "metrics.gamma0_max_pi" => c.metrics.gamma0_max_pi = float()?,
            "metrics.gamma0_count" => c.metrics.gamma0_count = count()?,
            "verify.draws" => c.draws = count()?,
            "units.omega0_max_ghz" => c.omega0_max_ghz = float()?,
            "seed" => {
                c.seed = raw.parse::<u64>().map_err(|_| fail(origin, format!("`seed` expects an unsigned integer, got `{raw}`")))?
            }
            "output_dir" => {
                if raw.is_empty() {
                    return Err(fail(origin, "`output_dir` must not be empty".into()));
                }
                c.output_dir = PathBuf::from(raw)
            }
            _ => unreachable!("key table and setter disagree on `{name}`"),
        }
        if let Some(o) = origin {
            self.origins.retain(|(k, _)| *k != name);
            self.origins.push((name, o));
        }
        Ok(())
    }

    fn origin(&self, key: &str) -> Option<Origin> {
        self.origins.iter().find(|(k, _)| *k == key).map(|&(_, o)| o)
    }

    /// Range checks, each attributed to the line (or flag) that set the
    /// offending key; relations between keys are attributed to the later one.
    fn finish(self) -> Result<RunConfig> {
        let c = &self.config;
        let check = |ok: bool, key: &str, msg: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(fail(self.origin(key), format!("`{key}` {msg}")))
            }
        };
        let slack = 1e-12;
        let s = &c.schedule;
        check(s.total_time > 0.0, "schedule.T", "must be positive")?;
        check(s.gamma0_pi > 0.0 && s.gamma0_pi < 0.5, "schedule.gamma0_pi", "must lie in (0, 0.5)")?;
        check(s.tau1_t > 0.0 && s.tau1_t <= 0.12 * (1.0 + slack), "schedule.tau1_T", "must lie in (0, 0.12]")?;
        check(
            s.tau2_t >= 0.2 * (1.0 - slack) && s.tau2_t <= 0.3 * (1.0 + slack),
            "schedule.tau2_T",
            "must lie in [0.2, 0.3]",
        )?;
        check(s.phi_pi > 0.0 && s.phi_pi <= 0.5 * (1.0 + slack), "schedule.phi_pi", "must lie in (0, 0.5]")?;
        check(c.steps >= MIN_STEPS, "integrator.steps", &format!("must be at least {MIN_STEPS}"))?;
        check(c.grid_size >= MIN_METRICS_GRID, "integrator.grid_size", &format!("must be at least {MIN_METRICS_GRID}"))?;

        let later = |a: &'static str, b: &'static str| {
            let line = |k| match self.origin(k) {
                Some(Origin::Line(l)) => l,
                Some(Origin::Flag) => usize::MAX,
                None => 0,
            };
            if line(a) >= line(b) {
                a
            } else {
                b
            }
        };
        let sw = &c.sweep;
        check(sw.lambda_count >= 2, "sweep.lambda_count", "must be at least 2")?;
        check(sw.eta_count >= 2, "sweep.eta_count", "must be at least 2")?;
        check(sw.lambda_min < sw.lambda_max, later("sweep.lambda_min", "sweep.lambda_max"), "range must satisfy lambda_min < lambda_max")?;
        check(sw.lambda_min > -1.0, "sweep.lambda_min", "must exceed -1 (the pulses would vanish)")?;
        check(sw.eta_min >= 0.0, "sweep.eta_min", "must be non-negative")?;
        check(sw.eta_min < sw.eta_max, later("sweep.eta_min", "sweep.eta_max"), "range must satisfy eta_min < eta_max")?;
        let m = &c.metrics;
        check(m.gamma0_count >= 2, "metrics.gamma0_count", "must be at least 2")?;
        check(m.gamma0_min_pi > 0.0, "metrics.gamma0_min_pi", "must be positive")?;
        check(m.gamma0_max_pi < 0.5, "metrics.gamma0_max_pi", "must be below 0.5")?;
        check(
            m.gamma0_min_pi < m.gamma0_max_pi,
            later("metrics.gamma0_min_pi", "metrics.gamma0_max_pi"),
            "range must satisfy gamma0_min_pi < gamma0_max_pi",
        )?;
        check(c.draws >= 1, "verify.draws", "must be at least 1")?;
        check(c.omega0_max_ghz > 0.0, "units.omega0_max_ghz", "must be positive")?;

        // backstop: the library's own validation must agree
        s.params().map_err(|e| fail(None, e.to_string()))?;
        Ok(self.config)
    }
}

/// Parses a configuration document; missing keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_with_overrides(text, &[])
}

/// As [`parse_config`], then applies `(key, value)` overrides on top.
pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut b = ConfigBuilder::default();
    for (k, v) in KEYS {
        b.set(k, v, None)?;
    }
    let mut seen: Vec<&str> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config { line, msg: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Config { line, msg: "missing key before `=`".into() });
        }
        if seen.contains(&key) {
            return Err(Error::Config { line, msg: format!("duplicate key `{key}`") });
        }
        b.set(key, value, Some(Origin::Line(line)))?;
        seen.push(key);
    }
    for (k, v) in overrides {
        b.set(k, v, Some(Origin::Flag))?;
    }
    b.finish()
}
