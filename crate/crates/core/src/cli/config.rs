//! JSON run configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{wavenumber_for_lattice, ModelParams, ANGSTROM, ELECTRON_MASS, EV, PROTON_MASS};
use crate::pde_solver::{
    Adaptivity, InitialCondition, SolverConfig, DEFAULT_BOUNDARY_MASS_TOLERANCE,
    DEFAULT_CELLS_PER_PERIOD, DEFAULT_PERIODS, DEFAULT_SIGMA0,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Semiclassical,
    QuantumTemp,
    Bohm,
    FourthOrder,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Semiclassical => "semiclassical",
            Mode::QuantumTemp => "quantum-temp",
            Mode::Bohm => "bohm",
            Mode::FourthOrder => "fourth-order",
        }
    }

    pub fn is_thermal(&self) -> bool {
        *self == Mode::Semiclassical
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Particle {
    Proton,
    Electron,
}

impl Particle {
    pub fn mass(&self) -> f64 {
        match self {
            Particle::Proton => PROTON_MASS,
            Particle::Electron => ELECTRON_MASS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default = "default_cells")]
    pub cells_per_period: usize,
}

fn default_periods() -> usize {
    DEFAULT_PERIODS
}

fn default_cells() -> usize {
    DEFAULT_CELLS_PER_PERIOD
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            periods: DEFAULT_PERIODS,
            cells_per_period: DEFAULT_CELLS_PER_PERIOD,
        }
    }
}

/// Time stepping in reduced units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSettings {
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    #[serde(default)]
    pub rows_per_decade: Option<usize>,
    #[serde(default = "default_adaptivity")]
    pub adaptivity: Adaptivity,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
}

fn default_stride() -> usize {
    10
}

fn default_adaptivity() -> Adaptivity {
    Adaptivity::Fixed
}

fn default_dt_min() -> f64 {
    1e-12
}

impl Default for TimeSettings {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_max: 100.0,
            output_stride: default_stride(),
            rows_per_decade: None,
            adaptivity: Adaptivity::Fixed,
            dt_min: default_dt_min(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

/// A `simulate` configuration as written in the JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,

    pub particle: Option<Particle>,
    pub mass_kg: Option<f64>,
    pub friction_kg_s: Option<f64>,
    #[serde(rename = "T_K")]
    pub temperature_k: Option<f64>,
    #[serde(rename = "U_J")]
    pub barrier_j: Option<f64>,
    #[serde(rename = "U_eV")]
    pub barrier_ev: Option<f64>,
    pub lattice_m: Option<f64>,
    #[serde(rename = "lattice_A")]
    pub lattice_angstrom: Option<f64>,

    pub beta_u: Option<f64>,
    pub theta: Option<f64>,
    pub lambda_param: Option<f64>,
    /// Reduced barrier for zero-temperature modes: 1, or 0 for free motion.
    pub amplitude: Option<f64>,

    #[serde(default = "default_true")]
    pub include_nonlinear: bool,
    #[serde(default)]
    pub grid: GridSettings,
    #[serde(default)]
    pub time: TimeSettings,
    #[serde(default = "default_sigma0")]
    pub sigma0: f64,
    #[serde(default = "default_initial")]
    pub initial: InitialCondition,
    #[serde(default = "default_tolerance")]
    pub boundary_mass_tolerance: f64,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_true() -> bool {
    true
}

fn default_sigma0() -> f64 {
    DEFAULT_SIGMA0
}

fn default_initial() -> InitialCondition {
    InitialCondition::Gaussian
}

fn default_tolerance() -> f64 {
    DEFAULT_BOUNDARY_MASS_TOLERANCE
}

/// How the physics is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Parametrization {
    Physical(ModelParams),
    Thermal { beta_u: f64, theta: f64 },
    ZeroTemperature { amplitude: f64, lambda: f64 },
}

fn exclusive<T>(a: Option<T>, a_name: &str, b: Option<T>, b_name: &str) -> Result<Option<T>> {
    match (a, b) {
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "`{a_name}` and `{b_name}` are mutually exclusive"
        ))),
        (Some(v), None) | (None, Some(v)) => Ok(Some(v)),
        (None, None) => Ok(None),
    }
}

fn require<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing field `{name}`")))
}

impl RunConfig {
    fn physical_keys(&self) -> Vec<&'static str> {
        let mut keys = vec![];
        let fields: [(&'static str, bool); 8] = [
            ("particle", self.particle.is_some()),
            ("mass_kg", self.mass_kg.is_some()),
            ("friction_kg_s", self.friction_kg_s.is_some()),
            ("T_K", self.temperature_k.is_some()),
            ("U_J", self.barrier_j.is_some()),
            ("U_eV", self.barrier_ev.is_some()),
            ("lattice_m", self.lattice_m.is_some()),
            ("lattice_A", self.lattice_angstrom.is_some()),
        ];
        for (name, present) in fields {
            if present {
                keys.push(name);
            }
        }
        keys
    }

    fn dimensionless_keys(&self) -> Vec<&'static str> {
        let fields: [(&'static str, bool); 4] = [
            ("beta_u", self.beta_u.is_some()),
            ("theta", self.theta.is_some()),
            ("lambda_param", self.lambda_param.is_some()),
            ("amplitude", self.amplitude.is_some()),
        ];
        fields
            .into_iter()
            .filter_map(|(n, p)| p.then_some(n))
            .collect()
    }

    pub fn parametrization(&self) -> Result<Parametrization> {
        let physical = self.physical_keys();
        let reduced = self.dimensionless_keys();
        if !physical.is_empty() && !reduced.is_empty() {
            return Err(Error::Config(format!(
                "physical keys {physical:?} and dimensionless keys {reduced:?} are mutually exclusive"
            )));
        }
        if !physical.is_empty() {
            let mass = require(
                exclusive(
                    self.particle.map(|p| p.mass()),
                    "particle",
                    self.mass_kg,
                    "mass_kg",
                )?,
                "particle` or `mass_kg",
            )?;
            let friction = require(self.friction_kg_s, "friction_kg_s")?;
            let barrier = exclusive(
                self.barrier_j,
                "U_J",
                self.barrier_ev.map(|u| u * EV),
                "U_eV",
            )?
            .unwrap_or(0.0);
            let lattice = require(
                exclusive(
                    self.lattice_m,
                    "lattice_m",
                    self.lattice_angstrom.map(|a| a * ANGSTROM),
                    "lattice_A",
                )?,
                "lattice_m` or `lattice_A",
            )?;
            if !(lattice > 0.0) {
                return Err(Error::Config("lattice constant must be > 0".into()));
            }
            let temperature = self.temperature_k.unwrap_or(0.0);
            let params = ModelParams {
                mass,
                friction,
                temperature,
                barrier_amplitude: barrier,
                wavenumber: wavenumber_for_lattice(lattice),
            };
            params
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
            if self.mode.is_thermal() && params.is_zero_temperature() {
                return Err(Error::Config("semiclassical mode needs `T_K` > 0".into()));
            }
            if !self.mode.is_thermal() && !params.is_zero_temperature() {
                return Err(Error::Config(format!(
                    "{} mode is a zero-temperature equation; omit `T_K` or set it to 0",
                    self.mode.as_str()
                )));
            }
            return Ok(Parametrization::Physical(params));
        }
        if self.mode.is_thermal() {
            if self.lambda_param.is_some() || self.amplitude.is_some() {
                return Err(Error::Config(
                    "semiclassical mode takes `beta_u` and `theta`".into(),
                ));
            }
            Ok(Parametrization::Thermal {
                beta_u: require(self.beta_u, "beta_u")?,
                theta: require(self.theta, "theta")?,
            })
        } else {
            if self.beta_u.is_some() || self.theta.is_some() {
                return Err(Error::Config(format!(
                    "{} mode takes `lambda_param` and optionally `amplitude`",
                    self.mode.as_str()
                )));
            }
            Ok(Parametrization::ZeroTemperature {
                amplitude: self.amplitude.unwrap_or(1.0),
                lambda: require(self.lambda_param, "lambda_param")?,
            })
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt_initial: self.time.dt,
            t_max: self.time.t_max,
            output_stride: self.time.output_stride,
            rows_per_decade: self.time.rows_per_decade,
            adaptivity: self.time.adaptivity,
            sigma0: self.sigma0,
            boundary_mass_tolerance: self.boundary_mass_tolerance,
            dt_min: self.time.dt_min,
            initial: self.initial,
        }
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Config(format!("line {} column {}: {e}", e.line(), e.column()))
}

/// Parses and validates a `simulate` configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).map_err(json_error)?;
    config.parametrization()?;
    if config.grid.periods == 0 {
        return Err(Error::Config("`grid.periods` must be at least 1".into()));
    }
    Ok(config)
}

/// A `sweep` configuration: a `beta_u` list crossed with either a `theta`
/// list or a `lambda_param` list (`θ = Λ·βU`), or explicit points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub beta_u: Vec<f64>,
    pub theta: Option<Vec<f64>>,
    pub lambda_param: Option<Vec<f64>>,
    /// Explicit `[beta_u, theta]` pairs, appended after the grid.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    /// Quadrature of the full effective potential instead of the truncated one.
    #[serde(default)]
    pub include_nonlinear: bool,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub beta_u: f64,
    pub theta: f64,
    pub lambda_param: Option<f64>,
}

impl SweepConfig {
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let mut out = vec![];
        match (&self.theta, &self.lambda_param) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "`theta` and `lambda_param` lists are mutually exclusive".into(),
                ))
            }
            (Some(thetas), None) => {
                for &b in &self.beta_u {
                    for &t in thetas {
                        out.push(SweepPoint {
                            beta_u: b,
                            theta: t,
                            lambda_param: (b > 0.0).then(|| t / b),
                        });
                    }
                }
            }
            (None, Some(lambdas)) => {
                for &b in &self.beta_u {
                    for &l in lambdas {
                        out.push(SweepPoint {
                            beta_u: b,
                            theta: l * b,
                            lambda_param: Some(l),
                        });
                    }
                }
            }
            (None, None) => {
                if !self.beta_u.is_empty() {
                    return Err(Error::Config(
                        "a `beta_u` list needs a `theta` or `lambda_param` list".into(),
                    ));
                }
            }
        }
        for &[b, t] in &self.points {
            out.push(SweepPoint {
                beta_u: b,
                theta: t,
                lambda_param: (b > 0.0).then(|| t / b),
            });
        }
        if out.is_empty() {
            return Err(Error::Config("the sweep has no points".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("`workers` must be at least 1".into()));
        }
        Ok(out)
    }
}

pub fn parse_sweep_config(text: &str) -> Result<SweepConfig> {
    let config: SweepConfig = serde_json::from_str(text).map_err(json_error)?;
    config.points()?;
    Ok(config)
}
