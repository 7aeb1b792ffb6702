//! Time integration of the four evolution equations on a uniform 1D grid.
//!
//! All runs work in reduced units: lengths in `1/q`, so one potential
//! period is `2π`. Thermal runs measure energy in `k_B T` and time in
//! `βb/q²`; zero-temperature runs measure energy in `E₀` (the barrier `U`,
//! or `ħ²q²/8m` when `U = 0`) and time in `b/(E₀ q²)`. [`Scales`] converts a
//! [`TimeSeries`] back to SI.

mod drift_diffusion;
mod grid;
mod runs;
mod spectral;
mod tridiag;

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::model::{ModelParams, HBAR, K_B};

pub use drift_diffusion::step_drift_diffusion;
pub use grid::{observables, Boundary, DensityField, Grid, Observables};
pub use runs::{run_bohm_zero_t, run_quantum_temperature, run_semiclassical};
pub use spectral::{run_fourth_order, FourthOrderPropagator};

pub(crate) use drift_diffusion::DriftDiffusion;

/// Default domain: 64 potential periods.
pub const DEFAULT_PERIODS: usize = 64;
/// Default resolution: 64 cells per period.
pub const DEFAULT_CELLS_PER_PERIOD: usize = 64;
/// Default packet width, in units of `1/q`.
pub const DEFAULT_SIGMA0: f64 = 0.5;
/// Default seam-mass tolerance for the contamination guard.
pub const DEFAULT_BOUNDARY_MASS_TOLERANCE: f64 = 1e-6;

/// Periodic reduced grid of `periods` potential periods, centred on the
/// potential minimum at `x = π`.
pub fn periodic_grid(periods: usize, cells_per_period: usize) -> Result<Grid> {
    if periods == 0 {
        return Err(Error::invalid("periods", "must be at least 1"));
    }
    let length = periods as f64 * 2.0 * std::f64::consts::PI;
    Grid::centered(
        periods * cells_per_period,
        length,
        std::f64::consts::PI,
        Boundary::Periodic,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adaptivity {
    Fixed,
    Halving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// Gaussian of width `sigma0` at the grid centre.
    Gaussian,
    /// Boltzmann density of the run's (effective) potential.
    Equilibrium,
    Uniform,
}

/// Time-stepping controls, in the run's reduced units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt_initial: f64,
    pub t_max: f64,
    /// Record a row every `output_stride` accepted steps.
    pub output_stride: usize,
    /// When set, record rows on a logarithmic time grid instead, with this
    /// many rows per decade (starting one decade below the first step).
    pub rows_per_decade: Option<usize>,
    pub adaptivity: Adaptivity,
    pub sigma0: f64,
    pub boundary_mass_tolerance: f64,
    /// Smallest step the halving controller may reach before aborting.
    pub dt_min: f64,
    pub initial: InitialCondition,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt_initial: 0.1,
            t_max: 100.0,
            output_stride: 10,
            rows_per_decade: None,
            adaptivity: Adaptivity::Fixed,
            sigma0: DEFAULT_SIGMA0,
            boundary_mass_tolerance: DEFAULT_BOUNDARY_MASS_TOLERANCE,
            dt_min: 1e-12,
            initial: InitialCondition::Gaussian,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        check_positive("dt_initial", self.dt_initial)?;
        check_positive("t_max", self.t_max)?;
        check_positive("sigma0", self.sigma0)?;
        check_positive("boundary_mass_tolerance", self.boundary_mass_tolerance)?;
        check_positive("dt_min", self.dt_min)?;
        if self.output_stride == 0 {
            return Err(Error::invalid("output_stride", "must be at least 1"));
        }
        if self.rows_per_decade == Some(0) {
            return Err(Error::invalid("rows_per_decade", "must be at least 1"));
        }
        if self.initial == InitialCondition::Gaussian && self.sigma0 < 2.0 * grid.cell_width() {
            return Err(Error::invalid(
                "sigma0",
                format!(
                    "must be at least two cell widths ({})",
                    2.0 * grid.cell_width()
                ),
            ));
        }
        Ok(())
    }
}

/// One output row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeRow {
    pub t: f64,
    pub mass: f64,
    pub mean: f64,
    pub sigma2: f64,
    pub min_rho: f64,
    /// Quantum temperature `ħ²/4mσ²` where the mode defines one.
    pub beta_q_inv: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub final_dt: f64,
    /// Largest number of cells raised to the Bohm density floor in one step.
    pub max_floored_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub rows: Vec<TimeRow>,
    /// Last time at which the unwrapped moments are valid.
    pub usable_until: f64,
    /// Set when the periodic packet reached the seam and the run stopped.
    pub contaminated_at: Option<f64>,
    /// Set when the solver gave up; rows up to that point are kept.
    pub aborted: Option<String>,
    pub diagnostics: RunDiagnostics,
}

impl TimeSeries {
    pub fn last(&self) -> Option<&TimeRow> {
        self.rows.last()
    }

    /// Rows at or before `usable_until`.
    pub fn usable_rows(&self) -> impl Iterator<Item = &TimeRow> {
        let limit = self.usable_until;
        self.rows.iter().filter(move |r| r.t <= limit)
    }

    /// Converts a reduced-unit series to the physical units of `scales`.
    pub fn to_physical(&self, scales: &Scales) -> TimeSeries {
        let l = scales.length;
        let rows = self
            .rows
            .iter()
            .map(|r| TimeRow {
                t: r.t * scales.time,
                mass: r.mass,
                mean: r.mean * l,
                sigma2: r.sigma2 * l * l,
                min_rho: r.min_rho / l,
                beta_q_inv: r.beta_q_inv.map(|e| e * scales.energy),
            })
            .collect();
        TimeSeries {
            rows,
            usable_until: self.usable_until * scales.time,
            contaminated_at: self.contaminated_at.map(|t| t * scales.time),
            aborted: self.aborted.clone(),
            diagnostics: self.diagnostics,
        }
    }
}

/// Units of a reduced run, in SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub length: f64,
    pub time: f64,
    pub energy: f64,
}

impl Scales {
    pub const UNIT: Scales = Scales {
        length: 1.0,
        time: 1.0,
        energy: 1.0,
    };
}

/// Semiclassical problem in thermal units: potential `βW` with
/// `βV = βU cos x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalProblem {
    pub beta_u: f64,
    pub theta: f64,
    pub include_nonlinear: bool,
}

impl ThermalProblem {
    pub fn new(beta_u: f64, theta: f64, include_nonlinear: bool) -> Result<Self> {
        check_non_negative("beta_u", beta_u)?;
        check_non_negative("theta", theta)?;
        Ok(Self {
            beta_u,
            theta,
            include_nonlinear,
        })
    }

    pub fn from_params(params: &ModelParams, include_nonlinear: bool) -> Result<(Self, Scales)> {
        params.validate()?;
        if params.is_zero_temperature() {
            return Err(Error::Regime(
                "the semiclassical equation needs T > 0".into(),
            ));
        }
        let g = crate::model::derive_groups(params)?;
        let beta = g.require_beta()?;
        let q = params.wavenumber;
        let problem = Self::new(g.require_beta_u()?, g.require_theta()?, include_nonlinear)?;
        let scales = Scales {
            length: 1.0 / q,
            time: beta * params.friction / (q * q),
            energy: K_B * params.temperature,
        };
        Ok((problem, scales))
    }
}

/// Zero-temperature problem: potential `amplitude · cos x` and Bohm
/// coefficient `Λ = ħ²q²/8mE₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTemperatureProblem {
    pub amplitude: f64,
    pub lambda: f64,
}

impl ZeroTemperatureProblem {
    pub fn new(amplitude: f64, lambda: f64) -> Result<Self> {
        check_non_negative("amplitude", amplitude)?;
        check_positive("lambda", lambda)?;
        Ok(Self { amplitude, lambda })
    }

    pub fn from_params(params: &ModelParams) -> Result<(Self, Scales)> {
        params.validate()?;
        let q = params.wavenumber;
        let kinetic = HBAR * HBAR * q * q / (8.0 * params.mass);
        let energy = if params.barrier_amplitude > 0.0 {
            params.barrier_amplitude
        } else {
            kinetic
        };
        let problem = Self::new(params.barrier_amplitude / energy, kinetic / energy)?;
        let scales = Scales {
            length: 1.0 / q,
            time: params.friction / (energy * q * q),
            energy,
        };
        Ok((problem, scales))
    }

    /// Reduced quantum temperature `2Λ/σ²`.
    pub fn quantum_temperature(&self, sigma2: f64) -> f64 {
        2.0 * self.lambda / sigma2
    }
}
