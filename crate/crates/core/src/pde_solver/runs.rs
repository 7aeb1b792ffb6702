use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::potentials::{
    bohm_operator, equilibrium_density_from_values, EffectivePotentialSpec, Potential,
    DENSITY_FLOOR,
};

use super::grid::{observables, Boundary, DensityField, Grid, Observables};
use super::{
    Adaptivity, DriftDiffusion, InitialCondition, RunDiagnostics, SolverConfig, ThermalProblem,
    TimeRow, TimeSeries, ZeroTemperatureProblem,
};

/// Accepted steps at the reduced size before the halving controller tries
/// to double the step again.
const REGROW_AFTER: usize = 20;

/// A single-step update rule for one evolution equation.
trait Stepper {
    fn step(&mut self, rho: &[f64], obs: &Observables, dt: f64) -> Result<Vec<f64>>;

    /// Largest step the scheme tolerates in the current state.
    fn dt_cap(&self, _obs: &Observables) -> f64 {
        f64::INFINITY
    }

    fn beta_q_inv(&self, _obs: &Observables) -> Option<f64> {
        None
    }

    /// Extra acceptance test on a candidate state.
    fn check(
        &self,
        _old: &Observables,
        _new: &Observables,
        _rho: &[f64],
        _next: &[f64],
    ) -> Result<()> {
        Ok(())
    }

    fn floored_cells(&self) -> usize {
        0
    }
}

/// Mass within two cells of either end of a periodic domain.
pub(crate) fn seam_mass(rho: &[f64], h: f64) -> f64 {
    let n = rho.len();
    (rho[0].abs() + rho[1].abs() + rho[n - 2].abs() + rho[n - 1].abs()) * h
}

/// Decides which accepted times get an output row.
pub(crate) struct Schedule {
    stride: usize,
    log_factor: Option<f64>,
    next_time: f64,
}

impl Schedule {
    pub(crate) fn new(config: &SolverConfig) -> Self {
        Self {
            stride: config.output_stride,
            log_factor: config.rows_per_decade.map(|n| 10f64.powf(1.0 / n as f64)),
            next_time: config.dt_initial,
        }
    }

    pub(crate) fn due(&mut self, step: usize, t: f64) -> bool {
        match self.log_factor {
            None => step.is_multiple_of(self.stride),
            Some(f) => {
                if t >= self.next_time * (1.0 - 1e-12) {
                    while self.next_time <= t * (1.0 + 1e-12) {
                        self.next_time *= f;
                    }
                    true
                } else {
                    false
                }
            }
        }
    }
}

fn row(t: f64, obs: &Observables, beta_q_inv: Option<f64>) -> TimeRow {
    TimeRow {
        t,
        mass: obs.mass,
        mean: obs.mean,
        sigma2: obs.dispersion,
        min_rho: obs.min_density,
        beta_q_inv,
    }
}

fn integrate(
    grid: &Grid,
    config: &SolverConfig,
    initial: DensityField,
    stepper: &mut dyn Stepper,
) -> TimeSeries {
    let guard =
        config.initial == InitialCondition::Gaussian && grid.boundary() == Boundary::Periodic;
    let h = grid.cell_width();
    let mut rho = initial.into_values();
    let mut obs = observables(&DensityField::new(*grid, rho.clone()).expect("valid field"));
    let mut rows = vec![row(0.0, &obs, stepper.beta_q_inv(&obs))];
    let mut schedule = Schedule::new(config);
    let mut diagnostics = RunDiagnostics::default();
    let mut contaminated_at = None;
    let mut aborted = None;

    let mut t = 0.0;
    let mut dt = config.dt_initial;
    let mut streak = 0;
    let t_end = config.t_max * (1.0 - 1e-12);
    while t < t_end {
        let cap = stepper.dt_cap(&obs);
        let step_dt = dt.min(cap).min(config.t_max - t);
        let candidate = stepper.step(&rho, &obs, step_dt).and_then(|next| {
            let field = DensityField::new(*grid, next)?;
            let new_obs = observables(&field);
            stepper.check(&obs, &new_obs, &rho, field.values())?;
            Ok((field.into_values(), new_obs))
        });
        match candidate {
            Ok((next, new_obs)) => {
                diagnostics.max_floored_cells =
                    diagnostics.max_floored_cells.max(stepper.floored_cells());
                if guard && seam_mass(&next, h) > config.boundary_mass_tolerance {
                    contaminated_at = Some(t + step_dt);
                    if rows.last().map(|r| r.t) != Some(t) {
                        rows.push(row(t, &obs, stepper.beta_q_inv(&obs)));
                    }
                    break;
                }
                t += step_dt;
                rho = next;
                obs = new_obs;
                diagnostics.accepted_steps += 1;
                if schedule.due(diagnostics.accepted_steps, t) {
                    rows.push(row(t, &obs, stepper.beta_q_inv(&obs)));
                }
                streak += 1;
                if config.adaptivity == Adaptivity::Halving
                    && dt < config.dt_initial
                    && streak >= REGROW_AFTER
                {
                    dt = (2.0 * dt).min(config.dt_initial);
                    streak = 0;
                }
            }
            Err(e) => {
                diagnostics.rejected_steps += 1;
                streak = 0;
                if config.adaptivity == Adaptivity::Fixed {
                    aborted = Some(format!("step rejected at t = {t}: {e}"));
                    break;
                }
                dt = 0.5 * step_dt;
                if dt < config.dt_min {
                    aborted = Some(format!(
                        "time step fell below dt_min = {} at t = {t}: {e}",
                        config.dt_min
                    ));
                    break;
                }
            }
        }
    }
    if rows.last().map(|r| r.t) != Some(t) {
        rows.push(row(t, &obs, stepper.beta_q_inv(&obs)));
    }
    diagnostics.final_dt = dt;
    TimeSeries {
        rows,
        usable_until: t,
        contaminated_at,
        aborted,
        diagnostics,
    }
}

fn check_periodic_domain(grid: &Grid) -> Result<()> {
    if grid.boundary() == Boundary::Periodic && !grid.holds_whole_periods(2.0 * PI) {
        return Err(Error::invalid(
            "grid",
            "a periodic domain must hold a whole number of potential periods (2π in reduced units)",
        ));
    }
    Ok(())
}

fn initial_density(
    grid: &Grid,
    config: &SolverConfig,
    potential: Option<&[f64]>,
) -> Result<DensityField> {
    match config.initial {
        InitialCondition::Gaussian => {
            let center = grid.origin() + 0.5 * grid.domain_length();
            DensityField::gaussian(*grid, center, config.sigma0)
        }
        InitialCondition::Uniform => Ok(DensityField::uniform(*grid)),
        InitialCondition::Equilibrium => match potential {
            Some(w) => equilibrium_density_from_values(w, 1.0, grid),
            None => Err(Error::invalid(
                "initial",
                "an equilibrium initial condition needs a finite temperature",
            )),
        },
    }
}

struct Semiclassical {
    op: DriftDiffusion,
}

impl Stepper for Semiclassical {
    fn step(&mut self, rho: &[f64], _obs: &Observables, dt: f64) -> Result<Vec<f64>> {
        self.op.step(rho, dt)
    }
}

/// Evolves the semiclassical equation in thermal units
/// (`x → qx`, `t → tq²/βb`, unit Einstein coefficient).
pub fn run_semiclassical(
    problem: &ThermalProblem,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<TimeSeries> {
    if grid.boundary() != Boundary::Periodic {
        return Err(Error::invalid(
            "grid",
            "the semiclassical run needs a periodic grid",
        ));
    }
    check_periodic_domain(grid)?;
    config.validate(grid)?;
    let spec =
        EffectivePotentialSpec::reduced(problem.beta_u, problem.theta, problem.include_nonlinear)?;
    let w: Vec<f64> = grid.centers().map(|x| spec.value(x)).collect();
    let initial = initial_density(grid, config, Some(&w))?;
    let mut stepper = Semiclassical {
        op: DriftDiffusion::new(grid, &w, 1.0),
    };
    Ok(integrate(grid, config, initial, &mut stepper))
}

fn cosine_on_grid(grid: &Grid, amplitude: f64) -> Vec<f64> {
    grid.centers().map(|x| amplitude * x.cos()).collect()
}

struct QuantumTemperature {
    grid: Grid,
    potential: Vec<f64>,
    problem: ZeroTemperatureProblem,
}

impl Stepper for QuantumTemperature {
    fn step(&mut self, rho: &[f64], obs: &Observables, dt: f64) -> Result<Vec<f64>> {
        let diffusion = self.problem.quantum_temperature(obs.dispersion);
        DriftDiffusion::new(&self.grid, &self.potential, diffusion).step(rho, dt)
    }

    fn beta_q_inv(&self, obs: &Observables) -> Option<f64> {
        Some(self.problem.quantum_temperature(obs.dispersion))
    }
}

/// Evolves the quantum-temperature Smoluchowski equation: drift in the
/// cosine potential plus diffusion at `ħ²/4mσ²`, with `σ²` taken from the
/// density at the start of each step.
pub fn run_quantum_temperature(
    problem: &ZeroTemperatureProblem,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<TimeSeries> {
    check_periodic_domain(grid)?;
    config.validate(grid)?;
    let initial = initial_density(grid, config, None)?;
    let mut stepper = QuantumTemperature {
        grid: *grid,
        potential: cosine_on_grid(grid, problem.amplitude),
        problem: *problem,
    };
    Ok(integrate(grid, config, initial, &mut stepper))
}

/// Largest relative change of the density tolerated in one Bohm step.
const BOHM_MAX_CHANGE: f64 = 0.2;
/// Largest relative decrease of the dispersion tolerated in one Bohm step.
const BOHM_MAX_DISPERSION_DROP: f64 = 1e-3;
/// Fraction of the linear stability limit used as the step cap.
const BOHM_SAFETY: f64 = 0.9;

struct Bohm {
    grid: Grid,
    potential: Vec<f64>,
    problem: ZeroTemperatureProblem,
    floored: usize,
}

impl Stepper for Bohm {
    fn step(&mut self, rho: &[f64], obs: &Observables, dt: f64) -> Result<Vec<f64>> {
        // ρ∂(V + Q) = ρ∂Φ + D∂ρ with Φ = V + Q − D ln ρ; D is the Gaussian
        // quantum temperature, so Φ is flat for a free Gaussian packet.
        let field = DensityField::new(self.grid, rho.to_vec())?;
        let bohm = bohm_operator(&field, 4.0 * self.problem.lambda);
        self.floored = bohm.floored_cells;
        let diffusion = self.problem.quantum_temperature(obs.dispersion);
        let floor = DENSITY_FLOOR * field.max();
        let phi: Vec<f64> = self
            .potential
            .iter()
            .zip(&bohm.values)
            .zip(rho)
            .map(|((v, q), &r)| v + q - diffusion * r.max(floor).ln())
            .collect();
        DriftDiffusion::new(&self.grid, &phi, diffusion).step(rho, dt)
    }

    fn dt_cap(&self, obs: &Observables) -> f64 {
        // Linearised about a uniform state the lagged Bohm term is
        // −2Λ∂⁴ against an implicit D∂²; the step is stable while
        // dt (ΛK⁴ − DK²) ≤ 1 for every discrete K² ≤ 4/h².
        let h = self.grid.cell_width();
        let k2 = 4.0 / (h * h);
        let d = self.problem.quantum_temperature(obs.dispersion);
        let rate = self.problem.lambda * k2 * k2 - d * k2;
        if rate > 0.0 {
            BOHM_SAFETY / rate
        } else {
            f64::INFINITY
        }
    }

    fn beta_q_inv(&self, obs: &Observables) -> Option<f64> {
        Some(self.problem.quantum_temperature(obs.dispersion))
    }

    fn check(&self, old: &Observables, new: &Observables, rho: &[f64], next: &[f64]) -> Result<()> {
        let max = rho.iter().copied().fold(0.0, f64::max);
        let change = rho
            .iter()
            .zip(next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / max;
        if change > BOHM_MAX_CHANGE {
            return Err(Error::Numerical(format!(
                "density changed by {change:.3} of its maximum in one step"
            )));
        }
        let drop = (old.dispersion - new.dispersion) / old.dispersion;
        if drop > BOHM_MAX_DISPERSION_DROP {
            return Err(Error::Numerical(format!(
                "dispersion dropped by {drop:.2e} in one step"
            )));
        }
        Ok(())
    }

    fn floored_cells(&self) -> usize {
        self.floored
    }
}

/// Evolves the zero-temperature Bohm equation `∂_t ρ = ∂_x[ρ ∂_x(V + Q)]/b`.
///
/// `Q` is recomputed from the density before each step and enters as a
/// lagged potential; the cosine drift and a Gaussian-closure diffusion are
/// implicit. The step is capped by the linear stability limit (which scales
/// as `h⁴`) and halved whenever a candidate step is rejected, so this mode
/// always runs with the halving controller.
pub fn run_bohm_zero_t(
    problem: &ZeroTemperatureProblem,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<TimeSeries> {
    check_periodic_domain(grid)?;
    config.validate(grid)?;
    let initial = initial_density(grid, config, None)?;
    let config = SolverConfig {
        adaptivity: Adaptivity::Halving,
        ..*config
    };
    let mut stepper = Bohm {
        grid: *grid,
        potential: cosine_on_grid(grid, problem.amplitude),
        problem: *problem,
        floored: 0,
    };
    Ok(integrate(grid, &config, initial, &mut stepper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_solver::periodic_grid;

    #[test]
    fn free_semiclassical_run_follows_einstein_law() {
        let grid = periodic_grid(16, 32).unwrap();
        let config = SolverConfig {
            dt_initial: 0.05,
            t_max: 20.0,
            output_stride: 20,
            ..SolverConfig::default()
        };
        let problem = ThermalProblem::new(0.0, 0.4, false).unwrap();
        let series = run_semiclassical(&problem, &grid, &config).unwrap();
        let s0 = series.rows[0].sigma2;
        for r in &series.rows {
            assert!(
                (r.sigma2 - (s0 + 2.0 * r.t)).abs() < 1e-9 * r.sigma2,
                "{r:?}"
            );
            assert!((r.mass - 1.0).abs() < 1e-12);
        }
        assert!(series.contaminated_at.is_none());
    }

    #[test]
    fn contamination_stops_the_run() {
        let grid = periodic_grid(2, 32).unwrap();
        let config = SolverConfig {
            dt_initial: 0.05,
            t_max: 1000.0,
            ..SolverConfig::default()
        };
        let problem = ThermalProblem::new(0.0, 0.0, false).unwrap();
        let series = run_semiclassical(&problem, &grid, &config).unwrap();
        let stop = series.contaminated_at.expect("packet reaches the seam");
        assert!(stop < 1000.0);
        assert!(series.usable_until < stop);
        assert_eq!(series.rows.last().unwrap().t, series.usable_until);
    }

    #[test]
    fn equilibrium_start_is_stationary() {
        let grid = periodic_grid(4, 64).unwrap();
        let config = SolverConfig {
            dt_initial: 0.5,
            t_max: 200.0,
            initial: InitialCondition::Equilibrium,
            ..SolverConfig::default()
        };
        let problem = ThermalProblem::new(3.0, 0.2, true).unwrap();
        let series = run_semiclassical(&problem, &grid, &config).unwrap();
        let s0 = series.rows[0].sigma2;
        for r in &series.rows {
            assert!((r.sigma2 - s0).abs() < 1e-10 * s0);
        }
    }

    #[test]
    fn uniform_density_is_a_bohm_fixed_point_without_potential() {
        let grid = periodic_grid(2, 32).unwrap();
        let config = SolverConfig {
            dt_initial: 1e-3,
            t_max: 0.5,
            initial: InitialCondition::Uniform,
            ..SolverConfig::default()
        };
        let problem = ZeroTemperatureProblem::new(0.0, 1.0).unwrap();
        let series = run_bohm_zero_t(&problem, &grid, &config).unwrap();
        let s0 = series.rows[0].sigma2;
        for r in &series.rows {
            assert!((r.sigma2 - s0).abs() < 1e-12 * s0);
            assert!((r.min_rho - 1.0 / grid.domain_length()).abs() < 1e-14);
        }
        assert!(series.aborted.is_none());
    }

    #[test]
    fn semiclassical_rejects_bad_domains() {
        let problem = ThermalProblem::new(1.0, 0.0, false).unwrap();
        let config = SolverConfig::default();
        let odd = Grid::new(64, 7.0, 0.0, Boundary::Periodic).unwrap();
        assert!(run_semiclassical(&problem, &odd, &config).is_err());
        let walls = Grid::new(64, 2.0 * PI, 0.0, Boundary::NoFlux).unwrap();
        assert!(run_semiclassical(&problem, &walls, &config).is_err());
        let coarse = periodic_grid(1, 16).unwrap();
        let narrow = SolverConfig {
            sigma0: 0.1,
            ..config
        };
        assert!(run_semiclassical(&problem, &coarse, &narrow).is_err());
    }

    #[test]
    fn log_schedule_spaces_rows_geometrically() {
        let config = SolverConfig {
            dt_initial: 0.01,
            rows_per_decade: Some(4),
            ..SolverConfig::default()
        };
        let mut s = Schedule::new(&config);
        let mut due = vec![];
        for step in 1..=10_000 {
            let t = step as f64 * 0.01;
            if s.due(step, t) {
                due.push(t);
            }
        }
        // 0.01 .. 100 spans four decades
        assert!((15..=18).contains(&due.len()), "{}", due.len());
    }
}
