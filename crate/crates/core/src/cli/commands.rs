use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{Error, Result};
use crate::gaussian_closure::{
    asymptotic_dispersion, closure_ode_at_times, dispersion_at_time_from, log_spaced_times,
    ClosureParams,
};
use crate::lifson_jackson::{
    dcoef_arrhenius, dcoef_closed_form, dcoef_quadrature, ArrheniusEstimate, DiffusionEstimate,
};
use crate::model::{derive_groups, DimensionlessGroups, EV};
use crate::parallel::{default_workers, par_map};
use crate::pde_solver::{
    periodic_grid, run_bohm_zero_t, run_fourth_order, run_quantum_temperature, run_semiclassical,
    Scales, ThermalProblem, TimeSeries, ZeroTemperatureProblem,
};
use crate::potentials::{CosinePotential, EffectivePotentialSpec};

use super::claims::paper_claims;
use super::config::{
    parse_config, parse_sweep_config, Mode, Parametrization, Particle, RunConfig, SweepPoint,
};
use super::output::{csv_field, format_float, optional, time_series_csv, tool_line, write_output};
use super::{
    ClosureArgs, DcoefArgs, Failure, SweepArgs, EXIT_CLAIM, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK,
};

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn groups_json(g: &DimensionlessGroups) -> String {
    serde_json::to_string(g).expect("groups serialise")
}

pub(crate) fn dcoef(args: &DcoefArgs) -> std::result::Result<i32, Failure> {
    let mut header = vec![tool_line(), "# command: dcoef".to_string()];
    let (groups, friction, quad) = match &args.config {
        Some(path) => {
            let config = parse_config(&read(path)?)?;
            let params = match config.parametrization()? {
                Parametrization::Physical(p) if config.mode == Mode::Semiclassical => p,
                _ => {
                    return Err(Failure::new(
                        EXIT_CONFIG,
                        "dcoef --config needs a semiclassical config with physical parameters",
                    ))
                }
            };
            let g = derive_groups(&params)?;
            let beta = g.beta.unwrap_or(f64::NAN);
            let w = EffectivePotentialSpec::new(
                CosinePotential::new(params.barrier_amplitude, params.wavenumber)?,
                g.theta.unwrap_or(0.0),
                beta,
                args.nonlinear,
            )?;
            header.push("# units: SI (D in m^2/s, E_a in J, prefactor in m^2/s)".into());
            (
                g,
                params.friction,
                dcoef_quadrature(&w, beta, params.friction)?,
            )
        }
        None => {
            let (Some(beta_u), Some(theta)) = (args.beta_u, args.theta) else {
                return Err(Failure::new(
                    EXIT_CONFIG,
                    "dcoef needs --beta-u and --theta, or --config",
                ));
            };
            let g = DimensionlessGroups::reduced(beta_u, theta)?;
            let w = EffectivePotentialSpec::reduced(beta_u, theta, args.nonlinear)?;
            header.push("# units: reduced (D and prefactor in 1/(beta b), E_a in k_B T)".into());
            (g, 1.0, dcoef_quadrature(&w, 1.0, 1.0)?)
        }
    };
    header.push(format!("# groups: {}", groups_json(&groups)));
    header.push(format!(
        "# quadrature potential: {}",
        if args.nonlinear { "full" } else { "truncated" }
    ));

    let closed = dcoef_closed_form(&groups, friction)?;
    let arrhenius = match dcoef_arrhenius(&groups, friction) {
        Ok(a) => Some(a),
        Err(Error::Regime(msg)) => {
            header.push(format!("# arrhenius: {msg}"));
            None
        }
        Err(e) => return Err(e.into()),
    };

    let mut out = header.join("\n");
    out.push_str("\nmethod,value,log_value,E_a,prefactor\n");
    let plain = |e: &DiffusionEstimate| {
        format!(
            "{},{},{},,\n",
            e.method.as_str(),
            format_float(e.value),
            format_float(e.log_value)
        )
    };
    out.push_str(&plain(&quad));
    out.push_str(&plain(&closed));
    if let Some(ArrheniusEstimate {
        estimate,
        activation_energy,
        prefactor,
        ..
    }) = arrhenius
    {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            estimate.method.as_str(),
            format_float(estimate.value),
            format_float(estimate.log_value),
            format_float(activation_energy),
            format_float(prefactor)
        ));
    }
    write_output(None, &out)?;
    Ok(EXIT_OK)
}

fn run_mode(config: &RunConfig) -> Result<(TimeSeries, Scales, DimensionlessGroups, bool)> {
    let grid = periodic_grid(config.grid.periods, config.grid.cells_per_period)?;
    let solver = config.solver_config();
    let parametrization = config.parametrization()?;
    let physical = matches!(parametrization, Parametrization::Physical(_));
    let (series, scales, groups) = match (config.mode, parametrization) {
        (Mode::Semiclassical, p) => {
            let (problem, scales, groups) = match p {
                Parametrization::Physical(params) => {
                    let (problem, scales) =
                        ThermalProblem::from_params(&params, config.include_nonlinear)?;
                    (problem, scales, derive_groups(&params)?)
                }
                Parametrization::Thermal { beta_u, theta } => (
                    ThermalProblem::new(beta_u, theta, config.include_nonlinear)?,
                    Scales::UNIT,
                    DimensionlessGroups::reduced(beta_u, theta)?,
                ),
                Parametrization::ZeroTemperature { .. } => unreachable!("checked by the parser"),
            };
            (run_semiclassical(&problem, &grid, &solver)?, scales, groups)
        }
        (mode, p) => {
            let (problem, scales, groups) = match p {
                Parametrization::Physical(params) => {
                    let (problem, scales) = ZeroTemperatureProblem::from_params(&params)?;
                    (problem, scales, derive_groups(&params)?)
                }
                Parametrization::ZeroTemperature { amplitude, lambda } => (
                    ZeroTemperatureProblem::new(amplitude, lambda)?,
                    Scales::UNIT,
                    DimensionlessGroups {
                        lambda_param: Some(lambda),
                        ..DimensionlessGroups::default()
                    },
                ),
                Parametrization::Thermal { .. } => unreachable!("checked by the parser"),
            };
            let series = match mode {
                Mode::QuantumTemp => run_quantum_temperature(&problem, &grid, &solver)?,
                Mode::Bohm => run_bohm_zero_t(&problem, &grid, &solver)?,
                Mode::FourthOrder => run_fourth_order(&problem, &grid, &solver)?,
                Mode::Semiclassical => unreachable!(),
            };
            (series, scales, groups)
        }
    };
    Ok((series, scales, groups, physical))
}

fn summary_path(config: &RunConfig) -> Option<PathBuf> {
    config.output.summary.clone().or_else(|| {
        config.output.csv.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".summary.json");
            PathBuf::from(s)
        })
    })
}

pub(crate) fn simulate(path: &Path) -> std::result::Result<i32, Failure> {
    let config = parse_config(&read(path)?)?;
    let (series, scales, groups, physical) = run_mode(&config)?;
    let series = if physical {
        series.to_physical(&scales)
    } else {
        series
    };
    let header = vec![
        tool_line(),
        format!("# mode: {}", config.mode.as_str()),
        format!("# units: {}", if physical { "SI" } else { "reduced" }),
        format!("# groups: {}", groups_json(&groups)),
    ];
    let csv = time_series_csv(&header, &series);
    write_output(config.output.csv.as_deref(), &csv)?;

    let code = if series.aborted.is_some() {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    };
    let first_negative = series.rows.iter().find(|r| r.min_rho < 0.0).map(|r| r.t);
    let min_density = series
        .rows
        .iter()
        .map(|r| r.min_rho)
        .fold(f64::INFINITY, f64::min);
    let summary = json!({
        "tool": format!("qdiff {}", env!("CARGO_PKG_VERSION")),
        "mode": config.mode.as_str(),
        "units": if physical { "SI" } else { "reduced" },
        "parameters": config,
        "groups": groups,
        "scales": scales,
        "usable_until": series.usable_until,
        "contaminated_at": series.contaminated_at,
        "aborted": series.aborted,
        "final": series.last(),
        "min_density": min_density,
        "first_negative_density_time": first_negative,
        "diagnostics": series.diagnostics,
        "exit_status": code,
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n";
    match summary_path(&config) {
        Some(p) => write_output(Some(&p), &text)?,
        None => eprint!("{text}"),
    }
    if let Some(reason) = &series.aborted {
        eprintln!("qdiff: solver aborted: {reason}");
    }
    Ok(code)
}

pub(crate) fn closure(args: &ClosureArgs) -> std::result::Result<i32, Failure> {
    let mass = match args.mass_kg {
        Some(m) => m,
        None => match args.particle.as_str() {
            "electron" => Particle::Electron.mass(),
            _ => Particle::Proton.mass(),
        },
    };
    let barrier = args.u_j.or(args.u_ev.map(|u| u * EV)).unwrap_or(0.0);
    let params = ClosureParams::new(mass, args.friction_kg_s, barrier)?;
    if !(args.t_max > 0.0) || args.rows_per_decade == 0 {
        return Err(Failure::new(
            EXIT_CONFIG,
            "--t-max must be > 0 and --rows-per-decade at least 1",
        ));
    }
    let times = log_spaced_times(args.t_max, args.decades, args.rows_per_decade);
    let ode = closure_ode_at_times(&params, &times, args.sigma0)?;

    let mut out = vec![
        tool_line(),
        "# command: closure".to_string(),
        "# units: SI (t in s, sigma2 in m^2)".to_string(),
        format!(
            "# params: {}",
            serde_json::to_string(&params).expect("params serialise")
        ),
    ];
    if barrier > 0.0 {
        out.push(format!(
            "# lambda_U^2 = {} m^2, b/(m omega_U^2) = {} s, log time unit = {} s",
            format_float(params.length_scale_sq()?),
            format_float(params.relaxation_time()?),
            format_float(params.log_time_unit()?)
        ));
    }
    out.push("t,sigma2_ode,sigma2_implicit,sigma2_asymptote,beta_q_u".into());
    for (t, s_ode) in times.iter().zip(&ode) {
        let implicit = dispersion_at_time_from(*t, &params, args.sigma0)?;
        let asymptote = asymptotic_dispersion(*t, &params).ok();
        let x = (barrier > 0.0).then(|| params.argument(implicit));
        out.push(format!(
            "{},{},{},{},{}",
            format_float(*t),
            format_float(*s_ode),
            format_float(implicit),
            optional(asymptote),
            optional(x)
        ));
    }
    let mut text = out.join("\n");
    text.push('\n');
    write_output(args.output.as_deref(), &text)?;
    Ok(EXIT_OK)
}

pub(crate) fn check_paper() -> std::result::Result<i32, Failure> {
    let rows = paper_claims()?;
    let mut out = String::new();
    out.push_str(&format!(
        "{:<52} {:>24} {:>24} {:>22}  status\n",
        "claim", "computed", "reference", "tolerance"
    ));
    for r in &rows {
        out.push_str(&format!(
            "{:<52} {:>24} {:>24} {:>22}  {}\n",
            r.name,
            format_float(r.computed),
            format_float(r.reference),
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    write_output(None, &out)?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("qdiff: failing claims: {}", failed.join("; "));
        Ok(EXIT_CLAIM)
    }
}

/// One evaluated sweep point; `error` is set when the point failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub beta_u: f64,
    pub theta: f64,
    pub lambda_param: Option<f64>,
    pub d_quadrature: Option<f64>,
    pub d_closed: Option<f64>,
    pub d_arrhenius: Option<f64>,
    pub log_d_closed: Option<f64>,
    /// Activation energy in units of `k_B T`.
    pub activation: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            self.index,
            format_float(self.beta_u),
            format_float(self.theta),
            optional(self.lambda_param),
            optional(self.d_quadrature),
            optional(self.d_closed),
            optional(self.d_arrhenius),
            optional(self.log_d_closed),
            optional(self.activation),
            csv_field(self.error.as_deref().unwrap_or(""))
        )
    }
}

fn evaluate_point(index: usize, p: &SweepPoint, nonlinear: bool) -> SweepRow {
    let mut row = SweepRow {
        index,
        beta_u: p.beta_u,
        theta: p.theta,
        lambda_param: p.lambda_param,
        d_quadrature: None,
        d_closed: None,
        d_arrhenius: None,
        log_d_closed: None,
        activation: None,
        error: None,
    };
    let result = (|| -> Result<()> {
        let g = DimensionlessGroups::reduced(p.beta_u, p.theta)?;
        let w = EffectivePotentialSpec::reduced(p.beta_u, p.theta, nonlinear)?;
        let quad = dcoef_quadrature(&w, 1.0, 1.0)?;
        let closed = dcoef_closed_form(&g, 1.0)?;
        row.d_quadrature = Some(quad.value);
        row.d_closed = Some(closed.value);
        row.log_d_closed = Some(closed.log_value);
        match dcoef_arrhenius(&g, 1.0) {
            Ok(a) => {
                row.d_arrhenius = Some(a.estimate.value);
                row.activation = Some(a.activation_energy);
            }
            Err(Error::Regime(_)) => {}
            Err(e) => return Err(e),
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// Evaluates every point of a sweep with `workers` threads, in input order.
pub fn sweep_rows(points: &[SweepPoint], nonlinear: bool, workers: usize) -> Result<Vec<SweepRow>> {
    let indexed: Vec<(usize, SweepPoint)> = points.iter().copied().enumerate().collect();
    par_map(&indexed, workers, |(i, p)| evaluate_point(*i, p, nonlinear))
}

pub(crate) fn sweep(args: &SweepArgs) -> std::result::Result<i32, Failure> {
    let config = parse_sweep_config(&read(&args.config)?)?;
    let points = config.points()?;
    let workers = args
        .workers
        .or(config.workers)
        .unwrap_or_else(default_workers);
    let rows = sweep_rows(&points, config.include_nonlinear, workers)?;

    let mut out = String::new();
    out.push_str(&tool_line());
    out.push_str("\n# command: sweep\n");
    out.push_str("# units: D in 1/(beta b), E_a in k_B T\n");
    out.push_str(&format!(
        "# quadrature potential: {}\n",
        if config.include_nonlinear {
            "full"
        } else {
            "truncated"
        }
    ));
    out.push_str("index,beta_u,theta,lambda_param,D_quadrature,D_closed,D_arrhenius,log_D_closed,E_a,error\n");
    for r in &rows {
        out.push_str(&r.to_csv());
    }
    let path = args.output.as_deref().or(config.output.as_deref());
    write_output(path, &out)?;
    if rows.iter().any(|r| r.error.is_none()) {
        Ok(EXIT_OK)
    } else {
        eprintln!("qdiff: every sweep point failed");
        Ok(EXIT_NUMERICAL)
    }
}
