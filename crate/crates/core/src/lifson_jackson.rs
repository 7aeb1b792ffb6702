//! Effective diffusion coefficient of overdamped motion in a periodic
//! potential: `1/D = βb ⟨e^{βW}⟩ ⟨e^{−βW}⟩`, with `⟨·⟩` the average over one
//! period.
//!
//! Every estimate is carried in log space as well, so deep barriers never
//! overflow even when the linear value underflows to zero.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::model::DimensionlessGroups;
use crate::potentials::PeriodicPotential;
use crate::special_functions::ln_i0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    ClosedForm,
    Arrhenius,
    MsdFit,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
            Method::Arrhenius => "arrhenius",
            Method::MsdFit => "msd_fit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    Quadrature { nodes: usize, last_change: f64 },
    ClosedForm,
    Arrhenius { in_regime: bool },
    MsdFit { r_squared: f64, n_points: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionEstimate {
    /// `D` in the caller's unit system; may underflow to 0 for deep barriers.
    pub value: f64,
    /// `ln D`, always finite.
    pub log_value: f64,
    pub method: Method,
    pub params_echo: Option<DimensionlessGroups>,
    pub diagnostics: Diagnostics,
}

impl DiffusionEstimate {
    pub(crate) fn from_log(
        log_value: f64,
        method: Method,
        params_echo: Option<DimensionlessGroups>,
        diagnostics: Diagnostics,
    ) -> Self {
        Self {
            value: log_value.exp(),
            log_value,
            method,
            params_echo,
            diagnostics,
        }
    }
}

pub const QUADRATURE_START_NODES: usize = 64;
pub const QUADRATURE_MAX_NODES: usize = 1 << 20;
pub const QUADRATURE_TOLERANCE: f64 = 1e-12;

/// `ln(mean(exp(v)))` with the maximum shifted out.
fn log_mean_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + (v - max).exp(), n + 1));
    max + (sum / n as f64).ln()
}

/// Lifson–Jackson coefficient by the periodic trapezoid rule, doubling the
/// node count from 64 until successive estimates agree to 1e-12.
pub fn dcoef_quadrature<P: PeriodicPotential + ?Sized>(
    potential: &P,
    beta: f64,
    friction: f64,
) -> Result<DiffusionEstimate> {
    check_positive("beta", beta)?;
    check_positive("friction", friction)?;
    let period = potential.period();
    check_positive("period", period)?;

    let mut n = QUADRATURE_START_NODES;
    let mut samples: Vec<f64> = (0..n)
        .map(|j| beta * potential.value(j as f64 * period / n as f64))
        .collect();
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid(
            "potential",
            "must be finite over one period",
        ));
    }

    let log_inverse = |s: &[f64]| {
        (beta * friction).ln()
            + log_mean_exp(s.iter().copied())
            + log_mean_exp(s.iter().map(|v| -v))
    };
    let mut previous = log_inverse(&samples);
    let mut change = f64::INFINITY;
    while n < QUADRATURE_MAX_NODES {
        let midpoints: Vec<f64> = (0..n)
            .map(|j| beta * potential.value((j as f64 + 0.5) * period / n as f64))
            .collect();
        samples.extend(midpoints);
        n *= 2;
        let current = log_inverse(&samples);
        change = (current - previous).exp_m1().abs();
        previous = current;
        if change < QUADRATURE_TOLERANCE {
            return Ok(DiffusionEstimate::from_log(
                -current,
                Method::Quadrature,
                None,
                Diagnostics::Quadrature {
                    nodes: n,
                    last_change: change,
                },
            ));
        }
    }
    Err(Error::Numerical(format!(
        "Lifson–Jackson quadrature did not converge with {n} nodes (last relative change {change:e})"
    )))
}

/// Argument `(1 − θ) βU` of the Bessel closed form.
pub fn effective_barrier(groups: &DimensionlessGroups) -> Result<f64> {
    Ok((1.0 - groups.require_theta()?) * groups.require_beta_u()?)
}

/// `D = 1 / (βb I0²((1 − θ) βU))`.
pub fn dcoef_closed_form(groups: &DimensionlessGroups, friction: f64) -> Result<DiffusionEstimate> {
    check_positive("friction", friction)?;
    let beta = groups.require_beta()?;
    let x = effective_barrier(groups)?.abs();
    let log_value = -(beta * friction).ln() - 2.0 * ln_i0(x);
    Ok(DiffusionEstimate::from_log(
        log_value,
        Method::ClosedForm,
        Some(*groups),
        Diagnostics::ClosedForm,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrheniusEstimate {
    pub estimate: DiffusionEstimate,
    /// `(2 − λ_T² q²) U`.
    pub activation_energy: f64,
    /// `π (2 − λ_T² q²) U / b`.
    pub prefactor: f64,
    /// Whether `(1 − θ) βU > 1`, where the asymptote is meant to be used.
    pub in_regime: bool,
}

/// Large-barrier asymptote `D = π(2 − λ_T²q²)(U/b) exp[−β(2 − λ_T²q²)U]`.
pub fn dcoef_arrhenius(groups: &DimensionlessGroups, friction: f64) -> Result<ArrheniusEstimate> {
    check_positive("friction", friction)?;
    let beta = groups.require_beta()?;
    let theta = groups.require_theta()?;
    let beta_u = groups.require_beta_u()?;
    if theta >= 1.0 || beta_u <= 0.0 {
        return Err(Error::Regime(format!(
            "Arrhenius law needs θ < 1 and βU > 0 (θ = {theta}, βU = {beta_u})"
        )));
    }
    let u = beta_u / beta;
    let reduction = 2.0 - 2.0 * theta;
    let activation_energy = reduction * u;
    let prefactor = std::f64::consts::PI * reduction * u / friction;
    let log_value = prefactor.ln() - reduction * beta_u;
    Ok(ArrheniusEstimate {
        estimate: DiffusionEstimate::from_log(
            log_value,
            Method::Arrhenius,
            Some(*groups),
            Diagnostics::Arrhenius {
                in_regime: (1.0 - theta) * beta_u > 1.0,
            },
        ),
        activation_energy,
        prefactor,
        in_regime: (1.0 - theta) * beta_u > 1.0,
    })
}
