//! Gaussian closure of the zero-temperature dynamics.
//!
//! Replacing `∂²_x ln ρ` by `−1/σ²` turns the density into a Gaussian at the
//! quantum temperature `ħ²/4mσ²`. Its dispersion obeys
//! `dσ⁴/dt = (ħ²/mb) / I₀²(x)` with `x = 4mUσ²/ħ²`, which integrates to the
//! implicit relation `x²(I₀² − I₁²)(x) = 16mU²t/ħ²b` and, for large `x`, to
//! the log law `σ² = (ħ²/8mU) ln(32πmU²t/ħ²b)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::model::HBAR;
use crate::pde_solver::{RunDiagnostics, TimeRow, TimeSeries};
use crate::special_functions::{ln_i0, scaled_i0, scaled_i1};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureParams {
    pub mass: f64,
    pub friction: f64,
    /// `U`; zero gives the free law.
    pub barrier_amplitude: f64,
    pub hbar: f64,
}

impl ClosureParams {
    pub fn new(mass: f64, friction: f64, barrier_amplitude: f64) -> Result<Self> {
        let p = Self {
            mass,
            friction,
            barrier_amplitude,
            hbar: HBAR,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("mass", self.mass)?;
        check_positive("friction", self.friction)?;
        check_non_negative("barrier_amplitude", self.barrier_amplitude)?;
        check_positive("hbar", self.hbar)?;
        Ok(())
    }

    /// `x = 4mU/ħ² · σ²`, the argument of the Bessel functions.
    pub fn argument(&self, sigma2: f64) -> f64 {
        4.0 * self.mass * self.barrier_amplitude * sigma2 / (self.hbar * self.hbar)
    }

    /// `16mU²t/ħ²b`, the right-hand side of the implicit relation.
    pub fn reduced_time(&self, t: f64) -> f64 {
        16.0 * self.mass * self.barrier_amplitude * self.barrier_amplitude * t
            / (self.hbar * self.hbar * self.friction)
    }

    /// `λ_U² = ħ²/8mU`.
    pub fn length_scale_sq(&self) -> Result<f64> {
        self.require_barrier()?;
        Ok(self.hbar * self.hbar / (8.0 * self.mass * self.barrier_amplitude))
    }

    /// `b/mω_U²` with `ω_U = 4U/ħ`.
    pub fn relaxation_time(&self) -> Result<f64> {
        self.require_barrier()?;
        let omega = 4.0 * self.barrier_amplitude / self.hbar;
        Ok(self.friction / (self.mass * omega * omega))
    }

    /// `ħ²b/32πmU²`, the time unit inside the log law.
    pub fn log_time_unit(&self) -> Result<f64> {
        self.require_barrier()?;
        Ok(self.hbar * self.hbar * self.friction
            / (32.0 * PI * self.mass * self.barrier_amplitude * self.barrier_amplitude))
    }

    fn require_barrier(&self) -> Result<()> {
        if self.barrier_amplitude > 0.0 {
            Ok(())
        } else {
            Err(Error::Regime("the log law needs a barrier U > 0".into()))
        }
    }

    /// `ħ²/mb`, the free growth rate of `σ⁴`.
    fn free_rate(&self) -> f64 {
        self.hbar * self.hbar / (self.mass * self.friction)
    }
}

/// `ln[x²(I₀²(x) − I₁²(x))]` for `x > 0`.
pub fn log_closure_lhs(x: f64) -> f64 {
    let x = x.abs();
    let s0 = scaled_i0(x);
    let s1 = scaled_i1(x);
    2.0 * x.ln() + 2.0 * x + ((s0 - s1) * (s0 + s1)).ln()
}

/// `x²(I₀²(x) − I₁²(x))`; equal to `∫₀ˣ 2s I₀²(s) ds`.
pub fn closure_lhs(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        log_closure_lhs(x).exp()
    }
}

/// `d/dx ln lhs = 2x I₀²/lhs`, from scaled values.
fn log_lhs_slope(x: f64) -> f64 {
    let s0 = scaled_i0(x);
    let s1 = scaled_i1(x);
    2.0 * s0 * s0 / (x * (s0 - s1) * (s0 + s1))
}

const ROOT_TOLERANCE: f64 = 1e-14;
const ROOT_MAX_ITERATIONS: usize = 200;

/// Solves `closure_lhs(x) = rhs` for `x ≥ 0`.
pub fn solve_closure_argument(rhs: f64) -> Result<f64> {
    check_non_negative("rhs", rhs)?;
    if rhs == 0.0 {
        return Ok(0.0);
    }
    let target = rhs.ln();
    let g = |x: f64| log_closure_lhs(x) - target;

    // lhs ≥ x², so the free law overshoots; for large rhs the log law is
    // the tighter upper estimate.
    let free = rhs.sqrt();
    let log_law = 0.5 * (2.0 * PI * rhs).ln();
    let mut hi = if log_law >= 0.5 {
        free.min(log_law + 1.0)
    } else {
        free
    };
    let mut expansions = 0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::Numerical(format!(
                "could not bracket the closure root for rhs = {rhs:e}"
            )));
        }
    }
    let mut lo = 0.5 * hi;
    while g(lo) > 0.0 {
        hi = lo;
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::Numerical(format!(
                "could not bracket the closure root for rhs = {rhs:e}"
            )));
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..ROOT_MAX_ITERATIONS {
        let value = g(x);
        if value == 0.0 {
            return Ok(x);
        }
        if value > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - value / log_lhs_slope(x);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= ROOT_TOLERANCE * next {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Numerical(format!(
        "closure root did not converge for rhs = {rhs:e}"
    )))
}

/// `σ²(t)` from the implicit relation, starting from a point packet.
pub fn dispersion_at_time(t: f64, params: &ClosureParams) -> Result<f64> {
    check_non_negative("t", t)?;
    params.validate()?;
    if params.barrier_amplitude == 0.0 {
        return free_dispersion(t, params.mass, params.friction, params.hbar);
    }
    let x = solve_closure_argument(params.reduced_time(t))?;
    Ok(x * params.hbar * params.hbar / (4.0 * params.mass * params.barrier_amplitude))
}

/// `σ²(t)` from the implicit relation for a packet of initial width
/// `sigma0`: `lhs(x) = lhs(x₀) + 16mU²t/ħ²b`.
pub fn dispersion_at_time_from(t: f64, params: &ClosureParams, sigma0: f64) -> Result<f64> {
    check_non_negative("t", t)?;
    check_non_negative("sigma0", sigma0)?;
    params.validate()?;
    let s0 = sigma0 * sigma0;
    if params.barrier_amplitude == 0.0 {
        let rate = params.free_rate();
        return Ok((s0 * s0 + rate * t).sqrt());
    }
    let rhs = closure_lhs(params.argument(s0)) + params.reduced_time(t);
    let x = solve_closure_argument(rhs)?;
    Ok(x / params.argument(1.0))
}

/// The log law `(ħ²/8mU) ln(32πmU²t/ħ²b)`.
pub fn asymptotic_dispersion(t: f64, params: &ClosureParams) -> Result<f64> {
    params.validate()?;
    let scale = params.length_scale_sq()?;
    let arg = t / params.log_time_unit()?;
    if !(arg > 1.0) {
        return Err(Error::Regime(format!(
            "the log law needs 32πmU²t/ħ²b > 1, got {arg:e}"
        )));
    }
    Ok(scale * arg.ln())
}

/// `ħ√(t/mb)`.
pub fn free_dispersion(t: f64, mass: f64, friction: f64, hbar: f64) -> Result<f64> {
    check_non_negative("t", t)?;
    check_positive("mass", mass)?;
    check_positive("friction", friction)?;
    check_positive("hbar", hbar)?;
    Ok(hbar * (t / (mass * friction)).sqrt())
}

pub const ODE_RELATIVE_TOLERANCE: f64 = 1e-10;
const ODE_MAX_STEPS: usize = 1_000_000;

/// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `dy/ds = 1/I₀²(κ√y)`, the closure ODE for `y = σ⁴` in units
/// where the free rate is one. The right-hand side is bounded at `y = 0`,
/// so a point packet needs no special first step.
fn integrate_reduced(kappa: f64, y0: f64, times: &[f64]) -> Result<Vec<f64>> {
    let rhs = |y: f64| {
        let x = kappa * y.max(0.0).sqrt();
        (-2.0 * ln_i0(x)).exp()
    };
    let mut out = Vec::with_capacity(times.len());
    let (mut s, mut y) = (0.0, y0);
    let mut h = times
        .iter()
        .copied()
        .find(|&t| t > 0.0)
        .map_or(1e-3, |t| 1e-3 * t);
    let mut steps = 0;
    for &target in times {
        while s < target {
            steps += 1;
            if steps > ODE_MAX_STEPS {
                return Err(Error::Numerical(
                    "closure ODE exceeded its step budget".into(),
                ));
            }
            let step = h.min(target - s);
            let mut k = [0.0; 7];
            for i in 0..7 {
                let yi = y + step * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
                k[i] = rhs(yi);
            }
            let y5 = y + step * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
            let y4 = y + step * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
            let scale = ODE_RELATIVE_TOLERANCE * y5.abs().max(y.abs()) + 1e-300;
            let err = (y5 - y4).abs() / scale;
            if err <= 1.0 {
                s = if step == target - s { target } else { s + step };
                y = y5;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = step * factor;
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::Numerical("closure ODE step size collapsed".into()));
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// `σ²` at each of the non-decreasing `times`, by integrating the closure
/// ODE from `σ(0) = sigma0`.
pub fn closure_ode_at_times(
    params: &ClosureParams,
    times: &[f64],
    sigma0: f64,
) -> Result<Vec<f64>> {
    params.validate()?;
    check_non_negative("sigma0", sigma0)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::invalid("times", "must be non-negative and sorted"));
    }
    let rate = params.free_rate();
    let u0 = sigma0.powi(4);
    // σ⁴ in units of `u_s`, time in units of `u_s/rate`.
    let (u_s, kappa) = if params.barrier_amplitude > 0.0 {
        let k = 4.0 * params.mass * params.barrier_amplitude / (params.hbar * params.hbar);
        (1.0 / (k * k), 1.0)
    } else {
        let t_end = times.last().copied().unwrap_or(0.0);
        let u = (u0 + rate * t_end).max(f64::MIN_POSITIVE);
        (u, 0.0)
    };
    let t_s = u_s / rate;
    let reduced: Vec<f64> = times.iter().map(|t| t / t_s).collect();
    let y = integrate_reduced(kappa, u0 / u_s, &reduced)?;
    Ok(y.into_iter().map(|v| (v * u_s).sqrt()).collect())
}

/// Rows per decade of the closure time series.
pub const CLOSURE_ROWS_PER_DECADE: usize = 10;
/// Decades below `t_max` covered by the closure time series.
pub const CLOSURE_DECADES: usize = 6;

/// Log-spaced output times ending at `t_max`.
pub fn log_spaced_times(t_max: f64, decades: usize, per_decade: usize) -> Vec<f64> {
    let n = decades * per_decade;
    (0..=n)
        .map(|i| t_max * 10f64.powf((i as f64 - n as f64) / per_decade as f64))
        .collect()
}

/// Integrates the closure ODE up to `t_max` and samples it on a log grid
/// (plus `t = 0`). Rows carry `σ²` and the quantum temperature `ħ²/4mσ²`;
/// the packet stays centred with unit mass.
pub fn integrate_closure_ode(
    params: &ClosureParams,
    t_max: f64,
    sigma0: f64,
) -> Result<TimeSeries> {
    check_positive("t_max", t_max)?;
    let mut times = vec![0.0];
    times.extend(log_spaced_times(
        t_max,
        CLOSURE_DECADES,
        CLOSURE_ROWS_PER_DECADE,
    ));
    let sigma2 = closure_ode_at_times(params, &times, sigma0)?;
    let rows = times
        .iter()
        .zip(&sigma2)
        .map(|(&t, &s2)| TimeRow {
            t,
            mass: 1.0,
            mean: 0.0,
            sigma2: s2,
            min_rho: 0.0,
            beta_q_inv: (s2 > 0.0).then(|| params.hbar * params.hbar / (4.0 * params.mass * s2)),
        })
        .collect();
    Ok(TimeSeries {
        rows,
        usable_until: t_max,
        contaminated_at: None,
        aborted: None,
        diagnostics: RunDiagnostics::default(),
    })
}
