//! Modified Bessel functions of the first kind, orders 0 and 1.
//!
//! Both functions are evaluated by their power series up to
//! [`SERIES_LIMIT`] and by the Hankel asymptotic expansion of the
//! exponentially scaled value beyond it. All terms of the power series are
//! positive, so the sum carries no cancellation; past the limit the
//! asymptotic series is summed until its terms fall below one ulp, which at
//! `x > 30` happens long before the series starts to diverge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest argument evaluated by the power series.
pub const SERIES_LIMIT: f64 = 30.0;

/// Value of `I_n(x)` in three representations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselEval {
    /// `I_n(x)`; `+inf` once `e^x` overflows.
    pub value: f64,
    /// `e^{-x} I_n(x)`.
    pub scaled: f64,
    /// `ln I_n(x)`.
    pub log_value: f64,
}

fn check_argument(x: f64) -> Result<f64> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::invalid(
            "x",
            format!("must be finite and >= 0, got {x}"),
        ))
    }
}

/// Power series `Σ (x/2)^{2k+n} / (k! (k+n)!)` for `n ∈ {0, 1}`.
fn series(order: u32, x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= y / (k * (k + order as f64));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Hankel expansion of `e^{-x} I_n(x)`.
fn asymptotic_scaled(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

fn eval(order: u32, x: f64) -> BesselEval {
    if x <= SERIES_LIMIT {
        let value = series(order, x);
        BesselEval {
            value,
            scaled: value * (-x).exp(),
            log_value: value.ln(),
        }
    } else {
        let scaled = asymptotic_scaled(order, x);
        BesselEval {
            value: scaled * x.exp(),
            scaled,
            log_value: scaled.ln() + x,
        }
    }
}

pub fn bessel_i0(x: f64) -> Result<BesselEval> {
    Ok(eval(0, check_argument(x)?))
}

pub fn bessel_i1(x: f64) -> Result<BesselEval> {
    Ok(eval(1, check_argument(x)?))
}

/// `ln I_0(x)` without overflow for any finite `x ≥ 0`.
pub fn log_i0(x: f64) -> Result<f64> {
    Ok(eval(0, check_argument(x)?).log_value)
}

/// `e^{-x} I_0(x)` for a caller that has already validated `x`.
pub(crate) fn scaled_i0(x: f64) -> f64 {
    eval(0, x).scaled
}

pub(crate) fn scaled_i1(x: f64) -> f64 {
    eval(1, x).scaled
}

pub(crate) fn ln_i0(x: f64) -> f64 {
    eval(0, x).log_value
}
