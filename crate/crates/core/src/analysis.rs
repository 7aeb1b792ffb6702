//! Least-squares estimators on simulated time series and a comparison
//! report across diffusion estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifson_jackson::{Diagnostics, DiffusionEstimate, Method};
use crate::pde_solver::{TimeRow, TimeSeries};

pub const MIN_FIT_POINTS: usize = 8;
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;
/// Window fractions reported alongside every fit.
pub const WINDOW_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.75];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(t_start, t_end)` of the samples used.
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Ordinary least squares of `y` on `x`.
fn least_squares(points: &[(f64, f64, f64)]) -> Result<FitResult> {
    let n = points.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::Numerical(format!(
            "fit window holds {n} points, need at least {MIN_FIT_POINTS}"
        )));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.2).sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(_, x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::Numerical("fit window has no spread in time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|&(_, x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        window: (points[0].0, points[n - 1].0),
        n_points: n,
    })
}

fn check_fraction(window_fraction: f64) -> Result<()> {
    if window_fraction > 0.0 && window_fraction <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "window_fraction",
            format!("must lie in (0, 1], got {window_fraction}"),
        ))
    }
}

fn usable(series: &TimeSeries) -> Vec<&TimeRow> {
    series.usable_rows().collect()
}

/// `σ²` against `t` over `[t_start, t_end]`, clipped to the usable range.
pub fn fit_msd_window(series: &TimeSeries, t_start: f64, t_end: f64) -> Result<FitResult> {
    let points: Vec<_> = usable(series)
        .into_iter()
        .filter(|r| r.t >= t_start && r.t <= t_end)
        .map(|r| (r.t, r.t, r.sigma2))
        .collect();
    least_squares(&points)
}

/// Fits `σ² = 2Dt + c` on the last `window_fraction` of the usable time
/// range and returns `D = slope/2`.
pub fn fit_msd_slope(
    series: &TimeSeries,
    window_fraction: f64,
) -> Result<(FitResult, DiffusionEstimate)> {
    check_fraction(window_fraction)?;
    let rows = usable(series);
    let t_end = rows.last().map_or(0.0, |r| r.t);
    let t_start = t_end * (1.0 - window_fraction);
    let fit = fit_msd_window(series, t_start, t_end)?;
    let d = 0.5 * fit.slope;
    if !(d > 0.0) {
        return Err(Error::Numerical(format!(
            "mean squared displacement does not grow (slope {})",
            fit.slope
        )));
    }
    let estimate = DiffusionEstimate {
        value: d,
        log_value: d.ln(),
        method: Method::MsdFit,
        params_echo: None,
        diagnostics: Diagnostics::MsdFit {
            r_squared: fit.r_squared,
            n_points: fit.n_points,
        },
    };
    Ok((fit, estimate))
}

/// `σ²` against `ln t` over `[t_start, t_end]`, clipped to the usable range.
pub fn fit_log_law_window(series: &TimeSeries, t_start: f64, t_end: f64) -> Result<FitResult> {
    if !(t_start > 0.0) {
        return Err(Error::invalid(
            "t_start",
            "log-law fits need positive times",
        ));
    }
    let points: Vec<_> = usable(series)
        .into_iter()
        .filter(|r| r.t >= t_start && r.t <= t_end)
        .map(|r| (r.t, r.t.ln(), r.sigma2))
        .collect();
    least_squares(&points)
}

/// Fits `σ² = A ln t + B` on the last `window_fraction` of the usable
/// range measured in `ln t`, starting from the first positive time.
pub fn fit_log_law(series: &TimeSeries, window_fraction: f64) -> Result<FitResult> {
    check_fraction(window_fraction)?;
    let rows = usable(series);
    let first = rows
        .iter()
        .map(|r| r.t)
        .find(|&t| t > 0.0)
        .ok_or_else(|| Error::Numerical("series has no positive times".into()))?;
    let last = rows.last().map_or(first, |r| r.t);
    let (a, b) = (first.ln(), last.ln());
    let t_start = (b - window_fraction * (b - a)).exp();
    // guard against the exp/ln round trip dropping the boundary sample
    fit_log_law_window(series, t_start * (1.0 - 1e-12), last)
}

/// Fits at each of [`WINDOW_FRACTIONS`], skipping windows that are too short.
pub fn fit_windows(
    series: &TimeSeries,
    fit: fn(&TimeSeries, f64) -> Result<FitResult>,
) -> Vec<(f64, FitResult)> {
    WINDOW_FRACTIONS
        .iter()
        .filter_map(|&f| fit(series, f).ok().map(|r| (f, r)))
        .collect()
}

/// Adapter so MSD fits can go through [`fit_windows`].
pub fn fit_msd(series: &TimeSeries, window_fraction: f64) -> Result<FitResult> {
    fit_msd_slope(series, window_fraction).map(|(f, _)| f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub value: f64,
    pub log_value: f64,
    /// `D/D_ref − 1`, computed from the log values.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub reference: Method,
    pub estimates: Vec<ReportRow>,
    pub fits: Vec<FitResult>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Tabulates estimates against the quadrature estimate, or against the
/// first estimate when none is a quadrature.
pub fn compare_report(
    estimates: &[DiffusionEstimate],
    fits: &[FitResult],
) -> Result<ComparisonReport> {
    let reference = estimates
        .iter()
        .find(|e| e.method == Method::Quadrature)
        .or_else(|| estimates.first())
        .ok_or_else(|| Error::invalid("estimates", "need at least one estimate"))?;
    let rows = estimates
        .iter()
        .map(|e| ReportRow {
            method: e.method,
            value: e.value,
            log_value: e.log_value,
            deviation: (e.log_value - reference.log_value).exp_m1(),
        })
        .collect();
    Ok(ComparisonReport {
        reference: reference.method,
        estimates: rows,
        fits: fits.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_solver::RunDiagnostics;

    fn series(points: impl Iterator<Item = (f64, f64)>) -> TimeSeries {
        let rows: Vec<TimeRow> = points
            .map(|(t, sigma2)| TimeRow {
                t,
                mass: 1.0,
                mean: 0.0,
                sigma2,
                min_rho: 0.0,
                beta_q_inv: None,
            })
            .collect();
        let usable_until = rows.last().unwrap().t;
        TimeSeries {
            rows,
            usable_until,
            contaminated_at: None,
            aborted: None,
            diagnostics: RunDiagnostics::default(),
        }
    }

    #[test]
    fn exact_line_is_recovered() {
        let d0 = 0.37;
        let s = series((0..=100).map(|i| (i as f64, 2.0 * d0 * i as f64)));
        let (fit, est) = fit_msd_slope(&s, 0.5).unwrap();
        assert!((est.value / d0 - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.n_points, 51);
        assert_eq!(est.method, Method::MsdFit);
    }

    #[test]
    fn ripple_barely_moves_the_slope() {
        let d0 = 1.0;
        let s = series((0..=1000).map(|i| {
            let t = i as f64 * 0.1;
            (t, 2.0 * d0 * t * (1.0 + 0.01 * (t * 3.0).sin()))
        }));
        let (_, est) = fit_msd_slope(&s, 0.5).unwrap();
        assert!((est.value / d0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn log_law_is_recovered() {
        let (a, b) = (0.125, -0.4);
        let s = series((1..=60).map(|i| {
            let t = 10f64.powf(i as f64 / 10.0);
            (t, a * t.ln() + b)
        }));
        let fit = fit_log_law(&s, 0.5).unwrap();
        assert!((fit.slope - a).abs() < 1e-12);
        assert!((fit.intercept - b).abs() < 1e-12);
        assert_eq!(fit.n_points, 30);
    }

    #[test]
    fn log_law_discriminates_square_root_growth() {
        let times: Vec<f64> = (1..=60).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        let genuine = series(times.iter().map(|&t| (t, t.ln())));
        let free = series(times.iter().map(|&t| (t, t.sqrt())));
        let g = fit_log_law(&genuine, 0.5).unwrap();
        let f = fit_log_law(&free, 0.5).unwrap();
        assert!(f.r_squared < g.r_squared - 0.05, "{}", f.r_squared);
    }

    #[test]
    fn fits_are_affine_equivariant() {
        let s = series((1..=40).map(|i| (i as f64, (i as f64).powf(1.3))));
        let scaled = series(s.rows.iter().map(|r| (r.t, 3.5 * r.sigma2)));
        let a = fit_msd(&s, 0.5).unwrap();
        let b = fit_msd(&scaled, 0.5).unwrap();
        assert!((b.slope / a.slope - 3.5).abs() < 1e-12);
    }

    #[test]
    fn contaminated_rows_are_ignored() {
        let mut s = series((0..=40).map(|i| (i as f64, 2.0 * i as f64)));
        s.usable_until = 20.0;
        s.rows[30].sigma2 = 1e9;
        let (fit, est) = fit_msd_slope(&s, 0.5).unwrap();
        assert!(fit.window.1 <= 20.0);
        assert!((est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_windows_are_rejected() {
        let s = series((0..5).map(|i| (i as f64, i as f64)));
        assert!(fit_msd_slope(&s, 1.0).is_err());
        assert!(fit_msd_slope(&s, 0.0).is_err());
        assert_eq!(fit_windows(&s, fit_msd).len(), 0);
    }

    #[test]
    fn report_deviations() {
        let make = |method, value: f64| DiffusionEstimate {
            value,
            log_value: value.ln(),
            method,
            params_echo: None,
            diagnostics: Diagnostics::ClosedForm,
        };
        let single = compare_report(&[make(Method::ClosedForm, 0.3)], &[]).unwrap();
        assert_eq!(single.estimates[0].deviation, 0.0);
        let r = compare_report(
            &[make(Method::Arrhenius, 1.1), make(Method::Quadrature, 1.0)],
            &[],
        )
        .unwrap();
        assert_eq!(r.reference, Method::Quadrature);
        assert!((r.estimates[0].deviation - 0.1).abs() < 1e-12);
        assert!(r.to_json().contains("\"arrhenius\""));
        assert!(compare_report(&[], &[]).is_err());
    }
}
