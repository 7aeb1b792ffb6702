use crate::error::{check_positive, Error, Result};

use super::grid::{Boundary, DensityField, Grid};
use super::tridiag;

/// Bernoulli function `z / (e^z − 1)`.
pub(crate) fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        let z2 = z * z;
        1.0 - 0.5 * z + z2 / 12.0 * (1.0 - z2 / 60.0)
    } else {
        z / z.exp_m1()
    }
}

/// Backward-Euler operator for `∂_t ρ = ∂_x (ρ ∂_x φ + D ∂_x ρ)` with
/// exponentially fitted (Scharfetter–Gummel) face fluxes.
///
/// The flux through the face between cells `i` and `i+1` is
/// `J = (D/h) [B(Δu) ρ_i − B(−Δu) ρ_{i+1}]` with `u = φ/D`, which vanishes
/// exactly on `ρ ∝ exp(−u)`.
#[derive(Debug, Clone)]
pub(crate) struct DriftDiffusion {
    boundary: Boundary,
    h: f64,
    /// `(D/h) B(Δu)` per face, face `i` to the right of cell `i`.
    forward: Vec<f64>,
    /// `(D/h) B(−Δu)` per face.
    backward: Vec<f64>,
}

impl DriftDiffusion {
    /// `potential` is `φ` at cell centres, in the same energy unit as `diffusion`.
    pub(crate) fn new(grid: &Grid, potential: &[f64], diffusion: f64) -> Self {
        let n = grid.cell_count();
        let h = grid.cell_width();
        let scale = diffusion / h;
        let mut forward = vec![0.0; n];
        let mut backward = vec![0.0; n];
        let faces = match grid.boundary() {
            Boundary::Periodic => n,
            Boundary::NoFlux => n - 1,
        };
        for i in 0..faces {
            let du = (potential[(i + 1) % n] - potential[i]) / diffusion;
            forward[i] = scale * bernoulli(du);
            backward[i] = scale * bernoulli(-du);
        }
        // with no-flux walls the wrap-around face stays at zero
        Self {
            boundary: grid.boundary(),
            h,
            forward,
            backward,
        }
    }

    /// One implicit step of length `dt`.
    pub(crate) fn step(&self, rho: &[f64], dt: f64) -> Result<Vec<f64>> {
        let n = rho.len();
        let r = dt / self.h;
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut diag = vec![1.0; n];
        for i in 0..n {
            let left = (i + n - 1) % n;
            diag[i] += r * (self.forward[i] + self.backward[left]);
            upper[i] = -r * self.backward[i];
            lower[i] = -r * self.forward[left];
        }
        let cyclic = self.boundary == Boundary::Periodic;
        let next = tridiag::solve(&lower, &diag, &upper, rho, cyclic)?;
        if let Some(i) = next.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Numerical(format!(
                "implicit step produced invalid density {} in cell {i}",
                next[i]
            )));
        }
        Ok(next)
    }
}

/// One backward-Euler step of `∂_t ρ = ∂_x(β ρ ∂_x W + ∂_x ρ)/βb`.
pub fn step_drift_diffusion(
    rho: &DensityField,
    potential_on_grid: &[f64],
    inv_temperature: f64,
    friction: f64,
    dt: f64,
) -> Result<DensityField> {
    check_positive("inv_temperature", inv_temperature)?;
    check_positive("friction", friction)?;
    check_positive("dt", dt)?;
    let grid = rho.grid();
    if potential_on_grid.len() != grid.cell_count() {
        return Err(Error::invalid(
            "potential_on_grid",
            format!(
                "expected {} values, got {}",
                grid.cell_count(),
                potential_on_grid.len()
            ),
        ));
    }
    // Mobility form: ∂_t ρ = ∂_x(ρ ∂_x W + k_B T ∂_x ρ)/b.
    let mobility = 1.0 / friction;
    let phi: Vec<f64> = potential_on_grid.iter().map(|w| w * mobility).collect();
    let op = DriftDiffusion::new(grid, &phi, mobility / inv_temperature);
    let next = op.step(rho.values(), dt)?;
    DensityField::new(*grid, next)
}
