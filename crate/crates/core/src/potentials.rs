//! External potentials, the quasi-equilibrium quantum potential, the
//! tunnelling-corrected effective potential and the discrete Bohm operator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_non_negative, check_positive, Error, Result};
use crate::model::{DimensionlessGroups, HBAR};
use crate::pde_solver::{Boundary, DensityField, Grid};

/// A one-dimensional potential energy landscape.
pub trait Potential {
    /// Potential energy at `x`.
    fn value(&self, x: f64) -> f64;
    /// Force `-∂V/∂x` at `x`.
    fn force(&self, x: f64) -> f64;
}

pub trait PeriodicPotential: Potential {
    fn period(&self) -> f64;
}

/// `V(x) = U cos(qx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosinePotential {
    pub amplitude: f64,
    pub wavenumber: f64,
}

impl CosinePotential {
    pub fn new(amplitude: f64, wavenumber: f64) -> Result<Self> {
        check_non_negative("amplitude", amplitude)?;
        check_positive("wavenumber", wavenumber)?;
        Ok(Self {
            amplitude,
            wavenumber,
        })
    }

    /// Second derivative `∂²V/∂x²`.
    pub fn curvature(&self, x: f64) -> f64 {
        -self.amplitude * self.wavenumber * self.wavenumber * (self.wavenumber * x).cos()
    }
}

impl Potential for CosinePotential {
    fn value(&self, x: f64) -> f64 {
        self.amplitude * (self.wavenumber * x).cos()
    }

    fn force(&self, x: f64) -> f64 {
        self.amplitude * self.wavenumber * (self.wavenumber * x).sin()
    }
}

impl PeriodicPotential for CosinePotential {
    fn period(&self) -> f64 {
        2.0 * PI / self.wavenumber
    }
}

/// `V(x) = m ω₀² x² / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPotential {
    pub mass: f64,
    pub omega0: f64,
}

impl HarmonicPotential {
    pub fn new(mass: f64, omega0: f64) -> Result<Self> {
        check_positive("mass", mass)?;
        check_positive("omega0", omega0)?;
        Ok(Self { mass, omega0 })
    }

    pub fn stiffness(&self) -> f64 {
        self.mass * self.omega0 * self.omega0
    }

    /// The effective potential `[1 − (βħω₀/2)²/3] V`, itself harmonic.
    pub fn effective(&self, beta: f64) -> Result<Self> {
        let factor = harmonic_correction_factor(self, beta)?;
        Ok(Self {
            mass: self.mass,
            omega0: self.omega0 * factor.sqrt(),
        })
    }
}

impl Potential for HarmonicPotential {
    fn value(&self, x: f64) -> f64 {
        0.5 * self.stiffness() * x * x
    }

    fn force(&self, x: f64) -> f64 {
        -self.stiffness() * x
    }
}

/// Tunnelling-corrected effective potential
/// `W = (1 − θ) V + (θβ/3) V²`, the quadratic term being optional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectivePotentialSpec {
    pub base: CosinePotential,
    pub theta: f64,
    pub beta: f64,
    pub include_nonlinear: bool,
}

impl EffectivePotentialSpec {
    pub fn new(
        base: CosinePotential,
        theta: f64,
        beta: f64,
        include_nonlinear: bool,
    ) -> Result<Self> {
        check_non_negative("theta", theta)?;
        check_positive("beta", beta)?;
        Ok(Self {
            base,
            theta,
            beta,
            include_nonlinear,
        })
    }

    /// Effective potential in thermal units (`β = 1`, `U = βU`).
    pub fn reduced(beta_u: f64, theta: f64, include_nonlinear: bool) -> Result<Self> {
        Self::new(
            CosinePotential::new(beta_u, 1.0)?,
            theta,
            1.0,
            include_nonlinear,
        )
    }

    fn nonlinear_coefficient(&self) -> f64 {
        if self.include_nonlinear {
            self.theta * self.beta / 3.0
        } else {
            0.0
        }
    }
}

impl Potential for EffectivePotentialSpec {
    fn value(&self, x: f64) -> f64 {
        let v = self.base.value(x);
        (1.0 - self.theta) * v + self.nonlinear_coefficient() * v * v
    }

    fn force(&self, x: f64) -> f64 {
        let v = self.base.value(x);
        let f = self.base.force(x);
        (1.0 - self.theta) * f + 2.0 * self.nonlinear_coefficient() * v * f
    }
}

impl PeriodicPotential for EffectivePotentialSpec {
    fn period(&self) -> f64 {
        self.base.period()
    }
}

pub fn evaluate_potential<P: Potential + ?Sized>(potential: &P, x: f64) -> f64 {
    potential.value(x)
}

pub fn evaluate_force<P: Potential + ?Sized>(potential: &P, x: f64) -> f64 {
    potential.force(x)
}

/// Quasi-equilibrium quantum potential evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiEquilibriumQ {
    /// `(βħ²/4m) [∂²V − β (∂V)² / 2]`.
    pub general: f64,
    /// `−λ_T² q² [V + β (U² − V²) / 2]`.
    pub closed_form: f64,
}

/// Bohm potential of the Boltzmann density `exp(−βV)` for the cosine
/// potential. Both forms are returned; they agree identically.
pub fn quasi_equilibrium_q(
    potential: &CosinePotential,
    groups: &DimensionlessGroups,
    x: f64,
) -> Result<QuasiEquilibriumQ> {
    check_finite("x", x)?;
    let beta = groups.require_beta()?;
    let lambda_t = groups
        .lambda_t
        .ok_or_else(|| Error::Regime("λ_T undefined at zero temperature".into()))?;
    let lt2 = lambda_t * lambda_t;
    let v = potential.value(x);
    let dv = -potential.force(x);
    let u = potential.amplitude;
    let q = potential.wavenumber;
    // βħ²/4m = λ_T²
    let general = lt2 * (potential.curvature(x) - 0.5 * beta * dv * dv);
    let closed_form = -lt2 * q * q * (v + 0.5 * beta * (u * u - v * v));
    Ok(QuasiEquilibriumQ {
        general,
        closed_form,
    })
}

pub fn effective_potential(spec: &EffectivePotentialSpec, x: f64) -> f64 {
    spec.value(x)
}

fn harmonic_correction_factor(potential: &HarmonicPotential, beta: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    let a = beta * HBAR * potential.omega0;
    if a >= 3f64.sqrt() {
        return Err(Error::Regime(format!(
            "βħω₀ = {a} >= √3: semiclassical harmonic dispersion not applicable"
        )));
    }
    Ok(1.0 - (0.5 * a) * (0.5 * a) / 3.0)
}

/// Equilibrium position dispersion in a harmonic well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicDispersion {
    /// `1 / βmω₀² [1 − (βħω₀/2)²/3]`.
    pub semiclassical: f64,
    /// `(ħ/2mω₀) coth(βħω₀/2)`.
    pub exact: f64,
    /// `1 / βmω₀²`.
    pub classical: f64,
}

pub fn harmonic_effective_dispersion(
    potential: &HarmonicPotential,
    beta: f64,
) -> Result<HarmonicDispersion> {
    let factor = harmonic_correction_factor(potential, beta)?;
    let classical = 1.0 / (beta * potential.stiffness());
    let half = 0.5 * beta * HBAR * potential.omega0;
    let exact = HBAR / (2.0 * potential.mass * potential.omega0) / half.tanh();
    Ok(HarmonicDispersion {
        semiclassical: classical / factor,
        exact,
        classical,
    })
}

/// Relative density floor used by the Bohm operator.
pub const DENSITY_FLOOR: f64 = 1e-14;

/// Discrete Bohm potential and the number of cells that hit the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct BohmField {
    pub values: Vec<f64>,
    pub floored_cells: usize,
}

/// `Q = −(ħ²/2m) ∂²√ρ / √ρ` on the density's grid.
pub fn bohm_quantum_potential(rho: &DensityField, mass: f64) -> Result<BohmField> {
    check_positive("mass", mass)?;
    Ok(bohm_operator(rho, HBAR * HBAR / (2.0 * mass)))
}

/// `Q_i = −c D²(√ρ)_i / √ρ_i` with the 3-point second difference. Cells
/// below `DENSITY_FLOOR · max ρ` are raised to the floor first. No-flux
/// walls mirror the boundary cell.
pub(crate) fn bohm_operator(rho: &DensityField, coefficient: f64) -> BohmField {
    let grid = rho.grid();
    let floor = DENSITY_FLOOR * rho.max();
    let mut floored_cells = 0;
    let amp: Vec<f64> = rho
        .values()
        .iter()
        .map(|&r| {
            if r < floor {
                floored_cells += 1;
                floor.sqrt()
            } else {
                r.sqrt()
            }
        })
        .collect();
    let values = second_difference_ratio(&amp, grid)
        .into_iter()
        .map(|d| -coefficient * d)
        .collect();
    BohmField {
        values,
        floored_cells,
    }
}

/// `D²(a)_i / a_i` with the grid's boundary rule.
fn second_difference_ratio(a: &[f64], grid: &Grid) -> Vec<f64> {
    let n = a.len();
    let inv_h2 = 1.0 / (grid.cell_width() * grid.cell_width());
    (0..n)
        .map(|i| {
            let (left, right) = match grid.boundary() {
                Boundary::Periodic => (a[(i + n - 1) % n], a[(i + 1) % n]),
                Boundary::NoFlux => (
                    if i == 0 { a[0] } else { a[i - 1] },
                    if i == n - 1 { a[n - 1] } else { a[i + 1] },
                ),
            };
            // (l − 2a + r)/a computed as (l − a) + (r − a) so that a
            // constant field gives exactly zero.
            ((left - a[i]) + (right - a[i])) / a[i] * inv_h2
        })
        .collect()
}

/// Boltzmann density `exp(−βW)` on `grid`, normalised to unit mass.
pub fn equilibrium_density<P: Potential + ?Sized>(
    potential: &P,
    beta: f64,
    grid: &Grid,
) -> Result<DensityField> {
    let values: Vec<f64> = grid.centers().map(|x| potential.value(x)).collect();
    equilibrium_density_from_values(&values, beta, grid)
}

pub fn equilibrium_density_from_values(
    potential: &[f64],
    beta: f64,
    grid: &Grid,
) -> Result<DensityField> {
    check_positive("beta", beta)?;
    if potential.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("potential", "must be finite on the grid"));
    }
    let shift = potential
        .iter()
        .map(|w| -beta * w)
        .fold(f64::NEG_INFINITY, f64::max);
    let values = potential
        .iter()
        .map(|w| (-beta * w - shift).exp())
        .collect();
    let mut field = DensityField::new(*grid, values)?;
    field.normalize()?;
    Ok(field)
}
