//! Numeric claims reproduced by `check-paper`.

use serde::Serialize;

use crate::error::Result;
use crate::gaussian_closure::{
    closure_ode_at_times, dispersion_at_time, free_dispersion, ClosureParams,
};
use crate::lifson_jackson::{dcoef_arrhenius, dcoef_closed_form, dcoef_quadrature};
use crate::model::{
    derive_groups, temperature_for_theta, thermal_wavelength, wavenumber_for_lattice,
    DimensionlessGroups, ModelParams, ANGSTROM, ELECTRON_MASS, EV, HBAR, PROTON_MASS,
    ROOM_TEMPERATURE,
};
use crate::potentials::CosinePotential;

#[derive(Debug, Clone, Serialize)]
pub struct ClaimRow {
    pub name: &'static str,
    pub computed: f64,
    pub reference: f64,
    /// Human-readable acceptance band.
    pub tolerance: String,
    pub pass: bool,
}

fn relative(name: &'static str, computed: f64, reference: f64, tol: f64) -> ClaimRow {
    ClaimRow {
        name,
        computed,
        reference,
        tolerance: format!("±{tol:e} relative"),
        pass: ((computed - reference) / reference).abs() <= tol,
    }
}

fn absolute(name: &'static str, computed: f64, reference: f64, tol: f64) -> ClaimRow {
    ClaimRow {
        name,
        computed,
        reference,
        tolerance: format!("±{tol}"),
        pass: (computed - reference).abs() <= tol,
    }
}

fn within(name: &'static str, computed: f64, reference: f64, lo: f64, hi: f64) -> ClaimRow {
    ClaimRow {
        name,
        computed,
        reference,
        tolerance: format!("[{lo}, {hi}]"),
        pass: computed >= lo && computed <= hi,
    }
}

/// Lattice constant used by the proton and electron claims.
pub const CLAIM_LATTICE: f64 = 3.0 * ANGSTROM;
/// Friction used where a claim needs one; the claims do not depend on it.
pub const CLAIM_FRICTION: f64 = 1e-12;

pub fn paper_claims() -> Result<Vec<ClaimRow>> {
    let q = wavenumber_for_lattice(CLAIM_LATTICE);
    let proton = ModelParams {
        mass: PROTON_MASS,
        friction: CLAIM_FRICTION,
        temperature: ROOM_TEMPERATURE,
        barrier_amplitude: 0.1 * EV,
        wavenumber: q,
    };
    let electron = ModelParams {
        mass: ELECTRON_MASS,
        ..proton
    };
    let gp = derive_groups(&proton)?;
    let ge = derive_groups(&electron)?;
    let mut rows = vec![
        relative(
            "proton thermal wavelength at 298 K [Å]",
            thermal_wavelength(PROTON_MASS, ROOM_TEMPERATURE) / ANGSTROM,
            0.2,
            0.05,
        ),
        within(
            "proton θ at 3 Å",
            gp.theta.unwrap_or(f64::NAN),
            0.1,
            0.08,
            0.11,
        ),
        within(
            "temperature where θ = 1 for a proton at 3 Å [K]",
            temperature_for_theta(1.0, PROTON_MASS, q)?,
            25.0,
            24.0,
            27.0,
        ),
        relative(
            "electron thermal wavelength at 298 K [Å]",
            thermal_wavelength(ELECTRON_MASS, ROOM_TEMPERATURE) / ANGSTROM,
            8.6,
            0.02,
        ),
        absolute(
            "electron θ at 3 Å",
            ge.theta.unwrap_or(f64::NAN),
            162.0,
            2.0,
        ),
    ];

    let reduced = DimensionlessGroups::reduced(10.0, 0.1)?;
    let a = dcoef_arrhenius(&reduced, 1.0)?;
    rows.push(relative(
        "barrier reduction at θ = 0.1 (E_a / 2U)",
        a.activation_energy / (2.0 * 10.0),
        0.9,
        1e-14,
    ));

    let a = dcoef_arrhenius(&gp, proton.friction)?;
    let lambda_t = gp.lambda_t.unwrap_or(f64::NAN);
    let expected = (2.0 - lambda_t * lambda_t * q * q) * proton.barrier_amplitude;
    rows.push(relative(
        "E_a = (2 − λ_T²q²)U for the proton [eV]",
        a.activation_energy / EV,
        expected / EV,
        1e-14,
    ));

    let flat = ModelParams {
        barrier_amplitude: 0.0,
        ..proton
    };
    let gf = derive_groups(&flat)?;
    let beta = gf.beta.unwrap_or(f64::NAN);
    let einstein = 1.0 / (beta * flat.friction);
    let quad = dcoef_quadrature(&CosinePotential::new(0.0, q)?, beta, flat.friction)?;
    rows.push(relative(
        "D(U = 0) by quadrature · βb",
        quad.value / einstein,
        1.0,
        1e-14,
    ));
    let closed = dcoef_closed_form(&gf, flat.friction)?;
    rows.push(relative(
        "D(U = 0) closed form · βb",
        closed.value / einstein,
        1.0,
        1e-14,
    ));

    let free = ClosureParams::new(PROTON_MASS, CLAIM_FRICTION, 0.0)?;
    let t = 1e-9;
    let law = free_dispersion(t, PROTON_MASS, CLAIM_FRICTION, HBAR)?;
    rows.push(relative(
        "free quantum law σ² = ħ√(t/mb), implicit",
        dispersion_at_time(t, &free)?,
        law,
        1e-14,
    ));
    let ode = closure_ode_at_times(&free, &[t], 0.0)?[0];
    rows.push(relative(
        "free quantum law σ² = ħ√(t/mb), ODE",
        ode,
        law,
        1e-10,
    ));
    Ok(rows)
}
