//! Physical parameters, fundamental constants and the dimensionless groups
//! derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_non_negative, check_positive, Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;
/// Proton mass, kg (CODATA 2018).
pub const PROTON_MASS: f64 = 1.672_621_923_69e-27;
/// Electron mass, kg (CODATA 2018).
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Joules per electronvolt (exact).
pub const EV: f64 = 1.602_176_634e-19;
/// Metres per ångström.
pub const ANGSTROM: f64 = 1e-10;
/// Temperature used for "room temperature" claims.
pub const ROOM_TEMPERATURE: f64 = 298.15;

/// Wavenumber of a lattice with the given period.
pub fn wavenumber_for_lattice(lattice_constant: f64) -> f64 {
    2.0 * std::f64::consts::PI / lattice_constant
}

/// Physical inputs of the model, all in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Particle mass, kg.
    pub mass: f64,
    /// Friction coefficient `b`, kg/s.
    pub friction: f64,
    /// Temperature, K. Zero selects the zero-temperature regime.
    pub temperature: f64,
    /// Amplitude `U` of `V(x) = U cos(qx)`, J.
    pub barrier_amplitude: f64,
    /// Wavenumber `q`, 1/m.
    pub wavenumber: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("mass", self.mass)?;
        check_positive("friction", self.friction)?;
        check_non_negative("temperature", self.temperature)?;
        check_non_negative("barrier_amplitude", self.barrier_amplitude)?;
        check_positive("wavenumber", self.wavenumber)?;
        Ok(())
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.temperature == 0.0
    }
}

/// Dimensionless (and a few dimensional) groups that parametrize every
/// formula. Fields that are undefined for the given inputs are `None`:
/// the thermal groups at `T = 0`, the barrier groups at `U = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DimensionlessGroups {
    /// Inverse thermal energy `1/k_B T`, 1/J.
    pub beta: Option<f64>,
    /// Thermal de Broglie wavelength `ħ / 2√(m k_B T)`, m.
    pub lambda_t: Option<f64>,
    /// Tunnelling parameter `λ_T² q² / 2`.
    pub theta: Option<f64>,
    /// Barrier height over thermal energy `βU`.
    pub beta_u: Option<f64>,
    /// Zero-temperature parameter `ħ² q² / 8 m U`.
    pub lambda_param: Option<f64>,
    /// Barrier frequency `4U/ħ`, 1/s.
    pub omega_u: Option<f64>,
}

impl DimensionlessGroups {
    /// Groups for a problem given directly in reduced form, with `β = 1`.
    pub fn reduced(beta_u: f64, theta: f64) -> Result<Self> {
        check_non_negative("beta_u", beta_u)?;
        check_non_negative("theta", theta)?;
        Ok(Self {
            beta: Some(1.0),
            theta: Some(theta),
            beta_u: Some(beta_u),
            lambda_param: (beta_u > 0.0).then(|| theta / beta_u),
            ..Self::default()
        })
    }

    pub(crate) fn require_theta(&self) -> Result<f64> {
        self.theta
            .ok_or_else(|| Error::Regime("θ undefined at zero temperature".into()))
    }

    pub(crate) fn require_beta(&self) -> Result<f64> {
        self.beta
            .ok_or_else(|| Error::Regime("β undefined at zero temperature".into()))
    }

    pub(crate) fn require_beta_u(&self) -> Result<f64> {
        self.beta_u
            .ok_or_else(|| Error::Regime("βU undefined at zero temperature".into()))
    }
}

/// Thermal de Broglie wavelength `ħ / 2√(m k_B T)`.
pub fn thermal_wavelength(mass: f64, temperature: f64) -> f64 {
    HBAR / (2.0 * (mass * K_B * temperature).sqrt())
}

pub fn derive_groups(params: &ModelParams) -> Result<DimensionlessGroups> {
    params.validate()?;
    let ModelParams {
        mass,
        temperature,
        barrier_amplitude: u,
        wavenumber: q,
        ..
    } = *params;

    let mut groups = DimensionlessGroups::default();
    if temperature > 0.0 {
        let beta = 1.0 / (K_B * temperature);
        let lambda_t = thermal_wavelength(mass, temperature);
        let lq = lambda_t * q;
        groups.beta = Some(beta);
        groups.lambda_t = Some(lambda_t);
        groups.theta = Some(lq * lq / 2.0);
        groups.beta_u = Some(beta * u);
    }
    if u > 0.0 {
        groups.lambda_param = Some(HBAR * HBAR * q * q / (8.0 * mass * u));
        groups.omega_u = Some(4.0 * u / HBAR);
    }

    for value in [
        groups.beta,
        groups.lambda_t,
        groups.theta,
        groups.beta_u,
        groups.lambda_param,
        groups.omega_u,
    ]
    .into_iter()
    .flatten()
    {
        check_finite("derived group", value)?;
    }
    Ok(groups)
}

/// Temperature at which `λ_T² q² / 2` equals `target_theta`.
pub fn temperature_for_theta(target_theta: f64, mass: f64, wavenumber: f64) -> Result<f64> {
    check_positive("target_theta", target_theta)?;
    check_positive("mass", mass)?;
    check_positive("wavenumber", wavenumber)?;
    Ok(HBAR * HBAR * wavenumber * wavenumber / (8.0 * target_theta * mass * K_B))
}

/// How far a parameter set is from the quasi-equilibrium semiclassical regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Applicability {
    Semiclassical,
    Marginal,
    Quantum,
}

pub const SEMICLASSICAL_THETA_LIMIT: f64 = 0.5;
pub const QUANTUM_THETA_LIMIT: f64 = 1.0;

pub fn semiclassical_applicability(groups: &DimensionlessGroups) -> Applicability {
    match groups.theta {
        None => Applicability::Quantum,
        Some(t) if t < SEMICLASSICAL_THETA_LIMIT => Applicability::Semiclassical,
        Some(t) if t < QUANTUM_THETA_LIMIT => Applicability::Marginal,
        Some(_) => Applicability::Quantum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice_q() -> f64 {
        wavenumber_for_lattice(3.0 * ANGSTROM)
    }

    fn params(mass: f64, temperature: f64) -> ModelParams {
        ModelParams {
            mass,
            friction: 1e-12,
            temperature,
            barrier_amplitude: 0.1 * EV,
            wavenumber: lattice_q(),
        }
    }

    #[test]
    fn proton_room_temperature() {
        let g = derive_groups(&params(PROTON_MASS, ROOM_TEMPERATURE)).unwrap();
        let lt = g.lambda_t.unwrap() / ANGSTROM;
        assert!((lt - 0.201).abs() < 0.001, "λ_T = {lt} Å");
        let theta = g.theta.unwrap();
        assert!((theta - 0.089).abs() < 0.001, "θ = {theta}");
        assert_eq!(
            semiclassical_applicability(&g),
            Applicability::Semiclassical
        );
    }

    #[test]
    fn electron_room_temperature() {
        let g = derive_groups(&params(ELECTRON_MASS, ROOM_TEMPERATURE)).unwrap();
        let lt = g.lambda_t.unwrap() / ANGSTROM;
        assert!((lt - 8.6).abs() < 0.05, "λ_T = {lt} Å");
        assert!((g.theta.unwrap() - 162.0).abs() < 2.0);
        assert_eq!(semiclassical_applicability(&g), Applicability::Quantum);
    }

    #[test]
    fn theta_is_exactly_half_lambda_q_squared() {
        let g = derive_groups(&params(PROTON_MASS, 123.0)).unwrap();
        let lq = g.lambda_t.unwrap() * lattice_q();
        assert_eq!(g.theta.unwrap(), lq * lq / 2.0);
    }

    #[test]
    fn wavelength_ratio_is_square_root_of_mass_ratio() {
        let p = thermal_wavelength(PROTON_MASS, 300.0);
        let e = thermal_wavelength(ELECTRON_MASS, 300.0);
        let expected = (PROTON_MASS / ELECTRON_MASS).sqrt();
        assert!(((e / p) / expected - 1.0).abs() < 1e-10);
        assert!((expected - 42.85).abs() < 0.01);
    }

    #[test]
    fn angstrom_units_agree_with_si() {
        // λ_T computed with ħ expressed per Å: ħ_Å = ħ / 1e-10.
        let si = thermal_wavelength(PROTON_MASS, 298.15) / ANGSTROM;
        let hbar_a = HBAR / ANGSTROM;
        let direct = hbar_a / (2.0 * (PROTON_MASS * K_B * 298.15).sqrt());
        assert!((si / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn temperature_for_theta_round_trips() {
        let q = lattice_q();
        let t1 = temperature_for_theta(1.0, PROTON_MASS, q).unwrap();
        assert!((24.0..27.0).contains(&t1), "T = {t1}");
        assert!((t1 - 26.4).abs() < 0.1);

        for theta in [1e-3, 0.089, 1.0, 162.0] {
            let t = temperature_for_theta(theta, PROTON_MASS, q).unwrap();
            let g = derive_groups(&ModelParams {
                temperature: t,
                ..params(PROTON_MASS, 1.0)
            })
            .unwrap();
            assert!((g.theta.unwrap() / theta - 1.0).abs() < 1e-12);
        }

        let t = temperature_for_theta(0.089, PROTON_MASS, q).unwrap();
        assert!((t - 298.0).abs() < 3.0);

        let heavy = temperature_for_theta(0.5, 2.0 * PROTON_MASS, q).unwrap();
        let light = temperature_for_theta(0.5, PROTON_MASS, q).unwrap();
        assert!((light / heavy - 2.0).abs() < 1e-14);
    }

    #[test]
    fn theta_vanishes_at_high_temperature() {
        let g = derive_groups(&params(PROTON_MASS, 1e12)).unwrap();
        assert!(g.theta.unwrap() < 1e-10);
    }

    #[test]
    fn zero_temperature_has_no_thermal_groups() {
        let g = derive_groups(&params(ELECTRON_MASS, 0.0)).unwrap();
        assert!(g.beta.is_none() && g.theta.is_none() && g.lambda_t.is_none());
        assert!(g.lambda_param.is_some() && g.omega_u.is_some());
        assert_eq!(semiclassical_applicability(&g), Applicability::Quantum);
    }

    #[test]
    fn applicability_thresholds() {
        let at = |theta| DimensionlessGroups {
            theta: Some(theta),
            ..Default::default()
        };
        assert_eq!(
            semiclassical_applicability(&at(0.0)),
            Applicability::Semiclassical
        );
        assert_eq!(
            semiclassical_applicability(&at(0.5)),
            Applicability::Marginal
        );
        assert_eq!(
            semiclassical_applicability(&at(1.0)),
            Applicability::Quantum
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut p = params(PROTON_MASS, 300.0);
        p.mass = f64::NAN;
        assert!(derive_groups(&p).is_err());
        p.mass = -1.0;
        assert!(derive_groups(&p).is_err());
        assert!(temperature_for_theta(0.0, PROTON_MASS, 1.0).is_err());
    }
}
