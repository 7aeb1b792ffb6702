use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    NoFlux,
}

/// Uniform cell-centred grid on `[origin, origin + domain_length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    cell_count: usize,
    domain_length: f64,
    origin: f64,
    boundary: Boundary,
}

impl Grid {
    pub const MIN_CELLS: usize = 16;

    pub fn new(
        cell_count: usize,
        domain_length: f64,
        origin: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        if cell_count < Self::MIN_CELLS || !cell_count.is_power_of_two() {
            return Err(Error::invalid(
                "cell_count",
                format!("must be a power of two >= 16, got {cell_count}"),
            ));
        }
        check_positive("domain_length", domain_length)?;
        check_finite("origin", origin)?;
        Ok(Self {
            cell_count,
            domain_length,
            origin,
            boundary,
        })
    }

    /// Grid of the given length centred on `center`.
    pub fn centered(
        cell_count: usize,
        domain_length: f64,
        center: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        Self::new(
            cell_count,
            domain_length,
            center - 0.5 * domain_length,
            boundary,
        )
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn cell_width(&self) -> f64 {
        self.domain_length / self.cell_count as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.cell_width()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cell_count).map(|i| self.center(i))
    }

    /// Same grid with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.cell_count,
            self.domain_length * factor,
            self.origin * factor,
            self.boundary,
        )
    }

    /// Whether the periodic domain holds a whole number of `period`s.
    pub fn holds_whole_periods(&self, period: f64) -> bool {
        let n = self.domain_length / period;
        (n - n.round()).abs() < 1e-9 * n.max(1.0) && n.round() >= 1.0
    }
}

/// Probability density sampled at cell centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    grid: Grid,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::invalid(
                "values",
                format!("expected {} cells, got {}", grid.cell_count(), values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "density must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn uniform(grid: Grid) -> Self {
        let v = 1.0 / grid.domain_length();
        Self {
            grid,
            values: vec![v; grid.cell_count()],
        }
    }

    /// Gaussian packet normalised to unit mass by the midpoint rule.
    pub fn gaussian(grid: Grid, center: f64, sigma: f64) -> Result<Self> {
        check_positive("sigma", sigma)?;
        let values = grid
            .centers()
            .map(|x| {
                let z = (x - center) / sigma;
                (-0.5 * z * z).exp()
            })
            .collect();
        let mut field = Self { grid, values };
        field.normalize()?;
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_width()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Rescales to unit mass.
    pub fn normalize(&mut self) -> Result<()> {
        let mass = self.mass();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Numerical(format!(
                "cannot normalise a density of mass {mass}"
            )));
        }
        self.values.iter_mut().for_each(|v| *v /= mass);
        Ok(())
    }
}

/// Midpoint-rule moments of a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub mass: f64,
    pub mean: f64,
    pub dispersion: f64,
    pub min_density: f64,
}

/// Mass, mean, dispersion and minimum of `rho`.
///
/// Coordinates are the raw cell centres. Periodic runs place the domain
/// centre on the initial packet, so these are the unwrapped coordinates
/// until the packet reaches the seam.
pub fn observables(rho: &DensityField) -> Observables {
    let grid = rho.grid();
    let h = grid.cell_width();
    let (mut m0, mut m1) = (0.0, 0.0);
    for (x, &r) in grid.centers().zip(rho.values()) {
        m0 += r;
        m1 += x * r;
    }
    let mean = m1 / m0;
    let m2: f64 = grid
        .centers()
        .zip(rho.values())
        .map(|(x, &r)| (x - mean) * (x - mean) * r)
        .sum();
    Observables {
        mass: m0 * h,
        mean,
        dispersion: m2 / m0,
        min_density: rho.min(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(15, 1.0, 0.0, Boundary::Periodic).is_err());
        assert!(Grid::new(48, 1.0, 0.0, Boundary::Periodic).is_err());
        assert!(Grid::new(64, 0.0, 0.0, Boundary::Periodic).is_err());
        let g = Grid::new(64, 2.0, -1.0, Boundary::NoFlux).unwrap();
        assert_eq!(g.cell_width(), 2.0 / 64.0);
        assert_eq!(g.center(0), -1.0 + 1.0 / 64.0);
        assert!(g.holds_whole_periods(0.5));
        assert!(!g.holds_whole_periods(0.75));
    }

    #[test]
    fn uniform_dispersion_is_l_squared_over_twelve() {
        let l = 3.0;
        let mut previous_error = None;
        for n in [64, 128, 256] {
            let g = Grid::new(n, l, 0.0, Boundary::NoFlux).unwrap();
            let o = observables(&DensityField::uniform(g));
            assert!((o.mass - 1.0).abs() < 1e-14);
            assert!((o.mean - 1.5).abs() < 1e-14);
            let err = (o.dispersion - l * l / 12.0).abs();
            // Midpoint rule on a uniform density misses exactly h²/12.
            let h = g.cell_width();
            assert!((err - h * h / 12.0).abs() < 1e-13);
            if let Some(prev) = previous_error {
                let ratio: f64 = prev / err;
                assert!((ratio - 4.0).abs() < 1e-6);
            }
            previous_error = Some(err);
        }
    }

    #[test]
    fn symmetric_gaussian_mean_is_centre() {
        let g = Grid::centered(256, 20.0, 3.0, Boundary::Periodic).unwrap();
        let rho = DensityField::gaussian(g, 3.0, 1.0).unwrap();
        let o = observables(&rho);
        assert!((o.mean - 3.0).abs() < 1e-10 * 20.0);
        assert!((o.mass - 1.0).abs() < 1e-14);
        assert!((o.dispersion - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_rejects_mismatched_lengths() {
        let g = Grid::new(16, 1.0, 0.0, Boundary::Periodic).unwrap();
        assert!(DensityField::new(g, vec![1.0; 8]).is_err());
        assert!(DensityField::new(g, vec![f64::NAN; 16]).is_err());
    }
}
