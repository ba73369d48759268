use ndarray::Array2;

use crate::error::{Result, SolverError};

/// Tensor grid on the annulus: uniform radial nodes on `[r0, r1]` including
/// both boundary circles, uniform periodic angular nodes with `theta = 0`
/// present and `theta = 2*pi` identified with `theta = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusGrid {
    r0: f64,
    r1: f64,
    nr: usize,
    ntheta: usize,
    dr: f64,
    dtheta: f64,
}

impl AnnulusGrid {
    /// Requires `0 < r0 < r1`, `nr >= 8` and even `ntheta >= 8`.
    pub fn new(r0: f64, r1: f64, nr: usize, ntheta: usize) -> Result<Self> {
        if !(r0.is_finite() && r1.is_finite()) || r0 <= 0.0 || r1 <= r0 {
            return Err(SolverError::InvalidGrid(format!(
                "need 0 < r0 < r1, got r0 = {r0}, r1 = {r1}"
            )));
        }
        if nr < 8 {
            return Err(SolverError::InvalidGrid(format!(
                "need at least 8 radial nodes, got {nr}"
            )));
        }
        if ntheta < 8 || ntheta % 2 != 0 {
            return Err(SolverError::InvalidGrid(format!(
                "need an even angular node count >= 8, got {ntheta}"
            )));
        }
        Ok(Self {
            r0,
            r1,
            nr,
            ntheta,
            dr: (r1 - r0) / (nr - 1) as f64,
            dtheta: std::f64::consts::TAU / ntheta as f64,
        })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    /// Radius of the i-th radial node.
    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        self.r0 + i as f64 * self.dr
    }

    /// Angle of the j-th angular node.
    #[inline]
    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta
    }

    /// Radius at the midpoint between nodes i and i+1. Used by the
    /// conservative radial stencils.
    #[inline]
    pub(crate) fn r_half(&self, i: usize) -> f64 {
        self.r0 + (i as f64 + 0.5) * self.dr
    }
}

/// Nodal values of a scalar quantity on an [`AnnulusGrid`].
///
/// Column `theta = 0` is the sole storage for the identified seam; every
/// operator treats the angular direction cyclically.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: AnnulusGrid,
    values: Array2<f64>,
}

impl ScalarField {
    pub fn zeros(grid: AnnulusGrid) -> Self {
        Self {
            grid,
            values: Array2::zeros((grid.nr(), grid.ntheta())),
        }
    }

    pub fn from_fn(grid: AnnulusGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Array2::zeros((grid.nr(), grid.ntheta()));
        for i in 0..grid.nr() {
            for j in 0..grid.ntheta() {
                values[[i, j]] = f(grid.r(i), grid.theta(j));
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: AnnulusGrid, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.nr(), grid.ntheta()) {
            return Err(SolverError::InvalidGrid(format!(
                "field shape {:?} does not match grid {}x{}",
                values.dim(),
                grid.nr(),
                grid.ntheta()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> AnnulusGrid {
        self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    /// Nodal values along the radial ring `i` (one full period in theta).
    pub fn ring(&self, i: usize) -> Vec<f64> {
        self.values.row(i).to_vec()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let mut values = self.values.clone();
        values.zip_mut_with(&other.values, |a, &b| *a = f(*a, b));
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.mapv(&f),
        }
    }

    /// Sup norm of the difference with `other`.
    pub fn distance(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Nodal values of a vector quantity in the orthonormal polar frame
/// `(e_r, e_theta)`; no metric factors are baked into storage. `e_theta`
/// is the counterclockwise unit tangent.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarVectorField {
    vr: ScalarField,
    vtheta: ScalarField,
}

impl PolarVectorField {
    pub fn new(vr: ScalarField, vtheta: ScalarField) -> Self {
        assert_eq!(vr.grid(), vtheta.grid(), "grid mismatch");
        Self { vr, vtheta }
    }

    pub fn zeros(grid: AnnulusGrid) -> Self {
        Self {
            vr: ScalarField::zeros(grid),
            vtheta: ScalarField::zeros(grid),
        }
    }

    pub fn from_fns(
        grid: AnnulusGrid,
        fr: impl FnMut(f64, f64) -> f64,
        ftheta: impl FnMut(f64, f64) -> f64,
    ) -> Self {
        Self {
            vr: ScalarField::from_fn(grid, fr),
            vtheta: ScalarField::from_fn(grid, ftheta),
        }
    }

    pub fn grid(&self) -> AnnulusGrid {
        self.vr.grid()
    }

    pub fn vr(&self) -> &ScalarField {
        &self.vr
    }

    pub fn vtheta(&self) -> &ScalarField {
        &self.vtheta
    }

    pub fn sup_norm(&self) -> f64 {
        self.vr.sup_norm().max(self.vtheta.sup_norm())
    }

    pub fn distance(&self, other: &PolarVectorField) -> f64 {
        self.vr
            .distance(&other.vr)
            .max(self.vtheta.distance(&other.vtheta))
    }

    /// Pointwise `self + scale * other`.
    pub fn add_scaled(&self, other: &PolarVectorField, scale: f64) -> PolarVectorField {
        PolarVectorField {
            vr: self.vr.zip_with(&other.vr, |a, b| a + scale * b),
            vtheta: self.vtheta.zip_with(&other.vtheta, |a, b| a + scale * b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacings_close_exactly() {
        let g = AnnulusGrid::new(1.0, 2.0, 33, 64).unwrap();
        assert!((g.dr() * (g.nr() - 1) as f64 - (g.r1() - g.r0())).abs() < 1e-15);
        assert!((g.dtheta() * g.ntheta() as f64 - std::f64::consts::TAU).abs() < 1e-15);
        assert_eq!(g.r(0), 1.0);
        assert!((g.r(32) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(AnnulusGrid::new(0.0, 2.0, 33, 64).is_err());
        assert!(AnnulusGrid::new(2.0, 1.0, 33, 64).is_err());
        assert!(AnnulusGrid::new(1.0, 2.0, 4, 64).is_err());
        assert!(AnnulusGrid::new(1.0, 2.0, 33, 63).is_err());
    }

    #[test]
    fn field_roundtrip_and_norms() {
        let g = AnnulusGrid::new(1.0, 2.0, 9, 8).unwrap();
        let f = ScalarField::from_fn(g, |r, t| r * t.cos());
        assert_eq!(f.get(0, 0), 1.0);
        assert!(f.sup_norm() <= 2.0 + 1e-14);
        let d = f.distance(&f.map(|v| v + 1.0));
        assert!((d - 1.0).abs() < 1e-15);
    }
}
