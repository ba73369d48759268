//! Grids, fields, periodic boundary functions, polar differential operators,
//! quadrature and interpolation shared by every solver.
//!
//! All types are immutable value snapshots after construction and every
//! operation is a pure function, so fields can be read concurrently from
//! multiple workers.

mod boundary;
mod grid;
mod ops;
pub(crate) mod spectral;

pub use boundary::{BoundaryFunction, Diffeo};
pub use grid::{AnnulusGrid, PolarVectorField, ScalarField};
pub use ops::{
    polar_curl, polar_div, polar_grad, radial_derivative, theta_derivative, theta_quadrature,
    trig_interpolate,
};
