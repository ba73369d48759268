//! Solvers for the steady two-dimensional incompressible Euler equations
//! on an annulus `r0 < r < r1`.
//!
//! Two constructive methods are implemented:
//!
//! * a stream-function reduction to a weighted nonlinear elliptic equation,
//!   solved by Picard iteration (`grad_shafranov`), and
//! * a vorticity-transport fixed point that alternates a characteristics
//!   transport solve with a div-curl recovery (`transport`),
//!
//! covering the boundary-condition families BC1/BC2/BC3 (first method) and
//! BC1*/BC2*/BC3/BC4/BC5 plus the Dirichlet-pressure variants BC3'/BC5'
//! (second method). Pressure is recovered either through the Bernoulli
//! function or by line integration of the acceleration field (`pressure`).
//! The `driver` module is the executable surface used by the CLI: config
//! ingestion, residual evaluation, convergence studies and file emission.

pub mod bernoulli;
pub mod config;
pub mod driver;
pub mod elliptic;
mod error;
pub mod field;
pub mod grad_shafranov;
pub mod io;
pub mod pressure;
pub mod report;
pub mod residual;
pub mod transport;

pub use error::{Result, SolverError};
pub use field::{AnnulusGrid, BoundaryFunction, PolarVectorField, ScalarField};
