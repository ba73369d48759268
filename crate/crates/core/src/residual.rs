//! Discrete residuals of the steady Euler system in polar coordinates,
//!
//! `(u_r d_r + u_theta/r d_theta) u_r - u_theta^2/r + d_r p = 0`
//! `(u_r d_r + u_theta/r d_theta) u_theta + u_r u_theta/r + (1/r) d_theta p = 0`
//! `(1/r) d_r(r u_r) + (1/r) d_theta u_theta = 0`,
//!
//! evaluated with the field-core stencils (one-sided second order at the
//! boundary rows).

use ndarray::Array2;

use crate::field::{self, PolarVectorField, ScalarField};

/// The three residual components.
#[derive(Debug, Clone)]
pub struct EulerResidual {
    pub momentum_r: ScalarField,
    pub momentum_theta: ScalarField,
    pub divergence: ScalarField,
}

impl EulerResidual {
    pub fn sup_norm(&self) -> f64 {
        self.momentum_r
            .sup_norm()
            .max(self.momentum_theta.sup_norm())
            .max(self.divergence.sup_norm())
    }
}

/// Evaluates the polar Euler residuals of a velocity/pressure pair.
pub fn euler_residual(u: &PolarVectorField, p: &ScalarField) -> EulerResidual {
    let grid = u.grid();
    assert_eq!(grid, p.grid(), "grid mismatch");
    let (nr, nt) = (grid.nr(), grid.ntheta());

    let dur_dr = field::radial_derivative(u.vr());
    let dut_dr = field::radial_derivative(u.vtheta());
    let dur_dt = field::theta_derivative(u.vr());
    let dut_dt = field::theta_derivative(u.vtheta());
    let dp_dr = field::radial_derivative(p);
    let dp_dt = field::theta_derivative(p);
    let div = field::polar_div(u);

    let mut res_r = Array2::zeros((nr, nt));
    let mut res_t = Array2::zeros((nr, nt));
    for i in 0..nr {
        let r = grid.r(i);
        for j in 0..nt {
            let ur = u.vr().get(i, j);
            let ut = u.vtheta().get(i, j);
            res_r[[i, j]] = ur * dur_dr.get(i, j) + ut / r * dur_dt.get(i, j)
                - ut * ut / r
                + dp_dr.get(i, j);
            res_t[[i, j]] = ur * dut_dr.get(i, j)
                + ut / r * dut_dt.get(i, j)
                + ur * ut / r
                + dp_dt.get(i, j) / r;
        }
    }
    EulerResidual {
        momentum_r: ScalarField::from_values(grid, res_r).expect("shape"),
        momentum_theta: ScalarField::from_values(grid, res_t).expect("shape"),
        divergence: div,
    }
}
