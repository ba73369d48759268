//! Pressure recovery for the vorticity-transport route: the acceleration
//! field `G`, its path-independent potential `g`, normalization against the
//! inner-circle datum, and the Dirichlet-pressure compatibility gates.
//!
//! The reference-flow part of the acceleration is handled analytically
//! (`(ubar . grad) ubar_r = -1/r^3` exactly), so the reconstruction is exact
//! for the reference flow; everything involving the perturbation uses the
//! field-core stencils. The tangential part of `G` is differenced in the
//! conservative product form `u_r (1/r) d_r(r u_theta)`, which vanishes
//! identically on circulation profiles `r u_theta = const`.

use ndarray::Array2;
use rustfft::num_complex::Complex64;

use crate::error::{Result, SolverError};
use crate::field::{self, spectral, BoundaryFunction, PolarVectorField, ScalarField};

/// Integration path from the base point `(r0, 0)` to a node. Both paths run
/// along grid lines; the canonical choice is radial-then-arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PressurePath {
    #[default]
    RadialThenArc,
    ArcThenRadial,
}

/// Acceleration `G = (u . grad_c) u + curvature terms`:
/// `G_r = (u . grad_c) u_r - u_theta^2 / r`,
/// `G_theta = (u . grad_c) u_theta + u_r u_theta / r`.
pub fn compute_acceleration(u: &PolarVectorField) -> PolarVectorField {
    let grid = u.grid();
    let (nr, nt) = (grid.nr(), grid.ntheta());
    // Perturbation around the reference flow; the base derivative content is
    // exact calculus, only v is differenced.
    let vr = ScalarField::from_fn(grid, |r, _| -1.0 / r).zip_with(u.vr(), |b, a| a + b);
    let dvr_dr = field::radial_derivative(&vr);
    let dvr_dt = field::theta_derivative(&vr);
    let rut = ScalarField::from_fn(grid, |r, _| r).zip_with(u.vtheta(), |r, vt| r * vt);
    let drut = field::radial_derivative(&rut);
    let dut_dt = field::theta_derivative(u.vtheta());

    let mut gr = Array2::zeros((nr, nt));
    let mut gt = Array2::zeros((nr, nt));
    for i in 0..nr {
        let r = grid.r(i);
        for j in 0..nt {
            let ur = u.vr().get(i, j);
            let ut = u.vtheta().get(i, j);
            gr[[i, j]] = -1.0 / (r * r * r) - vr.get(i, j) / (r * r)
                + ur * dvr_dr.get(i, j)
                + ut / r * dvr_dt.get(i, j)
                - ut * ut / r;
            gt[[i, j]] = ur / r * drut.get(i, j) + ut / r * dut_dt.get(i, j);
        }
    }
    PolarVectorField::new(
        ScalarField::from_values(grid, gr).expect("shape"),
        ScalarField::from_values(grid, gt).expect("shape"),
    )
}

/// Sixth-order cumulative quadrature of radial samples: integral of the
/// local quintic interpolant over each cell, accumulated from `r0`.
fn cumulative_radial(samples: &[f64], dr: f64) -> Vec<f64> {
    let n = samples.len();
    debug_assert!(n >= 6);
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        let base = i.saturating_sub(2).min(n - 6);
        let s = (i - base) as f64;
        out[i + 1] = out[i] + dr * quintic_cell_weights(s)
            .iter()
            .enumerate()
            .map(|(k, w)| w * samples[base + k])
            .sum::<f64>();
    }
    out
}

/// Weights of the 6-node Lagrange basis integrated over `[s, s+1]` in node
/// units; 3-point Gauss-Legendre is exact for the degree-5 basis.
fn quintic_cell_weights(s: f64) -> [f64; 6] {
    const GL_X: [f64; 3] = [-0.774596669241483_4, 0.0, 0.774596669241483_4];
    const GL_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut w = [0.0; 6];
    for (xq, wq) in GL_X.iter().zip(GL_W.iter()) {
        let x = s + 0.5 * (xq + 1.0);
        for (k, wk) in w.iter_mut().enumerate() {
            let mut basis = 1.0;
            for m in 0..6 {
                if m != k {
                    basis *= (x - m as f64) / (k as f64 - m as f64);
                }
            }
            *wk += 0.5 * wq * basis;
        }
    }
    w
}

/// Nodal cumulative angular integral `int_0^theta_j f` of ring samples,
/// Fourier-exact: the mean contributes `mean * theta`, the rest is the
/// periodic antiderivative pinned to zero at `theta = 0`.
fn cumulative_angular(row: &[f64]) -> (Vec<f64>, f64) {
    let n = row.len();
    let c = spectral::spectrum(row);
    let mean = c[0].re;
    let mut antider = vec![Complex64::new(0.0, 0.0); c.len()];
    for m in 1..c.len() {
        if m == n / 2 {
            // cos(M theta) integrates to sin(M theta)/M, zero at the nodes.
            continue;
        }
        antider[m] = c[m] / Complex64::new(0.0, m as f64);
    }
    let mut nodal = spectral::samples(&antider, n);
    let p0 = nodal[0];
    let dtheta = std::f64::consts::TAU / n as f64;
    for (j, v) in nodal.iter_mut().enumerate() {
        *v += mean * dtheta * j as f64 - p0;
    }
    (nodal, mean)
}

/// Line-integral potential `g(z) = -int_{gamma_z} G . dl` with
/// `g(r0, 0) = 0`, along the requested grid-aligned path. Gated on the
/// discrete curl defect of `G` (the input must be a converged solution up
/// to discretization order) and on the periodic seam return.
pub fn integrate_g(g_field: &PolarVectorField, path: PressurePath) -> Result<ScalarField> {
    let grid = g_field.grid();
    let (nr, nt) = (grid.nr(), grid.ntheta());
    let scale = 1.0 + g_field.sup_norm();
    let curl_tol = 10.0 * grid.dr() * grid.dr() * scale;
    let curl = field::polar_curl(g_field).sup_norm();
    if curl > curl_tol {
        return Err(SolverError::CurlDefect {
            defect: curl,
            tol: curl_tol,
        });
    }

    // Angular legs: exact cumulative integral of each ring; the seam return
    // is 2 pi r times the ring mean of G_theta and must vanish within the
    // same discretization-order tolerance as the curl gate.
    let mut arc = Vec::with_capacity(nr);
    let seam_tol = 50.0 * grid.dr() * grid.dr() * scale;
    for i in 0..nr {
        let (cum, mean) = cumulative_angular(&g_field.vtheta().ring(i));
        let gap = std::f64::consts::TAU * grid.r(i) * mean;
        if gap.abs() > seam_tol {
            return Err(SolverError::SeamMismatch {
                gap,
                tol: seam_tol,
            });
        }
        arc.push(cum);
    }

    let mut out = Array2::zeros((nr, nt));
    match path {
        PressurePath::RadialThenArc => {
            let col0: Vec<f64> = (0..nr).map(|i| g_field.vr().get(i, 0)).collect();
            let radial = cumulative_radial(&col0, grid.dr());
            for i in 0..nr {
                let r = grid.r(i);
                for j in 0..nt {
                    out[[i, j]] = -(radial[i] + r * arc[i][j]);
                }
            }
        }
        PressurePath::ArcThenRadial => {
            for j in 0..nt {
                let col: Vec<f64> = (0..nr).map(|i| g_field.vr().get(i, j)).collect();
                let radial = cumulative_radial(&col, grid.dr());
                for i in 0..nr {
                    out[[i, j]] = -(grid.r0() * arc[0][j] + radial[i]);
                }
            }
        }
    }
    ScalarField::from_values(grid, out)
}

/// Inner-circle datum the reconstructed pressure is anchored to at
/// `theta = 0`.
#[derive(Debug, Clone, Copy)]
pub enum PressureAnchor<'a> {
    /// BC4/BC5: `p(r0, theta) = -1/(2 r0^2) + p0(theta)`, so
    /// `p = g - 1/(2 r0^2) + p0(0)`.
    InnerPressure { p0: &'a BoundaryFunction },
    /// Bernoulli families: `p = g - |u(r0, 0)|^2 / 2 + b0(0)`.
    Bernoulli {
        b0: &'a BoundaryFunction,
        u: &'a PolarVectorField,
    },
}

/// Shifts the potential by the normalization constant so the inner-circle
/// datum holds exactly at `theta = 0`.
pub fn pressure_normalize(g: &ScalarField, anchor: PressureAnchor<'_>) -> ScalarField {
    let grid = g.grid();
    let shift = match anchor {
        PressureAnchor::InnerPressure { p0 } => {
            -0.5 / (grid.r0() * grid.r0()) + p0.eval(0.0)
        }
        PressureAnchor::Bernoulli { b0, u } => {
            let speed2 = u.vr().get(0, 0).powi(2) + u.vtheta().get(0, 0).powi(2);
            -0.5 * speed2 + b0.eval(0.0)
        }
    };
    g.map(|v| v + shift)
}

/// Outcome of the Dirichlet-pressure compatibility check.
#[derive(Debug, Clone, Copy)]
pub struct CompatReport {
    /// `p1(0) - (p(r1, 0) + 1/(2 r1^2))`.
    pub gap: f64,
    /// Sup norm of the full outer-row mismatch after the scalar gap passed.
    pub row_sup: f64,
}

pub const DEFAULT_COMPAT_TOL: f64 = 1e-6;

/// BC3'/BC5' gate: the Dirichlet pressure datum `p1` is admissible iff its
/// value at `theta = 0` matches the reconstructed trace. On success the
/// whole outer row is also required to match within the tolerance.
pub fn trace_and_compat(
    p: &ScalarField,
    p1: &BoundaryFunction,
    compat_tol: f64,
) -> Result<CompatReport> {
    let grid = p.grid();
    let top = grid.nr() - 1;
    let r1 = grid.r1();
    let base = -0.5 / (r1 * r1);
    let gap = p1.eval(0.0) - (p.get(top, 0) + 0.5 / (r1 * r1));
    if gap.abs() > compat_tol {
        return Err(SolverError::CompatibilityMismatch { gap });
    }
    let mut row_sup: f64 = 0.0;
    for j in 0..grid.ntheta() {
        row_sup = row_sup.max((p.get(top, j) - (base + p1.eval(grid.theta(j)))).abs());
    }
    if row_sup > compat_tol {
        return Err(SolverError::CompatibilityMismatch { gap: row_sup });
    }
    Ok(CompatReport { gap, row_sup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::AnnulusGrid;

    fn grid(nr: usize, nt: usize) -> AnnulusGrid {
        AnnulusGrid::new(1.0, 2.0, nr, nt).unwrap()
    }

    fn swirl(g: AnnulusGrid, a: f64, c: f64) -> PolarVectorField {
        PolarVectorField::from_fns(g, move |r, _| a / r, move |r, _| c / r)
    }

    #[test]
    fn acceleration_of_reference_flow_is_exact() {
        let g = grid(17, 16);
        let u = PolarVectorField::from_fns(g, |r, _| 1.0 / r, |_, _| 0.0);
        let acc = compute_acceleration(&u);
        for i in 0..g.nr() {
            let r = g.r(i);
            assert!((acc.vr().get(i, 3) + 1.0 / (r * r * r)).abs() <= 1e-14);
            assert!(acc.vtheta().get(i, 3).abs() <= 1e-14);
        }
    }

    #[test]
    fn acceleration_of_swirl_and_rotation() {
        let g = grid(33, 16);
        let (a, c) = (1.1, 0.1);
        let acc = compute_acceleration(&swirl(g, a, c));
        let mut err: f64 = 0.0;
        for i in 0..g.nr() {
            let r = g.r(i);
            err = err.max((acc.vr().get(i, 0) + (a * a + c * c) / (r * r * r)).abs());
            assert!(acc.vtheta().get(i, 0).abs() <= 1e-13);
        }
        assert!(err <= 5.0 * g.dr() * g.dr());

        // Rigid rotation: centripetal acceleration -Omega^2 r, exactly.
        let om = 0.7;
        let u = PolarVectorField::from_fns(g, |_, _| 0.0, |r, _| om * r);
        let acc = compute_acceleration(&u);
        for i in 0..g.nr() {
            let r = g.r(i);
            assert!((acc.vr().get(i, 5) + om * om * r).abs() <= 1e-12);
            assert!(acc.vtheta().get(i, 5).abs() <= 1e-12);
        }
    }

    #[test]
    fn potential_examples() {
        let g = grid(65, 16);
        // G = (-1/r^3, 0): g(r) = (1 - 1/r^2)/2 with r0 = 1; g(2,.) = 3/8.
        let acc = PolarVectorField::from_fns(g, |r, _| -1.0 / (r * r * r), |_, _| 0.0);
        let pot = integrate_g(&acc, PressurePath::RadialThenArc).unwrap();
        for i in 0..g.nr() {
            let r = g.r(i);
            let exact = 0.5 * (1.0 - 1.0 / (r * r));
            assert!((pot.get(i, 7) - exact).abs() <= 1e-9);
        }
        assert!((pot.get(g.nr() - 1, 0) - 0.375).abs() <= 1e-9);

        // G = 0 gives g identically zero.
        let zero = PolarVectorField::zeros(g);
        assert!(integrate_g(&zero, PressurePath::RadialThenArc)
            .unwrap()
            .sup_norm()
            .abs()
            <= 1e-15);
    }

    #[test]
    fn path_independence_on_exact_swirl() {
        let g = grid(33, 32);
        let acc = compute_acceleration(&swirl(g, 1.1, 0.1));
        let p1 = integrate_g(&acc, PressurePath::RadialThenArc).unwrap();
        let p2 = integrate_g(&acc, PressurePath::ArcThenRadial).unwrap();
        assert!(p1.distance(&p2) <= 1e-8 * (1.0 + acc.sup_norm()));
    }

    #[test]
    fn curl_gate_rejects_non_solutions() {
        let g = grid(17, 16);
        let junk = PolarVectorField::from_fns(g, |_, t| t.sin(), |r, _| r * r);
        assert!(matches!(
            integrate_g(&junk, PressurePath::RadialThenArc),
            Err(SolverError::CurlDefect { .. })
        ));
    }

    #[test]
    fn normalization_examples() {
        let g = grid(65, 16);
        // Reference flow with p0 = 0: p = -1/(2 r^2) to quadrature accuracy.
        let u = PolarVectorField::from_fns(g, |r, _| 1.0 / r, |_, _| 0.0);
        let acc = compute_acceleration(&u);
        let pot = integrate_g(&acc, PressurePath::RadialThenArc).unwrap();
        let zero = BoundaryFunction::constant(0.0);
        let p = pressure_normalize(&pot, PressureAnchor::InnerPressure { p0: &zero });
        for i in 0..g.nr() {
            let r = g.r(i);
            assert!((p.get(i, 3) + 0.5 / (r * r)).abs() <= 1e-9);
        }

        // Bernoulli anchor pins p(r0, 0) = b0(0) - |u(r0,0)|^2/2 exactly.
        let b0 = BoundaryFunction::constant(1.7);
        let p = pressure_normalize(&pot, PressureAnchor::Bernoulli { b0: &b0, u: &u });
        let expect = 1.7 - 0.5 / (g.r0() * g.r0());
        assert!((p.get(0, 0) - expect).abs() <= 1e-14);

        // Exact swirl under the BC4 anchor recovers -(a^2+c^2)/(2 r^2).
        let (a, c) = (1.1, 0.1);
        let u = swirl(g, a, c);
        let acc = compute_acceleration(&u);
        let pot = integrate_g(&acc, PressurePath::RadialThenArc).unwrap();
        let p0v = (1.0 - a * a - c * c) / (2.0 * g.r0() * g.r0());
        let p0 = BoundaryFunction::constant(p0v);
        let p = pressure_normalize(&pot, PressureAnchor::InnerPressure { p0: &p0 });
        let mut err: f64 = 0.0;
        for i in 0..g.nr() {
            let r = g.r(i);
            err = err.max((p.get(i, 2) + (a * a + c * c) / (2.0 * r * r)).abs());
        }
        assert!(err <= 5.0 * g.dr() * g.dr());
    }

    #[test]
    fn compat_gate_branches() {
        let g = grid(17, 16);
        // Base-flow pressure with p1 = 0: accepted with zero gap.
        let p = ScalarField::from_fn(g, |r, _| -0.5 / (r * r));
        let ok = trace_and_compat(&p, &BoundaryFunction::constant(0.0), DEFAULT_COMPAT_TOL)
            .unwrap();
        assert!(ok.gap.abs() <= 1e-14 && ok.row_sup <= 1e-14);

        // Constant offset datum is rejected with the gap reported.
        let err = trace_and_compat(&p, &BoundaryFunction::constant(0.1), DEFAULT_COMPAT_TOL);
        match err {
            Err(SolverError::CompatibilityMismatch { gap }) => {
                assert!((gap - 0.1).abs() <= 1e-12)
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
    }
}
