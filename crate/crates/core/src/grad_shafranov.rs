//! Stream-function solvers for BC1, BC2 (nonlinear elliptic via Picard
//! iteration) and BC3 (coupled Picard with outer-flux reconstruction), plus
//! velocity and pressure recovery from the stream function.
//!
//! The stream function is quasi-periodic, `phi = psi + Jbar * theta` with
//! periodic `psi`; only `psi` is stored on the grid. Each Picard step
//! freezes the source `z1 B'(phi)` and solves the linear weighted elliptic
//! problem; the realized equation at the fixed point is
//! `div_z(K grad_z phi) = z1 B'(phi)`, i.e. vorticity `omega = -B'(phi)`.

use ndarray::Array2;

use crate::bernoulli::{build_phi0, build_phi1, build_profile, BernoulliProfile, OuterKind};
use crate::elliptic::{solve_elliptic, EllipticProblem, OperatorKind};
use crate::error::{Result, SolverError};
use crate::field::{self, spectral, AnnulusGrid, BoundaryFunction, PolarVectorField, ScalarField};
use crate::report::IterationTrace;

/// Picard iteration controls.
#[derive(Debug, Clone)]
pub struct GsConfig {
    /// Convergence threshold on the sup-norm of the stream update (plus the
    /// outer-flux update for BC3).
    pub picard_tol: f64,
    pub max_iters: usize,
    /// Under-relaxation factor in (0, 1]; 1 is the plain Picard map.
    pub relaxation: f64,
    /// Fourier mode cap for reconstructed boundary functions; defaults to
    /// the largest grid-resolvable mode.
    pub modes: Option<usize>,
    /// Advisory smallness cap on the BC3 data norms; exceeding it only sets
    /// a warning flag.
    pub smallness_cap: f64,
}

impl Default for GsConfig {
    fn default() -> Self {
        Self {
            picard_tol: 1e-10,
            max_iters: 200,
            relaxation: 1.0,
            modes: None,
            smallness_cap: 0.25,
        }
    }
}

impl GsConfig {
    fn validate(&self) -> Result<()> {
        if self.picard_tol <= 0.0 || !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(SolverError::Config(format!(
                "need picard_tol > 0 and relaxation in (0, 1], got {} and {}",
                self.picard_tol, self.relaxation
            )));
        }
        Ok(())
    }

    fn mode_cap(&self, grid: AnnulusGrid) -> usize {
        let max = grid.ntheta() / 2 - 1;
        self.modes.map_or(max, |m| m.min(max))
    }
}

/// Quasi-periodic stream function `phi = psi + slope * theta`. The periodic
/// part is single-valued on the grid; the linear part carries the net flux.
#[derive(Debug, Clone)]
pub struct StreamFunction {
    periodic: ScalarField,
    slope: f64,
}

impl StreamFunction {
    pub fn new(periodic: ScalarField, slope: f64) -> Self {
        Self { periodic, slope }
    }

    pub fn grid(&self) -> AnnulusGrid {
        self.periodic.grid()
    }

    pub fn periodic(&self) -> &ScalarField {
        &self.periodic
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Value of the full stream function at node (i, j) on the principal
    /// branch theta in [0, 2 pi).
    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.periodic.get(i, j) + self.slope * self.grid().theta(j)
    }
}

/// Output of a stream-function solve.
#[derive(Debug, Clone)]
pub struct GsSolution {
    pub stream: StreamFunction,
    pub profile: BernoulliProfile,
    /// Outer flux reconstructed by the BC3 solve.
    pub f1: Option<BoundaryFunction>,
    /// Segment circulation realized by the boundary rows,
    /// `phi(r0,0) - phi(r1,0)`.
    pub realized_j0: f64,
    pub trace: IterationTrace,
}

/// `u_r = (1/r) d_theta phi`, `u_theta = -d_r phi` with the field-core
/// stencils. The output is divergence-free at stencil order.
pub fn velocity_from_stream(stream: &StreamFunction) -> PolarVectorField {
    let grid = stream.grid();
    let dpsi_dtheta = field::theta_derivative(stream.periodic());
    let dpsi_dr = field::radial_derivative(stream.periodic());
    let mut ur = Array2::zeros((grid.nr(), grid.ntheta()));
    let mut ut = Array2::zeros((grid.nr(), grid.ntheta()));
    for i in 0..grid.nr() {
        let inv_r = 1.0 / grid.r(i);
        for j in 0..grid.ntheta() {
            ur[[i, j]] = (dpsi_dtheta.get(i, j) + stream.slope()) * inv_r;
            ut[[i, j]] = -dpsi_dr.get(i, j);
        }
    }
    PolarVectorField::new(
        ScalarField::from_values(grid, ur).expect("shape"),
        ScalarField::from_values(grid, ut).expect("shape"),
    )
}

/// Bernoulli pressure `p = B(phi) - |u|^2 / 2`, pointwise.
pub fn pressure_from_stream(
    stream: &StreamFunction,
    profile: &BernoulliProfile,
    u: &PolarVectorField,
) -> ScalarField {
    let grid = stream.grid();
    let mut p = Array2::zeros((grid.nr(), grid.ntheta()));
    for i in 0..grid.nr() {
        for j in 0..grid.ntheta() {
            let speed2 = u.vr().get(i, j).powi(2) + u.vtheta().get(i, j).powi(2);
            p[[i, j]] = profile.b(stream.value(i, j)) - 0.5 * speed2;
        }
    }
    ScalarField::from_values(grid, p).expect("shape")
}

fn picard_source(
    grid: AnnulusGrid,
    psi: &ScalarField,
    slope: f64,
    profile: &BernoulliProfile,
) -> ScalarField {
    // -div_z(K grad phi) = -z1 B'(phi) realizes omega = -B'(phi).
    let mut rhs = Array2::zeros((grid.nr(), grid.ntheta()));
    for i in 0..grid.nr() {
        let r = grid.r(i);
        for j in 0..grid.ntheta() {
            let phi = psi.get(i, j) + slope * grid.theta(j);
            rhs[[i, j]] = -r * profile.b_prime(phi);
        }
    }
    ScalarField::from_values(grid, rhs).expect("shape")
}

/// Discrete energy functional
/// `I[psi] = int 1/2 (K grad psi) . grad psi - z1 B(psi + Jbar z2) dz`
/// with trapezoidal weights in r and the rectangle rule in theta.
fn energy_functional(
    psi: &ScalarField,
    slope: f64,
    profile: &BernoulliProfile,
) -> f64 {
    let grid = psi.grid();
    let dpsi_dr = field::radial_derivative(psi);
    let dpsi_dt = field::theta_derivative(psi);
    let mut total = 0.0;
    for i in 0..grid.nr() {
        let r = grid.r(i);
        let w = if i == 0 || i == grid.nr() - 1 { 0.5 } else { 1.0 } * grid.dr();
        for j in 0..grid.ntheta() {
            let quad = 0.5 * (r * dpsi_dr.get(i, j).powi(2) + dpsi_dt.get(i, j).powi(2) / r);
            let phi = psi.get(i, j) + slope * grid.theta(j);
            total += w * grid.dtheta() * (quad - r * profile.b(phi));
        }
    }
    total
}

/// Stream-function solve for BC1 (outer flux + circulation) and BC2 (outer
/// Bernoulli data through a diffeomorphism).
pub fn solve_bc12(
    f0: &BoundaryFunction,
    outer: &OuterKind,
    b0: &BoundaryFunction,
    grid: AnnulusGrid,
    cfg: &GsConfig,
) -> Result<GsSolution> {
    cfg.validate()?;
    let gate = 4 * grid.ntheta();
    let phi0 = build_phi0(f0, false, gate)?;
    let profile = build_profile(f0, b0, false, gate)?;
    let phi1 = build_phi1(outer, f0, &phi0, gate)?;
    let slope = phi0.slope();

    let inner: Vec<f64> = (0..grid.ntheta())
        .map(|j| phi0.eval(grid.theta(j)) - slope * grid.theta(j))
        .collect();
    let outer_row: Vec<f64> = (0..grid.ntheta())
        .map(|j| phi1.eval(grid.theta(j)) - slope * grid.theta(j))
        .collect();
    let realized_j0 = -phi1.eval(0.0);

    let mut psi = solve_elliptic(&EllipticProblem {
        grid,
        rhs: ScalarField::zeros(grid),
        dirichlet_inner: inner.clone(),
        dirichlet_outer: outer_row.clone(),
        operator_kind: OperatorKind::WeightedK,
    })?;

    let mut trace = IterationTrace::default();
    trace.energy = Some(vec![energy_functional(&psi, slope, &profile)]);
    for k in 1..=cfg.max_iters {
        let rhs = picard_source(grid, &psi, slope, &profile);
        let next = solve_elliptic(&EllipticProblem {
            grid,
            rhs,
            dirichlet_inner: inner.clone(),
            dirichlet_outer: outer_row.clone(),
            operator_kind: OperatorKind::WeightedK,
        })?;
        let accepted = psi.zip_with(&next, |a, b| a + cfg.relaxation * (b - a));
        let update = accepted.distance(&psi);
        psi = accepted;
        trace.updates.push(update);
        if let Some(e) = trace.energy.as_mut() {
            e.push(energy_functional(&psi, slope, &profile));
        }
        trace.iterations = k;
        if update <= cfg.picard_tol {
            trace.converged = true;
            break;
        }
    }
    if !trace.converged {
        return Err(SolverError::NoConvergence {
            iterations: trace.iterations,
            last_update: trace.updates.last().copied().unwrap_or(f64::NAN),
        });
    }

    Ok(GsSolution {
        stream: StreamFunction::new(psi, slope),
        profile,
        f1: match outer {
            OuterKind::Flux { f1, .. } => Some(f1.clone()),
            OuterKind::Diffeo(_) => None,
        },
        realized_j0,
        trace,
    })
}

/// Coupled stream-function solve for BC3: the outer flux `f1` is
/// reconstructed alongside the stream function from the tangential pressure
/// derivative datum. Data are in the normalized form (through-flow
/// `1 + f0`, profile period `J1 = 2 pi + J0`).
pub fn solve_bc3(
    f0: &BoundaryFunction,
    b0: &BoundaryFunction,
    p1prime: &BoundaryFunction,
    j0: f64,
    grid: AnnulusGrid,
    cfg: &GsConfig,
) -> Result<GsSolution> {
    cfg.validate()?;
    let gate = 4 * grid.ntheta();
    let nt = grid.ntheta();
    let phi0 = build_phi0(f0, true, gate)?;
    let profile = build_profile(f0, b0, true, gate)?;
    let slope = phi0.slope(); // 1 + J0 / 2 pi
    let jbar0 = f0.average();
    let modes = cfg.mode_cap(grid);
    let r1 = grid.r1();

    let smallness =
        f0.l1_bound() + b0.l1_bound() + p1prime.l1_bound() + j0.abs();
    let mut trace = IterationTrace {
        smallness_warning: smallness > cfg.smallness_cap,
        ..Default::default()
    };

    let inner: Vec<f64> = (0..nt)
        .map(|j| phi0.eval(grid.theta(j)) - slope * grid.theta(j))
        .collect();
    let p1p_row: Vec<f64> = (0..nt).map(|j| p1prime.eval(grid.theta(j))).collect();

    let mut psi = ScalarField::zeros(grid);
    let mut f1 = BoundaryFunction::constant(jbar0);
    trace.energy = Some(vec![energy_functional(&psi, slope, &profile)]);

    for k in 1..=cfg.max_iters {
        // Outer-flux update from the tangential pressure balance at r1.
        let dpsi_dr = field::radial_derivative(&psi);
        let top = grid.nr() - 1;
        let dphi_dz1_sq: Vec<f64> = (0..nt).map(|j| dpsi_dr.get(top, j).powi(2)).collect();
        let d_sq = spectral::derivative_samples(&dphi_dz1_sq);
        let mut f1_row = vec![0.0; nt];
        for j in 0..nt {
            let theta = grid.theta(j);
            let through = 1.0 + f1.eval(theta);
            if through <= 0.0 {
                return Err(SolverError::NonPositiveThroughflow {
                    theta,
                    value: through,
                });
            }
            let phi_top = psi.get(top, j) + slope * theta;
            f1_row[j] = r1 * r1 * profile.b_prime(phi_top)
                - r1 * r1 / (2.0 * through) * d_sq[j]
                - r1 * r1 / through * p1p_row[j];
        }
        let f1_next = outer_flux_from_integrand(&f1_row, jbar0, modes);

        // Linear elliptic solve with the full frozen source and the new
        // outer Dirichlet row.
        let f1_accepted = blend_boundary(&f1, &f1_next, cfg.relaxation);
        let phi1 = build_phi1(
            &OuterKind::Flux {
                f1: f1_accepted.clone(),
                j0,
            },
            f0,
            &phi0,
            gate,
        )?;
        let outer_row: Vec<f64> = (0..nt)
            .map(|j| phi1.eval(grid.theta(j)) - slope * grid.theta(j))
            .collect();
        let rhs = picard_source(grid, &psi, slope, &profile);
        let next = solve_elliptic(&EllipticProblem {
            grid,
            rhs,
            dirichlet_inner: inner.clone(),
            dirichlet_outer: outer_row,
            operator_kind: OperatorKind::WeightedK,
        })?;
        let accepted = psi.zip_with(&next, |a, b| a + cfg.relaxation * (b - a));

        let df = (0..nt)
            .map(|j| (f1_accepted.eval(grid.theta(j)) - f1.eval(grid.theta(j))).abs())
            .fold(0.0f64, f64::max);
        let du = accepted.distance(&psi);
        psi = accepted;
        f1 = f1_accepted;
        debug_assert!((f1.integral() - std::f64::consts::TAU * jbar0).abs() <= 1e-10);

        trace.updates.push(du + df);
        if let Some(e) = trace.energy.as_mut() {
            e.push(energy_functional(&psi, slope, &profile));
        }
        trace.iterations = k;
        if du + df <= cfg.picard_tol {
            trace.converged = true;
            break;
        }
    }
    if !trace.converged {
        return Err(SolverError::NoConvergence {
            iterations: trace.iterations,
            last_update: trace.updates.last().copied().unwrap_or(f64::NAN),
        });
    }

    let realized_j0 = j0;
    Ok(GsSolution {
        stream: StreamFunction::new(psi, slope),
        profile,
        f1: Some(f1),
        realized_j0,
        trace,
    })
}

/// Builds the next outer flux from the nodal update integrand `F`:
/// `f1 = f1(0) + int_0^theta (F - F_ave)`, with the constant chosen so that
/// the flux compatibility `int f1 = J0` holds exactly:
/// `f1(0) = J0/2pi - mean(P)` where `P` is the periodic antiderivative of
/// `F - F_ave`. (Equivalently `f1(0) = (J0 - int_0^{2pi} (F - F_ave)(s)
/// (2 pi - s) ds) / 2 pi`.)
pub(crate) fn outer_flux_from_integrand(
    row: &[f64],
    jbar0: f64,
    modes: usize,
) -> BoundaryFunction {
    let f = BoundaryFunction::from_samples(row, modes);
    let mean_free = BoundaryFunction::new(0.0, f.cos_coeffs.clone(), f.sin_coeffs.clone());
    let p = mean_free.antiderivative_minus_linear();
    let f1_at_0 = jbar0 - p.average();
    p.add_constant(f1_at_0)
}

fn blend_boundary(old: &BoundaryFunction, new: &BoundaryFunction, alpha: f64) -> BoundaryFunction {
    if alpha == 1.0 {
        return new.clone();
    }
    old.scaled(1.0 - alpha).add(&new.scaled(alpha))
}
