//! Characteristics-based vorticity transport and the fixed-point drivers for
//! BC4, BC5, BC1*, BC2* and the vorticity-transport route to BC3.
//!
//! The total velocity is the reference flow plus a perturbation,
//! `u = (1/r + v_r, v_theta)`; vorticity is constant along streamlines and
//! is pulled forward from the inner circle by backtracing the streamline ODE
//! `d theta / d r = v_theta / (r (1/r + v_r))` with classical RK4. Velocity
//! between nodes is evaluated by the exact trigonometric interpolant in
//! theta and cubic interpolation in r; since every RK4 stage radius for
//! nodal targets lies on a fixed ladder, the cubic row blends are
//! precomputed once per transport solve.

use once_cell::sync::Lazy;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::bernoulli::build_phi0;
use crate::elliptic::{solve_div_curl, DivCurlProblem};
use crate::error::{Result, SolverError};
use crate::field::{
    spectral, AnnulusGrid, BoundaryFunction, Diffeo, PolarVectorField, ScalarField,
};
use crate::report::IterationTrace;

/// Worker pool for data-parallel backtraces. `ANNULUS_EULER_THREADS` caps
/// the width (0 or unset = automatic).
static POOL: Lazy<rayon::ThreadPool> = Lazy::new(|| {
    let n = std::env::var("ANNULUS_EULER_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .expect("worker pool")
});

/// Fixed-point iteration controls.
#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    /// Convergence threshold on `||v update||_inf` (plus `||f1 update||_inf`
    /// where the outer flux is reconstructed).
    pub fp_tol: f64,
    pub max_iters: usize,
    /// RK4 substeps per radial cell traversed during backtracing.
    pub ode_steps_per_cell: usize,
    /// Fourier mode cap for reconstructed boundary functions; defaults to
    /// the largest grid-resolvable mode.
    pub modes: Option<usize>,
    /// Advisory smallness cap; exceeding it only sets a warning flag.
    pub smallness_cap: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            fp_tol: 1e-10,
            max_iters: 100,
            ode_steps_per_cell: 4,
            modes: None,
            smallness_cap: 0.25,
        }
    }
}

impl FixedPointConfig {
    fn validate(&self) -> Result<()> {
        if self.fp_tol <= 0.0 || self.max_iters == 0 || self.ode_steps_per_cell == 0 {
            return Err(SolverError::Config(
                "fixed-point tolerances and step counts must be positive".into(),
            ));
        }
        Ok(())
    }

    fn mode_cap(&self, grid: AnnulusGrid) -> usize {
        let max = grid.ntheta() / 2 - 1;
        self.modes.map_or(max, |m| m.min(max))
    }
}

/// Perturbation velocity plus the inner-circle vorticity trace. The total
/// radial through-flow `1/r + v_r` must stay positive so characteristics
/// traverse the annulus inward-to-outward.
#[derive(Debug, Clone)]
pub struct TransportProblem {
    pub vhat: PolarVectorField,
    pub omega0: BoundaryFunction,
}

/// Outer flux state produced by [`f1_update`]: the reconstructed boundary
/// function (with `int f1 = J0` exact by construction) and the mean of the
/// update integrand.
#[derive(Debug, Clone)]
pub struct OuterFluxState {
    pub f1: BoundaryFunction,
    pub rave: f64,
}

/// Evaluates the perturbation velocity between grid nodes: exact
/// trigonometric interpolation in theta, 4-point cubic in r.
pub struct VelocitySampler {
    grid: AnnulusGrid,
    steps_per_cell: usize,
    vr_rows: Vec<Vec<Complex64>>,
    vt_rows: Vec<Vec<Complex64>>,
    /// Blended spectra on the stage-radius ladder
    /// `r = r0 + q * dr / (2 * steps_per_cell)`.
    stage_vr: Vec<Vec<Complex64>>,
    stage_vt: Vec<Vec<Complex64>>,
    zero: bool,
}

/// Cubic Lagrange weights on four consecutive nodes for local coordinate
/// `x` measured from the stencil base in units of dr.
#[inline]
pub(crate) fn cubic_weights(x: f64) -> [f64; 4] {
    let xm1 = x - 1.0;
    let xm2 = x - 2.0;
    let xm3 = x - 3.0;
    [
        -xm1 * xm2 * xm3 / 6.0,
        x * xm2 * xm3 / 2.0,
        -x * xm1 * xm3 / 2.0,
        x * xm1 * xm2 / 6.0,
    ]
}

fn blend_rows(rows: &[Vec<Complex64>], base: usize, w: [f64; 4], cutoff: f64) -> Vec<Complex64> {
    let len = (0..4).map(|k| rows[base + k].len()).max().unwrap_or(0);
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (k, wk) in w.iter().enumerate() {
        if *wk == 0.0 {
            continue;
        }
        for (m, c) in rows[base + k].iter().enumerate() {
            out[m] += *wk * *c;
        }
    }
    spectral::truncate_negligible(&mut out, cutoff);
    out
}

impl VelocitySampler {
    pub fn new(vhat: &PolarVectorField, steps_per_cell: usize) -> Self {
        let grid = vhat.grid();
        let nr = grid.nr();
        let mut vr_rows = Vec::with_capacity(nr);
        let mut vt_rows = Vec::with_capacity(nr);
        let mut scale = 0.0f64;
        for i in 0..nr {
            let r = spectral::spectrum(&vhat.vr().ring(i));
            let t = spectral::spectrum(&vhat.vtheta().ring(i));
            for c in r.iter().chain(t.iter()) {
                scale = scale.max(c.norm_sqr());
            }
            vr_rows.push(r);
            vt_rows.push(t);
        }
        let scale = scale.sqrt();
        let zero = scale < 1e-300;
        let cutoff = 1e-15 * scale;
        for rows in [&mut vr_rows, &mut vt_rows] {
            for row in rows.iter_mut() {
                spectral::truncate_negligible(row, cutoff);
            }
        }

        let stages = if zero { 0 } else { (nr - 1) * 2 * steps_per_cell + 1 };
        let mut stage_vr = Vec::with_capacity(stages);
        let mut stage_vt = Vec::with_capacity(stages);
        if !zero {
            let unit = grid.dr() / (2.0 * steps_per_cell as f64);
            for q in 0..stages {
                let r = grid.r0() + q as f64 * unit;
                let (base, w) = Self::stencil(grid, r);
                stage_vr.push(blend_rows(&vr_rows, base, w, cutoff));
                stage_vt.push(blend_rows(&vt_rows, base, w, cutoff));
            }
        }
        Self {
            grid,
            steps_per_cell,
            vr_rows,
            vt_rows,
            stage_vr,
            stage_vt,
            zero,
        }
    }

    pub fn grid(&self) -> AnnulusGrid {
        self.grid
    }

    pub fn steps_per_cell(&self) -> usize {
        self.steps_per_cell
    }

    /// True when the perturbation field vanishes identically; streamlines
    /// are then exactly radial.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    fn stencil(grid: AnnulusGrid, r: f64) -> (usize, [f64; 4]) {
        let nr = grid.nr();
        let s = ((r - grid.r0()) / grid.dr()).clamp(0.0, (nr - 1) as f64);
        let cell = (s.floor() as usize).min(nr - 2);
        let base = cell.saturating_sub(1).min(nr - 4);
        (base, cubic_weights(s - base as f64))
    }

    /// Generic evaluation at an arbitrary point.
    pub fn eval(&self, r: f64, theta: f64) -> (f64, f64) {
        if self.zero {
            return (0.0, 0.0);
        }
        let (base, w) = Self::stencil(self.grid, r);
        let nt = self.grid.ntheta();
        let mut vr = 0.0;
        let mut vt = 0.0;
        for (k, wk) in w.iter().enumerate() {
            vr += wk * spectral::eval(&self.vr_rows[base + k], nt, theta);
            vt += wk * spectral::eval(&self.vt_rows[base + k], nt, theta);
        }
        (vr, vt)
    }

    /// Evaluation on the precomputed stage ladder.
    #[inline]
    fn eval_stage(&self, q: usize, theta: f64) -> (f64, f64) {
        let nt = self.grid.ntheta();
        let (sin, cos) = theta.sin_cos();
        let z = Complex64::new(cos, sin);
        (
            eval_with_unit(&self.stage_vr[q], nt, z),
            eval_with_unit(&self.stage_vt[q], nt, z),
        )
    }
}

/// Horner evaluation of a one-sided spectrum at `z = exp(i theta)`.
#[inline]
fn eval_with_unit(c: &[Complex64], n: usize, z: Complex64) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    let half = n / 2;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in (1..c.len()).rev() {
        let cm = if m == half {
            Complex64::new(0.5 * c[m].re, 0.0)
        } else {
            c[m]
        };
        acc = acc * z + cm;
    }
    c[0].re + 2.0 * (acc * z).re
}

/// Characteristic slope `d theta / d r = v_theta / (1 + r v_r)` of the total
/// flow; errs when the radial through-flow changes sign.
#[inline]
fn slope(r: f64, vr: f64, vt: f64) -> Result<f64> {
    let denom = 1.0 + r * vr;
    if denom <= 0.0 {
        return Err(SolverError::ThroughflowSignChange { r });
    }
    Ok(vt / denom)
}

/// Integrates the streamline through `(r_target, theta_target)` back to the
/// inner circle and returns the launch angle `theta_0` there (not reduced
/// mod 2 pi). Uses `ode_steps_per_cell` RK4 steps per radial cell traversed.
pub fn backtrace_characteristic(
    sampler: &VelocitySampler,
    r_target: f64,
    theta_target: f64,
) -> Result<f64> {
    let grid = sampler.grid();
    if sampler.is_zero() {
        return Ok(theta_target);
    }
    let span = r_target - grid.r0();
    if span <= 1e-14 {
        return Ok(theta_target);
    }
    let spc = sampler.steps_per_cell();
    let unit = grid.dr() / (2.0 * spc as f64);
    let q_float = span / unit;
    let q_round = q_float.round();
    let on_ladder = (q_float - q_round).abs() <= 1e-10 * (1.0 + q_float)
        && (q_round as usize) % 2 == 0
        && (q_round as usize) <= (grid.nr() - 1) * 2 * spc;
    if on_ladder {
        backtrace_on_ladder(sampler, q_round as usize, theta_target)
    } else {
        backtrace_generic(sampler, r_target, theta_target)
    }
}

fn backtrace_on_ladder(sampler: &VelocitySampler, q_start: usize, theta0: f64) -> Result<f64> {
    if sampler.is_zero() {
        return Ok(theta0);
    }
    let grid = sampler.grid();
    let spc = sampler.steps_per_cell();
    let unit = grid.dr() / (2.0 * spc as f64);
    let h = -2.0 * unit;
    let mut theta = theta0;
    let mut q = q_start;
    while q >= 2 {
        let r_a = grid.r0() + q as f64 * unit;
        let r_m = r_a - unit;
        let r_b = r_a - 2.0 * unit;
        let (vr, vt) = sampler.eval_stage(q, theta);
        let k1 = slope(r_a, vr, vt)?;
        let (vr, vt) = sampler.eval_stage(q - 1, theta + 0.5 * h * k1);
        let k2 = slope(r_m, vr, vt)?;
        let (vr, vt) = sampler.eval_stage(q - 1, theta + 0.5 * h * k2);
        let k3 = slope(r_m, vr, vt)?;
        let (vr, vt) = sampler.eval_stage(q - 2, theta + h * k3);
        let k4 = slope(r_b, vr, vt)?;
        theta += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        q -= 2;
    }
    Ok(theta)
}

/// Integrates the streamline from `(r_from, theta_from)` down to `r_to`
/// (with `r0 <= r_to <= r_from`) and returns the crossing angle there.
pub fn backtrace_between(
    sampler: &VelocitySampler,
    r_from: f64,
    theta_from: f64,
    r_to: f64,
) -> Result<f64> {
    if sampler.is_zero() || r_from - r_to <= 1e-14 {
        return Ok(theta_from);
    }
    let grid = sampler.grid();
    let spc = sampler.steps_per_cell();
    let span = r_from - r_to;
    let cells = (span / grid.dr()).ceil().max(1.0) as usize;
    let steps = cells * spc;
    let h = -span / steps as f64;
    let mut theta = theta_from;
    let mut r = r_from;
    for _ in 0..steps {
        let (vr, vt) = sampler.eval(r, theta);
        let k1 = slope(r, vr, vt)?;
        let (vr, vt) = sampler.eval(r + 0.5 * h, theta + 0.5 * h * k1);
        let k2 = slope(r + 0.5 * h, vr, vt)?;
        let (vr, vt) = sampler.eval(r + 0.5 * h, theta + 0.5 * h * k2);
        let k3 = slope(r + 0.5 * h, vr, vt)?;
        let (vr, vt) = sampler.eval(r + h, theta + h * k3);
        let k4 = slope(r + h, vr, vt)?;
        theta += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        r += h;
    }
    Ok(theta)
}

fn backtrace_generic(sampler: &VelocitySampler, r_target: f64, theta0: f64) -> Result<f64> {
    let grid = sampler.grid();
    let spc = sampler.steps_per_cell();
    let span = r_target - grid.r0();
    let cells = (span / grid.dr()).ceil().max(1.0) as usize;
    let steps = cells * spc;
    let h = -span / steps as f64;
    let mut theta = theta0;
    let mut r = r_target;
    for _ in 0..steps {
        let (vr, vt) = sampler.eval(r, theta);
        let k1 = slope(r, vr, vt)?;
        let (vr, vt) = sampler.eval(r + 0.5 * h, theta + 0.5 * h * k1);
        let k2 = slope(r + 0.5 * h, vr, vt)?;
        let (vr, vt) = sampler.eval(r + 0.5 * h, theta + 0.5 * h * k2);
        let k3 = slope(r + 0.5 * h, vr, vt)?;
        let (vr, vt) = sampler.eval(r + h, theta + h * k3);
        let k4 = slope(r + h, vr, vt)?;
        theta += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        r += h;
    }
    Ok(theta)
}

/// Transport solve: `omega(r, theta) = omega0(theta_0(r, theta))` at every
/// node, with the inner ring equal to `omega0` at the nodes exactly.
pub fn solve_transport(
    p: &TransportProblem,
    grid: AnnulusGrid,
    cfg: &FixedPointConfig,
) -> Result<ScalarField> {
    cfg.validate()?;
    // Through-flow positivity at the nodes before launching characteristics.
    for i in 0..grid.nr() {
        let r = grid.r(i);
        for j in 0..grid.ntheta() {
            if 1.0 + r * p.vhat.vr().get(i, j) <= 0.0 {
                return Err(SolverError::ThroughflowSignChange { r });
            }
        }
    }
    let sampler = VelocitySampler::new(&p.vhat, cfg.ode_steps_per_cell);
    let nt = grid.ntheta();
    let rows: Vec<Vec<f64>> = POOL.install(|| {
        (0..grid.nr())
            .into_par_iter()
            .map(|i| -> Result<Vec<f64>> {
                let spc = sampler.steps_per_cell();
                let mut row = vec![0.0; nt];
                for (j, slot) in row.iter_mut().enumerate() {
                    let theta0 = if i == 0 {
                        grid.theta(j)
                    } else {
                        backtrace_on_ladder(&sampler, 2 * spc * i, grid.theta(j))?
                    };
                    *slot = p.omega0.eval(theta0);
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut out = ndarray::Array2::zeros((grid.nr(), nt));
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    ScalarField::from_values(grid, out)
}

fn positive_throughflow_row(f0: &BoundaryFunction, n: usize) -> Result<Vec<f64>> {
    let dtheta = std::f64::consts::TAU / n as f64;
    let mut row = vec![0.0; n];
    for (j, slot) in row.iter_mut().enumerate() {
        let theta = j as f64 * dtheta;
        let value = 1.0 + f0.eval(theta);
        if value <= 0.0 {
            return Err(SolverError::NonPositiveThroughflow { theta, value });
        }
        *slot = value;
    }
    Ok(row)
}

/// Inner vorticity trace for the pressure boundary conditions (BC4/BC5):
/// `omega0 = -f0'/r0^2 - p0'/(1+f0) - (|v_theta(r0,.)|^2)'/(2(1+f0))`,
/// with exact Fourier derivatives of the data and a spectral derivative of
/// the sampled velocity row, projected back to `modes` Fourier modes.
pub fn omega0_pressure_form(
    f0: &BoundaryFunction,
    p0: &BoundaryFunction,
    vtheta_inner: &[f64],
    r0: f64,
    modes: usize,
) -> Result<BoundaryFunction> {
    let n = vtheta_inner.len();
    let through = positive_throughflow_row(f0, n)?;
    let f0p = f0.derivative();
    let p0p = p0.derivative();
    let sq: Vec<f64> = vtheta_inner.iter().map(|v| v * v).collect();
    let dsq = spectral::derivative_samples(&sq);
    let dtheta = std::f64::consts::TAU / n as f64;
    let row: Vec<f64> = (0..n)
        .map(|j| {
            let theta = j as f64 * dtheta;
            -f0p.eval(theta) / (r0 * r0)
                - p0p.eval(theta) / through[j]
                - dsq[j] / (2.0 * through[j])
        })
        .collect();
    Ok(BoundaryFunction::from_samples(&row, modes))
}

/// Inner vorticity trace for the Bernoulli boundary conditions
/// (BC1*/BC2*/BC3): `omega0 = -b0' / (1 + f0)`.
pub fn omega0_bernoulli_form(
    f0: &BoundaryFunction,
    b0: &BoundaryFunction,
    samples: usize,
    modes: usize,
) -> Result<BoundaryFunction> {
    let through = positive_throughflow_row(f0, samples)?;
    let b0p = b0.derivative();
    let dtheta = std::f64::consts::TAU / samples as f64;
    let row: Vec<f64> = (0..samples)
        .map(|j| -b0p.eval(j as f64 * dtheta) / through[j])
        .collect();
    Ok(BoundaryFunction::from_samples(&row, modes))
}

/// Outer-flux update for BC5 and the BC3 transport route:
/// `R = -r1^2 omega(r1,.) - r1^2 p1'/(1+f) - r1^2 (|v_theta(r1,.)|^2)'/(2(1+f))`,
/// `f1(theta) = f1(0) + int_0^theta (R - R_ave)` with `f1(0)` fixed by the
/// mean formula so that `int f1 = J0` holds exactly.
pub fn f1_update(
    vtheta_outer: &[f64],
    f1_hat: &BoundaryFunction,
    omega_outer: &[f64],
    p1prime: &BoundaryFunction,
    j0_flux: f64,
    r1: f64,
    modes: usize,
) -> Result<OuterFluxState> {
    let n = vtheta_outer.len();
    assert_eq!(omega_outer.len(), n);
    let through = positive_throughflow_row(f1_hat, n)?;
    let sq: Vec<f64> = vtheta_outer.iter().map(|v| v * v).collect();
    let dsq = spectral::derivative_samples(&sq);
    let dtheta = std::f64::consts::TAU / n as f64;
    let r1sq = r1 * r1;
    let row: Vec<f64> = (0..n)
        .map(|j| {
            let theta = j as f64 * dtheta;
            -r1sq * omega_outer[j]
                - r1sq * p1prime.eval(theta) / through[j]
                - r1sq * dsq[j] / (2.0 * through[j])
        })
        .collect();
    let r = BoundaryFunction::from_samples(&row, modes);
    let rave = r.average();
    let jbar0 = j0_flux / std::f64::consts::TAU;
    let f1 = crate::grad_shafranov::outer_flux_from_integrand(&row, jbar0, modes);
    debug_assert!((f1.integral() - j0_flux).abs() <= 1e-10 * (1.0 + j0_flux.abs()));
    Ok(OuterFluxState { f1, rave })
}

/// Outer flux determined by the Bernoulli diffeomorphism (BC2*):
/// `f1 = -1 + T' + f0(T) T'`. Change of variables gives
/// `int f1 = int f0` exactly; the sampled projection reproduces it to
/// spectral accuracy.
pub fn f1_from_diffeo(
    t: &Diffeo,
    f0: &BoundaryFunction,
    samples: usize,
    modes: usize,
) -> Result<BoundaryFunction> {
    t.check_monotone(samples)?;
    let dtheta = std::f64::consts::TAU / samples as f64;
    let row: Vec<f64> = (0..samples)
        .map(|j| {
            let theta = j as f64 * dtheta;
            let tp = t.derivative_at(theta);
            -1.0 + tp + f0.eval(t.eval(theta)) * tp
        })
        .collect();
    Ok(BoundaryFunction::from_samples(&row, modes))
}

/// Boundary-condition family solved by [`fixed_point`]. All data are in the
/// normalized perturbation form: the physical through-flows are `1 + f0`,
/// `1 + f1`, the reference pressure `-1/(2 r^2)` is subtracted from the
/// pressure data, and `b0` is the full Bernoulli trace.
#[derive(Debug, Clone)]
pub enum FixedPointProblem {
    /// Flux on both circles, inner pressure.
    Bc4 {
        f0: BoundaryFunction,
        f1: BoundaryFunction,
        p0: BoundaryFunction,
        j0: f64,
    },
    /// Inner flux and pressure, outer tangential pressure derivative.
    Bc5 {
        f0: BoundaryFunction,
        p0: BoundaryFunction,
        p1prime: BoundaryFunction,
        j0: f64,
    },
    /// Flux on both circles, inner Bernoulli trace.
    Bc1Star {
        f0: BoundaryFunction,
        f1: BoundaryFunction,
        b0: BoundaryFunction,
        j0: f64,
    },
    /// Inner flux and Bernoulli trace, outer Bernoulli trace through `T`.
    Bc2Star {
        f0: BoundaryFunction,
        b0: BoundaryFunction,
        t: Diffeo,
    },
    /// Inner flux and Bernoulli trace, outer tangential pressure derivative.
    Bc3Vt {
        f0: BoundaryFunction,
        b0: BoundaryFunction,
        p1prime: BoundaryFunction,
        j0: f64,
    },
}

impl FixedPointProblem {
    pub fn f0(&self) -> &BoundaryFunction {
        match self {
            FixedPointProblem::Bc4 { f0, .. }
            | FixedPointProblem::Bc5 { f0, .. }
            | FixedPointProblem::Bc1Star { f0, .. }
            | FixedPointProblem::Bc2Star { f0, .. }
            | FixedPointProblem::Bc3Vt { f0, .. } => f0,
        }
    }

    fn data_norm(&self) -> f64 {
        match self {
            FixedPointProblem::Bc4 { f0, f1, p0, j0 } => {
                f0.l1_bound() + f1.l1_bound() + p0.l1_bound() + j0.abs()
            }
            FixedPointProblem::Bc5 {
                f0,
                p0,
                p1prime,
                j0,
            } => f0.l1_bound() + p0.l1_bound() + p1prime.l1_bound() + j0.abs(),
            FixedPointProblem::Bc1Star { f0, f1, b0, j0 } => {
                f0.l1_bound() + f1.l1_bound() + b0.l1_bound() + j0.abs()
            }
            FixedPointProblem::Bc2Star { f0, b0, t } => {
                f0.l1_bound() + b0.l1_bound() + t.shift().l1_bound()
            }
            FixedPointProblem::Bc3Vt {
                f0,
                b0,
                p1prime,
                j0,
            } => f0.l1_bound() + b0.l1_bound() + p1prime.l1_bound() + j0.abs(),
        }
    }

    fn reconstructs_f1(&self) -> bool {
        matches!(
            self,
            FixedPointProblem::Bc5 { .. } | FixedPointProblem::Bc3Vt { .. }
        )
    }
}

/// Converged output of the vorticity-transport fixed point.
#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    /// Total velocity `(1/r + v_r, v_theta)`.
    pub u: PolarVectorField,
    /// Perturbation velocity.
    pub v: PolarVectorField,
    pub omega: ScalarField,
    pub omega0: BoundaryFunction,
    pub f1: BoundaryFunction,
    /// Circulation datum used by the div-curl solves (derived from `T` for
    /// BC2*).
    pub j0: f64,
    pub trace: IterationTrace,
}

/// Runs the vorticity-transport iteration for the requested family:
/// inner vorticity trace, transport solve under the current iterate,
/// outer-flux determination, div-curl recovery. Convergence is declared on
/// the sup-norm of the velocity update (plus the outer-flux update where
/// that is reconstructed).
pub fn fixed_point(
    problem: &FixedPointProblem,
    grid: AnnulusGrid,
    cfg: &FixedPointConfig,
) -> Result<FixedPointSolution> {
    cfg.validate()?;
    let nt = grid.ntheta();
    let modes = cfg.mode_cap(grid);
    let gate = 4 * nt;
    let f0 = problem.f0();
    positive_throughflow_row(f0, gate)?;
    let j0_flux = f0.integral();

    // Per-kind fixed data.
    let (fixed_f1, j0) = match problem {
        FixedPointProblem::Bc4 { f1, j0, .. } | FixedPointProblem::Bc1Star { f1, j0, .. } => {
            let defect = f0.integral() - f1.integral();
            let tol = crate::elliptic::flux_tolerance(j0_flux);
            if defect.abs() > tol {
                return Err(SolverError::FluxMismatch { defect, tol });
            }
            positive_throughflow_row(f1, gate)?;
            (Some(f1.clone()), *j0)
        }
        FixedPointProblem::Bc2Star { f0, t, .. } => {
            let f1 = f1_from_diffeo(t, f0, gate, modes)?;
            // The outer Dirichlet row of the auxiliary stream pins the
            // segment circulation to -phi0(T(0)) with the normalized
            // inner stream phi0(theta) = theta + int_0^theta f0.
            let phi0 = build_phi0(f0, true, gate)?;
            (Some(f1), -phi0.eval(t.eval(0.0)))
        }
        FixedPointProblem::Bc5 { j0, .. } | FixedPointProblem::Bc3Vt { j0, .. } => (None, *j0),
    };

    let bernoulli_omega0 = match problem {
        FixedPointProblem::Bc1Star { b0, .. }
        | FixedPointProblem::Bc2Star { b0, .. }
        | FixedPointProblem::Bc3Vt { b0, .. } => {
            Some(omega0_bernoulli_form(f0, b0, nt, modes)?)
        }
        _ => None,
    };

    let mut trace = IterationTrace {
        smallness_warning: problem.data_norm() > cfg.smallness_cap,
        ..Default::default()
    };

    let jbar0 = j0_flux / std::f64::consts::TAU;
    let mut vhat = PolarVectorField::zeros(grid);
    let mut f1_hat = fixed_f1
        .clone()
        .unwrap_or_else(|| BoundaryFunction::constant(jbar0));
    let mut omega = ScalarField::zeros(grid);
    let mut omega0 = BoundaryFunction::constant(0.0);
    let mut rave = 0.0;

    for k in 1..=cfg.max_iters {
        // (1) Inner vorticity trace for this iterate.
        omega0 = match problem {
            FixedPointProblem::Bc4 { p0, .. } | FixedPointProblem::Bc5 { p0, .. } => {
                omega0_pressure_form(f0, p0, &vhat.vtheta().ring(0), grid.r0(), modes)?
            }
            _ => bernoulli_omega0.clone().expect("fixed trace"),
        };

        // (2) Vorticity transported along the current characteristics.
        omega = solve_transport(
            &TransportProblem {
                vhat: vhat.clone(),
                omega0: omega0.clone(),
            },
            grid,
            cfg,
        )?;

        // (3) Outer flux.
        let f1_next = if let Some(f1) = &fixed_f1 {
            f1.clone()
        } else {
            let p1prime = match problem {
                FixedPointProblem::Bc5 { p1prime, .. }
                | FixedPointProblem::Bc3Vt { p1prime, .. } => p1prime,
                _ => unreachable!(),
            };
            let top = grid.nr() - 1;
            let state = f1_update(
                &vhat.vtheta().ring(top),
                &f1_hat,
                &omega.ring(top),
                p1prime,
                j0_flux,
                grid.r1(),
                modes,
            )?;
            rave = state.rave;
            state.f1
        };

        // (4) Velocity recovery.
        let v = solve_div_curl(&DivCurlProblem {
            grid,
            omega: omega.clone(),
            f0: f0.clone(),
            f1: f1_next.clone(),
            j0,
        })?;

        let mut update = v.distance(&vhat);
        if problem.reconstructs_f1() {
            let df = (0..nt)
                .map(|j| (f1_next.eval(grid.theta(j)) - f1_hat.eval(grid.theta(j))).abs())
                .fold(0.0f64, f64::max);
            update += df;
            debug_assert!((f1_next.integral() - j0_flux).abs() <= 1e-10 * (1.0 + j0_flux.abs()));
        }
        vhat = v;
        f1_hat = f1_next;
        trace.updates.push(update);
        trace.iterations = k;
        if update <= cfg.fp_tol {
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
    if problem.reconstructs_f1() {
        trace.rave_final = Some(rave);
    }

    let u = PolarVectorField::new(
        ScalarField::from_fn(grid, |r, _| 1.0 / r).zip_with(vhat.vr(), |a, b| a + b),
        vhat.vtheta().clone(),
    );
    Ok(FixedPointSolution {
        u,
        v: vhat,
        omega,
        omega0,
        f1: f1_hat,
        j0,
        trace,
    })
}
