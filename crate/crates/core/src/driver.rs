//! The executable surface: dispatching a [`RunConfig`] to the solvers,
//! assembling the report, emitting artifacts, verifying emitted fields and
//! running convergence studies.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bernoulli::OuterKind;
use crate::config::{parse_grid_spec, BcKind, Method, RunConfig};
use crate::error::{Result, SolverError};
use crate::field::{
    self, spectral, theta_quadrature, AnnulusGrid, BoundaryFunction, Diffeo, PolarVectorField,
    ScalarField,
};
use crate::grad_shafranov::{self, GsSolution};
use crate::io::{read_field, write_field};
use crate::pressure::{self, PressureAnchor, PressurePath};
use crate::report::{IterationTrace, SolveReport};
use crate::residual::euler_residual;
use crate::transport::{fixed_point, FixedPointProblem, FixedPointSolution};

/// Velocity, pressure and vorticity of a completed solve.
#[derive(Debug, Clone)]
pub struct SolvedFields {
    pub u: PolarVectorField,
    pub p: ScalarField,
    pub omega: ScalarField,
}

/// Everything a run produces. When both routes are requested the
/// vorticity-transport fields are primary and the stream-function fields are
/// carried as the labeled secondary set.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: SolveReport,
    pub fields: SolvedFields,
    pub secondary: Option<(String, SolvedFields)>,
}

impl RunOutcome {
    /// True when a compatibility gate was evaluated and rejected the datum.
    pub fn compat_rejected(&self) -> bool {
        self.report.compat_ok == Some(false)
    }
}

fn gs_outer_kind(config: &RunConfig) -> OuterKind {
    match config.bc_kind {
        BcKind::Bc2 | BcKind::Bc2Star => {
            OuterKind::Diffeo(Diffeo::new(config.data.series("T_shift")))
        }
        _ => OuterKind::Flux {
            f1: match config.bc_kind {
                // Starred data are perturbations of the unit through-flow.
                BcKind::Bc1Star => config.data.series("f1").add_constant(1.0),
                _ => config.data.series("f1"),
            },
            j0: config.data.j0,
        },
    }
}

fn solve_gs_route(config: &RunConfig, grid: AnnulusGrid) -> Result<(SolvedFields, GsSolution)> {
    let cfg = config.solver.gs_config();
    let b0 = config.data.series("b0");
    let solution = match config.bc_kind {
        BcKind::Bc1 | BcKind::Bc2 => {
            let f0 = config.data.series("f0");
            grad_shafranov::solve_bc12(&f0, &gs_outer_kind(config), &b0, grid, &cfg)?
        }
        BcKind::Bc1Star | BcKind::Bc2Star => {
            let f0 = config.data.series("f0").add_constant(1.0);
            grad_shafranov::solve_bc12(&f0, &gs_outer_kind(config), &b0, grid, &cfg)?
        }
        BcKind::Bc3 => {
            let f0 = config.data.series("f0");
            let p1prime = config.data.series("p1").derivative();
            grad_shafranov::solve_bc3(&f0, &b0, &p1prime, config.data.j0, grid, &cfg)?
        }
        other => {
            return Err(SolverError::Config(format!(
                "the stream-function route does not support {}",
                other.as_str()
            )))
        }
    };
    let u = grad_shafranov::velocity_from_stream(&solution.stream);
    let p = grad_shafranov::pressure_from_stream(&solution.stream, &solution.profile, &u);
    let omega = field::polar_curl(&u);
    Ok((SolvedFields { u, p, omega }, solution))
}

fn vt_problem(config: &RunConfig) -> Result<FixedPointProblem> {
    let d = &config.data;
    Ok(match config.bc_kind {
        BcKind::Bc4 => FixedPointProblem::Bc4 {
            f0: d.series("f0"),
            f1: d.series("f1"),
            p0: d.series("p0"),
            j0: d.j0,
        },
        BcKind::Bc5 | BcKind::Bc5Prime => FixedPointProblem::Bc5 {
            f0: d.series("f0"),
            p0: d.series("p0"),
            p1prime: d.p1_anchored().derivative(),
            j0: d.j0,
        },
        BcKind::Bc1Star => FixedPointProblem::Bc1Star {
            f0: d.series("f0"),
            f1: d.series("f1"),
            b0: d.series("b0"),
            j0: d.j0,
        },
        BcKind::Bc2Star => FixedPointProblem::Bc2Star {
            f0: d.series("f0"),
            b0: d.series("b0"),
            t: Diffeo::new(d.series("T_shift")),
        },
        BcKind::Bc3 | BcKind::Bc3Prime => FixedPointProblem::Bc3Vt {
            f0: d.series("f0"),
            b0: d.series("b0"),
            p1prime: d.p1_anchored().derivative(),
            j0: d.j0,
        },
        other => {
            return Err(SolverError::Config(format!(
                "the vorticity-transport route does not support {}",
                other.as_str()
            )))
        }
    })
}

fn vt_pressure_anchor<'a>(
    kind: BcKind,
    data: &'a crate::config::DataSpec,
    u: &'a PolarVectorField,
    b0: &'a BoundaryFunction,
    p0: &'a BoundaryFunction,
) -> PressureAnchor<'a> {
    let _ = data;
    match kind {
        BcKind::Bc4 | BcKind::Bc5 | BcKind::Bc5Prime => PressureAnchor::InnerPressure { p0 },
        _ => PressureAnchor::Bernoulli { b0, u },
    }
}

fn solve_vt_route(
    config: &RunConfig,
    grid: AnnulusGrid,
) -> Result<(SolvedFields, FixedPointSolution)> {
    let problem = vt_problem(config)?;
    let solution = fixed_point(&problem, grid, &config.solver.fp_config())?;
    let acc = pressure::compute_acceleration(&solution.u);
    let g = pressure::integrate_g(&acc, PressurePath::RadialThenArc)?;
    let b0 = config.data.series("b0");
    let p0 = config.data.series("p0");
    let anchor = vt_pressure_anchor(config.bc_kind, &config.data, &solution.u, &b0, &p0);
    let p = pressure::pressure_normalize(&g, anchor);
    Ok((
        SolvedFields {
            u: solution.u.clone(),
            p,
            omega: solution.omega.clone(),
        },
        solution,
    ))
}

fn ring_flux(u: &PolarVectorField, i: usize) -> f64 {
    let grid = u.grid();
    let row: Vec<f64> = (0..grid.ntheta())
        .map(|j| grid.r(i) * u.vr().get(i, j))
        .collect();
    theta_quadrature(&row)
}

/// Max relative deviation of the per-ring flux from the inner-ring flux.
pub fn flux_defect(u: &PolarVectorField) -> f64 {
    let base = ring_flux(u, 0);
    (0..u.grid().nr())
        .map(|i| (ring_flux(u, i) - base).abs() / (1.0 + base.abs()))
        .fold(0.0, f64::max)
}

/// Composite-trapezoid circulation along the segment `theta = 0`.
pub fn segment_circulation(u: &PolarVectorField) -> f64 {
    let grid = u.grid();
    let mut acc = 0.0;
    for i in 0..grid.nr() - 1 {
        acc += 0.5 * (u.vtheta().get(i, 0) + u.vtheta().get(i + 1, 0)) * grid.dr();
    }
    acc
}

fn row_sup(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0f64, |m, v| m.max(v.abs()))
}

fn bc_residuals(
    config: &RunConfig,
    fields: &SolvedFields,
    f1_final: Option<&BoundaryFunction>,
    j0_used: f64,
) -> BTreeMap<String, f64> {
    let grid = fields.u.grid();
    let nt = grid.ntheta();
    let top = grid.nr() - 1;
    let d = &config.data;
    let kind = config.bc_kind;
    let mut out = BTreeMap::new();

    let normalized = !matches!(kind, BcKind::Bc1 | BcKind::Bc2);
    let base = if normalized { 1.0 } else { 0.0 };
    let f0 = d.series("f0");
    out.insert(
        "inner_flux".into(),
        row_sup((0..nt).map(|j| {
            grid.r0() * fields.u.vr().get(0, j) - (base + f0.eval(grid.theta(j)))
        })),
    );
    if let Some(f1) = f1_final {
        out.insert(
            "outer_flux".into(),
            row_sup((0..nt).map(|j| {
                grid.r1() * fields.u.vr().get(top, j) - (base + f1.eval(grid.theta(j)))
            })),
        );
    }
    out.insert(
        "circulation".into(),
        (segment_circulation(&fields.u) - j0_used).abs(),
    );

    let bernoulli = |i: usize, j: usize| {
        0.5 * (fields.u.vr().get(i, j).powi(2) + fields.u.vtheta().get(i, j).powi(2))
            + fields.p.get(i, j)
    };
    match kind {
        BcKind::Bc1 | BcKind::Bc2 | BcKind::Bc1Star | BcKind::Bc2Star | BcKind::Bc3
        | BcKind::Bc3Prime => {
            let b0 = d.series("b0");
            out.insert(
                "inner_bernoulli".into(),
                row_sup((0..nt).map(|j| bernoulli(0, j) - b0.eval(grid.theta(j)))),
            );
            if matches!(kind, BcKind::Bc2 | BcKind::Bc2Star) {
                let t = Diffeo::new(d.series("T_shift"));
                out.insert(
                    "outer_bernoulli".into(),
                    row_sup((0..nt).map(|j| bernoulli(top, j) - b0.eval(t.eval(grid.theta(j))))),
                );
            }
        }
        BcKind::Bc4 | BcKind::Bc5 | BcKind::Bc5Prime => {
            let p0 = d.series("p0");
            let r0sq = grid.r0() * grid.r0();
            out.insert(
                "inner_pressure".into(),
                row_sup((0..nt).map(|j| {
                    fields.p.get(0, j) - (-0.5 / r0sq + p0.eval(grid.theta(j)))
                })),
            );
        }
    }
    if matches!(
        kind,
        BcKind::Bc3 | BcKind::Bc3Prime | BcKind::Bc5 | BcKind::Bc5Prime
    ) {
        let p1prime = d.p1_anchored().derivative();
        let dp = spectral::derivative_samples(&fields.p.ring(top));
        out.insert(
            "outer_pressure_deriv".into(),
            row_sup((0..nt).map(|j| dp[j] - p1prime.eval(grid.theta(j)))),
        );
    }
    if matches!(kind, BcKind::Bc3Prime | BcKind::Bc5Prime) {
        let p1 = d.p1_anchored();
        let r1sq = grid.r1() * grid.r1();
        out.insert(
            "outer_pressure".into(),
            row_sup((0..nt).map(|j| {
                fields.p.get(top, j) - (-0.5 / r1sq + p1.eval(grid.theta(j)))
            })),
        );
    }
    out
}

fn finish_report(
    config: &RunConfig,
    fields: &SolvedFields,
    trace: &IterationTrace,
    f1_final: Option<&BoundaryFunction>,
    j0_used: f64,
) -> SolveReport {
    let res = euler_residual(&fields.u, &fields.p);
    SolveReport {
        bc_kind: config.bc_kind.as_str().into(),
        method: config.method.as_str().into(),
        grid: fields.u.grid().into(),
        converged: trace.converged,
        iterations: trace.iterations,
        update_trace: trace.updates.clone(),
        euler_residual_inf: res.sup_norm(),
        bc_residuals: bc_residuals(config, fields, f1_final, j0_used),
        flux_defect: flux_defect(&fields.u),
        rave_final: trace.rave_final,
        compat_gap: None,
        compat_ok: None,
        energy_trace: trace.energy.clone(),
        cross_method_gap_u: None,
        cross_method_gap_p: None,
        smallness_warning: trace.smallness_warning,
        f1_final: f1_final.cloned(),
    }
}

/// Sup-norm gap between two pressure fields modulo an additive constant.
pub fn pressure_gap_mod_const(a: &ScalarField, b: &ScalarField) -> f64 {
    let diff = a.zip_with(b, |x, y| x - y);
    let mean = diff.values().iter().sum::<f64>() / diff.values().len() as f64;
    diff.map(|v| v - mean).sup_norm()
}

/// Dispatches the requested solver(s) and assembles the report. Compatibility
/// rejection of the primed variants is reported in-band (`compat_ok = false`)
/// rather than as an error, so the gap lands in the report.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let grid = config.grid.build()?;
    match config.method {
        Method::GradShafranov => {
            let (fields, solution) = solve_gs_route(config, grid)?;
            let j0_used = solution.realized_j0;
            let report = finish_report(
                config,
                &fields,
                &solution.trace,
                solution.f1.as_ref(),
                j0_used,
            );
            Ok(RunOutcome {
                report,
                fields,
                secondary: None,
            })
        }
        Method::VortexTransport => {
            let (fields, solution) = solve_vt_route(config, grid)?;
            let mut report = finish_report(
                config,
                &fields,
                &solution.trace,
                Some(&solution.f1),
                solution.j0,
            );
            if matches!(config.bc_kind, BcKind::Bc3Prime | BcKind::Bc5Prime) {
                let p1 = config.data.p1_anchored();
                match pressure::trace_and_compat(&fields.p, &p1, config.solver.compat_tol) {
                    Ok(check) => {
                        report.compat_gap = Some(check.gap);
                        report.compat_ok = Some(true);
                    }
                    Err(SolverError::CompatibilityMismatch { gap }) => {
                        report.compat_gap = Some(gap);
                        report.compat_ok = Some(false);
                    }
                    Err(other) => return Err(other),
                }
            }
            Ok(RunOutcome {
                report,
                fields,
                secondary: None,
            })
        }
        Method::Both => {
            let vt_config = RunConfig {
                method: Method::VortexTransport,
                ..config.clone()
            };
            let gs_config = RunConfig {
                method: Method::GradShafranov,
                ..config.clone()
            };
            let (vt_fields, vt_solution) = solve_vt_route(&vt_config, grid)?;
            let (gs_fields, _gs_solution) = solve_gs_route(&gs_config, grid)?;
            let mut report = finish_report(
                config,
                &vt_fields,
                &vt_solution.trace,
                Some(&vt_solution.f1),
                vt_solution.j0,
            );
            report.method = "both".into();
            report.cross_method_gap_u = Some(vt_fields.u.distance(&gs_fields.u));
            report.cross_method_gap_p = Some(pressure_gap_mod_const(&vt_fields.p, &gs_fields.p));
            Ok(RunOutcome {
                report,
                fields: vt_fields,
                secondary: Some(("grad_shafranov".into(), gs_fields)),
            })
        }
    }
}

/// Writes the fields and report of a run into `dir` (created if absent):
/// `u_r.csv`, `u_theta.csv`, `p.csv`, `vorticity.csv`, `report.json`, plus a
/// labeled subdirectory for the secondary route when both ran.
pub fn emit(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    emit_fields(&outcome.fields, dir)?;
    let json = serde_json::to_string_pretty(&outcome.report)
        .map_err(|e| SolverError::Config(format!("report serialization: {e}")))?;
    fs::write(dir.join("report.json"), json + "\n")?;
    if let Some((label, fields)) = &outcome.secondary {
        let sub = dir.join(label);
        fs::create_dir_all(&sub)?;
        emit_fields(fields, &sub)?;
    }
    Ok(())
}

fn emit_fields(fields: &SolvedFields, dir: &Path) -> Result<()> {
    write_field(&dir.join("u_r.csv"), fields.u.vr())?;
    write_field(&dir.join("u_theta.csv"), fields.u.vtheta())?;
    write_field(&dir.join("p.csv"), &fields.p)?;
    write_field(&dir.join("vorticity.csv"), &fields.omega)?;
    Ok(())
}

/// Residuals recomputed from emitted field files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub euler_residual_inf: f64,
    pub momentum_r_inf: f64,
    pub momentum_theta_inf: f64,
    pub divergence_inf: f64,
    pub flux_defect: f64,
    /// Difference against the stored report, when one was found.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round_trip_ok: Option<bool>,
}

/// Reads emitted fields back and recomputes the residuals; when a report is
/// present the recomputed residual must reproduce the stored number to
/// 1e-12.
pub fn verify_dir(dir: &Path) -> Result<VerifyOutcome> {
    let ur = read_field(&dir.join("u_r.csv"))?;
    let ut = read_field(&dir.join("u_theta.csv"))?;
    let p = read_field(&dir.join("p.csv"))?;
    let u = PolarVectorField::new(ur, ut);
    let res = euler_residual(&u, &p);
    let mut out = VerifyOutcome {
        euler_residual_inf: res.sup_norm(),
        momentum_r_inf: res.momentum_r.sup_norm(),
        momentum_theta_inf: res.momentum_theta.sup_norm(),
        divergence_inf: res.divergence.sup_norm(),
        flux_defect: flux_defect(&u),
        report_gap: None,
        round_trip_ok: None,
    };
    let report_path = dir.join("report.json");
    if report_path.exists() {
        let text = fs::read_to_string(&report_path)?;
        let report: SolveReport = serde_json::from_str(&text)
            .map_err(|e| SolverError::Config(format!("report parse: {e}")))?;
        let gap = (report.euler_residual_inf - out.euler_residual_inf).abs();
        out.report_gap = Some(gap);
        out.round_trip_ok = Some(gap <= 1e-12);
    }
    Ok(out)
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceLevel {
    pub nr: usize,
    pub ntheta: usize,
    pub dr: f64,
    pub err_u: f64,
    pub err_p: f64,
    pub residual_inf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub levels: Vec<ConvergenceLevel>,
    /// Least-squares slopes of log error against log dr; NaN when the
    /// errors sit at round-off (serialized as null).
    pub order_u: f64,
    pub order_p: f64,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("nr,ntheta,dr,err_u,err_p,residual_inf\n");
        for l in &self.levels {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                l.nr, l.ntheta, l.dr, l.err_u, l.err_p, l.residual_inf
            ));
        }
        s
    }
}

struct FieldSampler {
    grid: AnnulusGrid,
    rows: Vec<Vec<rustfft::num_complex::Complex64>>,
}

impl FieldSampler {
    fn new(f: &ScalarField) -> Self {
        let grid = f.grid();
        let rows = (0..grid.nr()).map(|i| spectral::spectrum(&f.ring(i))).collect();
        Self { grid, rows }
    }

    fn eval(&self, r: f64, theta: f64) -> f64 {
        let nr = self.grid.nr();
        let s = ((r - self.grid.r0()) / self.grid.dr()).clamp(0.0, (nr - 1) as f64);
        let cell = (s.floor() as usize).min(nr - 2);
        let base = cell.saturating_sub(1).min(nr - 4);
        let w = crate::transport::cubic_weights(s - base as f64);
        let nt = self.grid.ntheta();
        (0..4)
            .map(|k| w[k] * spectral::eval(&self.rows[base + k], nt, theta))
            .sum()
    }
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

enum ErrorOracle {
    BaseFlow,
    Swirl { a: f64, c: f64 },
    Reference(Box<SolvedFields>),
}

impl ErrorOracle {
    fn errors(&self, fields: &SolvedFields) -> (f64, f64) {
        let grid = fields.u.grid();
        match self {
            ErrorOracle::BaseFlow => {
                let u = PolarVectorField::from_fns(grid, |r, _| 1.0 / r, |_, _| 0.0);
                let p = ScalarField::from_fn(grid, |r, _| -0.5 / (r * r));
                (
                    fields.u.distance(&u),
                    pressure_gap_mod_const(&fields.p, &p),
                )
            }
            ErrorOracle::Swirl { a, c } => {
                let (a, c) = (*a, *c);
                let u = PolarVectorField::from_fns(grid, move |r, _| a / r, move |r, _| c / r);
                let p =
                    ScalarField::from_fn(grid, move |r, _| -(a * a + c * c) / (2.0 * r * r));
                (
                    fields.u.distance(&u),
                    pressure_gap_mod_const(&fields.p, &p),
                )
            }
            ErrorOracle::Reference(reference) => {
                let sur = FieldSampler::new(reference.u.vr());
                let sut = FieldSampler::new(reference.u.vtheta());
                let sp = FieldSampler::new(&reference.p);
                let mut eu: f64 = 0.0;
                let mut diffs = Vec::with_capacity(grid.nr() * grid.ntheta());
                for i in 0..grid.nr() {
                    for j in 0..grid.ntheta() {
                        let (r, t) = (grid.r(i), grid.theta(j));
                        eu = eu
                            .max((fields.u.vr().get(i, j) - sur.eval(r, t)).abs())
                            .max((fields.u.vtheta().get(i, j) - sut.eval(r, t)).abs());
                        diffs.push(fields.p.get(i, j) - sp.eval(r, t));
                    }
                }
                let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
                let ep = diffs.iter().fold(0.0f64, |m, d| m.max((d - mean).abs()));
                (eu, ep)
            }
        }
    }
}

/// Runs the configured problem on each refinement level and fits the
/// observed order of accuracy. Levels are `NRxNT` strings; at least three
/// are required. The error oracle comes from the config's `[convergence]`
/// table (`base_flow`, `swirl`, or self-convergence against a solve at twice
/// the finest resolution).
pub fn convergence_study(config: &RunConfig, levels: &[String]) -> Result<ConvergenceTable> {
    if levels.len() < 3 {
        return Err(SolverError::Config(
            "a convergence study needs at least 3 refinement levels".into(),
        ));
    }
    if config.method == Method::Both {
        return Err(SolverError::Config(
            "pick one method for a convergence study".into(),
        ));
    }
    let mut parsed = Vec::new();
    for spec in levels {
        parsed.push(parse_grid_spec(spec)?);
    }

    let conv = config.convergence.clone().unwrap_or_default();
    let oracle = match conv.oracle.as_deref() {
        Some("base_flow") => ErrorOracle::BaseFlow,
        Some("swirl") => ErrorOracle::Swirl {
            a: conv.swirl_a.ok_or_else(|| {
                SolverError::Config("swirl oracle needs swirl_a".into())
            })?,
            c: conv.swirl_c.unwrap_or(0.0),
        },
        Some("none") | None => {
            let (nr_max, nt_max) = *parsed
                .iter()
                .max_by_key(|(nr, _)| *nr)
                .expect("nonempty levels");
            let mut ref_config = config.clone();
            ref_config.grid.nr = 2 * (nr_max - 1) + 1;
            ref_config.grid.ntheta = 2 * nt_max;
            let outcome = run(&ref_config)?;
            ErrorOracle::Reference(Box::new(outcome.fields))
        }
        Some(other) => {
            return Err(SolverError::Config(format!(
                "unknown convergence oracle '{other}'"
            )))
        }
    };

    let mut table = ConvergenceTable {
        levels: Vec::new(),
        order_u: f64::NAN,
        order_p: f64::NAN,
    };
    for (nr, nt) in parsed {
        let mut level_config = config.clone();
        level_config.grid.nr = nr;
        level_config.grid.ntheta = nt;
        let outcome = run(&level_config)?;
        let (err_u, err_p) = oracle.errors(&outcome.fields);
        table.levels.push(ConvergenceLevel {
            nr,
            ntheta: nt,
            dr: outcome.fields.u.grid().dr(),
            err_u,
            err_p,
            residual_inf: outcome.report.euler_residual_inf,
        });
    }

    // Orders are meaningful only above round-off.
    let floor = 1e-13;
    if table.levels.iter().all(|l| l.err_u > floor) {
        let xs: Vec<f64> = table.levels.iter().map(|l| l.dr.ln()).collect();
        let ys: Vec<f64> = table.levels.iter().map(|l| l.err_u.ln()).collect();
        table.order_u = lsq_slope(&xs, &ys);
    }
    if table.levels.iter().all(|l| l.err_p > floor) {
        let xs: Vec<f64> = table.levels.iter().map(|l| l.dr.ln()).collect();
        let ys: Vec<f64> = table.levels.iter().map(|l| l.err_p.ln()).collect();
        table.order_p = lsq_slope(&xs, &ys);
    }
    Ok(table)
}
