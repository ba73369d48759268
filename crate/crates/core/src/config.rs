//! Run configuration: the machine form of the boundary-condition table plus
//! solver controls, read from a human-readable TOML document with flat
//! tables of Fourier coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::field::{AnnulusGrid, BoundaryFunction};
use crate::grad_shafranov::GsConfig;
use crate::transport::FixedPointConfig;

/// Boundary-condition family. Unstarred BC1/BC2 take the full through-flow
/// `f0` (positive); the starred and numbered-4/5 families take perturbation
/// data around the reference flow (through-flow `1 + f0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BcKind {
    #[serde(rename = "BC1")]
    Bc1,
    #[serde(rename = "BC2")]
    Bc2,
    #[serde(rename = "BC3")]
    Bc3,
    #[serde(rename = "BC3prime")]
    Bc3Prime,
    #[serde(rename = "BC4")]
    Bc4,
    #[serde(rename = "BC5")]
    Bc5,
    #[serde(rename = "BC5prime")]
    Bc5Prime,
    #[serde(rename = "BC1star")]
    Bc1Star,
    #[serde(rename = "BC2star")]
    Bc2Star,
}

impl BcKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BcKind::Bc1 => "BC1",
            BcKind::Bc2 => "BC2",
            BcKind::Bc3 => "BC3",
            BcKind::Bc3Prime => "BC3prime",
            BcKind::Bc4 => "BC4",
            BcKind::Bc5 => "BC5",
            BcKind::Bc5Prime => "BC5prime",
            BcKind::Bc1Star => "BC1star",
            BcKind::Bc2Star => "BC2star",
        }
    }

    /// Kinds the stream-function route can solve.
    pub fn supports_grad_shafranov(&self) -> bool {
        matches!(self, BcKind::Bc1 | BcKind::Bc2 | BcKind::Bc3)
    }

    /// Kinds the vorticity-transport route can solve.
    pub fn supports_vortex_transport(&self) -> bool {
        matches!(
            self,
            BcKind::Bc1Star
                | BcKind::Bc2Star
                | BcKind::Bc3
                | BcKind::Bc3Prime
                | BcKind::Bc4
                | BcKind::Bc5
                | BcKind::Bc5Prime
        )
    }

    /// Kinds both routes can solve (the starred families via their
    /// unstarred normalizations).
    pub fn supports_both(&self) -> bool {
        matches!(self, BcKind::Bc1Star | BcKind::Bc2Star | BcKind::Bc3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GradShafranov,
    VortexTransport,
    Both,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::GradShafranov => "grad_shafranov",
            Method::VortexTransport => "vortex_transport",
            Method::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub r0: f64,
    pub r1: f64,
    pub nr: usize,
    pub ntheta: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<AnnulusGrid> {
        AnnulusGrid::new(self.r0, self.r1, self.nr, self.ntheta)
    }
}

/// Fourier series as written in config files:
/// `f(theta) = mean + sum_k cos[k-1] cos(k theta) + sin[k-1] sin(k theta)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SeriesSpec {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl SeriesSpec {
    pub fn build(&self) -> BoundaryFunction {
        BoundaryFunction::new(self.mean, self.cos.clone(), self.sin.clone())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DataSpec {
    #[serde(default)]
    pub f0: Option<SeriesSpec>,
    #[serde(default)]
    pub f1: Option<SeriesSpec>,
    #[serde(default)]
    pub b0: Option<SeriesSpec>,
    #[serde(default)]
    pub p0: Option<SeriesSpec>,
    #[serde(default)]
    pub p1: Option<SeriesSpec>,
    /// Periodic shift of the circle diffeomorphism, `T = theta + T_shift`.
    #[serde(default, rename = "T_shift")]
    pub t_shift: Option<SeriesSpec>,
    #[serde(default)]
    pub j0: f64,
    /// Dirichlet pressure value at theta = 0 for the primed variants; when
    /// present it re-anchors the `p1` series to this value.
    #[serde(default)]
    pub p1_at_0: Option<f64>,
}

impl DataSpec {
    pub fn series(&self, which: &str) -> BoundaryFunction {
        let spec = match which {
            "f0" => &self.f0,
            "f1" => &self.f1,
            "b0" => &self.b0,
            "p0" => &self.p0,
            "p1" => &self.p1,
            "T_shift" => &self.t_shift,
            _ => &None,
        };
        spec.as_ref().map(SeriesSpec::build).unwrap_or_default()
    }

    /// The Dirichlet pressure datum with `p1_at_0` applied: the series gives
    /// the shape, the scalar pins the value at theta = 0.
    pub fn p1_anchored(&self) -> BoundaryFunction {
        let p1 = self.series("p1");
        match self.p1_at_0 {
            None => p1,
            Some(v) => p1.add_constant(v - p1.eval(0.0)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSpec {
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub relaxation: f64,
    pub fp_tol: f64,
    pub fp_max_iters: usize,
    pub ode_steps_per_cell: usize,
    pub modes: Option<usize>,
    pub compat_tol: f64,
    pub smallness_cap: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            picard_tol: 1e-10,
            picard_max_iters: 200,
            relaxation: 1.0,
            fp_tol: 1e-10,
            fp_max_iters: 100,
            ode_steps_per_cell: 4,
            modes: None,
            compat_tol: crate::pressure::DEFAULT_COMPAT_TOL,
            smallness_cap: 0.25,
        }
    }
}

impl SolverSpec {
    pub fn gs_config(&self) -> GsConfig {
        GsConfig {
            picard_tol: self.picard_tol,
            max_iters: self.picard_max_iters,
            relaxation: self.relaxation,
            modes: self.modes,
            smallness_cap: self.smallness_cap,
        }
    }

    pub fn fp_config(&self) -> FixedPointConfig {
        FixedPointConfig {
            fp_tol: self.fp_tol,
            max_iters: self.fp_max_iters,
            ode_steps_per_cell: self.ode_steps_per_cell,
            modes: self.modes,
            smallness_cap: self.smallness_cap,
        }
    }
}

/// Convergence-study controls: nested refinement levels as `NRxNT` strings
/// and the error oracle.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConvergenceSpec {
    #[serde(default)]
    pub levels: Vec<String>,
    /// `none` (self-convergence against a finer reference), `base_flow`, or
    /// `swirl`.
    #[serde(default)]
    pub oracle: Option<String>,
    #[serde(default)]
    pub swirl_a: Option<f64>,
    #[serde(default)]
    pub swirl_c: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub bc_kind: BcKind,
    pub method: Method,
    pub grid: GridSpec,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub convergence: Option<ConvergenceSpec>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| SolverError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.method {
            Method::GradShafranov => self.bc_kind.supports_grad_shafranov(),
            Method::VortexTransport => self.bc_kind.supports_vortex_transport(),
            Method::Both => self.bc_kind.supports_both(),
        };
        if !ok {
            return Err(SolverError::Config(format!(
                "method {} does not support {}",
                self.method.as_str(),
                self.bc_kind.as_str()
            )));
        }
        self.grid.build()?;
        Ok(())
    }

    /// Parses a `NRxNT` grid override.
    pub fn with_grid_override(mut self, spec: &str) -> Result<Self> {
        let (nr, nt) = parse_grid_spec(spec)?;
        self.grid.nr = nr;
        self.grid.ntheta = nt;
        self.grid.build()?;
        Ok(self)
    }
}

pub fn parse_grid_spec(spec: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = spec.split('x').collect();
    if parts.len() != 2 {
        return Err(SolverError::Config(format!(
            "grid spec '{spec}' is not of the form NRxNT"
        )));
    }
    let nr = parts[0]
        .trim()
        .parse()
        .map_err(|_| SolverError::Config(format!("bad radial node count in '{spec}'")))?;
    let nt = parts[1]
        .trim()
        .parse()
        .map_err(|_| SolverError::Config(format!("bad angular node count in '{spec}'")))?;
    Ok((nr, nt))
}
