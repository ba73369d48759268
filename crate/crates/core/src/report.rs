//! Reporting types shared by the solvers and the run driver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Per-iteration trace of a fixed-point or Picard solve.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IterationTrace {
    pub converged: bool,
    pub iterations: usize,
    /// Sup-norm update per iteration.
    pub updates: Vec<f64>,
    /// Discrete energy functional per accepted iterate (stream-function
    /// solvers only; a diagnostic, not an assertion).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<Vec<f64>>,
    /// Mean of the outer-circle update integrand at the fixed point
    /// (BC5/BC3 vorticity-transport only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rave_final: Option<f64>,
    /// Set when the data lies outside the advisory smallness regime.
    #[serde(default)]
    pub smallness_warning: bool,
}

impl IterationTrace {
    /// Ratios `updates[k] / updates[k-1]` for k >= 1, skipping steps whose
    /// predecessor is already at round-off.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        let floor = 1e-13;
        self.updates
            .windows(2)
            .filter(|w| w[0] > floor)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// Full report emitted by one solver run. Every residual stored here is
/// recomputed from the emitted fields by `verify` as a round-trip check.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolveReport {
    pub bc_kind: String,
    pub method: String,
    pub grid: GridSummary,
    pub converged: bool,
    pub iterations: usize,
    pub update_trace: Vec<f64>,
    /// Sup norm over the three discrete Euler residual components.
    pub euler_residual_inf: f64,
    /// Named boundary-condition residuals.
    pub bc_residuals: BTreeMap<String, f64>,
    /// Max relative deviation of per-ring flux from the inner-ring flux.
    pub flux_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rave_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compat_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compat_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_trace: Option<Vec<f64>>,
    /// Sup-norm gap between the two routes when both were run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_method_gap_u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_method_gap_p: Option<f64>,
    #[serde(default)]
    pub smallness_warning: bool,
    /// Fourier coefficients of the outer flux produced by the solve, when
    /// the boundary condition reconstructs it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1_final: Option<crate::field::BoundaryFunction>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GridSummary {
    pub r0: f64,
    pub r1: f64,
    pub nr: usize,
    pub ntheta: usize,
}

impl From<crate::field::AnnulusGrid> for GridSummary {
    fn from(g: crate::field::AnnulusGrid) -> Self {
        Self {
            r0: g.r0(),
            r1: g.r1(),
            nr: g.nr(),
            ntheta: g.ntheta(),
        }
    }
}
