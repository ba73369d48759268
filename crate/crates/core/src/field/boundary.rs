use serde::{Deserialize, Serialize};

use super::spectral;
use crate::error::{Result, SolverError};

/// A 2*pi-periodic function of theta given as a truncated Fourier series,
///
/// `f(theta) = mean + sum_k cos_coeffs[k-1] cos(k theta) + sin_coeffs[k-1] sin(k theta)`.
///
/// Derivatives and antiderivatives are exact, coefficient-wise operations,
/// so boundary data never picks up a second discretization error.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryFunction {
    pub mean: f64,
    #[serde(default)]
    pub cos_coeffs: Vec<f64>,
    #[serde(default)]
    pub sin_coeffs: Vec<f64>,
}

impl BoundaryFunction {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            cos_coeffs: Vec::new(),
            sin_coeffs: Vec::new(),
        }
    }

    pub fn new(mean: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Self {
        Self {
            mean,
            cos_coeffs,
            sin_coeffs,
        }
    }

    /// Single harmonic `amp * cos(k theta)`.
    pub fn cosine(k: usize, amp: f64) -> Self {
        assert!(k >= 1);
        let mut cos_coeffs = vec![0.0; k];
        cos_coeffs[k - 1] = amp;
        Self::new(0.0, cos_coeffs, Vec::new())
    }

    /// Single harmonic `amp * sin(k theta)`.
    pub fn sine(k: usize, amp: f64) -> Self {
        assert!(k >= 1);
        let mut sin_coeffs = vec![0.0; k];
        sin_coeffs[k - 1] = amp;
        Self::new(0.0, Vec::new(), sin_coeffs)
    }

    /// Least-squares-exact projection of uniform periodic samples onto the
    /// first `modes` Fourier modes (`modes < samples.len()/2`).
    pub fn from_samples(samples: &[f64], modes: usize) -> Self {
        let n = samples.len();
        let m = modes.min(n / 2 - 1);
        let c = spectral::spectrum(samples);
        let mut cos_coeffs = vec![0.0; m];
        let mut sin_coeffs = vec![0.0; m];
        for k in 1..=m {
            cos_coeffs[k - 1] = 2.0 * c[k].re;
            sin_coeffs[k - 1] = -2.0 * c[k].im;
        }
        Self::new(c[0].re, cos_coeffs, sin_coeffs)
    }

    pub fn modes(&self) -> usize {
        self.cos_coeffs.len().max(self.sin_coeffs.len())
    }

    /// The mean coefficient, exactly.
    pub fn average(&self) -> f64 {
        self.mean
    }

    /// Integral over one period.
    pub fn integral(&self) -> f64 {
        std::f64::consts::TAU * self.mean
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.mean;
        for (k, &a) in self.cos_coeffs.iter().enumerate() {
            v += a * ((k + 1) as f64 * theta).cos();
        }
        for (k, &b) in self.sin_coeffs.iter().enumerate() {
            v += b * ((k + 1) as f64 * theta).sin();
        }
        v
    }

    /// Exact derivative series.
    pub fn derivative(&self) -> BoundaryFunction {
        let m = self.modes();
        let mut cos_coeffs = vec![0.0; m];
        let mut sin_coeffs = vec![0.0; m];
        for k in 1..=m {
            let a = self.cos_coeffs.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin_coeffs.get(k - 1).copied().unwrap_or(0.0);
            cos_coeffs[k - 1] = k as f64 * b;
            sin_coeffs[k - 1] = -(k as f64) * a;
        }
        BoundaryFunction::new(0.0, cos_coeffs, sin_coeffs)
    }

    /// Exact periodic part of the antiderivative: the series
    /// `P(theta) = int_0^theta (f - mean)`, which satisfies `P(0) = 0`.
    /// The full antiderivative is `mean * theta + P(theta)`.
    pub fn antiderivative_minus_linear(&self) -> BoundaryFunction {
        let m = self.modes();
        let mut cos_coeffs = vec![0.0; m];
        let mut sin_coeffs = vec![0.0; m];
        let mut mean = 0.0;
        for k in 1..=m {
            let a = self.cos_coeffs.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin_coeffs.get(k - 1).copied().unwrap_or(0.0);
            // int_0^theta a cos(ks) + b sin(ks) ds
            //   = (a/k) sin(k theta) + (b/k)(1 - cos(k theta))
            sin_coeffs[k - 1] = a / k as f64;
            cos_coeffs[k - 1] = -b / k as f64;
            mean += b / k as f64;
        }
        BoundaryFunction::new(mean, cos_coeffs, sin_coeffs)
    }

    /// Samples on `n` uniform angular nodes.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        let dtheta = std::f64::consts::TAU / n as f64;
        (0..n).map(|j| self.eval(j as f64 * dtheta)).collect()
    }

    pub fn scaled(&self, s: f64) -> BoundaryFunction {
        BoundaryFunction::new(
            s * self.mean,
            self.cos_coeffs.iter().map(|a| s * a).collect(),
            self.sin_coeffs.iter().map(|b| s * b).collect(),
        )
    }

    pub fn add(&self, other: &BoundaryFunction) -> BoundaryFunction {
        let m = self.modes().max(other.modes());
        let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        BoundaryFunction::new(
            self.mean + other.mean,
            (0..m)
                .map(|k| get(&self.cos_coeffs, k) + get(&other.cos_coeffs, k))
                .collect(),
            (0..m)
                .map(|k| get(&self.sin_coeffs, k) + get(&other.sin_coeffs, k))
                .collect(),
        )
    }

    pub fn add_constant(&self, c: f64) -> BoundaryFunction {
        let mut out = self.clone();
        out.mean += c;
        out
    }

    /// Crude sup-norm bound `|mean| + sum |coeffs|`, used by smallness gates.
    pub fn l1_bound(&self) -> f64 {
        self.mean.abs()
            + self.cos_coeffs.iter().map(|a| a.abs()).sum::<f64>()
            + self.sin_coeffs.iter().map(|b| b.abs()).sum::<f64>()
    }

    /// Sup norm over `n` sample points.
    pub fn sup_norm(&self, n: usize) -> f64 {
        self.sample(n).iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// An orientation-preserving diffeomorphism of the circle,
/// `T(theta) = theta + shift(theta)` with periodic `shift` and `T' > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diffeo {
    shift: BoundaryFunction,
    shift_deriv: BoundaryFunction,
}

impl Diffeo {
    pub fn identity() -> Self {
        Self::new(BoundaryFunction::constant(0.0))
    }

    pub fn new(shift: BoundaryFunction) -> Self {
        let shift_deriv = shift.derivative();
        Self { shift, shift_deriv }
    }

    pub fn shift(&self) -> &BoundaryFunction {
        &self.shift
    }

    pub fn eval(&self, theta: f64) -> f64 {
        theta + self.shift.eval(theta)
    }

    pub fn derivative_at(&self, theta: f64) -> f64 {
        1.0 + self.shift_deriv.eval(theta)
    }

    /// Checks `T' > 0` on `n` uniform sample points.
    pub fn check_monotone(&self, n: usize) -> Result<()> {
        let dtheta = std::f64::consts::TAU / n as f64;
        for j in 0..n {
            let theta = j as f64 * dtheta;
            let slope = self.derivative_at(theta);
            if slope <= 0.0 {
                return Err(SolverError::NonMonotoneDiffeo { theta, slope });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn average_is_exact_and_eval_periodic() {
        let f = BoundaryFunction::new(0.3, vec![0.1, 0.0], vec![0.0, -0.2]);
        assert_eq!(f.average(), 0.3);
        for j in 0..7 {
            let t = 0.9 * j as f64;
            assert!((f.eval(t + std::f64::consts::TAU) - f.eval(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn antiderivative_of_cosine() {
        // int_0^theta 0.1 cos s ds = 0.1 sin theta
        let f = BoundaryFunction::cosine(1, 0.1);
        let p = f.antiderivative_minus_linear();
        for j in 0..13 {
            let t = 0.5 * j as f64;
            assert!((p.eval(t) - 0.1 * t.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn diffeo_monotonicity_gate() {
        assert!(Diffeo::new(BoundaryFunction::sine(1, 0.2)).check_monotone(64).is_ok());
        assert!(Diffeo::new(BoundaryFunction::sine(1, 1.2)).check_monotone(64).is_err());
    }

    proptest! {
        // d/dtheta of the antiderivative recovers f - mean, coefficient-wise.
        #[test]
        fn antiderivative_then_derivative_roundtrip(
            mean in -2.0f64..2.0,
            a in proptest::collection::vec(-1.0f64..1.0, 1..6),
            b in proptest::collection::vec(-1.0f64..1.0, 1..6),
        ) {
            let f = BoundaryFunction::new(mean, a, b);
            let back = f.antiderivative_minus_linear().derivative();
            for j in 0..32 {
                let t = std::f64::consts::TAU * j as f64 / 32.0;
                prop_assert!((back.eval(t) - (f.eval(t) - mean)).abs() < 1e-12);
            }
        }

        // Projection of exact samples reproduces the series.
        #[test]
        fn sample_then_project_roundtrip(
            mean in -2.0f64..2.0,
            a in proptest::collection::vec(-1.0f64..1.0, 1..5),
        ) {
            let f = BoundaryFunction::new(mean, a, vec![]);
            let samples = f.sample(32);
            let g = BoundaryFunction::from_samples(&samples, 8);
            for j in 0..32 {
                let t = std::f64::consts::TAU * j as f64 / 32.0;
                prop_assert!((g.eval(t) - f.eval(t)).abs() < 1e-11);
            }
        }
    }
}
