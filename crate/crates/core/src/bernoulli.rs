//! Construction of the Bernoulli profile from inner-circle data by inverting
//! the boundary stream function, plus the outer boundary stream data used by
//! the stream-function solvers.

use crate::error::{Result, SolverError};
use crate::field::{BoundaryFunction, Diffeo};

/// A quasi-periodic boundary stream function
/// `phi(theta) = offset + slope * theta + periodic(theta)`, with exact
/// derivative. `phi(theta + 2 pi) - phi(theta) = 2 pi * slope` identically.
#[derive(Debug, Clone)]
pub struct StreamBoundary {
    offset: f64,
    slope: f64,
    periodic: BoundaryFunction,
    derivative: BoundaryFunction,
}

impl StreamBoundary {
    fn new(offset: f64, slope: f64, periodic: BoundaryFunction, derivative: BoundaryFunction) -> Self {
        Self {
            offset,
            slope,
            periodic,
            derivative,
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.offset + self.slope * theta + self.periodic.eval(theta)
    }

    pub fn derivative_at(&self, theta: f64) -> f64 {
        self.slope + self.derivative.eval(theta)
    }

    /// Increment over one period: `J = 2 pi * slope`.
    pub fn period_increment(&self) -> f64 {
        std::f64::consts::TAU * self.slope
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

fn check_positive_throughflow(
    derivative: impl Fn(f64) -> f64,
    samples: usize,
) -> Result<()> {
    let dtheta = std::f64::consts::TAU / samples as f64;
    for j in 0..samples {
        let theta = j as f64 * dtheta;
        let value = derivative(theta);
        if value <= 0.0 {
            return Err(SolverError::NonPositiveThroughflow { theta, value });
        }
    }
    Ok(())
}

/// Boundary stream `phi0(theta) = int_0^theta f0` (or `theta + int_0^theta f0`
/// in the normalized form where the through-flow is `1 + f0`). The positivity
/// of the through-flow is checked on `gate_samples` uniform points.
pub fn build_phi0(
    f0: &BoundaryFunction,
    normalized: bool,
    gate_samples: usize,
) -> Result<StreamBoundary> {
    let base = if normalized { 1.0 } else { 0.0 };
    check_positive_throughflow(|t| base + f0.eval(t), gate_samples)?;
    // The slope carries the mean; the stored derivative series is the
    // mean-free part of the through-flow.
    Ok(StreamBoundary::new(
        0.0,
        base + f0.average(),
        f0.antiderivative_minus_linear(),
        BoundaryFunction::new(0.0, f0.cos_coeffs.clone(), f0.sin_coeffs.clone()),
    ))
}

/// Inverse of a strictly increasing boundary stream: returns `Z(tau)` with
/// `phi0(Z(tau)) = tau` to root-finder tolerance and
/// `Z(tau + J) = Z(tau) + 2 pi`.
pub fn invert_phi0(phi0: &StreamBoundary, tau: f64) -> f64 {
    let period = phi0.period_increment();
    debug_assert!(period > 0.0);
    // Reduce into the base branch [phi0(0), phi0(0) + J).
    let k = ((tau - phi0.eval(0.0)) / period).floor();
    let tau0 = tau - k * period;

    // Safeguarded Newton on one period with a bisection bracket.
    let mut lo = 0.0;
    let mut hi = std::f64::consts::TAU;
    let mut z = (tau0 - phi0.eval(0.0)) / phi0.slope();
    let scale = 1.0 + tau0.abs();
    for _ in 0..200 {
        let res = phi0.eval(z) - tau0;
        if res.abs() <= 1e-13 * scale {
            break;
        }
        if res > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let step = res / phi0.derivative_at(z);
        z -= step;
        if !(lo..=hi).contains(&z) {
            z = 0.5 * (lo + hi);
        }
    }
    z + k * std::f64::consts::TAU
}

/// The pair `(Z, B)` obtained by inverting the inner boundary stream:
/// `B(tau) = b0(Z(tau))`, J-periodic in its argument, with the exact
/// chain-rule derivative `B'(tau) = b0'(Z(tau)) / phi0'(Z(tau))`.
#[derive(Debug, Clone)]
pub struct BernoulliProfile {
    phi0: StreamBoundary,
    b0: BoundaryFunction,
    b0_deriv: BoundaryFunction,
}

impl BernoulliProfile {
    /// Period of the profile argument (`J0` for BC1/BC2, `J1 = J0 + 2 pi`
    /// for normalized BC3 data).
    pub fn period(&self) -> f64 {
        self.phi0.period_increment()
    }

    pub fn phi0(&self) -> &StreamBoundary {
        &self.phi0
    }

    pub fn z(&self, tau: f64) -> f64 {
        invert_phi0(&self.phi0, tau)
    }

    pub fn b(&self, tau: f64) -> f64 {
        self.b0.eval(self.z(tau))
    }

    pub fn b_prime(&self, tau: f64) -> f64 {
        let z = self.z(tau);
        self.b0_deriv.eval(z) / self.phi0.derivative_at(z)
    }
}

/// Builds the Bernoulli profile from the inner through-flow and Bernoulli
/// data.
pub fn build_profile(
    f0: &BoundaryFunction,
    b0: &BoundaryFunction,
    normalized: bool,
    gate_samples: usize,
) -> Result<BernoulliProfile> {
    let phi0 = build_phi0(f0, normalized, gate_samples)?;
    Ok(BernoulliProfile {
        phi0,
        b0: b0.clone(),
        b0_deriv: b0.derivative(),
    })
}

/// Outer boundary stream for the stream-function solvers: either from a
/// prescribed outer flux `f1` with the circulation datum `j0`, or composed
/// through an orientation-preserving diffeomorphism `T` as `phi0 o T`.
#[derive(Debug, Clone)]
pub enum OuterStream {
    Series(StreamBoundary),
    Composed { phi0: StreamBoundary, t: Diffeo },
}

impl OuterStream {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            OuterStream::Series(s) => s.eval(theta),
            OuterStream::Composed { phi0, t } => phi0.eval(t.eval(theta)),
        }
    }

    /// Common increment over one period (`J0` in both constructions).
    pub fn period_increment(&self) -> f64 {
        match self {
            OuterStream::Series(s) => s.period_increment(),
            OuterStream::Composed { phi0, .. } => phi0.period_increment(),
        }
    }
}

/// Outer datum for [`build_phi1`].
#[derive(Debug, Clone)]
pub enum OuterKind {
    /// BC1-style: prescribed outer flux and circulation segment.
    Flux { f1: BoundaryFunction, j0: f64 },
    /// BC2-style: Bernoulli data transported by the diffeomorphism `T`.
    Diffeo(Diffeo),
}

/// Builds `phi1` for the outer circle. For the flux form this is
/// `-j0 + int_0^theta f1`, gated on `int f1 = int f0`; for the diffeo form
/// it is `phi0 o T`, gated on `T' > 0`. Both satisfy
/// `phi1(theta + 2 pi) - phi1(theta) = J0` identically.
pub fn build_phi1(
    kind: &OuterKind,
    f0: &BoundaryFunction,
    phi0: &StreamBoundary,
    gate_samples: usize,
) -> Result<OuterStream> {
    match kind {
        OuterKind::Flux { f1, j0 } => {
            let defect = f0.integral() - f1.integral();
            let tol = crate::elliptic::flux_tolerance(f0.integral());
            if defect.abs() > tol {
                return Err(SolverError::FluxMismatch { defect, tol });
            }
            // Keep the slope identical to phi0's slope so the periodic parts
            // of the two rows live in the same shifted frame. The normalized
            // `+1` carried by phi0 belongs to the outer row as well.
            let extra = phi0.slope() - f0.average();
            let slope = extra + f1.average();
            Ok(OuterStream::Series(StreamBoundary::new(
                -j0,
                slope,
                f1.antiderivative_minus_linear(),
                f1.clone(),
            )))
        }
        OuterKind::Diffeo(t) => {
            t.check_monotone(gate_samples)?;
            Ok(OuterStream::Composed {
                phi0: phi0.clone(),
                t: t.clone(),
            })
        }
    }
}
