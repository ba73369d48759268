//! Discrete Fourier plumbing for the periodic angular direction.
//!
//! Conventions: for `n` uniform samples over one period the one-sided
//! spectrum holds `c_m = (1/n) * sum_j f_j exp(-i m theta_j)` for
//! `m = 0..=n/2`. The trigonometric interpolant of the samples is
//! `c_0 + 2 Re sum_{m=1}^{n/2-1} c_m exp(i m theta) + Re(c_{n/2}) cos(n/2 theta)`,
//! the unique interpolant of degree at most `n/2` with the Nyquist mode
//! split symmetrically.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// One-sided spectrum `c_0..=c_{n/2}` of real periodic samples (`n` even).
pub fn spectrum(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    debug_assert!(n >= 2 && n % 2 == 0, "need an even sample count");
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    let scale = 1.0 / n as f64;
    buf.truncate(n / 2 + 1);
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

/// Real samples on `n` uniform nodes from a one-sided spectrum with
/// `c.len() - 1 <= n/2` modes.
pub fn samples(c: &[Complex64], n: usize) -> Vec<f64> {
    debug_assert!(n % 2 == 0 && c.len() <= n / 2 + 1);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(c[0].re, 0.0);
    for (m, &cm) in c.iter().enumerate().skip(1) {
        if m == n / 2 {
            buf[m] = Complex64::new(cm.re, 0.0);
        } else {
            buf[m] = cm;
            buf[n - m] = cm.conj();
        }
    }
    fft_in_place(&mut buf, true);
    buf.into_iter().map(|v| v.re).collect()
}

/// Spectrum of the derivative: multiply mode `m` by `i m`. The Nyquist
/// derivative is not representable on the grid and is set to zero.
pub fn derivative(c: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(c.len());
    for (m, &cm) in c.iter().enumerate() {
        if m == n / 2 {
            out.push(Complex64::new(0.0, 0.0));
        } else {
            out.push(Complex64::new(0.0, m as f64) * cm);
        }
    }
    out
}

/// Value of the trigonometric interpolant at an arbitrary angle.
pub fn eval(c: &[Complex64], n: usize, theta: f64) -> f64 {
    let half = n / 2;
    let (s, z) = theta.sin_cos();
    let z = Complex64::new(z, s);
    // Fold the Nyquist cosine mode in with half weight so one Horner pass
    // covers every term: f = c0 + 2 Re sum_{1..=half} c'_m z^m.
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

/// Spectral derivative of nodal samples, returned as nodal samples.
pub fn derivative_samples(row: &[f64]) -> Vec<f64> {
    let n = row.len();
    let c = spectrum(row);
    samples(&derivative(&c, n), n)
}

/// Drop trailing modes whose magnitude is below `cutoff`; keeps `c[0]`.
pub fn truncate_negligible(c: &mut Vec<Complex64>, cutoff: f64) {
    while c.len() > 1 && c.last().map_or(false, |v| v.norm_sqr() <= cutoff * cutoff) {
        c.pop();
    }
}
