//! Normalized harmonic-oscillator eigenfunctions.
//!
//! The three-term recurrence
//! `phi_{n+1} = sqrt(2/(n+1)) x phi_n - sqrt(n/(n+1)) phi_{n-1}`
//! is run on the polynomial part only, with the Gaussian factor and a running
//! scale applied afterwards, so large `|x|` neither underflows
//! `phi_0` nor overflows the high orders.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_BY: f64 = 1e-150;

/// Recurrence coefficients for orders up to `n_max`, reusable across points.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    hbar: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl HermiteBasis {
    pub fn new(n_max: usize, hbar: f64) -> Self {
        let mut a = Vec::with_capacity(n_max + 1);
        let mut b = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let nf = n as f64;
            a.push((2.0 / (nf + 1.0)).sqrt());
            b.push((nf / (nf + 1.0)).sqrt());
        }
        Self { hbar, a, b }
    }

    pub fn n_max(&self) -> usize {
        self.a.len() - 1
    }

    /// Calls `visit(n, phi_n(q))` for every order, in increasing `n`.
    pub fn for_each(&self, q: f64, mut visit: impl FnMut(usize, f64)) -> Result<()> {
        let x = q / self.hbar.sqrt();
        let prefactor_log = -0.5 * x * x - 0.25 * (PI * self.hbar).ln();
        let mut log_scale = 0.0_f64;
        let mut factor = prefactor_log.exp();

        let mut prev = 0.0_f64;
        let mut cur = 1.0_f64;
        let n_max = self.n_max();
        for n in 0..=n_max {
            if !cur.is_finite() {
                return Err(Error::OverflowGuard { n });
            }
            visit(n, cur * factor);
            if n == n_max {
                break;
            }
            let next = self.a[n] * x * cur - self.b[n] * prev;
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_ABOVE {
                cur *= RESCALE_BY;
                prev *= RESCALE_BY;
                log_scale -= RESCALE_BY.ln();
                factor = (prefactor_log + log_scale).exp();
            }
        }
        Ok(())
    }

    pub fn values(&self, q: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n_max() + 1);
        self.for_each(q, |_, v| out.push(v))?;
        Ok(out)
    }

    /// `sum_n coeffs[n] phi_n(q)`; orders beyond `coeffs.len()` are ignored.
    pub fn superpose(&self, coeffs: &[Complex64], q: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        self.for_each(q, |n, v| {
            if let Some(c) = coeffs.get(n) {
                acc += c * v;
            }
        })?;
        Ok(acc)
    }

    /// `(sum_n a[n] phi_n(q), sum_n b[n] phi_n(q))` in a single recurrence pass.
    pub fn superpose_pair(&self, a: &[Complex64], b: &[Complex64], q: f64) -> Result<(Complex64, Complex64)> {
        let mut sa = Complex64::new(0.0, 0.0);
        let mut sb = Complex64::new(0.0, 0.0);
        self.for_each(q, |n, v| {
            if let Some(c) = a.get(n) {
                sa += c * v;
            }
            if let Some(c) = b.get(n) {
                sb += c * v;
            }
        })?;
        Ok((sa, sb))
    }
}

/// Coefficients of `d/dq sum_n c[n] phi_n`, from
/// `phi_n' = (sqrt(n/2) phi_{n-1} - sqrt((n+1)/2) phi_{n+1}) / sqrt(hbar)`.
/// The result has one more entry than `coeffs`.
pub fn derivative_coeffs(coeffs: &[Complex64], hbar: f64) -> Vec<Complex64> {
    let n = coeffs.len();
    let scale = hbar.sqrt().recip();
    (0..=n)
        .map(|m| {
            let up = coeffs.get(m + 1).map_or(Complex64::new(0.0, 0.0), |c| c * ((m + 1) as f64 / 2.0).sqrt());
            let down = if m >= 1 { coeffs[m - 1] * (m as f64 / 2.0).sqrt() } else { Complex64::new(0.0, 0.0) };
            (up - down) * scale
        })
        .collect()
}
