//! Jacobi `theta_3` and the theta-function forms of the autocorrelation.
//!
//! With the Poisson weights replaced by a Gaussian, the exact autocorrelation
//! becomes a single `theta_3(z1 | tau1)`. Its image under the modular
//! transformation `tau -> -1/tau` is a sum over winding numbers that coincides
//! term by term with the periodic-orbit sum under a Gaussian orbit weight.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::ModelParams;

/// Default relative truncation tolerance of the series.
pub const DEFAULT_TOL: f64 = 1e-15;

/// Default cap on the number of terms on each side of `n = 0`.
pub const DEFAULT_BUDGET: usize = 1_000_000;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Arguments `(z, tau)` of `theta_3`, with `Im tau > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaArgs {
    z: Complex64,
    tau: Complex64,
}

impl ThetaArgs {
    pub fn new(z: Complex64, tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !z.is_finite() || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "theta_3 needs finite z and Im tau > 0, got z = {z}, tau = {tau}"
            )));
        }
        Ok(Self { z, tau })
    }

    /// `z1 = (1 - 1/(2 nu) - i gamma hbar t) / (2i)`,
    /// `tau1 = (-1/(2 nu) - i gamma hbar t) / (pi i)`.
    pub fn quantum(params: &ModelParams, t: f64) -> Self {
        let nu = params.nu();
        let g = params.gamma() * params.hbar() * t;
        let z = Complex64::new(1.0 - 0.5 / nu, -g) / (2.0 * I);
        let tau = Complex64::new(-0.5 / nu, -g) / (PI * I);
        Self { z, tau }
    }

    /// Long-time arguments `z1' = pi/2 + i pi/(2 gamma hbar t)`,
    /// `tau1' = pi/(gamma hbar t) + i pi/(2 nu (gamma hbar t)^2)`.
    pub fn semiclassical(params: &ModelParams, t: f64) -> Result<Self> {
        let min = 2.0 * params.times().t1;
        if !(t >= min) {
            return Err(Error::Domain { method: "theta-semiclassical", t, min });
        }
        let nu = params.nu();
        let g = params.gamma() * params.hbar() * t;
        let z = Complex64::new(FRAC_PI_2, PI / (2.0 * g));
        let tau = Complex64::new(PI / g, PI / (2.0 * nu * g * g));
        Ok(Self { z, tau })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// `(z / tau, -1 / tau)`.
    pub fn transformed(&self) -> Self {
        Self { z: self.z / self.tau, tau: -1.0 / self.tau }
    }
}

/// A truncated series value and the `N` at which it stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub terms: usize,
}

/// `sum_n exp(i pi n^2 tau + 2 i n z)`.
pub fn theta3(args: ThetaArgs, tol: f64) -> Result<Complex64> {
    Ok(theta3_series(args, tol, DEFAULT_BUDGET, 0.0)?.value)
}

/// The symmetric partial sum over `-N..=N` times `exp(-log_shift)`.
///
/// The shift lets callers fold a large prefactor into the terms so that
/// `theta_3` itself never overflows. Summation stops once `N` is past the
/// largest term and the next pair is below `tol` times the partial sum.
pub fn theta3_series(args: ThetaArgs, tol: f64, budget: usize, log_shift: f64) -> Result<SeriesValue> {
    let ThetaArgs { z, tau } = args;
    let peak = z.im.abs() / (PI * tau.im);
    let needed = peak + ((-tol.ln()).max(1.0) / (PI * tau.im)).sqrt();
    if needed > budget as f64 {
        return Err(Error::SlowConvergence { budget, im_tau: tau.im });
    }
    let term = |n: f64| (I * PI * n * n * tau + 2.0 * I * n * z - log_shift).exp();
    let mut sum = term(0.0);
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let pair = term(nf) + term(-nf);
        sum += pair;
        if nf > peak && pair.norm() <= tol * sum.norm() {
            return Ok(SeriesValue { value: sum, terms: n });
        }
        n += 1;
        if n > budget {
            return Err(Error::SlowConvergence { budget, im_tau: tau.im });
        }
    }
}

/// `(-i tau)^(-1/2) exp(z^2 / (pi i tau)) theta_3(z/tau | -1/tau)`.
///
/// `Re(-i tau) = Im tau > 0`, so the principal root is the right branch.
pub fn theta3_functional_equation(args: ThetaArgs) -> Result<Complex64> {
    Ok(functional_series(args, DEFAULT_TOL, DEFAULT_BUDGET)?.value)
}

pub fn functional_series(args: ThetaArgs, tol: f64, budget: usize) -> Result<SeriesValue> {
    let w = -I * args.tau;
    assert!(w.arg().abs() < FRAC_PI_2, "arg(-i tau) must lie in (-pi/2, pi/2)");
    let pre = w.sqrt().inv();
    let gauss = args.z * args.z / (PI * I * args.tau);
    let inner = theta3_series(args.transformed(), tol, budget, -gauss.re)?;
    Ok(SeriesValue {
        value: pre * Complex64::from_polar(1.0, gauss.im) * inner.value,
        terms: inner.terms,
    })
}

/// Autocorrelation with the Poisson weights replaced by a unit-mass Gaussian:
/// `(2 pi nu)^(-1/2) exp(-(nu - 1/2)^2 / (2 nu)) exp(-i gamma hbar t / 4) theta_3(z1 | tau1)`.
pub fn correlation_theta_quantum(params: &ModelParams, t: f64) -> Result<Complex64> {
    correlation_theta_quantum_with(params, t, DEFAULT_TOL)
}

pub fn correlation_theta_quantum_with(params: &ModelParams, t: f64, tol: f64) -> Result<Complex64> {
    let nu = params.nu();
    let g = params.gamma() * params.hbar() * t;
    let shift = (nu - 0.5).powi(2) / (2.0 * nu);
    let series = theta3_series(ThetaArgs::quantum(params, t), tol, DEFAULT_BUDGET, shift)?;
    Ok(series.value * Complex64::from_polar((2.0 * PI * nu).sqrt().recip(), -0.25 * g))
}

/// Long-time form `exp(-nu/2) (2 nu gamma hbar t)^(-1/2) exp(-i pi/4) theta_3(z1' | tau1')`.
/// Defined for `t >= 2 T1`.
pub fn correlation_theta_semiclassical(params: &ModelParams, t: f64) -> Result<Complex64> {
    correlation_theta_semiclassical_with(params, t, DEFAULT_TOL)
}

pub fn correlation_theta_semiclassical_with(params: &ModelParams, t: f64, tol: f64) -> Result<Complex64> {
    let args = ThetaArgs::semiclassical(params, t)?;
    let nu = params.nu();
    let g = params.gamma() * params.hbar() * t;
    let series = theta3_series(args, tol, DEFAULT_BUDGET, 0.5 * nu)?;
    Ok(series.value * Complex64::from_polar((2.0 * nu * g).sqrt().recip(), -0.25 * PI))
}

/// Centre `k0 = t / T1` of the winding-number distribution.
pub fn k0(params: &ModelParams, t: f64) -> f64 {
    params.i0() * params.gamma() * t / PI
}

/// Complex deformation `a_k = 1 - i / (2 k pi)`.
pub fn deformation(k: f64) -> Complex64 {
    Complex64::new(1.0, -1.0 / (2.0 * k * PI))
}

/// Weight of the `k`-th periodic orbit in the autocorrelation sum.
///
/// `exact`: `exp(-(p_k - p0)^2 / (a_k hbar)) / sqrt(k a_k)` with
/// `p_k = sqrt(2 k pi / (gamma t))`. Otherwise the Gaussian
/// `exp(-pi (k - k0)^2 / (2 k0 gamma hbar t)) / sqrt(k0)`.
///
/// The autocorrelation only depends on the centroid action, so `p0` here is
/// the radius `sqrt(2 I0)`.
pub fn orbit_weight(k: f64, params: &ModelParams, t: f64, exact: bool) -> Complex64 {
    if exact {
        let p0 = (2.0 * params.i0()).sqrt();
        let pk = (2.0 * k * PI / (params.gamma() * t)).sqrt();
        let a = deformation(k);
        let d = pk - p0;
        (-(d * d) / (a * params.hbar())).exp() / (k * a).sqrt()
    } else {
        let c = k0(params, t);
        let d = k - c;
        let e = -PI * d * d / (2.0 * c * params.gamma() * params.hbar() * t);
        Complex64::new(e.exp() / c.sqrt(), 0.0)
    }
}
