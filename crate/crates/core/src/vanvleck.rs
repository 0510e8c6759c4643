//! Van Vleck propagator expanded around the periodic (and half-periodic)
//! orbit families of the lab-frame Hamiltonian `gamma I^2`.
//!
//! A trajectory starting at angle `beta` on the torus of action `I` is
//! `q = sqrt(2I) sin(beta + 2 gamma I t)`, `p = sqrt(2I) cos(beta + 2 gamma I t)`.
//! Orbits through the origin that close after `k` windings (periodic family)
//! or return with reversed momentum after `k - 1/2` windings (half-periodic
//! family) dominate the propagator near `q = 0`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{CoherentState, ModelParams};
use crate::roots::brent;
use crate::theta::{deformation, k0, orbit_weight};

/// Relative Gaussian orbit weight below which winding numbers are dropped.
pub const DEFAULT_WEIGHT_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitFamily {
    /// `omega t = 2 pi k`, final momentum `+p_k`.
    Periodic,
    /// `omega t = 2 pi (k - 1/2)`, final momentum `-p_k`.
    HalfPeriodic,
}

impl OrbitFamily {
    /// Number of windings completed, `k` or `k - 1/2`.
    pub fn windings(self, k: u64) -> f64 {
        match self {
            OrbitFamily::Periodic => k as f64,
            OrbitFamily::HalfPeriodic => k as f64 - 0.5,
        }
    }
}

/// Central data of the `k`-th orbit through `q' = q'' = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitTerm {
    pub k: u64,
    pub family: OrbitFamily,
    pub t: f64,
    pub gamma: f64,
    pub action: f64,
    pub momentum: f64,
    pub s0: f64,
    pub a0: f64,
    pub maslov: i64,
    pub a_k: Complex64,
}

impl OrbitTerm {
    pub fn new(k: u64, family: OrbitFamily, params: &ModelParams, t: f64) -> Self {
        assert!(k >= 1, "winding number must be >= 1");
        let gamma = params.gamma();
        let w = family.windings(k);
        let action = PI * w / (gamma * t);
        let maslov = match family {
            OrbitFamily::Periodic => 2 * k as i64,
            OrbitFamily::HalfPeriodic => 2 * k as i64 - 1,
        };
        Self {
            k,
            family,
            t,
            gamma,
            action,
            momentum: (2.0 * action).sqrt(),
            s0: PI * PI * w * w / (gamma * t),
            a0: (4.0 * action * gamma * t).sqrt().recip(),
            maslov,
            a_k: deformation(k as f64),
        }
    }

    /// `1 / (4 I_k gamma t)`, the second derivative of the action in either endpoint.
    pub fn curvature(&self) -> f64 {
        (4.0 * self.action * self.gamma * self.t).recip()
    }

    /// Quadratic model `S0 + p_k (q2 - q1) + c (q2 - q1)^2 / 2` (periodic) or
    /// `S0 - p_k (q2 + q1) + c (q2 + q1)^2 / 2` (half-periodic).
    pub fn quadratic_action(&self, q2: f64, q1: f64) -> f64 {
        let (d, p) = match self.family {
            OrbitFamily::Periodic => (q2 - q1, self.momentum),
            OrbitFamily::HalfPeriodic => (q2 + q1, -self.momentum),
        };
        self.s0 + p * d + 0.5 * self.curvature() * d * d
    }

    /// Angular frequency `2 gamma I_k` of the orbit.
    pub fn frequency(&self) -> f64 {
        2.0 * self.gamma * self.action
    }
}

/// Range of winding numbers kept in the orbit sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KWindow {
    pub k0: f64,
    pub k_lo: u64,
    pub k_hi: u64,
}

impl KWindow {
    pub fn len(&self) -> usize {
        (self.k_hi - self.k_lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.k_lo..=self.k_hi
    }
}

fn require_t1(params: &ModelParams, t: f64, method: &'static str) -> Result<()> {
    let min = params.times().t1;
    if !(t >= min) {
        return Err(Error::Domain { method, t, min });
    }
    Ok(())
}

/// All `k >= 1` whose Gaussian weight `exp(-(k - k0)^2 / (2 sigma^2))`,
/// `sigma^2 = k0 gamma hbar t / pi`, is above `weight_cutoff`.
pub fn k_window(params: &ModelParams, t: f64, weight_cutoff: f64) -> Result<KWindow> {
    require_t1(params, t, "vanvleck")?;
    if !(weight_cutoff > 0.0 && weight_cutoff < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "weight cutoff must lie in (0, 1), got {weight_cutoff}"
        )));
    }
    let c = k0(params, t);
    let sigma2 = c * params.gamma() * params.hbar() * t / PI;
    let half = (2.0 * sigma2 * (-weight_cutoff.ln())).sqrt();
    let hi = (c + half).floor();
    if hi < 1.0 {
        return Err(Error::EmptyWindow { t, k_hi: hi as i64 });
    }
    let lo = (c - half).ceil().max(1.0);
    Ok(KWindow { k0: c, k_lo: lo as u64, k_hi: hi as u64 })
}

/// A classical trajectory of `gamma I^2` from `q1` to `q2` in time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub action: f64,
    pub beta: f64,
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
    pub t: f64,
    pub gamma: f64,
}

impl Trajectory {
    pub fn from_initial(q1: f64, p1: f64, t: f64, gamma: f64) -> Self {
        let action = 0.5 * (q1 * q1 + p1 * p1);
        let beta = q1.atan2(p1);
        let r = (2.0 * action).sqrt();
        let (s, c) = (beta + 2.0 * gamma * action * t).sin_cos();
        Self { action, beta, q1, p1, q2: r * s, p2: r * c, t, gamma }
    }

    /// Total swept angle, clockwise.
    pub fn sweep(&self) -> f64 {
        2.0 * self.gamma * self.action * self.t
    }

    /// `int (p dq - H dt) = gamma I^2 t + (p2 q2 - p1 q1) / 2`.
    pub fn hamilton_action(&self) -> f64 {
        self.gamma * self.action * self.action * self.t + 0.5 * (self.p2 * self.q2 - self.p1 * self.q1)
    }

    /// Number of momentum zeros crossed (turning points in `q`).
    pub fn maslov(&self) -> i64 {
        turning_points(self.beta, self.beta + self.sweep())
    }

    /// `(dq2/dq1, dq2/dp1)` at fixed `t`.
    pub fn jacobian(&self) -> (f64, f64) {
        let r = (2.0 * self.action).sqrt();
        let theta = self.beta + self.sweep();
        let (s, c) = theta.sin_cos();
        let gt = 2.0 * self.gamma * self.t;
        let i2 = 2.0 * self.action;
        let dq1 = self.q1 / r * s + r * c * (self.p1 / i2 + gt * self.q1);
        let dp1 = self.p1 / r * s + r * c * (-self.q1 / i2 + gt * self.p1);
        (dq1, dp1)
    }

    /// Van Vleck amplitude `|dq2/dp1|^(-1/2)`.
    pub fn amplitude(&self) -> f64 {
        self.jacobian().1.abs().sqrt().recip()
    }
}

/// Signed count of the angles `pi/2 + n pi` (zeros of `p = r cos(theta)`)
/// strictly passed going from `from` to `to`; negative if `to < from`.
pub(crate) fn turning_points(from: f64, to: f64) -> i64 {
    let idx = |x: f64| ((x - FRAC_PI_2) / PI).floor() as i64;
    idx(to) - idx(from)
}

/// Trajectory from `q1` to `q2` in the neighbourhood of the `k`-th orbit of
/// `family`, found by refining the action on the bracket of half a winding
/// around the central orbit.
pub fn solve_boundary_problem(
    q2: f64,
    q1: f64,
    t: f64,
    k: u64,
    family: OrbitFamily,
    params: &ModelParams,
) -> Result<Trajectory> {
    require_t1(params, t, "vanvleck")?;
    if k == 0 {
        return Err(Error::InvalidParameter("winding number must be >= 1".into()));
    }
    let gamma = params.gamma();
    let centre = OrbitTerm::new(k, family, params, t).action;
    let half = PI / (4.0 * gamma * t);
    let residual = |i: f64| {
        let r = (2.0 * i).sqrt();
        if r <= q1.abs() {
            return f64::NAN;
        }
        let beta = (q1 / r).asin();
        r * (beta + 2.0 * gamma * i * t).sin() - q2
    };
    let (lo, hi) = (centre - half, centre + half);
    let (flo, fhi) = (residual(lo), residual(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence { iterations: 0 });
    }
    let i = brent(residual, lo, hi, flo, fhi, 4.0 * f64::EPSILON * centre)?;
    let r = (2.0 * i).sqrt();
    let p1 = (r * r - q1 * q1).sqrt();
    Ok(Trajectory::from_initial(q1, p1, t, gamma))
}

/// `(e^{-i pi/4} / sqrt(2 pi)) sum_k e^{i pi^2 k^2 / (gamma hbar t)} e^{-i k pi} W(k)`
/// over the default window.
pub fn correlation_vanvleck(params: &ModelParams, t: f64) -> Result<Complex64> {
    correlation_vanvleck_with(params, t, DEFAULT_WEIGHT_CUTOFF, true)
}

/// The orbit sum with a chosen window cutoff, and either the exact orbit
/// weight or its Gaussian approximation.
pub fn correlation_vanvleck_with(
    params: &ModelParams,
    t: f64,
    weight_cutoff: f64,
    exact_weight: bool,
) -> Result<Complex64> {
    let window = k_window(params, t, weight_cutoff)?;
    // pi^2 k^2 / (gamma hbar t) - k pi = pi (k^2 / x - k) with x = t / T2
    let x = params.gamma() * params.hbar() * t / PI;
    let sum: Complex64 = window
        .iter()
        .map(|k| {
            let kf = k as f64;
            let turns = (kf * kf / x).rem_euclid(2.0) - (k % 2) as f64;
            Complex64::from_polar(1.0, PI * turns) * orbit_weight(kf, params, t, exact_weight)
        })
        .sum();
    Ok(sum * Complex64::from_polar(TAU.sqrt().recip(), -FRAC_PI_4))
}

/// Where the quadratic action model of each orbit is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Expansion {
    /// Taylor expansion in both endpoints around `q' = q'' = 0`.
    Origin,
    /// Exact boundary solution at `(q'', 0)`, Taylor-expanded in `q'` only.
    #[default]
    Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefunctionOptions {
    pub include_negative_momentum: bool,
    pub expansion: Expansion,
    pub weight_cutoff: f64,
}

impl Default for WavefunctionOptions {
    fn default() -> Self {
        Self {
            include_negative_momentum: false,
            expansion: Expansion::Endpoint,
            weight_cutoff: DEFAULT_WEIGHT_CUTOFF,
        }
    }
}

/// One orbit's share of `psi(q'', t)`: the action as a quadratic in the
/// initial position `x`, `S(x) = s0 + s1 x + s2 x^2 / 2`, together with the
/// frozen amplitude and Maslov index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitContribution {
    pub term: OrbitTerm,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub amplitude: f64,
    pub maslov: i64,
}

impl OrbitContribution {
    pub fn action(&self, x: f64) -> f64 {
        self.s0 + self.s1 * x + 0.5 * self.s2 * x * x
    }

    fn prefactor(&self, hbar: f64) -> Complex64 {
        let maslov_phase = -FRAC_PI_2 * self.maslov.rem_euclid(4) as f64;
        Complex64::from_polar(self.amplitude / (TAU * hbar).sqrt(), maslov_phase - FRAC_PI_4)
    }

    /// Integrand `K_k(q'', x) psi0(x)` of the propagation integral.
    pub fn integrand(&self, x: f64, psi0: &CoherentState) -> Complex64 {
        let hbar = psi0.hbar;
        self.prefactor(hbar) * Complex64::from_polar(1.0, self.action(x) / hbar) * psi0.wavefunction(x)
    }

    /// `int K_k(q'', x) psi0(x) dx` in closed form: the integrand is
    /// `exp(-a x^2 + b x + c)` and integrates to `sqrt(pi/a) exp(b^2/(4a) + c)`.
    pub fn integrate(&self, psi0: &CoherentState) -> Complex64 {
        let hbar = psi0.hbar;
        let (q0, p0) = psi0.centroid();
        let a = Complex64::new(1.0, -self.s2) / (2.0 * hbar);
        let b = Complex64::new(q0, self.s1 + p0) / hbar;
        let c = Complex64::new(-q0 * q0 / (2.0 * hbar), (self.s0 - 0.5 * p0 * q0) / hbar);
        let norm = (PI * hbar).powf(-0.25);
        self.prefactor(hbar) * norm * (PI / a).sqrt() * (b * b / (4.0 * a) + c).exp()
    }
}

fn contribution(
    term: OrbitTerm,
    q: f64,
    expansion: Expansion,
    params: &ModelParams,
) -> Result<OrbitContribution> {
    match expansion {
        Expansion::Origin => {
            let c = term.curvature();
            let (s0, s1) = match term.family {
                OrbitFamily::Periodic => {
                    (term.s0 + term.momentum * q + 0.5 * c * q * q, -term.momentum - c * q)
                }
                OrbitFamily::HalfPeriodic => {
                    (term.s0 - term.momentum * q + 0.5 * c * q * q, -term.momentum + c * q)
                }
            };
            Ok(OrbitContribution { term, s0, s1, s2: c, amplitude: term.a0, maslov: term.maslov })
        }
        Expansion::Endpoint => {
            // Far in the window tail |q| can reach the torus radius and the
            // orbit no longer passes through q; those terms are below the
            // weight cutoff and keep the origin expansion.
            let traj = match solve_boundary_problem(q, 0.0, term.t, term.k, term.family, params) {
                Ok(traj) => traj,
                Err(Error::NoConvergence { .. }) => return contribution(term, q, Expansion::Origin, params),
                Err(e) => return Err(e),
            };
            let (dq1, dp1) = traj.jacobian();
            Ok(OrbitContribution {
                term,
                s0: traj.hamilton_action(),
                s1: -traj.p1,
                s2: dq1 / dp1,
                amplitude: dp1.abs().sqrt().recip(),
                maslov: traj.maslov(),
            })
        }
    }
}

/// Every orbit term entering `psi(q, t)` under `opts`.
pub fn orbit_contributions(
    params: &ModelParams,
    t: f64,
    q: f64,
    opts: &WavefunctionOptions,
) -> Result<Vec<OrbitContribution>> {
    // the wavefunction weight is the square root of the correlation weight
    let window = k_window(params, t, opts.weight_cutoff * opts.weight_cutoff)?;
    let mut out = Vec::with_capacity(2 * window.len() + 1);
    for k in window.iter() {
        out.push(contribution(OrbitTerm::new(k, OrbitFamily::Periodic, params, t), q, opts.expansion, params)?);
    }
    if opts.include_negative_momentum {
        for k in window.k_lo..=window.k_hi + 1 {
            let term = OrbitTerm::new(k, OrbitFamily::HalfPeriodic, params, t);
            out.push(contribution(term, q, opts.expansion, params)?);
        }
    }
    Ok(out)
}

/// `psi(q, t)` from the orbit sum, integrating each orbit's Gaussian against
/// the initial coherent state in closed form. Only the periodic family
/// (positive final momentum) is used unless `include_negative_momentum`.
pub fn wavefunction_vanvleck(
    params: &ModelParams,
    t: f64,
    q: f64,
    include_negative_momentum: bool,
) -> Result<Complex64> {
    let opts = WavefunctionOptions { include_negative_momentum, ..Default::default() };
    wavefunction_vanvleck_with(params, t, q, &opts)
}

pub fn wavefunction_vanvleck_with(
    params: &ModelParams,
    t: f64,
    q: f64,
    opts: &WavefunctionOptions,
) -> Result<Complex64> {
    let psi0 = params.coherent_state();
    Ok(orbit_contributions(params, t, q, opts)?.iter().map(|c| c.integrate(&psi0)).sum())
}

pub fn wavefunction_vanvleck_grid(
    params: &ModelParams,
    t: f64,
    q_grid: &[f64],
    opts: &WavefunctionOptions,
) -> Result<Vec<Complex64>> {
    q_grid.par_iter().map(|&q| wavefunction_vanvleck_with(params, t, q, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ModelParams {
        ModelParams::reference()
    }

    #[test]
    fn periodic_term_closed_forms() {
        let t = 2.0 * PI;
        let term = OrbitTerm::new(196, OrbitFamily::Periodic, &p(), t);
        assert!((term.action - 196.0 * PI / t).abs() < 1e-12);
        assert_eq!(term.maslov, 392);
        assert!((term.s0 - PI * PI * 196.0 * 196.0 / t).abs() < 1e-9);
        assert!((term.frequency() * t - TAU * 196.0).abs() < 1e-10);
    }

    #[test]
    fn half_periodic_frequency_condition() {
        let t = PI / 2.38567;
        for k in [3, 40, 41] {
            let term = OrbitTerm::new(k, OrbitFamily::HalfPeriodic, &p(), t);
            assert!((term.frequency() * t - TAU * (k as f64 - 0.5)).abs() < 1e-12);
            assert_eq!(term.maslov, 2 * k as i64 - 1);
        }
    }

    #[test]
    fn window_centre() {
        let w = k_window(&p(), 2.0 * PI, DEFAULT_WEIGHT_CUTOFF).unwrap();
        assert!((w.k0 - 196.0).abs() < 1e-10);
        let t1 = p().times().t1;
        for k in [3.0, 25.0, 400.0] {
            let w = k_window(&p(), k * t1, DEFAULT_WEIGHT_CUTOFF).unwrap();
            assert!((w.k0 - k).abs() < 1e-9 * k);
            assert!(w.k_lo >= 1 && w.k_lo as f64 <= k && w.k_hi as f64 >= k);
        }
    }

    #[test]
    fn window_rejects_short_times() {
        let t1 = p().times().t1;
        assert!(matches!(k_window(&p(), 0.5 * t1, 1e-10), Err(Error::Domain { .. })));
    }

    #[test]
    fn boundary_at_origin() {
        let t = 3.0 * PI;
        let tr = solve_boundary_problem(0.0, 0.0, t, 290, OrbitFamily::Periodic, &p()).unwrap();
        assert!((tr.action - 290.0 * PI / t).abs() < 1e-12 * tr.action);
        assert!(tr.beta.abs() < 1e-15);
        assert_eq!(tr.maslov(), 580);
        let tr = solve_boundary_problem(0.0, 0.0, t, 290, OrbitFamily::HalfPeriodic, &p()).unwrap();
        assert!((tr.action - 289.5 * PI / t).abs() < 1e-12 * tr.action);
        assert_eq!(tr.maslov(), 579);
        assert!(tr.p2 < 0.0);
    }

    #[test]
    fn boundary_endpoints_satisfied() {
        let t = PI / 2.38567;
        let tr = solve_boundary_problem(0.7, -0.4, t, 41, OrbitFamily::HalfPeriodic, &p()).unwrap();
        assert!((tr.q2 - 0.7).abs() < 1e-11, "{}", tr.q2);
        assert_eq!(tr.q1, -0.4);
    }

    #[test]
    fn diagonal_shift_is_second_order() {
        let t = 2.0 * PI;
        let at = |e: f64| {
            solve_boundary_problem(e, e, t, 196, OrbitFamily::Periodic, &p()).unwrap().hamilton_action()
        };
        let s0 = at(0.0);
        // a first-order shift would be p_k * eps ~ 0.14
        for eps in [1e-2, 2e-2, 5e-2] {
            let d = at(eps) - s0;
            assert!(d.abs() < eps * eps, "eps = {eps}: {d}");
        }
    }

    #[test]
    fn turning_point_counts() {
        assert_eq!(turning_points(0.0, TAU), 2);
        assert_eq!(turning_points(0.0, PI), 1);
        assert_eq!(turning_points(0.3, 0.3), 0);
        assert_eq!(turning_points(TAU, 0.0), -2);
    }

    #[test]
    fn revival_peaks() {
        for m in 1..=2 {
            let c = correlation_vanvleck(&p(), m as f64 * PI).unwrap();
            assert!(c.norm() > 0.98, "m = {m}: {}", c.norm());
        }
    }

    #[test]
    fn exact_and_gaussian_weight_sums_are_close() {
        let t = 1.3 * PI;
        let a = correlation_vanvleck_with(&p(), t, 1e-12, true).unwrap();
        let b = correlation_vanvleck_with(&p(), t, 1e-12, false).unwrap();
        assert!((a - b).norm() < 0.05);
    }
}
