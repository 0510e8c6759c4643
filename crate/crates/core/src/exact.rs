//! Exact Kerr evolution in a truncated number-state basis.
//!
//! Every Fock amplitude only picks up a phase, so the evolved state, the
//! autocorrelation and the position wavefunction are all finite sums. These
//! are the reference against which the semiclassical routines are judged.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermite::HermiteBasis;
use crate::kernel::{CoherentState, ModelParams, Picture};

/// Default truncation budget on the discarded Poisson tail.
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

/// `ceil(nu + 12 sqrt(nu))`, extended where needed (small `nu`) until the
/// discarded Poisson tail is below a tenth of [`DEFAULT_TAIL_TOL`].
pub fn truncation_for(nu: f64) -> usize {
    let mut n = ((nu + 12.0 * nu.sqrt()).ceil() as usize).max(8);
    if nu <= 0.0 {
        return n;
    }
    // for n + 2 > nu the tail past n is bounded by p(n+1) / (1 - nu / (n + 2))
    let budget = (0.1 * DEFAULT_TAIL_TOL).ln();
    while log_poisson(n + 1, nu) - (1.0 - nu / (n as f64 + 2.0)).ln() > budget {
        n += 1;
    }
    n
}

/// A pure state as its amplitudes on `|0>, ..., |n_max>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockExpansion {
    pub coeffs: Vec<Complex64>,
    pub hbar: f64,
}

impl FockExpansion {
    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn mean_n(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum::<f64>()
            / self.norm_sqr()
    }

    /// `<self|other>` over the shared support.
    pub fn overlap(&self, other: &FockExpansion) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!)`, accumulated in log space.
pub fn coherent_fock_coeffs(state: &CoherentState, n_max: usize) -> Result<FockExpansion> {
    coherent_fock_coeffs_with_tol(state, n_max, DEFAULT_TAIL_TOL)
}

pub fn coherent_fock_coeffs_with_tol(
    state: &CoherentState,
    n_max: usize,
    tail_tol: f64,
) -> Result<FockExpansion> {
    let nu = state.alpha.norm_sqr();
    let coeffs: Vec<Complex64> = if nu == 0.0 {
        (0..=n_max).map(|n| if n == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect()
    } else {
        let arg = state.alpha.arg();
        (0..=n_max)
            .map(|n| Complex64::from_polar((0.5 * log_poisson(n, nu)).exp(), n as f64 * arg))
            .collect()
    };
    let expansion = FockExpansion { coeffs, hbar: state.hbar };
    let norm = expansion.norm_sqr();
    if norm < 1.0 - tail_tol {
        return Err(Error::TailBudgetExceeded { norm, tail_tol });
    }
    Ok(expansion)
}

/// `ln(e^-nu nu^n / n!)` in the saddle-point form
/// `-ln(2 pi n)/2 - stirlerr(n) - bd0(n, nu)`, which avoids the cancellation
/// between `n ln nu` and `ln n!`.
fn log_poisson(n: usize, nu: f64) -> f64 {
    if n == 0 {
        return -nu;
    }
    let x = n as f64;
    -0.5 * (TAU * x).ln() - stirling_error(x) - bd0(x, nu)
}

/// `ln n! - (n + 1/2) ln n + n - ln(2 pi)/2`.
fn stirling_error(n: f64) -> f64 {
    if n <= 15.0 {
        return libm::lgamma(n + 1.0) - (n + 0.5) * n.ln() + n - 0.5 * TAU.ln();
    }
    let n2 = n * n;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * n2)) / n2) / n2) / n2) / n
}

/// `x ln(x / m) + m - x`, summed as a series when `x` is close to `m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return s;
            }
            s = next;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// Phase `-gamma hbar (n + 1/2)^2 t` (lab) or `-gamma hbar (n - n0)^2 t`
/// (interaction picture), reduced into `(-pi, pi]`.
///
/// In the lab frame `(n + 1/2)^2 = n(n+1) + 1/4` with `n(n+1)` even, so the
/// integer part of `t / T2` is removed exactly before multiplying.
pub fn kerr_phase(n: usize, t: f64, params: &ModelParams, picture: Picture) -> f64 {
    let tau = t / params.times().t2;
    let raw = match picture {
        Picture::Lab => {
            let whole = tau.floor();
            let frac = tau - whole;
            let half_m = (n as u64 * (n as u64 + 1) / 2) as f64;
            // -pi tau (n(n+1) + 1/4) = -2 pi frac * n(n+1)/2 - pi tau / 4  (mod 2 pi)
            let turns = (frac * half_m).fract();
            -TAU * turns - 0.25 * PI * tau
        }
        Picture::Interaction => {
            let d = n as f64 - params.n0();
            let turns = (0.5 * tau * d * d).fract();
            -TAU * turns
        }
    };
    wrap_angle(raw)
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

pub fn evolve_exact(
    state: &FockExpansion,
    t: f64,
    params: &ModelParams,
    picture: Picture,
) -> FockExpansion {
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c * Complex64::from_polar(1.0, kerr_phase(n, t, params, picture)))
        .collect();
    FockExpansion { coeffs, hbar: state.hbar }
}

/// Exact propagator for the coherent state of `params`, with the Fock
/// amplitudes and the Hermite recurrence cached across time and grid points.
#[derive(Debug, Clone)]
pub struct ExactKerr {
    params: ModelParams,
    picture: Picture,
    initial: FockExpansion,
    basis: HermiteBasis,
}

impl ExactKerr {
    pub fn new(params: &ModelParams, picture: Picture) -> Result<Self> {
        Self::with_n_max(params, picture, truncation_for(params.nu()))
    }

    pub fn with_n_max(params: &ModelParams, picture: Picture, n_max: usize) -> Result<Self> {
        Self::with_tolerance(params, picture, n_max, DEFAULT_TAIL_TOL)
    }

    /// Truncation at `n_max`, rejected if the discarded norm exceeds `tail_tol`.
    pub fn with_tolerance(params: &ModelParams, picture: Picture, n_max: usize, tail_tol: f64) -> Result<Self> {
        let initial = coherent_fock_coeffs_with_tol(&params.coherent_state(), n_max, tail_tol)?;
        Ok(Self {
            params: *params,
            picture,
            basis: HermiteBasis::new(n_max, params.hbar()),
            initial,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn initial(&self) -> &FockExpansion {
        &self.initial
    }

    pub fn state(&self, t: f64) -> FockExpansion {
        evolve_exact(&self.initial, t, &self.params, self.picture)
    }

    /// `<psi(0)|psi(t)>`.
    pub fn autocorrelation(&self, t: f64) -> Complex64 {
        self.initial
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                c.norm_sqr() * Complex64::from_polar(1.0, kerr_phase(n, t, &self.params, self.picture))
            })
            .sum()
    }

    pub fn wavefunction(&self, t: f64, q_grid: &[f64]) -> Result<Vec<Complex64>> {
        wavefunction_with_basis(&self.basis, &self.state(t), q_grid)
    }

    pub fn basis(&self) -> &HermiteBasis {
        &self.basis
    }
}

/// `e^{-nu} sum nu^n/n! e^{-i gamma hbar (n+1/2)^2 t}` in the lab frame.
pub fn autocorrelation_exact(params: &ModelParams, t: f64) -> Result<Complex64> {
    Ok(ExactKerr::new(params, Picture::Lab)?.autocorrelation(t))
}

pub fn wavefunction_exact(state: &FockExpansion, q_grid: &[f64]) -> Result<Vec<Complex64>> {
    let basis = HermiteBasis::new(state.n_max(), state.hbar);
    wavefunction_with_basis(&basis, state, q_grid)
}

fn wavefunction_with_basis(
    basis: &HermiteBasis,
    state: &FockExpansion,
    q_grid: &[f64],
) -> Result<Vec<Complex64>> {
    q_grid.par_iter().map(|&q| basis.superpose(&state.coeffs, q)).collect()
}

/// Uniform phase-space grid on which a Wigner function is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub q_steps: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub p_steps: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, steps: usize) -> Self {
        Self {
            q_min: -half_width,
            q_max: half_width,
            q_steps: steps,
            p_min: -half_width,
            p_max: half_width,
            p_steps: steps,
        }
    }

    pub fn q_axis(&self) -> Vec<f64> {
        linspace(self.q_min, self.q_max, self.q_steps)
    }

    pub fn p_axis(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.p_steps)
    }

    fn dq(&self) -> f64 {
        step(self.q_min, self.q_max, self.q_steps)
    }

    fn dp(&self) -> f64 {
        step(self.p_min, self.p_max, self.p_steps)
    }
}

fn step(lo: f64, hi: f64, n: usize) -> f64 {
    if n > 1 {
        (hi - lo) / (n - 1) as f64
    } else {
        0.0
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| if i + 1 == n { hi } else { lo + h * i as f64 }).collect()
        }
    }
}

/// Wigner function sampled on a grid; `values[i * p_axis.len() + j]` is `W(q_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub q_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerPeak {
    pub q: f64,
    pub p: f64,
    pub value: f64,
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p_axis.len() + j]
    }

    pub fn cell_area(&self) -> f64 {
        let dq = self.q_axis.get(1).map_or(0.0, |x| x - self.q_axis[0]);
        let dp = self.p_axis.get(1).map_or(0.0, |x| x - self.p_axis[0]);
        dq * dp
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// `sum_p W(q_i, p) dp` for every `q_i`.
    pub fn q_marginal(&self) -> Vec<f64> {
        let dp = self.p_axis.get(1).map_or(0.0, |x| x - self.p_axis[0]);
        self.values.chunks(self.p_axis.len()).map(|row| row.iter().sum::<f64>() * dp).collect()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Strict local maxima (8-neighbourhood) with `W >= min_value` whose
    /// distance from the origin lies in `[r_min, r_max]`.
    pub fn peaks(&self, min_value: f64, r_min: f64, r_max: f64) -> Vec<WignerPeak> {
        let (nq, np) = (self.q_axis.len(), self.p_axis.len());
        let mut out = Vec::new();
        for i in 1..nq.saturating_sub(1) {
            for j in 1..np.saturating_sub(1) {
                let v = self.at(i, j);
                if v < min_value {
                    continue;
                }
                let (q, p) = (self.q_axis[i], self.p_axis[j]);
                let r = q.hypot(p);
                if r < r_min || r > r_max {
                    continue;
                }
                let is_max = (-1i64..=1).all(|di| {
                    (-1i64..=1).all(|dj| {
                        (di == 0 && dj == 0)
                            || self.at((i as i64 + di) as usize, (j as i64 + dj) as usize) < v
                    })
                });
                if is_max {
                    out.push(WignerPeak { q, p, value: v });
                }
            }
        }
        out
    }
}

const WIGNER_IMAG_TOL: f64 = 1e-10;

/// Rejects grids whose cell `dq dp` exceeds `hbar / 4` or that do not reach
/// the state's radius `sqrt(2 hbar mean_n) + 6 sqrt(hbar)` on every side.
/// Returns that radius.
pub fn check_wigner_grid(grid: &GridSpec, hbar: f64, mean_n: f64) -> Result<f64> {
    let (dq, dp) = (grid.dq(), grid.dp());
    if dq * dp > hbar / 4.0 {
        return Err(Error::GridTooCoarse { cell: dq * dp, limit: hbar / 4.0 });
    }
    let radius = (2.0 * hbar * mean_n).sqrt() + 6.0 * hbar.sqrt();
    let covered = [-grid.q_min, grid.q_max, -grid.p_min, grid.p_max]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if covered < radius {
        return Err(Error::GridTooSmall { required: radius, covered });
    }
    Ok(radius)
}

/// Wigner transform `W(q,p) = (1/(pi hbar)) int psi*(q+y) psi(q-y) e^{2ipy/hbar} dy`
/// by midpoint quadrature in `y` on a lattice commensurate with the q-grid.
pub fn wigner_exact(state: &FockExpansion, grid: &GridSpec) -> Result<WignerGrid> {
    let hbar = state.hbar;
    let radius = check_wigner_grid(grid, hbar, state.mean_n())?;
    let dq = grid.dq();

    let q_axis = grid.q_axis();
    let p_axis = grid.p_axis();

    // The product psi*(q+y) psi(q-y) e^{2ipy} oscillates at most at
    // (2 p_state + 2 |p|max) / hbar; resolve it with ~8 points per period.
    let p_extent = grid.p_max.abs().max(grid.p_min.abs());
    let k_max = (2.0 * radius + 2.0 * p_extent) / hbar;
    let target_half = PI / (8.0 * k_max);
    let sub = if dq > 0.0 { (dq / target_half).ceil().max(1.0) as usize } else { 1 };
    let half = if dq > 0.0 { dq / sub as f64 } else { target_half };
    let y_max = 2.0 * radius;
    let n_y = (y_max / (2.0 * half)).ceil() as usize;

    let lattice_lo = grid.q_min - (2 * n_y + 1) as f64 * half;
    let lattice_len = (q_axis.len().saturating_sub(1)) * sub + 2 * (2 * n_y + 1) + 1;
    let lattice: Vec<f64> = (0..lattice_len).map(|k| lattice_lo + k as f64 * half).collect();
    let psi = wavefunction_exact(state, &lattice)?;
    let centre_offset = 2 * n_y + 1;

    let rows: Vec<Result<Vec<f64>>> = (0..q_axis.len())
        .into_par_iter()
        .map(|i| {
            let centre = centre_offset + i * sub;
            let h = 2.0 * half;
            // y_j = (j + 1/2) h for j in -n_y..n_y
            let products: Vec<(f64, Complex64)> = (-(n_y as i64)..n_y as i64)
                .map(|j| {
                    let odd = 2 * j + 1;
                    let plus = (centre as i64 + odd) as usize;
                    let minus = (centre as i64 - odd) as usize;
                    let y = odd as f64 * half;
                    (y, psi[plus].conj() * psi[minus])
                })
                .collect();
            p_axis
                .iter()
                .map(|&p| {
                    let k = 2.0 * p / hbar;
                    let sum: Complex64 = products
                        .iter()
                        .map(|&(y, g)| g * Complex64::from_polar(1.0, k * y))
                        .sum();
                    let w = sum * h / (PI * hbar);
                    let scale = w.re.abs().max(1.0 / (PI * hbar));
                    if w.im.abs() > WIGNER_IMAG_TOL * scale {
                        return Err(Error::InvalidParameter(format!(
                            "Wigner transform not real: residue {:.3e}",
                            w.im
                        )));
                    }
                    Ok(w.re)
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(q_axis.len() * p_axis.len());
    for row in rows {
        values.extend(row?);
    }
    Ok(WignerGrid { q_axis, p_axis, values })
}

/// One coherent-state component of a fractional revival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatComponent {
    pub weight: Complex64,
    pub q: f64,
    pub p: f64,
}

/// Lab-frame state at `t = (r/s) T2` written as a superposition of rotated
/// copies of the initial coherent state.
///
/// `exp(-i pi (r/s) n(n+1))` is periodic in `n` with period `L` (`s` or
/// `2s`), so it is a discrete Fourier sum of `exp(-2 pi i j n / L)`, each
/// factor rotating `alpha0` clockwise by `2 pi j / L`.
pub fn fractional_revival(params: &ModelParams, r: u64, s: u64) -> Vec<CatComponent> {
    assert!(s > 0, "denominator must be positive");
    let period = if (r * (s + 1)).is_multiple_of(2) { s } else { 2 * s };
    let frac = r as f64 / s as f64;
    let global = Complex64::from_polar(1.0, -0.25 * PI * frac);
    let alpha = params.coherent_state().alpha;
    let scale = (2.0 * params.hbar()).sqrt();
    (0..period)
        .filter_map(|j| {
            let mut b = Complex64::new(0.0, 0.0);
            for n in 0..period {
                let m = (n * (n + 1)) as f64;
                let f = Complex64::from_polar(1.0, -PI * frac * m);
                b += f * Complex64::from_polar(1.0, TAU * (j * n) as f64 / period as f64);
            }
            b /= period as f64;
            if b.norm() < 1e-9 {
                return None;
            }
            let a = alpha * Complex64::from_polar(1.0, -TAU * j as f64 / period as f64);
            Some(CatComponent { weight: global * b, q: a.re * scale, p: a.im * scale })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ExactKerr {
        ExactKerr::with_n_max(&ModelParams::reference(), Picture::Lab, 250).unwrap()
    }

    #[test]
    fn vacuum_coefficients() {
        let vac = CoherentState { alpha: Complex64::new(0.0, 0.0), hbar: 1.0 };
        let f = coherent_fock_coeffs(&vac, 10).unwrap();
        assert_eq!(f.coeffs[0], Complex64::new(1.0, 0.0));
        assert!(f.coeffs[1..].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn poisson_weights_peak_at_nu() {
        let state = ModelParams::reference().coherent_state();
        let f = coherent_fock_coeffs(&state, 250).unwrap();
        let (argmax, _) = f
            .coeffs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
            .unwrap();
        assert!(argmax == 97 || argmax == 98);
        assert!(f.norm_sqr() >= 1.0 - 1e-14);
    }

    #[test]
    fn saddle_point_poisson_matches_direct_form() {
        for nu in [0.5, 3.0, 58.7, 98.0] {
            for n in [0usize, 1, 7, 15, 16, 40, 98, 200] {
                let direct = -nu + n as f64 * f64::ln(nu) - libm::lgamma(n as f64 + 1.0);
                assert!((log_poisson(n, nu) - direct).abs() < 1e-12 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn default_truncation_meets_tail_budget() {
        for nu in [1.0_f64, 10.0, 58.7, 98.0, 400.0] {
            let state = CoherentState { alpha: Complex64::new(0.0, nu.sqrt()), hbar: 1.0 };
            let f = coherent_fock_coeffs(&state, truncation_for(nu)).unwrap();
            assert!(f.norm_sqr() <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn truncation_too_short_is_rejected() {
        let state = ModelParams::reference().coherent_state();
        let err = coherent_fock_coeffs(&state, 120).unwrap_err();
        assert!(matches!(err, Error::TailBudgetExceeded { .. }));
    }

    #[test]
    fn truncation_rule() {
        assert_eq!(truncation_for(98.0), 217);
    }

    #[test]
    fn evolution_at_zero_is_identity() {
        let k = reference();
        assert_eq!(k.state(0.0), *k.initial());
    }

    #[test]
    fn revival_is_global_phase() {
        let k = reference();
        let t2 = k.params().times().t2;
        let phase = Complex64::from_polar(1.0, -PI / 4.0);
        for (a, b) in k.state(t2).coeffs.iter().zip(&k.initial().coeffs) {
            assert!((a - phase * b).norm() < 1e-14);
        }
    }

    #[test]
    fn autocorrelation_conjugate_symmetry() {
        let k = reference();
        for &t in &[0.01, 0.7, 2.0, 5.3] {
            assert!((k.autocorrelation(t) - k.autocorrelation(-t).conj()).norm() < 1e-12);
        }
        let c0 = k.autocorrelation(0.0);
        // log-space weights carry ~1e-14 relative rounding from O(200) cancellations
        assert!((c0 - 1.0).norm() < 1e-13, "{c0}");
    }

    #[test]
    fn interaction_picture_revival() {
        let params = ModelParams::reference();
        let k = ExactKerr::with_n_max(&params, Picture::Interaction, 250).unwrap();
        let t2 = params.times().t2;
        let c = k.autocorrelation(t2);
        assert!((c.norm() - 1.0).abs() < 1e-12, "{c}");
    }

    #[test]
    fn vacuum_wavefunction() {
        let vac = FockExpansion { coeffs: vec![Complex64::new(1.0, 0.0); 1], hbar: 0.5 };
        let q = [-1.0, 0.0, 0.25, 2.0];
        let psi = wavefunction_exact(&vac, &q).unwrap();
        for (x, v) in q.iter().zip(&psi) {
            let e = (PI * 0.5_f64).powf(-0.25) * (-x * x / 1.0_f64).exp();
            assert!((v.re - e).abs() < 1e-15 && v.im == 0.0);
        }
    }

    #[test]
    fn coherent_wavefunction_matches_closed_form() {
        let k = reference();
        let state = k.params().coherent_state();
        let q: Vec<f64> = linspace(-4.0, 4.0, 81);
        let psi = k.wavefunction(0.0, &q).unwrap();
        for (x, v) in q.iter().zip(&psi) {
            assert!((v - state.wavefunction(*x)).norm() < 1e-10, "q = {x}");
        }
    }

    #[test]
    fn wavefunction_at_revival() {
        let k = reference();
        let state = k.params().coherent_state();
        let t2 = k.params().times().t2;
        let phase = Complex64::from_polar(1.0, -PI / 4.0);
        let q: Vec<f64> = linspace(-4.0, 4.0, 41);
        let psi = k.wavefunction(t2, &q).unwrap();
        for (x, v) in q.iter().zip(&psi) {
            assert!((v - phase * state.wavefunction(*x)).norm() < 1e-9);
        }
    }

    #[test]
    fn third_revival_component() {
        let comps = fractional_revival(&ModelParams::reference(), 1, 3);
        assert_eq!(comps.len(), 3);
        let c0 = (Complex64::new(2.0, 0.0) + Complex64::from_polar(1.0, -2.0 * PI / 3.0)) / 3.0;
        let expected = Complex64::from_polar(1.0, -PI / 12.0) * c0;
        let on_axis = comps.iter().find(|c| c.q.abs() < 1e-9 && c.p > 0.0).unwrap();
        assert!((on_axis.weight - expected).norm() < 1e-12);
    }

    #[test]
    fn quarter_revival_has_four_components() {
        let comps = fractional_revival(&ModelParams::reference(), 1, 4);
        assert_eq!(comps.len(), 4);
        let total: f64 = comps.iter().map(|c| c.weight.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_wigner_grid_rejected() {
        let k = reference();
        let err = wigner_exact(k.initial(), &GridSpec::square(22.0, 41)).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
    }

    #[test]
    fn coherent_wigner_peak() {
        let params = ModelParams::new(1.0, 1.0, 0.0, 4.0).unwrap();
        let k = ExactKerr::new(&params, Picture::Lab).unwrap();
        let grid = GridSpec::square(11.0, 89);
        let w = wigner_exact(k.initial(), &grid).unwrap();
        assert!((w.integral() - 1.0).abs() < 0.02);
        let peak = w.max();
        assert!((peak * PI - 1.0).abs() < 0.01, "peak {peak}");
        let peaks = w.peaks(0.5 * peak, 0.0, f64::INFINITY);
        assert_eq!(peaks.len(), 1);
        assert!(peaks[0].q.abs() < 0.2 && (peaks[0].p - 4.0).abs() < 0.2);
    }
}
