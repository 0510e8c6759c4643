//! Time-dependent WKB propagation in the interaction picture.
//!
//! After a short exact evolution to `t_i` the state is a single-branch WKB
//! state `A0(q) exp(i S0(q) / hbar)` supported by the curve `p = S0'(q)`.
//! Every point of that curve moves on its torus under `gamma (I - I_p)^2`,
//! so the evolved manifold is known in closed form. The wavefunction at `q`
//! sums one term per intersection of the evolved curve with the line `q`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::ExactKerr;
use crate::hermite::{derivative_coeffs, HermiteBasis};
use crate::kernel::{frequency, ModelParams, Picture};
use crate::roots::brent;
use crate::vanvleck::turning_points;

/// `t_i = T2 / 320` unless configured otherwise.
pub const DEFAULT_TI_DIVISOR: f64 = 320.0;
/// Largest phase-space gap between neighbouring samples, in units of `sqrt(hbar)`.
pub const DEFAULT_RESOLUTION: f64 = 0.02;
/// Branches with `|dq_f/dq_i|` below this are treated as caustic.
pub const DEFAULT_CAUSTIC_EPS: f64 = 1e-3;
/// The manifold covers the region where `|psi(t_i)|` exceeds this fraction of its maximum.
pub const DEFAULT_AMPLITUDE_FLOOR: f64 = 1e-3;
/// Initial sample spacing, in units of `sqrt(hbar)`.
pub const DEFAULT_SAMPLE_SPACING: f64 = 0.01;
/// Displacement along the initial manifold used for the amplitude, in units of `sqrt(hbar)`.
pub const DEFAULT_DELTA_S: f64 = 1e-4;

const ZERO_AMPLITUDE: f64 = 1e-12;
const MAX_REFINE_PASSES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TdwkbOptions {
    /// Time of the exact evolution that seeds the manifold; `None` means `T2 / 320`.
    pub t_i: Option<f64>,
    pub resolution: f64,
    pub caustic_eps: f64,
    pub amplitude_floor: f64,
    pub sample_spacing: f64,
    pub delta_s: f64,
}

impl Default for TdwkbOptions {
    fn default() -> Self {
        Self {
            t_i: None,
            resolution: DEFAULT_RESOLUTION,
            caustic_eps: DEFAULT_CAUSTIC_EPS,
            amplitude_floor: DEFAULT_AMPLITUDE_FLOOR,
            sample_spacing: DEFAULT_SAMPLE_SPACING,
            delta_s: DEFAULT_DELTA_S,
        }
    }
}

impl TdwkbOptions {
    pub fn initial_time(&self, params: &ModelParams) -> f64 {
        self.t_i.unwrap_or(params.times().t2 / DEFAULT_TI_DIVISOR)
    }
}

/// The exact interaction-picture state at `t_i` and its derivative,
/// evaluable at any position.
#[derive(Debug, Clone)]
pub struct WkbSource {
    params: ModelParams,
    t_i: f64,
    coeffs: Vec<Complex64>,
    dcoeffs: Vec<Complex64>,
    basis: HermiteBasis,
}

impl WkbSource {
    pub fn new(params: &ModelParams, t_i: f64) -> Result<Self> {
        if !(t_i > 0.0) {
            return Err(Error::InvalidParameter(format!("t_i must be > 0, got {t_i}")));
        }
        let exact = ExactKerr::new(params, Picture::Interaction)?;
        let coeffs = exact.state(t_i).coeffs;
        let dcoeffs = derivative_coeffs(&coeffs, params.hbar());
        let basis = HermiteBasis::new(coeffs.len(), params.hbar());
        Ok(Self { params: *params, t_i, coeffs, dcoeffs, basis })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn t_i(&self) -> f64 {
        self.t_i
    }

    /// `(psi(q, t_i), d psi / dq)`.
    pub fn psi(&self, q: f64) -> Result<(Complex64, Complex64)> {
        self.basis.superpose_pair(&self.coeffs, &self.dcoeffs, q)
    }

    /// Manifold point at `s`; the phase is continued to the multiple of
    /// `2 pi` nearest to `action_ref / hbar`.
    pub fn sample(&self, s: f64, action_ref: f64) -> Result<ManifoldSample> {
        let hbar = self.params.hbar();
        let (psi, dpsi) = self.psi(s)?;
        let phase = psi.arg();
        let turns = ((action_ref / hbar - phase) / TAU).round();
        Ok(ManifoldSample {
            s,
            q: s,
            p: hbar * (dpsi / psi).im,
            action: hbar * (phase + TAU * turns),
            amplitude: psi.norm(),
        })
    }
}

/// One point of a Lagrangian manifold, labelled by its initial position `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManifoldSample {
    pub s: f64,
    pub q: f64,
    pub p: f64,
    pub action: f64,
    pub amplitude: f64,
}

/// A sampled Lagrangian manifold at time `t_label`, together with the
/// initial samples it was transported from.
#[derive(Debug, Clone)]
pub struct Manifold {
    pub t_label: f64,
    pub samples: Vec<ManifoldSample>,
    initial: Vec<ManifoldSample>,
    source: Arc<WkbSource>,
    resolution: f64,
}

impl Manifold {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn initial_samples(&self) -> &[ManifoldSample] {
        &self.initial
    }

    pub fn source(&self) -> &WkbSource {
        &self.source
    }

    /// Time elapsed since `t_i`.
    pub fn elapsed(&self) -> f64 {
        self.t_label - self.source.t_i
    }

    /// Total number of windings swept between the slowest and fastest point.
    pub fn winding_spread(&self) -> f64 {
        let dt = self.elapsed();
        let (lo, hi) = self.initial.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            let w = frequency(0.5 * (x.q * x.q + x.p * x.p), &self.source.params, Picture::Interaction) * dt;
            (lo.min(w), hi.max(w))
        });
        (hi - lo) / TAU
    }
}

/// Contiguous interval around the maximum of `|psi(t_i)|` where the
/// amplitude stays above `floor` times the maximum.
pub fn initial_support(source: &WkbSource, floor: f64) -> Result<(f64, f64)> {
    let p = source.params();
    let radius = (2.0 * p.hbar() * (source.coeffs.len() as f64 + 1.0)).sqrt() + 4.0 * p.hbar().sqrt();
    let step = 0.05 * p.hbar().sqrt();
    let n = (2.0 * radius / step).ceil() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|i| -radius + i as f64 * step).collect();
    let amp: Vec<f64> = grid.par_iter().map(|&q| source.psi(q).map(|v| v.0.norm())).collect::<Result<_>>()?;
    let (imax, &amax) = amp
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let cut = floor * amax;
    let mut lo = imax;
    while lo > 0 && amp[lo - 1] > cut {
        lo -= 1;
    }
    let mut hi = imax;
    while hi + 1 < n && amp[hi + 1] > cut {
        hi += 1;
    }
    Ok((grid[lo], grid[hi]))
}

/// Samples `A0 = |psi(q, t_i)|`, `S0 = hbar * unwrapped phase` and
/// `p = S0'(q)` on `n_samples` uniform points of `q_range`.
///
/// The phase is unwrapped from the largest-amplitude sample outward. The
/// state is rejected as not primitive if the amplitude vanishes inside the
/// range or the phase moves by more than `pi/2` between neighbours.
pub fn extract_initial_manifold(
    params: &ModelParams,
    t_i: f64,
    q_range: (f64, f64),
    n_samples: usize,
) -> Result<Manifold> {
    let source = Arc::new(WkbSource::new(params, t_i)?);
    extract_from_source(source, q_range, n_samples, DEFAULT_RESOLUTION * params.hbar().sqrt())
}

fn extract_from_source(
    source: Arc<WkbSource>,
    q_range: (f64, f64),
    n_samples: usize,
    resolution: f64,
) -> Result<Manifold> {
    let (a, b) = q_range;
    if !(a < b) || n_samples < 3 {
        return Err(Error::InvalidParameter(format!(
            "need q_min < q_max and at least 3 samples, got [{a}, {b}] with {n_samples}"
        )));
    }
    let hbar = source.params.hbar();
    let grid: Vec<f64> = (0..n_samples).map(|i| a + (b - a) * i as f64 / (n_samples - 1) as f64).collect();
    let values: Vec<(Complex64, Complex64)> = grid.par_iter().map(|&q| source.psi(q)).collect::<Result<_>>()?;

    let amax = values.iter().map(|v| v.0.norm()).fold(0.0, f64::max);
    if let Some(i) = values.iter().position(|v| v.0.norm() <= ZERO_AMPLITUDE * amax) {
        return Err(Error::NotPrimitiveWkb(format!("amplitude vanishes at q = {}", grid[i])));
    }
    let centre = values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1 .0.norm().total_cmp(&y.1 .0.norm()))
        .map(|(i, _)| i)
        .expect("non-empty grid");

    let mut phase = vec![0.0; n_samples];
    phase[centre] = values[centre].0.arg();
    let mut unwrap = |from: usize, to: usize| -> Result<()> {
        let step = (values[to].0 / values[from].0).arg();
        if step.abs() > 0.5 * PI {
            return Err(Error::NotPrimitiveWkb(format!(
                "phase jumps by {step:.3} between q = {} and q = {}",
                grid[from], grid[to]
            )));
        }
        phase[to] = phase[from] + step;
        Ok(())
    };
    for i in (centre + 1)..n_samples {
        unwrap(i - 1, i)?;
    }
    for i in (0..centre).rev() {
        unwrap(i + 1, i)?;
    }

    let samples: Vec<ManifoldSample> = grid
        .iter()
        .zip(&values)
        .zip(&phase)
        .map(|((&q, (psi, dpsi)), &ph)| ManifoldSample {
            s: q,
            q,
            p: hbar * (dpsi / psi).im,
            action: hbar * ph,
            amplitude: psi.norm(),
        })
        .collect();
    Ok(Manifold {
        t_label: source.t_i,
        initial: samples.clone(),
        samples,
        source,
        resolution,
    })
}

/// The initial manifold with the default support, spacing and resolution.
pub fn default_initial_manifold(params: &ModelParams, opts: &TdwkbOptions) -> Result<Manifold> {
    let source = Arc::new(WkbSource::new(params, opts.initial_time(params))?);
    let range = initial_support(&source, opts.amplitude_floor)?;
    let spacing = opts.sample_spacing * params.hbar().sqrt();
    let n = ((range.1 - range.0) / spacing).ceil() as usize + 1;
    extract_from_source(source, range, n.max(3), opts.resolution * params.hbar().sqrt())
}

/// Moves one initial point along its torus for `dt`, accumulating
/// `S = S0 + (p_f q_f - p_i q_i)/2 + (omega I - H) dt`.
fn transport(x: &ManifoldSample, dt: f64, params: &ModelParams) -> ManifoldSample {
    let i = 0.5 * (x.q * x.q + x.p * x.p);
    let d = i - params.pivot_action();
    let w = 2.0 * params.gamma() * d;
    let h = params.gamma() * d * d;
    let (sn, cs) = (w * dt).sin_cos();
    let q = x.q * cs + x.p * sn;
    let p = x.p * cs - x.q * sn;
    ManifoldSample {
        s: x.s,
        q,
        p,
        action: x.action + 0.5 * (p * q - x.p * x.q) + (w * i - h) * dt,
        amplitude: x.amplitude,
    }
}

/// Transports the manifold by a further `delta_t`, inserting initial points
/// wherever neighbours end up farther apart than the resolution.
///
/// Evolution is always recomputed from the initial samples with the exact
/// flow, so repeated calls do not accumulate error.
pub fn evolve_manifold(m: &Manifold, delta_t: f64) -> Result<Manifold> {
    let params = m.source.params;
    let dt = m.elapsed() + delta_t;
    let mut initial = m.initial.clone();
    let mut current: Vec<ManifoldSample> = initial.par_iter().map(|x| transport(x, dt, &params)).collect();

    for _ in 0..MAX_REFINE_PASSES {
        let inserts: Vec<Vec<ManifoldSample>> = (0..current.len() - 1)
            .into_par_iter()
            .map(|j| {
                let gap = (current[j + 1].q - current[j].q).hypot(current[j + 1].p - current[j].p);
                if gap <= m.resolution {
                    return Ok(Vec::new());
                }
                let extra = (gap / m.resolution).ceil() as usize - 1;
                let (s0, s1) = (initial[j].s, initial[j + 1].s);
                (1..=extra)
                    .map(|e| {
                        let s = s0 + (s1 - s0) * e as f64 / (extra + 1) as f64;
                        let nearer = if s - s0 < s1 - s { &initial[j] } else { &initial[j + 1] };
                        m.source.sample(s, nearer.action)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let added: usize = inserts.iter().map(Vec::len).sum();
        if added == 0 {
            break;
        }
        let mut next = Vec::with_capacity(initial.len() + added);
        for (j, x) in initial.iter().enumerate() {
            next.push(*x);
            if let Some(new) = inserts.get(j) {
                next.extend_from_slice(new);
            }
        }
        initial = next;
        current = initial.par_iter().map(|x| transport(x, dt, &params)).collect();
    }

    // transported amplitude |dq_i/dq_f|^(1/2) from neighbouring samples
    let n = current.len();
    for j in 0..n {
        let (a, b) = (j.saturating_sub(1), (j + 1).min(n - 1));
        let dqf = current[b].q - current[a].q;
        let dqi = initial[b].s - initial[a].s;
        current[j].amplitude = initial[j].amplitude * (dqi / dqf).abs().sqrt();
    }

    Ok(Manifold {
        t_label: m.source.t_i + dt,
        samples: current,
        initial,
        source: Arc::clone(&m.source),
        resolution: m.resolution,
    })
}

/// One intersection of the evolved manifold with a vertical line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    /// Initial position, which labels the trajectory.
    pub s: f64,
    pub q_i: f64,
    pub p_i: f64,
    pub q_f: f64,
    pub p_f: f64,
    /// Initial action `S0(q_i)`.
    pub s0: f64,
    /// Initial amplitude `A0(q_i)`.
    pub a0: f64,
    pub action: f64,
    pub mu: i64,
    pub amplitude: f64,
    /// `dq_f / dq_i` along the manifold.
    pub jacobian: f64,
    pub caustic_flag: bool,
}

impl Branch {
    /// `A exp(i S / hbar - i mu pi / 2)`.
    pub fn contribution(&self, hbar: f64) -> Complex64 {
        let maslov = -0.5 * PI * self.mu.rem_euclid(4) as f64;
        Complex64::from_polar(self.amplitude, self.action / hbar + maslov)
    }
}

fn evolved_point(source: &WkbSource, s: f64, action_ref: f64, dt: f64) -> Result<(ManifoldSample, ManifoldSample)> {
    let x = source.sample(s, action_ref)?;
    Ok((x, transport(&x, dt, &source.params)))
}

/// `dq_f/ds` at `s` from central differences at `delta` and `delta/2`,
/// Richardson-extrapolated.
pub fn manifold_derivative(source: &WkbSource, s: f64, action_ref: f64, dt: f64, delta: f64) -> Result<f64> {
    let qf = |x: f64| evolved_point(source, x, action_ref, dt).map(|v| v.1.q);
    let d1 = (qf(s + delta)? - qf(s - delta)?) / (2.0 * delta);
    let h = 0.5 * delta;
    let d2 = (qf(s + h)? - qf(s - h)?) / (2.0 * h);
    Ok((4.0 * d2 - d1) / 3.0)
}

/// `S0 + (p_f q_f - p_i q_i)/2 + (omega(I) I - H(I)) delta_t` with
/// `omega = 2 gamma (I - I_p)`, `H = gamma (I - I_p)^2`.
pub fn branch_action(b: &Branch, delta_t: f64, params: &ModelParams) -> f64 {
    let i = 0.5 * (b.q_i * b.q_i + b.p_i * b.p_i);
    let d = i - params.pivot_action();
    let w = 2.0 * params.gamma() * d;
    let h = params.gamma() * d * d;
    b.s0 + 0.5 * (b.p_f * b.q_f - b.p_i * b.q_i) + (w * i - h) * delta_t
}

/// Signed number of turning points (zeros of `p`) passed, positive for
/// clockwise motion. A trajectory that starts or ends exactly on a turning
/// point is rejected.
pub fn branch_maslov(b: &Branch, delta_t: f64, params: &ModelParams) -> Result<i64> {
    let i = 0.5 * (b.q_i * b.q_i + b.p_i * b.p_i);
    let sweep = frequency(i, params, Picture::Interaction) * delta_t;
    if sweep == 0.0 {
        return Ok(0);
    }
    if b.p_i == 0.0 || b.p_f == 0.0 {
        return Err(Error::DegenerateArc);
    }
    let theta = b.q_i.atan2(b.p_i);
    Ok(turning_points(theta, theta + sweep))
}

/// `A0(q_i) |dq_i/dq_f|^(1/2)`, or `CausticDivergence` on a flagged branch.
pub fn branch_amplitude(b: &Branch) -> Result<f64> {
    if b.caustic_flag {
        return Err(Error::CausticDivergence { q: b.q_f, jacobian: b.jacobian });
    }
    Ok(b.a0 / b.jacobian.abs().sqrt())
}

fn make_branch(
    source: &WkbSource,
    s: f64,
    action_ref: f64,
    dt: f64,
    delta: f64,
    caustic_eps: f64,
) -> Result<Branch> {
    let params = source.params;
    let (x, y) = evolved_point(source, s, action_ref, dt)?;
    let jacobian = if dt == 0.0 { 1.0 } else { manifold_derivative(source, s, action_ref, dt, delta)? };
    let mut b = Branch {
        s,
        q_i: x.q,
        p_i: x.p,
        q_f: y.q,
        p_f: y.p,
        s0: x.action,
        a0: x.amplitude,
        action: 0.0,
        mu: 0,
        amplitude: f64::NAN,
        jacobian,
        caustic_flag: jacobian.abs() < caustic_eps,
    };
    b.action = branch_action(&b, dt, &params);
    b.mu = branch_maslov(&b, dt, &params)?;
    if !b.caustic_flag {
        b.amplitude = branch_amplitude(&b)?;
    }
    Ok(b)
}

/// Every crossing of the manifold with the line `q`.
///
/// Sign changes of `q(s) - q` between neighbouring samples are refined on
/// the exact map. A local extremum of `q(s)` that stays on one side at the
/// samples is searched for a hidden pair of crossings.
pub fn find_branches(m: &Manifold, q: f64) -> Result<Vec<Branch>> {
    find_branches_with(m, q, DEFAULT_DELTA_S, DEFAULT_CAUSTIC_EPS)
}

pub fn find_branches_with(m: &Manifold, q: f64, delta_s: f64, caustic_eps: f64) -> Result<Vec<Branch>> {
    let dt = m.elapsed();
    let src = &*m.source;
    let delta = delta_s * src.params.hbar().sqrt();
    let xs = &m.samples;
    let init = &m.initial;
    let f: Vec<f64> = xs.iter().map(|x| x.q - q).collect();
    let g = |s: f64, r: f64| evolved_point(src, s, r, dt).map(|v| v.1.q - q).unwrap_or(f64::NAN);
    let xtol = 1e-14 * src.params.hbar().sqrt();

    let mut roots: Vec<(f64, f64)> = Vec::new();
    for j in 0..f.len().saturating_sub(1) {
        let (fa, fb) = (f[j], f[j + 1]);
        if fa == 0.0 {
            roots.push((init[j].s, init[j].action));
            continue;
        }
        let (sa, sb) = (init[j].s, init[j + 1].s);
        let r = init[j].action;
        if fa.signum() != fb.signum() && fb != 0.0 {
            let s = brent(|s| g(s, r), sa, sb, fa, fb, xtol)
                .map_err(|_| Error::UnresolvedSegment { s_lo: sa, s_hi: sb })?;
            roots.push((s, r));
        } else if j > 0 && fa.signum() == f[j - 1].signum() && fa.signum() == fb.signum() {
            let turning = (fa - f[j - 1]) * (fb - fa) < 0.0;
            let close = fa.abs() < (fb - fa).abs().max((fa - f[j - 1]).abs());
            if turning && close {
                let lo = init[j - 1].s;
                let sign = fa.signum();
                let (s_ext, f_ext) = extremum(|s| sign * g(s, r), lo, sb);
                if f_ext < 0.0 {
                    let fl = f[j - 1];
                    let fe = sign * f_ext;
                    let s1 = brent(|s| g(s, r), lo, s_ext, fl, fe, xtol)
                        .map_err(|_| Error::UnresolvedSegment { s_lo: lo, s_hi: s_ext })?;
                    let s2 = brent(|s| g(s, r), s_ext, sb, fe, fb, xtol)
                        .map_err(|_| Error::UnresolvedSegment { s_lo: s_ext, s_hi: sb })?;
                    roots.push((s1, r));
                    roots.push((s2, r));
                }
            }
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    roots.dedup_by(|a, b| (a.0 - b.0).abs() <= 4.0 * xtol);
    roots
        .into_iter()
        .map(|(s, r)| make_branch(src, s, r, dt, delta, caustic_eps))
        .collect()
}

/// Minimum of `h` on `[a, b]` by golden-section search.
fn extremum(h: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let ratio = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (h(c), h(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = h(d);
        }
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid of TDWKB values with the positions where caustic branches were dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdwkbWavefunction {
    pub q: Vec<f64>,
    pub values: Vec<Complex64>,
    pub branch_counts: Vec<usize>,
    /// Merged runs of grid points at which at least one branch was caustic.
    pub caustic_intervals: Vec<(f64, f64)>,
}

impl TdwkbWavefunction {
    pub fn is_caustic(&self, q: f64) -> bool {
        self.caustic_intervals.iter().any(|&(a, b)| q >= a && q <= b)
    }
}

/// `sum_branches A exp(i S / hbar - i mu pi / 2)` on `q_grid`, in the
/// interaction picture with the default options.
pub fn wavefunction_tdwkb(params: &ModelParams, t: f64, q_grid: &[f64]) -> Result<TdwkbWavefunction> {
    wavefunction_tdwkb_with(params, t, q_grid, &TdwkbOptions::default())
}

pub fn wavefunction_tdwkb_with(
    params: &ModelParams,
    t: f64,
    q_grid: &[f64],
    opts: &TdwkbOptions,
) -> Result<TdwkbWavefunction> {
    let t_i = opts.initial_time(params);
    if !(t > t_i) {
        return Err(Error::Domain { method: "tdwkb", t, min: t_i });
    }
    let m0 = default_initial_manifold(params, opts)?;
    let m = evolve_manifold(&m0, t - t_i)?;
    wavefunction_on_manifold(&m, q_grid, opts)
}

pub fn wavefunction_on_manifold(m: &Manifold, q_grid: &[f64], opts: &TdwkbOptions) -> Result<TdwkbWavefunction> {
    let hbar = m.source.params.hbar();
    let per_point: Vec<(Complex64, usize, bool)> = q_grid
        .par_iter()
        .map(|&q| {
            let branches = find_branches_with(m, q, opts.delta_s, opts.caustic_eps)?;
            let caustic = branches.iter().any(|b| b.caustic_flag);
            let value = branches.iter().filter(|b| !b.caustic_flag).map(|b| b.contribution(hbar)).sum();
            Ok((value, branches.len(), caustic))
        })
        .collect::<Result<_>>()?;

    let mut caustic_intervals: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for (&q, &(_, _, c)) in q_grid.iter().zip(&per_point) {
        match (c, open.as_mut()) {
            (true, Some(iv)) => iv.1 = q,
            (true, None) => open = Some((q, q)),
            (false, Some(_)) => caustic_intervals.extend(open.take()),
            (false, None) => {}
        }
    }
    caustic_intervals.extend(open);

    Ok(TdwkbWavefunction {
        q: q_grid.to_vec(),
        values: per_point.iter().map(|v| v.0).collect(),
        branch_counts: per_point.iter().map(|v| v.1).collect(),
        caustic_intervals,
    })
}
