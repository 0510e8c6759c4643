//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_4;

use kerr_revival::kernel::{action, classical_hamiltonian, flow, frequency};
use kerr_revival::tdwkb::{
    branch_action, default_initial_manifold, evolve_manifold, find_branches, manifold_derivative, Manifold,
    TdwkbOptions, DEFAULT_DELTA_S,
};
use kerr_revival::vanvleck::{
    k_window, orbit_contributions, solve_boundary_problem, Expansion, OrbitFamily, WavefunctionOptions,
    DEFAULT_WEIGHT_CUTOFF,
};
use kerr_revival::{ModelParams, Picture};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 7/15-point Gauss-Kronrod panel: (Kronrod estimate, |Kronrod - Gauss|).
fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Globally adaptive Gauss-Kronrod integral of a complex function on `[a, b]`:
/// the panel with the largest error estimate is bisected until the summed
/// estimate drops below `tol * max(1, |integral|)` or the panel budget is spent.
pub fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    const MAX_PANELS: usize = 2000;
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    while panels.len() < MAX_PANELS {
        let total: f64 = panels.iter().map(|x| x.3).sum();
        let value: Complex64 = panels.iter().map(|x| x.2).sum();
        if total <= tol * value.norm().max(1.0) {
            break;
        }
        let worst = (0..panels.len()).max_by(|&i, &j| panels[i].3.total_cmp(&panels[j].3)).unwrap();
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
    panels.iter().map(|x| x.2).sum()
}

pub fn integrate_real(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, tol).re
}

/// `int_0^t (p dq/dt - H) dt'` along the exact flow from `(q, p)`, by
/// quadrature on panels of at most an eighth of a turn.
pub fn lagrangian_action(q: f64, p: f64, t: f64, params: &ModelParams, picture: Picture) -> f64 {
    let w = frequency(action(q, p), params, picture);
    let panels = ((w * t).abs() / FRAC_PI_4).ceil().max(1.0) as usize;
    let h = t / panels as f64;
    let lagrangian = |q: f64, p: f64, s: f64| {
        let (qs, ps) = flow(q, p, s, params, picture);
        // dq/dt = dH/dp = w p for a function of the action alone
        ps * w * ps - classical_hamiltonian(qs, ps, params, picture)
    };
    // each panel is integrated from its own start point so the flow angle stays small
    (0..panels)
        .map(|j| {
            let (qj, pj) = flow(q, p, j as f64 * h, params, picture);
            integrate_real(|s| lagrangian(qj, pj, s), 0.0, h, 1e-14)
        })
        .sum()
}

/// Largest `|a_i - b_i|`.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `|a - b| / max(1, |b|)`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Reference-parameter manifold transported to time `t`.
pub fn manifold_at(p: &ModelParams, t: f64) -> Manifold {
    let m0 = default_initial_manifold(p, &TdwkbOptions::default()).unwrap();
    let dt = t - m0.t_label;
    evolve_manifold(&m0, dt).unwrap()
}

/// Worst relative gap between the closed-form action of solved orbits and
/// the Lagrangian quadrature, over `n` random boundary problems.
pub fn orbit_action_worst(p: &ModelParams, family: OrbitFamily, n: usize, seed: u64) -> f64 {
    let times = p.times();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let t = rng.gen_range(2.0 * times.t1..3.0 * times.t2);
        let w = k_window(p, t, DEFAULT_WEIGHT_CUTOFF).unwrap();
        let k = rng.gen_range(w.k_lo..=w.k_hi);
        let q1 = rng.gen_range(-1.0..1.0);
        let q2 = rng.gen_range(-1.0..1.0);
        let traj = solve_boundary_problem(q2, q1, t, k, family, p).unwrap();
        assert!((traj.q2 - q2).abs() < 1e-9, "endpoint miss {}", traj.q2 - q2);
        let oracle = lagrangian_action(traj.q1, traj.p1, t, p, Picture::Lab);
        worst = worst.max(rel(traj.hamilton_action(), oracle));
    }
    worst
}

/// Worst relative gap between `branch_action` and the Lagrangian quadrature
/// over 100 random branches (ten times, ten positions each).
pub fn branch_action_worst(p: &ModelParams, seed: u64) -> f64 {
    let t2 = p.times().t2;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for j in 0..10 {
        let t = t2 * (0.05 + 0.1 * j as f64 + rng.gen_range(0.0..0.05));
        let m = manifold_at(p, t);
        let dt = m.elapsed();
        for _ in 0..10 {
            let q = rng.gen_range(-4.0..4.0);
            let branches = find_branches(&m, q).unwrap();
            let b = branches[rng.gen_range(0..branches.len())];
            assert!((b.q_f - q).abs() < 1e-10);
            let (qf, pf) = flow(b.q_i, b.p_i, dt, p, Picture::Interaction);
            assert!((qf - b.q_f).abs() < 1e-9 && (pf - b.p_f).abs() < 1e-9);
            let oracle = b.s0 + lagrangian_action(b.q_i, b.p_i, dt, p, Picture::Interaction);
            worst = worst.max(rel(branch_action(&b, dt, p), oracle));
        }
    }
    worst
}

/// Worst absolute gap between the closed-form Gaussian integral of orbit
/// terms and adaptive quadrature of the same integrand.
pub fn gaussian_integral_worst(p: &ModelParams, seed: u64) -> f64 {
    let psi0 = p.coherent_state();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..40 {
        let t = rng.gen_range(0.3 * p.times().t2..2.5 * p.times().t2);
        let q = rng.gen_range(-2.5..2.5);
        let expansion = if rng.gen_bool(0.5) { Expansion::Origin } else { Expansion::Endpoint };
        let opts = WavefunctionOptions { include_negative_momentum: true, expansion, ..Default::default() };
        let terms = orbit_contributions(p, t, q, &opts).unwrap();
        for c in terms.iter().step_by(7) {
            let closed = c.integrate(&psi0);
            let numeric = integrate(|x| c.integrand(x, &psi0), -14.0, 14.0, 1e-13);
            worst = worst.max((closed - numeric).norm());
        }
    }
    worst
}

/// Worst relative change of the branch amplitude when the displacement used
/// for `dq_f/ds` is halved.
pub fn amplitude_halving_worst(p: &ModelParams) -> f64 {
    let t2 = p.times().t2;
    let mut worst = 0.0_f64;
    for t in [t2 / 16.0, t2 / 2.38567, t2] {
        let m = manifold_at(p, t);
        let delta = DEFAULT_DELTA_S * p.hbar().sqrt();
        for q in [-1.5, 0.0, 0.7, 2.0] {
            for b in find_branches(&m, q).unwrap().iter().filter(|b| !b.caustic_flag) {
                let d_full = manifold_derivative(m.source(), b.s, b.s0, m.elapsed(), delta).unwrap();
                let d_half = manifold_derivative(m.source(), b.s, b.s0, m.elapsed(), 0.5 * delta).unwrap();
                let (a1, a2) = (b.a0 / d_full.abs().sqrt(), b.a0 / d_half.abs().sqrt());
                worst = worst.max((a1 - a2).abs() / a2.abs());
            }
        }
    }
    worst
}
