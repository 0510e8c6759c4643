use std::f64::consts::{PI, TAU};

use kerr_revival::exact::{coherent_fock_coeffs, evolve_exact, ExactKerr};
use kerr_revival::kernel::{action, derive_times, flow};
use kerr_revival::theta::{deformation, theta3, theta3_functional_equation, ThetaArgs, DEFAULT_TOL};
use kerr_revival::vanvleck::{k_window, OrbitFamily, OrbitTerm, Trajectory, DEFAULT_WEIGHT_CUTOFF};
use kerr_revival::{ModelParams, Picture};
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (0.2f64..3.0, 0.2f64..2.0, -5.0f64..5.0, 3.0f64..15.0)
        .prop_map(|(g, h, q0, p0)| ModelParams::new(g, h, q0, p0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_conserves_action(q in -20.0f64..20.0, p in -20.0f64..20.0, t in -10.0f64..10.0, interaction: bool) {
        let pr = ModelParams::reference();
        let pic = if interaction { Picture::Interaction } else { Picture::Lab };
        let (q2, p2) = flow(q, p, t, &pr, pic);
        let (i1, i2) = (action(q, p), action(q2, p2));
        prop_assert!((i1 - i2).abs() <= 1e-12 * i1.max(1.0));
    }

    #[test]
    fn timescales_scale_inversely_with_gamma(pr in params(), c in 0.1f64..10.0) {
        let scaled = ModelParams::new(pr.gamma() * c, pr.hbar(), pr.q0(), pr.p0()).unwrap();
        let (a, b) = (derive_times(&pr), derive_times(&scaled));
        prop_assert!((b.t1 * c - a.t1).abs() <= 1e-12 * a.t1);
        prop_assert!((b.t2 * c - a.t2).abs() <= 1e-12 * a.t2);
    }

    #[test]
    fn evolution_is_unitary(pr in params(), t in -50.0f64..50.0) {
        let exact = ExactKerr::new(&pr, Picture::Lab).unwrap();
        let n0 = exact.initial().norm_sqr();
        prop_assert!((exact.state(t).norm_sqr() - n0).abs() < 1e-13);
    }

    #[test]
    fn revival_identity_coefficientwise(pr in params(), t in -5.0f64..5.0) {
        let psi = coherent_fock_coeffs(&pr.coherent_state(), 80).unwrap_or_else(|_| {
            kerr_revival::exact::coherent_fock_coeffs_with_tol(&pr.coherent_state(), 80, 1.0).unwrap()
        });
        let t2 = pr.times().t2;
        let a = evolve_exact(&psi, t, &pr, Picture::Lab);
        let b = evolve_exact(&psi, t + t2, &pr, Picture::Lab);
        let phase = Complex64::from_polar(1.0, -0.25 * PI);
        // t + T2 itself carries a rounding error of eps (|t| + T2), which the
        // phase gamma hbar (n + 1/2)^2 amplifies
        let dt = 2.0 * f64::EPSILON * (t.abs() + t2);
        for (n, (x, y)) in a.coeffs.iter().zip(&b.coeffs).enumerate() {
            let m = n as f64 + 0.5;
            let conditioning = 4.0 * pr.gamma() * pr.hbar() * m * m * dt * x.norm();
            prop_assert!((y - phase * x).norm() < 1e-12 + conditioning);
        }
    }

    #[test]
    fn autocorrelation_is_hermitian_in_time(t in 0.0f64..7.0) {
        let exact = ExactKerr::new(&ModelParams::reference(), Picture::Lab).unwrap();
        let (a, b) = (exact.autocorrelation(t), exact.autocorrelation(-t));
        prop_assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn theta_periodic_in_z(zr in -3.0f64..3.0, zi in -1.0f64..1.0, tr in -2.0f64..2.0, ti in 0.3f64..3.0) {
        let tau = Complex64::new(tr, ti);
        let a = theta3(ThetaArgs::new(Complex64::new(zr, zi), tau).unwrap(), DEFAULT_TOL).unwrap();
        let b = theta3(ThetaArgs::new(Complex64::new(zr + PI, zi), tau).unwrap(), DEFAULT_TOL).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn theta_functional_equation(zr in -3.0f64..3.0, zi in -1.0f64..1.0, tr in -2.0f64..2.0, ti in 0.05f64..5.0) {
        let args = ThetaArgs::new(Complex64::new(zr, zi), Complex64::new(tr, ti)).unwrap();
        let direct = theta3(args, DEFAULT_TOL).unwrap();
        let transformed = theta3_functional_equation(args).unwrap();
        prop_assert!((direct - transformed).norm() <= 1e-12 * direct.norm().max(1.0));
    }

    #[test]
    fn deformation_offset_is_exact(k in 1u64..100_000) {
        let a = deformation(k as f64);
        prop_assert!(((a - 1.0).norm() - 1.0 / (TAU * k as f64)).abs() < 1e-15);
    }

    #[test]
    fn window_brackets_its_centre(m in 1.0f64..400.0) {
        let pr = ModelParams::reference();
        let t = m * pr.times().t1;
        if let Ok(w) = k_window(&pr, t, DEFAULT_WEIGHT_CUTOFF) {
            prop_assert!(w.k_lo >= 1);
            prop_assert!((w.k_lo as f64) <= w.k0.max(1.0) && w.k0 <= w.k_hi as f64 + 1.0);
            prop_assert!((w.k0 - m).abs() < 1e-9 * m);
        }
    }

    #[test]
    fn orbit_terms_are_consistent(k in 1u64..2000, x in 1.0f64..20.0, half: bool) {
        let pr = ModelParams::reference();
        let t = x * pr.times().t1;
        let family = if half { OrbitFamily::HalfPeriodic } else { OrbitFamily::Periodic };
        let term = OrbitTerm::new(k, family, &pr, t);
        prop_assert!((term.frequency() * t - TAU * family.windings(k)).abs() < 1e-12 * k as f64);
        prop_assert!((term.a0 - (4.0 * term.action * pr.gamma() * t).sqrt().recip()).abs() < 1e-15);
        prop_assert!(term.a0 > 0.0);
    }

    #[test]
    fn maslov_counts_turning_points(beta in -3.0f64..3.0, loops in 0u32..6, r in 1.0f64..20.0) {
        // full clockwise loops pass two turning points each
        let i = 0.5 * r * r;
        let t = TAU * loops as f64 / (2.0 * i);
        let traj = Trajectory::from_initial(r * beta.sin(), r * beta.cos(), t, 1.0);
        prop_assert_eq!(traj.maslov(), 2 * loops as i64);
    }
}
