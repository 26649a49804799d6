use crossing_core::cutoff::CutoffSpec;
use crossing_core::matrix::{Mat2, Matrix2, MatrixRole};
use crossing_core::model::{build_system, mu_k, Interval, SystemInputs};
use crossing_core::oscquad::{integrate_adaptive, OscIntegrand, QuadOptions};
use crossing_core::poly::{factorial, Order, Poly};
use crossing_core::presets::Preset;
use crossing_core::solver::{rescale_bases, transfer_matrix, Path, SolverOptions};
use crossing_core::statphase::{eta, EtaConvention};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #[test]
    fn mu_increases_with_k(eps in 1e-6..0.5f64, h in 1e-6..0.9f64, k in 1usize..6) {
        prop_assert!(mu_k(eps, h, k + 1) > mu_k(eps, h, k));
    }

    #[test]
    fn cutoff_is_a_plateau_bump(r1 in 0.05..0.6f64, gap in 0.05..0.35f64, x in -1.0..1.0f64) {
        let r2 = r1 + gap;
        let chi = CutoffSpec::new(r1, r2).unwrap();
        let v = chi.eval(x);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(chi.eval(r1), 1.0);
        prop_assert_eq!(chi.eval(-r1), 1.0);
        prop_assert_eq!(chi.eval(r2), 0.0);
        prop_assert_eq!(chi.eval(-r2), 0.0);
        prop_assert_eq!(chi.eval(x), chi.eval(-x));
    }

    #[test]
    fn orders_and_leading_gap(m in 1usize..5, lead in prop::sample::select(vec![-2.0, -0.5, 0.75, 1.5]), tail in -1.0..1.0f64) {
        let mut c = vec![0.0; m + 2];
        c[m] = lead;
        c[m + 1] = tail;
        let gap = Poly::new(c);
        let spec = build_system(SystemInputs {
            v1: gap.scale(0.5),
            v2: gap.scale(-0.5),
            u1: Poly::constant(1.0),
            u2: Poly::new(vec![0.0, 1.0]),
            eps1: 1e-3,
            eps2: 1e-3,
            h: 1e-2,
            interval: Interval::new(-0.5, 0.5).unwrap(),
            cutoff: CutoffSpec::new(0.2, 0.4).unwrap(),
        });
        // a second zero of the gap inside the interval is rejected
        let Ok(spec) = spec else { return Ok(()) };
        prop_assert_eq!((spec.m(), spec.n1(), spec.n2()), (m, 0, 1));
        let (om, o1, o2) = spec.recomputed_orders();
        prop_assert_eq!((om, o1, o2), (Order::Finite(m), Order::Finite(0), Order::Finite(1)));
        prop_assert_eq!(spec.gap().derivative_at_zero(m), lead * factorial(m));
    }

    #[test]
    fn eta_structure(m in 1usize..7, n in 0usize..6, positive in any::<bool>()) {
        let s = if positive { 1.0 } else { -1.0 };
        for conv in [EtaConvention::AsWritten, EtaConvention::Leading] {
            let e = eta(m, n, s, conv);
            if m % 2 == 1 {
                prop_assert!((e.norm() - 1.0).abs() < 1e-14);
            } else {
                // real multiple of i^n
                let rotated = e / Complex64::new(0.0, 1.0).powu(n as u32);
                prop_assert!(rotated.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rescaling_keeps_the_off_diagonal_product(
        a in complex(), b in complex(), c in complex(), d in complex(),
        e1 in 1e-4..1.0f64, e2 in 1e-4..1.0f64,
    ) {
        let t = Matrix2::new(Mat2::new(a, b, c, d), MatrixRole::Transfer);
        let r = rescale_bases(&t, e1, e2).unwrap();
        prop_assert!((r.t12() * r.t21() - b * c).norm() <= 1e-12 * (1.0 + (b * c).norm()));
        prop_assert_eq!(r.t11(), a);
        prop_assert_eq!(r.t22(), d);
        let back = rescale_bases(&r, e2, e1).unwrap();
        prop_assert!((back.entries - t.entries).max_abs() <= 1e-12 * (1.0 + t.entries.max_abs()));
    }

    #[test]
    fn quadrature_respects_conjugation(c2 in 0.5..2.0f64, c3 in -1.0..1.0f64, shift in -0.2..0.2f64, h in 2e-3..5e-2f64) {
        let chi = CutoffSpec::default();
        let phase = Poly::new(vec![0.0, 0.0, c2, c3]);
        let amp = move |x: f64| Complex64::new(chi.eval(x) * (1.0 + shift * x), shift);
        let q = QuadOptions::default();
        let a = integrate_adaptive(&OscIntegrand::new(amp, phase.clone(), h, -1.0, 1.0), &q).unwrap();
        let b = integrate_adaptive(&OscIntegrand::new(move |x| amp(x).conj(), phase.scale(-1.0), h, -1.0, 1.0), &q).unwrap();
        prop_assert!((b.value - a.value.conj()).norm() <= 2.0 * (a.error + b.error) + 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transfer_matrix_is_unimodular(
        preset in prop::sample::select(vec![Preset::TangentM2, Preset::TangentM3, Preset::LzLinear, Preset::VanishingCoupling]),
        h_exp in 2.0..3.0f64,
        mu in 0.01..0.1f64,
    ) {
        let h = 10f64.powf(-h_exp);
        let spec = preset.spec(h, Some(preset.eps_for_mu(h, mu))).unwrap();
        let t = transfer_matrix(&spec, Path::DirectOde, &SolverOptions::default()).unwrap().matrix;
        prop_assert!(t.det_deviation <= 1e-8, "{}", t.det_deviation);
        prop_assert!(t.constancy_deviation <= 1e-6);
    }
}
