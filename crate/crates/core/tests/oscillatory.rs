use std::f64::consts::PI;

use crossing_core::cutoff::CutoffSpec;
use crossing_core::oscquad::{brute_force, integrate_adaptive, omega_tilde, BruteForceOptions, OscIntegrand, QuadOptions};
use crossing_core::poly::Poly;
use crossing_core::statphase::{dsp_expansion, omega_tilde0, EtaConvention};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tight() -> QuadOptions {
    let mut q = QuadOptions::with_tol(1e-12);
    q.tol_abs = 1e-16;
    q
}

#[test]
fn three_cases_against_brute_force() {
    let chi = CutoffSpec::default();
    let q = QuadOptions::default();
    let bf = BruteForceOptions::default();

    let g = OscIntegrand::new(|_| c(1.0, 0.0), Poly::zero(), 0.3, 0.0, 1.0);
    let (a, b) = (integrate_adaptive(&g, &q).unwrap(), brute_force(&g, &bf).unwrap());
    assert!((a.value - 1.0).norm() < 1e-14 && (b.value - 1.0).norm() < 1e-14);

    let h = 0.1;
    let g = OscIntegrand::new(|_| c(1.0, 0.0), Poly::monomial(1.0, 1), h, -1.0, 1.0);
    let exact = 2.0 * h * (1.0 / h).sin();
    assert!((exact + 0.10880).abs() < 1e-5);
    let (a, b) = (integrate_adaptive(&g, &q).unwrap(), brute_force(&g, &bf).unwrap());
    assert!((a.value - exact).norm() < 1e-10, "{}", a.value);
    assert!((a.value - b.value).norm() <= 10.0 * (a.error + b.error) + 1e-12);

    let h = 1e-3;
    let g = OscIntegrand::new(|x: f64| c(chi.eval(x) * (-x * x).exp(), 0.0), Poly::monomial(0.5, 2), h, -1.0, 1.0);
    let stationary = (2.0 * PI * h).sqrt() * Complex64::from_polar(1.0, PI / 4.0);
    let (a, b) = (integrate_adaptive(&g, &q).unwrap(), brute_force(&g, &bf).unwrap());
    assert!((a.value - stationary).norm() / stationary.norm() <= 0.02);
    assert!((a.value - b.value).norm() <= 10.0 * (a.error + b.error) + 1e-12, "{} vs {}", a.value, b.value);
}

#[test]
fn doubling_oversample_is_within_the_error_estimate() {
    let chi = CutoffSpec::default();
    let g = OscIntegrand::new(|x: f64| c(chi.eval(x), 0.0), Poly::monomial(1.0 / 3.0, 3), 1e-3, -1.0, 1.0);
    let coarse = brute_force(&g, &BruteForceOptions { oversample: 8.0, ..Default::default() }).unwrap();
    let fine = brute_force(&g, &BruteForceOptions { oversample: 16.0, ..Default::default() }).unwrap();
    // below ~1e-14 relative the Richardson estimate only sees round-off
    assert!((coarse.value - fine.value).norm() <= coarse.error.max(1e-14 * fine.value.norm()));
}

#[test]
fn conjugation_and_linearity() {
    let chi = CutoffSpec::default();
    let phase = Poly::new(vec![0.0, 0.0, 1.0, 0.4]);
    let q = QuadOptions::default();
    let h = 2e-3;
    let a1 = |x: f64| c(chi.eval(x) * (1.0 + x), 0.5 * x * x);
    let a2 = |x: f64| c(chi.eval(x) * x.cos(), -0.3);
    let i1 = integrate_adaptive(&OscIntegrand::new(a1, phase.clone(), h, -1.0, 1.0), &q).unwrap();
    let conj = integrate_adaptive(&OscIntegrand::new(|x| a1(x).conj(), phase.scale(-1.0), h, -1.0, 1.0), &q).unwrap();
    assert!((conj.value - i1.value.conj()).norm() <= 2.0 * (i1.error + conj.error) + 1e-14);

    let i2 = integrate_adaptive(&OscIntegrand::new(a2, phase.clone(), h, -1.0, 1.0), &q).unwrap();
    let sum = integrate_adaptive(&OscIntegrand::new(|x| a1(x) + a2(x), phase, h, -1.0, 1.0), &q).unwrap();
    assert!((sum.value - i1.value - i2.value).norm() <= 2.0 * (i1.error + i2.error + sum.error) + 1e-14);
}

#[test]
fn omega_tilde_tends_to_closed_form() {
    let w = Poly::constant(1.0);
    let q = Poly::monomial(1.0, 2);
    let chi = CutoffSpec::default();
    let limit = omega_tilde0(2, 0, &w, &q, EtaConvention::Leading).unwrap();
    assert!((limit - 2.2310).norm() < 5e-4);
    let devs: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&h| (omega_tilde(2, 0, &w, &q, h, &chi, &tight()).unwrap().value - limit).norm())
        .collect();
    assert!(devs[2] < devs[0]);
    // with W = 1 the h^{1/3} and h^{2/3} terms cancel, leaving a faster rate
    assert!(devs[2] <= 5.0 * 1e-4f64.powf(1.0 / 3.0) * limit.norm());
    assert_eq!(omega_tilde(2, 0, &Poly::zero(), &q, 1e-3, &chi, &tight()).unwrap().value, c(0.0, 0.0));
}

#[test]
fn transversal_omega_tilde_matches_stationary_phase() {
    let w = Poly::constant(1.0);
    let q = Poly::monomial(2.0, 1);
    let chi = CutoffSpec::default();
    let h = 1e-3;
    let v = omega_tilde(1, 0, &w, &q, h, &chi, &tight()).unwrap().value;
    let closed = omega_tilde0(1, 0, &w, &q, EtaConvention::Leading).unwrap();
    let dsp = dsp_expansion(&w, &q.antiderivative(), (-0.7, 0.7), 1).unwrap().terms[0].coefficient;
    // h^{-1/2} int e^{i x^2/h} dx over the line
    let lz = PI.sqrt() * Complex64::from_polar(1.0, PI / 4.0);
    assert!((closed - lz).norm() < 1e-12, "{closed}");
    assert!((dsp - lz).norm() < 1e-12);
    assert!((v - lz).norm() / lz.norm() <= 3.0 * h.sqrt(), "{v}");
}

#[test]
fn omega_tilde_is_bounded_and_stable() {
    let w = Poly::new(vec![1.0, -0.5]);
    let q = Poly::new(vec![0.0, 0.0, 1.0, 0.2]);
    let chi = CutoffSpec::default();
    let mut loose = QuadOptions::with_tol(1e-8);
    loose.tol_abs = 1e-14;
    let mut sup = 0.0_f64;
    for k in 0..9 {
        let h = 1e-1 * 10f64.powf(-0.5 * k as f64);
        let a = omega_tilde(2, 0, &w, &q, h, &chi, &loose).unwrap().value;
        let b = omega_tilde(2, 0, &w, &q, h, &chi, &tight()).unwrap().value;
        assert!((a - b).norm() <= 1e-6 * b.norm().max(1.0), "h={h}");
        sup = sup.max(b.norm());
    }
    assert!(sup.is_finite() && sup < 10.0, "{sup}");
}

// (1/h) |int x^l chi e^{i phi/h}| against the leading term h^{-((k-l)/(k+1))_+}
// of the estimate (a = chi, sup |a| = 1); the constant is fitted on the
// coarsest h.
#[test]
fn oscillatory_estimate_holds_with_a_fixed_constant() {
    let chi = CutoffSpec::default();
    let hs: Vec<f64> = (0..7).map(|j| 1e-2 * 10f64.powf(-0.5 * j as f64)).collect();
    for k in 1..=3usize {
        // phi' = x^k (1 + x / 2)
        let mut pc = vec![0.0; k + 3];
        pc[k + 1] = 1.0 / (k as f64 + 1.0);
        pc[k + 2] = 0.5 / (k as f64 + 2.0);
        let phi = Poly::new(pc);
        for l1 in [0usize, 1, 2, 4] {
            let e = ((k as f64 - l1 as f64) / (k as f64 + 1.0)).max(0.0);
            let measured: Vec<f64> = hs
                .iter()
                .map(|&h| {
                    let g = OscIntegrand::new(
                        |x: f64| c(chi.eval(x) * x.powi(l1 as i32), 0.0),
                        phi.clone(),
                        h,
                        -chi.r2,
                        chi.r2,
                    );
                    integrate_adaptive(&g, &tight()).unwrap().value.norm() / h
                })
                .collect();
            let constant = measured[0] * hs[0].powf(e);
            for (h, m) in hs.iter().zip(&measured) {
                let bound = constant * h.powf(-e);
                assert!(*m <= 1.5 * bound, "k={k} l1={l1} h={h}: {m} vs {bound}");
            }
        }
    }
}
