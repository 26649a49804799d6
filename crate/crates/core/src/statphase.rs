//! Degenerate stationary phase at `x = 0` and the closed-form leading
//! coefficients of the normalized transition integrals.
//!
//! For a phase with `phi(x) - phi(0) = sgn * y(x)^k` near 0,
//!
//! ```text
//! int a(x) e^{i phi(x)/h} dx ~ e^{i phi(0)/h} sum_l c_l h^{p_l}
//! ```
//!
//! with `p_l = (l+1)/k` for odd `k` and `p_l = (2l+1)/k` for even `k`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::PhaseError;
use crate::poly::{factorial, Order, Poly};
use crate::series::Series;
use crate::special::gamma;

/// `phi(x) - phi(0) = sign * y(x)^k` with `y(x) = x * phi_tilde(x)^{1/k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseNormalForm {
    pub k: usize,
    pub sign: f64,
    pub phi0: f64,
    /// `sign * (phi(x) - phi(0)) / x^k`, positive on the interval.
    pub phi_tilde: Poly,
}

impl PhaseNormalForm {
    pub fn phi_tilde(&self, x: f64) -> f64 {
        self.phi_tilde.eval(x)
    }

    pub fn y(&self, x: f64) -> f64 {
        x * self.phi_tilde.eval(x).powf(1.0 / self.k as f64)
    }

    pub fn y_prime(&self, x: f64) -> f64 {
        let k = self.k as f64;
        let t = self.phi_tilde.eval(x);
        let dt = self.phi_tilde.derivative().eval(x);
        t.powf(1.0 / k) + x * t.powf(1.0 / k - 1.0) * dt / k
    }

    /// Taylor series of `x(y)`, the inverse change of variables, to `y^order`.
    pub fn inverse_series(&self, order: usize) -> Series {
        let s = Series::from_poly(&self.phi_tilde, order.saturating_sub(1)).powf(1.0 / self.k as f64);
        s.lagrange_inverse_of_x_times()
    }
}

/// Normal form of `phi` at 0 on `[a, b]`.
pub fn phase_normal_form(phi: &Poly, a: f64, b: f64) -> Result<PhaseNormalForm, PhaseError> {
    let phi0 = phi.eval(0.0);
    let shifted = phi.sub(&Poly::constant(phi0));
    let k = match shifted.vanishing_order(0.0) {
        Order::Infinite => return Err(PhaseError::ConstantPhase),
        Order::Finite(k) if k < 2 => return Err(PhaseError::NotDegenerate(k)),
        Order::Finite(k) => k,
    };
    let rest = phi.derivative().shift_down(k - 1);
    let extra = rest.count_roots_in(a, b);
    if extra > 0 {
        return Err(PhaseError::ExtraStationaryPoint(extra));
    }
    let sign = shifted.coeff(k).signum();
    Ok(PhaseNormalForm { k, sign, phi0, phi_tilde: shifted.shift_down(k).scale(sign) })
}

/// `a_phi^{(l)}(0)` for `l = 0..=n`, where `a_phi(y(x)) = a(x) / y'(x)`,
/// i.e. `a_phi(y) = a(x(y)) x'(y)`.
pub fn a_phi_derivatives(a: &Poly, nf: &PhaseNormalForm, n: usize) -> Vec<f64> {
    let x_of_y = nf.inverse_series(n + 1);
    let composed = x_of_y.compose_into(a);
    let prod = composed.mul(&x_of_y.derivative());
    (0..=n).map(|l| prod.coeff(l) * factorial(l)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DspTerm {
    pub l: usize,
    /// Coefficient of `h^{h_power}`, without the factor `e^{i phi(0)/h}`.
    pub coefficient: Complex64,
    pub h_power: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DspExpansion {
    pub k: usize,
    pub sign: f64,
    pub phi0: f64,
    pub terms: Vec<DspTerm>,
    /// Exponent of the first omitted power of `h`.
    pub remainder_exponent: f64,
}

impl DspExpansion {
    pub fn eval(&self, h: f64) -> Complex64 {
        let sum: Complex64 = self.terms.iter().map(|t| t.coefficient * h.powf(t.h_power)).sum();
        sum * Complex64::from_polar(1.0, self.phi0 / h)
    }
}

/// Coefficient of `h^{(l+1)/k}` (odd `k`) or `h^{(2l+1)/k}` (even `k`) given
/// the Taylor coefficient `c = a_phi^{(j)}(0)/j!` of the matching power `j`.
fn dsp_coefficient(k: usize, sign: f64, l: usize, c: f64) -> (Complex64, f64) {
    let kf = k as f64;
    if k % 2 == 1 {
        let lf = l as f64;
        let unit = Complex64::new(0.0, sign).powu(l as u32);
        let angle = (1.0 - (kf - 1.0) * lf) * PI / (2.0 * kf);
        let coef = unit * (2.0 / kf * c * gamma((lf + 1.0) / kf) * angle.cos());
        (coef, (lf + 1.0) / kf)
    } else {
        let p = (2 * l + 1) as f64;
        let coef = Complex64::from_polar(2.0 / kf * c * gamma(p / kf), sign * PI * p / (2.0 * kf));
        (coef, p / kf)
    }
}

/// The first `n_terms` terms of the degenerate stationary-phase expansion of
/// `int a(x) e^{i phi(x)/h} dx` around 0 on `[a, b]`.
///
/// `amplitude` stands for the Taylor data of the integrand at 0; the integral
/// it approximates must be cut off smoothly away from 0.
pub fn dsp_expansion(
    amplitude: &Poly,
    phi: &Poly,
    bounds: (f64, f64),
    n_terms: usize,
) -> Result<DspExpansion, PhaseError> {
    let nf = phase_normal_form(phi, bounds.0, bounds.1)?;
    let k = nf.k;
    let top = if k % 2 == 1 { n_terms } else { 2 * n_terms };
    let derivs = a_phi_derivatives(amplitude, &nf, top);
    let mut terms = Vec::with_capacity(n_terms);
    for l in 0..n_terms {
        let j = if k % 2 == 1 { l } else { 2 * l };
        let c = derivs[j] / factorial(j);
        let (coefficient, h_power) = dsp_coefficient(k, nf.sign, l, c);
        terms.push(DspTerm { l, coefficient, h_power });
    }
    let remainder_exponent = if k % 2 == 1 {
        (n_terms + 1) as f64 / k as f64
    } else {
        (2 * n_terms + 1) as f64 / k as f64
    };
    Ok(DspExpansion { k, sign: nf.sign, phi0: nf.phi0, terms, remainder_exponent })
}

/// Which sign enters the odd-`m` branches of `eta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EtaConvention {
    /// `sgn(Q^{(n)}(0))` in the odd-`m` branches and a plain `i^n` in the
    /// even-`m` branch.
    AsWritten,
    /// The sign of the phase's leading coefficient `sgn(Q^{(m)}(0))`
    /// throughout; for even `m` the factor becomes `(sgn * i)^n`.
    Leading,
}

/// `eta_{m,n}` for the given sign. Under [`EtaConvention::AsWritten`] the
/// caller passes `sgn(Q^{(n)}(0))`, under [`EtaConvention::Leading`]
/// `sgn(Q^{(m)}(0))`.
pub fn eta(m: usize, n: usize, sign: f64, convention: EtaConvention) -> Complex64 {
    let mf = m as f64;
    let nf = n as f64;
    if m.is_multiple_of(2) {
        let unit = match convention {
            EtaConvention::AsWritten => Complex64::new(0.0, 1.0),
            EtaConvention::Leading => Complex64::new(0.0, sign),
        };
        unit.powu(n as u32) * ((1.0 - mf * nf) * PI / (2.0 * (mf + 1.0))).cos()
    } else if n.is_multiple_of(2) {
        Complex64::from_polar(1.0, sign * (nf + 1.0) * PI / (2.0 * (mf + 1.0)))
    } else {
        Complex64::from_polar(1.0, sign * (nf + 2.0) * PI / (2.0 * (mf + 1.0)))
    }
}

/// The sign that `convention` feeds into [`eta`] for a given `Q`.
pub fn eta_sign(q: &Poly, m: usize, n: usize, convention: EtaConvention) -> f64 {
    let d = match convention {
        EtaConvention::AsWritten => q.derivative_at_zero(n),
        EtaConvention::Leading => q.derivative_at_zero(m),
    };
    if d > 0.0 {
        1.0
    } else if d < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_order(what: &'static str, p: &Poly, declared: usize) -> Result<(), PhaseError> {
    match p.vanishing_order(0.0) {
        Order::Finite(k) if k == declared => Ok(()),
        Order::Finite(k) => Err(PhaseError::OrderMismatch { what, declared, actual: Some(k) }),
        Order::Infinite => Err(PhaseError::OrderMismatch { what, declared, actual: None }),
    }
}

/// Closed-form leading coefficient of `omega_tilde_{m,n}(h; W, Q)`.
///
/// When `m n` is odd the leading behaviour is `h^{1/(m+1)} omega0`, and the
/// returned value is that `omega0`. In the correction term the denominator is
/// `Q^{(m)}(0)`, the lowest non-vanishing derivative.
pub fn omega_tilde0(
    m: usize,
    n: usize,
    w: &Poly,
    q: &Poly,
    convention: EtaConvention,
) -> Result<Complex64, PhaseError> {
    check_order("Q", q, m)?;
    check_order("W", w, n)?;
    let mf = m as f64;
    let nf = n as f64;
    let qm = q.derivative_at_zero(m);
    let base = factorial(m + 1) / qm.abs();
    let e = eta(m, n, eta_sign(q, m, n, convention), convention);
    if (m * n).is_multiple_of(2) {
        let scale = 2.0 * w.derivative_at_zero(n) / ((mf + 1.0) * factorial(n))
            * base.powf((nf + 1.0) / (mf + 1.0))
            * gamma((nf + 1.0) / (mf + 1.0));
        Ok(e * scale)
    } else {
        let bracket = w.derivative_at_zero(n + 1)
            - (nf + 1.0) * (nf + 2.0) * q.derivative_at_zero(m + 1) / ((mf + 1.0) * (mf + 2.0) * qm)
                * w.derivative_at_zero(n);
        let scale = 2.0 / ((mf + 1.0) * factorial(n + 1))
            * base.powf((nf + 2.0) / (mf + 1.0))
            * gamma((nf + 2.0) / (mf + 1.0))
            * bracket;
        Ok(e * scale)
    }
}

/// `eta_m` of the contact-order-`m` transition coefficient.
pub fn eta_m(m: usize, gap_sign: f64) -> Complex64 {
    let mf = m as f64;
    if m.is_multiple_of(2) {
        Complex64::new((PI / (2.0 * (mf + 1.0))).cos(), 0.0)
    } else {
        Complex64::from_polar(1.0, gap_sign * PI / (2.0 * (mf + 1.0)))
    }
}

/// Leading term of `omega_m(h)` for the potentials `V1`, `V2` with contact
/// order `m >= 2`. Independent of `h`; the argument is kept for symmetry with
/// the numeric `omega_tilde`.
pub fn omega_m(_h: f64, v1: &Poly, v2: &Poly) -> Result<Complex64, PhaseError> {
    let gap = v1.sub(v2);
    let m = match gap.vanishing_order(0.0) {
        Order::Finite(m) => m,
        Order::Infinite => return Err(PhaseError::ConstantPhase),
    };
    if m < 2 {
        return Err(PhaseError::ContactOrderTooLow(m));
    }
    let mf = m as f64;
    let lead = gap.derivative_at_zero(m);
    let value = eta_m(m, lead.signum())
        * (2.0 * (factorial(m + 1) / lead.abs()).powf(1.0 / (mf + 1.0)) * gamma((mf + 2.0) / (mf + 1.0)));
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol * b.norm().max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn normal_forms() {
        let nf = phase_normal_form(&Poly::monomial(0.5, 2), -1.0, 1.0).unwrap();
        assert_eq!((nf.k, nf.sign), (2, 1.0));
        assert!((nf.phi_tilde(0.3) - 0.5).abs() < 1e-15);
        assert!((nf.y(0.4) - 0.4 / 2f64.sqrt()).abs() < 1e-15);
        assert!((nf.y_prime(0.4) - 1.0 / 2f64.sqrt()).abs() < 1e-15);

        let nf = phase_normal_form(&Poly::monomial(1.0, 3), -1.0, 1.0).unwrap();
        assert_eq!((nf.k, nf.sign), (3, 1.0));
        assert!((nf.y(0.7) - 0.7).abs() < 1e-15);

        let nf = phase_normal_form(&Poly::monomial(-1.0 / 12.0, 4), -1.0, 1.0).unwrap();
        assert_eq!((nf.k, nf.sign), (4, -1.0));
        assert!((nf.y(0.5) - 0.5 * 12f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn normal_form_identity_holds_pointwise() {
        // phi = 2 + x^3 - 0.4 x^4 + 0.1 x^5
        let phi = Poly::new(vec![2.0, 0.0, 0.0, 1.0, -0.4, 0.1]);
        let nf = phase_normal_form(&phi, -1.0, 1.0).unwrap();
        for i in 0..=40 {
            let x = -1.0 + i as f64 * 0.05;
            let lhs = phi.eval(x) - 2.0;
            let rhs = nf.sign * nf.y(x).powi(3);
            assert!((lhs - rhs).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn normal_form_errors() {
        assert_eq!(phase_normal_form(&Poly::constant(1.0), -1.0, 1.0), Err(PhaseError::ConstantPhase));
        assert_eq!(
            phase_normal_form(&Poly::new(vec![0.0, 1.0, 1.0]), -1.0, 1.0),
            Err(PhaseError::NotDegenerate(1))
        );
        // phi' = x (x - 0.5)
        let phi = Poly::new(vec![0.0, 0.0, -0.25, 1.0 / 3.0]);
        assert_eq!(phase_normal_form(&phi, -1.0, 1.0), Err(PhaseError::ExtraStationaryPoint(1)));
    }

    #[test]
    fn amplitude_transport() {
        let quad = phase_normal_form(&Poly::monomial(0.5, 2), -1.0, 1.0).unwrap();
        let d = a_phi_derivatives(&Poly::constant(1.0), &quad, 3);
        assert!((d[0] - 2f64.sqrt()).abs() < 1e-14);
        assert!(d[1..].iter().all(|v| v.abs() < 1e-14));
        let d = a_phi_derivatives(&Poly::monomial(1.0, 1), &quad, 2);
        assert!(d[0].abs() < 1e-15 && (d[1] - 2.0).abs() < 1e-14 && d[2].abs() < 1e-14);
        let cubic = phase_normal_form(&Poly::monomial(1.0, 3), -1.0, 1.0).unwrap();
        let d = a_phi_derivatives(&Poly::constant(1.0), &cubic, 4);
        assert_eq!(d[0], 1.0);
        assert!(d[1..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn odd_branch_matches_half_line_integrals() {
        // int_R y^l e^{i s y^k/h} dy = (1/k) Gamma((l+1)/k) h^{(l+1)/k} (e^{i s t} + (-1)^l e^{-i s t}),
        // t = pi (l+1)/(2k)
        for k in [3usize, 5, 7] {
            for l in 0..6 {
                for s in [1.0, -1.0] {
                    let (c, p) = dsp_coefficient(k, s, l, 1.0);
                    let kf = k as f64;
                    let t = PI * (l as f64 + 1.0) / (2.0 * kf);
                    let parity = if l % 2 == 0 { 1.0 } else { -1.0 };
                    let want = (Complex64::from_polar(1.0, s * t) + Complex64::from_polar(parity, -s * t))
                        * (gamma((l as f64 + 1.0) / kf) / kf);
                    assert!((c - want).norm() < 1e-13, "k={k} l={l} s={s}: {c} vs {want}");
                    assert_eq!(p, (l as f64 + 1.0) / kf);
                }
            }
        }
    }

    #[test]
    fn cubic_leading_term() {
        let e = dsp_expansion(&Poly::constant(1.0), &Poly::monomial(1.0, 3), (-1.0, 1.0), 1).unwrap();
        let c = e.terms[0].coefficient;
        // (2/3) Gamma(1/3) cos(pi/6) = 2 Gamma(4/3) cos(pi/6)
        assert!((c.re - 1.546_685_884).abs() < 1e-8 && c.im.abs() < 1e-15);
        assert_eq!(e.terms[0].h_power, 1.0 / 3.0);
        assert_eq!(e.remainder_exponent, 2.0 / 3.0);
    }

    #[test]
    fn fresnel_leading_term() {
        let e = dsp_expansion(&Poly::constant(1.0), &Poly::monomial(-0.5, 2), (-1.0, 1.0), 2).unwrap();
        let want = Complex64::from_polar((2.0 * PI).sqrt(), -PI / 4.0);
        close(e.terms[0].coefficient, want, 1e-14);
        assert!(e.terms[1].coefficient.norm() < 1e-14);
        assert_eq!(e.remainder_exponent, 2.5);
        let zero = dsp_expansion(&Poly::zero(), &Poly::monomial(0.5, 2), (-1.0, 1.0), 3).unwrap();
        assert_eq!(zero.eval(0.01), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn eta_values() {
        use EtaConvention::*;
        assert!((eta(2, 0, 1.0, AsWritten) - (PI / 6.0).cos()).norm() < 1e-15);
        close(eta(1, 0, 1.0, AsWritten), Complex64::from_polar(1.0, PI / 4.0), 1e-15);
        assert!(eta(2, 2, 1.0, AsWritten).norm() < 1e-15);
        for m in [1usize, 3, 5] {
            for n in 0..4 {
                assert!((eta(m, n, -1.0, Leading).norm() - 1.0).abs() < 1e-15);
            }
        }
        for n in 0..4 {
            let v = eta(4, n, 1.0, AsWritten) / Complex64::new(0.0, 1.0).powu(n as u32);
            assert!(v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms() {
        use EtaConvention::*;
        let w = omega_tilde0(2, 0, &Poly::constant(1.0), &Poly::monomial(1.0, 2), Leading).unwrap();
        // 2 * 3^{1/3} Gamma(4/3) cos(pi/6)
        assert!((w.re - 2.230_7).abs() < 1e-4 && w.im.abs() < 1e-15, "{w}");
        let w = omega_tilde0(1, 0, &Poly::constant(1.0), &Poly::monomial(2.0, 1), Leading).unwrap();
        close(w, Complex64::from_polar(PI.sqrt(), PI / 4.0), 1e-14);
        let om = omega_m(1e-3, &Poly::monomial(0.5, 2), &Poly::monomial(-0.5, 2)).unwrap();
        let tw = omega_tilde0(2, 0, &Poly::constant(1.0), &Poly::monomial(1.0, 2), Leading).unwrap();
        close(om, tw, 1e-14);
        let om3 = omega_m(1e-4, &Poly::monomial(0.5, 3), &Poly::monomial(-0.5, 3)).unwrap();
        close(om3, Complex64::from_polar(2.0 * 4f64.powf(0.25) * gamma(1.25), PI / 8.0), 1e-14);
        assert!((om3.norm() - 2.563_6).abs() < 1e-3);
        assert_eq!(
            omega_m(1e-3, &Poly::monomial(1.0, 1), &Poly::monomial(-1.0, 1)),
            Err(PhaseError::ContactOrderTooLow(1))
        );
        assert!(matches!(
            omega_tilde0(2, 1, &Poly::constant(1.0), &Poly::monomial(1.0, 2), Leading),
            Err(PhaseError::OrderMismatch { what: "W", declared: 1, actual: Some(0) })
        ));
    }

    #[test]
    fn closed_form_is_a_dsp_term() {
        // Q with a nonzero next coefficient; W generic with the right order.
        for m in 1..=4usize {
            for n in 0..=3usize {
                let mut qc = vec![0.0; m + 2];
                qc[m] = if m % 2 == 1 { -1.3 } else { 0.8 };
                qc[m + 1] = 0.45;
                let q = Poly::new(qc);
                let mut wc = vec![0.0; n + 3];
                wc[n] = 1.7;
                wc[n + 1] = -0.6;
                wc[n + 2] = 0.25;
                let w = Poly::new(wc);
                let closed = omega_tilde0(m, n, &w, &q, EtaConvention::Leading).unwrap();
                let phase = q.antiderivative();
                let k = m + 1;
                let dsp = dsp_expansion(&w, &phase, (-0.2, 0.2), n + 3).unwrap();
                // power h^{(n+1)/k}, or h^{(n+2)/k} when m n is odd
                let p = if m * n % 2 == 1 { n + 2 } else { n + 1 };
                let term = dsp
                    .terms
                    .iter()
                    .find(|t| (t.h_power - p as f64 / k as f64).abs() < 1e-12)
                    .unwrap();
                close(closed, term.coefficient, 1e-10);
            }
        }
    }
}
