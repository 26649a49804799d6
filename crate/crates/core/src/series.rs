//! Truncated real power series around 0.
//!
//! Used by the stationary-phase engine to build the change of variables
//! `y(x) = x * phi_tilde(x)^{1/k}`, invert it and compose amplitudes with the
//! inverse, all exactly to a fixed truncation order.

use crate::poly::Poly;

/// Coefficients `c[0..=order]` of a power series truncated after `x^order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    coeffs: Vec<f64>,
}

impl Series {
    pub fn new(mut coeffs: Vec<f64>, order: usize) -> Self {
        coeffs.resize(order + 1, 0.0);
        Series { coeffs }
    }

    pub fn from_poly(p: &Poly, order: usize) -> Self {
        Series::new(p.coeffs().iter().copied().take(order + 1).collect(), order)
    }

    /// The series `x`.
    pub fn identity(order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        if order >= 1 {
            c[1] = 1.0;
        }
        Series { coeffs: c }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.order().min(other.order());
        let mut out = vec![0.0; n + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Series { coeffs: out }
    }

    pub fn derivative(&self) -> Series {
        let n = self.order();
        let c = (1..=n).map(|k| k as f64 * self.coeffs[k]).collect();
        Series::new(c, n.saturating_sub(1))
    }

    /// `x * self`, keeping the truncation order.
    pub fn shift_up(&self) -> Series {
        let mut c = Vec::with_capacity(self.coeffs.len());
        c.push(0.0);
        c.extend_from_slice(&self.coeffs[..self.order()]);
        Series { coeffs: c }
    }

    /// `self^alpha` for a series with positive constant term
    /// (J.C.P. Miller recurrence).
    pub fn powf(&self, alpha: f64) -> Series {
        let f0 = self.coeffs[0];
        assert!(f0 > 0.0, "powf needs a positive constant term");
        let n = self.order();
        let mut g = vec![0.0; n + 1];
        g[0] = f0.powf(alpha);
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += ((alpha + 1.0) * j as f64 - k as f64) * self.coeffs[j] * g[k - j];
            }
            g[k] = acc / (k as f64 * f0);
        }
        Series { coeffs: g }
    }

    /// Composition `p(self)` for a polynomial `p`, valid when `self(0) = 0`.
    pub fn compose_into(&self, p: &Poly) -> Series {
        assert!(self.coeffs[0] == 0.0, "inner series must vanish at 0");
        let n = self.order();
        let mut out = Series::new(vec![], n);
        for &c in p.coeffs().iter().rev() {
            out = out.mul(self);
            out.coeffs[0] += c;
        }
        out
    }

    /// Compositional inverse of `y(x) = x * s(x)` with `s(0) > 0`, by Lagrange
    /// inversion: `[y^n] x(y) = (1/n) [x^{n-1}] s(x)^{-n}`.
    ///
    /// `self` is the factor `s`; the result is the series of `x(y)` truncated
    /// at `y^{order + 1}`.
    pub fn lagrange_inverse_of_x_times(&self) -> Series {
        let order = self.order() + 1;
        let mut out = vec![0.0; order + 1];
        for (n, slot) in out.iter_mut().enumerate().skip(1) {
            let sn = self.powf(-(n as f64));
            *slot = sn.coeff(n - 1) / n as f64;
        }
        Series { coeffs: out }
    }
}
