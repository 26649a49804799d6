//! Real polynomials with exact derivative access.
//!
//! Every potential, coupling and phase in the model is a [`Poly`]. Keeping
//! them polynomial means derivatives at the crossing point, antiderivatives
//! of phases and root isolation are all exact up to floating-point rounding.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A real polynomial stored by ascending degree: `c[0] + c[1] x + c[2] x^2 + ...`.
#[derive(Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<f64>,
}

/// Vanishing order of a function at `x = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Finite(usize),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<usize> {
        match self {
            Order::Finite(k) => Some(k),
            Order::Infinite => None,
        }
    }
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `c * x^k`
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if *c == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, k: usize) -> Poly {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    /// `f^{(k)}(x)`, evaluated without building intermediate polynomials.
    pub fn eval_derivative(&self, k: usize, x: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate().skip(k).rev() {
            acc = acc * x + c * falling_factorial(j, k);
        }
        acc
    }

    /// `f^{(k)}(0) = k! c_k`.
    pub fn derivative_at_zero(&self, k: usize) -> f64 {
        self.coeff(k) * factorial(k)
    }

    /// The antiderivative vanishing at `x = 0`.
    pub fn antiderivative(&self) -> Poly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(self.coeffs.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
        Poly::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Drops the first `k` coefficients, i.e. `(f - taylor_{k-1} f) / x^k`.
    /// Exact division when `f` vanishes to order `>= k` at 0.
    pub fn shift_down(&self, k: usize) -> Poly {
        Poly::new(self.coeffs.iter().skip(k).copied().collect())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Smallest `k` with `|c_k| > tol * max|c_j|`. With `tol = 0` this is the
    /// index of the first nonzero coefficient.
    pub fn vanishing_order(&self, tol: f64) -> Order {
        let scale = self.max_abs_coeff();
        self.coeffs
            .iter()
            .position(|c| c.abs() > tol * scale && *c != 0.0)
            .map_or(Order::Infinite, Order::Finite)
    }

    /// Polynomial remainder of `self / divisor`.
    fn rem(&self, divisor: &Poly) -> Poly {
        let d = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.coeffs[d];
        let mut r = self.coeffs.clone();
        while r.len() > d {
            let top = r.len() - 1;
            let q = r[top] / lead;
            for (j, &c) in divisor.coeffs.iter().enumerate() {
                r[top - d + j] -= q * c;
            }
            r.pop();
        }
        Poly::new(r)
    }

    /// Number of distinct real roots in the closed interval `[a, b]`, by a
    /// Sturm sequence. Coefficients below `1e-12` relative to the sequence
    /// element they belong to are treated as zero.
    pub fn count_roots_in(&self, a: f64, b: f64) -> usize {
        assert!(a <= b);
        if self.is_zero() {
            return usize::MAX;
        }
        let seq = self.sturm_sequence();
        let changes = |x: f64| sign_changes(seq.iter().map(|p| p.eval(x)));
        let mut count = changes(a).saturating_sub(changes(b));
        // Sturm counts roots in (a, b]; include a root sitting exactly on `a`.
        if self.eval(a) == 0.0 {
            count += 1;
        }
        count
    }

    fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = vec![self.normalized(), self.derivative().normalized()];
        while let Some(last) = seq.last() {
            if last.degree().unwrap_or(0) == 0 {
                break;
            }
            let prev = &seq[seq.len() - 2];
            let mut r = prev.rem(last).scale(-1.0);
            r = r.chop(1e-12);
            if r.is_zero() {
                break;
            }
            seq.push(r.normalized());
        }
        seq
    }

    fn normalized(&self) -> Poly {
        let m = self.max_abs_coeff();
        if m == 0.0 {
            self.clone()
        } else {
            self.scale(1.0 / m)
        }
    }

    fn chop(&self, rel: f64) -> Poly {
        let m = self.max_abs_coeff();
        Poly::new(
            self.coeffs
                .iter()
                .map(|&c| if c.abs() <= rel * m { 0.0 } else { c })
                .collect(),
        )
    }
}

fn sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut n = 0;
    for v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            n += 1;
        }
        last = v;
    }
    n
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `j (j-1) ... (j-k+1)`
fn falling_factorial(j: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (j - i) as f64)
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}x")?,
                _ => write!(f, "{a}x^{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_orders() {
        assert_eq!(Poly::monomial(1.0, 3).vanishing_order(0.0), Order::Finite(3));
        assert_eq!(Poly::new(vec![1.0, 1.0]).vanishing_order(0.0), Order::Finite(0));
        let p = Poly::new(vec![0.0, 0.0, 1.0, 0.0, 0.0, -1.0]);
        assert_eq!(p.vanishing_order(0.0), Order::Finite(2));
        assert_eq!(Poly::zero().vanishing_order(0.0), Order::Infinite);
        // rounding noise below tol is ignored
        let noisy = Poly::new(vec![1e-17, 0.0, 2.0]);
        assert_eq!(noisy.vanishing_order(1e-12), Order::Finite(2));
        assert_eq!(noisy.vanishing_order(0.0), Order::Finite(0));
    }

    #[test]
    fn derivatives_are_exact() {
        // x^5 - 3x^2 + 7
        let p = Poly::new(vec![7.0, 0.0, -3.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.derivative_at_zero(2), -6.0);
        assert_eq!(p.derivative_at_zero(5), 120.0);
        assert_eq!(p.eval_derivative(1, 2.0), 5.0 * 16.0 - 12.0);
        assert_eq!(p.nth_derivative(3).eval(2.0), p.eval_derivative(3, 2.0));
        assert_eq!(p.nth_derivative(6), Poly::zero());
    }

    #[test]
    fn antiderivative_vanishes_at_zero() {
        let q = Poly::new(vec![1.0, 2.0, 3.0]);
        let a = q.antiderivative();
        assert_eq!(a.eval(0.0), 0.0);
        assert_eq!(a.derivative(), q);
        assert!((a.eval(1.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn sturm_counts_roots() {
        // (x - 0.5)(x + 0.25) x
        let p = Poly::new(vec![-0.5, 1.0])
            .mul(&Poly::new(vec![0.25, 1.0]))
            .mul(&Poly::monomial(1.0, 1));
        assert_eq!(p.count_roots_in(-1.0, 1.0), 3);
        assert_eq!(p.count_roots_in(0.1, 1.0), 1);
        assert_eq!(p.count_roots_in(-1.0, -0.3), 0);
        // 1 + x^2 has no real roots
        assert_eq!(Poly::new(vec![1.0, 0.0, 1.0]).count_roots_in(-5.0, 5.0), 0);
        // root at the left endpoint
        assert_eq!(Poly::new(vec![1.0, 1.0]).count_roots_in(-1.0, 1.0), 1);
        // double root counted once
        let d = Poly::new(vec![-0.5, 1.0]).mul(&Poly::new(vec![-0.5, 1.0]));
        assert_eq!(d.count_roots_in(0.0, 1.0), 1);
    }

    #[test]
    fn display() {
        assert_eq!(Poly::new(vec![0.0, -1.0, 0.5]).to_string(), "-1x + 0.5x^2");
    }
}
