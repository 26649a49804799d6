//! 2x2 complex matrices and the diagnostics attached to transfer and
//! scattering matrices.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Mat2::new(o, z, z, o)
    }

    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Mat2::new(z, z, z, z)
    }

    /// Matrix with the given columns.
    pub fn from_columns(c0: [Complex64; 2], c1: [Complex64; 2]) -> Self {
        Mat2::new(c0[0], c1[0], c0[1], c1[1])
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == Complex64::new(0.0, 0.0) {
            return None;
        }
        let [[a, b], [c, e]] = self.0;
        Some(Mat2::new(e / d, -b / d, -c / d, a / d))
    }

    pub fn adjoint(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    pub fn conj(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a.conj(), b.conj(), c.conj(), d.conj())
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a * s, b * s, c * s, d * s)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Singular values, largest first, from the eigenvalues of `M^* M`.
    pub fn singular_values(&self) -> (f64, f64) {
        let g = self.adjoint() * *self;
        let (p, q, r) = (g.get(0, 0).re, g.get(1, 1).re, g.get(0, 1));
        let half_gap = ((p - q) / 2.0).hypot(r.norm());
        let mid = (p + q) / 2.0;
        let s1 = (mid + half_gap).max(0.0).sqrt();
        let d = self.det().norm();
        let s2 = if s1 > 0.0 { d / s1 } else { 0.0 };
        (s1, s2)
    }

    /// 2-norm condition number (infinite for singular matrices).
    pub fn condition(&self) -> f64 {
        let (s1, s2) = self.singular_values();
        if s2 == 0.0 {
            f64::INFINITY
        } else {
            s1 / s2
        }
    }

    /// `|| M^* M - Id ||_F`.
    pub fn unitarity_deviation(&self) -> f64 {
        (self.adjoint() * *self - Mat2::identity()).frobenius()
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = self.0;
        let b = o.0;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut out = self.0;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += o.0[i][j];
            }
        }
        Mat2(out)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let mut out = self.0;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] -= o.0[i][j];
            }
        }
        Mat2(out)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = |z: Complex64| format!("{:+.10e}{:+.10e}i", z.re, z.im);
        writeln!(f, "[{}  {}]", e(self.0[0][0]), e(self.0[0][1]))?;
        write!(f, "[{}  {}]", e(self.0[1][0]), e(self.0[1][1]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatrixRole {
    Transfer,
    Scattering,
    Predicted,
}

/// A 2x2 matrix together with its diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix2 {
    pub entries: Mat2,
    pub role: MatrixRole,
    /// `|det - 1|`.
    pub det_deviation: f64,
    /// Largest deviation of an entry extracted at different points, relative
    /// to the largest entry of the mean matrix. Zero when not applicable.
    pub constancy_deviation: f64,
}

impl Matrix2 {
    pub fn new(entries: Mat2, role: MatrixRole) -> Self {
        let det_deviation = (entries.det() - 1.0).norm();
        Matrix2 { entries, role, det_deviation, constancy_deviation: 0.0 }
    }

    pub fn t11(&self) -> Complex64 {
        self.entries.get(0, 0)
    }
    pub fn t12(&self) -> Complex64 {
        self.entries.get(0, 1)
    }
    pub fn t21(&self) -> Complex64 {
        self.entries.get(1, 0)
    }
    pub fn t22(&self) -> Complex64 {
        self.entries.get(1, 1)
    }

    pub fn unitarity_deviation(&self) -> f64 {
        self.entries.unitarity_deviation()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn algebra() {
        let m = Mat2::new(c(1.0, 2.0), c(0.5, -1.0), c(-0.3, 0.0), c(2.0, 1.0));
        let inv = m.inverse().unwrap();
        assert!((m * inv - Mat2::identity()).max_abs() < 1e-15);
        assert!(((m * inv).det() - 1.0).norm() < 1e-15);
        assert!((m.adjoint().adjoint() - m).max_abs() == 0.0);
        let (s1, s2) = m.singular_values();
        assert!((s1 * s2 - m.det().norm()).abs() < 1e-14);
        assert!((s1 * s1 + s2 * s2 - m.frobenius().powi(2)).abs() < 1e-13);
        assert!(Mat2::zero().inverse().is_none());
        assert_eq!(Mat2::zero().condition(), f64::INFINITY);
    }

    #[test]
    fn rotation_is_unitary() {
        let (s, co) = 0.3f64.sin_cos();
        let u = Mat2::new(c(co, 0.0), c(0.0, s), c(0.0, s), c(co, 0.0));
        assert!(u.unitarity_deviation() < 1e-15);
        assert!((u.condition() - 1.0).abs() < 1e-12);
        let r = Matrix2::new(u, MatrixRole::Scattering);
        assert!(r.det_deviation < 1e-15);
    }
}
