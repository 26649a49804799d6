use num_complex::Complex64;

use crate::model::SystemSpec;
use crate::poly::Poly;

/// Scalar phases `u_j = exp(-(i/h) int_0^x V_j)` and
/// `u_pm = exp((i/2h) int_0^x (V1 pm V2))`, from exact antiderivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFactors {
    iv1: Poly,
    iv2: Poly,
    h: f64,
}

impl PhaseFactors {
    pub fn new(spec: &SystemSpec) -> Self {
        PhaseFactors { iv1: spec.v1().antiderivative(), iv2: spec.v2().antiderivative(), h: spec.h() }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn u1(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.iv1.eval(x) / self.h)
    }

    pub fn u2(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.iv2.eval(x) / self.h)
    }

    pub fn u(&self, j: usize, x: f64) -> Complex64 {
        match j {
            1 => self.u1(x),
            2 => self.u2(x),
            _ => panic!("component index must be 1 or 2"),
        }
    }

    pub fn u_plus(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, (self.iv1.eval(x) + self.iv2.eval(x)) / (2.0 * self.h))
    }

    pub fn u_minus(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, (self.iv1.eval(x) - self.iv2.eval(x)) / (2.0 * self.h))
    }

    /// `Phi(x) = int_0^x (V1 - V2)`.
    pub fn phi(&self, x: f64) -> f64 {
        self.iv1.eval(x) - self.iv2.eval(x)
    }

    /// `e^{i Phi / h} = u2 / u1`.
    pub fn e_phi(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.phi(x) / self.h)
    }

    /// `int_a^b (V1 + V2)`.
    pub fn trace_integral(&self, a: f64, b: f64) -> f64 {
        (self.iv1.eval(b) + self.iv2.eval(b)) - (self.iv1.eval(a) + self.iv2.eval(a))
    }
}
