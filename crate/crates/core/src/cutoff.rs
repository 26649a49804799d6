//! Smooth plateau cutoff.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Plateau/support radii of the cutoff: `chi = 1` on `[-r1, r1]`,
/// `chi = 0` outside `[-r2, r2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub r1: f64,
    pub r2: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { r1: 0.3, r2: 0.7 }
    }
}

fn bump_tail(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, `C^inf` in between.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump_tail(t);
        a / (a + bump_tail(1.0 - t))
    }
}

impl CutoffSpec {
    pub fn new(r1: f64, r2: f64) -> Result<Self, ModelError> {
        if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
            return Err(ModelError::BadCutoff { r1, r2 });
        }
        Ok(CutoffSpec { r1, r2 })
    }

    /// Checks that `[-r2, r2]` lies inside the open interval.
    pub fn check_inside(&self, interval: (f64, f64)) -> Result<(), ModelError> {
        if !(self.r1 > 0.0 && self.r2 > self.r1) {
            return Err(ModelError::BadCutoff { r1: self.r1, r2: self.r2 });
        }
        if !(interval.0 < -self.r2 && self.r2 < interval.1) {
            return Err(ModelError::CutoffOutsideInterval {
                r2: self.r2,
                left: interval.0,
                right: interval.1,
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        smooth_step((self.r2 - x.abs()) / (self.r2 - self.r1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        let c = CutoffSpec::default();
        assert_eq!(c.eval(0.0), 1.0);
        assert_eq!(c.eval(0.3), 1.0);
        assert_eq!(c.eval(-0.3), 1.0);
        assert_eq!(c.eval(0.7), 0.0);
        assert_eq!(c.eval(-0.9), 0.0);
        assert!((c.eval(0.5) - 0.5).abs() < 1e-15);
        for i in 0..=2000 {
            let x = -1.0 + i as f64 * 1e-3;
            let v = c.eval(x);
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(v, c.eval(-x));
        }
    }

    #[test]
    fn flat_at_support_edge() {
        let c = CutoffSpec::default();
        let d = 1e-3;
        for k in 1..=4 {
            let x = 0.7 - k as f64 * d;
            assert!(c.eval(x) < 1e-40, "chi({x}) = {}", c.eval(x));
        }
    }

    #[test]
    fn monotone_on_transition() {
        let c = CutoffSpec::new(0.2, 0.5).unwrap();
        let mut last = 1.0;
        for i in 0..=300 {
            let v = c.eval(0.2 + i as f64 * 1e-3);
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(CutoffSpec::new(0.5, 0.3).is_err());
        assert!(CutoffSpec::new(0.0, 0.3).is_err());
        assert!(CutoffSpec::default().check_inside((-0.5, 1.0)).is_err());
        assert!(CutoffSpec::default().check_inside((-1.0, 1.0)).is_ok());
    }
}
