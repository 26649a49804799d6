//! Named model instances.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::error::ModelError;
use crate::model::{build_system, mu_ml, Interval, SystemInputs, SystemSpec};
use crate::poly::Poly;

/// `mu_{m, n_tilde}` at which the default coupling strength is chosen.
pub const DEFAULT_MU: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Transversal crossing, `V1 = -V2 = x`, `U1 = U2 = 1`.
    LzLinear,
    /// `V1 = -V2 = x^2 / 2`, `U1 = U2 = 1`.
    TangentM2,
    /// `V1 = -V2 = x^3 / 2`, `U1 = U2 = 1`.
    TangentM3,
    /// `V1 = -V2 = x^2 / 2`, `U1 = U2 = x`.
    VanishingCoupling,
    /// `V1 = -V2 = x^2 / 2`, `U1 = U2 = 1`, `eps1 = 2 eps2`.
    Nonhermitian,
    /// `V1 = -V2 = x^2 / 2`, `U1 = -U2 = 1`: the flow of the second
    /// component runs backwards.
    TangentM2Reversed,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::LzLinear,
        Preset::TangentM2,
        Preset::TangentM3,
        Preset::VanishingCoupling,
        Preset::Nonhermitian,
        Preset::TangentM2Reversed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::LzLinear => "lz-linear",
            Preset::TangentM2 => "tangent-m2",
            Preset::TangentM3 => "tangent-m3",
            Preset::VanishingCoupling => "vanishing-coupling",
            Preset::Nonhermitian => "nonhermitian",
            Preset::TangentM2Reversed => "tangent-m2-reversed",
        }
    }

    /// Whether the coupling matrix is Hermitian or anti-Hermitian with
    /// `eps1 = eps2`.
    pub fn is_hermitian(&self) -> bool {
        !matches!(self, Preset::Nonhermitian)
    }

    fn shape(&self) -> (Poly, Poly, Poly, Poly) {
        let half_sq = Poly::monomial(0.5, 2);
        match self {
            Preset::LzLinear => {
                (Poly::monomial(1.0, 1), Poly::monomial(-1.0, 1), Poly::constant(1.0), Poly::constant(1.0))
            }
            Preset::TangentM3 => {
                (Poly::monomial(0.5, 3), Poly::monomial(-0.5, 3), Poly::constant(1.0), Poly::constant(1.0))
            }
            Preset::VanishingCoupling => {
                (half_sq.clone(), half_sq.scale(-1.0), Poly::monomial(1.0, 1), Poly::monomial(1.0, 1))
            }
            Preset::TangentM2Reversed => {
                (half_sq.clone(), half_sq.scale(-1.0), Poly::constant(1.0), Poly::constant(-1.0))
            }
            Preset::TangentM2 | Preset::Nonhermitian => {
                (half_sq.clone(), half_sq.scale(-1.0), Poly::constant(1.0), Poly::constant(1.0))
            }
        }
    }

    /// Contact order and vanishing orders `(m, n1, n2)`.
    pub fn orders(&self) -> (usize, usize, usize) {
        match self {
            Preset::LzLinear => (1, 0, 0),
            Preset::TangentM3 => (3, 0, 0),
            Preset::VanishingCoupling => (2, 1, 1),
            _ => (2, 0, 0),
        }
    }

    /// Geometric mean `eps_tilde` with `mu_{m, n_tilde}(eps_tilde, h) = mu`.
    pub fn eps_for_mu(&self, h: f64, mu: f64) -> f64 {
        let (m, n1, n2) = self.orders();
        mu / mu_ml(1.0, h, m, 0.5 * (n1 + n2) as f64)
    }

    /// Coupling pair with geometric mean `eps`.
    pub fn eps_pair(&self, eps: f64) -> (f64, f64) {
        match self {
            Preset::Nonhermitian => (eps * 2f64.sqrt(), eps / 2f64.sqrt()),
            _ => (eps, eps),
        }
    }

    /// The preset at semiclassical parameter `h`. `eps` is the geometric mean
    /// `sqrt(eps1 eps2)`; `None` picks `mu_{m, n_tilde} = 0.05`.
    pub fn spec(&self, h: f64, eps: Option<f64>) -> Result<SystemSpec, ModelError> {
        let eps = match eps {
            Some(e) => e,
            None => {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(ModelError::BadParameter { name: "h", value: h });
                }
                self.eps_for_mu(h, DEFAULT_MU)
            }
        };
        let (eps1, eps2) = self.eps_pair(eps);
        self.spec_with(h, eps1, eps2)
    }

    pub fn spec_with(&self, h: f64, eps1: f64, eps2: f64) -> Result<SystemSpec, ModelError> {
        let (v1, v2, u1, u2) = self.shape();
        build_system(SystemInputs {
            v1,
            v2,
            u1,
            u2,
            eps1,
            eps2,
            h,
            interval: Interval::default(),
            cutoff: CutoffSpec::default(),
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.iter().copied().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            format!("unknown preset `{s}` (expected one of: {})", names.join(", "))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_match_the_built_system() {
        for p in Preset::ALL {
            let spec = p.spec(1e-3, None).unwrap();
            assert_eq!((spec.m(), spec.n1(), spec.n2()), p.orders(), "{p}");
        }
    }

    #[test]
    fn default_eps_hits_target_mu() {
        for p in Preset::ALL {
            let spec = p.spec(1e-3, None).unwrap();
            assert!((spec.scale_params().mu_mn - DEFAULT_MU).abs() < 1e-12, "{p}");
        }
        let spec = Preset::TangentM2.spec(1e-3, None).unwrap();
        assert!((spec.eps1() - 5e-4).abs() < 1e-15);
    }

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("tangent".parse::<Preset>().is_err());
    }

    #[test]
    fn nonhermitian_ratio() {
        let spec = Preset::Nonhermitian.spec(1e-3, Some(1e-4)).unwrap();
        assert!((spec.eps1() / spec.eps2() - 2.0).abs() < 1e-12);
    }
}
