//! The 2x2 system, its crossing geometry and the regime bookkeeping.
//!
//! The system is `(h D_x + H) w = 0` on an interval `I` around 0 with
//!
//! ```text
//!     H = | V1        eps1 U1 |
//!         | eps2 U2   V2      |
//! ```
//!
//! where `V1 - V2` vanishes only at `x = 0`, to finite order `m` (the contact
//! order), and `U_j` vanishes there to order `n_j`.

use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::error::ModelError;
use crate::poly::{Order, Poly};

/// Closed working interval `[left, right]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self, ModelError> {
        if !(left < 0.0 && 0.0 < right && left.is_finite() && right.is_finite()) {
            return Err(ModelError::BadInterval { left, right });
        }
        Ok(Interval { left, right })
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }
}

impl Default for Interval {
    fn default() -> Self {
        Interval { left: -1.0, right: 1.0 }
    }
}

/// `f^{(k)}(0)` pattern of a polynomial; see [`Poly::vanishing_order`].
pub fn vanishing_order(f: &Poly, tol: f64) -> Order {
    f.vanishing_order(tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingGeometry {
    /// Common value `V1(0) = V2(0)`.
    pub v0: f64,
    /// Contact order of the two curves.
    pub m: usize,
    /// `V1^{(m)}(0) - V2^{(m)}(0)`.
    pub leading_gap: f64,
}

impl CrossingGeometry {
    /// The crossing point `(0, -V0)` in phase space.
    pub fn rho0(&self) -> (f64, f64) {
        (0.0, -self.v0)
    }
}

/// A validated instance of the system. Construct with [`build_system`].
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub(crate) v1: Poly,
    pub(crate) v2: Poly,
    pub(crate) u1: Poly,
    pub(crate) u2: Poly,
    pub(crate) eps1: f64,
    pub(crate) eps2: f64,
    pub(crate) h: f64,
    pub(crate) interval: Interval,
    pub(crate) cutoff: CutoffSpec,
    pub(crate) geometry: CrossingGeometry,
    pub(crate) n1: usize,
    pub(crate) n2: usize,
}

/// Unvalidated inputs for [`build_system`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemInputs {
    pub v1: Poly,
    pub v2: Poly,
    pub u1: Poly,
    pub u2: Poly,
    pub eps1: f64,
    pub eps2: f64,
    pub h: f64,
    #[serde(default)]
    pub interval: Interval,
    #[serde(default)]
    pub cutoff: CutoffSpec,
}

fn positive(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::BadParameter { name, value })
    }
}

fn nonnegative(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::BadParameter { name, value })
    }
}

/// Validates the model: finite contact order `m >= 1`, no other zero of
/// `V1 - V2` on the interval, couplings not identically zero.
///
/// `eps_j = 0` is accepted (it is the uncoupled system, useful as a
/// baseline), `h` must be positive.
pub fn build_system(inputs: SystemInputs) -> Result<SystemSpec, ModelError> {
    let SystemInputs { v1, v2, u1, u2, eps1, eps2, h, interval, cutoff } = inputs;
    let interval = Interval::new(interval.left, interval.right)?;
    cutoff.check_inside((interval.left, interval.right))?;
    nonnegative("eps1", eps1)?;
    nonnegative("eps2", eps2)?;
    positive("h", h)?;

    let gap = v1.sub(&v2);
    let m = match gap.vanishing_order(0.0) {
        Order::Infinite => {
            return Err(ModelError::DegenerateModel("V1 - V2 vanishes identically".into()))
        }
        Order::Finite(0) => {
            return Err(ModelError::DegenerateModel("V1(0) != V2(0): no crossing at x = 0".into()))
        }
        Order::Finite(m) => m,
    };
    let rest = gap.shift_down(m);
    let extra = rest.count_roots_in(interval.left, interval.right);
    if extra > 0 {
        return Err(ModelError::DegenerateModel(format!(
            "V1 - V2 has {extra} zero(s) in the interval besides x = 0"
        )));
    }
    let order_of = |u: &Poly, name: &str| match u.vanishing_order(0.0) {
        Order::Finite(n) => Ok(n),
        Order::Infinite => Err(ModelError::DegenerateModel(format!("{name} vanishes identically"))),
    };
    let n1 = order_of(&u1, "U1")?;
    let n2 = order_of(&u2, "U2")?;
    let geometry = CrossingGeometry {
        v0: v1.eval(0.0),
        m,
        leading_gap: gap.derivative_at_zero(m),
    };
    Ok(SystemSpec { v1, v2, u1, u2, eps1, eps2, h, interval, cutoff, geometry, n1, n2 })
}

impl SystemSpec {
    pub fn v1(&self) -> &Poly {
        &self.v1
    }
    pub fn v2(&self) -> &Poly {
        &self.v2
    }
    pub fn u1(&self) -> &Poly {
        &self.u1
    }
    pub fn u2(&self) -> &Poly {
        &self.u2
    }
    pub fn eps1(&self) -> f64 {
        self.eps1
    }
    pub fn eps2(&self) -> f64 {
        self.eps2
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn interval(&self) -> Interval {
        self.interval
    }
    pub fn cutoff(&self) -> CutoffSpec {
        self.cutoff
    }
    pub fn geometry(&self) -> &CrossingGeometry {
        &self.geometry
    }
    pub fn m(&self) -> usize {
        self.geometry.m
    }
    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.n2
    }

    /// `V1 - V2`.
    pub fn gap(&self) -> Poly {
        self.v1.sub(&self.v2)
    }

    pub fn inputs(&self) -> SystemInputs {
        SystemInputs {
            v1: self.v1.clone(),
            v2: self.v2.clone(),
            u1: self.u1.clone(),
            u2: self.u2.clone(),
            eps1: self.eps1,
            eps2: self.eps2,
            h: self.h,
            interval: self.interval,
            cutoff: self.cutoff,
        }
    }

    /// Same potentials and couplings with new small parameters.
    pub fn with_params(&self, eps1: f64, eps2: f64, h: f64) -> Result<SystemSpec, ModelError> {
        nonnegative("eps1", eps1)?;
        nonnegative("eps2", eps2)?;
        positive("h", h)?;
        Ok(SystemSpec { eps1, eps2, h, ..self.clone() })
    }

    pub fn with_cutoff(&self, cutoff: CutoffSpec) -> Result<SystemSpec, ModelError> {
        cutoff.check_inside((self.interval.left, self.interval.right))?;
        Ok(SystemSpec { cutoff, ..self.clone() })
    }

    /// Recomputes `m`, `n1`, `n2` from the polynomials.
    pub fn recomputed_orders(&self) -> (Order, Order, Order) {
        (
            self.gap().vanishing_order(0.0),
            self.u1.vanishing_order(0.0),
            self.u2.vanishing_order(0.0),
        )
    }

    pub fn scale_params(&self) -> ScaleParams {
        scale_params(self)
    }
}

/// `mu_k(eps, h) = eps h^{-k/(k+1)}`.
pub fn mu_k(eps: f64, h: f64, k: usize) -> f64 {
    eps * h.powf(-(k as f64) / (k as f64 + 1.0))
}

/// `mu_{m,l}(eps, h)` for a (possibly half-integer) `l`:
/// `eps h^{-(m-l)/(m+1)}` when `2l + 1 < m`, otherwise
/// `eps h^{-1/2} (log 1/h)^{delta_{2l+1,m}/2}`.
pub fn mu_ml(eps: f64, h: f64, m: usize, l: f64) -> f64 {
    let m_f = m as f64;
    if 2.0 * l + 1.0 < m_f {
        eps * h.powf(-(m_f - l) / (m_f + 1.0))
    } else {
        let log_factor = if 2.0 * l + 1.0 == m_f { (1.0 / h).ln().sqrt() } else { 1.0 };
        eps * h.powf(-0.5) * log_factor
    }
}

/// `iota(k) = k mod 2`.
pub fn iota(k: usize) -> usize {
    k % 2
}

/// `nu(m, n) = (m - n - iota(m n)) / (m + 1)`.
pub fn nu(m: usize, n: usize) -> f64 {
    (m as f64 - n as f64 - iota(m * n) as f64) / (m as f64 + 1.0)
}

/// All the scale parameters of one `(eps1, eps2, h)` point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleParams {
    pub h: f64,
    pub m: usize,
    pub eps_tilde: f64,
    pub n_tilde: f64,
    /// `mu_m(eps_tilde, h)`.
    pub mu_m: f64,
    /// `mu_{m, n_tilde}(eps_tilde, h)`.
    pub mu_mn: f64,
    /// `mu_1(eps_tilde, h)`.
    pub mu1_tilde: f64,
    /// `(mu_{m,n_tilde} / eps_tilde)^2`.
    pub zeta: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub nu1: f64,
    pub nu2: f64,
}

impl ScaleParams {
    pub fn mu_k(&self, k: usize) -> f64 {
        mu_k(self.eps_tilde, self.h, k)
    }

    pub fn mu_ml(&self, m: usize, l: f64) -> f64 {
        mu_ml(self.eps_tilde, self.h, m, l)
    }

    /// Refined diagonal envelopes `(t11 - 1, t22 - 1)`:
    /// `min{mu_{m,n}^2, mu1^2 h^{-(m - n_other - iota(m n_other))/(m+1)}}`.
    pub fn diagonal_envelopes(&self, n1: usize, n2: usize) -> (f64, f64) {
        let base = self.mu_mn * self.mu_mn;
        let refined = |n: usize| self.mu1_tilde * self.mu1_tilde * self.h.powf(-nu(self.m, n));
        (base.min(refined(n2)), base.min(refined(n1)))
    }

    /// Neumann contraction bound `(log 1/h)^{delta} h^{-(2m - n1 - n2)/(m+1)} eps1 eps2`
    /// (constant set to 1), valid for `n1 + n2 <= m - 1`; otherwise `eps1 eps2 / h`.
    pub fn contraction_bound(&self, n1: usize, n2: usize) -> f64 {
        let m = self.m;
        let e2 = self.eps_tilde * self.eps_tilde;
        if n1 + n2 < m {
            let delta = if n1 + n2 + 1 == m { (1.0 / self.h).ln() } else { 1.0 };
            delta * self.h.powf(-((2 * m - n1 - n2) as f64) / (m as f64 + 1.0)) * e2
        } else {
            e2 / self.h
        }
    }
}

pub fn scale_params(spec: &SystemSpec) -> ScaleParams {
    let h = spec.h;
    let m = spec.geometry.m;
    let eps_tilde = (spec.eps1 * spec.eps2).sqrt();
    let n_tilde = 0.5 * (spec.n1 + spec.n2) as f64;
    let mu_mn = mu_ml(eps_tilde, h, m, n_tilde);
    // zeta is defined through mu_{m,n}/eps; evaluate it with eps = 1 so it
    // stays meaningful when eps_tilde = 0.
    let zeta = mu_ml(1.0, h, m, n_tilde).powi(2);
    let nu1 = nu(m, spec.n1);
    let nu2 = nu(m, spec.n2);
    ScaleParams {
        h,
        m,
        eps_tilde,
        n_tilde,
        mu_m: mu_k(eps_tilde, h, m),
        mu_mn,
        mu1_tilde: mu_k(eps_tilde, h, 1),
        zeta,
        zeta1: h.powf(-1.0 - nu1),
        zeta2: h.powf(-1.0 - nu2),
        nu1,
        nu2,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    NonCoupled,
    Marginal,
    Coupled,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::NonCoupled => "NonCoupled",
            Regime::Marginal => "Marginal",
            Regime::Coupled => "Coupled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds { low: 0.3, high: 3.0 }
    }
}

pub fn classify_mu(mu_m: f64, thresholds: RegimeThresholds) -> Regime {
    if mu_m < thresholds.low {
        Regime::NonCoupled
    } else if mu_m > thresholds.high {
        Regime::Coupled
    } else {
        Regime::Marginal
    }
}

/// Classifies by `mu_m(eps_tilde, h)` with the default thresholds.
pub fn classify_regime(spec: &SystemSpec) -> Regime {
    classify_regime_with(spec, RegimeThresholds::default())
}

pub fn classify_regime_with(spec: &SystemSpec, thresholds: RegimeThresholds) -> Regime {
    classify_mu(spec.scale_params().mu_m, thresholds)
}
