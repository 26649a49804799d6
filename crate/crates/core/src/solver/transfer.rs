use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{neumann_solution, ode_solution, Couplings, Path, PhaseFactors, Side, Solution, SolverOptions};
use crate::error::{ModelError, SolverError};
use crate::matrix::{Mat2, Matrix2, MatrixRole};
use crate::model::{classify_regime, Regime, SystemSpec};
use crate::oscquad::{omega_tilde, QuadOptions};
use crate::statphase::{omega_tilde0, EtaConvention};

/// `T_ex` extracted from the four exact bases.
#[derive(Clone, Debug)]
pub struct TransferResult {
    pub matrix: Matrix2,
    pub path: Path,
    /// `w_{1,l}, w_{2,l}, w_{1,r}, w_{2,r}`.
    pub bases: Vec<Solution>,
    /// Largest residual among the four bases.
    pub residual: f64,
    /// `max |A - (T - Id)|` with `A` from the integral representation
    /// (series path only).
    pub rep_t_deviation: Option<f64>,
    /// Per-point matrices that entered the mean.
    pub samples: Vec<(f64, Mat2)>,
    pub skipped: usize,
    pub warnings: Vec<String>,
}

/// Solves the four bases along `path` and extracts `T_ex`.
pub fn transfer_matrix(spec: &SystemSpec, path: Path, opts: &SolverOptions) -> Result<TransferResult, SolverError> {
    let jobs = [(1, Side::Left), (2, Side::Left), (1, Side::Right), (2, Side::Right)];
    let bases: Result<Vec<Solution>, SolverError> = jobs
        .par_iter()
        .map(|&(j, side)| match path {
            Path::NeumannSeries => neumann_solution(spec, j, side, opts),
            Path::DirectOde => ode_solution(spec, j, side, opts),
        })
        .collect();
    transfer_matrix_from_bases(spec, path, bases?, opts)
}

/// `T_ex` from given bases `[w_{1,l}, w_{2,l}, w_{1,r}, w_{2,r}]`, solving
/// `(w_{1,l}, w_{2,l}) = (w_{1,r}, w_{2,r}) T` at the evaluation points.
pub fn transfer_matrix_from_bases(
    spec: &SystemSpec,
    path: Path,
    bases: Vec<Solution>,
    opts: &SolverOptions,
) -> Result<TransferResult, SolverError> {
    assert_eq!(bases.len(), 4);
    let r1 = spec.cutoff().r1;
    let mut samples = Vec::new();
    let mut best_cond = f64::INFINITY;
    for &f in &opts.eval_fractions {
        let x = f * r1;
        let zl = Mat2::from_columns(bases[0].z_at(x), bases[1].z_at(x));
        let zr = Mat2::from_columns(bases[2].z_at(x), bases[3].z_at(x));
        let cond = zr.condition();
        best_cond = best_cond.min(cond);
        if cond > opts.cond_max {
            continue;
        }
        // the diagonal phases diag(u1, u2) cancel between both sides
        samples.push((x, zr.inverse().unwrap() * zl));
    }
    if samples.is_empty() {
        return Err(SolverError::IllConditioned(best_cond));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().fold(Mat2::zero(), |acc, (_, t)| acc + *t).scale(Complex64::new(1.0 / n, 0.0));
    let norm = mean.max_abs().max(f64::MIN_POSITIVE);
    let spread = samples.iter().map(|(_, t)| (*t - mean).max_abs()).fold(0.0, f64::max);
    let mut matrix = Matrix2::new(mean, MatrixRole::Transfer);
    matrix.constancy_deviation = spread / norm;

    let rep_t_deviation = match path {
        Path::NeumannSeries => {
            let a = rep_t_matrix(spec, &bases[0], &bases[1]);
            Some((a - (mean - Mat2::identity())).max_abs())
        }
        Path::DirectOde => None,
    };
    let residual = bases.iter().map(|b| b.residual).fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if spec.m() == 1 {
        let p = spec.scale_params();
        let gate = p.mu1_tilde * (1.0 / spec.h()).ln().sqrt();
        if gate > 0.3 {
            warnings.push(format!(
                "m = 1: mu_1 (log 1/h)^(1/2) = {gate:.3} is not small; the series construction is outside its proven range"
            ));
        }
    }
    Ok(TransferResult {
        matrix,
        path,
        bases,
        residual,
        rep_t_deviation,
        samples,
        skipped: opts.eval_fractions.len() - n as usize,
        warnings,
    })
}

/// `A = T_ex - Id` from the integral representation
/// `A = (1/(ih)) int F(x) B(x) dx`, `F = diag(eps1 chi U1 / u1, eps2 chi U2 / u2)`,
/// whose first row pairs with the second components of the left bases and
/// whose second row pairs with their first components.
pub fn rep_t_matrix(spec: &SystemSpec, w1l: &Solution, w2l: &Solution) -> Mat2 {
    let couplings = Couplings::new(spec);
    let phases = PhaseFactors::new(spec);
    let grid = w1l.grid();
    let nodes = grid.nodes();
    let w1 = w1l.values();
    let w2: [Vec<Complex64>; 2] = {
        let vals: Vec<[Complex64; 2]> = nodes.iter().map(|&x| w2l.w_at(x)).collect();
        [vals.iter().map(|v| v[0]).collect(), vals.iter().map(|v| v[1]).collect()]
    };
    let f1: Vec<Complex64> = nodes.iter().map(|&x| couplings.c1(x) / phases.u1(x)).collect();
    let f2: Vec<Complex64> = nodes.iter().map(|&x| couplings.c2(x) / phases.u2(x)).collect();
    let integrate = |f: &[Complex64], g: &[Complex64]| {
        let prod: Vec<Complex64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
        grid.integral(&prod)
    };
    let pre = Complex64::new(0.0, -1.0 / spec.h());
    Mat2::new(
        pre * integrate(&f1, &w1[1]),
        pre * integrate(&f1, &w2[1]),
        pre * integrate(&f2, &w1[0]),
        pre * integrate(&f2, &w2[0]),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fidelity {
    /// Closed-form leading coefficients.
    #[serde(rename = "closed")]
    LeadingClosed,
    /// Numerically evaluated `omega_tilde(h)`.
    #[serde(rename = "integral")]
    OscIntegral,
}

impl Fidelity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Fidelity::LeadingClosed => "closed",
            Fidelity::OscIntegral => "integral",
        }
    }
}

impl std::str::FromStr for Fidelity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed" => Ok(Fidelity::LeadingClosed),
            "integral" => Ok(Fidelity::OscIntegral),
            _ => Err(format!("unknown fidelity `{s}` (expected closed or integral)")),
        }
    }
}

/// Asymptotic prediction of `T` with its error scales.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub matrix: Matrix2,
    pub fidelity: Fidelity,
    /// `omega_tilde_{m,n1}(h; U1, V1 - V2)` (or its leading behaviour).
    pub omega12: Complex64,
    /// `omega_tilde_{m,n2}(h; U2, V2 - V1)` (or its leading behaviour).
    pub omega21: Complex64,
    /// `mu_{m, n_tilde}^2`, the relative size of the neglected terms.
    pub error_scale: f64,
    /// Refined bounds on `|t11 - 1|` and `|t22 - 1|`.
    pub diagonal_envelopes: (f64, f64),
}

fn omega_for(
    spec: &SystemSpec,
    n: usize,
    w: &crate::poly::Poly,
    q: &crate::poly::Poly,
    fidelity: Fidelity,
    quad: &QuadOptions,
) -> Result<Complex64, SolverError> {
    let m = spec.m();
    match fidelity {
        Fidelity::OscIntegral => Ok(omega_tilde(m, n, w, q, spec.h(), &spec.cutoff(), quad)?.value),
        Fidelity::LeadingClosed => {
            let w0 = omega_tilde0(m, n, w, q, EtaConvention::Leading)?;
            let lift = if m * n % 2 == 1 { spec.h().powf(1.0 / (m as f64 + 1.0)) } else { 1.0 };
            Ok(w0 * lift)
        }
    }
}

/// `t12 = -i eps1 h^{-(m-n1)/(m+1)} omega_tilde_{m,n1}(h; U1, V1 - V2)`,
/// `t21 = -i eps2 h^{-(m-n2)/(m+1)} omega_tilde_{m,n2}(h; U2, V2 - V1)`,
/// unit diagonal.
pub fn predicted_t(spec: &SystemSpec, fidelity: Fidelity, quad: &QuadOptions) -> Result<Prediction, SolverError> {
    let p = spec.scale_params();
    if classify_regime(spec) == Regime::Coupled {
        return Err(SolverError::RegimeViolation(p.mu_m));
    }
    let m = spec.m() as f64;
    let h = spec.h();
    let gap = spec.gap();
    let minus_i = Complex64::new(0.0, -1.0);
    let zero = Complex64::new(0.0, 0.0);
    let (mut omega12, mut omega21) = (zero, zero);
    let (mut t12, mut t21) = (zero, zero);
    if spec.eps1() > 0.0 {
        omega12 = omega_for(spec, spec.n1(), spec.u1(), &gap, fidelity, quad)?;
        t12 = minus_i * spec.eps1() * h.powf(-(m - spec.n1() as f64) / (m + 1.0)) * omega12;
    }
    if spec.eps2() > 0.0 {
        omega21 = omega_for(spec, spec.n2(), spec.u2(), &gap.scale(-1.0), fidelity, quad)?;
        t21 = minus_i * spec.eps2() * h.powf(-(m - spec.n2() as f64) / (m + 1.0)) * omega21;
    }
    let one = Complex64::new(1.0, 0.0);
    let matrix = Matrix2::new(Mat2::new(one, t12, t21, one), MatrixRole::Predicted);
    Ok(Prediction {
        matrix,
        fidelity,
        omega12,
        omega21,
        error_scale: p.mu_mn * p.mu_mn,
        diagonal_envelopes: p.diagonal_envelopes(spec.n1(), spec.n2()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScatteringConvention {
    /// `U1 = conj(U2)`, `eps1 = eps2`: `S = T`.
    Hermite1,
    /// `U1 = -conj(U2)`: `S = (1/t22) [[1, t12], [-t21, 1]]`.
    Hermite2,
}

pub fn scattering_matrix(t: &Matrix2, convention: ScatteringConvention) -> Result<Matrix2, SolverError> {
    let entries = match convention {
        ScatteringConvention::Hermite1 => t.entries,
        ScatteringConvention::Hermite2 => {
            let t22 = t.t22();
            if t22.norm() < 1e-12 {
                return Err(SolverError::SingularT22(t22.norm()));
            }
            let one = Complex64::new(1.0, 0.0);
            Mat2::new(one, t.t12(), -t.t21(), one).scale(1.0 / t22)
        }
    };
    let mut s = Matrix2::new(entries, MatrixRole::Scattering);
    s.constancy_deviation = t.constancy_deviation;
    Ok(s)
}

/// Conjugation by `D = diag((eps2/eps1)^{1/4}, (eps1/eps2)^{1/4})`:
/// `t12 -> t12 sqrt(eps2/eps1)`, `t21 -> t21 sqrt(eps1/eps2)`.
pub fn rescale_bases(t: &Matrix2, eps1: f64, eps2: f64) -> Result<Matrix2, ModelError> {
    for (name, v) in [("eps1", eps1), ("eps2", eps2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ModelError::BadParameter { name, value: v });
        }
    }
    let r = (eps2 / eps1).sqrt();
    let e = t.entries;
    let entries = Mat2::new(e.get(0, 0), e.get(0, 1) * r, e.get(1, 0) / r, e.get(1, 1));
    let mut out = Matrix2::new(entries, t.role);
    out.constancy_deviation = t.constancy_deviation;
    Ok(out)
}

/// `det(w_a(x), w_b(x))`.
pub fn wronskian(a: &Solution, b: &Solution, x: f64) -> Complex64 {
    let wa = a.w_at(x);
    let wb = b.w_at(x);
    wa[0] * wb[1] - wa[1] * wb[0]
}

/// Factor `exp((i/h) int_x^y (V1 + V2))` with `W(x) = factor * W(y)`.
pub fn wronskian_propagation(phases: &PhaseFactors, x: f64, y: f64) -> Complex64 {
    Complex64::from_polar(1.0, phases.trace_integral(x, y) / phases.h())
}

/// The scattering convention realized by the couplings, if any:
/// `Hermite1` for `U1 = conj(U2)`, `Hermite2` for `U1 = -conj(U2)`.
/// Couplings are real polynomials, so conjugation is the identity.
pub fn coupling_symmetry(spec: &SystemSpec) -> Option<ScatteringConvention> {
    let close = |a: &crate::poly::Poly, b: &crate::poly::Poly| {
        let scale = a.max_abs_coeff().max(b.max_abs_coeff());
        a.sub(b).max_abs_coeff() <= 1e-14 * scale
    };
    if close(spec.u1(), spec.u2()) {
        Some(ScatteringConvention::Hermite1)
    } else if close(spec.u1(), &spec.u2().scale(-1.0)) {
        Some(ScatteringConvention::Hermite2)
    } else {
        None
    }
}

/// `S` for the convention of [`coupling_symmetry`], after [`rescale_bases`]
/// when `eps1 != eps2`. `None` when the couplings have neither symmetry.
pub fn scattering_for(spec: &SystemSpec, t: &Matrix2) -> Option<Result<Matrix2, SolverError>> {
    let convention = coupling_symmetry(spec)?;
    let t = if spec.eps1() == spec.eps2() {
        t.clone()
    } else {
        match rescale_bases(t, spec.eps1(), spec.eps2()) {
            Ok(r) => r,
            Err(e) => return Some(Err(e.into())),
        }
    };
    Some(scattering_matrix(&t, convention))
}
