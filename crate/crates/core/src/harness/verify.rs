use std::fmt;

use num_complex::Complex64;

use crate::model::{classify_regime, Regime, SystemSpec};
use crate::oscquad::QuadOptions;
use crate::poly::{Order, Poly};
use crate::presets::Preset;
use crate::solver::{
    coupling_symmetry, predicted_t, scattering_for, transfer_matrix, wronskian, wronskian_propagation, Fidelity, Path,
    PhaseFactors, ScatteringConvention, Side, SolverOptions, TransferResult,
};
use crate::statphase::{omega_m, omega_tilde0, EtaConvention};

use super::fit_convergence;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub presets: Vec<Preset>,
    pub h_values: Vec<f64>,
    /// Geometric-mean coupling; `None` uses each preset's default.
    pub eps: Option<f64>,
    /// Multiplies every tolerance.
    pub tol_scale: f64,
    /// Runs the `eps = h^{4/5}` convergence check (needs `tangent-m2`).
    pub convergence: bool,
    pub solver: SolverOptions,
    pub quad: QuadOptions,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            presets: Preset::ALL.to_vec(),
            h_values: vec![1e-2, 1e-3],
            eps: None,
            tol_scale: 1.0,
            convergence: true,
            solver: SolverOptions::default(),
            quad: QuadOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Pass,
    Fail,
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub context: String,
    pub measured: f64,
    pub tolerance: f64,
    pub outcome: Outcome,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Outcome::Skipped(why) => write!(f, "SKIP {:<28} {:<28} {}", self.name, self.context, why),
            o => write!(
                f,
                "{} {:<28} {:<28} measured {:.3e}  tolerance {:.3e}",
                if *o == Outcome::Pass { "PASS" } else { "FAIL" },
                self.name,
                self.context,
                self.measured,
                self.tolerance
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.outcome == Outcome::Fail)
    }

    pub fn count(&self, outcome: &Outcome) -> usize {
        self.checks
            .iter()
            .filter(|c| std::mem::discriminant(&c.outcome) == std::mem::discriminant(outcome))
            .count()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(
            f,
            "{} passed, {} failed, {} skipped",
            self.count(&Outcome::Pass),
            self.count(&Outcome::Fail),
            self.count(&Outcome::Skipped(String::new()))
        )
    }
}

struct Recorder<'a> {
    checks: &'a mut Vec<Check>,
    context: String,
    scale: f64,
}

impl Recorder<'_> {
    /// `measured <= tolerance * scale`; NaN fails.
    fn check(&mut self, name: &str, measured: f64, tolerance: f64) {
        let tolerance = tolerance * self.scale;
        let outcome = if measured <= tolerance { Outcome::Pass } else { Outcome::Fail };
        self.push(name, measured, tolerance, outcome);
    }

    fn skip(&mut self, name: &str, why: String) {
        self.push(name, f64::NAN, f64::NAN, Outcome::Skipped(why));
    }

    fn push(&mut self, name: &str, measured: f64, tolerance: f64, outcome: Outcome) {
        self.checks.push(Check { name: name.into(), context: self.context.clone(), measured, tolerance, outcome });
    }
}

/// Runs the solver, predictor and model invariants on every configured
/// `(preset, h)` point, plus the convergence check along `eps = h^{4/5}`.
/// Failures are reported, never raised.
pub fn verify_suite(cfg: &VerifyConfig) -> VerifyReport {
    let mut checks = Vec::new();
    for &preset in &cfg.presets {
        for &h in &cfg.h_values {
            let mut rec = Recorder { checks: &mut checks, context: format!("{preset} h={h:.0e}"), scale: cfg.tol_scale };
            match preset.spec(h, cfg.eps) {
                Ok(spec) => verify_point(&spec, cfg, &mut rec),
                Err(e) => rec.skip("build-system", e.to_string()),
            }
        }
    }
    if cfg.convergence && cfg.presets.contains(&Preset::TangentM2) {
        let mut rec = Recorder { checks: &mut checks, context: "tangent-m2 eps=h^(4/5)".into(), scale: 1.0 };
        convergence_check(cfg, &mut rec);
    }
    VerifyReport { checks }
}

fn verify_point(spec: &SystemSpec, cfg: &VerifyConfig, rec: &mut Recorder) {
    let (m, n1, n2) = spec.recomputed_orders();
    let orders_ok = m == Order::Finite(spec.m()) && n1 == Order::Finite(spec.n1()) && n2 == Order::Finite(spec.n2());
    rec.check("orders-idempotent", if orders_ok { 0.0 } else { 1.0 }, 0.0);
    let lead = spec.gap().coeff(spec.m()) * crate::poly::factorial(spec.m());
    rec.check("leading-gap", (spec.geometry().leading_gap - lead).abs(), 1e-14 * lead.abs());
    phase_checks(spec, rec);

    let regime = classify_regime(spec);
    let ode = transfer_matrix(spec, Path::DirectOde, &cfg.solver);
    let series = if regime == Regime::Coupled {
        rec.skip("series", "not available in the coupled regime".into());
        None
    } else {
        Some(transfer_matrix(spec, Path::NeumannSeries, &cfg.solver))
    };
    let mut results: Vec<TransferResult> = Vec::new();
    for outcome in std::iter::once(ode).chain(series) {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => {
                rec.push("transfer-matrix", f64::NAN, f64::NAN, Outcome::Fail);
                eprintln!("verify: {}: {e}", rec.context);
            }
        }
    }
    for r in &results {
        let tag = r.path.as_str();
        rec.check(&format!("det[{tag}]"), r.matrix.det_deviation, 1e-8);
        rec.check(&format!("constancy[{tag}]"), r.matrix.constancy_deviation, 1e-6);
        initial_condition_check(spec, r, rec);
        normalization_check(spec, r, rec);
        wronskian_check(r, rec);
        if let Some(dev) = r.rep_t_deviation {
            rec.check("rep-t", dev, 1e-8);
        }
        for b in &r.bases {
            if let crate::solver::Construction::NeumannSeries { contraction, .. } = b.construction {
                rec.check(&format!("contraction[{}{}]", b.basis, side_tag(b.side)), contraction, 0.1);
            }
        }
    }
    if results.len() == 2 {
        let diff = (results[0].matrix.entries - results[1].matrix.entries).max_abs();
        let residual = results[0].residual.max(results[1].residual);
        rec.check("path-agreement", diff, 10.0 * residual);
    }
    let Some(reference) = results.first() else { return };
    symmetry_checks(spec, reference, rec);
    match scattering_for(spec, &reference.matrix) {
        Some(Ok(s)) => {
            let tol = if spec.eps1() == spec.eps2() { 1e-6 } else { 1e-4 };
            rec.check("unitarity", s.unitarity_deviation(), tol);
        }
        Some(Err(e)) => {
            rec.push("unitarity", f64::NAN, f64::NAN, Outcome::Fail);
            eprintln!("verify: {}: {e}", rec.context);
        }
        None => rec.skip("unitarity", "couplings have no Hermitian structure".into()),
    }
    predictor_checks(spec, reference, cfg, rec);
}

fn side_tag(side: Side) -> &'static str {
    match side {
        Side::Left => "l",
        Side::Right => "r",
    }
}

fn phase_checks(spec: &SystemSpec, rec: &mut Recorder) {
    let p = PhaseFactors::new(spec);
    let iv = spec.interval();
    let mut worst: f64 = 0.0;
    for i in 0..=200 {
        let x = iv.left + iv.width() * i as f64 / 200.0;
        let (up, um) = (p.u_plus(x), p.u_minus(x));
        worst = worst
            .max((p.u1(x).norm() - 1.0).abs())
            .max((p.u2(x).norm() - 1.0).abs())
            .max((p.u1(x) - um.conj() / up).norm())
            .max((p.u2(x) - um / up).norm());
    }
    rec.check("phase-identities", worst, 1e-12);
}

fn initial_condition_check(spec: &SystemSpec, r: &TransferResult, rec: &mut Recorder) {
    let iv = spec.interval();
    let mut worst: f64 = 0.0;
    for b in &r.bases {
        let x = if b.side == Side::Left { iv.left } else { iv.right };
        let z = b.z_at(x);
        let target = if b.basis == 1 { [1.0, 0.0] } else { [0.0, 1.0] };
        worst = worst.max((z[0] - target[0]).norm()).max((z[1] - target[1]).norm());
    }
    rec.check(&format!("initial-condition[{}]", r.path.as_str()), worst, 1e-12);
}

/// Outside the coupling support each basis is its unperturbed phase on its
/// own side.
fn normalization_check(spec: &SystemSpec, r: &TransferResult, rec: &mut Recorder) {
    let r2 = spec.cutoff().r2;
    let mut worst: f64 = 0.0;
    for b in &r.bases {
        let z = b.z_values();
        for (i, &x) in b.grid().nodes().iter().enumerate() {
            let outside = match b.side {
                Side::Left => x < -r2,
                Side::Right => x > r2,
            };
            if outside {
                let target = if b.basis == 1 { [1.0, 0.0] } else { [0.0, 1.0] };
                worst = worst.max((z[0][i] - target[0]).norm()).max((z[1][i] - target[1]).norm());
            }
        }
    }
    let mu1 = spec.scale_params().mu1_tilde;
    rec.check(&format!("normalized-basis[{}]", r.path.as_str()), worst, 1e-14_f64.min(mu1 * mu1));
}

fn wronskian_check(r: &TransferResult, rec: &mut Recorder) {
    let mut worst: f64 = 0.0;
    for pair in [(&r.bases[0], &r.bases[1]), (&r.bases[2], &r.bases[3])] {
        let grid = pair.0.grid();
        let y = grid.nodes()[0];
        let wy = wronskian(pair.0, pair.1, y);
        let nodes = grid.nodes();
        let stride = (nodes.len() / 64).max(1);
        for &x in nodes.iter().step_by(stride) {
            let wx = wronskian(pair.0, pair.1, x);
            let expected = wronskian_propagation(pair.0.phases(), x, y) * wy;
            worst = worst.max((wx - expected).norm() / expected.norm());
        }
    }
    rec.check(&format!("wronskian[{}]", r.path.as_str()), worst, 1e-8);
}

fn symmetry_checks(spec: &SystemSpec, r: &TransferResult, rec: &mut Recorder) {
    let Some(convention) = coupling_symmetry(spec) else {
        rec.skip("symmetry", "couplings have no Hermitian structure".into());
        return;
    };
    if spec.eps1() != spec.eps2() {
        rec.skip("symmetry", "eps1 != eps2".into());
        return;
    }
    // u+ w_2 = J conj(u+ w_1), J = [[0, -1], [1, 0]] or [[0, 1], [1, 0]]
    let sign = match convention {
        ScatteringConvention::Hermite1 => -1.0,
        ScatteringConvention::Hermite2 => 1.0,
    };
    let phases = r.bases[0].phases();
    let mut worst: f64 = 0.0;
    for (w1, w2) in [(&r.bases[0], &r.bases[1]), (&r.bases[2], &r.bases[3])] {
        let nodes = w1.grid().nodes();
        let stride = (nodes.len() / 256).max(1);
        for &x in nodes.iter().step_by(stride) {
            let up = phases.u_plus(x);
            let a = w1.w_at(x);
            let b = w2.w_at(x);
            let lhs = [up * b[0], up * b[1]];
            let c = [(up * a[0]).conj(), (up * a[1]).conj()];
            worst = worst.max((lhs[0] - sign * c[1]).norm()).max((lhs[1] - c[0]).norm());
        }
    }
    rec.check("basis-symmetry", worst, 1e-6);
    let t = &r.matrix;
    let dev = (t.t22() - t.t11().conj()).norm().max((t.t12() - sign * t.t21().conj()).norm());
    rec.check("t-symmetry", dev, 1e-6);
}

fn predictor_checks(spec: &SystemSpec, r: &TransferResult, cfg: &VerifyConfig, rec: &mut Recorder) {
    if spec.m() >= 2 && spec.n1() == 0 && spec.u1().coeffs() == [1.0] {
        let reduced = omega_tilde0(spec.m(), 0, &Poly::constant(1.0), &spec.gap(), EtaConvention::Leading);
        let direct = omega_m(spec.h(), spec.v1(), spec.v2());
        match (reduced, direct) {
            (Ok(a), Ok(b)) => rec.check("theorem2-reduces-to-1", (a - b).norm(), 1e-12 * b.norm()),
            _ => rec.push("theorem2-reduces-to-1", f64::NAN, f64::NAN, Outcome::Fail),
        }
    }
    match predicted_t(spec, Fidelity::OscIntegral, &cfg.quad) {
        Ok(pred) => {
            let (env11, env22) = pred.diagonal_envelopes;
            let one = Complex64::new(1.0, 0.0);
            rec.check("diagonal-envelope-11", (r.matrix.t11() - one).norm(), 5.0 * env11);
            rec.check("diagonal-envelope-22", (r.matrix.t22() - one).norm(), 5.0 * env22);
        }
        Err(e) => rec.skip("prediction", e.to_string()),
    }
}

/// Along `eps = h^{4/5}` on `tangent-m2` the relative off-diagonal error
/// `|t12 - pred| / mu_2` decreases with `h` at the rate of `mu_2^2 = h^{4/15}`.
fn convergence_check(cfg: &VerifyConfig, rec: &mut Recorder) {
    let hs = [1e-2, 10f64.powf(-2.5), 1e-3, 10f64.powf(-3.5)];
    let mut pairs = Vec::new();
    for &h in &hs {
        let spec = match Preset::TangentM2.spec(h, Some(h.powf(0.8))) {
            Ok(s) => s,
            Err(e) => return rec.skip("theorem2-convergence", e.to_string()),
        };
        let t = transfer_matrix(&spec, Path::DirectOde, &cfg.solver);
        let pred = predicted_t(&spec, Fidelity::OscIntegral, &cfg.quad);
        match (t, pred) {
            (Ok(t), Ok(p)) => {
                let mu = spec.scale_params().mu_mn;
                pairs.push((h, (t.matrix.t12() - p.matrix.t12()).norm() / mu));
            }
            (Err(e), _) => return rec.skip("theorem2-convergence", e.to_string()),
            (_, Err(e)) => return rec.skip("theorem2-convergence", e.to_string()),
        }
    }
    let decreasing = pairs.windows(2).all(|w| w[1].1 < w[0].1);
    rec.check("theorem2-error-decreases", if decreasing { 0.0 } else { 1.0 }, 0.0);
    let expected = 4.0 / 15.0;
    match fit_convergence(&pairs) {
        Ok(fit) => rec.check("theorem2-slope", (fit.slope - expected).abs(), 0.2 * expected),
        Err(e) => rec.skip("theorem2-slope", e.to_string()),
    }
}
