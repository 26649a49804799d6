//! Parameter sweeps, convergence fits and CSV output.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, HarnessError, ModelError};
use crate::model::{build_system, classify_regime, Regime, SystemInputs, SystemSpec};
use crate::oscquad::QuadOptions;
use crate::presets::Preset;
use crate::solver::{predicted_t, scattering_for, transfer_matrix, Fidelity, Path, SolverOptions};

mod verify;

pub use verify::{verify_suite, Check, Outcome, VerifyConfig, VerifyReport};

/// Relative errors of predicted entries smaller than this are not reported.
pub const RELATIVE_FLOOR: f64 = 1e-14;

/// Geometric grid of `h` values from `start` down to `stop`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl HGrid {
    pub fn single(h: f64) -> Self {
        HGrid { start: h, stop: h, points: 1 }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &str, message: String| ConfigError::Validation { field: field.into(), message };
        if self.points == 0 {
            return Err(bad("h_grid.points", "the h grid is empty".into()));
        }
        for (field, v) in [("h_grid.start", self.start), ("h_grid.stop", self.stop)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(bad(field, format!("{v} is not in (0, 1)")));
            }
        }
        if self.points > 1 && self.stop >= self.start {
            return Err(bad("h_grid", "h values must be strictly decreasing (start > stop)".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let ratio = self.stop / self.start;
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start * ratio.powf(i as f64 / last) })
            .collect()
    }
}

/// How the coupling strength follows `h`. The rule fixes the geometric mean
/// `eps_tilde = sqrt(eps1 eps2)`; the ratio `eps1 / eps2` comes from the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsRule {
    Fixed(f64),
    /// `eps = c h^a`.
    PowerLaw { c: f64, a: f64 },
    /// `mu_m(eps, h) = mu`.
    FixedMu(f64),
}

impl EpsRule {
    pub fn eps(&self, h: f64, m: usize) -> f64 {
        match *self {
            EpsRule::Fixed(e) => e,
            EpsRule::PowerLaw { c, a } => c * h.powf(a),
            EpsRule::FixedMu(mu) => mu * h.powf(m as f64 / (m as f64 + 1.0)),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::Validation { field: "eps_rule".into(), message };
        match *self {
            EpsRule::Fixed(e) if !(e >= 0.0 && e.is_finite()) => Err(bad(format!("eps = {e} must be >= 0"))),
            EpsRule::PowerLaw { c, a } if !(c >= 0.0 && c.is_finite() && a.is_finite()) => {
                Err(bad(format!("power law needs c >= 0 and finite a (got c = {c}, a = {a})")))
            }
            EpsRule::FixedMu(mu) if !(mu >= 0.0 && mu.is_finite()) => Err(bad(format!("mu = {mu} must be >= 0"))),
            _ => Ok(()),
        }
    }

    /// Regime of the small-`h` tail, if the rule determines one.
    pub fn tail_regime(&self, m: usize) -> Option<Regime> {
        let critical = m as f64 / (m as f64 + 1.0);
        match *self {
            EpsRule::PowerLaw { a, .. } if a > critical => Some(Regime::NonCoupled),
            EpsRule::PowerLaw { a, .. } if a < critical => Some(Regime::Coupled),
            EpsRule::Fixed(e) if e > 0.0 => Some(Regime::Coupled),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Preset(Preset),
    /// Explicit model; its `eps1 / eps2` ratio is kept and its `h` replaced.
    Explicit(SystemInputs),
}

impl ModelSource {
    /// The model at `(h, eps_tilde)`.
    pub fn spec(&self, h: f64, eps: f64) -> Result<SystemSpec, ModelError> {
        match self {
            ModelSource::Preset(p) => p.spec(h, Some(eps)),
            ModelSource::Explicit(inputs) => {
                let ratio = if inputs.eps1 > 0.0 && inputs.eps2 > 0.0 { inputs.eps1 / inputs.eps2 } else { 1.0 };
                let mut inputs = inputs.clone();
                inputs.h = h;
                inputs.eps1 = eps * ratio.sqrt();
                inputs.eps2 = eps / ratio.sqrt();
                build_system(inputs)
            }
        }
    }
}

fn default_paths() -> Vec<Path> {
    vec![Path::NeumannSeries, Path::DirectOde]
}

fn default_fidelities() -> Vec<Fidelity> {
    vec![Fidelity::OscIntegral]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelSource,
    pub h_grid: HGrid,
    pub eps_rule: EpsRule,
    #[serde(default = "default_paths")]
    pub paths: Vec<Path>,
    /// The first fidelity fills the prediction columns of the CSV.
    #[serde(default = "default_fidelities")]
    pub fidelities: Vec<Fidelity>,
    /// Relative tolerance of the oscillatory quadrature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    /// Record wall-clock times (makes the CSV run-dependent).
    #[serde(default)]
    pub timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<std::path::PathBuf>,
}

impl SweepConfig {
    pub fn new(model: ModelSource, h_grid: HGrid, eps_rule: EpsRule) -> Self {
        SweepConfig {
            model,
            h_grid,
            eps_rule,
            paths: default_paths(),
            fidelities: default_fidelities(),
            quad_tol: None,
            timing: false,
            output: None,
        }
    }

    /// Checks the configuration and returns notes about the regime of the
    /// small-`h` tail.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        self.h_grid.validate()?;
        self.eps_rule.validate()?;
        if self.paths.is_empty() {
            return Err(ConfigError::Validation { field: "paths".into(), message: "no construction path selected".into() });
        }
        if let Some(tol) = self.quad_tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(ConfigError::Validation { field: "quad_tol".into(), message: format!("{tol} is not in (0, 1)") });
            }
        }
        let h0 = self.h_grid.start;
        let spec = self
            .model
            .spec(h0, self.eps_rule.eps(h0, 1))
            .map_err(|e| ConfigError::Validation { field: "model".into(), message: e.to_string() })?;
        let m = spec.m();
        let mut notes = Vec::new();
        let tail = if self.h_grid.points > 1 { self.eps_rule.tail_regime(m) } else { None };
        match tail {
            Some(Regime::NonCoupled) => notes.push(format!(
                "power-law exponent exceeds m/(m+1) = {:.4}: mu_m -> 0 as h -> 0 (non-coupled tail)",
                m as f64 / (m as f64 + 1.0)
            )),
            Some(Regime::Coupled) => notes.push(format!(
                "mu_m grows as h -> 0 (exponent below m/(m+1) = {:.4}): coupled tail",
                m as f64 / (m as f64 + 1.0)
            )),
            _ => {}
        }
        Ok(notes)
    }

    fn quad_options(&self) -> QuadOptions {
        match self.quad_tol {
            Some(tol) => QuadOptions::with_tol(tol),
            None => QuadOptions::default(),
        }
    }
}

/// Predicted off-diagonal entries at one fidelity.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRecord {
    pub fidelity: Fidelity,
    pub t12: Option<Complex64>,
    pub t21: Option<Complex64>,
    pub error: Option<String>,
}

/// Absolute and relative deviation of `T_ex` from a prediction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictionErrors {
    pub abs12: f64,
    pub abs21: f64,
    /// `None` when the predicted entry is below [`RELATIVE_FLOOR`].
    pub rel12: Option<f64>,
    pub rel21: Option<f64>,
}

/// One `(point, path)` result.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub h: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub m: usize,
    pub n1: usize,
    pub n2: usize,
    pub mu_m: f64,
    pub mu_mn: f64,
    pub regime: Regime,
    pub path: Path,
    /// `t11, t12, t21, t22`.
    pub t: Option<[Complex64; 4]>,
    pub predictions: Vec<PredictionRecord>,
    pub det_dev: f64,
    pub const_dev: f64,
    /// `None` when the couplings have no Hermitian structure.
    pub unit_dev: Option<f64>,
    pub residual: f64,
    pub rep_t_deviation: Option<f64>,
    pub wall_ms: Option<f64>,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

impl RunRecord {
    pub fn prediction(&self, fidelity: Fidelity) -> Option<&PredictionRecord> {
        self.predictions.iter().find(|p| p.fidelity == fidelity)
    }

    pub fn prediction_errors(&self, fidelity: Fidelity) -> Option<PredictionErrors> {
        let t = self.t?;
        let p = self.prediction(fidelity)?;
        let (p12, p21) = (p.t12?, p.t21?);
        let rel = |abs: f64, pred: Complex64| (pred.norm() >= RELATIVE_FLOOR).then(|| abs / pred.norm());
        let abs12 = (t[1] - p12).norm();
        let abs21 = (t[2] - p21).norm();
        Some(PredictionErrors { abs12, abs21, rel12: rel(abs12, p12), rel21: rel(abs21, p21) })
    }
}

fn predictions_for(spec: &SystemSpec, fidelities: &[Fidelity], quad: &QuadOptions) -> Vec<PredictionRecord> {
    fidelities
        .iter()
        .map(|&fidelity| match predicted_t(spec, fidelity, quad) {
            Ok(p) => PredictionRecord {
                fidelity,
                t12: Some(p.matrix.t12()),
                t21: Some(p.matrix.t21()),
                error: None,
            },
            Err(e) => PredictionRecord { fidelity, t12: None, t21: None, error: Some(e.to_string()) },
        })
        .collect()
}

/// Solves one point along one path.
pub fn run_point(
    spec: &SystemSpec,
    path: Path,
    predictions: Vec<PredictionRecord>,
    opts: &SolverOptions,
    timing: bool,
) -> RunRecord {
    let p = spec.scale_params();
    let start = Instant::now();
    let outcome = transfer_matrix(spec, path, opts);
    let wall_ms = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    let mut record = RunRecord {
        h: spec.h(),
        eps1: spec.eps1(),
        eps2: spec.eps2(),
        m: spec.m(),
        n1: spec.n1(),
        n2: spec.n2(),
        mu_m: p.mu_m,
        mu_mn: p.mu_mn,
        regime: classify_regime(spec),
        path,
        t: None,
        predictions,
        det_dev: f64::NAN,
        const_dev: f64::NAN,
        unit_dev: None,
        residual: f64::NAN,
        rep_t_deviation: None,
        wall_ms,
        error: None,
        warnings: Vec::new(),
    };
    match outcome {
        Ok(r) => {
            record.t = Some(r.matrix.entries.entries());
            record.det_dev = r.matrix.det_deviation;
            record.const_dev = r.matrix.constancy_deviation;
            record.residual = r.residual;
            record.rep_t_deviation = r.rep_t_deviation;
            record.unit_dev = match scattering_for(spec, &r.matrix) {
                Some(Ok(s)) => Some(s.unitarity_deviation()),
                Some(Err(e)) => {
                    record.warnings.push(format!("scattering matrix: {e}"));
                    None
                }
                None => None,
            };
            record.warnings.extend(r.warnings);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Runs every `(h, path)` combination of the sweep. Failures of single
/// points are recorded in the record, not propagated. Records are sorted by
/// `(h, eps1, eps2, path)`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<RunRecord>, ConfigError> {
    run_sweep_with(cfg, &SolverOptions::default())
}

pub fn run_sweep_with(cfg: &SweepConfig, opts: &SolverOptions) -> Result<Vec<RunRecord>, ConfigError> {
    cfg.validate()?;
    let quad = cfg.quad_options();
    let m = cfg
        .model
        .spec(cfg.h_grid.start, 0.0)
        .map_err(|e| ConfigError::Validation { field: "model".into(), message: e.to_string() })?
        .m();
    let hs = cfg.h_grid.values();
    let mut records: Vec<RunRecord> = hs
        .par_iter()
        .flat_map_iter(|&h| {
            let spec = cfg.model.spec(h, cfg.eps_rule.eps(h, m));
            let records: Vec<RunRecord> = match spec {
                Ok(spec) => {
                    let predictions = predictions_for(&spec, &cfg.fidelities, &quad);
                    cfg.paths.iter().map(|&path| run_point(&spec, path, predictions.clone(), opts, cfg.timing)).collect()
                }
                Err(e) => cfg.paths.iter().map(|&path| failed_record(h, path, &e)).collect(),
            };
            records
        })
        .collect();
    records.sort_by(|a, b| {
        a.h.total_cmp(&b.h)
            .then(a.eps1.total_cmp(&b.eps1))
            .then(a.eps2.total_cmp(&b.eps2))
            .then(a.path.cmp(&b.path))
    });
    Ok(records)
}

fn failed_record(h: f64, path: Path, e: &ModelError) -> RunRecord {
    RunRecord {
        h,
        eps1: f64::NAN,
        eps2: f64::NAN,
        m: 0,
        n1: 0,
        n2: 0,
        mu_m: f64::NAN,
        mu_mn: f64::NAN,
        regime: Regime::Coupled,
        path,
        t: None,
        predictions: Vec::new(),
        det_dev: f64::NAN,
        const_dev: f64::NAN,
        unit_dev: None,
        residual: f64::NAN,
        rep_t_deviation: None,
        wall_ms: None,
        error: Some(e.to_string()),
        warnings: Vec::new(),
    }
}

/// Column order of the CSV output.
pub const CSV_HEADER: [&str; 26] = [
    "h", "eps1", "eps2", "m", "n1", "n2", "mu_m", "regime", "path", "re_t11", "im_t11", "re_t12", "im_t12",
    "re_t21", "im_t21", "re_t22", "im_t22", "re_pred_t12", "im_pred_t12", "re_pred_t21", "im_pred_t21", "det_dev",
    "const_dev", "unit_dev", "residual", "wall_ms",
];

#[derive(Serialize)]
struct CsvRow<'a> {
    h: f64,
    eps1: f64,
    eps2: f64,
    m: usize,
    n1: usize,
    n2: usize,
    mu_m: f64,
    regime: &'a str,
    path: &'a str,
    re_t11: f64,
    im_t11: f64,
    re_t12: f64,
    im_t12: f64,
    re_t21: f64,
    im_t21: f64,
    re_t22: f64,
    im_t22: f64,
    re_pred_t12: f64,
    im_pred_t12: f64,
    re_pred_t21: f64,
    im_pred_t21: f64,
    det_dev: f64,
    const_dev: f64,
    unit_dev: f64,
    residual: f64,
    wall_ms: f64,
}

impl<'a> CsvRow<'a> {
    fn from_record(r: &'a RunRecord) -> Self {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        let t = r.t.unwrap_or([nan; 4]);
        let (p12, p21) = r
            .predictions
            .first()
            .map(|p| (p.t12.unwrap_or(nan), p.t21.unwrap_or(nan)))
            .unwrap_or((nan, nan));
        CsvRow {
            h: r.h,
            eps1: r.eps1,
            eps2: r.eps2,
            m: r.m,
            n1: r.n1,
            n2: r.n2,
            mu_m: r.mu_m,
            regime: r.regime.as_str(),
            path: r.path.as_str(),
            re_t11: t[0].re,
            im_t11: t[0].im,
            re_t12: t[1].re,
            im_t12: t[1].im,
            re_t21: t[2].re,
            im_t21: t[2].im,
            re_t22: t[3].re,
            im_t22: t[3].im,
            re_pred_t12: p12.re,
            im_pred_t12: p12.im,
            re_pred_t21: p21.re,
            im_pred_t21: p21.im,
            det_dev: r.det_dev,
            const_dev: r.const_dev,
            unit_dev: r.unit_dev.unwrap_or(f64::NAN),
            residual: r.residual,
            wall_ms: r.wall_ms.unwrap_or(0.0),
        }
    }
}

/// Writes the records as CSV. Missing values are written as `NaN`;
/// `wall_ms` is 0 when timing was off.
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in records {
        w.serialize(CsvRow::from_record(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(records: &[RunRecord], path: &std::path::Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(file))
}

/// Least-squares fit of `log err = slope log h + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the fit residuals.
    pub std_error: f64,
    /// Two standard errors.
    pub half_width: f64,
    pub points: usize,
}

impl ConvergenceFit {
    pub fn contains(&self, slope: f64, tol: f64) -> bool {
        (self.slope - slope).abs() <= tol
    }
}

/// Fits the convergence exponent of `err ~ C h^slope`. Pairs with
/// non-positive or non-finite entries are ignored; at least three must remain.
pub fn fit_convergence(pairs: &[(f64, f64)]) -> Result<ConvergenceFit, HarnessError> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(h, e)| *h > 0.0 && *e > 0.0 && h.is_finite() && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(HarnessError::InsufficientData { needed: 3, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::InsufficientData { needed: 3, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let std_error = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(ConvergenceFit { slope, intercept, std_error, half_width: 2.0 * std_error, points: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values_are_geometric_and_decreasing() {
        let g = HGrid { start: 1e-2, stop: 1e-4, points: 5 };
        let v = g.values();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 1e-2);
        assert_eq!(v[4], 1e-4);
        assert!((v[2] - 1e-3).abs() < 1e-15);
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn empty_or_increasing_grid_is_rejected() {
        assert!(HGrid { start: 1e-2, stop: 1e-3, points: 0 }.validate().is_err());
        assert!(HGrid { start: 1e-3, stop: 1e-2, points: 3 }.validate().is_err());
        assert!(HGrid { start: 2.0, stop: 1e-2, points: 3 }.validate().is_err());
        assert!(HGrid::single(1e-3).validate().is_ok());
    }

    #[test]
    fn fixed_mu_rule() {
        let e = EpsRule::FixedMu(0.05).eps(1e-3, 2);
        assert!((e - 5e-4).abs() < 1e-15);
        assert_eq!(EpsRule::PowerLaw { c: 1.0, a: 0.8 }.tail_regime(2), Some(Regime::NonCoupled));
        assert_eq!(EpsRule::PowerLaw { c: 1.0, a: 0.5 }.tail_regime(2), Some(Regime::Coupled));
    }

    #[test]
    fn exact_power_law_fit() {
        let pairs: Vec<(f64, f64)> = (0..6).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).map(|h| (h, h)).collect();
        let fit = fit_convergence(&pairs).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.std_error < 1e-12);
        let pairs: Vec<(f64, f64)> = pairs.iter().map(|&(h, _)| (h, 3.0 * h.cbrt())).collect();
        let fit = fit_convergence(&pairs).unwrap();
        assert!((fit.slope - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn fit_needs_three_points() {
        assert!(matches!(
            fit_convergence(&[(0.1, 0.1), (0.01, 0.0), (0.001, 0.001)]),
            Err(HarnessError::InsufficientData { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn empty_csv_has_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.trim_end(), CSV_HEADER.join(","));
    }
}
