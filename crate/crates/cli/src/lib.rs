//! Command-line front end: subcommands `solve`, `sweep`, `verify`,
//! `predict` and `dsp`.

pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use crossing_core::error::{ConfigError, Error, HarnessError};
use crossing_core::harness::{run_sweep, verify_suite, write_csv, write_csv_file, VerifyConfig};
use crossing_core::model::{classify_regime, SystemSpec};
use crossing_core::oscquad::{integrate_adaptive, omega_tilde, OscIntegrand, QuadOptions};
use crossing_core::poly::Poly;
use crossing_core::presets::Preset;
use crossing_core::solver::{
    coupling_symmetry, predicted_t, scattering_for, transfer_matrix, Fidelity, SolverOptions,
};
use crossing_core::statphase::{dsp_expansion, omega_m, omega_tilde0, EtaConvention};
use num_complex::Complex64;

use config::{emit_config, parse_config, CliConfig, FidelityChoice, PathChoice};

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\ntarget: ",
    env!("CROSSING_BUILD_TARGET"),
    "\nprofile: ",
    env!("CROSSING_BUILD_PROFILE"),
    "\nrustc: ",
    env!("CROSSING_BUILD_RUSTC"),
);

#[derive(Debug, Parser)]
#[command(name = "crossing", version, long_version = LONG_VERSION, about = "Transfer matrices at degenerate two-level crossings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one point: prints T_ex, S, predictions and deviations.
    Solve(RunArgs),
    /// Run a sweep and write CSV records.
    Sweep(RunArgs),
    /// Run the invariant suite; exit status 0 iff every check passes.
    Verify(RunArgs),
    /// Asymptotic predictions only, without solving.
    Predict(RunArgs),
    /// Degenerate stationary phase against quadrature for a user phase.
    Dsp(DspArgs),
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Preset model (lz-linear, tangent-m2, tangent-m3, vanishing-coupling,
    /// nonhermitian, tangent-m2-reversed); `verify` also accepts `all`.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Semiclassical parameter h.
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    /// Coupling strength sqrt(eps1 eps2) (default: mu_{m,n} = 0.05).
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Coupling eps1 of the upper-right entry.
    #[arg(long, allow_negative_numbers = true)]
    pub eps1: Option<f64>,
    /// Coupling eps2 of the lower-left entry.
    #[arg(long, allow_negative_numbers = true)]
    pub eps2: Option<f64>,
    /// Output file (CSV for `sweep`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Construction path of the exact bases.
    #[arg(long, value_enum)]
    pub path: Option<PathChoice>,
    /// Predictor fidelity.
    #[arg(long, value_enum)]
    pub fidelity: Option<FidelityChoice>,
    /// Quadrature tolerance; for `verify`, a factor applied to every tolerance.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Print the resolved configuration with all defaults and exit.
    #[arg(long)]
    pub show_config: bool,
}

#[derive(Debug, Args)]
pub struct DspArgs {
    /// Phase polynomial coefficients c0,c1,... (phase = sum c_k x^k).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub phase: Vec<f64>,
    /// Amplitude polynomial coefficients (multiplied by the default cutoff).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
    pub amplitude: Vec<f64>,
    /// Number of expansion terms.
    #[arg(long, default_value_t = 2)]
    pub terms: usize,
    /// Semiclassical parameter h.
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Relative tolerance of the quadrature.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

/// Failure of a command, with a short machine-readable kind.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into() }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind, "message": self.message }).to_string()
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let kind = match e {
            ConfigError::Parse { .. } => "parse",
            ConfigError::Validation { .. } => "validation",
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Model(_) => "model",
            Error::Quad(_) => "quadrature",
            Error::Phase(_) => "phase",
            Error::Solver(_) => "solver",
            Error::Config(_) => "validation",
            Error::Harness(_) => "harness",
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::new("harness", e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}

fn err<E: Into<Error>>(e: E) -> CliError {
    CliError::from(e.into())
}

/// Runs a parsed command line; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve(a) => {
            set_threads(a.threads)?;
            solve(&a, out)
        }
        Command::Sweep(a) => {
            set_threads(a.threads)?;
            sweep(&a, out)
        }
        Command::Verify(a) => {
            set_threads(a.threads)?;
            verify(&a, out)
        }
        Command::Predict(a) => predict(&a, out),
        Command::Dsp(a) => dsp(&a, out),
    }
}

fn set_threads(threads: Option<usize>) -> Result<(), CliError> {
    match threads {
        None => Ok(()),
        Some(0) => Err(CliError::new("validation", "invalid value for `threads`: must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::new("threads", e.to_string())),
    }
}

/// File configuration (if any) with the flags applied on top.
pub fn resolve_config(a: &RunArgs) -> Result<CliConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::new("io", format!("{}: {e}", p.display())))?;
            parse_config(&text)?
        }
        None => CliConfig::default(),
    };
    if let Some(p) = &a.preset {
        let preset: Preset = p.parse().map_err(|m: String| CliError::new("validation", m))?;
        cfg.preset = Some(preset);
        cfg.model = None;
    }
    if let Some(h) = a.h {
        cfg.h = h;
    }
    if a.eps.is_some() {
        cfg.eps = a.eps;
        cfg.eps1 = None;
        cfg.eps2 = None;
    }
    if a.eps1.is_some() {
        cfg.eps1 = a.eps1;
    }
    if a.eps2.is_some() {
        cfg.eps2 = a.eps2;
    }
    if let Some(p) = a.path {
        cfg.path = p;
    }
    if let Some(f) = a.fidelity {
        cfg.fidelity = f;
    }
    if let Some(t) = a.tol {
        cfg.tol = t;
    }
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    let cfg = cfg.with_defaults();
    cfg.validate()?;
    Ok(cfg)
}

fn show_config(cfg: &CliConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let mut shown = cfg.clone();
    if let Ok(spec) = cfg.spec() {
        shown.eps = None;
        shown.eps1 = Some(spec.eps1());
        shown.eps2 = Some(spec.eps2());
    }
    writeln!(out, "{}", emit_config(&shown))?;
    Ok(())
}

fn c(z: Complex64) -> String {
    format!("{:+.9e} {:+.9e}i", z.re, z.im)
}

fn describe(spec: &SystemSpec, name: &str, out: &mut dyn Write) -> std::io::Result<()> {
    let p = spec.scale_params();
    writeln!(
        out,
        "system   {name}  m={} n1={} n2={}  h={:.4e}  eps1={:.4e}  eps2={:.4e}",
        spec.m(),
        spec.n1(),
        spec.n2(),
        spec.h(),
        spec.eps1(),
        spec.eps2()
    )?;
    writeln!(
        out,
        "scales   mu_m={:.4e}  mu_mn={:.4e}  mu1={:.4e}  regime={}",
        p.mu_m,
        p.mu_mn,
        p.mu1_tilde,
        classify_regime(spec).as_str()
    )
}

fn system_name(cfg: &CliConfig) -> String {
    match cfg.preset {
        Some(p) if cfg.model.is_none() => p.name().to_string(),
        _ => "custom".to_string(),
    }
}

fn quad_options(cfg: &CliConfig) -> QuadOptions {
    QuadOptions::with_tol(cfg.tol)
}

fn solve(a: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_config(a)?;
    if a.show_config {
        show_config(&cfg, out)?;
        return Ok(0);
    }
    let spec = cfg.spec().map_err(err)?;
    describe(&spec, &system_name(&cfg), out)?;
    let fidelity: Fidelity = cfg.fidelity.into();
    let prediction = predicted_t(&spec, fidelity, &quad_options(&cfg));
    let opts = SolverOptions::default();
    let mut reference = None;
    for path in cfg.path.paths() {
        let r = transfer_matrix(&spec, path, &opts).map_err(err)?;
        let t = &r.matrix;
        writeln!(out, "\nT_ex [{}]", path.as_str())?;
        writeln!(out, "  t11 = {}", c(t.t11()))?;
        writeln!(out, "  t12 = {}", c(t.t12()))?;
        writeln!(out, "  t21 = {}", c(t.t21()))?;
        writeln!(out, "  t22 = {}", c(t.t22()))?;
        writeln!(out, "  det deviation       {:.3e}", t.det_deviation)?;
        writeln!(out, "  constancy deviation {:.3e}", t.constancy_deviation)?;
        writeln!(out, "  residual            {:.3e}", r.residual)?;
        if let Some(d) = r.rep_t_deviation {
            writeln!(out, "  rep-T deviation     {d:.3e}")?;
        }
        for w in &r.warnings {
            writeln!(out, "  warning: {w}")?;
        }
        if let Ok(p) = &prediction {
            for (name, ex, pr) in [("t12", t.t12(), p.matrix.t12()), ("t21", t.t21(), p.matrix.t21())] {
                if pr.norm() > 0.0 {
                    writeln!(out, "  {name} relative deviation from prediction {:.3e}", (ex - pr).norm() / pr.norm())?;
                }
            }
        }
        reference.get_or_insert(r);
    }
    if let Some(r) = &reference {
        match (coupling_symmetry(&spec), scattering_for(&spec, &r.matrix)) {
            (Some(conv), Some(Ok(s))) => {
                let rescaled = if spec.eps1() != spec.eps2() { ", rescaled bases" } else { "" };
                writeln!(out, "\nS [{conv:?}{rescaled}]")?;
                writeln!(out, "  s11 = {}", c(s.t11()))?;
                writeln!(out, "  s12 = {}", c(s.t12()))?;
                writeln!(out, "  s21 = {}", c(s.t21()))?;
                writeln!(out, "  s22 = {}", c(s.t22()))?;
                writeln!(out, "  unitarity deviation {:.3e}", s.unitarity_deviation())?;
            }
            (_, Some(Err(e))) => writeln!(out, "\nS unavailable: {e}")?,
            _ => writeln!(out, "\nS unavailable: couplings have no Hermitian structure")?,
        }
    }
    match prediction {
        Ok(p) => {
            writeln!(out, "\nprediction [{}]", fidelity.as_str())?;
            writeln!(out, "  t12 = {}", c(p.matrix.t12()))?;
            writeln!(out, "  t21 = {}", c(p.matrix.t21()))?;
            writeln!(out, "  error scale mu_mn^2 {:.3e}", p.error_scale)?;
            writeln!(out, "  diagonal envelopes  {:.3e} {:.3e}", p.diagonal_envelopes.0, p.diagonal_envelopes.1)?;
        }
        Err(e) => writeln!(out, "\nprediction unavailable: {e}")?,
    }
    Ok(0)
}

fn sweep(a: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_config(a)?;
    if a.show_config {
        show_config(&cfg, out)?;
        return Ok(0);
    }
    let sweep = cfg.to_sweep()?;
    for note in sweep.validate()? {
        eprintln!("note: {note}");
    }
    let records = run_sweep(&sweep)?;
    for r in &records {
        if let Some(e) = &r.error {
            eprintln!("{}", CliError::new("point", format!("h={:e} path={}: {e}", r.h, r.path.as_str())).to_json());
        }
    }
    match &sweep.output {
        Some(p) => {
            write_csv_file(&records, p)?;
            writeln!(out, "wrote {} records to {}", records.len(), p.display())?;
        }
        None => write_csv(&records, &mut *out)?,
    }
    Ok(if records.iter().all(|r| r.error.is_none()) { 0 } else { 1 })
}

fn verify(a: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let presets = match a.preset.as_deref() {
        None | Some("all") => Preset::ALL.to_vec(),
        Some(name) => vec![name.parse().map_err(|m: String| CliError::new("validation", m))?],
    };
    let mut cfg = VerifyConfig { presets, ..VerifyConfig::default() };
    if let Some(h) = a.h {
        if !(h > 0.0 && h < 1.0) {
            return Err(CliError::new("validation", format!("invalid value for `h`: {h} is not in (0, 1)")));
        }
        cfg.h_values = vec![h];
    }
    cfg.eps = a.eps;
    if let Some(t) = a.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::new("validation", format!("invalid value for `tol`: {t}")));
        }
        cfg.tol_scale = t;
    }
    if a.show_config {
        writeln!(out, "{cfg:#?}")?;
        return Ok(0);
    }
    let report = verify_suite(&cfg);
    writeln!(out, "{report}")?;
    Ok(if report.passed() { 0 } else { 1 })
}

fn predict(a: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_config(a)?;
    if a.show_config {
        show_config(&cfg, out)?;
        return Ok(0);
    }
    let spec = cfg.spec().map_err(err)?;
    describe(&spec, &system_name(&cfg), out)?;
    let quad = quad_options(&cfg);
    let gap = spec.gap();
    let (m, h) = (spec.m(), spec.h());
    for (label, n, w, q) in [("12", spec.n1(), spec.u1(), gap.clone()), ("21", spec.n2(), spec.u2(), gap.scale(-1.0))] {
        let closed = omega_tilde0(m, n, w, &q, EtaConvention::Leading).map_err(err)?;
        let numeric = omega_tilde(m, n, w, &q, h, &spec.cutoff(), &quad).map_err(err)?;
        writeln!(out, "omega_tilde{label}(h)   = {}  (error {:.1e})", c(numeric.value), numeric.error)?;
        let odd = if m * n % 2 == 1 { "  [times h^(1/(m+1))]" } else { "" };
        writeln!(out, "omega_tilde0_{label}    = {}{odd}", c(closed))?;
    }
    if m >= 2 {
        let w = omega_m(h, spec.v1(), spec.v2()).map_err(err)?;
        writeln!(
            out,
            "omega_{m} leading term = {}  (modulus {:.9}, argument {:.6} pi)",
            c(w),
            w.norm(),
            w.arg() / std::f64::consts::PI
        )?;
    }
    let fidelity: Fidelity = cfg.fidelity.into();
    match predicted_t(&spec, fidelity, &quad) {
        Ok(p) => {
            writeln!(out, "predicted T [{}]", fidelity.as_str())?;
            writeln!(out, "  t12 = {}", c(p.matrix.t12()))?;
            writeln!(out, "  t21 = {}", c(p.matrix.t21()))?;
            writeln!(out, "  error scale mu_mn^2 {:.3e}", p.error_scale)?;
            writeln!(out, "  diagonal envelopes  {:.3e} {:.3e}", p.diagonal_envelopes.0, p.diagonal_envelopes.1)?;
            Ok(0)
        }
        Err(e) => Err(err(e)),
    }
}

fn dsp(a: &DspArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if !(a.h > 0.0 && a.h.is_finite()) {
        return Err(CliError::new("validation", format!("invalid value for `h`: {}", a.h)));
    }
    if a.terms == 0 {
        return Err(CliError::new("validation", "invalid value for `terms`: must be at least 1"));
    }
    let phase = Poly::new(a.phase.clone());
    let amplitude = Poly::new(a.amplitude.clone());
    let cutoff = crossing_core::cutoff::CutoffSpec::default();
    let expansion = dsp_expansion(&amplitude, &phase, (-cutoff.r2, cutoff.r2), a.terms).map_err(err)?;
    let integrand = OscIntegrand::new(
        |x: f64| Complex64::new(cutoff.eval(x) * amplitude.eval(x), 0.0),
        phase.clone(),
        a.h,
        -cutoff.r2,
        cutoff.r2,
    );
    let quad = integrate_adaptive(&integrand, &QuadOptions::with_tol(a.tol)).map_err(err)?;
    writeln!(out, "phase order k = {}, sign {:+}", expansion.k, expansion.sign)?;
    for t in &expansion.terms {
        writeln!(out, "  term l={}: {} h^{:.6}", t.l, c(t.coefficient), t.h_power)?;
    }
    let value = expansion.eval(a.h);
    writeln!(out, "expansion  = {}", c(value))?;
    writeln!(out, "quadrature = {}  (error {:.1e}, {} panels)", c(quad.value), quad.error, quad.panels)?;
    writeln!(
        out,
        "difference = {:.3e}  (remainder order h^{:.6})",
        (value - quad.value).norm(),
        expansion.remainder_exponent
    )?;
    Ok(0)
}

/// Entry point shared by the binary: parses `argv`, runs, reports errors as
/// one JSON line on stderr.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("{}", e.to_json());
            1
        }
    }
}
