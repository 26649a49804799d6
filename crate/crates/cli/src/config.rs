//! JSON run configuration.

use std::path::PathBuf;

use crossing_core::error::ConfigError;
use crossing_core::harness::{EpsRule, HGrid, ModelSource, SweepConfig};
use crossing_core::model::{build_system, SystemInputs, SystemSpec};
use crossing_core::presets::Preset;
use crossing_core::solver::{Fidelity, Path};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_H: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    Series,
    Ode,
    Both,
}

impl PathChoice {
    pub fn paths(self) -> Vec<Path> {
        match self {
            PathChoice::Series => vec![Path::NeumannSeries],
            PathChoice::Ode => vec![Path::DirectOde],
            PathChoice::Both => vec![Path::NeumannSeries, Path::DirectOde],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FidelityChoice {
    Closed,
    Integral,
}

impl From<FidelityChoice> for Fidelity {
    fn from(f: FidelityChoice) -> Self {
        match f {
            FidelityChoice::Closed => Fidelity::LeadingClosed,
            FidelityChoice::Integral => Fidelity::OscIntegral,
        }
    }
}

/// Sweep section of the configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub h_grid: HGrid,
    pub eps_rule: EpsRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<Path>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelities: Option<Vec<Fidelity>>,
    #[serde(default)]
    pub timing: bool,
}

/// A complete run configuration. Either `preset` or `model` names the
/// system; `h` and the couplings override the model's own values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<SystemInputs>,
    #[serde(default = "default_h")]
    pub h: f64,
    /// Geometric-mean coupling `sqrt(eps1 eps2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
    #[serde(default = "default_path")]
    pub path: PathChoice,
    #[serde(default = "default_fidelity")]
    pub fidelity: FidelityChoice,
    /// Relative tolerance of the oscillatory quadrature.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn default_h() -> f64 {
    DEFAULT_H
}

fn default_path() -> PathChoice {
    PathChoice::Both
}

fn default_fidelity() -> FidelityChoice {
    FidelityChoice::Integral
}

fn default_tol() -> f64 {
    1e-8
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            preset: Some(Preset::TangentM2),
            model: None,
            h: DEFAULT_H,
            eps: None,
            eps1: None,
            eps2: None,
            path: default_path(),
            fidelity: default_fidelity(),
            tol: default_tol(),
            threads: None,
            out: None,
            sweep: None,
        }
    }
}

const TOP_KEYS: &[&str] =
    &["preset", "model", "h", "eps", "eps1", "eps2", "path", "fidelity", "tol", "threads", "out", "sweep"];
const SWEEP_KEYS: &[&str] = &["h_grid", "eps_rule", "paths", "fidelities", "timing"];
const MODEL_KEYS: &[&str] = &["v1", "v2", "u1", "u2", "eps1", "eps2", "h", "interval", "cutoff"];

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { field: field.into(), message: message.into() }
}

fn check_keys(value: &Value, known: &[&str], prefix: &str) -> Result<(), ConfigError> {
    let Some(map) = value.as_object() else { return Ok(()) };
    for key in map.keys() {
        if !known.contains(&key.as_str()) {
            let best = known
                .iter()
                .map(|k| (strsim::jaro_winkler(key, k), *k))
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .filter(|(score, _)| *score >= 0.8)
                .map(|(_, k)| format!("; did you mean `{k}`?"))
                .unwrap_or_default();
            return Err(invalid(&format!("{prefix}{key}"), format!("unknown key{best}")));
        }
    }
    Ok(())
}

/// Parses and validates a JSON configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<CliConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if !value.is_object() {
        return Err(ConfigError::Parse { line: 1, column: 1, message: "expected a JSON object".into() });
    }
    check_keys(&value, TOP_KEYS, "")?;
    if let Some(s) = value.get("sweep") {
        check_keys(s, SWEEP_KEYS, "sweep.")?;
    }
    if let Some(m) = value.get("model") {
        check_keys(m, MODEL_KEYS, "model.")?;
    }
    let cfg: CliConfig = serde_json::from_value(value).map_err(|e| {
        let message = e.to_string();
        let field = message
            .split('`')
            .nth(1)
            .filter(|f| TOP_KEYS.contains(f) || SWEEP_KEYS.contains(f))
            .unwrap_or("config")
            .to_string();
        ConfigError::Validation { field, message }
    })?;
    let cfg = cfg.with_defaults();
    cfg.validate()?;
    Ok(cfg)
}

/// Pretty JSON of the configuration; `parse_config(&emit_config(c)) == c`.
pub fn emit_config(cfg: &CliConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("configuration serializes")
}

impl CliConfig {
    pub fn with_defaults(mut self) -> Self {
        if self.preset.is_none() && self.model.is_none() {
            self.preset = Some(Preset::TangentM2);
        }
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.preset.is_some() && self.model.is_some() {
            return Err(invalid("model", "give either `preset` or `model`, not both"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid("h", format!("must be positive and finite (got {})", self.h)));
        }
        for (field, v) in [("eps", self.eps), ("eps1", self.eps1), ("eps2", self.eps2)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(invalid(field, format!("must be non-negative and finite (got {v})")));
                }
            }
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(invalid("tol", format!("must lie in (0, 1) (got {})", self.tol)));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        if let Some(s) = &self.sweep {
            self.sweep_config(s)?.validate()?;
        }
        self.spec().map_err(|e| invalid(if self.model.is_some() { "model" } else { "preset" }, e.to_string()))?;
        Ok(())
    }

    /// The system at the configured `h` and couplings.
    pub fn spec(&self) -> Result<SystemSpec, crossing_core::error::ModelError> {
        match (&self.model, self.preset) {
            (Some(inputs), _) => {
                let mut inputs = inputs.clone();
                inputs.h = self.h;
                if let Some(e) = self.eps {
                    inputs.eps1 = e;
                    inputs.eps2 = e;
                }
                if let Some(e) = self.eps1 {
                    inputs.eps1 = e;
                }
                if let Some(e) = self.eps2 {
                    inputs.eps2 = e;
                }
                build_system(inputs)
            }
            (None, preset) => {
                let preset = preset.unwrap_or(Preset::TangentM2);
                if self.eps1.is_none() && self.eps2.is_none() {
                    return preset.spec(self.h, self.eps);
                }
                let base = preset.spec(self.h, self.eps)?;
                preset.spec_with(self.h, self.eps1.unwrap_or(base.eps1()), self.eps2.unwrap_or(base.eps2()))
            }
        }
    }

    fn model_source(&self) -> ModelSource {
        match &self.model {
            Some(inputs) => ModelSource::Explicit(inputs.clone()),
            None => ModelSource::Preset(self.preset.unwrap_or(Preset::TangentM2)),
        }
    }

    fn sweep_config(&self, s: &SweepSection) -> Result<SweepConfig, ConfigError> {
        let mut cfg = SweepConfig::new(self.model_source(), s.h_grid.clone(), s.eps_rule.clone());
        cfg.paths = s.paths.clone().unwrap_or_else(|| self.path.paths());
        cfg.fidelities = s.fidelities.clone().unwrap_or_else(|| vec![self.fidelity.into()]);
        cfg.quad_tol = Some(self.tol);
        cfg.timing = s.timing;
        cfg.output = self.out.clone();
        Ok(cfg)
    }

    /// The sweep to run: the `sweep` section, or the single configured point.
    pub fn to_sweep(&self) -> Result<SweepConfig, ConfigError> {
        match &self.sweep {
            Some(s) => self.sweep_config(s),
            None => {
                let spec = self.spec().map_err(|e| invalid("preset", e.to_string()))?;
                let eps = (spec.eps1() * spec.eps2()).sqrt();
                let mut cfg = self.sweep_config(&SweepSection {
                    h_grid: HGrid::single(self.h),
                    eps_rule: EpsRule::Fixed(eps),
                    paths: None,
                    fidelities: None,
                    timing: false,
                })?;
                if let Some(inputs) = &self.model {
                    let mut inputs = inputs.clone();
                    inputs.eps1 = spec.eps1();
                    inputs.eps2 = spec.eps2();
                    cfg.model = ModelSource::Explicit(inputs);
                }
                Ok(cfg)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_preset_document() {
        let cfg = parse_config(r#"{"preset":"tangent-m2","h":1e-3,"eps":5e-4}"#).unwrap();
        assert_eq!(cfg.preset, Some(Preset::TangentM2));
        assert_eq!(cfg.h, 1e-3);
        assert_eq!(cfg.eps, Some(5e-4));
        assert_eq!(cfg.path, PathChoice::Both);
        let spec = cfg.spec().unwrap();
        assert_eq!(spec.eps1(), 5e-4);
    }

    #[test]
    fn negative_h_names_the_field() {
        match parse_config(r#"{"preset":"tangent-m2","h":-1e-3}"#) {
            Err(ConfigError::Validation { field, .. }) => assert_eq!(field, "h"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        match parse_config(r#"{"preset":"tangent-m2","epsilonn":1e-3}"#) {
            Err(ConfigError::Validation { field, message }) => {
                assert_eq!(field, "epsilonn");
                assert!(message.contains("did you mean `eps"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_config("{\n  \"h\": 1e-3,\n  oops\n}") {
            Err(ConfigError::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn emit_then_parse_is_identity() {
        let text = r#"{"preset":"nonhermitian","h":1e-2,"eps1":2e-3,"path":"ode","fidelity":"closed",
            "sweep":{"h_grid":{"start":1e-2,"stop":1e-3,"points":3},"eps_rule":{"fixed_mu":0.05}}}"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
        let d = CliConfig::default();
        assert_eq!(parse_config(&emit_config(&d)).unwrap(), d);
    }

    #[test]
    fn empty_h_grid_is_rejected() {
        let text = r#"{"sweep":{"h_grid":{"start":1e-2,"stop":1e-3,"points":0},"eps_rule":{"fixed":1e-4}}}"#;
        match parse_config(text) {
            Err(ConfigError::Validation { field, .. }) => assert_eq!(field, "h_grid.points"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
