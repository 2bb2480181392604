//! Run configuration: TOML with flat sections and no unknown keys.
//!
//! ```toml
//! scenario = "amplitude"
//!
//! [model]
//! beta = 1.0
//! eta = 0.5
//!
//! [state]
//! parity = "sup"
//! ```

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use wgqed::{GeneralInitialState, ModelParams, Parity};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{key}: {reason}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Amplitude,
    Intensity,
    Cooperativity,
    NonMarkovianity,
    Entropy,
    CriticalScan,
    RateScan,
    Validate,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Amplitude => "amplitude",
            Scenario::Intensity => "intensity",
            Scenario::Cooperativity => "cooperativity",
            Scenario::NonMarkovianity => "non_markovianity",
            Scenario::Entropy => "entropy",
            Scenario::CriticalScan => "critical_scan",
            Scenario::RateScan => "rate_scan",
            Scenario::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityChoice {
    Sup,
    Sub,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BranchSum,
    Series,
    Dde,
    #[default]
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapMode {
    #[default]
    Envelope,
    FullFringe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub beta: f64,
    pub eta: f64,
    #[serde(default = "one_u32")]
    pub winding: u32,
    #[serde(default = "one_f64")]
    pub gamma: f64,
}

fn one_u32() -> u32 {
    1
}

fn one_f64() -> f64 {
    1.0
}

/// Either a parity choice or `(theta, phi)` for
/// `cos(theta)|S> + e^{i phi} sin(theta)|A>`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<ParityChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

/// Unset entries take scenario defaults, listed in the README.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_independent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity_mode: Option<MapMode>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dde_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    #[serde(default = "default_quadrature")]
    pub quadrature: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_theta_samples")]
    pub theta_samples: usize,
    #[serde(default = "default_oracle")]
    pub oracle: f64,
}

fn default_quadrature() -> f64 {
    1e-5
}

fn default_cutoff() -> f64 {
    50.0
}

fn default_points() -> usize {
    20001
}

fn default_theta_samples() -> usize {
    11
}

fn default_oracle() -> f64 {
    1e-6
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection {
            quadrature: default_quadrature(),
            cutoff: default_cutoff(),
            points: default_points(),
            theta_samples: default_theta_samples(),
            oracle: default_oracle(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub model: ModelSection,
    #[serde(default)]
    pub state: StateSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
}

/// Initial state resolved from a [`StateSection`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateChoice {
    Parities(&'static [Parity]),
    General(GeneralInitialState),
}

impl RunConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            gamma: self.model.gamma,
            beta: self.model.beta,
            eta: self.model.eta,
            winding: self.model.winding,
        }
    }

    pub fn state(&self) -> StateChoice {
        match (self.state.theta, self.state.parity) {
            (Some(theta), _) => {
                StateChoice::General(GeneralInitialState::new(theta, self.state.phi.unwrap_or(0.0)).expect("validated"))
            }
            (None, Some(ParityChoice::Sub)) => StateChoice::Parities(&[Parity::Sub]),
            (None, Some(ParityChoice::Both)) => StateChoice::Parities(&Parity::BOTH),
            (None, _) => StateChoice::Parities(&[Parity::Sup]),
        }
    }

    /// Range and consistency checks; the message names the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        if !(0.0..=1.0).contains(&m.beta) {
            return Err(bad("model.beta", format!("must lie in [0, 1], got {}", m.beta)));
        }
        if !(m.eta.is_finite() && m.eta >= 0.0) {
            return Err(bad("model.eta", format!("must be finite and >= 0, got {}", m.eta)));
        }
        if !(m.gamma.is_finite() && m.gamma > 0.0) {
            return Err(bad("model.gamma", format!("must be positive, got {}", m.gamma)));
        }
        if m.winding == 0 {
            return Err(bad("model.winding", "must be at least 1"));
        }
        let s = &self.state;
        if let Some(theta) = s.theta {
            if s.parity.is_some() {
                return Err(bad("state.parity", "cannot be combined with state.theta"));
            }
            if !(0.0..=FRAC_PI_2).contains(&theta) {
                return Err(bad("state.theta", format!("must lie in [0, pi/2], got {theta}")));
            }
        } else if s.phi.is_some() {
            return Err(bad("state.phi", "needs state.theta"));
        }
        if let Some(phi) = s.phi {
            if !(0.0..2.0 * PI).contains(&phi) {
                return Err(bad("state.phi", format!("must lie in [0, 2 pi), got {phi}")));
            }
        }
        let g = &self.grid;
        positive("grid.tau_max", g.tau_max)?;
        positive("grid.detuning_max", g.detuning_max)?;
        at_least("grid.tau_points", g.tau_points, 2)?;
        at_least("grid.xi_points", g.xi_points, 2)?;
        at_least("grid.detuning_points", g.detuning_points, 2)?;
        for (key, v) in [("grid.xi_min", g.xi_min), ("grid.xi_max", g.xi_max)] {
            if v.is_some_and(|x| !x.is_finite()) {
                return Err(bad(key, "must be finite"));
            }
        }
        if let (Some(lo), Some(hi)) = (g.xi_min, g.xi_max) {
            if !(lo < hi) {
                return Err(bad("grid.xi_max", format!("must exceed grid.xi_min ({lo}), got {hi}")));
            }
        }
        if let Some(etas) = &g.etas {
            ascending("grid.etas", etas, |x| x.is_finite() && x >= 0.0, "finite and >= 0")?;
        }
        if let Some(betas) = &g.betas {
            ascending("grid.betas", betas, |x| (0.0..=1.0).contains(&x), "in [0, 1]")?;
        }
        positive("solver.dde_step", self.solver.dde_step)?;
        let t = &self.tolerances;
        positive("tolerances.quadrature", Some(t.quadrature))?;
        positive("tolerances.cutoff", Some(t.cutoff))?;
        positive("tolerances.oracle", Some(t.oracle))?;
        at_least("tolerances.points", Some(t.points), 3)?;
        if t.points.is_multiple_of(2) {
            return Err(bad("tolerances.points", format!("must be odd, got {}", t.points)));
        }
        at_least("tolerances.theta_samples", Some(t.theta_samples), 2)?;
        Ok(())
    }
}

fn positive(key: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(bad(key, format!("must be finite and positive, got {x}"))),
        _ => Ok(()),
    }
}

fn at_least(key: &str, v: Option<usize>, min: usize) -> Result<(), ConfigError> {
    match v {
        Some(n) if n < min => Err(bad(key, format!("must be at least {min}, got {n}"))),
        _ => Ok(()),
    }
}

fn ascending(key: &str, values: &[f64], ok: impl Fn(f64) -> bool, what: &str) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(bad(key, "must not be empty"));
    }
    if let Some(x) = values.iter().find(|&&x| !ok(x)) {
        return Err(bad(key, format!("entries must be {what}, got {x}")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad(key, "must be strictly ascending"));
    }
    Ok(())
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_with_overrides(text, &[])
}

/// Like [`parse_config`], with `section.key=value` overrides applied to the
/// document first. Values parse as TOML, falling back to a bare string.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let owned;
    let text = if overrides.is_empty() {
        text
    } else {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError(e.to_string().trim().to_string()))?;
        for item in overrides {
            apply_override(&mut doc, item)?;
        }
        owned = toml::to_string(&doc).expect("table serializes");
        &owned
    };
    let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim().to_string()))?;
    config.validate()?;
    Ok(config)
}

fn apply_override(doc: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("--set {item}: expected key=value")))?;
    let key = key.trim();
    let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("single key"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let mut path: Vec<&str> = key.split('.').collect();
    let last = path.pop().filter(|k| !k.is_empty()).ok_or_else(|| bad(key, "empty key"))?;
    let mut table = doc;
    for part in path {
        table = table
            .entry(part)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| bad(key, format!("{part} is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// Canonical TOML text; `parse_config(&render(c)) == c`.
pub fn render(config: &RunConfig) -> String {
    toml::to_string(config).expect("config serializes")
}
