//! Scenario files.
//!
//! A scenario is a TOML document (or the same structure in JSON) with dotted
//! sections. Unknown keys are rejected. Minimal example:
//!
//! ```toml
//! name = "fig3"
//! run = "simulate"
//!
//! [params]
//! phi = 1.0
//! nu = 0.9
//! sigma = 0.4
//! eta = 0.1
//! gamma = 1.4
//! tau = 2.0
//!
//! [growth]
//! kind = "logistic"
//! mu = 1.0
//! m = 1.0
//!
//! [enforcement]
//! kind = "constant"
//! value = 0.51
//!
//! [history]
//! kind = "constant"
//! n = 1.5
//! c = 1.5
//!
//! [integrator]
//! step = 0.01
//! t_end = 200.0
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crimedde::integrator::{IntegratorConfig, PositivityMode};
use crimedde::model::{GrowthFunction, HistoryFunction, LawEnforcement, ModelParams, StateVec};
use crimedde::periodic::PeriodicOptions;
use crimedde::stability::EquilibriumId;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Equilibria,
    Stability,
    Periodic,
    Sweep,
    Report,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Equilibria => "equilibria",
            Command::Stability => "stability",
            Command::Periodic => "periodic",
            Command::Sweep => "sweep",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub name: String,
    /// Command used by `crimedde run`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<Command>,
    pub params: ParamsConfig,
    #[serde(default)]
    pub growth: GrowthConfig,
    pub enforcement: EnforcementConfig,
    #[serde(default)]
    pub history: HistoryConfig,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub periodic: PeriodicSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub phi: f64,
    pub nu: f64,
    pub sigma: f64,
    pub eta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GrowthConfig {
    /// `f(N) = mu (m - N)`.
    Logistic { mu: f64, m: f64 },
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig::Logistic { mu: 1.0, m: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EnforcementConfig {
    Constant {
        value: f64,
    },
    /// `amplitude * sin(t / scale) + offset`.
    Sinusoid {
        amplitude: f64,
        scale: f64,
        offset: f64,
    },
    /// Piecewise linear and periodized; samples inline or from a `time,value`
    /// CSV file resolved against the scenario's directory.
    Tabulated {
        period: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        times: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum HistoryConfig {
    Constant { n: f64, c: f64 },
    Sampled { times: Vec<f64>, n: Vec<f64>, c: Vec<f64> },
}

impl Default for HistoryConfig {
    fn default() -> Self {
        HistoryConfig::Constant { n: 1.5, c: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub step: f64,
    pub t_end: f64,
    pub positivity: PositivityMode,
    pub max_norm: f64,
    /// Write every `stride`-th node.
    pub stride: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        IntegratorSection {
            step: 0.01,
            t_end: 100.0,
            positivity: PositivityMode::Clamp,
            max_norm: 1e12,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeriodicSection {
    pub transient: usize,
    pub max_iter: usize,
    pub step: f64,
    pub tol: f64,
    pub samples: usize,
    pub max_subharmonic: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

impl Default for PeriodicSection {
    fn default() -> Self {
        let d = PeriodicOptions::default();
        PeriodicSection {
            transient: d.transient_periods,
            max_iter: d.max_iter,
            step: d.step,
            tol: d.tol,
            samples: d.section_samples,
            max_subharmonic: d.max_subharmonic,
            period: d.period_override,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<AxisConfig>,
    #[serde(default = "all_equilibria")]
    pub equilibria: Vec<EquilibriumId>,
}

fn all_equilibria() -> Vec<EquilibriumId> {
    vec![EquilibriumId::Trivial, EquilibriumId::CriminalFree, EquilibriumId::Coexistence]
}

/// Either explicit `values` or `points` evenly spaced values in `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub format: Format,
}

/// A parsed scenario file together with its raw bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: Config,
    pub source: String,
    /// Where the text came from: a path, or `bundled:<name>`.
    pub origin: String,
    pub base_dir: PathBuf,
}

/// Scenarios shipped with the tool, addressable by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("fig1a", include_str!("../scenarios/fig1a.toml")),
    ("fig1b", include_str!("../scenarios/fig1b.toml")),
    ("fig3", include_str!("../scenarios/fig3.toml")),
    ("fig5_tau0", include_str!("../scenarios/fig5_tau0.toml")),
    ("fig5_tau2", include_str!("../scenarios/fig5_tau2.toml")),
    ("stability_map", include_str!("../scenarios/stability_map.toml")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parses TOML, or JSON when `json` is set; errors carry line and column.
pub fn parse(text: &str, json: bool) -> CliResult<Config> {
    if json {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid scenario: {e}")))
    } else {
        toml::from_str(text).map_err(|e| CliError::config(format!("invalid scenario: {e}")))
    }
}

/// Reads a scenario file, falling back to a bundled scenario of that name.
pub fn load(spec: &str) -> CliResult<LoadedConfig> {
    let path = Path::new(spec);
    if path.exists() {
        let source = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let config = parse(&source, json)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        return Ok(LoadedConfig {
            config,
            source,
            origin: spec.to_string(),
            base_dir,
        });
    }
    match bundled(spec) {
        Some(text) => Ok(LoadedConfig {
            config: parse(text, false)?,
            source: text.to_string(),
            origin: format!("bundled:{spec}"),
            base_dir: PathBuf::new(),
        }),
        None => Err(CliError::config(format!(
            "{spec}: no such file and no bundled scenario of that name"
        ))),
    }
}

impl Config {
    pub fn model_params(&self, base_dir: &Path) -> CliResult<ModelParams> {
        let growth = match self.growth {
            GrowthConfig::Logistic { mu, m } => GrowthFunction::logistic(mu, m)?,
        };
        let enforcement = match &self.enforcement {
            EnforcementConfig::Constant { value } => LawEnforcement::constant(*value)?,
            EnforcementConfig::Sinusoid {
                amplitude,
                scale,
                offset,
            } => LawEnforcement::sinusoid(*amplitude, *scale, *offset)?,
            EnforcementConfig::Tabulated {
                period,
                file,
                times,
                values,
            } => {
                let (times, values) = match file {
                    Some(f) => {
                        if !times.is_empty() || !values.is_empty() {
                            return Err(CliError::config(
                                "enforcement: give either `file` or `times`/`values`, not both",
                            ));
                        }
                        read_table(&base_dir.join(f))?
                    }
                    None => (times.clone(), values.clone()),
                };
                LawEnforcement::tabulated(times, values, *period)?
            }
        };
        let p = &self.params;
        Ok(ModelParams::new(
            p.phi,
            p.nu,
            p.sigma,
            p.eta,
            p.gamma,
            p.tau,
            growth,
            enforcement,
        )?)
    }

    pub fn history(&self, tau: f64) -> CliResult<HistoryFunction> {
        let h = match &self.history {
            HistoryConfig::Constant { n, c } => HistoryFunction::constant(*n, *c),
            HistoryConfig::Sampled { times, n, c } => {
                if n.len() != times.len() || c.len() != times.len() {
                    return Err(CliError::config("history: times, n and c must have equal length"));
                }
                HistoryFunction::Sampled {
                    times: times.clone(),
                    states: n.iter().zip(c).map(|(&n, &c)| StateVec::new(n, c)).collect(),
                }
            }
        };
        h.validate(tau, true)?;
        Ok(h)
    }

    pub fn integrator(&self) -> CliResult<IntegratorConfig> {
        let s = &self.integrator;
        let mut cfg = IntegratorConfig::new(s.step, s.t_end);
        cfg.positivity = s.positivity;
        cfg.max_norm = s.max_norm;
        cfg.validate()?;
        if s.stride == 0 {
            return Err(CliError::config("integrator.stride must be at least 1"));
        }
        Ok(cfg)
    }

    pub fn periodic_options(&self) -> CliResult<PeriodicOptions> {
        let s = &self.periodic;
        if !(s.tol > 0.0) || s.samples < 2 || s.max_subharmonic == 0 || !(s.step > 0.0) {
            return Err(CliError::config(
                "periodic: tol and step must be positive, samples >= 2, max_subharmonic >= 1",
            ));
        }
        Ok(PeriodicOptions {
            transient_periods: s.transient,
            max_iter: s.max_iter,
            step: s.step,
            tol: s.tol,
            section_samples: s.samples,
            period_override: s.period,
            max_subharmonic: s.max_subharmonic,
        })
    }
}

/// Two-column `time,value` CSV with an optional header line.
fn read_table(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(CliError::config(format!(
                "{}:{}: expected two comma-separated columns",
                path.display(),
                i + 1
            )));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(t), Ok(v)) => {
                times.push(t);
                values.push(v);
            }
            _ if i == 0 => {}
            _ => {
                return Err(CliError::config(format!(
                    "{}:{}: not a number",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok((times, values))
}
