use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Verify,
    Flow,
    Jacobian,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Oprl,
    Opuc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKindArg {
    Toda,
    Schur,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compare {
    Exact,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub kind: FlowKindArg,
    /// OPRL: `c_0, c_1, ...` with `f'(x)/2 = sum c_j x^j`. OPUC: pairs
    /// `re, im` of `b_0, b_1, ...`.
    #[serde(default)]
    pub coeffs: Vec<f64>,
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_compare")]
    pub compare: Compare,
}

fn default_t() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_compare() -> Compare {
    Compare::Exact
}
fn default_grid() -> usize {
    8
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { kind: FlowKindArg::Toda, coeffs: Vec::new(), t: default_t(), dt: default_dt(), compare: default_compare() }
    }
}

/// Everything a run depends on. Serialized back into the report as
/// `config_echo`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default)]
    pub seed: u64,
    /// N for verify, jacobian and flow; the period p for periodic.
    pub sizes: Vec<usize>,
    /// Replaces every default tolerance.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Per-identity overrides, applied on top of `tolerance`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Side of the square (z, w) grid.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub flow: Option<FlowConfig>,
    /// JSON report path (CSV trajectory path for `flow`).
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Family of the run; flows take it from the kind unless custom.
    pub fn family(&self) -> Result<Family, ConfigError> {
        if self.command == Command::Flow {
            match self.flow.as_ref().map(|f| f.kind) {
                Some(FlowKindArg::Toda) => return Ok(Family::Oprl),
                Some(FlowKindArg::Schur) => return Ok(Family::Opuc),
                _ => {}
            }
        }
        self.family.ok_or_else(|| ConfigError("--family is required".into()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sizes.is_empty() {
            return bad("no sizes given");
        }
        let family = self.family()?;
        if let (Some(f), Command::Flow) = (self.family, self.command) {
            if f != family {
                return bad("--family contradicts the flow kind");
            }
        }
        let min = match self.command {
            Command::Periodic => 1,
            _ => 2,
        };
        if let Some(&n) = self.sizes.iter().find(|&&n| n < min) {
            return bad(format!("size {n} is below the minimum {min}"));
        }
        if self.command == Command::Periodic && family == Family::Opuc {
            if let Some(&p) = self.sizes.iter().find(|&&p| p % 2 != 0) {
                return bad(format!("periodic OPUC needs even periods, got {p}"));
            }
        }
        let tols = self.tolerance.iter().chain(self.tolerances.values());
        if let Some(t) = tols.copied().find(|t| !(*t > 0.0 && t.is_finite())) {
            return bad(format!("tolerance {t} is not positive"));
        }
        if self.grid == 0 {
            return bad("grid must be positive");
        }
        if self.command == Command::Flow {
            let Some(f) = &self.flow else { return bad("flow settings missing") };
            if !(f.dt > 0.0 && f.dt.is_finite()) {
                return bad(format!("dt = {} must be positive", f.dt));
            }
            if !(f.t >= 0.0 && f.t.is_finite()) {
                return bad(format!("t = {} must be non-negative", f.t));
            }
            if f.kind == FlowKindArg::Custom {
                if f.coeffs.is_empty() {
                    return bad("custom flows need --coeffs");
                }
                if family == Family::Opuc && f.coeffs.len() % 2 != 0 {
                    return bad("OPUC coefficients come as re,im pairs");
                }
            }
        }
        Ok(())
    }
}

/// `"2..6"` (inclusive), `"3"`, or `"2,4,6"`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>, ConfigError> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| ConfigError(format!("bad size '{t}'")));
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
        if lo > hi {
            return bad(format!("empty range {s}"));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(num).collect()
}

pub fn parse_coeffs(s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| ConfigError(format!("bad coefficient '{t}'"))))
        .collect()
}
