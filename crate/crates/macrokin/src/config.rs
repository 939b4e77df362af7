//! Run configuration: command-line flags over a TOML file over defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use macrokin_core::equilibrium::DEFAULT_MAX_STATES;
use macrokin_core::ssa::IntensityConvention;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[default]
    Kurtz,
    PaperLiteral,
}

impl From<Convention> for IntensityConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Kurtz => IntensityConvention::Kurtz,
            Convention::PaperLiteral => IntensityConvention::PaperLiteral,
        }
    }
}

/// One source of settings. Every field is optional so layers can be stacked.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Layer {
    pub network: Option<PathBuf>,
    pub model: Option<String>,
    #[serde(default, deserialize_with = "params_from_toml")]
    pub params: BTreeMap<String, String>,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub horizon: Option<f64>,
    pub sample_dt: Option<f64>,
    pub replicas: Option<u64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub max_events: Option<u64>,
    pub max_states: Option<usize>,
    pub intensity_convention: Option<Convention>,
    pub n0: Option<Vec<u64>>,
    pub c0: Option<Vec<f64>>,
    pub step: Option<f64>,
}

fn params_from_toml<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BTreeMap<String, String>, D::Error> {
    let raw = BTreeMap::<String, toml::Value>::deserialize(d)?;
    raw.into_iter()
        .map(|(k, v)| {
            let s = match v {
                toml::Value::String(s) => s,
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => f.to_string(),
                toml::Value::Boolean(b) => b.to_string(),
                other => return Err(serde::de::Error::custom(format!("parameter {k} has unsupported value {other}"))),
            };
            Ok((k, s))
        })
        .collect()
}

impl Layer {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
        let mut layer: Layer = toml::from_str(&text).map_err(|e| CliError::file(path, e.message()))?;
        // Relative file references are taken relative to the config file.
        if let (Some(net), Some(dir)) = (&layer.network, path.parent()) {
            if net.is_relative() {
                layer.network = Some(dir.join(net));
            }
        }
        Ok(layer)
    }

    /// `self` wins over `lower`; params are merged key by key.
    pub fn over(self, lower: Layer) -> Layer {
        let mut params = lower.params;
        params.extend(self.params);
        Layer {
            network: self.network.or(lower.network),
            model: self.model.or(lower.model),
            params,
            n: self.n.or(lower.n),
            horizon: self.horizon.or(lower.horizon),
            sample_dt: self.sample_dt.or(lower.sample_dt),
            replicas: self.replicas.or(lower.replicas),
            seed: self.seed.or(lower.seed),
            output: self.output.or(lower.output),
            format: self.format.or(lower.format),
            max_events: self.max_events.or(lower.max_events),
            max_states: self.max_states.or(lower.max_states),
            intensity_convention: self.intensity_convention.or(lower.intensity_convention),
            n0: self.n0.or(lower.n0),
            c0: self.c0.or(lower.c0),
            step: self.step.or(lower.step),
        }
    }
}

pub const DEFAULT_HORIZON: f64 = 10.0;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_OUTPUT: &str = "macrokin-out";

/// Fully resolved settings. The serialized form (output directory and
/// thread count excluded) is what the provenance hash covers.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub suite: Option<String>,
    pub network: Option<PathBuf>,
    pub network_sha256: Option<String>,
    #[serde(skip)]
    pub network_text: Option<String>,
    pub model: Option<String>,
    pub params: BTreeMap<String, String>,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub horizon: f64,
    pub sample_dt: f64,
    pub replicas: u64,
    pub seed: u64,
    #[serde(skip)]
    pub output: PathBuf,
    pub format: Format,
    pub max_events: Option<u64>,
    pub max_states: usize,
    pub intensity_convention: Convention,
    pub n0: Option<Vec<u64>>,
    pub c0: Option<Vec<f64>>,
    pub step: f64,
}

impl RunConfig {
    pub fn resolve(command: &str, suite: Option<String>, flags: Layer, file: Option<&Path>) -> Result<Self, CliError> {
        let layer = match file {
            Some(path) => flags.over(Layer::load(path)?),
            None => flags,
        };
        let horizon = layer.horizon.unwrap_or(DEFAULT_HORIZON);
        let sample_dt = layer.sample_dt.unwrap_or(horizon / 100.0);
        let step = layer.step.unwrap_or(DEFAULT_STEP);
        let network_text = match &layer.network {
            Some(p) => Some(fs::read_to_string(p).map_err(|e| CliError::file(p, e))?),
            None => None,
        };
        let cfg = RunConfig {
            command: command.to_string(),
            suite,
            network_sha256: network_text.as_deref().map(|t| sha256_hex(t.as_bytes())),
            network: layer.network,
            network_text,
            model: layer.model,
            params: layer.params,
            n: layer.n,
            horizon,
            sample_dt,
            replicas: layer.replicas.unwrap_or(1),
            seed: layer.seed.unwrap_or(0),
            output: layer.output.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)),
            format: layer.format.unwrap_or_default(),
            max_events: layer.max_events,
            max_states: layer.max_states.unwrap_or(DEFAULT_MAX_STATES),
            intensity_convention: layer.intensity_convention.unwrap_or_default(),
            n0: layer.n0,
            c0: layer.c0,
            step,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(CliError::config(format!("horizon must be positive and finite, got {}", self.horizon)));
        }
        if !(self.sample_dt > 0.0 && self.sample_dt <= self.horizon) {
            return Err(CliError::config(format!("sample-dt must lie in (0, horizon], got {}", self.sample_dt)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::config(format!("step must be positive and finite, got {}", self.step)));
        }
        if self.replicas == 0 {
            return Err(CliError::config("replicas must be at least 1"));
        }
        if self.max_events == Some(0) {
            return Err(CliError::config("max-events must be at least 1"));
        }
        if self.n == Some(0) {
            return Err(CliError::config("N must be at least 1"));
        }
        if self.network.is_some() && self.model.is_some() {
            return Err(CliError::config("give either --network or --model, not both"));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Splits `k=v` pairs.
pub fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    pairs
        .iter()
        .map(|p| match p.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
            _ => Err(CliError::config(format!("parameter {p:?} is not of the form key=value"))),
        })
        .collect()
}
