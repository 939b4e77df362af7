//! Models by name, each with a small parameter table.

use std::collections::BTreeMap;
use std::str::FromStr;

use macrokin_core::models::{self, MarkMode};
use macrokin_core::network::{parse_network, ReactionNetwork};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MODELS: [&str; 10] = [
    "ehrenfest",
    "schlogl",
    "lotka_volterra",
    "wealth_days",
    "wealth_kinetic",
    "majority",
    "pagerank",
    "kac_ring",
    "yule",
    "monkey",
];

/// Five-vertex irreducible rate matrix used when no `rates` are given.
pub fn default_pagerank_rates() -> Vec<Vec<f64>> {
    let off = [
        [0.0, 1.0, 0.5, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.5, 0.0],
        [0.2, 0.0, 0.0, 1.0, 0.3],
        [0.0, 0.4, 0.0, 0.0, 1.0],
        [1.0, 0.0, 0.6, 0.0, 0.0],
    ];
    with_diagonal(off.iter().map(|r| r.to_vec()).collect())
}

fn with_diagonal(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for i in 0..rows.len() {
        let off: f64 = rows[i].iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x).sum();
        rows[i][i] = -off;
    }
    rows
}

/// `"a,b,c;d,e,f;..."`; diagonal entries are ignored and recomputed.
pub fn parse_rates(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let rows: Result<Vec<Vec<f64>>, _> = text
        .split(';')
        .map(|row| row.split(',').map(|x| x.trim().parse::<f64>()).collect())
        .collect();
    let rows = rows.map_err(|e| CliError::config(format!("pagerank rates {text:?}: {e}")))?;
    let k = rows.len();
    if rows.iter().any(|r| r.len() != k) {
        return Err(CliError::config(format!("pagerank rates {text:?} must form a square matrix")));
    }
    Ok(with_diagonal(rows))
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetKind {
    File,
    Ehrenfest { lambda: f64 },
    Schlogl,
    LotkaVolterra { mu3: f64, mu6: f64, k: f64 },
    WealthKinetic { s_bar: u64, s_max: u64 },
    PageRank { rates: Vec<Vec<f64>> },
}

#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub name: String,
    pub net: ReactionNetwork,
    pub n0: Vec<u64>,
    pub scale: u64,
    pub kind: NetKind,
}

#[derive(Debug, Clone)]
pub enum Model {
    Network(NetworkModel),
    WealthDays { agents: usize, s_bar: u64, days: u64 },
    Majority { n: u64, k0: u64, max_steps: u64 },
    KacRing { n: usize, mu: f64, p: f64, mode: MarkMode, steps: u64 },
    Yule { alpha: f64, days: u64 },
    Monkey { symbols: u32, length: u64 },
}

struct Params<'a> {
    model: &'a str,
    map: &'a BTreeMap<String, String>,
}

impl Params<'_> {
    fn allow(&self, keys: &[&str]) -> Result<(), CliError> {
        match self.map.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(CliError::config(format!(
                "model {} has no parameter {k:?}; known: {}",
                self.model,
                if keys.is_empty() { "none".to_string() } else { keys.join(", ") }
            ))),
            None => Ok(()),
        }
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            Some(v) => v
                .parse()
                .map_err(|e| CliError::config(format!("parameter {key}={v:?} for model {}: {e}", self.model))),
            None => Ok(default),
        }
    }
}

fn model_err(e: models::ModelError) -> CliError {
    CliError::config(e)
}

/// Builds the model named in `cfg`, or the network file it points to.
pub fn build(cfg: &RunConfig) -> Result<Model, CliError> {
    if let (Some(path), Some(text)) = (&cfg.network, &cfg.network_text) {
        let net = parse_network(text).map_err(|e| CliError::file(path, e))?;
        let n0 = cfg
            .n0
            .clone()
            .ok_or_else(|| CliError::config("a network file needs an initial state (--n0)"))?;
        net.check_state(n0.len()).map_err(CliError::config)?;
        let scale = cfg.n.unwrap_or_else(|| n0.iter().sum::<u64>().max(1));
        return Ok(Model::Network(NetworkModel {
            name: path.display().to_string(),
            net,
            n0,
            scale,
            kind: NetKind::File,
        }));
    }
    let Some(name) = cfg.model.as_deref() else {
        return Err(CliError::config("give --network FILE or --model NAME"));
    };
    let p = Params {
        model: name,
        map: &cfg.params,
    };
    let network = |net: ReactionNetwork, n0: Vec<u64>, scale: u64, kind: NetKind| -> Result<Model, CliError> {
        let n0 = match &cfg.n0 {
            Some(v) => {
                net.check_state(v.len()).map_err(CliError::config)?;
                v.clone()
            }
            None => n0,
        };
        Ok(Model::Network(NetworkModel {
            name: name.to_string(),
            net,
            n0,
            scale,
            kind,
        }))
    };
    match name {
        "ehrenfest" => {
            p.allow(&["lambda"])?;
            let lambda = p.get("lambda", 1.0)?;
            let n = cfg.n.unwrap_or(100);
            let (net, n0) = models::ehrenfest(n, lambda).map_err(model_err)?;
            network(net, n0, n, NetKind::Ehrenfest { lambda })
        }
        "schlogl" => {
            p.allow(&["x0"])?;
            let x0 = p.get("x0", 0.0)?;
            let n = cfg.n.unwrap_or(10_000);
            if n < 3 {
                return Err(CliError::config("schlogl needs N >= 3"));
            }
            network(models::schlogl_network(), vec![models::schlogl_start(n, x0)], n, NetKind::Schlogl)
        }
        "lotka_volterra" => {
            p.allow(&["mu3", "mu6", "k"])?;
            let (mu3, mu6, k) = (p.get("mu3", 1.0)?, p.get("mu6", 1.0)?, p.get("k", 1.0)?);
            let n = cfg.n.unwrap_or(100);
            let (net, n0) = models::lotka_volterra(mu3, mu6, k, n).map_err(model_err)?;
            network(net, n0, n, NetKind::LotkaVolterra { mu3, mu6, k })
        }
        "wealth_kinetic" => {
            p.allow(&["s_bar", "s_max", "lambda"])?;
            let s_bar = p.get("s_bar", 5u64)?;
            let s_max = p.get("s_max", 10 * s_bar)?;
            let lambda = p.get("lambda", 1.0)?;
            let n = cfg.n.unwrap_or(1000);
            let (net, n0) = models::wealth_exchange_kinetic(n, s_bar, s_max, lambda).map_err(model_err)?;
            network(net, n0, n, NetKind::WealthKinetic { s_bar, s_max })
        }
        "pagerank" => {
            p.allow(&["rates"])?;
            let rates = match cfg.params.get("rates") {
                Some(t) => parse_rates(t)?,
                None => default_pagerank_rates(),
            };
            let n = cfg.n.unwrap_or(10_000);
            let (net, n0) = models::pagerank_surfers(&rates, n).map_err(model_err)?;
            network(net, n0, n, NetKind::PageRank { rates })
        }
        "wealth_days" => {
            p.allow(&["s_bar", "days"])?;
            let agents = cfg.n.unwrap_or(1000) as usize;
            let s_bar = p.get("s_bar", 5u64)?;
            models::wealth_exchange_days(agents, s_bar).map_err(model_err)?;
            Ok(Model::WealthDays {
                agents,
                s_bar,
                days: p.get("days", 1000u64)?,
            })
        }
        "majority" => {
            p.allow(&["k0", "max_steps"])?;
            let n = cfg.n.unwrap_or(9);
            let k0 = p.get("k0", (2 * n).div_ceil(3))?;
            models::majority_exact(n, k0).map_err(model_err)?;
            Ok(Model::Majority {
                n,
                k0,
                max_steps: p.get("max_steps", 1_000_000u64)?,
            })
        }
        "kac_ring" => {
            p.allow(&["mu", "p", "mode", "steps"])?;
            let mode = match p.get("mode", "fixed_count".to_string())?.as_str() {
                "fixed_count" => MarkMode::FixedCount,
                "iid_bernoulli" => MarkMode::IidBernoulli,
                other => {
                    return Err(CliError::config(format!(
                        "kac_ring mode {other:?}; expected fixed_count or iid_bernoulli"
                    )))
                }
            };
            let n = cfg.n.unwrap_or(1000) as usize;
            let (mu, prob) = (p.get("mu", 0.1)?, p.get("p", 0.0)?);
            models::kac_ring_new(n, mu, prob, mode, 0).map_err(model_err)?;
            Ok(Model::KacRing {
                n,
                mu,
                p: prob,
                mode,
                steps: p.get("steps", 20u64)?,
            })
        }
        "yule" => {
            p.allow(&["alpha", "days"])?;
            let alpha = p.get("alpha", 0.0)?;
            models::yule_new(alpha).map_err(model_err)?;
            Ok(Model::Yule {
                alpha,
                days: p.get("days", 100_000u64)?,
            })
        }
        "monkey" => {
            p.allow(&["symbols", "length"])?;
            let symbols = p.get("symbols", 4u32)?;
            let length = p.get("length", 1_000_000u64)?;
            models::zipf_mandelbrot_params(symbols).map_err(model_err)?;
            if !(2..=26).contains(&symbols) || length == 0 {
                return Err(CliError::config("monkey needs 2 <= symbols <= 26 and length >= 1"));
            }
            Ok(Model::Monkey { symbols, length })
        }
        other => Err(CliError::config(format!(
            "unknown model {other:?}; known models: {}",
            MODELS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Layer;

    fn cfg(model: &str, params: &[(&str, &str)]) -> RunConfig {
        let layer = Layer {
            model: Some(model.to_string()),
            params: params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            ..Layer::default()
        };
        RunConfig::resolve("simulate", None, layer, None).unwrap()
    }

    #[test]
    fn every_registered_model_builds_with_defaults() {
        for name in MODELS {
            build(&cfg(name, &[])).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_model_and_parameter_are_rejected() {
        assert!(build(&cfg("nope", &[])).unwrap_err().to_string().contains("ehrenfest"));
        assert!(build(&cfg("ehrenfest", &[("mu", "1")])).is_err());
        assert!(build(&cfg("ehrenfest", &[("lambda", "x")])).is_err());
    }

    #[test]
    fn rates_are_parsed_with_generator_diagonal() {
        let r = parse_rates("0,1;2,0").unwrap();
        assert_eq!(r, vec![vec![-1.0, 1.0], vec![2.0, -2.0]]);
        assert!(parse_rates("0,1;2").is_err());
        let d = default_pagerank_rates();
        assert!(d.iter().all(|row| row.iter().sum::<f64>().abs() < 1e-12));
    }
}
