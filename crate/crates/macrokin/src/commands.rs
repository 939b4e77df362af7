//! The four subcommands. Each resolves its model, runs, and writes its files
//! under the output directory.

use std::path::PathBuf;

use macrokin_core::equilibrium::{
    check_detailed_balance, entropy_project, exact_chain_with, solve_unitarity, EquilibriumError, ProjectionResult,
    UnitarityResult,
};
use macrokin_core::meanfield::{integrate, lv_first_integral, lyapunov_kl, ConcVector, OdeConfig};
use macrokin_core::models::{self, RankEntry};
use macrokin_core::network::{conservation_laws, ConservationBasis, ReactionNetwork};
use macrokin_core::rng::{split, SplitMix64};
use macrokin_core::ssa::{simulate, SimConfig, Trajectory};
use macrokin_core::stats::{
    fit_exponential, fit_power_law_histogram, fit_power_law_ranks, l2_concentration, mean_and_se, two_urn_threshold,
    variance, ExpFitOptions, FitReport, PowerFitOptions,
};
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::io::{json_doc, num, write_atomic, Provenance, Table};
use crate::parallel::try_par_map;
use crate::registry::{build, Model, NetKind, NetworkModel};
use crate::verify;

/// Largest chain solved exactly; the stationary solve is dense.
pub const DENSE_STATE_LIMIT: usize = 5000;

/// Exit code when a verification check fails.
pub const EXIT_CHECK_FAILED: i32 = 3;

struct Out<'a> {
    cfg: &'a RunConfig,
    prov: Provenance,
    written: Vec<PathBuf>,
}

impl<'a> Out<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Self {
            cfg,
            prov: Provenance::new(cfg.hash()),
            written: Vec::new(),
        }
    }

    fn ext(&self) -> &'static str {
        match self.cfg.format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    fn table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        let path = self.cfg.output.join(format!("{stem}.{}", self.ext()));
        write_atomic(&path, table.render(&self.prov, self.cfg.format).as_bytes())?;
        self.written.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, body: Value) -> Result<(), CliError> {
        let path = self.cfg.output.join(name);
        write_atomic(&path, json_doc(&self.prov, body).as_bytes())?;
        self.written.push(path);
        Ok(())
    }

    fn report(&self) {
        for p in &self.written {
            println!("wrote {}", p.display());
        }
    }
}

fn rt(e: impl std::fmt::Display) -> CliError {
    CliError::runtime(e)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn fit_json(f: &FitReport) -> Value {
    json!({
        "model": f.model.name(),
        "parameter": num(f.parameter),
        "intercept": num(f.intercept),
        "fit_range": [num(f.fit_range.0), num(f.fit_range.1)],
        "log_residual_rms": num(f.residual),
        "points": f.points,
    })
}

fn fit_comment(f: &FitReport) -> String {
    let name = match f.model {
        macrokin_core::stats::FitModel::Exponential => "rate",
        macrokin_core::stats::FitModel::PowerLaw => "exponent",
    };
    format!(
        "fit model={} parameter={name} value={} intercept={} range={}..{} points={}",
        f.model.name(),
        f.parameter,
        f.intercept,
        f.fit_range.0,
        f.fit_range.1,
        f.points
    )
}

fn config_json(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn network_model(cfg: &RunConfig) -> Result<NetworkModel, CliError> {
    match build(cfg)? {
        Model::Network(m) => Ok(m),
        _ => Err(CliError::config(format!(
            "{} needs a reaction network; model {} is not one",
            cfg.command,
            cfg.model.as_deref().unwrap_or("?")
        ))),
    }
}

/// Right-hand sides `<mu_k, n0> / N` of the conservation laws.
fn slice_values(basis: &ConservationBasis, n0: &[u64], scale: u64) -> Vec<f64> {
    basis
        .vectors
        .iter()
        .map(|m| m.iter().zip(n0).map(|(&k, &n)| k as f64 * n as f64).sum::<f64>() / scale as f64)
        .collect()
}

fn unitarity_and_projection(
    net: &ReactionNetwork,
    n0: &[u64],
    scale: u64,
) -> Result<(UnitarityResult, ConservationBasis, Vec<f64>, Result<ProjectionResult, EquilibriumError>), CliError> {
    let xi = solve_unitarity(net, None, 1e-10).map_err(rt)?;
    let basis = conservation_laws(net);
    let b = slice_values(&basis, n0, scale);
    let proj = if xi.feasible {
        entropy_project(&xi.xi, &basis, &b)
    } else {
        Err(EquilibriumError::Invalid("unitarity infeasible"))
    };
    Ok((xi, basis, b, proj))
}

pub fn simulate_cmd(cfg: &RunConfig) -> Result<i32, CliError> {
    let mut out = Out::new(cfg);
    let result = match build(cfg)? {
        Model::Network(m) => simulate_network(cfg, &m, &mut out),
        Model::WealthDays { agents, s_bar, days } => simulate_wealth_days(cfg, agents, s_bar, days, &mut out),
        Model::Majority { n, k0, max_steps } => simulate_majority(cfg, n, k0, max_steps, &mut out),
        Model::KacRing { n, mu, p, mode, steps } => simulate_kac(cfg, n, mu, p, mode, steps, &mut out),
        Model::Yule { alpha, days } => simulate_yule(cfg, alpha, days, &mut out),
        Model::Monkey { symbols, length } => simulate_monkey(cfg, symbols, length, &mut out),
    };
    out.report();
    result.map(|_| 0)
}

fn simulate_network(cfg: &RunConfig, m: &NetworkModel, out: &mut Out) -> Result<(), CliError> {
    let base = SimConfig {
        seed: cfg.seed,
        horizon: cfg.horizon,
        sample_dt: cfg.sample_dt,
        max_events: cfg.max_events.unwrap_or(u64::MAX),
        convention: cfg.intensity_convention.into(),
    };
    base.validate().map_err(CliError::config)?;
    let dedicated = m.kind == NetKind::Schlogl && cfg.intensity_convention == crate::config::Convention::Kurtz;
    let trajs: Vec<Trajectory> = try_par_map(cfg.replicas, |r| -> Result<Trajectory, CliError> {
        let c = SimConfig {
            seed: split(cfg.seed, r),
            ..base.clone()
        };
        if dedicated {
            models::schlogl_simulate(m.scale, m.n0[0], &c).map_err(rt)
        } else {
            simulate(&m.net, &m.n0, m.scale, &c).map_err(rt)
        }
    })?;
    let names = m.net.species().names();
    let nf = m.scale as f64;

    if cfg.replicas == 1 {
        let mut t = Table::new(std::iter::once("t".to_string()).chain(names.iter().cloned()));
        for (time, c) in trajs[0].samples() {
            t.rows.push(std::iter::once(json!(time)).chain(c.iter().map(|&x| json!(x))).collect());
        }
        out.table("trajectory", &t)?;
    } else {
        let mut header = vec!["replica", "seed", "jumps", "truncated", "absorbed_at", "end_time"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        header.extend(names.iter().cloned());
        let mut ens = Table::new(header);
        for (r, tr) in trajs.iter().enumerate() {
            let mut row = vec![
                json!(r),
                json!(tr.seed),
                json!(tr.jump_count),
                json!(tr.truncated),
                tr.absorbed_at.map_or(Value::Null, |a| json!(a)),
                json!(tr.end_time()),
            ];
            row.extend(tr.terminal().iter().map(|&x| json!(x)));
            ens.rows.push(row);
        }
        out.table("ensemble", &ens)?;
    }

    let complete: Vec<&Trajectory> = trajs.iter().filter(|t| !t.truncated).collect();
    if cfg.replicas > 1 && !complete.is_empty() {
        let mut mean = Table::new(std::iter::once("t".to_string()).chain(names.iter().cloned()));
        mean.comments.push(format!(
            "mean concentration n/N over {} complete replicas",
            complete.len()
        ));
        for k in 0..complete[0].len() {
            let time = complete[0].sample(k).0;
            let mut row = vec![json!(time)];
            for s in 0..names.len() {
                let v = complete.iter().map(|t| t.sample(k).1[s] as f64).sum::<f64>() / (complete.len() as f64 * nf);
                row.push(num(v));
            }
            mean.rows.push(row);
        }
        out.table("mean", &mean)?;
    }

    let truncated = trajs.iter().filter(|t| t.truncated).count();
    let absorbed = trajs.iter().filter(|t| t.absorbed_at.is_some()).count();
    let terminals: Vec<&[u64]> = complete.iter().map(|t| t.terminal()).collect();
    let terminal_mean: Vec<f64> = (0..names.len())
        .map(|s| terminals.iter().map(|t| t[s] as f64).sum::<f64>() / (terminals.len().max(1) as f64 * nf))
        .collect();
    let mut summary = json!({
        "command": "simulate",
        "config": config_json(cfg),
        "model": m.name,
        "species": names,
        "scale": m.scale,
        "n0": m.n0,
        "replicas": cfg.replicas,
        "truncated_replicas": truncated,
        "absorbed_replicas": absorbed,
        "total_jumps": trajs.iter().map(|t| t.jump_count).sum::<u64>(),
        "terminal_mean_concentration": nums(&terminal_mean),
    });
    if matches!(m.kind, NetKind::File | NetKind::Ehrenfest { .. } | NetKind::WealthKinetic { .. } | NetKind::PageRank { .. }) {
        let (xi, _, _, proj) = unitarity_and_projection(&m.net, &m.n0, m.scale)?;
        summary["unitarity"] = json!({ "feasible": xi.feasible, "xi": nums(&xi.xi), "residual": num(xi.residual) });
        if let Ok(p) = proj {
            summary["c_star"] = nums(&p.c_star);
            if !terminals.is_empty() {
                let rep = l2_concentration(&terminals, m.scale, &p.c_star, 0.01).map_err(rt)?;
                summary["concentration"] = json!({
                    "sigma": 0.01,
                    "threshold": num(rep.threshold),
                    "violations": rep.violations,
                    "replicas": rep.replicas,
                    "max_distance": num(rep.max_distance),
                    "pass": rep.pass,
                });
            }
        }
    }
    if let NetKind::Ehrenfest { .. } = m.kind {
        if !terminals.is_empty() {
            let radius = two_urn_threshold(m.scale);
            let inside = terminals
                .iter()
                .filter(|t| (t[0] as f64 - t[1] as f64).abs() / nf <= radius)
                .count() as f64
                / terminals.len() as f64;
            summary["two_urn"] = json!({ "radius": num(radius), "fraction_within": num(inside), "pass": inside >= 0.99 });
        }
    }
    if m.kind == NetKind::Schlogl && !terminals.is_empty() {
        let x: Vec<f64> = terminals
            .iter()
            .map(|t| nf.powf(0.25) * (t[0] as f64 / nf - 1.0))
            .collect();
        summary["schlogl"] = json!({
            "scaled_time": num(cfg.horizon / nf.sqrt()),
            "x_mean": num(x.iter().sum::<f64>() / x.len() as f64),
            "x_variance": if x.len() > 1 { num(variance(&x)) } else { Value::Null },
        });
    }
    out.json("summary.json", summary)?;
    if truncated as u64 == cfg.replicas {
        return Err(CliError::AllTruncated { replicas: cfg.replicas });
    }
    Ok(())
}

fn histogram_table(hist: &[f64], fit: Option<&FitReport>) -> Table {
    let mut t = Table::new(["s", "count", "fitted"]);
    if let Some(f) = fit {
        t.comments.push(fit_comment(f));
    }
    for (s, &c) in hist.iter().enumerate() {
        let fitted = fit.map_or(Value::Null, |f| match f.model {
            macrokin_core::stats::FitModel::Exponential => num((f.intercept - f.parameter * s as f64).exp()),
            macrokin_core::stats::FitModel::PowerLaw if s > 0 => {
                num((f.intercept - f.parameter * (s as f64).ln()).exp())
            }
            _ => Value::Null,
        });
        t.rows.push(vec![json!(s), num(c), fitted]);
    }
    t
}

fn mean_histogram(parts: &[Vec<u64>]) -> Vec<f64> {
    let len = parts.iter().map(Vec::len).max().unwrap_or(0);
    let mut h = vec![0.0; len];
    for p in parts {
        for (a, &c) in h.iter_mut().zip(p) {
            *a += c as f64;
        }
    }
    h.iter().map(|x| x / parts.len() as f64).collect()
}

fn simulate_wealth_days(cfg: &RunConfig, agents: usize, s_bar: u64, days: u64, out: &mut Out) -> Result<(), CliError> {
    let hists = try_par_map(cfg.replicas, |r| -> Result<Vec<u64>, CliError> {
        let mut state = models::wealth_exchange_days(agents, s_bar).map_err(rt)?;
        let mut rng = SplitMix64::new(split(cfg.seed, r));
        for _ in 0..days {
            models::wealth_day_step(&mut state, &mut rng);
        }
        Ok(models::wealth_histogram(&state.coins))
    })?;
    let h = mean_histogram(&hists);
    let fit = fit_exponential(&h, &ExpFitOptions::default()).ok();
    out.table("histogram", &histogram_table(&h, fit.as_ref()))?;
    out.json(
        "summary.json",
        json!({
            "command": "simulate",
            "config": config_json(cfg),
            "model": "wealth_days",
            "agents": agents,
            "s_bar": s_bar,
            "days": days,
            "exchanges": days * (agents as u64 / 2),
            "fit": fit.as_ref().map_or(Value::Null, fit_json),
        }),
    )
}

fn simulate_majority(cfg: &RunConfig, n: u64, k0: u64, max_steps: u64, out: &mut Out) -> Result<(), CliError> {
    let runs = try_par_map(cfg.replicas, |r| {
        let mut rng = SplitMix64::new(split(cfg.seed, r));
        models::majority_run(n, k0, max_steps, &mut rng)
    })
    .map_err(rt)?;
    let mut t = Table::new(["replica", "final_plus", "steps", "consensus"]);
    for (r, run) in runs.iter().enumerate() {
        t.rows.push(vec![json!(r), json!(run.final_plus), json!(run.steps), json!(run.consensus)]);
    }
    out.table("runs", &t)?;
    let oracle = models::majority_exact(n, k0).map_err(rt)?;
    let steps: Vec<f64> = runs.iter().map(|r| r.steps as f64).collect();
    let (m, se) = mean_and_se(&steps);
    let plus = runs.iter().filter(|r| r.final_plus == n).count() as f64 / runs.len() as f64;
    let consensus = runs.iter().filter(|r| r.consensus).count();
    out.json(
        "summary.json",
        json!({
            "command": "simulate",
            "config": config_json(cfg),
            "model": "majority",
            "N": n,
            "k0": k0,
            "runs": runs.len(),
            "consensus_runs": consensus,
            "p_plus": num(plus),
            "mean_steps": num(m),
            "mean_steps_se": num(se),
            "exact": { "p_plus": num(oracle.p_plus), "mean_steps": num(oracle.mean_steps) },
        }),
    )?;
    if consensus == 0 {
        return Err(CliError::AllTruncated { replicas: cfg.replicas });
    }
    Ok(())
}

fn simulate_kac(
    cfg: &RunConfig,
    n: usize,
    mu: f64,
    p: f64,
    mode: models::MarkMode,
    steps: u64,
    out: &mut Out,
) -> Result<(), CliError> {
    let series = try_par_map(cfg.replicas, |r| -> Result<Vec<f64>, CliError> {
        let mut s = models::kac_ring_new(n, mu, p, mode, split(cfg.seed, r)).map_err(rt)?;
        let mut v = vec![models::kac_ring_stat(&s)];
        for _ in 0..steps {
            models::kac_ring_step(&mut s);
            v.push(models::kac_ring_stat(&s));
        }
        Ok(v)
    })?;
    let mut t = Table::new(["t", "mean", "variance", "factor", "variance_factor"]);
    t.comments.push(format!(
        "kac ring n={n} mu={mu} p={p} replicas={}; factor = (1-2mu)^t (1-2p)^t, variance_factor = factor^2 / n",
        cfg.replicas
    ));
    for k in 0..=steps as usize {
        let xs: Vec<f64> = series.iter().map(|s| s[k]).collect();
        let factor = ((1.0 - 2.0 * mu) * (1.0 - 2.0 * p)).powi(k as i32);
        let var = if xs.len() > 1 { num(variance(&xs)) } else { Value::Null };
        t.rows.push(vec![
            json!(k),
            num(xs.iter().sum::<f64>() / xs.len() as f64),
            var,
            num(factor),
            num(factor * factor / n as f64),
        ]);
    }
    out.table("kac", &t)?;
    out.json(
        "summary.json",
        json!({ "command": "simulate", "config": config_json(cfg), "model": "kac_ring", "n": n, "mu": mu, "p": p, "steps": steps }),
    )
}

fn simulate_yule(cfg: &RunConfig, alpha: f64, days: u64, out: &mut Out) -> Result<(), CliError> {
    let hists = try_par_map(cfg.replicas, |r| models::yule_run(alpha, days, split(cfg.seed, r))).map_err(rt)?;
    let h = mean_histogram(&hists);
    let counts: Vec<u64> = h.iter().map(|x| x.round() as u64).collect();
    let fit = fit_power_law_histogram(&counts, &PowerFitOptions::default()).ok();
    out.table("histogram", &histogram_table(&h, fit.as_ref()))?;
    out.json(
        "summary.json",
        json!({
            "command": "simulate",
            "config": config_json(cfg),
            "model": "yule",
            "alpha": alpha,
            "days": days,
            "predicted_exponent": num(3.0 + alpha / (1.0 - alpha)),
            "fit": fit.as_ref().map_or(Value::Null, fit_json),
        }),
    )
}

fn simulate_monkey(cfg: &RunConfig, symbols: u32, length: u64, out: &mut Out) -> Result<(), CliError> {
    let tables = try_par_map(cfg.replicas, |r| models::monkey_text(symbols, length, split(cfg.seed, r))).map_err(rt)?;
    let entries: Vec<RankEntry> = if tables.len() == 1 {
        tables.into_iter().next().unwrap()
    } else {
        let mut merged = std::collections::BTreeMap::<String, u64>::new();
        for e in tables.into_iter().flatten() {
            *merged.entry(e.word).or_insert(0) += e.count;
        }
        let mut v: Vec<(String, u64)> = merged.into_iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1));
        v.into_iter()
            .enumerate()
            .map(|(i, (word, count))| RankEntry {
                rank: i as u64 + 1,
                word,
                count,
            })
            .collect()
    };
    let counts: Vec<u64> = entries.iter().map(|e| e.count).collect();
    let fit = fit_power_law_ranks(&counts, &crate::verify::RANK_FIT).ok();
    let mut t = Table::new(["rank", "word", "count"]);
    if let Some(f) = &fit {
        t.comments.push(fit_comment(f));
    }
    for e in &entries {
        t.rows.push(vec![json!(e.rank), json!(e.word), json!(e.count)]);
    }
    out.table("rank_frequency", &t)?;
    let (a, b, c) = models::zipf_mandelbrot_params(symbols).map_err(rt)?;
    out.json(
        "summary.json",
        json!({
            "command": "simulate",
            "config": config_json(cfg),
            "model": "monkey",
            "symbols": symbols,
            "length": length,
            "distinct_words": entries.len(),
            "zipf_mandelbrot": { "alpha": num(a), "B": num(b), "C": num(c) },
            "fit": fit.as_ref().map_or(Value::Null, fit_json),
        }),
    )
}

pub fn meanfield_cmd(cfg: &RunConfig) -> Result<i32, CliError> {
    let m = network_model(cfg)?;
    let c0 = match &cfg.c0 {
        Some(c) => {
            m.net.check_state(c.len()).map_err(CliError::config)?;
            ConcVector::new(c.clone()).map_err(CliError::config)?
        }
        None => ConcVector::from_counts(&m.n0, m.scale),
    };
    let mut ode = OdeConfig::new(cfg.step);
    ode.record_every = ((cfg.sample_dt / cfg.step).round() as usize).max(1);
    let path = integrate(&m.net, &c0, cfg.horizon, &ode).map_err(rt)?;
    let names = m.net.species().names();
    let mut t = Table::new(std::iter::once("t".to_string()).chain(names.iter().cloned()));
    for (time, c) in path.times.iter().zip(&path.states) {
        t.rows.push(std::iter::once(json!(time)).chain(c.iter().map(|&x| num(x))).collect());
    }
    let mut out = Out::new(cfg);
    out.table("meanfield", &t)?;
    let (t_end, last) = path.last();
    let mut summary = json!({
        "command": "meanfield",
        "config": config_json(cfg),
        "model": m.name,
        "species": names,
        "c0": nums(&c0),
        "final_time": t_end,
        "final": nums(last),
        "recorded_rows": path.times.len(),
        "clamps": path.clamps,
    });
    let xi = solve_unitarity(&m.net, None, 1e-10).map_err(rt)?;
    summary["unitarity_feasible"] = json!(xi.feasible);
    if xi.feasible {
        let kl: Vec<f64> = path
            .states
            .iter()
            .map(|c| lyapunov_kl(c, &xi.xi))
            .collect::<Result<_, _>>()
            .map_err(rt)?;
        let worst = kl.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        summary["kl"] = json!({ "initial": num(kl[0]), "final": num(*kl.last().unwrap()), "largest_increase": num(worst) });
    }
    if let NetKind::LotkaVolterra { mu3, mu6, k } = m.kind {
        let h0 = lv_first_integral(&path.states[0], mu3, mu6, k).map_err(rt)?;
        let mut drift = 0.0f64;
        for c in &path.states {
            drift = drift.max((lv_first_integral(c, mu3, mu6, k).map_err(rt)? - h0).abs() / h0.abs().max(f64::MIN_POSITIVE));
        }
        summary["first_integral"] = json!({ "initial": num(h0), "max_relative_drift": num(drift) });
    }
    out.json("summary.json", summary)?;
    out.report();
    Ok(0)
}

pub fn equilibrium_cmd(cfg: &RunConfig) -> Result<i32, CliError> {
    let m = network_model(cfg)?;
    let names = m.net.species().names();
    let (xi, basis, b, proj) = unitarity_and_projection(&m.net, &m.n0, m.scale)?;
    let mut out = Out::new(cfg);
    let mut report = json!({
        "command": "equilibrium",
        "config": config_json(cfg),
        "model": m.name,
        "species": names,
        "scale": m.scale,
        "n0": m.n0,
        "xi": nums(&xi.xi),
        "residual": num(xi.residual),
        "feasible": xi.feasible,
        "conservation_laws": basis.vectors,
        "slice_values": nums(&b),
    });
    if xi.feasible {
        let db = check_detailed_balance(&m.net, &xi.xi, 1e-8).map_err(rt)?;
        report["detailed_balance"] = json!(db.balanced);
        report["worst_pair_defect"] = num(db.pairs.iter().map(|p| p.defect).fold(0.0, f64::max));
    } else {
        report["detailed_balance"] = json!(false);
        report["warning"] = json!("UNITARITY INFEASIBLE: no positive xi balances every complex; no c* or product form");
        eprintln!("warning: unitarity infeasible for {} (residual {:.3e})", m.name, xi.residual);
    }
    match &proj {
        Ok(p) => {
            report["c_star"] = nums(&p.c_star);
            report["multipliers"] = nums(&p.multipliers);
            report["kl"] = num(p.kl_value);
            report["constraint_defect"] = num(p.constraint_defect);
            let mut t;
            if let NetKind::WealthKinetic { .. } = m.kind {
                let fit = fit_exponential(&p.c_star, &ExpFitOptions { min_count: 0.0 }).ok();
                t = Table::new(["s", "c_star", "fitted"]);
                if let Some(f) = &fit {
                    t.comments.push(fit_comment(f));
                    report["c_star_fit"] = fit_json(f);
                }
                for (s, &c) in p.c_star.iter().enumerate() {
                    let fitted = fit.as_ref().map_or(Value::Null, |f| num((f.intercept - f.parameter * s as f64).exp()));
                    t.rows.push(vec![json!(s), num(c), fitted]);
                }
            } else {
                t = Table::new(["species", "c_star"]);
                for (name, &c) in names.iter().zip(&p.c_star) {
                    t.rows.push(vec![json!(name), num(c)]);
                }
            }
            out.table("c_star", &t)?;
        }
        Err(e) if xi.feasible => report["projection_error"] = json!(e.to_string()),
        Err(_) => {}
    }
    let gate = cfg.max_states.min(DENSE_STATE_LIMIT);
    match exact_chain_with(&m.net, &m.n0, m.scale, cfg.intensity_convention.into(), gate) {
        Ok(chain) => {
            let mut t = Table::new(names.iter().cloned().chain(std::iter::once("prob".to_string())));
            for (s, &p) in chain.states.iter().zip(&chain.stationary) {
                t.rows.push(s.iter().map(|&x| json!(x)).chain(std::iter::once(num(p))).collect());
            }
            out.table("stationary", &t)?;
            report["exact_chain"] = json!({
                "states": chain.len(),
                "irreducible": chain.irreducible,
                "balance_residual": num(chain.balance_residual()),
            });
        }
        Err(EquilibriumError::StateSpaceOverflow { max_states }) => {
            report["exact_chain"] = json!({ "skipped": format!("more than {max_states} reachable states") });
        }
        Err(e) => return Err(rt(e)),
    }
    out.json("equilibrium.json", report)?;
    if !xi.feasible {
        println!("UNITARITY INFEASIBLE for {}", m.name);
    }
    out.report();
    Ok(0)
}

pub fn verify_cmd(cfg: &RunConfig, suite: &str) -> Result<i32, CliError> {
    verify::suite_criteria(suite)?;
    let reports = verify::run_suite(suite, cfg.seed)?;
    let passed = reports.iter().all(|r| r.passed);
    let mut out = Out::new(cfg);
    out.json(
        &format!("verify_{suite}.json"),
        json!({ "suite": suite, "seed": cfg.seed, "passed": passed, "criteria": reports }),
    )?;
    print!("{}", verify::table(&reports));
    println!("suite {suite}: {}", if passed { "PASS" } else { "FAIL" });
    out.report();
    Ok(if passed { 0 } else { EXIT_CHECK_FAILED })
}
