//! Desk-scale statistical checks, grouped into named suites.

use std::fmt::Write as _;

use macrokin_core::equilibrium::{
    entropy_project, exact_chain, first_passage_return_time, mean_return_time, product_form_law, solve_unitarity,
    DEFAULT_MAX_STATES,
};
use macrokin_core::meanfield::{gw_rhs, integrate, lv_first_integral, lyapunov_kl, ConcVector, OdeConfig};
use macrokin_core::models::{self, MarkMode};
use macrokin_core::network::{conservation_laws, parse_network, ConservationBasis, ReactionNetwork};
use macrokin_core::rng::{split, SplitMix64};
use macrokin_core::ssa::{simulate_replica, SimConfig, Simulator};
use macrokin_core::stats::{
    fit_exponential, fit_power_law_histogram, fit_power_law_ranks, l2_concentration, mean_and_se, return_time_mc,
    two_urn_threshold, variance, ExpFitOptions, PowerFitOptions,
};
use serde::Serialize;

use crate::error::CliError;
use crate::parallel::try_par_map;
use crate::registry::default_pagerank_rates;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub target: String,
    /// Known not to be reachable by a faithful implementation; still run and reported.
    pub unattainable: bool,
}

fn check(name: impl Into<String>, passed: bool, measured: f64, target: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        measured,
        target: target.into(),
        unattainable: false,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    fn new(id: u8, title: &'static str, checks: Vec<Check>) -> Self {
        Self {
            id,
            title,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    /// All checks pass except those marked unattainable.
    pub fn attainable_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.unattainable)
    }
}

pub const SUITES: [(&str, &[u8]); 8] = [
    ("ehrenfest", &[1, 2, 3, 4, 5]),
    ("schlogl", &[9]),
    ("wealth", &[6, 7]),
    ("lv", &[8]),
    ("kac", &[10]),
    ("power_laws", &[11]),
    ("pagerank", &[12]),
    ("majority", &[13]),
];

pub fn suite_names() -> String {
    SUITES.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
}

pub fn suite_criteria(name: &str) -> Result<&'static [u8], CliError> {
    SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| *c)
        .ok_or_else(|| CliError::UnknownSuite {
            name: name.to_string(),
            valid: suite_names(),
        })
}

pub fn run_suite(name: &str, seed: u64) -> Result<Vec<CriterionReport>, CliError> {
    suite_criteria(name)?.iter().map(|&id| run_criterion(id, seed)).collect()
}

pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionReport, CliError> {
    let seed = split(seed, id as u64);
    match id {
        1 => ehrenfest_concentration(seed),
        2 => ehrenfest_return_time(seed),
        3 => stationary_laws(),
        4 => kurtz_convergence(seed),
        5 => lyapunov_monotonicity(seed),
        6 => entropy_projection(),
        7 => wealth_equilibrium(seed),
        8 => lotka_volterra(),
        9 => schlogl_scaling(seed),
        10 => kac_ring(seed),
        11 => power_laws(seed),
        12 => pagerank(seed),
        13 => majority(seed),
        _ => Err(CliError::runtime(format!("no criterion {id}"))),
    }
}

/// Human-readable table, one line per check.
pub fn table(reports: &[CriterionReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(s, "[{}] criterion {:>2}: {}", verdict(r.passed), r.id, r.title);
        for c in &r.checks {
            let note = if c.unattainable { "  (known unattainable)" } else { "" };
            let _ = writeln!(
                s,
                "    {:<4} {:<52} measured {:<14} target {}{}",
                verdict(c.passed),
                c.name,
                format!("{:.6}", c.measured),
                c.target,
                note
            );
        }
    }
    s
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn rt(e: impl std::fmt::Display) -> CliError {
    CliError::runtime(e)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn ehrenfest_concentration(seed: u64) -> Result<CriterionReport, CliError> {
    let n = 100;
    let replicas = 500;
    let (net, n0) = models::ehrenfest(n, 1.0).map_err(rt)?;
    let cfg = SimConfig::new(seed, 1000.0, 1000.0);
    let ends = try_par_map(replicas, |r| simulate_replica(&net, &n0, n, &cfg, r).map(|t| t.terminal().to_vec()))
        .map_err(rt)?;
    let radius = two_urn_threshold(n);
    let inside = ends
        .iter()
        .filter(|e| (e[0] as f64 - e[1] as f64).abs() / n as f64 <= radius)
        .count();
    let frac = inside as f64 / replicas as f64;
    let refs: Vec<&[u64]> = ends.iter().map(Vec::as_slice).collect();
    let l2 = l2_concentration(&refs, n, &[0.5, 0.5], 0.01).map_err(rt)?;
    Ok(CriterionReport::new(
        1,
        "Ehrenfest concentration at N=100, t=1000",
        vec![
            check("fraction with |n1-n2|/N <= 3/sqrt(N)", frac >= 0.99, frac, ">= 0.99"),
            check(
                "fraction outside the sigma=0.01 l2 radius",
                l2.pass,
                l2.violations as f64 / replicas as f64,
                "<= 0.01",
            ),
        ],
    ))
}

fn ehrenfest_return_time(seed: u64) -> Result<CriterionReport, CliError> {
    let (net, n0) = models::ehrenfest(10, 1.0).map_err(rt)?;
    let chain = exact_chain(&net, &n0, 10, DEFAULT_MAX_STATES).map_err(rt)?;
    let s = chain.index_of(&n0).ok_or_else(|| rt("start state missing"))?;
    let stat = mean_return_time(&chain, s).map_err(rt)?;
    let oracle = first_passage_return_time(&chain, s).map_err(rt)?;
    let rel = |x: f64| (x - 1024.0).abs() / 1024.0;
    let (net8, n08) = models::ehrenfest(8, 1.0).map_err(rt)?;
    let mc = return_time_mc(&net8, &n08, 8, 2000, seed, 10_000_000).map_err(rt)?;
    let z = (mc.mean - 256.0).abs() / mc.std_error;
    Ok(CriterionReport::new(
        2,
        "Ehrenfest mean return time 2^N",
        vec![
            check("N=10 jump-step return time, relative error", rel(stat.jump_steps) <= 1e-8, rel(stat.jump_steps), "<= 1e-8"),
            check(
                "N=10 first-passage oracle, relative error",
                rel(oracle.jump_steps) <= 1e-8,
                rel(oracle.jump_steps),
                "<= 1e-8",
            ),
            check(
                "N=8 Monte Carlo, |mean - 256| / SE",
                z <= 3.0 && mc.truncated == 0,
                z,
                "<= 3, no truncated replicas",
            ),
        ],
    ))
}

/// Gallery networks at small N: (name, network, n0, N).
fn small_gallery() -> Result<Vec<(&'static str, ReactionNetwork, Vec<u64>, u64)>, CliError> {
    let (e, e0) = models::ehrenfest(12, 1.0).map_err(rt)?;
    let (lv, lv0) = models::lotka_volterra(1.0, 1.0, 1.0, 12).map_err(rt)?;
    let (w, w0) = models::wealth_exchange_kinetic(4, 2, 8, 1.0).map_err(rt)?;
    let (p, p0) = models::pagerank_surfers(&default_pagerank_rates(), 6).map_err(rt)?;
    Ok(vec![
        ("ehrenfest", e, e0, 12),
        ("schlogl", models::schlogl_network(), vec![12], 12),
        ("lotka_volterra", lv, lv0, 12),
        ("wealth_kinetic", w, w0, 4),
        ("pagerank", p, p0, 6),
    ])
}

fn stationary_laws() -> Result<CriterionReport, CliError> {
    let (net, n0) = models::ehrenfest(12, 1.0).map_err(rt)?;
    let chain = exact_chain(&net, &n0, 12, DEFAULT_MAX_STATES).map_err(rt)?;
    let binom: Vec<f64> = chain
        .states
        .iter()
        .map(|s| binomial(12, s[0]) / 4096.0)
        .collect();
    let err = max_abs_diff(&binom, &chain.stationary);
    let mut checks = vec![check("Ehrenfest N=12 exact vs binomial, max abs", err <= 1e-10, err, "<= 1e-10")];
    for (name, net, n0, scale) in small_gallery()? {
        let xi = solve_unitarity(&net, None, 1e-12).map_err(rt)?;
        if !xi.feasible {
            checks.push(check(
                format!("{name}: unitarity infeasible, no product form"),
                true,
                xi.residual,
                "not applicable",
            ));
            continue;
        }
        let chain = exact_chain(&net, &n0, scale, DEFAULT_MAX_STATES).map_err(rt)?;
        let law = product_form_law(&chain, &xi.xi).map_err(rt)?;
        let err = max_abs_diff(&law, &chain.stationary);
        checks.push(check(
            format!("{name}: product form vs exact, max abs"),
            err <= 1e-10,
            err,
            "<= 1e-10",
        ));
    }
    Ok(CriterionReport::new(3, "Stationary law of small chains", checks))
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn kurtz_convergence(seed: u64) -> Result<CriterionReport, CliError> {
    let (unit, _) = models::ehrenfest(1, 1.0).map_err(rt)?;
    let ode = integrate(&unit, &ConcVector::new(vec![1.0, 0.0]).map_err(rt)?, 5.0, &OdeConfig::new(1e-3)).map_err(rt)?;
    let mut errs = Vec::new();
    for (i, n) in [400u64, 6400].into_iter().enumerate() {
        let (net, n0) = models::ehrenfest(n, 1.0).map_err(rt)?;
        let cfg = SimConfig::new(split(seed, i as u64), 5.0, 0.05);
        let sups = try_par_map(100, |r| {
            simulate_replica(&net, &n0, n, &cfg, r).map(|t| {
                t.samples()
                    .map(|(time, c)| (c[0] as f64 / n as f64 - ode.at(time)[0]).abs())
                    .fold(0.0, f64::max)
            })
        })
        .map_err(rt)?;
        errs.push(sups.iter().sum::<f64>() / sups.len() as f64);
    }
    let ratio = errs[0] / errs[1];
    Ok(CriterionReport::new(
        4,
        "Kurtz convergence of Ehrenfest paths to the ODE",
        vec![
            check("mean sup error at N=400", true, errs[0], "reported"),
            check("mean sup error at N=6400", errs[1] < errs[0], errs[1], "< error at N=400"),
            check("error ratio N=400 / N=6400", (2.0..=8.0).contains(&ratio), ratio, "in [2, 8]"),
        ],
    ))
}

fn lyapunov_monotonicity(seed: u64) -> Result<CriterionReport, CliError> {
    let (e, _) = models::ehrenfest(1, 1.0).map_err(rt)?;
    let (w, _) = models::wealth_exchange_kinetic(1, 5, 50, 1.0).map_err(rt)?;
    let (p, _) = models::pagerank_surfers(&default_pagerank_rates(), 1).map_err(rt)?;
    let mut checks = Vec::new();
    for (i, (name, net)) in [("ehrenfest", e), ("wealth_kinetic", w), ("pagerank", p)].into_iter().enumerate() {
        let xi = solve_unitarity(&net, None, 1e-12).map_err(rt)?;
        let mut rng = SplitMix64::child(seed, i as u64);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..20 {
            let c0: Vec<f64> = (0..net.species_count()).map(|_| 0.01 + rng.next_f64()).collect();
            let path = integrate(&net, &ConcVector::new(c0).map_err(rt)?, 5.0, &OdeConfig::new(1e-2)).map_err(rt)?;
            let kl: Vec<f64> = path
                .states
                .iter()
                .map(|c| lyapunov_kl(c, &xi.xi))
                .collect::<Result<_, _>>()
                .map_err(rt)?;
            worst = kl.windows(2).map(|w| w[1] - w[0]).fold(worst, f64::max);
        }
        checks.push(check(
            format!("{name}: largest KL increase per step, 20 starts"),
            xi.feasible && worst <= 1e-9,
            worst,
            "<= 1e-9",
        ));
    }
    Ok(CriterionReport::new(5, "KL(c(t), xi) is non-increasing", checks))
}

/// `sum c ln(c/xi) - c + xi`, the objective the projection minimizes.
fn generalized_kl(c: &[f64], xi: &[f64]) -> f64 {
    c.iter()
        .zip(xi)
        .map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() - a + b } else { b })
        .sum()
}

/// Grid minimizer of the projection objective over a three-species slice,
/// and the grid resolution in concentration units.
fn grid_projection(xi: &[f64], basis: &ConservationBasis, b: &[f64], h: f64) -> (Vec<f64>, f64) {
    let mu: Vec<Vec<f64>> = basis.vectors.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
    let mut best = (f64::INFINITY, vec![0.0; 3]);
    let consider = |c: [f64; 3], best: &mut (f64, Vec<f64>)| {
        if c.iter().all(|&x| x >= 0.0) {
            let f = generalized_kl(&c, xi);
            if f < best.0 {
                *best = (f, c.to_vec());
            }
        }
    };
    match mu.len() {
        1 => {
            // Solve for the coordinate with the largest coefficient.
            let m = &mu[0];
            let d = (0..3).max_by(|&i, &j| m[i].abs().total_cmp(&m[j].abs())).unwrap();
            let free: Vec<usize> = (0..3).filter(|&i| i != d).collect();
            let top: Vec<f64> = free.iter().map(|&i| if m[i] > 0.0 { b[0] / m[i] } else { 1.0 }).collect();
            let steps: Vec<usize> = top.iter().map(|t| (t / h).ceil() as usize).collect();
            for i in 0..=steps[0] {
                for j in 0..=steps[1] {
                    let mut c = [0.0; 3];
                    c[free[0]] = i as f64 * h;
                    c[free[1]] = j as f64 * h;
                    c[d] = (b[0] - m[free[0]] * c[free[0]] - m[free[1]] * c[free[1]]) / m[d];
                    consider(c, &mut best);
                }
            }
            let slope = (m[free[0]].abs() + m[free[1]].abs()) / m[d].abs();
            (best.1, h * (1.0 + slope))
        }
        2 => {
            let (a, c) = (&mu[0], &mu[1]);
            let v = [a[1] * c[2] - a[2] * c[1], a[2] * c[0] - a[0] * c[2], a[0] * c[1] - a[1] * c[0]];
            // Particular solution M^T (M M^T)^{-1} b.
            let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
            let (g11, g12, g22) = (dot(a, a), dot(a, c), dot(c, c));
            let det = g11 * g22 - g12 * g12;
            let y = [(g22 * b[0] - g12 * b[1]) / det, (g11 * b[1] - g12 * b[0]) / det];
            let p: Vec<f64> = (0..3).map(|i| y[0] * a[i] + y[1] * c[i]).collect();
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..3 {
                if v[i] != 0.0 {
                    let t = -p[i] / v[i];
                    if v[i] > 0.0 {
                        lo = lo.max(t);
                    } else {
                        hi = hi.min(t);
                    }
                }
            }
            let vmax = v.iter().fold(0.0f64, |s, x| s.max(x.abs()));
            let dt = h / vmax;
            let k = ((hi - lo) / dt).floor() as usize;
            for i in 0..=k {
                let t = lo + i as f64 * dt;
                consider([p[0] + t * v[0], p[1] + t * v[1], p[2] + t * v[2]], &mut best);
            }
            (best.1, h)
        }
        _ => (best.1, f64::NAN),
    }
}

fn entropy_projection() -> Result<CriterionReport, CliError> {
    let (wealth3, _) = models::wealth_exchange_kinetic(1, 1, 2, 1.0).map_err(rt)?;
    let rates3 = vec![vec![-1.0, 1.0, 0.0], vec![0.0, -2.0, 2.0], vec![0.5, 0.0, -0.5]];
    let (page3, _) = models::pagerank_surfers(&rates3, 1).map_err(rt)?;
    let parse = |t: &str| parse_network(t).map_err(rt);
    let cases = vec![
        ("A+B<->C", parse("A + B -> C @ 2\nC -> A + B @ 1")?, vec![0.6, 0.4, 0.1]),
        ("wealth, 3 classes", wealth3, vec![0.2, 0.5, 0.3]),
        ("pagerank, 3 vertices", page3, vec![0.2, 0.3, 0.5]),
        ("A+B<->C, A<->D", parse("A + B -> C @ 2\nC -> A + B @ 1\nA -> D @ 1\nD -> A @ 3")?, vec![0.6, 0.4, 0.1, 0.2]),
    ];
    let h = 1e-3;
    let (mut indep, mut rhs_max) = (0.0f64, 0.0f64);
    let mut checks = Vec::new();
    for (name, net, c0) in cases {
        let basis = conservation_laws(&net);
        let b: Vec<f64> = basis
            .vectors
            .iter()
            .map(|m| m.iter().zip(&c0).map(|(&k, c)| k as f64 * c).sum())
            .collect();
        let xi = solve_unitarity(&net, None, 1e-12).map_err(rt)?;
        if !xi.feasible {
            return Err(rt(format!("{name}: unitarity unexpectedly infeasible")));
        }
        // Another solution of (U): move ln xi along the conservation directions.
        let theta = [-0.3, 0.25, 0.4];
        let other: Vec<f64> = (0..xi.xi.len())
            .map(|i| {
                let shift: f64 = basis.vectors.iter().zip(theta).map(|(m, t)| m[i] as f64 * t).sum();
                xi.xi[i] * shift.exp()
            })
            .collect();
        let p1 = entropy_project(&xi.xi, &basis, &b).map_err(rt)?;
        let p2 = entropy_project(&other, &basis, &b).map_err(rt)?;
        indep = indep.max(max_abs_diff(&p1.c_star, &p2.c_star));
        let rhs = gw_rhs(&net, &ConcVector::new(p1.c_star.clone()).map_err(rt)?).map_err(rt)?;
        rhs_max = rhs_max.max(rhs.iter().fold(0.0, |s, x| s.max(x.abs())));
        if net.species_count() == 3 {
            let (grid, res) = grid_projection(&xi.xi, &basis, &b, h);
            let d = max_abs_diff(&grid, &p1.c_star);
            checks.push(check(
                format!("{name}: grid oracle distance (resolution {res:.0e})"),
                d <= res,
                d,
                format!("<= {res:.1e}"),
            ));
        }
    }
    checks.insert(0, check("c* independent of the (U) solution, max abs", indep <= 1e-8, indep, "<= 1e-8"));
    checks.insert(1, check("|gw_rhs(c*)|_inf", rhs_max <= 1e-8, rhs_max, "<= 1e-8"));
    Ok(CriterionReport::new(6, "Entropy projection onto the conservation slice", checks))
}

fn wealth_equilibrium(seed: u64) -> Result<CriterionReport, CliError> {
    let (agents, s_bar, s_max) = (1000u64, 5u64, 50u64);
    let replicas = 4;
    let burn_events = (10.0 * agents as f64 * (agents as f64).ln()).ceil() as u64;

    // Kinetic variant: burn in, then snapshot every 5 time units.
    let (net, n0) = models::wealth_exchange_kinetic(agents, s_bar, s_max, 1.0).map_err(rt)?;
    let (snaps, dt) = (300u64, 5.0);
    let kinetic = try_par_map(replicas, |r| -> Result<Vec<f64>, CliError> {
        let mut sim = Simulator::new(&net, &n0, agents, Default::default()).map_err(rt)?;
        let mut rng = SplitMix64::new(split(split(seed, 0), r));
        for _ in 0..burn_events {
            sim.fire(&mut rng).ok_or_else(|| rt("wealth chain absorbed"))?;
        }
        let t0 = sim.time();
        let mut acc = vec![0.0; n0.len()];
        let mut pending = sim.draw(&mut rng).ok_or_else(|| rt("wealth chain absorbed"))?;
        for k in 1..=snaps {
            let target = t0 + k as f64 * dt;
            while sim.time() + pending.0 <= target {
                sim.apply(pending.1, pending.0);
                pending = sim.draw(&mut rng).ok_or_else(|| rt("wealth chain absorbed"))?;
            }
            for (a, &c) in acc.iter_mut().zip(sim.counts()) {
                *a += c as f64;
            }
        }
        Ok(acc)
    })?;
    let kinetic_hist = average(&kinetic, (snaps * replicas) as f64);

    // Day variant: N/2 exchanges per day.
    let burn_days = burn_events.div_ceil(agents / 2);
    let (day_snaps, every) = (300u64, 10u64);
    let days = try_par_map(replicas, |r| -> Result<Vec<f64>, CliError> {
        let mut state = models::wealth_exchange_days(agents as usize, s_bar).map_err(rt)?;
        let mut rng = SplitMix64::new(split(split(seed, 1), r));
        for _ in 0..burn_days {
            models::wealth_day_step(&mut state, &mut rng);
        }
        let mut acc = vec![0.0; 1];
        for _ in 0..day_snaps {
            for _ in 0..every {
                models::wealth_day_step(&mut state, &mut rng);
            }
            let h = models::wealth_histogram(&state.coins);
            if h.len() > acc.len() {
                acc.resize(h.len(), 0.0);
            }
            for (a, &c) in acc.iter_mut().zip(&h) {
                *a += c as f64;
            }
        }
        Ok(acc)
    })?;
    let day_hist = average(&days, (day_snaps * replicas) as f64);

    let opts = ExpFitOptions::default();
    let rk = fit_exponential(&kinetic_hist, &opts).map_err(rt)?.parameter;
    let rd = fit_exponential(&day_hist, &opts).map_err(rt)?.parameter;
    let within = |r: f64| (r - 0.2).abs() <= 0.02;
    let gap = (rk - rd).abs() / rk.max(rd);
    Ok(CriterionReport::new(
        7,
        "Wealth exchange equilibrium profile, N=1000, s_bar=5",
        vec![
            check("kinetic variant fitted rate", within(rk), rk, "within 10% of 0.2"),
            check("day variant fitted rate", within(rd), rd, "within 10% of 0.2"),
            check("relative gap between variants", gap <= 0.1, gap, "<= 0.1"),
        ],
    ))
}

fn average(parts: &[Vec<f64>], count: f64) -> Vec<f64> {
    let len = parts.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![0.0; len];
    for p in parts {
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
    out.iter().map(|x| x / count).collect()
}

fn lotka_volterra() -> Result<CriterionReport, CliError> {
    let (mu3, mu6, k) = (1.0, 1.0, 1.0);
    let (net, _) = models::lotka_volterra(mu3, mu6, k, 1).map_err(rt)?;
    let center = [mu6 / k, mu3 / k];
    let c0 = vec![center[0] * 1.01, center[1]];
    let path = integrate(&net, &ConcVector::new(c0.clone()).map_err(rt)?, 20.0, &OdeConfig::new(1e-3)).map_err(rt)?;
    let h0 = lv_first_integral(&c0, mu3, mu6, k).map_err(rt)?;
    let mut drift = 0.0f64;
    for c in &path.states {
        drift = drift.max((lv_first_integral(c, mu3, mu6, k).map_err(rt)? - h0).abs() / h0.abs());
    }
    let mut crossings = Vec::new();
    for (ts, cs) in path.times.windows(2).zip(path.states.windows(2)) {
        let (y0, y1) = (cs[0][1] - center[1], cs[1][1] - center[1]);
        if y0 < 0.0 && y1 >= 0.0 {
            crossings.push(ts[0] + (ts[1] - ts[0]) * (-y0) / (y1 - y0));
        }
    }
    let expected = 2.0 * std::f64::consts::PI / (mu3 * mu6).sqrt();
    let period = if crossings.len() >= 2 {
        (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64
    } else {
        f64::NAN
    };
    let period_err = (period - expected).abs() / expected;
    let xi = solve_unitarity(&net, None, 1e-10).map_err(rt)?;
    Ok(CriterionReport::new(
        8,
        "Lotka-Volterra first integral, period and unitarity",
        vec![
            check("relative first-integral drift over T=20", drift <= 1e-5, drift, "<= 1e-5"),
            check("relative period error at 1% amplitude", period_err <= 0.02, period_err, "<= 0.02"),
            check("unitarity flagged infeasible (residual)", !xi.feasible, xi.residual, "feasible = false"),
        ],
    ))
}

fn schlogl_scaling(seed: u64) -> Result<CriterionReport, CliError> {
    let n = 10_000u64;
    let t = 0.1;
    let horizon = (n as f64).sqrt() * t;
    let cfg = SimConfig::new(0, horizon, horizon);
    let run = |x0: f64, replicas: u64, stream: u64| -> Result<Vec<f64>, CliError> {
        let j0 = models::schlogl_start(n, x0);
        try_par_map(replicas, |r| -> Result<f64, CliError> {
            let cfg = SimConfig {
                seed: split(split(seed, stream), r),
                ..cfg.clone()
            };
            let traj = models::schlogl_simulate(n, j0, &cfg).map_err(rt)?;
            let y = traj.terminal()[0] as f64;
            Ok((n as f64).powf(0.25) * (y / n as f64 - 1.0))
        })
    };
    let x = run(0.0, 2000, 0)?;
    let v = variance(&x);
    let target = 8.0 * t;
    let up = mean_and_se(&run(2.0, 100, 1)?);
    let down = mean_and_se(&run(-2.0, 100, 2)?);
    Ok(CriterionReport::new(
        9,
        "Schlogl critical scaling at n=10^4, t=0.1",
        vec![
            check(
                "variance of X_n(0.1) from 0, 2000 replicas",
                (v - target).abs() <= 0.25 * target,
                v,
                "within 25% of 0.8",
            ),
            check("mean X_n(0.1) from X=2 drifts down", up.0 + 3.0 * up.1 < 2.0, up.0, "< 2 by 3 SE"),
            check("mean X_n(0.1) from X=-2 drifts up", down.0 - 3.0 * down.1 > -2.0, down.0, "> -2 by 3 SE"),
        ],
    ))
}

/// Per-replica `stat(1..=steps)` on fresh random rings.
fn kac_series(n: usize, mu: f64, p: f64, replicas: u64, steps: usize, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
    try_par_map(replicas, |r| -> Result<Vec<f64>, CliError> {
        let mut s = models::kac_ring_new(n, mu, p, MarkMode::FixedCount, split(seed, r)).map_err(rt)?;
        Ok((0..steps)
            .map(|_| {
                models::kac_ring_step(&mut s);
                models::kac_ring_stat(&s)
            })
            .collect())
    })
}

fn kac_ring(seed: u64) -> Result<CriterionReport, CliError> {
    let mut checks = Vec::new();
    let mut mismatches = 0usize;
    for (i, (mu, mode)) in [
        (0.1, MarkMode::FixedCount),
        (0.3, MarkMode::FixedCount),
        (0.3, MarkMode::IidBernoulli),
    ]
    .into_iter()
    .enumerate()
    {
        let mut s = models::kac_ring_new(1000, mu, 0.0, mode, split(seed, 10 + i as u64)).map_err(rt)?;
        let start = s.colors.clone();
        for _ in 0..2000 {
            models::kac_ring_step(&mut s);
        }
        mismatches += s.colors.iter().zip(&start).filter(|(a, b)| a != b).count();
    }
    checks.push(check("cells differing after 2n steps, n=1000", mismatches == 0, mismatches as f64, "0"));

    let (n, replicas, steps, p) = (10_000usize, 2000u64, 20usize, 0.1);
    for (i, mu) in [0.1, 0.3].into_iter().enumerate() {
        let runs = kac_series(n, mu, 0.0, replicas, steps, split(seed, i as u64))?;
        let mut worst = 0.0f64;
        for t in 0..steps {
            let xs: Vec<f64> = runs.iter().map(|r| r[t]).collect();
            let (m, se) = mean_and_se(&xs);
            let expected = (1.0 - 2.0 * mu).powi(t as i32 + 1);
            worst = worst.max((m - expected).abs() / (4.0 * se).max(1e-12));
        }
        checks.push(check(
            format!("mu={mu}: max |mean - (1-2mu)^t| / 4 SE, t<=20"),
            worst <= 1.0,
            worst,
            "<= 1",
        ));
    }
    for (i, mu) in [0.1, 0.3].into_iter().enumerate() {
        let runs = kac_series(n, mu, p, replicas, steps, split(seed, 2 + i as u64))?;
        let mut worst = 1.0f64;
        for t in 0..steps {
            let xs: Vec<f64> = runs.iter().map(|r| r[t]).collect();
            let target = ((1.0 - 2.0 * mu) * (1.0 - 2.0 * p)).powi(2 * (t as i32 + 1)) / n as f64;
            let ratio = variance(&xs) / target;
            let off = ratio.max(1.0 / ratio);
            worst = worst.max(off);
        }
        let mut c = check(
            format!("mu={mu}, p={p}: worst variance factor vs (1/n) r^2t q^2t"),
            worst <= 2.0,
            worst,
            "<= 2",
        );
        c.unattainable = true;
        checks.push(c);
    }
    Ok(CriterionReport::new(10, "Kac ring periodicity and decay factors", checks))
}

/// Rank fits average over bins of width 0.1 in ln(rank). Word counts form a
/// staircase and the widest step would otherwise set the slope.
pub const RANK_FIT: PowerFitOptions = PowerFitOptions {
    skip_head: 5,
    min_count: 10.0,
    log_bin: 0.1,
};

fn power_laws(seed: u64) -> Result<CriterionReport, CliError> {
    let mut checks = Vec::new();
    for (i, alpha) in [0.0, 0.5].into_iter().enumerate() {
        let hist = models::yule_run(alpha, 1_000_000, split(seed, i as u64)).map_err(rt)?;
        let fit = fit_power_law_histogram(&hist, &PowerFitOptions::default()).map_err(rt)?;
        let expected = 3.0 + alpha / (1.0 - alpha);
        checks.push(check(
            format!("Yule alpha={alpha}: fitted exponent"),
            (fit.parameter - expected).abs() <= 0.2,
            fit.parameter,
            format!("{expected} +- 0.2"),
        ));
    }
    let table = models::monkey_text(4, 10_000_000, split(seed, 2)).map_err(rt)?;
    let counts: Vec<u64> = table.iter().map(|e| e.count).collect();
    let fit = fit_power_law_ranks(&counts, &RANK_FIT).map_err(rt)?;
    let plain = fit_power_law_ranks(&counts, &PowerFitOptions::default()).map_err(rt)?;
    let (alpha, _, _) = models::zipf_mandelbrot_params(4).map_err(rt)?;
    checks.push(check(
        "monkey text n=4, 10^7 keys: rank exponent (log-binned)",
        (fit.parameter - alpha).abs() <= 0.05,
        fit.parameter,
        format!("{alpha:.5} +- 0.05"),
    ));
    checks.push(check(
        "same, every rank weighted equally",
        true,
        plain.parameter,
        "informational",
    ));
    Ok(CriterionReport::new(11, "Power-law exponents", checks))
}

fn pagerank(seed: u64) -> Result<CriterionReport, CliError> {
    let rates = default_pagerank_rates();
    let n = 10_000;
    let (net, n0) = models::pagerank_surfers(&rates, n).map_err(rt)?;
    let p = models::pagerank_vector(&rates);
    let xi = solve_unitarity(&net, None, 1e-12).map_err(rt)?;
    let xi_err = max_abs_diff(&xi.xi, &p);
    let cfg = SimConfig::new(seed, 20.0, 20.0);
    let ends = try_par_map(300, |r| simulate_replica(&net, &n0, n, &cfg, r).map(|t| t.terminal().to_vec())).map_err(rt)?;
    let refs: Vec<&[u64]> = ends.iter().map(Vec::as_slice).collect();
    let rep = l2_concentration(&refs, n, &p, 0.01).map_err(rt)?;
    let inside = 1.0 - rep.violations as f64 / rep.replicas as f64;
    Ok(CriterionReport::new(
        12,
        "PageRank surfers, 5 vertices, N=10^4",
        vec![
            check("fraction inside the sigma=0.01 radius", inside >= 0.99, inside, ">= 0.99"),
            check("largest |n/N - p|_2", true, rep.max_distance, format!("radius {:.4}", rep.threshold)),
            check("max |xi - p|", xi.feasible && xi_err <= 1e-8, xi_err, "<= 1e-8"),
        ],
    ))
}

fn majority(seed: u64) -> Result<CriterionReport, CliError> {
    let (n, k0, runs) = (9u64, 6u64, 10_000u64);
    let oracle = models::majority_exact(n, k0).map_err(rt)?;
    let res = try_par_map(runs, |r| {
        let mut rng = SplitMix64::new(split(seed, r));
        models::majority_run(n, k0, 10_000_000, &mut rng)
    })
    .map_err(rt)?;
    let consensus = res.iter().filter(|r| r.consensus).count();
    let plus = res.iter().filter(|r| r.final_plus == n).count() as f64 / runs as f64;
    let sd = (oracle.p_plus * (1.0 - oracle.p_plus) / runs as f64).sqrt();
    let steps: Vec<f64> = res.iter().map(|r| r.steps as f64).collect();
    let (m, se) = mean_and_se(&steps);
    Ok(CriterionReport::new(
        13,
        "Majority rule absorption at N=9",
        vec![
            check("runs reaching consensus", consensus as u64 == runs, consensus as f64, "all 10000"),
            check(
                "|P(all +1) - exact| / sigma",
                (plus - oracle.p_plus).abs() <= 3.0 * sd,
                (plus - oracle.p_plus).abs() / sd,
                "<= 3",
            ),
            check(
                "|mean steps - exact| / SE",
                (m - oracle.mean_steps).abs() <= 3.0 * se,
                (m - oracle.mean_steps).abs() / se,
                "<= 3",
            ),
        ],
    ))
}
