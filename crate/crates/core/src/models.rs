//! Model gallery: reaction-network constructors, plus bespoke simulators for
//! the processes that are not mass-action networks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, Matrix};
use crate::math;
use crate::network::{ConservationBasis, NetworkError, Reaction, ReactionNetwork, SpeciesTable};
use crate::rng::SplitMix64;
use crate::ssa::{record_path, JumpProcess, SimConfig, SimError, Simulator, Trajectory};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: &'static str },
}

fn param(ok: bool, name: &'static str, reason: &'static str) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::Parameter { name, reason })
    }
}

fn positive(x: f64, name: &'static str) -> Result<(), ModelError> {
    param(x > 0.0 && x.is_finite(), name, "must be positive and finite")
}

/// Two urns exchanging balls at rate `lambda` each: `A -> B`, `B -> A`.
/// Starts with all `n` balls in `A`.
pub fn ehrenfest(n: u64, lambda: f64) -> Result<(ReactionNetwork, Vec<u64>), ModelError> {
    param(n >= 1, "N", "must be at least 1")?;
    positive(lambda, "lambda")?;
    let species = SpeciesTable::new(["A", "B"])?;
    let net = ReactionNetwork::new(
        species,
        vec![
            Reaction::from_terms(2, &[(0, 1)], &[(1, 1)], lambda),
            Reaction::from_terms(2, &[(1, 1)], &[(0, 1)], lambda),
        ],
    )?;
    Ok((net, vec![n, 0]))
}

/// Schlögl's birth–death process as a network. At scale `N = n` the Kurtz
/// intensities are exactly `n (1 + 3x(x - 1/n))` and `n (3x + x(x - 1/n)(x - 2/n))`.
pub fn schlogl_network() -> ReactionNetwork {
    let species = SpeciesTable::new(["Y"]).unwrap();
    ReactionNetwork::new(
        species,
        vec![
            Reaction::from_terms(1, &[], &[(0, 1)], 1.0),
            Reaction::from_terms(1, &[(0, 2)], &[(0, 3)], 3.0),
            Reaction::from_terms(1, &[(0, 1)], &[], 3.0),
            Reaction::from_terms(1, &[(0, 3)], &[(0, 2)], 1.0),
        ],
    )
    .unwrap()
}

/// `(birth, death)` rates of the Schlögl chain at `j` with scale `n`.
#[inline]
pub fn schlogl_rates(n: u64, j: u64) -> (f64, f64) {
    let (nf, jf) = (n as f64, j as f64);
    let f2 = math::falling_factorial(j, 2);
    let f3 = math::falling_factorial(j, 3);
    (nf + 3.0 * f2 / nf, 3.0 * jf + f3 / (nf * nf))
}

/// Dedicated birth–death engine for the Schlögl chain. Event 0 is a birth,
/// event 1 a death; the random stream is consumed as in [`Simulator`].
#[derive(Debug, Clone)]
pub struct Schlogl {
    n: u64,
    j: [u64; 1],
    time: f64,
}

impl Schlogl {
    pub fn new(n: u64, j0: u64) -> Result<Self, ModelError> {
        param(n >= 3, "n", "must be at least 3")?;
        Ok(Self { n, j: [j0], time: 0.0 })
    }
}

impl JumpProcess for Schlogl {
    fn counts(&self) -> &[u64] {
        &self.j
    }

    fn time(&self) -> f64 {
        self.time
    }

    #[inline]
    fn draw(&self, rng: &mut SplitMix64) -> Option<(f64, usize)> {
        let (b, d) = schlogl_rates(self.n, self.j[0]);
        let total = b + d;
        let dwell = rng.exp(total);
        let event = if rng.next_f64() * total < b { 0 } else { 1 };
        Some((dwell, event))
    }

    #[inline]
    fn apply(&mut self, event: usize, dwell: f64) {
        if event == 0 {
            self.j[0] += 1;
        } else {
            self.j[0] -= 1;
        }
        self.time += dwell;
    }
}

pub fn schlogl_simulate(n: u64, j0: u64, cfg: &SimConfig) -> Result<Trajectory, ModelError> {
    Ok(record_path(Schlogl::new(n, j0)?, n, cfg)?)
}

/// `X_n(t) = n^{1/4} (Y_n(n^{1/2} t) / n - 1)` for every sample with `t <= t_max`.
pub fn schlogl_scaled(traj: &Trajectory, n: u64, t_max: f64) -> Result<Vec<(f64, f64)>, ModelError> {
    param(traj.species == 1, "trajectory", "must have one species")?;
    let nf = n as f64;
    let root = math::sqrt(nf);
    param(
        traj.end_time() >= root * t_max * (1.0 - 1e-12),
        "trajectory",
        "horizon shorter than n^(1/2) t_max",
    )?;
    let quarter = math::sqrt(root);
    Ok(traj
        .samples()
        .map(|(t, y)| (t / root, quarter * (y[0] as f64 / nf - 1.0)))
        .filter(|&(t, _)| t <= t_max * (1.0 + 1e-12))
        .collect())
}

/// Initial count with `X_n(0) = x0`.
pub fn schlogl_start(n: u64, x0: f64) -> u64 {
    let nf = n as f64;
    libm::round(nf * (1.0 + x0 / math::sqrt(math::sqrt(nf)))).max(0.0) as u64
}

/// Predator–prey: `R -> 2R @ mu3`, `W -> 0 @ mu6`, `R + W -> 2W @ k`.
/// Starts at the center of the mean-field cycle, rounded to counts.
pub fn lotka_volterra(mu3: f64, mu6: f64, k: f64, n: u64) -> Result<(ReactionNetwork, Vec<u64>), ModelError> {
    positive(mu3, "mu3")?;
    positive(mu6, "mu6")?;
    positive(k, "K")?;
    param(n >= 1, "N", "must be at least 1")?;
    let species = SpeciesTable::new(["prey", "predator"])?;
    let net = ReactionNetwork::new(
        species,
        vec![
            Reaction::from_terms(2, &[(0, 1)], &[(0, 2)], mu3),
            Reaction::from_terms(2, &[(1, 1)], &[], mu6),
            Reaction::from_terms(2, &[(0, 1), (1, 1)], &[(1, 2)], k),
        ],
    )?;
    let nf = n as f64;
    let n0 = vec![libm::round(nf * mu6 / k) as u64, libm::round(nf * mu3 / k) as u64];
    Ok((net, n0))
}

/// Time at which species `species` first hits zero, or `None` if it survives
/// to `cfg.horizon` (or past `cfg.max_events` jumps).
pub fn extinction_time(
    net: &ReactionNetwork,
    n0: &[u64],
    scale: u64,
    species: usize,
    cfg: &SimConfig,
) -> Result<Option<f64>, ModelError> {
    cfg.validate()?;
    let mut sim = Simulator::new(net, n0, scale, cfg.convention)?;
    let mut rng = SplitMix64::new(cfg.seed);
    let mut events = 0u64;
    while sim.counts()[species] > 0 {
        if events == cfg.max_events {
            return Ok(None);
        }
        let Some((dwell, r)) = sim.draw(&mut rng) else {
            return Ok(None);
        };
        if sim.time() + dwell > cfg.horizon {
            return Ok(None);
        }
        sim.apply(r, dwell);
        events += 1;
    }
    Ok(Some(sim.time()))
}

/// Agents' coin holdings in the day-by-day exchange game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WealthState {
    pub coins: Vec<u64>,
    pub day: u64,
}

pub fn wealth_exchange_days(agents: usize, s_bar: u64) -> Result<WealthState, ModelError> {
    param(agents >= 2 && agents % 2 == 0, "N", "must be even and at least 2")?;
    param(s_bar >= 1, "s_bar", "must be at least 1")?;
    Ok(WealthState {
        coins: vec![s_bar; agents],
        day: 0,
    })
}

/// One meeting: every solvent player stakes a coin and the winner takes
/// the pot. Either player may win, bankrupt or not.
#[inline]
pub fn wealth_pair_exchange(a: u64, b: u64, first_wins: bool) -> (u64, u64) {
    let (sa, sb) = ((a > 0) as u64, (b > 0) as u64);
    let pot = sa + sb;
    if first_wins {
        (a - sa + pot, b - sb)
    } else {
        (a - sa, b - sb + pot)
    }
}

/// One day: a uniform random perfect matching, then one exchange per pair.
pub fn wealth_day_step(state: &mut WealthState, rng: &mut SplitMix64) {
    let mut order: Vec<usize> = (0..state.coins.len()).collect();
    rng.shuffle(&mut order);
    for pair in order.chunks_exact(2) {
        let (i, j) = (pair[0], pair[1]);
        let (a, b) = wealth_pair_exchange(state.coins[i], state.coins[j], rng.bernoulli(0.5));
        state.coins[i] = a;
        state.coins[j] = b;
    }
    state.day += 1;
}

/// `h[s]` = number of agents holding `s` coins.
pub fn wealth_histogram(coins: &[u64]) -> Vec<u64> {
    let top = coins.iter().copied().max().unwrap_or(0) as usize;
    let mut h = vec![0u64; top + 1];
    for &c in coins {
        h[c as usize] += 1;
    }
    h
}

/// Wealth classes `0..=s_max` as species. Every meeting of a solvent
/// holder of `a` coins with a holder of `b` coins moves one coin with
/// rate `lambda / 2` per direction: `A_a + A_b -> A_{a-1} + A_{b+1}`.
/// Class `s_max` never gains. Starts with all `agents` in class `s_bar`.
pub fn wealth_exchange_kinetic(
    agents: u64,
    s_bar: u64,
    s_max: u64,
    lambda: f64,
) -> Result<(ReactionNetwork, Vec<u64>), ModelError> {
    param(agents >= 1, "N", "must be at least 1")?;
    param(s_bar >= 1, "s_bar", "must be at least 1")?;
    param(s_max >= s_bar && s_max >= 2, "s_max", "must be at least s_bar and 2")?;
    positive(lambda, "lambda")?;
    let m = s_max as usize + 1;
    let species = SpeciesTable::new((0..m).map(|s| format!("s{s}")))?;
    let mut reactions = Vec::new();
    for a in 1..m {
        for b in 0..m - 1 {
            if b + 1 == a {
                continue;
            }
            let mut alpha = vec![0u32; m];
            let mut beta = vec![0u32; m];
            alpha[a] += 1;
            alpha[b] += 1;
            beta[a - 1] += 1;
            beta[b + 1] += 1;
            reactions.push(Reaction::new(alpha, beta, lambda / 2.0));
        }
    }
    let net = ReactionNetwork::new(species, reactions)?;
    let mut n0 = vec![0u64; m];
    n0[s_bar as usize] = agents;
    Ok((net, n0))
}

/// Head count and total wealth: `(1, ..., 1)` and `(0, 1, 2, ...)`.
pub fn wealth_kinetic_invariants(s_max: u64) -> ConservationBasis {
    let m = s_max as usize + 1;
    ConservationBasis::new(vec![vec![1; m], (0..m as i64).collect()])
}

/// `(P(k -> k+1), P(k -> k-1))` for the majority rule among `n` agents with
/// `k` holding `+1`: a uniformly chosen triple with a 2:1 split flips its
/// minority member.
pub fn majority_kernel(n: u64, k: u64) -> (f64, f64) {
    let c = |a: u64, b: u64| -> f64 {
        if b > a {
            0.0
        } else {
            math::falling_factorial(a, b as u32) / math::falling_factorial(b, b as u32)
        }
    };
    let total = c(n, 3);
    (c(k, 2) * (n - k) as f64 / total, k as f64 * c(n - k, 2) / total)
}

/// One step: three distinct agents drawn uniformly without replacement
/// (agents `0..k` hold `+1`).
pub fn majority_step(n: u64, k: u64, rng: &mut SplitMix64) -> u64 {
    let mut picks = [0u64; 3];
    for i in 0..3 {
        let mut x = rng.below(n - i as u64);
        // Map into the agents not yet picked, in increasing order.
        let mut taken: Vec<u64> = picks[..i].to_vec();
        taken.sort_unstable();
        for t in taken {
            if x >= t {
                x += 1;
            }
        }
        picks[i] = x;
    }
    match picks.iter().filter(|&&a| a < k).count() {
        2 => k + 1,
        1 => k - 1,
        _ => k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorityRun {
    pub final_plus: u64,
    pub steps: u64,
    pub consensus: bool,
}

pub fn majority_run(n: u64, k0: u64, max_steps: u64, rng: &mut SplitMix64) -> Result<MajorityRun, ModelError> {
    param(n >= 3, "N", "must be at least 3")?;
    param(k0 <= n, "k0", "must not exceed N")?;
    let mut k = k0;
    let mut steps = 0;
    while k != 0 && k != n && steps < max_steps {
        k = majority_step(n, k, rng);
        steps += 1;
    }
    Ok(MajorityRun {
        final_plus: k,
        steps,
        consensus: k == 0 || k == n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorityOracle {
    /// Probability of absorbing at all `+1`.
    pub p_plus: f64,
    /// Expected number of steps until consensus.
    pub mean_steps: f64,
}

/// First-step analysis on the absorbing chain `0..=n`.
pub fn majority_exact(n: u64, k0: u64) -> Result<MajorityOracle, ModelError> {
    param(n >= 3, "N", "must be at least 3")?;
    param(k0 <= n, "k0", "must not exceed N")?;
    if k0 == 0 || k0 == n {
        return Ok(MajorityOracle {
            p_plus: (k0 == n) as u8 as f64,
            mean_steps: 0.0,
        });
    }
    let t = (n - 1) as usize;
    let mut a = Matrix::zeros(t, t);
    let mut hit = vec![0.0; t];
    for k in 1..n {
        let i = (k - 1) as usize;
        let (up, down) = majority_kernel(n, k);
        a[(i, i)] = up + down;
        if k + 1 < n {
            a[(i, i + 1)] = -up;
        } else {
            hit[i] = up;
        }
        if k > 1 {
            a[(i, i - 1)] = -down;
        }
    }
    let p = linalg::solve(&a, &hit).expect("majority chain is absorbing");
    let h = linalg::solve(&a, &vec![1.0; t]).expect("majority chain is absorbing");
    let i = (k0 - 1) as usize;
    Ok(MajorityOracle {
        p_plus: p[i],
        mean_steps: h[i],
    })
}

/// Random surfers on a graph with transition-rate matrix `rates`: one unary
/// reaction `v_i -> v_j` per positive off-diagonal entry. All `n` surfers
/// start at vertex 0.
pub fn pagerank_surfers(rates: &[Vec<f64>], n: u64) -> Result<(ReactionNetwork, Vec<u64>), ModelError> {
    let k = rates.len();
    param(k >= 2, "rates", "need at least two vertices")?;
    param(rates.iter().all(|r| r.len() == k), "rates", "must be square")?;
    param(n >= 1, "N", "must be at least 1")?;
    for (i, row) in rates.iter().enumerate() {
        let mut off = 0.0;
        for (j, &x) in row.iter().enumerate() {
            param(x.is_finite(), "rates", "entries must be finite")?;
            if i != j {
                param(x >= 0.0, "rates", "off-diagonal entries must be nonnegative")?;
                off += x;
            }
        }
        param(
            math::abs(row[i] + off) <= 1e-9 * off.max(1.0),
            "rates",
            "rows must sum to zero",
        )?;
    }
    let adj: Vec<Vec<usize>> = rates
        .iter()
        .enumerate()
        .map(|(i, row)| (0..k).filter(|&j| j != i && row[j] > 0.0).collect())
        .collect();
    param(linalg::strongly_connected(&adj).0 == 1, "rates", "graph must be irreducible")?;
    let species = SpeciesTable::new((1..=k).map(|i| format!("v{i}")))?;
    let reactions = adj
        .iter()
        .enumerate()
        .flat_map(|(i, out)| out.iter().map(move |&j| (i, j)))
        .map(|(i, j)| Reaction::from_terms(k, &[(i, 1)], &[(j, 1)], rates[i][j]))
        .collect();
    let net = ReactionNetwork::new(species, reactions)?;
    let mut n0 = vec![0; k];
    n0[0] = n;
    Ok((net, n0))
}

/// Stationary vector `p` of the rate matrix.
pub fn pagerank_vector(rates: &[Vec<f64>]) -> Vec<f64> {
    linalg::gth_stationary(&Matrix::from_rows(rates))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkMode {
    /// Exactly `round(mu n)` marked cells, uniformly among such subsets.
    FixedCount,
    /// Each cell marked independently with probability `mu`.
    IidBernoulli,
}

/// Kac's ring: `n` cells, a marked set `Q`, balls colored `+1`/`-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KacRingState {
    pub colors: Vec<i8>,
    pub marked: Vec<bool>,
    pub flip_prob: f64,
    pub time: u64,
    rng: SplitMix64,
}

/// Random marked set drawn from stream `child(seed, 0)`; the noise uses `child(seed, 1)`.
pub fn kac_ring_new(n: usize, mu: f64, p: f64, mode: MarkMode, seed: u64) -> Result<KacRingState, ModelError> {
    param(n >= 1, "n", "must be at least 1")?;
    param((0.0..0.5).contains(&mu), "mu", "must lie in [0, 1/2)")?;
    let mut rng = SplitMix64::child(seed, 0);
    let marked = match mode {
        MarkMode::FixedCount => {
            let m = libm::round(mu * n as f64) as usize;
            param(2 * m < n, "mu", "m / n must stay below 1/2")?;
            let mut cells: Vec<usize> = (0..n).collect();
            // Partial Fisher–Yates: the first m cells form a uniform m-subset.
            for i in 0..m {
                let j = i + rng.below((n - i) as u64) as usize;
                cells.swap(i, j);
            }
            let mut marked = vec![false; n];
            for &c in &cells[..m] {
                marked[c] = true;
            }
            marked
        }
        MarkMode::IidBernoulli => (0..n).map(|_| rng.bernoulli(mu)).collect(),
    };
    kac_ring_with_marks(marked, p, seed)
}

pub fn kac_ring_with_marks(marked: Vec<bool>, p: f64, seed: u64) -> Result<KacRingState, ModelError> {
    param(!marked.is_empty(), "marked", "ring must have at least one cell")?;
    param((0.0..0.5).contains(&p), "p", "must lie in [0, 1/2)")?;
    Ok(KacRingState {
        colors: vec![1; marked.len()],
        marked,
        flip_prob: p,
        time: 0,
        rng: SplitMix64::child(seed, 1),
    })
}

/// Every ball moves one cell on, flipping if it left a marked cell; then,
/// when `p > 0`, all colors are multiplied by a common `chi` with `P(chi = 1) = p`.
pub fn kac_ring_step(state: &mut KacRingState) {
    let n = state.colors.len();
    let last = state.colors[n - 1] * if state.marked[n - 1] { -1 } else { 1 };
    for k in (1..n).rev() {
        let c = state.colors[k - 1];
        state.colors[k] = if state.marked[k - 1] { -c } else { c };
    }
    state.colors[0] = last;
    if state.flip_prob > 0.0 && !state.rng.bernoulli(state.flip_prob) {
        for c in &mut state.colors {
            *c = -*c;
        }
    }
    state.time += 1;
}

/// `(N_white - N_black) / n`.
pub fn kac_ring_stat(state: &KacRingState) -> f64 {
    state.colors.iter().map(|&c| c as i64).sum::<i64>() as f64 / state.colors.len() as f64
}

/// Preferential-attachment village: each day a newcomer arrives with one
/// coin and one more coin goes to an old resident.
#[derive(Debug, Clone, PartialEq)]
pub struct YuleState {
    pub coin_counts: Vec<u64>,
    pub alpha: f64,
    /// Owner of every coin in order of issue, for O(1) proportional picks.
    owners: Vec<u32>,
}

/// Day one: a single resident with one coin.
pub fn yule_new(alpha: f64) -> Result<YuleState, ModelError> {
    param((0.0..1.0).contains(&alpha), "alpha", "must lie in [0, 1)")?;
    Ok(YuleState {
        coin_counts: vec![1],
        alpha,
        owners: vec![0],
    })
}

/// The extra coin goes to a uniform old resident with probability `alpha`,
/// otherwise to the owner of a uniformly drawn existing coin.
pub fn yule_step(state: &mut YuleState, rng: &mut SplitMix64) {
    let k = state.coin_counts.len() as u64;
    let uniform = state.alpha > 0.0 && rng.bernoulli(state.alpha);
    let who = if uniform {
        rng.below(k) as u32
    } else {
        state.owners[rng.below(state.owners.len() as u64) as usize]
    };
    state.coin_counts[who as usize] += 1;
    state.owners.push(who);
    state.coin_counts.push(1);
    state.owners.push(k as u32);
}

/// Histogram `c[s]` of residents holding `s` coins after `days` days.
pub fn yule_run(alpha: f64, days: u64, seed: u64) -> Result<Vec<u64>, ModelError> {
    param(days >= 1, "days", "must be at least 1")?;
    let mut state = yule_new(alpha)?;
    let mut rng = SplitMix64::new(seed);
    for _ in 1..days {
        yule_step(&mut state, &mut rng);
    }
    Ok(wealth_histogram(&state.coin_counts))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankEntry {
    pub rank: u64,
    pub word: String,
    pub count: u64,
}

/// A monkey at a typewriter with `n_symbols` letters and a space bar, all
/// equally likely. Returns the word frequencies ranked by decreasing count,
/// ties in lexicographic order.
pub fn monkey_text(n_symbols: u32, length: u64, seed: u64) -> Result<Vec<RankEntry>, ModelError> {
    param((2..=26).contains(&n_symbols), "n_symbols", "must lie in 2..=26")?;
    param(length >= 1, "length", "must be at least 1")?;
    let mut rng = SplitMix64::new(seed);
    let keys = n_symbols as u64 + 1;
    let mut counts: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
    let mut word = Vec::new();
    for _ in 0..length {
        let key = rng.below(keys);
        if key == n_symbols as u64 {
            if !word.is_empty() {
                *counts.entry(core::mem::take(&mut word)).or_insert(0) += 1;
            }
        } else {
            word.push(b'a' + key as u8);
        }
    }
    if !word.is_empty() {
        *counts.entry(word).or_insert(0) += 1;
    }
    let mut table: Vec<(Vec<u8>, u64)> = counts.into_iter().collect();
    // BTreeMap order is lexicographic; a stable sort keeps it within ties.
    table.sort_by(|a, b| b.1.cmp(&a.1));
    Ok(table
        .into_iter()
        .enumerate()
        .map(|(i, (w, count))| RankEntry {
            rank: i as u64 + 1,
            word: String::from_utf8(w).unwrap(),
            count,
        })
        .collect())
}

/// `(alpha, B, C)` of the Zipf–Mandelbrot law `C / (r + B)^alpha` for uniform keys.
pub fn zipf_mandelbrot_params(n_symbols: u32) -> Result<(f64, f64, f64), ModelError> {
    param(n_symbols >= 2, "n_symbols", "must be at least 2")?;
    let n = n_symbols as f64;
    let alpha = math::ln(n + 1.0) / math::ln(n);
    let b = n / (n - 1.0);
    let c = math::powf(n, alpha - 1.0) / math::powf(n - 1.0, alpha);
    Ok((alpha, b, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_unitarity;
    use crate::network::conservation_laws;
    use crate::ssa::{propensities, IntensityConvention};

    #[test]
    fn ehrenfest_network() {
        let (net, n0) = ehrenfest(10, 2.0).unwrap();
        assert_eq!(n0, vec![10, 0]);
        assert_eq!(propensities(&net, &n0, 10, IntensityConvention::Kurtz).unwrap(), vec![20.0, 0.0]);
        assert_eq!(conservation_laws(&net).vectors, vec![vec![1, 1]]);
        let xi = solve_unitarity(&net, None, 1e-10).unwrap().xi;
        assert!((xi[0] - 0.5).abs() < 1e-12);
        assert!(ehrenfest(0, 1.0).is_err());
        assert!(ehrenfest(5, 0.0).is_err());
    }

    #[test]
    fn schlogl_rates_match_network() {
        let n = 50;
        let net = schlogl_network();
        for j in [0u64, 1, 2, 3, 37, 50, 80] {
            let p = propensities(&net, &[j], n, IntensityConvention::Kurtz).unwrap();
            let (b, d) = schlogl_rates(n, j);
            assert!((p[0] + p[1] - b).abs() < 1e-10 * b);
            assert!((p[2] + p[3] - d).abs() < 1e-10 * d.max(1.0));
        }
        assert_eq!(schlogl_rates(n, 0), (50.0, 0.0));
        let x: f64 = 1.0;
        let nf = n as f64;
        let (b, d) = schlogl_rates(n, n);
        assert!((b - nf * (1.0 + 3.0 * x * (x - 1.0 / nf))).abs() < 1e-10);
        assert!((d - nf * (3.0 * x + x * (x - 1.0 / nf) * (x - 2.0 / nf))).abs() < 1e-10);
    }

    #[test]
    fn schlogl_scaling() {
        let n = 10_000;
        assert_eq!(schlogl_start(n, 0.0), n);
        assert_eq!(schlogl_start(n, 1.0), n + 1000);
        let cfg = SimConfig::new(1, 100.0, 1.0);
        let traj = schlogl_simulate(n, n + 1000, &cfg).unwrap();
        let x = schlogl_scaled(&traj, n, 1.0).unwrap();
        assert_eq!(x[0].0, 0.0);
        assert!((x[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(x.last().unwrap().0, 1.0);
        assert!(schlogl_scaled(&traj, n, 2.0).is_err());
    }

    #[test]
    fn schlogl_drifts_toward_one() {
        let n = 400;
        let j0 = 480;
        let mut means = [0.0; 2];
        let reps = 200;
        for r in 0..reps {
            let cfg = SimConfig::new(crate::rng::split(3, r), 2.0, 1.0);
            let traj = schlogl_simulate(n, j0, &cfg).unwrap();
            means[0] += traj.sample(1).1[0] as f64 / (n as f64 * reps as f64);
            means[1] += traj.sample(2).1[0] as f64 / (n as f64 * reps as f64);
        }
        assert!(means[0] < 1.2 && means[1] < means[0], "{means:?}");
    }

    #[test]
    fn lotka_volterra_shape() {
        let (net, n0) = lotka_volterra(1.0, 0.5, 2.0, 100).unwrap();
        assert_eq!(n0, vec![25, 50]);
        assert!(conservation_laws(&net).is_empty());
        assert!(lotka_volterra(0.0, 1.0, 1.0, 10).is_err());
    }

    #[test]
    fn wealth_pair_rules() {
        assert_eq!(wealth_pair_exchange(0, 0, true), (0, 0));
        assert_eq!(wealth_pair_exchange(1, 0, true), (1, 0));
        assert_eq!(wealth_pair_exchange(1, 0, false), (0, 1));
        assert_eq!(wealth_pair_exchange(3, 2, true), (4, 1));
        assert_eq!(wealth_pair_exchange(3, 2, false), (2, 3));
    }

    #[test]
    fn wealth_days_conserve_coins() {
        let mut st = wealth_exchange_days(100, 5).unwrap();
        let mut rng = SplitMix64::new(4);
        for _ in 0..200 {
            wealth_day_step(&mut st, &mut rng);
            assert_eq!(st.coins.iter().sum::<u64>(), 500);
        }
        assert_eq!(st.day, 200);
        assert!(wealth_exchange_days(3, 1).is_err());
    }

    #[test]
    fn wealth_kinetic_structure() {
        let (net, n0) = wealth_exchange_kinetic(1000, 5, 50, 1.0).unwrap();
        assert_eq!(net.species_count(), 51);
        let documented = wealth_kinetic_invariants(50);
        assert!(documented.is_conserved_by(&net));
        let found = conservation_laws(&net);
        assert_eq!(found.len(), 2);
        assert!(found.contains_all_ones(51));
        let vals = crate::network::invariant_values(&documented, &n0).unwrap();
        assert_eq!(vals, vec![1000, 5000]);
        // A holder in the top class can only lose a coin.
        for r in net.reactions().iter().filter(|r| r.alpha[50] > 0) {
            assert!(r.beta[50] < r.alpha[50]);
        }
    }

    #[test]
    fn majority_kernel_small() {
        assert_eq!(majority_kernel(3, 2), (1.0, 0.0));
        assert_eq!(majority_kernel(3, 1), (0.0, 1.0));
        assert_eq!(majority_kernel(9, 0), (0.0, 0.0));
        assert_eq!(majority_kernel(9, 9), (0.0, 0.0));
        let mut rng = SplitMix64::new(1);
        for _ in 0..100 {
            assert_eq!(majority_step(3, 2, &mut rng), 3);
            assert_eq!(majority_step(9, 9, &mut rng), 9);
        }
    }

    #[test]
    fn majority_oracle_is_symmetric() {
        let a = majority_exact(9, 6).unwrap();
        let b = majority_exact(9, 3).unwrap();
        assert!((a.p_plus + b.p_plus - 1.0).abs() < 1e-12);
        assert!((a.mean_steps - b.mean_steps).abs() < 1e-9);
        assert!(a.p_plus > 0.5);
        assert_eq!(majority_exact(9, 9).unwrap().p_plus, 1.0);
    }

    #[test]
    fn majority_step_frequencies_match_kernel() {
        let (n, k) = (9, 4);
        let (up, down) = majority_kernel(n, k);
        let mut rng = SplitMix64::new(17);
        let trials = 100_000;
        let mut counts = [0u64; 3];
        for _ in 0..trials {
            let next = majority_step(n, k, &mut rng);
            counts[(next + 1 - k) as usize] += 1;
        }
        let expected = [down, 1.0 - up - down, up].map(|p| p * trials as f64);
        let chi2: f64 = counts.iter().zip(&expected).map(|(&o, &e)| (o as f64 - e).powi(2) / e).sum();
        // 2 degrees of freedom, 0.1% critical value.
        assert!(chi2 < 13.8, "{chi2}");
    }

    #[test]
    fn pagerank_two_state() {
        let (a, b) = (1.0, 3.0);
        let rates = vec![vec![-a, a], vec![b, -b]];
        let (net, n0) = pagerank_surfers(&rates, 100).unwrap();
        assert_eq!(n0, vec![100, 0]);
        let xi = solve_unitarity(&net, None, 1e-10).unwrap().xi;
        let p = pagerank_vector(&rates);
        assert!((p[0] - b / (a + b)).abs() < 1e-14);
        assert!((xi[0] - p[0]).abs() < 1e-10 && (xi[1] - p[1]).abs() < 1e-10);
        let reducible = vec![vec![-1.0, 1.0], vec![0.0, 0.0]];
        assert!(pagerank_surfers(&reducible, 10).is_err());
        assert!(pagerank_surfers(&[vec![-1.0, 2.0], vec![1.0, -1.0]], 10).is_err());
    }

    #[test]
    fn kac_ring_empty_marks_is_frozen() {
        let mut st = kac_ring_new(50, 0.0, 0.0, MarkMode::FixedCount, 1).unwrap();
        for _ in 0..10 {
            kac_ring_step(&mut st);
            assert!(st.colors.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn kac_ring_is_2n_periodic() {
        let n = 1000;
        let mut st = kac_ring_new(n, 0.3, 0.0, MarkMode::FixedCount, 9).unwrap();
        assert_eq!(st.marked.iter().filter(|&&m| m).count(), 300);
        let start = st.colors.clone();
        for _ in 0..2 * n {
            kac_ring_step(&mut st);
        }
        assert_eq!(st.colors, start);
    }

    #[test]
    fn kac_ring_parameters() {
        assert!(kac_ring_new(10, 0.5, 0.0, MarkMode::FixedCount, 1).is_err());
        assert!(kac_ring_new(10, 0.1, 0.5, MarkMode::FixedCount, 1).is_err());
        let st = kac_ring_new(100_000, 0.2, 0.0, MarkMode::IidBernoulli, 2).unwrap();
        let frac = st.marked.iter().filter(|&&m| m).count() as f64 / 1e5;
        assert!((frac - 0.2).abs() < 4.0 * (0.16f64 / 1e5).sqrt());
    }

    #[test]
    fn kac_ring_noise_factor_with_fixed_marks() {
        // With Q fixed the noise multiplies the deterministic orbit by a
        // common sign, so |E X(t)| / |X_Q(t)| = (1 - 2p)^t.
        let (n, p, reps, t_max) = (200, 0.05, 20_000u64, 10usize);
        let marked = kac_ring_new(n, 0.1, 0.0, MarkMode::FixedCount, 5).unwrap().marked;
        let mut clean = kac_ring_with_marks(marked.clone(), 0.0, 0).unwrap();
        let mut orbit = Vec::new();
        for _ in 0..t_max {
            kac_ring_step(&mut clean);
            orbit.push(kac_ring_stat(&clean));
        }
        let mut sums = vec![0.0; t_max];
        for r in 0..reps {
            let mut st = kac_ring_with_marks(marked.clone(), p, r).unwrap();
            for s in sums.iter_mut() {
                kac_ring_step(&mut st);
                *s += kac_ring_stat(&st);
            }
        }
        let ts: Vec<f64> = (1..=t_max).map(|t| t as f64).collect();
        let ys: Vec<f64> = sums
            .iter()
            .zip(&orbit)
            .map(|(s, o)| math::ln((s / reps as f64 / o).abs()))
            .collect();
        let slope = crate::stats::least_squares(&ts, &ys).unwrap().0;
        let target = math::ln(1.0 - 2.0 * p);
        assert!((slope - target).abs() <= 0.05 * target.abs(), "{slope} vs {target}");
    }

    #[test]
    fn yule_counts() {
        let mut st = yule_new(0.3).unwrap();
        let mut rng = SplitMix64::new(3);
        for k in 2..=500u64 {
            yule_step(&mut st, &mut rng);
            assert_eq!(st.coin_counts.len() as u64, k);
            assert_eq!(st.coin_counts.iter().sum::<u64>(), 2 * k - 1);
        }
        let mut st = yule_new(0.999).unwrap();
        yule_step(&mut st, &mut rng);
        assert_eq!(st.coin_counts, vec![2, 1]);
        let h = yule_run(0.0, 1000, 1).unwrap();
        assert_eq!(h.iter().sum::<u64>(), 1000);
        assert!(yule_new(1.0).is_err());
    }

    #[test]
    fn zipf_params() {
        let (a, b, c) = zipf_mandelbrot_params(26).unwrap();
        assert!((a - 1.01158).abs() < 1e-5);
        assert!((b - 1.04).abs() < 1e-12);
        assert!(c > 0.0);
    }

    #[test]
    fn monkey_table_is_sorted() {
        let t = monkey_text(3, 10_000, 8).unwrap();
        assert_eq!(t[0].rank, 1);
        for w in t.windows(2) {
            assert!(w[0].count > w[1].count || w[0].count == w[1].count && w[0].word < w[1].word);
        }
        assert!(t.iter().all(|e| e.word.bytes().all(|b| (b'a'..b'd').contains(&b))));
        let letters: u64 = t.iter().map(|e| e.count * e.word.len() as u64).sum();
        assert!(letters <= 10_000);
    }

    #[test]
    fn monkey_single_letters_are_exchangeable() {
        let t = monkey_text(4, 400_000, 2).unwrap();
        let singles: Vec<u64> = t.iter().filter(|e| e.word.len() == 1).map(|e| e.count).collect();
        assert_eq!(singles.len(), 4);
        let mean = singles.iter().sum::<u64>() as f64 / 4.0;
        for &c in &singles {
            assert!((c as f64 - mean).abs() < 5.0 * mean.sqrt());
        }
    }
}
