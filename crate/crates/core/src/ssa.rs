//! Exact Markov-jump simulation of a [`ReactionNetwork`] at population scale `N`.
//!
//! Reaction `r` fires at intensity `N^e K_r prod_i n_i (n_i - 1) ... (n_i - alpha_i + 1)`
//! with `e = 1 - sum alpha` ([`IntensityConvention::Kurtz`], the default) or
//! `e = -sum alpha` ([`IntensityConvention::PaperLiteral`]). Under the Kurtz
//! convention `n(t)/N` follows the mass-action ODE on an `O(1)` time scale.
//!
//! Events are generated by the direct method: one exponential dwell with the
//! total rate, then a categorical pick found by a cumulative-sum scan in
//! declaration order (first `r` with `u * total < cumsum_r`).

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::network::{NetworkError, ReactionNetwork};
use crate::rng::{self, SplitMix64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("scale N must be at least 1")]
    ZeroScale,
    #[error("invalid simulation config: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntensityConvention {
    /// `N^(1 - sum alpha)`: unary reactions fire at `K n`, the mean-field limit
    /// lives on an `O(1)` time scale.
    #[default]
    Kurtz,
    /// `N^(-sum alpha)` exactly as printed in the source formula.
    PaperLiteral,
}

impl IntensityConvention {
    pub fn exponent(self, order: u32) -> i32 {
        match self {
            IntensityConvention::Kurtz => 1 - order as i32,
            IntensityConvention::PaperLiteral => -(order as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub horizon: f64,
    pub sample_dt: f64,
    pub max_events: u64,
    pub convention: IntensityConvention,
}

impl SimConfig {
    pub fn new(seed: u64, horizon: f64, sample_dt: f64) -> Self {
        Self {
            seed,
            horizon,
            sample_dt,
            max_events: u64::MAX,
            convention: IntensityConvention::Kurtz,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SimError::Config("horizon must be positive and finite"));
        }
        if !(self.sample_dt > 0.0 && self.sample_dt <= self.horizon) {
            return Err(SimError::Config("sample_dt must lie in (0, horizon]"));
        }
        if self.max_events == 0 {
            return Err(SimError::Config("max_events must be at least 1"));
        }
        Ok(())
    }

    /// Sampling grid `0, dt, 2 dt, ...` closed by `horizon`.
    pub fn grid(&self) -> Vec<f64> {
        let k = math::floor(self.horizon / self.sample_dt + 1e-9) as u64;
        let mut grid: Vec<f64> = (0..=k).map(|i| i as f64 * self.sample_dt).collect();
        let last = *grid.last().unwrap();
        if last > self.horizon {
            *grid.last_mut().unwrap() = self.horizon;
        } else if self.horizon - last > 1e-9 * self.horizon {
            grid.push(self.horizon);
        }
        grid
    }
}

/// Population vector `n` at scale `N` and time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountState {
    pub counts: Vec<u64>,
    pub scale: u64,
    pub time: f64,
}

impl CountState {
    pub fn new(counts: Vec<u64>, scale: u64) -> Self {
        Self { counts, scale, time: 0.0 }
    }

    pub fn concentrations(&self) -> Vec<f64> {
        let n = self.scale as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Per-reaction data compiled from a network for fast propensity evaluation.
#[derive(Debug, Clone)]
pub struct Kinetics {
    factors: Vec<f64>,
    reactants: Vec<Vec<(usize, u32)>>,
    deltas: Vec<Vec<(usize, i64)>>,
    dependents: Vec<Vec<usize>>,
}

impl Kinetics {
    pub fn new(net: &ReactionNetwork, scale: u64, convention: IntensityConvention) -> Result<Self, SimError> {
        if scale == 0 {
            return Err(SimError::ZeroScale);
        }
        let n = scale as f64;
        let reactions = net.reactions();
        let factors = reactions
            .iter()
            .map(|r| r.rate * math::powi_signed(n, convention.exponent(r.order())))
            .collect();
        let reactants: Vec<Vec<(usize, u32)>> = reactions
            .iter()
            .map(|r| {
                r.alpha
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0)
                    .map(|(i, &a)| (i, a))
                    .collect()
            })
            .collect();
        let deltas: Vec<Vec<(usize, i64)>> = reactions
            .iter()
            .map(|r| {
                r.stoichiometry()
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, d)| d != 0)
                    .collect()
            })
            .collect();
        let dependents = deltas
            .iter()
            .map(|d| {
                (0..reactions.len())
                    .filter(|&s| reactants[s].iter().any(|&(i, _)| d.iter().any(|&(j, _)| i == j)))
                    .collect()
            })
            .collect();
        Ok(Self {
            factors,
            reactants,
            deltas,
            dependents,
        })
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    #[inline]
    pub fn propensity(&self, r: usize, counts: &[u64]) -> f64 {
        let mut a = self.factors[r];
        for &(i, k) in &self.reactants[r] {
            a *= math::falling_factorial(counts[i], k);
        }
        a
    }

    pub fn fill(&self, counts: &[u64], rates: &mut [f64]) {
        for (r, rate) in rates.iter_mut().enumerate() {
            *rate = self.propensity(r, counts);
        }
    }

    #[inline]
    fn apply(&self, r: usize, counts: &mut [u64]) {
        for &(i, d) in &self.deltas[r] {
            let next = counts[i] as i64 + d;
            debug_assert!(next >= 0, "reaction {r} drove species {i} negative");
            counts[i] = next as u64;
        }
    }
}

/// Intensities of every reaction at `counts`.
pub fn propensities(
    net: &ReactionNetwork,
    counts: &[u64],
    scale: u64,
    convention: IntensityConvention,
) -> Result<Vec<f64>, SimError> {
    net.check_state(counts.len())?;
    let kin = Kinetics::new(net, scale, convention)?;
    let mut rates = vec![0.0; kin.len()];
    kin.fill(counts, &mut rates);
    Ok(rates)
}

/// Index of the first reaction whose cumulative rate strictly exceeds `target`.
#[inline]
fn choose(rates: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (r, &a) in rates.iter().enumerate() {
        if a > 0.0 {
            acc += a;
            last_positive = r;
            if target < acc {
                return r;
            }
        }
    }
    last_positive
}

/// Result of one jump. `reaction == None` means the state is absorbing and
/// `dwell` is infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub dwell: f64,
    pub reaction: Option<usize>,
    pub next: CountState,
}

/// One exact jump from `state`, recomputing every propensity.
pub fn step(
    net: &ReactionNetwork,
    state: &CountState,
    convention: IntensityConvention,
    rng: &mut SplitMix64,
) -> Result<Step, SimError> {
    let mut sim = Simulator::new(net, &state.counts, state.scale, convention)?;
    sim.time = state.time;
    Ok(match sim.draw(rng) {
        None => Step {
            dwell: f64::INFINITY,
            reaction: None,
            next: state.clone(),
        },
        Some((dwell, r)) => {
            sim.apply(r, dwell);
            Step {
                dwell,
                reaction: Some(r),
                next: CountState {
                    counts: sim.counts,
                    scale: state.scale,
                    time: sim.time,
                },
            }
        }
    })
}

/// Incremental direct-method engine. After a jump only the propensities of
/// reactions that consume a changed species are recomputed.
#[derive(Debug, Clone)]
pub struct Simulator {
    kin: Kinetics,
    counts: Vec<u64>,
    rates: Vec<f64>,
    time: f64,
    scale: u64,
}

impl Simulator {
    pub fn new(
        net: &ReactionNetwork,
        n0: &[u64],
        scale: u64,
        convention: IntensityConvention,
    ) -> Result<Self, SimError> {
        net.check_state(n0.len())?;
        let kin = Kinetics::new(net, scale, convention)?;
        let mut rates = vec![0.0; kin.len()];
        kin.fill(n0, &mut rates);
        Ok(Self {
            kin,
            counts: n0.to_vec(),
            rates,
            time: 0.0,
            scale,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Draws the next dwell and reaction without applying them; `None` when absorbed.
    #[inline]
    pub fn draw(&self, rng: &mut SplitMix64) -> Option<(f64, usize)> {
        let total = self.total_rate();
        if !(total > 0.0) {
            return None;
        }
        let dwell = rng.exp(total);
        let r = choose(&self.rates, rng.next_f64() * total);
        Some((dwell, r))
    }

    #[inline]
    pub fn apply(&mut self, r: usize, dwell: f64) {
        self.kin.apply(r, &mut self.counts);
        for &s in &self.kin.dependents[r] {
            self.rates[s] = self.kin.propensity(s, &self.counts);
        }
        self.time += dwell;
    }

    /// Draws and applies one jump; returns `(dwell, reaction)` or `None` when absorbed.
    #[inline]
    pub fn fire(&mut self, rng: &mut SplitMix64) -> Option<(f64, usize)> {
        let (dwell, r) = self.draw(rng)?;
        self.apply(r, dwell);
        Some((dwell, r))
    }
}

/// Grid-sampled path: sample `k` is the state at `times[k]` (right-continuous).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub species: usize,
    pub scale: u64,
    pub times: Vec<f64>,
    counts: Vec<u64>,
    pub jump_count: u64,
    pub seed: u64,
    /// The event cap was hit before the horizon.
    pub truncated: bool,
    /// Time at which an absorbing state was entered, if any.
    pub absorbed_at: Option<f64>,
}

impl Trajectory {
    fn empty(species: usize, scale: u64, seed: u64) -> Self {
        Self {
            species,
            scale,
            times: Vec::new(),
            counts: Vec::new(),
            jump_count: 0,
            seed,
            truncated: false,
            absorbed_at: None,
        }
    }

    fn push(&mut self, t: f64, counts: &[u64]) {
        self.times.push(t);
        self.counts.extend_from_slice(counts);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sample(&self, k: usize) -> (f64, &[u64]) {
        (self.times[k], &self.counts[k * self.species..(k + 1) * self.species])
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, &[u64])> + '_ {
        (0..self.len()).map(|k| self.sample(k))
    }

    pub fn initial(&self) -> &[u64] {
        self.sample(0).1
    }

    pub fn terminal(&self) -> &[u64] {
        self.sample(self.len() - 1).1
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

/// A continuous-time jump process over count vectors that can be driven by
/// [`record_path`]. `draw` must consume randomness as: one exponential dwell,
/// then whatever picks the event.
pub trait JumpProcess {
    fn counts(&self) -> &[u64];
    fn time(&self) -> f64;
    /// Next `(dwell, event)` without applying it; `None` when absorbed.
    fn draw(&self, rng: &mut SplitMix64) -> Option<(f64, usize)>;
    fn apply(&mut self, event: usize, dwell: f64);
}

impl JumpProcess for Simulator {
    fn counts(&self) -> &[u64] {
        &self.counts
    }

    fn time(&self) -> f64 {
        self.time
    }

    #[inline]
    fn draw(&self, rng: &mut SplitMix64) -> Option<(f64, usize)> {
        Simulator::draw(self, rng)
    }

    #[inline]
    fn apply(&mut self, event: usize, dwell: f64) {
        Simulator::apply(self, event, dwell)
    }
}

/// Runs `process` to `cfg.horizon` and samples it right-continuously on
/// `cfg.grid()`. After absorption the state is held to the horizon; on
/// hitting `cfg.max_events` the path stops early and is flagged.
pub fn record_path<P: JumpProcess>(mut process: P, scale: u64, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let grid = cfg.grid();
    let mut traj = Trajectory::empty(process.counts().len(), scale, cfg.seed);
    let mut next = 0;

    loop {
        if traj.jump_count == cfg.max_events {
            traj.truncated = true;
            let t = process.time();
            while next < grid.len() && grid[next] <= t {
                traj.push(grid[next], process.counts());
                next += 1;
            }
            if traj.times.last() != Some(&t) && t > 0.0 {
                traj.push(t, process.counts());
            }
            break;
        }
        let Some((dwell, r)) = process.draw(&mut rng) else {
            traj.absorbed_at = Some(process.time());
            for &t in &grid[next..] {
                traj.push(t, process.counts());
            }
            break;
        };
        let t_next = process.time() + dwell;
        while next < grid.len() && grid[next] < t_next {
            traj.push(grid[next], process.counts());
            next += 1;
        }
        if next == grid.len() {
            break;
        }
        process.apply(r, dwell);
        traj.jump_count += 1;
    }
    Ok(traj)
}

/// Simulates one path with the stream keyed by `cfg.seed`.
pub fn simulate(net: &ReactionNetwork, n0: &[u64], scale: u64, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let sim = Simulator::new(net, n0, scale, cfg.convention)?;
    record_path(sim, scale, cfg)
}

/// Replica `index` of an ensemble rooted at `cfg.seed`.
pub fn simulate_replica(
    net: &ReactionNetwork,
    n0: &[u64],
    scale: u64,
    cfg: &SimConfig,
    index: u64,
) -> Result<Trajectory, SimError> {
    let cfg = SimConfig {
        seed: rng::split(cfg.seed, index),
        ..cfg.clone()
    };
    simulate(net, n0, scale, &cfg)
}

/// Sequential ensemble; replica `r` uses seed `split(cfg.seed, r)`.
pub fn ensemble(
    net: &ReactionNetwork,
    n0: &[u64],
    scale: u64,
    cfg: &SimConfig,
    replicas: u64,
) -> Result<Vec<Trajectory>, SimError> {
    if replicas == 0 {
        return Err(SimError::Config("replicas must be at least 1"));
    }
    (0..replicas)
        .map(|r| simulate_replica(net, n0, scale, cfg, r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;

    fn ehrenfest() -> ReactionNetwork {
        parse_network("A -> B @ 1\nB -> A @ 1").unwrap()
    }

    fn lv() -> ReactionNetwork {
        parse_network("R -> 2 R @ 1\nW -> 0 @ 1\nR + W -> 2 W @ 1").unwrap()
    }

    #[test]
    fn unary_rates_are_per_capita() {
        let rates = propensities(&ehrenfest(), &[10, 0], 10, IntensityConvention::Kurtz).unwrap();
        assert_eq!(rates, vec![10.0, 0.0]);
    }

    #[test]
    fn binary_rate_is_scaled_by_inverse_n() {
        let rates = propensities(&lv(), &[30, 20], 100, IntensityConvention::Kurtz).unwrap();
        assert!((rates[2] - 6.0).abs() < 1e-12);
        assert_eq!(rates[0], 30.0);
        let literal = propensities(&lv(), &[30, 20], 100, IntensityConvention::PaperLiteral).unwrap();
        assert!((literal[2] - 0.06).abs() < 1e-15);
        assert!((literal[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn missing_reactant_gives_zero_rate() {
        let net = parse_network("2 A -> B @ 5").unwrap();
        let rates = propensities(&net, &[1, 0], 1, IntensityConvention::Kurtz).unwrap();
        assert_eq!(rates, vec![0.0]);
        assert!(propensities(&net, &[1], 1, IntensityConvention::Kurtz).is_err());
        assert_eq!(
            propensities(&net, &[1, 0], 0, IntensityConvention::Kurtz),
            Err(SimError::ZeroScale)
        );
    }

    #[test]
    fn absorbing_step() {
        let net = parse_network("A -> B @ 1").unwrap();
        let state = CountState::new(vec![0, 3], 3);
        let s = step(&net, &state, IntensityConvention::Kurtz, &mut SplitMix64::new(1)).unwrap();
        assert_eq!(s.reaction, None);
        assert!(s.dwell.is_infinite());
        assert_eq!(s.next, state);
    }

    #[test]
    fn single_enabled_reaction_fires() {
        let state = CountState::new(vec![1, 0], 1);
        let s = step(&ehrenfest(), &state, IntensityConvention::Kurtz, &mut SplitMix64::new(9)).unwrap();
        assert_eq!(s.reaction, Some(0));
        assert_eq!(s.next.counts, vec![0, 1]);
        assert!(s.dwell > 0.0 && s.next.time == s.dwell);
    }

    #[test]
    fn step_sequence_is_deterministic_and_matches_engine() {
        let net = lv();
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        let mut state = CountState::new(vec![30, 20], 50);
        let mut sim = Simulator::new(&net, &state.counts, 50, IntensityConvention::Kurtz).unwrap();
        for _ in 0..200 {
            let s = step(&net, &state, IntensityConvention::Kurtz, &mut a).unwrap();
            let fired = sim.fire(&mut b);
            assert_eq!(fired, s.reaction.map(|r| (s.dwell, r)));
            state = s.next;
            assert_eq!(state.counts, sim.counts());
            if fired.is_none() {
                break;
            }
        }
    }

    #[test]
    fn absorbing_initial_state_is_constant_to_horizon() {
        let net = parse_network("A -> B @ 1").unwrap();
        let cfg = SimConfig::new(1, 2.0, 0.5);
        let traj = simulate(&net, &[0, 4], 4, &cfg).unwrap();
        assert_eq!(traj.times, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(traj.samples().all(|(_, c)| c == [0, 4]));
        assert_eq!(traj.absorbed_at, Some(0.0));
        assert_eq!(traj.jump_count, 0);
    }

    #[test]
    fn grid_closes_at_horizon() {
        let cfg = SimConfig::new(0, 1.0, 0.3);
        assert_eq!(cfg.grid().len(), 5);
        assert_eq!(*cfg.grid().last().unwrap(), 1.0);
        let cfg = SimConfig::new(0, 1.0, 0.1);
        assert_eq!(cfg.grid().len(), 11);
    }

    #[test]
    fn truncation_is_flagged_not_an_error() {
        let mut cfg = SimConfig::new(3, 100.0, 1.0);
        cfg.max_events = 5;
        let traj = simulate(&ehrenfest(), &[50, 50], 100, &cfg).unwrap();
        assert!(traj.truncated);
        assert_eq!(traj.jump_count, 5);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn invalid_configs() {
        let net = ehrenfest();
        assert!(simulate(&net, &[1, 0], 1, &SimConfig::new(0, 0.0, 0.1)).is_err());
        assert!(simulate(&net, &[1, 0], 1, &SimConfig::new(0, 1.0, 2.0)).is_err());
        assert!(ensemble(&net, &[1, 0], 1, &SimConfig::new(0, 1.0, 0.5), 0).is_err());
    }

    #[test]
    fn ensemble_of_one_is_split_seed_zero() {
        let net = ehrenfest();
        let cfg = SimConfig::new(77, 3.0, 0.25);
        let ens = ensemble(&net, &[5, 5], 10, &cfg, 1).unwrap();
        let direct = simulate(&net, &[5, 5], 10, &SimConfig { seed: rng::split(77, 0), ..cfg.clone() }).unwrap();
        assert_eq!(ens[0], direct);
        assert_eq!(ens, ensemble(&net, &[5, 5], 10, &cfg, 1).unwrap());
    }

    #[test]
    fn reaction_choice_frequencies_match_rates() {
        // Frozen state: draws from the same propensity vector.
        let net = parse_network("A -> B @ 1\nA -> C @ 2\nB -> A @ 0.5\nC -> 0 @ 3").unwrap();
        let sim = Simulator::new(&net, &[4, 3, 2], 1, IntensityConvention::Kurtz).unwrap();
        let total = sim.total_rate();
        let mut rng = SplitMix64::new(5);
        let draws = 100_000;
        let mut hits = [0u64; 4];
        for _ in 0..draws {
            hits[sim.draw(&mut rng).unwrap().1] += 1;
        }
        for (r, &h) in hits.iter().enumerate() {
            let p = sim.rates()[r] / total;
            let sd = (draws as f64 * p * (1.0 - p)).sqrt();
            assert!((h as f64 - draws as f64 * p).abs() < 4.0 * sd, "reaction {r}: {h}");
        }
    }
}
