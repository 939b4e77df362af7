//! Equilibria of mass-action networks: the complex-balance (unitarity)
//! condition, detailed balance, maximum-entropy projection onto conservation
//! slices, and exact analysis of small finite chains.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, Matrix};
use crate::math;
use crate::network::{conservation_laws, ConservationBasis, NetworkError, ReactionNetwork};
use crate::ssa::{IntensityConvention, Kinetics, SimError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EquilibriumError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("vector entry {index} is {value}; it must be positive and finite")]
    NonPositive { index: usize, value: f64 },
    #[error("expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("constraint slice is empty or has no interior point")]
    InfeasibleSlice,
    #[error("projection did not converge (gradient norm {gradient_norm})")]
    NoConvergence {
        gradient_norm: f64,
        best: ProjectionResult,
    },
    #[error("reachable state space exceeds {max_states} states")]
    StateSpaceOverflow { max_states: usize },
    #[error("chain is reducible")]
    Reducible,
    #[error("state {0} is transient or absorbing")]
    NotRecurrent(usize),
    #[error("state index {0} out of range")]
    BadState(usize),
    #[error("invalid argument: {0}")]
    Invalid(&'static str),
    #[error("distance {tv} still above target at time {max_time}")]
    NotMixed { max_time: f64, tv: f64 },
}

fn check_positive(v: &[f64]) -> Result<(), EquilibriumError> {
    match v.iter().enumerate().find(|(_, x)| !(**x > 0.0 && x.is_finite())) {
        Some((index, &value)) => Err(EquilibriumError::NonPositive { index, value }),
        None => Ok(()),
    }
}

fn dot_u(y: &[u32], u: &[f64]) -> f64 {
    y.iter().zip(u).map(|(&a, &b)| a as f64 * b).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitarityResult {
    pub xi: Vec<f64>,
    /// Max over complexes of `|in - out| / max(in, out)` at `xi`.
    pub residual: f64,
    pub feasible: bool,
    pub iterations: usize,
}

/// Per-complex flows at `xi = exp(u)`: complexes, reactions into and out of each.
struct Complexes {
    list: Vec<Vec<u32>>,
    inflow: Vec<Vec<usize>>,
    outflow: Vec<Vec<usize>>,
}

impl Complexes {
    fn new(net: &ReactionNetwork) -> Self {
        let mut ids: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let mut list = Vec::new();
        let mut id = |y: &Vec<u32>, list: &mut Vec<Vec<u32>>| {
            *ids.entry(y.clone()).or_insert_with(|| {
                list.push(y.clone());
                list.len() - 1
            })
        };
        let mut pairs = Vec::new();
        for r in net.reactions() {
            let a = id(&r.alpha, &mut list);
            let b = id(&r.beta, &mut list);
            pairs.push((a, b));
        }
        let mut inflow = vec![Vec::new(); list.len()];
        let mut outflow = vec![Vec::new(); list.len()];
        for (r, &(a, b)) in pairs.iter().enumerate() {
            outflow[a].push(r);
            inflow[b].push(r);
        }
        Self { list, inflow, outflow }
    }

    /// Natural logs of the in- and out-flows of every complex (`-inf` if none).
    fn log_flows(&self, net: &ReactionNetwork, u: &[f64]) -> Vec<(f64, f64)> {
        let rs = net.reactions();
        let log_sum = |idx: &[usize]| -> f64 {
            if idx.is_empty() {
                return f64::NEG_INFINITY;
            }
            let terms: Vec<f64> = idx.iter().map(|&r| math::ln(rs[r].rate) + dot_u(&rs[r].alpha, u)).collect();
            let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            m + math::ln(terms.iter().map(|t| math::exp(t - m)).sum())
        };
        (0..self.list.len())
            .map(|y| (log_sum(&self.inflow[y]), log_sum(&self.outflow[y])))
            .collect()
    }

    fn relative_residual(&self, net: &ReactionNetwork, u: &[f64]) -> f64 {
        self.log_flows(net, u)
            .into_iter()
            .map(|(i, o)| {
                if i == f64::NEG_INFINITY || o == f64::NEG_INFINITY {
                    return 1.0;
                }
                // |e^i - e^o| / max(e^i, e^o) = 1 - e^{-|i-o|}
                -libm::expm1(-math::abs(i - o))
            })
            .fold(0.0, f64::max)
    }
}

/// Moves `u` along conservation directions (which leave every complex
/// balance unchanged) to the canonical representative: `sum xi = 1` when the
/// all-ones vector is conserved, otherwise `u` orthogonal to the laws.
fn normalize_log(u: &mut [f64], basis: &ConservationBasis) {
    let m = u.len();
    if basis.is_empty() {
        return;
    }
    // Remove the component of u in span(basis).
    let k = basis.len();
    let b: Vec<Vec<f64>> = basis.vectors.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
    let mut gram = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum();
        }
    }
    let rhs: Vec<f64> = b.iter().map(|v| v.iter().zip(u.iter()).map(|(x, y)| x * y).sum()).collect();
    if let Some(coef) = linalg::solve_spd(&gram, &rhs) {
        for (c, v) in coef.iter().zip(&b) {
            for i in 0..m {
                u[i] -= c * v[i];
            }
        }
    }
    if basis.contains_all_ones(m) {
        let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shift = top + math::ln(u.iter().map(|x| math::exp(x - top)).sum());
        for x in u.iter_mut() {
            *x -= shift;
        }
    }
}

/// Finds `xi > 0` with equal in- and out-flow at every complex by
/// Levenberg–Marquardt on `u = ln xi` applied to `ln in_y - ln out_y`.
pub fn solve_unitarity(
    net: &ReactionNetwork,
    init: Option<&[f64]>,
    tol: f64,
) -> Result<UnitarityResult, EquilibriumError> {
    let m = net.species_count();
    let mut u = match init {
        Some(x) => {
            net.check_state(x.len())?;
            check_positive(x)?;
            x.iter().map(|&v| math::ln(v)).collect()
        }
        None => vec![0.0; m],
    };
    let cx = Complexes::new(net);
    let basis = conservation_laws(net);
    let structural = (0..cx.list.len()).any(|y| cx.inflow[y].is_empty() || cx.outflow[y].is_empty());
    let mut iterations = 0;
    if !structural {
        let rs = net.reactions();
        let mut damping = 1e-3;
        let cost = |u: &[f64]| -> f64 { cx.log_flows(net, u).iter().map(|(i, o)| (i - o) * (i - o)).sum::<f64>() * 0.5 };
        let mut f = cost(&u);
        for it in 0..500 {
            iterations = it + 1;
            let flows = cx.log_flows(net, &u);
            let res: Vec<f64> = flows.iter().map(|(i, o)| i - o).collect();
            if res.iter().all(|r| math::abs(*r) < 1e-14) {
                break;
            }
            // d ln in_y / du = softmax-weighted mean of the source complexes.
            let jac: Vec<Vec<f64>> = (0..cx.list.len())
                .map(|y| {
                    let mut row = vec![0.0; m];
                    for &r in &cx.inflow[y] {
                        let w = math::exp(math::ln(rs[r].rate) + dot_u(&rs[r].alpha, &u) - flows[y].0);
                        for (x, &a) in row.iter_mut().zip(&rs[r].alpha) {
                            *x += w * a as f64;
                        }
                    }
                    for (x, &b) in row.iter_mut().zip(&cx.list[y]) {
                        *x -= b as f64;
                    }
                    row
                })
                .collect();
            let mut jtj = Matrix::zeros(m, m);
            let mut jtr = vec![0.0; m];
            for (row, &r) in jac.iter().zip(&res) {
                for i in 0..m {
                    jtr[i] += row[i] * r;
                    for j in 0..m {
                        jtj[(i, j)] += row[i] * row[j];
                    }
                }
            }
            let mut improved = false;
            for _ in 0..60 {
                let mut a = jtj.clone();
                for i in 0..m {
                    a[(i, i)] += damping * (1.0 + jtj[(i, i)]);
                }
                let Some(step) = linalg::solve_spd(&a, &jtr) else {
                    damping *= 10.0;
                    continue;
                };
                let trial: Vec<f64> = u.iter().zip(&step).map(|(x, s)| x - s).collect();
                let ft = cost(&trial);
                if ft.is_finite() && ft < f {
                    u = trial;
                    f = ft;
                    damping = (damping * 0.3).max(1e-15);
                    improved = true;
                    break;
                }
                damping *= 10.0;
            }
            if !improved {
                break;
            }
        }
    }
    normalize_log(&mut u, &basis);
    let residual = if structural { 1.0 } else { cx.relative_residual(net, &u) };
    Ok(UnitarityResult {
        xi: u.iter().map(|&x| math::exp(x)).collect(),
        residual,
        feasible: residual <= tol,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairDefect {
    pub reactant: Vec<u32>,
    pub product: Vec<u32>,
    pub forward_flux: f64,
    pub reverse_flux: f64,
    /// `|forward - reverse| / max(forward, reverse)`.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetailedBalanceReport {
    pub balanced: bool,
    pub pairs: Vec<PairDefect>,
}

/// Compares the flux of every complex pair `alpha -> beta` with that of
/// `beta -> alpha` at `xi`. Parallel reactions between the same complexes
/// are summed.
pub fn check_detailed_balance(
    net: &ReactionNetwork,
    xi: &[f64],
    tol: f64,
) -> Result<DetailedBalanceReport, EquilibriumError> {
    net.check_state(xi.len())?;
    check_positive(xi)?;
    let u: Vec<f64> = xi.iter().map(|&x| math::ln(x)).collect();
    let mut flux: BTreeMap<(Vec<u32>, Vec<u32>), f64> = BTreeMap::new();
    for r in net.reactions() {
        *flux.entry((r.alpha.clone(), r.beta.clone())).or_insert(0.0) += r.rate * math::exp(dot_u(&r.alpha, &u));
    }
    let mut pairs = Vec::new();
    for ((a, b), &f) in &flux {
        let g = flux.get(&(b.clone(), a.clone())).copied().unwrap_or(0.0);
        if g > 0.0 && (b, a) < (a, b) {
            continue;
        }
        let defect = if f == g { 0.0 } else { math::abs(f - g) / f.max(g) };
        pairs.push(PairDefect {
            reactant: a.clone(),
            product: b.clone(),
            forward_flux: f,
            reverse_flux: g,
            defect,
        });
    }
    Ok(DetailedBalanceReport {
        balanced: pairs.iter().all(|p| p.defect <= tol),
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub c_star: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub kl_value: f64,
    pub constraint_defect: f64,
    pub iterations: usize,
}

/// Maximum-entropy point of the slice `{c >= 0 : <mu_k, c> = b_k}` relative
/// to `xi`, found by damped Newton on the convex dual
/// `phi(l) = sum_i xi_i exp(-(M^T l)_i) + <l, b>`, so `c_i = xi_i exp(-(M^T l)_i)`.
///
/// This minimizes `sum c ln(c/xi) - c + xi`. When the total `sum c` is
/// conserved it is the same point as the minimizer of `KL(c, xi)` and the
/// reported multipliers are shifted to the form `xi_i exp(-1 - (M^T l)_i)`;
/// otherwise only this form keeps `c*` an equilibrium of the mass-action flow.
pub fn entropy_project(
    xi: &[f64],
    basis: &ConservationBasis,
    b: &[f64],
) -> Result<ProjectionResult, EquilibriumError> {
    check_positive(xi)?;
    let m = xi.len();
    let k = basis.len();
    if b.len() != k {
        return Err(EquilibriumError::Dimension { expected: k, got: b.len() });
    }
    if let Some(v) = basis.vectors.iter().find(|v| v.len() != m) {
        return Err(EquilibriumError::Dimension { expected: m, got: v.len() });
    }
    if b.iter().any(|x| !x.is_finite()) {
        return Err(EquilibriumError::Invalid("constraint values must be finite"));
    }
    // A nonnegative law with a nonpositive target admits no interior point.
    for (v, &bk) in basis.vectors.iter().zip(b) {
        if v.iter().all(|&x| x >= 0) && bk <= 0.0 || v.iter().all(|&x| x <= 0) && bk >= 0.0 {
            return Err(EquilibriumError::InfeasibleSlice);
        }
    }
    let mu: Vec<Vec<f64>> = basis.vectors.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
    let ln_xi: Vec<f64> = xi.iter().map(|&x| math::ln(x)).collect();
    let primal = |l: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| {
                let s: f64 = (0..k).map(|j| l[j] * mu[j][i]).sum();
                math::exp(ln_xi[i] - s)
            })
            .collect()
    };
    let phi = |c: &[f64], l: &[f64]| -> f64 { c.iter().sum::<f64>() + l.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() };
    let gradient = |c: &[f64]| -> Vec<f64> {
        (0..k)
            .map(|j| b[j] - mu[j].iter().zip(c).map(|(x, y)| x * y).sum::<f64>())
            .collect()
    };
    let scale = b.iter().fold(1.0f64, |s, x| s.max(math::abs(*x)));
    let target = 1e-13 * scale;

    let mut l = vec![0.0; k];
    let mut c = primal(&l);
    let mut f = phi(&c, &l);
    let mut g = gradient(&c);
    let norm = |g: &[f64]| g.iter().fold(0.0f64, |s, x| s.max(math::abs(*x)));
    let mut iterations = 0;
    while iterations < 1000 && norm(&g) > target {
        iterations += 1;
        let mut h = Matrix::zeros(k, k);
        for a in 0..k {
            for bb in 0..k {
                h[(a, bb)] = (0..m).map(|i| mu[a][i] * mu[bb][i] * c[i]).sum();
            }
        }
        // g = b - M c is grad phi; the Newton step solves H d = -g.
        let Some(d) = linalg::solve_spd(&h, &g).or_else(|| linalg::solve(&h, &g)) else {
            return Err(EquilibriumError::InfeasibleSlice);
        };
        let d: Vec<f64> = d.into_iter().map(|x| -x).collect();
        let slope: f64 = d.iter().zip(&g).map(|(x, y)| x * y).sum::<f64>();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..80 {
            let trial: Vec<f64> = l.iter().zip(&d).map(|(x, s)| x + t * s).collect();
            let ct = primal(&trial);
            let ft = phi(&ct, &trial);
            // Near the optimum phi is flat to rounding; fall back to the gradient.
            let armijo = ft <= f + 1e-4 * t * slope;
            let closer = t == 1.0 && ft <= f + 1e-12 * math::abs(f) && norm(&gradient(&ct)) < norm(&g);
            if ft.is_finite() && (armijo || closer) {
                l = trial;
                c = ct;
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        g = gradient(&c);
        if !f.is_finite() || l.iter().any(|x| !x.is_finite() || math::abs(*x) > 1e6) {
            return Err(EquilibriumError::InfeasibleSlice);
        }
    }
    let gn = norm(&g);
    if basis.contains_all_ones(m) {
        // M^T theta = 1; shift so that c_i = xi_i exp(-1 - (M^T l)_i).
        let mut gram = Matrix::zeros(k, k);
        for a in 0..k {
            for bb in 0..k {
                gram[(a, bb)] = mu[a].iter().zip(&mu[bb]).map(|(x, y)| x * y).sum();
            }
        }
        let rhs: Vec<f64> = mu.iter().map(|v| v.iter().sum()).collect();
        if let Some(theta) = linalg::solve_spd(&gram, &rhs) {
            for (x, t) in l.iter_mut().zip(theta) {
                *x -= t;
            }
        }
    }
    let result = ProjectionResult {
        kl_value: c.iter().zip(xi).map(|(&a, &x)| math::xlogx_ratio(a, x)).sum(),
        c_star: c,
        multipliers: l,
        constraint_defect: gn,
        iterations,
    };
    if gn > 1e-10 * scale {
        return Err(EquilibriumError::NoConvergence {
            gradient_norm: gn,
            best: result,
        });
    }
    Ok(result)
}

/// Finite continuous-time chain on the states reachable from `n0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactChain {
    pub states: Vec<Vec<u64>>,
    pub scale: u64,
    /// Sparse off-diagonal rates `i -> j`, merged per target and sorted by `j`.
    pub transitions: Vec<Vec<(usize, f64)>>,
    /// Total exit rate `q_i = -Q_ii`.
    pub exit_rates: Vec<f64>,
    pub stationary: Vec<f64>,
    pub irreducible: bool,
    /// Membership in a closed communicating class.
    pub recurrent: Vec<bool>,
    class: Vec<usize>,
}

impl ExactChain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &[u64]) -> Option<usize> {
        self.states.iter().position(|s| s.as_slice() == state)
    }

    pub fn generator(&self) -> Matrix {
        let n = self.len();
        let mut q = Matrix::zeros(n, n);
        for (i, row) in self.transitions.iter().enumerate() {
            for &(j, r) in row {
                q[(i, j)] = r;
            }
            q[(i, i)] = -self.exit_rates[i];
        }
        q
    }

    /// `max_j |(pi Q)_j|`.
    pub fn balance_residual(&self) -> f64 {
        let mut flow: Vec<f64> = self.stationary.iter().zip(&self.exit_rates).map(|(p, q)| -p * q).collect();
        for (i, row) in self.transitions.iter().enumerate() {
            for &(j, r) in row {
                flow[j] += self.stationary[i] * r;
            }
        }
        flow.into_iter().fold(0.0, |s, x| s.max(math::abs(x)))
    }

    fn class_members(&self, s: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.class[i] == self.class[s]).collect()
    }
}

pub const DEFAULT_MAX_STATES: usize = 200_000;

/// Enumerates the states reachable from `n0` breadth-first, assembles the
/// generator from the stochastic propensities and solves for the
/// stationary law. A reducible chain gets the mixture of the closed-class
/// laws weighted by the absorption probabilities from `n0`.
pub fn exact_chain(
    net: &ReactionNetwork,
    n0: &[u64],
    scale: u64,
    max_states: usize,
) -> Result<ExactChain, EquilibriumError> {
    exact_chain_with(net, n0, scale, IntensityConvention::Kurtz, max_states)
}

pub fn exact_chain_with(
    net: &ReactionNetwork,
    n0: &[u64],
    scale: u64,
    convention: IntensityConvention,
    max_states: usize,
) -> Result<ExactChain, EquilibriumError> {
    net.check_state(n0.len())?;
    let kin = Kinetics::new(net, scale, convention)?;
    let deltas: Vec<Vec<i64>> = net.reactions().iter().map(|r| r.stoichiometry()).collect();
    let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut states = vec![n0.to_vec()];
    index.insert(n0.to_vec(), 0);
    let mut transitions: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for (r, d) in deltas.iter().enumerate() {
            let a = kin.propensity(r, &s);
            if a <= 0.0 {
                continue;
            }
            let next: Vec<u64> = s.iter().zip(d).map(|(&x, &dx)| (x as i64 + dx) as u64).collect();
            if next == s {
                continue;
            }
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if states.len() == max_states {
                        return Err(EquilibriumError::StateSpaceOverflow { max_states });
                    }
                    let j = states.len();
                    index.insert(next.clone(), j);
                    states.push(next);
                    queue.push_back(j);
                    j
                }
            };
            *out.entry(j).or_insert(0.0) += a;
        }
        if transitions.len() <= i {
            transitions.resize(i + 1, Vec::new());
        }
        transitions[i] = out.into_iter().collect();
    }
    transitions.resize(states.len(), Vec::new());
    let n = states.len();
    let exit_rates: Vec<f64> = transitions.iter().map(|row| row.iter().map(|&(_, r)| r).sum()).collect();

    let adj: Vec<Vec<usize>> = transitions.iter().map(|row| row.iter().map(|&(j, _)| j).collect()).collect();
    let (ncomp, class) = linalg::strongly_connected(&adj);
    let mut closed = vec![true; ncomp];
    for (i, row) in adj.iter().enumerate() {
        for &j in row {
            if class[j] != class[i] {
                closed[class[i]] = false;
            }
        }
    }
    let recurrent: Vec<bool> = class.iter().map(|&c| closed[c]).collect();
    let irreducible = ncomp == 1;

    let class_law = |c: usize| -> Vec<(usize, f64)> {
        let members: Vec<usize> = (0..n).filter(|&i| class[i] == c).collect();
        let local: BTreeMap<usize, usize> = members.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut rates = Matrix::zeros(members.len(), members.len());
        for (k, &i) in members.iter().enumerate() {
            for &(j, r) in &transitions[i] {
                rates[(k, local[&j])] = r;
            }
        }
        members.iter().copied().zip(linalg::gth_stationary(&rates)).collect()
    };

    let mut stationary = vec![0.0; n];
    if irreducible {
        for (i, p) in class_law(0) {
            stationary[i] = p;
        }
    } else {
        let closed_ids: Vec<usize> = (0..ncomp).filter(|&c| closed[c]).collect();
        let weights: Vec<f64> = if recurrent[0] {
            closed_ids.iter().map(|&c| if c == class[0] { 1.0 } else { 0.0 }).collect()
        } else {
            // Absorption probabilities from n0 through the transient states.
            let transient: Vec<usize> = (0..n).filter(|&i| !recurrent[i]).collect();
            let local: BTreeMap<usize, usize> = transient.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let t = transient.len();
            let mut a = Matrix::zeros(t, t);
            let mut rhs = Matrix::zeros(t, closed_ids.len());
            for (k, &i) in transient.iter().enumerate() {
                a[(k, k)] = exit_rates[i];
                for &(j, r) in &transitions[i] {
                    if let Some(&kj) = local.get(&j) {
                        a[(k, kj)] -= r;
                    } else {
                        let c = closed_ids.iter().position(|&c| c == class[j]).unwrap();
                        rhs[(k, c)] += r;
                    }
                }
            }
            let k0 = local[&0];
            (0..closed_ids.len())
                .map(|c| {
                    let col: Vec<f64> = (0..t).map(|k| rhs[(k, c)]).collect();
                    linalg::solve(&a, &col).map_or(0.0, |h| h[k0])
                })
                .collect()
        };
        for (&c, &w) in closed_ids.iter().zip(&weights) {
            if w > 0.0 {
                for (i, p) in class_law(c) {
                    stationary[i] += w * p;
                }
            }
        }
    }

    Ok(ExactChain {
        states,
        scale,
        transitions,
        exit_rates,
        stationary,
        irreducible,
        recurrent,
        class,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnTime {
    pub continuous_time: f64,
    pub jump_steps: f64,
}

/// Mean return times to `s` from the stationary law: `1/(pi_s q_s)` in
/// continuous time and `1/pihat_s` for the jump chain, `pihat ∝ pi q`.
pub fn mean_return_time(chain: &ExactChain, s: usize) -> Result<ReturnTime, EquilibriumError> {
    if s >= chain.len() {
        return Err(EquilibriumError::BadState(s));
    }
    if !chain.recurrent[s] || chain.exit_rates[s] <= 0.0 {
        return Err(EquilibriumError::NotRecurrent(s));
    }
    // Within the closed class of s the class law is pi restricted and renormalized.
    let members = chain.class_members(s);
    let mass: f64 = members.iter().map(|&i| chain.stationary[i]).sum();
    let (pi_s, flux_total) = if mass > 0.0 {
        let fl: f64 = members.iter().map(|&i| chain.stationary[i] * chain.exit_rates[i]).sum();
        (chain.stationary[s] / mass, fl / mass)
    } else {
        return first_passage_return_time(chain, s);
    };
    let q = chain.exit_rates[s];
    Ok(ReturnTime {
        continuous_time: 1.0 / (pi_s * q),
        jump_steps: flux_total / (pi_s * q),
    })
}

/// Mean return times to `s` by solving the first-passage linear systems of
/// the chain and its jump chain.
pub fn first_passage_return_time(chain: &ExactChain, s: usize) -> Result<ReturnTime, EquilibriumError> {
    if s >= chain.len() {
        return Err(EquilibriumError::BadState(s));
    }
    if !chain.recurrent[s] || chain.exit_rates[s] <= 0.0 {
        return Err(EquilibriumError::NotRecurrent(s));
    }
    let others: Vec<usize> = chain.class_members(s).into_iter().filter(|&i| i != s).collect();
    let local: BTreeMap<usize, usize> = others.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let t = others.len();
    // Continuous: q_i m_i - sum_{j != s} Q_ij m_j = 1. Jump: h_i - sum P_ij h_j = 1.
    let mut a = Matrix::zeros(t, t);
    let mut p = Matrix::zeros(t, t);
    for (k, &i) in others.iter().enumerate() {
        let q = chain.exit_rates[i];
        a[(k, k)] = q;
        p[(k, k)] = 1.0;
        for &(j, r) in &chain.transitions[i] {
            if let Some(&kj) = local.get(&j) {
                a[(k, kj)] -= r;
                p[(k, kj)] -= r / q;
            }
        }
    }
    let m = linalg::solve(&a, &vec![1.0; t]).ok_or(EquilibriumError::NotRecurrent(s))?;
    let h = linalg::solve(&p, &vec![1.0; t]).ok_or(EquilibriumError::NotRecurrent(s))?;
    let q = chain.exit_rates[s];
    let mut cont = 1.0 / q;
    let mut jump = 1.0;
    for &(j, r) in &chain.transitions[s] {
        if let Some(&kj) = local.get(&j) {
            cont += r / q * m[kj];
            jump += r / q * h[kj];
        }
    }
    Ok(ReturnTime {
        continuous_time: cont,
        jump_steps: jump,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingOptions {
    pub grid_dt: f64,
    pub max_time: f64,
}

impl Default for MixingOptions {
    fn default() -> Self {
        Self {
            grid_dt: 0.01,
            max_time: 1e6,
        }
    }
}

/// Poisson tail mass left out of each uniformization step.
pub const UNIFORMIZATION_TAIL: f64 = 1e-12;

/// `p e^{Q t}` by uniformization, truncating the Poisson series once the
/// omitted mass is at most [`UNIFORMIZATION_TAIL`].
pub fn transient_law(chain: &ExactChain, p0: &[f64], t: f64) -> Vec<f64> {
    let lambda = chain.exit_rates.iter().copied().fold(0.0, f64::max);
    if lambda == 0.0 || t == 0.0 {
        return p0.to_vec();
    }
    let sub = math::floor(lambda * t / 50.0) as usize + 1;
    let h = t / sub as f64;
    let mut p = p0.to_vec();
    for _ in 0..sub {
        p = uniformized_step(chain, &p, lambda, h);
    }
    p
}

fn uniformized_step(chain: &ExactChain, p: &[f64], lambda: f64, h: f64) -> Vec<f64> {
    let x = lambda * h;
    let mut weight = math::exp(-x);
    let mut acc = weight;
    let mut out: Vec<f64> = p.iter().map(|v| v * weight).collect();
    let mut v = p.to_vec();
    let mut k = 0u64;
    while 1.0 - acc > UNIFORMIZATION_TAIL && k < 100_000 {
        k += 1;
        // v <- v P with P = I + Q / lambda.
        let mut next: Vec<f64> = v.iter().zip(&chain.exit_rates).map(|(a, q)| a * (1.0 - q / lambda)).collect();
        for (i, row) in chain.transitions.iter().enumerate() {
            if v[i] == 0.0 {
                continue;
            }
            for &(j, r) in row {
                next[j] += v[i] * r / lambda;
            }
        }
        v = next;
        weight *= x / k as f64;
        acc += weight;
        for (o, a) in out.iter_mut().zip(&v) {
            *o += weight * a;
        }
    }
    out
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| math::abs(a - b)).sum::<f64>()
}

/// First grid time `k * grid_dt` with `TV(p(t), pi) <= eps`.
pub fn tv_mixing(chain: &ExactChain, p0: &[f64], eps: f64, opts: &MixingOptions) -> Result<f64, EquilibriumError> {
    if !chain.irreducible {
        return Err(EquilibriumError::Reducible);
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(EquilibriumError::Invalid("eps must lie in (0, 1)"));
    }
    if !(opts.grid_dt > 0.0 && opts.max_time > 0.0) {
        return Err(EquilibriumError::Invalid("grid spacing and horizon must be positive"));
    }
    if p0.len() != chain.len() {
        return Err(EquilibriumError::Dimension {
            expected: chain.len(),
            got: p0.len(),
        });
    }
    if p0.iter().any(|x| !(*x >= 0.0)) || math::abs(p0.iter().sum::<f64>() - 1.0) > 1e-9 {
        return Err(EquilibriumError::Invalid("initial law must be a probability vector"));
    }
    let mut p = p0.to_vec();
    let mut tv = total_variation(&p, &chain.stationary);
    let mut k = 0u64;
    while tv > eps {
        k += 1;
        let t = k as f64 * opts.grid_dt;
        if t > opts.max_time {
            return Err(EquilibriumError::NotMixed {
                max_time: opts.max_time,
                tv,
            });
        }
        p = transient_law(chain, &p, opts.grid_dt);
        tv = total_variation(&p, &chain.stationary);
    }
    Ok(k as f64 * opts.grid_dt)
}

/// Normalized product-form law `prod_i (N xi_i)^{n_i} / n_i!` over the states
/// of `chain`.
pub fn product_form_law(chain: &ExactChain, xi: &[f64]) -> Result<Vec<f64>, EquilibriumError> {
    check_positive(xi)?;
    if let Some(s) = chain.states.first() {
        if s.len() != xi.len() {
            return Err(EquilibriumError::Dimension {
                expected: s.len(),
                got: xi.len(),
            });
        }
    }
    let ln_nxi: Vec<f64> = xi.iter().map(|&x| math::ln(chain.scale as f64 * x)).collect();
    let logs: Vec<f64> = chain
        .states
        .iter()
        .map(|s| {
            s.iter()
                .zip(&ln_nxi)
                .map(|(&n, &l)| n as f64 * l - math::ln_gamma(n as f64 + 1.0))
                .sum()
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| math::exp(l - top)).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}
