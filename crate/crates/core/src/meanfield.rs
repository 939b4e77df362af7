//! Mass-action (Guldberg–Waage) limit of a reaction network:
//! `dc_i/dt = sum_r (beta_ri - alpha_ri) K_r prod_j c_j^alpha_rj`, with `0^0 = 1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::network::{NetworkError, ReactionNetwork};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeanFieldError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("concentration {index} is {value}; concentrations must be finite and nonnegative")]
    InvalidConcentration { index: usize, value: f64 },
    #[error("reference vector entry {index} is {value}; it must be positive")]
    NonPositiveReference { index: usize, value: f64 },
    #[error("vectors have different lengths ({0} vs {1})")]
    Dimension(usize, usize),
    #[error("state became non-finite; last valid time {t_last}")]
    NonFinite { t_last: f64 },
    #[error("invalid ODE config: {0}")]
    Config(&'static str),
}

/// Nonnegative concentration vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcVector(Vec<f64>);

impl ConcVector {
    pub fn new(values: Vec<f64>) -> Result<Self, MeanFieldError> {
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(MeanFieldError::InvalidConcentration { index, value });
        }
        Ok(Self(values))
    }

    /// `n / N`.
    pub fn from_counts(counts: &[u64], scale: u64) -> Self {
        Self(counts.iter().map(|&c| c as f64 / scale as f64).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl core::ops::Deref for ConcVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OdeMethod {
    #[default]
    Rk4Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeConfig {
    pub step_dt: f64,
    pub method: OdeMethod,
    /// Components that fall below this value after a step are reset to zero.
    pub positivity_floor: f64,
    /// Keep every `record_every`-th step (the final state is always kept).
    pub record_every: usize,
}

impl OdeConfig {
    pub fn new(step_dt: f64) -> Self {
        Self {
            step_dt,
            method: OdeMethod::Rk4Fixed,
            positivity_floor: 0.0,
            record_every: 1,
        }
    }
}

/// Compiled mass-action right-hand side.
#[derive(Debug, Clone)]
pub struct MassAction {
    species: usize,
    rates: Vec<f64>,
    reactants: Vec<Vec<(usize, u32)>>,
    deltas: Vec<Vec<(usize, f64)>>,
}

impl MassAction {
    pub fn new(net: &ReactionNetwork) -> Self {
        let reactions = net.reactions();
        Self {
            species: net.species_count(),
            rates: reactions.iter().map(|r| r.rate).collect(),
            reactants: reactions
                .iter()
                .map(|r| {
                    r.alpha
                        .iter()
                        .enumerate()
                        .filter(|(_, &a)| a > 0)
                        .map(|(i, &a)| (i, a))
                        .collect()
                })
                .collect(),
            deltas: reactions
                .iter()
                .map(|r| {
                    r.stoichiometry()
                        .into_iter()
                        .enumerate()
                        .filter(|&(_, d)| d != 0)
                        .map(|(i, d)| (i, d as f64))
                        .collect()
                })
                .collect(),
        }
    }

    /// Flux `K_r prod_j c_j^alpha_rj` of reaction `r`.
    #[inline]
    pub fn flux(&self, r: usize, c: &[f64]) -> f64 {
        let mut f = self.rates[r];
        for &(i, a) in &self.reactants[r] {
            f *= math::powi(c[i], a);
        }
        f
    }

    pub fn eval_into(&self, c: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for r in 0..self.rates.len() {
            let f = self.flux(r, c);
            if f == 0.0 {
                continue;
            }
            for &(i, d) in &self.deltas[r] {
                out[i] += d * f;
            }
        }
    }

    pub fn eval(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.species];
        self.eval_into(c, &mut out);
        out
    }
}

/// Mass-action right-hand side at `c`.
pub fn gw_rhs(net: &ReactionNetwork, c: &ConcVector) -> Result<Vec<f64>, MeanFieldError> {
    net.check_state(c.len())?;
    Ok(MassAction::new(net).eval(c))
}

/// Deterministic path `(t, c(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdePath {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Number of component resets performed by the positivity clamp.
    pub clamps: u64,
}

impl OdePath {
    pub fn last(&self) -> (f64, &[f64]) {
        (*self.times.last().unwrap(), self.states.last().unwrap())
    }

    /// Linear interpolation at time `t` inside the recorded range.
    pub fn at(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.states[0].clone();
        }
        if k == self.times.len() {
            return self.states[k - 1].clone();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.states[k - 1]
            .iter()
            .zip(&self.states[k])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }
}

fn rk4_step(f: &MassAction, c: &[f64], h: f64, buf: &mut [Vec<f64>; 5]) -> Vec<f64> {
    let [k1, k2, k3, k4, tmp] = buf;
    f.eval_into(c, k1);
    for i in 0..c.len() {
        tmp[i] = c[i] + 0.5 * h * k1[i];
    }
    f.eval_into(tmp, k2);
    for i in 0..c.len() {
        tmp[i] = c[i] + 0.5 * h * k2[i];
    }
    f.eval_into(tmp, k3);
    for i in 0..c.len() {
        tmp[i] = c[i] + h * k3[i];
    }
    f.eval_into(tmp, k4);
    (0..c.len())
        .map(|i| c[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Classical fixed-step RK4 from `c0` over `[0, horizon]`. The final step is
/// shortened to land exactly on `horizon`.
pub fn integrate(
    net: &ReactionNetwork,
    c0: &ConcVector,
    horizon: f64,
    cfg: &OdeConfig,
) -> Result<OdePath, MeanFieldError> {
    net.check_state(c0.len())?;
    if !(cfg.step_dt > 0.0 && cfg.step_dt.is_finite()) {
        return Err(MeanFieldError::Config("step_dt must be positive"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(MeanFieldError::Config("horizon must be positive"));
    }
    if cfg.record_every == 0 {
        return Err(MeanFieldError::Config("record_every must be at least 1"));
    }
    let f = MassAction::new(net);
    let m = c0.len();
    let mut buf = [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    let steps = {
        let s = math::floor(horizon / cfg.step_dt + 1e-9) as u64;
        if (horizon - s as f64 * cfg.step_dt) > 1e-12 * horizon {
            s + 1
        } else {
            s.max(1)
        }
    };
    let mut path = OdePath {
        times: vec![0.0],
        states: vec![c0.to_vec()],
        clamps: 0,
    };
    let mut c = c0.to_vec();
    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = if k == steps { horizon } else { k as f64 * cfg.step_dt };
        let mut next = rk4_step(&f, &c, t_next - t, &mut buf);
        if next.iter().any(|x| !x.is_finite()) {
            return Err(MeanFieldError::NonFinite { t_last: t });
        }
        for x in &mut next {
            if *x < cfg.positivity_floor && *x != 0.0 {
                *x = 0.0;
                path.clamps += 1;
            }
        }
        c = next;
        t = t_next;
        if k % cfg.record_every as u64 == 0 || k == steps {
            path.times.push(t);
            path.states.push(c.clone());
        }
    }
    Ok(path)
}

/// `KL(c, xi) = sum_i c_i ln(c_i / xi_i)` with `0 ln 0 = 0`.
pub fn lyapunov_kl(c: &[f64], xi: &[f64]) -> Result<f64, MeanFieldError> {
    if c.len() != xi.len() {
        return Err(MeanFieldError::Dimension(c.len(), xi.len()));
    }
    if let Some((index, &value)) = xi.iter().enumerate().find(|(_, x)| !(**x > 0.0)) {
        return Err(MeanFieldError::NonPositiveReference { index, value });
    }
    if let Some((index, &value)) = c.iter().enumerate().find(|(_, x)| !(**x >= 0.0)) {
        return Err(MeanFieldError::InvalidConcentration { index, value });
    }
    Ok(c.iter().zip(xi).map(|(&a, &b)| math::xlogx_ratio(a, b)).sum())
}

/// Predator–prey first integral `mu6 ln c_prey + mu3 ln c_pred - K (c_prey + c_pred)`.
pub fn lv_first_integral(c: &[f64], mu3: f64, mu6: f64, k: f64) -> Result<f64, MeanFieldError> {
    if c.len() != 2 {
        return Err(MeanFieldError::Dimension(c.len(), 2));
    }
    if let Some((index, &value)) = c.iter().enumerate().find(|(_, x)| !(**x > 0.0)) {
        return Err(MeanFieldError::InvalidConcentration { index, value });
    }
    Ok(mu6 * math::ln(c[0]) + mu3 * math::ln(c[1]) - k * (c[0] + c[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;

    fn ehrenfest() -> ReactionNetwork {
        parse_network("A -> B @ 1\nB -> A @ 1").unwrap()
    }

    fn lv(mu3: f64, mu6: f64, k: f64) -> ReactionNetwork {
        parse_network(&alloc::format!("R -> 2 R @ {mu3}\nW -> 0 @ {mu6}\nR + W -> 2 W @ {k}")).unwrap()
    }

    #[test]
    fn ehrenfest_rhs() {
        let rhs = gw_rhs(&ehrenfest(), &ConcVector::new(vec![0.8, 0.2]).unwrap()).unwrap();
        assert!((rhs[0] + 0.6).abs() < 1e-15 && (rhs[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn lotka_volterra_center_is_stationary() {
        let (mu3, mu6, k) = (1.3, 0.7, 2.0);
        let c = ConcVector::new(vec![mu6 / k, mu3 / k]).unwrap();
        let rhs = gw_rhs(&lv(mu3, mu6, k), &c).unwrap();
        assert!(rhs.iter().all(|x| x.abs() < 1e-15), "{rhs:?}");
    }

    #[test]
    fn lotka_volterra_matches_printed_system() {
        let (mu3, mu6, k) = (1.3, 0.7, 2.0);
        let c = [0.4, 0.9];
        let rhs = gw_rhs(&lv(mu3, mu6, k), &ConcVector::new(c.to_vec()).unwrap()).unwrap();
        assert!((rhs[0] - (mu3 * c[0] - k * c[1] * c[0])).abs() < 1e-15);
        assert!((rhs[1] - (k * c[1] * c[0] - mu6 * c[1])).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_concentration() {
        assert!(ConcVector::new(vec![0.5, -0.1]).is_err());
        assert!(ConcVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn ehrenfest_matches_analytic_solution() {
        let path = integrate(&ehrenfest(), &ConcVector::new(vec![1.0, 0.0]).unwrap(), 5.0, &OdeConfig::new(1e-3)).unwrap();
        let err = path
            .times
            .iter()
            .zip(&path.states)
            .map(|(&t, c)| (c[0] - (0.5 + 0.5 * math::exp(-2.0 * t))).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "{err}");
        assert_eq!(path.times.len(), 5001);
        assert_eq!(*path.times.last().unwrap(), 5.0);
    }

    #[test]
    fn fixed_point_stays_put() {
        let c = ConcVector::new(vec![0.5, 0.5]).unwrap();
        let cfg = OdeConfig::new(0.01);
        let path = integrate(&ehrenfest(), &c, 10.0, &cfg).unwrap();
        let drift = path.states.iter().flatten().map(|x| (x - 0.5).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-12 * 10.0 / 0.01);
    }

    #[test]
    fn shortened_final_step_and_recording_stride() {
        let mut cfg = OdeConfig::new(0.3);
        cfg.record_every = 2;
        let path = integrate(&ehrenfest(), &ConcVector::new(vec![1.0, 0.0]).unwrap(), 1.0, &cfg).unwrap();
        assert_eq!(path.times, vec![0.0, 0.6, 1.0]);
        assert!(integrate(&ehrenfest(), &ConcVector::new(vec![1.0, 0.0]).unwrap(), 1.0, &OdeConfig::new(0.0)).is_err());
    }

    #[test]
    fn blow_up_reports_last_valid_time() {
        let net = parse_network("2 A -> 3 A @ 1").unwrap();
        let err = integrate(&net, &ConcVector::new(vec![1.0]).unwrap(), 5.0, &OdeConfig::new(0.01)).unwrap_err();
        match err {
            MeanFieldError::NonFinite { t_last } => assert!(t_last > 0.5 && t_last < 1.1, "{t_last}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kl_values() {
        assert_eq!(lyapunov_kl(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert!((lyapunov_kl(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        let v = lyapunov_kl(&[0.8, 0.2], &[0.5, 0.5]).unwrap();
        assert!((v - (0.8 * math::ln(1.6) + 0.2 * math::ln(0.4))).abs() < 1e-15);
        assert!((v - 0.19274).abs() < 1e-5);
        assert!(lyapunov_kl(&[0.5, 0.5], &[0.5, 0.0]).is_err());
        assert!(lyapunov_kl(&[0.5], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn first_integral_at_center() {
        assert!((lv_first_integral(&[1.0, 1.0], 1.0, 1.0, 1.0).unwrap() + 2.0).abs() < 1e-15);
        assert!(lv_first_integral(&[0.0, 1.0], 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn first_integral_is_maximal_at_center() {
        let (mu3, mu6, k) = (1.0, 0.5, 1.5);
        let center = [mu6 / k, mu3 / k];
        let v0 = lv_first_integral(&center, mu3, mu6, k).unwrap();
        for i in 1..40 {
            for j in 1..40 {
                let c = [i as f64 * 0.05, j as f64 * 0.05];
                if (c[0] - center[0]).abs() + (c[1] - center[1]).abs() < 1e-12 {
                    continue;
                }
                assert!(lv_first_integral(&c, mu3, mu6, k).unwrap() < v0);
            }
        }
    }
}
