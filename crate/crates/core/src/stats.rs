//! Statistical checks: concentration radii, log-linear fits, total
//! variation against an exact law, and Monte Carlo return times.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::math;
use crate::network::ReactionNetwork;
use crate::rng::{self, SplitMix64};
use crate::ssa::{IntensityConvention, JumpProcess, SimError, Simulator};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("empty ensemble")]
    Empty,
    #[error("need at least {needed} usable points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("sample {0} lies outside the enumerated states")]
    OutsideSupport(usize),
    #[error("expected length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// `(mean, standard error of the mean)`.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    (mean(xs), math::sqrt(variance(xs) / xs.len() as f64))
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, rms residual)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x - b) * (y - a * x - b)).sum();
    Some((a, b, math::sqrt(rss / xs.len() as f64)))
}

/// `(2 sqrt 2 + 4 sqrt(ln 1/sigma)) / sqrt N`.
pub fn concentration_threshold(scale: u64, sigma: f64) -> f64 {
    (2.0 * core::f64::consts::SQRT_2 + 4.0 * math::sqrt(math::ln(1.0 / sigma))) / math::sqrt(scale as f64)
}

/// The two-urn radius `3 / sqrt N`.
pub fn two_urn_threshold(scale: u64) -> f64 {
    3.0 / math::sqrt(scale as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub threshold: f64,
    pub violations: usize,
    pub replicas: usize,
    pub sigma_target: f64,
    pub max_distance: f64,
    pub pass: bool,
}

/// Counts distances `>= threshold`; passes when their fraction is at most `sigma`.
pub fn radius_concentration(distances: &[f64], threshold: f64, sigma: f64) -> Result<ConcentrationReport, StatsError> {
    if distances.is_empty() {
        return Err(StatsError::Empty);
    }
    let violations = distances.iter().filter(|&&d| d >= threshold).count();
    Ok(ConcentrationReport {
        threshold,
        violations,
        replicas: distances.len(),
        sigma_target: sigma,
        max_distance: distances.iter().copied().fold(0.0, f64::max),
        pass: violations as f64 <= sigma * distances.len() as f64,
    })
}

/// Euclidean distance of `n / N` from `c_star`.
pub fn l2_distance(counts: &[u64], scale: u64, c_star: &[f64]) -> f64 {
    let n = scale as f64;
    math::sqrt(
        counts
            .iter()
            .zip(c_star)
            .map(|(&k, &c)| {
                let d = k as f64 / n - c;
                d * d
            })
            .sum(),
    )
}

/// Fraction of terminal states with `|n/N - c*|_2` beyond the concentration
/// radius for `sigma`, compared against `sigma`.
pub fn l2_concentration(
    terminals: &[&[u64]],
    scale: u64,
    c_star: &[f64],
    sigma: f64,
) -> Result<ConcentrationReport, StatsError> {
    if terminals.is_empty() {
        return Err(StatsError::Empty);
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(StatsError::Invalid("sigma must lie in (0, 1)"));
    }
    if let Some(t) = terminals.iter().find(|t| t.len() != c_star.len()) {
        return Err(StatsError::Dimension {
            expected: c_star.len(),
            got: t.len(),
        });
    }
    let d: Vec<f64> = terminals.iter().map(|t| l2_distance(t, scale, c_star)).collect();
    radius_concentration(&d, concentration_threshold(scale, sigma), sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    PowerLaw,
    Exponential,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::PowerLaw => "power_law",
            FitModel::Exponential => "exponential",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: FitModel,
    /// Decay rate (exponential) or exponent (power law), both positive for decay.
    pub parameter: f64,
    pub intercept: f64,
    pub fit_range: (f64, f64),
    /// RMS residual in log space.
    pub residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFitOptions {
    pub min_count: f64,
}

impl Default for ExpFitOptions {
    fn default() -> Self {
        Self { min_count: 5.0 }
    }
}

/// Fits `ln c_s = b - rate * s` over bins `s` with `c_s >= min_count`.
pub fn fit_exponential(hist: &[f64], opts: &ExpFitOptions) -> Result<FitReport, StatsError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0.0 && c >= opts.min_count)
        .map(|(s, &c)| (s as f64, math::ln(c)))
        .unzip();
    if xs.len() < 3 {
        return Err(StatsError::TooFewPoints { needed: 3, got: xs.len() });
    }
    let (a, b, r) = least_squares(&xs, &ys).ok_or(StatsError::Invalid("degenerate fit"))?;
    Ok(FitReport {
        model: FitModel::Exponential,
        parameter: -a,
        intercept: b,
        fit_range: (xs[0], *xs.last().unwrap()),
        residual: r,
        points: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFitOptions {
    /// Leading points dropped before fitting.
    pub skip_head: usize,
    pub min_count: f64,
    /// Width in `ln x` of averaging bins; `0` fits every point. Binning
    /// keeps dense tails (rank data) from dominating the slope.
    pub log_bin: f64,
}

impl Default for PowerFitOptions {
    fn default() -> Self {
        Self {
            skip_head: 5,
            min_count: 10.0,
            log_bin: 0.0,
        }
    }
}

/// Fits `ln y = b - exponent * ln x` over the points left after dropping
/// the first `skip_head` positive points and every `y < min_count`.
pub fn fit_power_law(xs: &[f64], ys: &[f64], opts: &PowerFitOptions) -> Result<FitReport, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x, y))
        .collect();
    if pts.len() < 10 {
        return Err(StatsError::TooFewPoints { needed: 10, got: pts.len() });
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts
        .iter()
        .skip(opts.skip_head)
        .filter(|&&(_, y)| y >= opts.min_count)
        .map(|&(x, y)| (math::ln(x), math::ln(y)))
        .unzip();
    let (lx, ly) = if opts.log_bin > 0.0 && !lx.is_empty() {
        log_binned(&lx, &ly, opts.log_bin)
    } else {
        (lx, ly)
    };
    if lx.len() < 3 {
        return Err(StatsError::TooFewPoints { needed: 3, got: lx.len() });
    }
    let (a, b, r) = least_squares(&lx, &ly).ok_or(StatsError::Invalid("degenerate fit"))?;
    Ok(FitReport {
        model: FitModel::PowerLaw,
        parameter: -a,
        intercept: b,
        fit_range: (math::exp(lx[0]), math::exp(*lx.last().unwrap())),
        residual: r,
        points: lx.len(),
    })
}

/// Means of `(lx, ly)` over consecutive bins of width `w` in `lx`, which
/// must be sorted.
fn log_binned(lx: &[f64], ly: &[f64], w: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut bx, mut by) = (Vec::new(), Vec::new());
    let (mut sx, mut sy, mut n, mut bin) = (0.0, 0.0, 0.0, 0i64);
    for (&x, &y) in lx.iter().zip(ly) {
        let k = math::floor((x - lx[0]) / w) as i64;
        if k != bin && n > 0.0 {
            bx.push(sx / n);
            by.push(sy / n);
            (sx, sy, n) = (0.0, 0.0, 0.0);
        }
        bin = k;
        sx += x;
        sy += y;
        n += 1.0;
    }
    if n > 0.0 {
        bx.push(sx / n);
        by.push(sy / n);
    }
    (bx, by)
}

/// Power-law fit of a size histogram `c[s]` against `s`.
pub fn fit_power_law_histogram(hist: &[u64], opts: &PowerFitOptions) -> Result<FitReport, StatsError> {
    let xs: Vec<f64> = (0..hist.len()).map(|s| s as f64).collect();
    let ys: Vec<f64> = hist.iter().map(|&c| c as f64).collect();
    fit_power_law(&xs, &ys, opts)
}

/// Power-law fit of counts sorted by rank (rank 1 first).
pub fn fit_power_law_ranks(counts: &[u64], opts: &PowerFitOptions) -> Result<FitReport, StatsError> {
    let xs: Vec<f64> = (1..=counts.len()).map(|r| r as f64).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    fit_power_law(&xs, &ys, opts)
}

/// `1/2 sum |emp - pi|` with `emp` the empirical law of `samples` over `states`.
pub fn empirical_tv(samples: &[&[u64]], states: &[Vec<u64>], pi: &[f64]) -> Result<f64, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    if states.len() != pi.len() {
        return Err(StatsError::Dimension {
            expected: states.len(),
            got: pi.len(),
        });
    }
    let index: BTreeMap<&[u64], usize> = states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mut counts = alloc::vec![0u64; states.len()];
    for (k, s) in samples.iter().enumerate() {
        let &i = index.get(s).ok_or(StatsError::OutsideSupport(k))?;
        counts[i] += 1;
    }
    let n = samples.len() as f64;
    Ok(0.5 * counts.iter().zip(pi).map(|(&c, &p)| math::abs(c as f64 / n - p)).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTimeReport {
    pub mean: f64,
    pub std_error: f64,
    /// Replicas that returned within the jump cap.
    pub completed: usize,
    pub truncated: usize,
}

/// Jumps until `process` first comes back to its starting state, for each
/// replica `r` run on stream `split(seed, r)`.
pub fn return_time_mc_process<P: JumpProcess + Clone>(
    start: &P,
    replicas: u64,
    seed: u64,
    max_events: u64,
) -> Result<ReturnTimeReport, StatsError> {
    if replicas == 0 {
        return Err(StatsError::Empty);
    }
    let origin = start.counts().to_vec();
    let mut steps = Vec::new();
    let mut truncated = 0;
    for r in 0..replicas {
        let mut p = start.clone();
        let mut rng = SplitMix64::new(rng::split(seed, r));
        let mut k = 0u64;
        loop {
            if k == max_events {
                truncated += 1;
                break;
            }
            let Some((dwell, e)) = p.draw(&mut rng) else {
                truncated += 1;
                break;
            };
            p.apply(e, dwell);
            k += 1;
            if p.counts() == origin.as_slice() {
                steps.push(k as f64);
                break;
            }
        }
    }
    if steps.is_empty() {
        return Err(StatsError::Empty);
    }
    let (m, se) = if steps.len() > 1 { mean_and_se(&steps) } else { (steps[0], f64::NAN) };
    Ok(ReturnTimeReport {
        mean: m,
        std_error: se,
        completed: steps.len(),
        truncated,
    })
}

pub fn return_time_mc(
    net: &ReactionNetwork,
    n0: &[u64],
    scale: u64,
    replicas: u64,
    seed: u64,
    max_events: u64,
) -> Result<ReturnTimeReport, StatsError> {
    let sim = Simulator::new(net, n0, scale, IntensityConvention::Kurtz)?;
    return_time_mc_process(&sim, replicas, seed, max_events)
}
