//! Seeded Monte Carlo over uniform random configurations.
//!
//! Every trial owns a counter-based random stream keyed by
//! `(master_seed, trial_index)`, so results are bit-identical for a given
//! trial budget no matter how the trials are scheduled across threads:
//! the only cross-trial operation is a commutative histogram merge.

use std::collections::BTreeMap;
use std::error::Error;
use std::fmt;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::PointConfig;
use crate::coord::Coord;
use crate::observables::avalanche_interval;
use crate::relax::{relax, MaxSweepsExceeded, DEFAULT_MAX_SWEEPS};

/// Default sampling grid: numerators over `2^62`.
pub const DEFAULT_DENOM_LOG2: u32 = 62;

/// Parameters of a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialConfig {
    /// Points per configuration.
    pub n: usize,
    pub trials: u64,
    pub master_seed: u64,
    /// Log2 of the sampling grid denominator.
    pub denom_log2: u32,
    pub max_sweeps: u64,
}

impl TrialConfig {
    pub fn new(n: usize, trials: u64, master_seed: u64) -> TrialConfig {
        TrialConfig {
            n,
            trials,
            master_seed,
            denom_log2: DEFAULT_DENOM_LOG2,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }

    pub fn den(&self) -> u64 {
        1u64 << self.denom_log2
    }

    fn validate(&self, n: usize) {
        assert!(n >= 1 && self.trials >= 1, "need n >= 1 and trials >= 1");
        assert!(
            (1..=63).contains(&self.denom_log2),
            "denom_log2 must be in 1..=63"
        );
        assert!(
            (n as u64) < self.den(),
            "grid 2^{} too coarse for {} distinct points",
            self.denom_log2,
            n
        );
    }
}

/// Draws `n` distinct interior grid points from the stream keyed by
/// `(master_seed, trial_index)`; colliding tuples are redrawn whole.
pub fn sample_config(n: usize, trial_index: u64, master_seed: u64, den: u64) -> PointConfig {
    assert!(n >= 1 && (n as u64) < den);
    let mut rng = trial_rng(master_seed, trial_index);
    let nums = draw_distinct(&mut rng, n, den);
    config_from_nums(&nums, den)
}

fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

fn draw_distinct(rng: &mut ChaCha8Rng, n: usize, den: u64) -> Vec<u64> {
    let mut nums = Vec::with_capacity(n);
    loop {
        nums.clear();
        for _ in 0..n {
            nums.push(rng.random_range(1..den));
        }
        let mut sorted = nums.clone();
        sorted.sort_unstable();
        if sorted.windows(2).all(|w| w[0] != w[1]) {
            return nums;
        }
    }
}

fn config_from_nums(nums: &[u64], den: u64) -> PointConfig {
    PointConfig::new(nums.iter().map(|&num| Coord::new(num, den)).collect())
        .expect("sampled points are distinct and interior")
}

/// Sparse counts of relaxation lengths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LHistogram {
    counts: BTreeMap<u64, u64>,
    trials: u64,
}

impl LHistogram {
    pub fn new() -> LHistogram {
        LHistogram::default()
    }

    pub fn record(&mut self, length: u64) {
        *self.counts.entry(length).or_insert(0) += 1;
        self.trials += 1;
    }

    /// Commutative, associative merge; the basis of deterministic
    /// parallelism.
    pub fn merge(mut self, other: LHistogram) -> LHistogram {
        for (length, count) in other.counts {
            *self.counts.entry(length).or_insert(0) += count;
        }
        self.trials += other.trials;
        self
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn count(&self, length: u64) -> u64 {
        self.counts.get(&length).copied().unwrap_or(0)
    }

    pub fn frequency(&self, length: u64) -> f64 {
        self.count(length) as f64 / self.trials as f64
    }

    /// `(length, count)` pairs in increasing length order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&l, &c)| (l, c))
    }
}

/// A trial tripped the relaxation guard; reproducible via the index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialFailure {
    pub trial_index: u64,
    pub error: MaxSweepsExceeded,
}

impl fmt::Display for TrialFailure {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "trial {}: {}", self.trial_index, self.error)
    }
}

impl Error for TrialFailure {}

/// Relaxes `trials` random configurations and histograms the lengths.
/// Deterministic for a given `TrialConfig` regardless of scheduling.
pub fn run_trials(tc: &TrialConfig) -> Result<LHistogram, TrialFailure> {
    tc.validate(tc.n);
    let den = tc.den();
    (0..tc.trials)
        .into_par_iter()
        .fold(
            || Ok(LHistogram::new()),
            |acc: Result<LHistogram, TrialFailure>, trial_index| {
                let mut hist = acc?;
                let cfg = sample_config(tc.n, trial_index, tc.master_seed, den);
                match relax(&cfg, tc.max_sweeps) {
                    Ok(r) => {
                        hist.record(r.sweeps);
                        Ok(hist)
                    }
                    Err(error) => Err(TrialFailure { trial_index, error }),
                }
            },
        )
        .reduce(
            || Ok(LHistogram::new()),
            |a, b| match (a, b) {
                (Ok(x), Ok(y)) => Ok(x.merge(y)),
                // Report the earliest failing trial, deterministically.
                (Err(x), Err(y)) => Err(if x.trial_index <= y.trial_index { x } else { y }),
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
        )
}

/// Complementary cumulative distribution of a histogram: exact tail
/// counts over the total for each support point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CcdfTable {
    total: u64,
    rows: Vec<(u64, u64)>,
}

impl CcdfTable {
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `(threshold, tail_count)` rows in increasing threshold order.
    pub fn rows(&self) -> &[(u64, u64)] {
        &self.rows
    }

    /// Exact `P(L >= threshold)` for a row.
    pub fn probability(&self, row: usize) -> Ratio<u64> {
        Ratio::new(self.rows[row].1, self.total)
    }
}

/// Tail distribution `P(L >= N)` over the histogram support.
pub fn ccdf(h: &LHistogram) -> CcdfTable {
    assert!(h.trials() > 0, "empty histogram");
    let mut rows: Vec<(u64, u64)> = h.iter().collect();
    let mut tail = 0u64;
    for row in rows.iter_mut().rev() {
        tail += row.1;
        row.1 = tail;
    }
    CcdfTable {
        total: h.trials(),
        rows,
    }
}

/// Least-squares power-law fit of a tail distribution in log-log space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit {
    /// Slope of `log P(L >= N)` against `log N`.
    pub ccdf_slope: f64,
    /// Implied exponent of the point-mass law: `ccdf_slope - 1`.
    pub pmf_exponent: f64,
    /// Intercept of the fitted line in log space.
    pub intercept: f64,
    /// `exp(intercept)`: the fitted amplitude at `N = 1`.
    pub amplitude: f64,
    pub n_min: u64,
    pub n_max: u64,
    pub points_used: usize,
    pub residual_rms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InsufficientSupport {
    pub found: usize,
}

impl fmt::Display for InsufficientSupport {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(
            f,
            "tail fit needs at least 3 support points in range, found {}",
            self.found
        )
    }
}

impl Error for InsufficientSupport {}

/// Ordinary least squares on `(log N, log P(L >= N))` over support points
/// with `n_min <= N <= n_max`.
pub fn fit_tail(table: &CcdfTable, n_min: u64, n_max: u64) -> Result<TailFit, InsufficientSupport> {
    let pts: Vec<(f64, f64)> = table
        .rows()
        .iter()
        .filter(|&&(n, tail)| n >= n_min && n <= n_max && tail > 0)
        .map(|&(n, tail)| {
            (
                (n as f64).ln(),
                (tail as f64 / table.total() as f64).ln(),
            )
        })
        .collect();
    if pts.len() < 3 {
        return Err(InsufficientSupport { found: pts.len() });
    }
    let len = pts.len() as f64;
    let mean_x: f64 = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let mean_y: f64 = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual_sq: f64 = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    Ok(TailFit {
        ccdf_slope: slope,
        pmf_exponent: slope - 1.0,
        intercept,
        amplitude: intercept.exp(),
        n_min,
        n_max,
        points_used: pts.len(),
        residual_rms: (residual_sq / len).sqrt(),
    })
}

/// Empirical avalanche-length distribution from repeated grain drops.
#[derive(Clone, Debug, PartialEq)]
pub struct AvalancheStats {
    /// Counts over equal-width bins of `[0, 1]`.
    pub bins: Vec<u64>,
    pub trials: u64,
    /// Trials whose new grain landed exactly on `q` and were redrawn.
    pub degenerate_resamples: u64,
    pub mean: f64,
    pub variance: f64,
}

impl AvalancheStats {
    /// Empirical density value of a bin.
    pub fn density(&self, bin: usize) -> f64 {
        self.bins[bin] as f64 * self.bins.len() as f64 / self.trials as f64
    }
}

/// Per-trial avalanche lengths in trial order, plus the number of
/// degenerate redraws. Each trial samples `n + 1` points and measures the
/// avalanche interval of the last against the first `n`.
pub fn avalanche_samples(tc: &TrialConfig) -> (Vec<f64>, u64) {
    tc.validate(tc.n + 1);
    let den = tc.den();
    let results: Vec<(f64, u64)> = (0..tc.trials)
        .into_par_iter()
        .map(|trial_index| {
            let mut rng = trial_rng(tc.master_seed, trial_index);
            let mut degenerate = 0u64;
            loop {
                let nums = draw_distinct(&mut rng, tc.n + 1, den);
                let cfg = config_from_nums(&nums[..tc.n], den);
                let p_new = Coord::new(nums[tc.n], den);
                match avalanche_interval(&cfg, p_new) {
                    Ok(iv) => {
                        let len = iv.length();
                        return ((*len.numer() as f64 / *len.denom() as f64), degenerate);
                    }
                    Err(_) => degenerate += 1,
                }
            }
        })
        .collect();
    let degenerate = results.iter().map(|r| r.1).sum();
    (results.into_iter().map(|r| r.0).collect(), degenerate)
}

/// Bins avalanche lengths into `bins` equal cells of `[0, 1]` and reports
/// the first two moments.
pub fn avalanche_trials(tc: &TrialConfig, bins: usize) -> AvalancheStats {
    assert!(bins >= 1);
    let (lengths, degenerate_resamples) = avalanche_samples(tc);
    let mut bin_counts = vec![0u64; bins];
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for &len in &lengths {
        let k = ((len * bins as f64) as usize).min(bins - 1);
        bin_counts[k] += 1;
        sum += len;
        sum_sq += len * len;
    }
    let trials = lengths.len() as f64;
    let mean = sum / trials;
    AvalancheStats {
        bins: bin_counts,
        trials: lengths.len() as u64,
        degenerate_resamples,
        mean,
        variance: sum_sq / trials - mean * mean,
    }
}

/// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}
