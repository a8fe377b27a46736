//! Order statistics, empirical CDFs, histograms and the bootstrap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Linear-interpolation quantile of sorted data (`q ∈ [0, 1]`).
fn quantile_sorted(s: &[f64], q: f64) -> f64 {
    let pos = q * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
}

pub fn quantile(v: &[f64], q: f64) -> f64 {
    assert!(!v.is_empty(), "quantile of empty data");
    quantile_sorted(&sorted(v), q)
}

pub fn median(v: &[f64]) -> f64 {
    quantile(v, 0.5)
}

pub fn median_abs(v: &[f64]) -> f64 {
    median(&v.iter().map(|e| e.abs()).collect::<Vec<_>>())
}

/// `P(|ε| < x)` for every `x` in `grid`.
pub fn cdf_table(errors: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(Error::Domain("cdf_table: no errors".into()));
    }
    let abs = sorted(&errors.iter().map(|e| e.abs()).collect::<Vec<_>>());
    let n = abs.len() as f64;
    Ok(grid
        .iter()
        .map(|&x| abs.partition_point(|&a| a < x) as f64 / n)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bias {
    pub median: f64,
    /// Fraction of `ε < 0`, i.e. of models whose flow is overpredicted.
    pub negative_fraction: f64,
}

pub fn bias_summary(errors: &[f64]) -> Result<Bias> {
    if errors.is_empty() {
        return Err(Error::Domain("bias_summary: no errors".into()));
    }
    Ok(Bias {
        median: median(errors),
        negative_fraction: errors.iter().filter(|&&e| e < 0.0).count() as f64
            / errors.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub probabilities: Vec<f64>,
}

const MAX_BINS: usize = 200;

/// Freedman–Diaconis binning, `width = 2 IQR n^{-1/3}`, at most
/// [`MAX_BINS`] bins. Degenerate data get one unit-width bin.
pub fn histogram(v: &[f64]) -> Result<Histogram> {
    if v.is_empty() {
        return Err(Error::Domain("histogram: no data".into()));
    }
    let s = sorted(v);
    let (lo, hi) = (s[0], s[s.len() - 1]);
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    let fd = 2.0 * iqr / (s.len() as f64).cbrt();
    let (start, width, bins) = if hi == lo {
        (lo - 0.5, 1.0, 1)
    } else if fd > 0.0 {
        let bins = (((hi - lo) / fd).ceil() as usize).clamp(1, MAX_BINS);
        (lo, (hi - lo) / bins as f64, bins)
    } else {
        (lo, (hi - lo) / MAX_BINS as f64, MAX_BINS)
    };
    let edges: Vec<f64> = (0..=bins).map(|k| start + k as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &x in &s {
        let k = (((x - start) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = s.len() as f64;
    Ok(Histogram {
        edges,
        probabilities: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// Bootstrap distribution of `stat` over `resamples` index resamples of
/// `0..len` drawn with replacement.
pub fn bootstrap(
    len: usize,
    resamples: usize,
    seed: u64,
    mut stat: impl FnMut(&[usize]) -> f64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = vec![0usize; len];
    (0..resamples)
        .map(|_| {
            idx.iter_mut().for_each(|i| *i = rng.random_range(0..len));
            stat(&idx)
        })
        .collect()
}

/// Two-sided percentile interval at `level` (e.g. 0.95).
pub fn percentile_interval(dist: &[f64], level: f64) -> [f64; 2] {
    let s = sorted(dist);
    let a = 0.5 * (1.0 - level);
    [quantile_sorted(&s, a), quantile_sorted(&s, 1.0 - a)]
}

/// One-sided bounds: `(lower, upper)` such that the statistic exceeds
/// `lower` (resp. stays below `upper`) with probability `level`.
pub fn one_sided_bounds(dist: &[f64], level: f64) -> (f64, f64) {
    let s = sorted(dist);
    (quantile_sorted(&s, 1.0 - level), quantile_sorted(&s, level))
}
