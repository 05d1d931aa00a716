//! Contingency-table and goodness-of-fit statistics used by the campaigns.

use coxshot_core::rng::stream;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Largest count kept as its own category before the tail bucket.
pub const MAX_CATEGORY: usize = 15;

/// Upper tail `P(χ²_df > stat)`.
pub fn chi_square_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .sf(stat)
}

/// Maps raw counts to merged categories.
///
/// Counts above [`MAX_CATEGORY`] share a tail bucket; adjacent categories are
/// then merged from the left until each holds at least `min_count`
/// observations, and an underfull last bin is folded into its neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct Binning {
    map: Vec<usize>,
    bins: usize,
}

impl Binning {
    pub fn from_frequencies(freq: &[usize], min_count: usize) -> Self {
        let mut map = vec![0; freq.len()];
        let mut bins = 0;
        let mut acc = 0;
        let mut last_closed = None;
        for (c, &f) in freq.iter().enumerate() {
            map[c] = bins;
            acc += f;
            if acc >= min_count {
                last_closed = Some(bins);
                bins += 1;
                acc = 0;
            }
        }
        if acc > 0 || bins == 0 {
            // Open remainder: merge it into the last complete bin if there is one.
            match last_closed {
                Some(b) => {
                    for m in map.iter_mut().filter(|m| **m > b) {
                        *m = b;
                    }
                    bins = b + 1;
                }
                None => bins = 1,
            }
        }
        Self { map, bins }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bin(&self, count: usize) -> usize {
        self.map[category(count).min(self.map.len() - 1)]
    }
}

fn category(count: usize) -> usize {
    count.min(MAX_CATEGORY + 1)
}

/// Frequencies of the categories `0..=MAX_CATEGORY` and the tail.
pub fn category_frequencies(values: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut freq = vec![0; MAX_CATEGORY + 2];
    for v in values {
        freq[category(v)] += 1;
    }
    freq
}

/// Result of a chi-square test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Binned multi-way table of count vectors (one column per interval).
#[derive(Debug, Clone)]
pub struct CountTable {
    binnings: Vec<Binning>,
    /// Binned rows.
    rows: Vec<Vec<usize>>,
}

impl CountTable {
    /// Bins each column so that every cell of the product of marginals has
    /// expected count at least 5.
    pub fn new(columns: &[Vec<usize>]) -> Option<Self> {
        let d = columns.len();
        let n = columns.first()?.len();
        if n == 0 {
            return None;
        }
        let p_min = (5.0 / n as f64).powf(1.0 / d as f64);
        let min_count = (p_min * n as f64).ceil() as usize;
        let binnings: Vec<Binning> = columns
            .iter()
            .map(|c| Binning::from_frequencies(&category_frequencies(c.iter().copied()), min_count))
            .collect();
        if binnings.iter().any(|b| b.bins() < 2) {
            return None;
        }
        let rows = (0..n)
            .map(|r| {
                columns
                    .iter()
                    .zip(&binnings)
                    .map(|(c, b)| b.bin(c[r]))
                    .collect()
            })
            .collect();
        Some(Self { binnings, rows })
    }

    fn shape(&self) -> Vec<usize> {
        self.binnings.iter().map(Binning::bins).collect()
    }

    fn index(shape: &[usize], cell: &[usize]) -> usize {
        cell.iter().zip(shape).fold(0, |acc, (c, s)| acc * s + c)
    }

    fn joint_and_marginals(&self, rows: &[Vec<usize>]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let shape = self.shape();
        let mut joint = vec![0.0; shape.iter().product()];
        let mut margins: Vec<Vec<f64>> = shape.iter().map(|&s| vec![0.0; s]).collect();
        for row in rows {
            joint[Self::index(&shape, row)] += 1.0;
            for (m, &c) in margins.iter_mut().zip(row) {
                m[c] += 1.0;
            }
        }
        (joint, margins)
    }

    fn for_each_cell(shape: &[usize], mut f: impl FnMut(usize, &[usize])) {
        let mut cell = vec![0; shape.len()];
        let total: usize = shape.iter().product();
        for idx in 0..total {
            f(idx, &cell);
            for k in (0..shape.len()).rev() {
                cell[k] += 1;
                if cell[k] < shape[k] {
                    break;
                }
                cell[k] = 0;
            }
        }
    }

    /// Pearson test of mutual independence of the columns.
    pub fn independence(&self) -> ChiSquare {
        let shape = self.shape();
        let n = self.rows.len() as f64;
        let (joint, margins) = self.joint_and_marginals(&self.rows);
        let mut stat = 0.0;
        Self::for_each_cell(&shape, |idx, cell| {
            let expected = n * cell
                .iter()
                .zip(&margins)
                .map(|(&c, m)| m[c] / n)
                .product::<f64>();
            let diff = joint[idx] - expected;
            stat += diff * diff / expected;
        });
        let cells: usize = shape.iter().product();
        let df = cells - 1 - shape.iter().map(|s| s - 1).sum::<usize>();
        ChiSquare {
            statistic: stat,
            df,
            p_value: chi_square_sf(stat, df),
        }
    }

    fn total_variation_of(&self, rows: &[Vec<usize>]) -> f64 {
        let shape = self.shape();
        let n = rows.len() as f64;
        let (joint, margins) = self.joint_and_marginals(rows);
        let mut tv = 0.0;
        Self::for_each_cell(&shape, |idx, cell| {
            let product: f64 = cell.iter().zip(&margins).map(|(&c, m)| m[c] / n).product();
            tv += (joint[idx] / n - product).abs();
        });
        0.5 * tv
    }

    /// Total-variation distance between the empirical joint law and the
    /// product of its marginals.
    pub fn total_variation(&self) -> f64 {
        self.total_variation_of(&self.rows)
    }

    /// Mean and standard deviation of the distance under independence, from
    /// `resamples` permutations of every column but the first. Resample `i`
    /// draws from stream `stream_base + i` of `seed`.
    pub fn permutation_null(&self, resamples: usize, seed: u64, stream_base: u64) -> (f64, f64) {
        let d = self.binnings.len();
        let cols: Vec<Vec<usize>> = (0..d)
            .map(|k| self.rows.iter().map(|r| r[k]).collect())
            .collect();
        let values: Vec<f64> = (0..resamples)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, stream_base + i as u64);
                let mut cols = cols.clone();
                for col in cols.iter_mut().skip(1) {
                    col.shuffle(&mut rng);
                }
                let rows: Vec<Vec<usize>> = (0..self.rows.len())
                    .map(|r| cols.iter().map(|c| c[r]).collect())
                    .collect();
                self.total_variation_of(&rows)
            })
            .collect();
        mean_sd(&values)
    }
}

/// k-sample chi-square test that all samples share one count distribution.
pub fn homogeneity(samples: &[Vec<usize>]) -> Option<ChiSquare> {
    let k = samples.len();
    if k < 2 || samples.iter().any(Vec::is_empty) {
        return None;
    }
    let total: usize = samples.iter().map(Vec::len).sum();
    let smallest = samples.iter().map(Vec::len).min()?;
    // Expected count of a cell is n_i · pooled / total ≥ 5.
    let min_pooled = (5.0 * total as f64 / smallest as f64).ceil() as usize;
    let pooled = category_frequencies(samples.iter().flatten().copied());
    let binning = Binning::from_frequencies(&pooled, min_pooled);
    let b = binning.bins();
    if b < 2 {
        return None;
    }
    let mut table = vec![vec![0.0; b]; k];
    for (i, s) in samples.iter().enumerate() {
        for &v in s {
            table[i][binning.bin(v)] += 1.0;
        }
    }
    let col_tot: Vec<f64> = (0..b).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut stat = 0.0;
    for (i, s) in samples.iter().enumerate() {
        for j in 0..b {
            let expected = s.len() as f64 * col_tot[j] / total as f64;
            let diff = table[i][j] - expected;
            stat += diff * diff / expected;
        }
    }
    let df = (k - 1) * (b - 1);
    Some(ChiSquare {
        statistic: stat,
        df,
        p_value: chi_square_sf(stat, df),
    })
}

/// Pearson goodness of fit of observed cell counts to cell probabilities.
/// Cells with expected count below 5 are pooled in order into their successor.
pub fn goodness_of_fit(observed: &[usize], probs: &[f64]) -> ChiSquare {
    let n: usize = observed.iter().sum();
    let n = n as f64;
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        acc.0 += o as f64;
        acc.1 += p * n;
        if acc.1 >= 5.0 {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }
    let stat = merged
        .iter()
        .map(|(o, e)| if *e > 0.0 { (o - e) * (o - e) / e } else { 0.0 })
        .sum();
    let df = merged.len().saturating_sub(1);
    ChiSquare {
        statistic: stat,
        df,
        p_value: chi_square_sf(stat, df),
    }
}

/// One-sample Kolmogorov–Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the KS statistic `d` for sample size `n`, with
/// Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Sample mean and standard deviation (denominator `n − 1`).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Sample Pearson correlation.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let (mx, sx) = mean_sd(x);
    let (my, sy) = mean_sd(y);
    let n = x.len() as f64;
    let cov = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / (n - 1.0);
    cov / (sx * sy)
}
