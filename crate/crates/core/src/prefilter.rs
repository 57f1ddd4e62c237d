//! Univariate BSS/WSS gene ranking and top-k column preselection.

use std::cmp::Ordering;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Features by descending between/within sum-of-squares ratio, ties by
/// ascending feature index.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneRanking {
    pub entries: Vec<(usize, f64)>,
}

impl GeneRanking {
    pub fn order(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(j, _)| j)
    }
}

/// Between-class and within-class sums of squares of feature `j`.
pub fn class_sums_of_squares(dataset: &Dataset, j: usize) -> (f64, f64) {
    let k = dataset.n_classes();
    let n = dataset.n_samples();
    let mut sums = vec![0.0; k];
    let counts = dataset.class_counts();
    let column: Vec<f64> = (0..n).map(|i| dataset.row(i)[j]).collect();
    for (i, v) in column.iter().enumerate() {
        sums[dataset.labels()[i]] += v;
    }
    let grand = sums.iter().sum::<f64>() / n as f64;
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let bss = means
        .iter()
        .zip(&counts)
        .map(|(m, &c)| c as f64 * (m - grand).powi(2))
        .sum();
    let wss = column
        .iter()
        .enumerate()
        .map(|(i, v)| (v - means[dataset.labels()[i]]).powi(2))
        .sum();
    (bss, wss)
}

fn ratio(bss: f64, wss: f64) -> f64 {
    if wss > 0.0 {
        bss / wss
    } else if bss > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

pub fn bss_wss_rank(dataset: &Dataset) -> Result<GeneRanking> {
    let present = dataset.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::validation("BSS/WSS ranking needs at least 2 classes"));
    }
    let mut entries: Vec<(usize, f64)> = (0..dataset.n_features())
        .map(|j| {
            let (bss, wss) = class_sums_of_squares(dataset, j);
            (j, ratio(bss, wss))
        })
        .collect();
    entries.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        o => o,
    });
    Ok(GeneRanking { entries })
}

/// Keeps the `k` top-ranked columns in their original order. Returns the
/// reduced dataset and, for each new column, its original index.
pub fn select_top_k(dataset: &Dataset, ranking: &GeneRanking, k: usize) -> Result<(Dataset, Vec<usize>)> {
    let n = dataset.n_features();
    if k == 0 || k > n {
        return Err(Error::validation(format!("k must lie in 1..={n}, got {k}")));
    }
    if ranking.entries.len() != n {
        return Err(Error::validation("ranking does not cover every feature"));
    }
    let mut keep: Vec<usize> = ranking.order().take(k).collect();
    keep.sort_unstable();
    Ok((dataset.select_columns(&keep), keep))
}
