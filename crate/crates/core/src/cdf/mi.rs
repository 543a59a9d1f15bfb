//! Plug-in mutual information over histograms, in nats.

use crate::error::{check_dim, Error, Result};
use crate::scalar::{cmp, Scalar};

/// Assigns each value to a quantile cell.
///
/// Cut points are the order statistics at positions `⌊k·n/bins⌋`,
/// `k = 1..bins`; duplicate cut points are merged, so there are at most
/// `bins` cells. A value's cell is the number of cut points `≤` it. The
/// assignment depends only on the ordering of the values.
pub fn quantile_cells<T: Scalar>(values: &[T], bins: usize) -> Vec<usize> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| cmp(*a, *b));
    let mut edges: Vec<T> = (1..bins).map(|k| sorted[(k * n / bins).min(n - 1)]).collect();
    edges.dedup();
    values
        .iter()
        .map(|&v| edges.partition_point(|&e| e <= v))
        .collect()
}

/// Mutual information of two discrete sequences from their joint histogram.
pub fn discrete_mutual_information<T: Scalar>(a: &[usize], b: &[usize]) -> Result<T> {
    check_dim("mutual information inputs", a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::Empty("mutual information needs at least one sample"));
    }
    let na = a.iter().copied().max().unwrap_or(0) + 1;
    let nb = b.iter().copied().max().unwrap_or(0) + 1;
    let mut joint = vec![0usize; na * nb];
    let mut pa = vec![0usize; na];
    let mut pb = vec![0usize; nb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * nb + y] += 1;
        pa[x] += 1;
        pb[y] += 1;
    }
    let n = T::of(a.len() as f64);
    let mut mi = T::zero();
    for x in 0..na {
        for y in 0..nb {
            let c = joint[x * nb + y];
            if c == 0 {
                continue;
            }
            let pxy = T::of(c as f64) / n;
            let px = T::of(pa[x] as f64) / n;
            let py = T::of(pb[y] as f64) / n;
            mi = mi + pxy * (pxy / (px * py)).ln();
        }
    }
    Ok(mi.max(T::zero()))
}

/// MI between a continuous feature (quantile-binned into `bins` cells) and a
/// binary class indicator.
pub fn mutual_information<T: Scalar>(values: &[T], is_class: &[bool], bins: usize) -> Result<T> {
    if bins < 2 {
        return Err(Error::invalid(format!("bins must be at least 2, got {bins}")));
    }
    check_dim("mutual information inputs", values.len(), is_class.len())?;
    if values.is_empty() {
        return Err(Error::Empty("mutual information needs at least one sample"));
    }
    let cells = quantile_cells(values, bins);
    let indicator: Vec<usize> = is_class.iter().map(|&c| c as usize).collect();
    discrete_mutual_information(&cells, &indicator)
}
