//! Exact brute-force neighbour searches over the feature bank.

use crate::cdf::{CdfTable, FeatureBank};
use crate::comix::vote::{Vote, VoteGrid};
use crate::error::{check_dim, Error, Result};
use crate::scalar::{cmp, Scalar};

/// Bank row nearest to `query` in Euclidean distance; ties go to the lower row.
pub fn nearest_row<T: Scalar>(bank: &FeatureBank<T>, query: &[T]) -> Result<usize> {
    if bank.is_empty() {
        return Err(Error::Empty("feature bank"));
    }
    check_dim("query embedding", bank.dim(), query.len())?;
    let mut best = 0;
    let mut best_d = T::infinity();
    for j in 0..bank.len() {
        let d = bank
            .row(j)
            .iter()
            .zip(query)
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    Ok(best)
}

/// Label of the nearest bank row to the full embedding.
pub fn pseudo_label<T: Scalar>(bank: &FeatureBank<T>, embedding: &[T]) -> Result<usize> {
    Ok(bank.labels()[nearest_row(bank, embedding)?])
}

fn check_k<T: Scalar>(bank: &FeatureBank<T>, k: usize) -> Result<()> {
    if k == 0 || k > bank.len() {
        return Err(Error::invalid(format!(
            "K = {k} must lie in 1..={} (bank size)",
            bank.len()
        )));
    }
    Ok(())
}

/// The `k` bank rows ordered by `(distance, row)` under `distance_of`.
fn top_k<T: Scalar>(n: usize, k: usize, distance_of: impl Fn(usize) -> T) -> Vec<(usize, T)> {
    let mut scored: Vec<(usize, T)> = (0..n).map(|j| (j, distance_of(j))).collect();
    scored.sort_by(|a, b| cmp(a.1, b.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Per-feature `k`-nearest votes over an explicit feature list.
pub fn votes_for_features<T: Scalar>(
    bank: &FeatureBank<T>,
    features: &[usize],
    embedding: &[T],
    k: usize,
) -> Result<VoteGrid<T>> {
    check_k(bank, k)?;
    check_dim("query embedding", bank.dim(), embedding.len())?;
    features
        .iter()
        .map(|&f| {
            if f >= bank.dim() {
                return Err(Error::invalid(format!("feature {f} out of range")));
            }
            let q = embedding[f];
            let nearest = top_k(bank.len(), k, |j| (bank.embeddings().get(j, f) - q).abs());
            Ok(nearest
                .into_iter()
                .enumerate()
                .map(|(rank, (row, distance))| Vote {
                    feature: f,
                    rank,
                    bank_row: row,
                    sample_ref: bank.sample_refs()[row],
                    label: bank.labels()[row],
                    distance,
                })
                .collect())
        })
        .collect()
}

/// Votes for the first `m` class-defining features of `pseudo`.
pub fn per_feature_predict<T: Scalar>(
    bank: &FeatureBank<T>,
    cdfs: &CdfTable<T>,
    embedding: &[T],
    pseudo: usize,
    m: usize,
    k: usize,
) -> Result<VoteGrid<T>> {
    let features = cdfs.features(pseudo, m)?;
    votes_for_features(bank, &features, embedding, k)
}

/// Single row of `k` votes using one Euclidean distance over the whole CDF
/// subset. Votes carry the first CDF as their feature.
pub fn joint_cdf_predict<T: Scalar>(
    bank: &FeatureBank<T>,
    features: &[usize],
    embedding: &[T],
    k: usize,
) -> Result<VoteGrid<T>> {
    check_k(bank, k)?;
    check_dim("query embedding", bank.dim(), embedding.len())?;
    let lead = *features.first().ok_or(Error::Empty("CDF subset"))?;
    let nearest = top_k(bank.len(), k, |j| {
        features
            .iter()
            .map(|&f| {
                let d = bank.embeddings().get(j, f) - embedding[f];
                d * d
            })
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    });
    Ok(vec![nearest
        .into_iter()
        .enumerate()
        .map(|(rank, (row, distance))| Vote {
            feature: lead,
            rank,
            bank_row: row,
            sample_ref: bank.sample_refs()[row],
            label: bank.labels()[row],
            distance,
        })
        .collect()])
}
