use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One neighbour's vote for one class-defining feature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vote<T> {
    pub feature: usize,
    pub rank: usize,
    /// Row of the feature bank that was retrieved.
    pub bank_row: usize,
    /// Index of that row's sample in the reference dataset.
    pub sample_ref: usize,
    pub label: usize,
    /// `|f(x)[feature] − f(d)[feature]|`, or the joint distance over the CDF
    /// subset when joint neighbourhoods are used.
    pub distance: T,
}

/// `M × K` vote grid: one row per class-defining feature, ranks in order.
pub type VoteGrid<T> = Vec<Vec<Vote<T>>>;

/// Mode of the vote labels.
///
/// Frequency ties resolve to the pseudo-label when it is among the tied labels,
/// then to the tied label with the smallest summed distance, then to the
/// smallest class id. The flag reports whether any tie had to be broken.
pub fn aggregate<T: Scalar>(votes: &[Vec<Vote<T>>], pseudo: usize) -> Result<(usize, bool)> {
    let all: Vec<&Vote<T>> = votes.iter().flatten().collect();
    if all.is_empty() {
        return Err(Error::Empty("vote grid"));
    }
    let classes = all.iter().map(|v| v.label).max().unwrap_or(0) + 1;
    let mut counts = vec![0usize; classes];
    let mut dist = vec![T::zero(); classes];
    for v in &all {
        counts[v.label] += 1;
        dist[v.label] = dist[v.label] + v.distance;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    let tied: Vec<usize> = (0..classes).filter(|&c| counts[c] == best).collect();
    if tied.len() == 1 {
        return Ok((tied[0], false));
    }
    if tied.contains(&pseudo) {
        return Ok((pseudo, true));
    }
    let mut winner = tied[0];
    for &c in &tied[1..] {
        if dist[c] < dist[winner] {
            winner = c;
        }
    }
    Ok((winner, true))
}
