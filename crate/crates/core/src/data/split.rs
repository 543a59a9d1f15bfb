use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Seeded train/test partition of sample indices, each side sorted ascending.
///
/// When every class present has at least two samples the split is stratified:
/// per-class test counts are apportioned by largest remainder so each class
/// receives `floor` or `ceil` of `fraction × count` and the total is
/// `round(fraction × n)`.
pub fn split_indices(
    labels: &[usize],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = labels.len();
    let total = ((test_fraction * n as f64).round() as usize).clamp(1, n.max(2) - 1);
    if n < 2 {
        return Err(Error::invalid(format!(
            "cannot split {n} sample(s) into two non-empty parts"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let present: Vec<usize> = (0..classes).filter(|&c| !by_class[c].is_empty()).collect();
    let stratify = present.iter().all(|&c| by_class[c].len() >= 2);

    let mut test = Vec::with_capacity(total);
    if stratify {
        let quotas: Vec<f64> = present
            .iter()
            .map(|&c| test_fraction * by_class[c].len() as f64)
            .collect();
        let mut take: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut order: Vec<usize> = (0..present.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        let assigned: usize = take.iter().sum();
        for &k in order.iter().take(total.saturating_sub(assigned)) {
            take[k] += 1;
        }
        for (k, &c) in present.iter().enumerate() {
            let mut members = by_class[c].clone();
            members.shuffle(&mut rng);
            test.extend_from_slice(&members[..take[k].min(members.len())]);
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        test.extend_from_slice(&all[..total]);
    }
    test.sort_unstable();
    let mut in_test = vec![false; n];
    test.iter().for_each(|&i| in_test[i] = true);
    let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    if train.is_empty() || test.is_empty() {
        return Err(Error::invalid("split produced an empty side"));
    }
    Ok((train, test))
}

pub fn split<T: Scalar>(
    data: &LabeledDataset<T>,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>)> {
    let (train, test) = split_indices(data.labels(), test_fraction, seed)?;
    Ok((data.subset(&train)?, data.subset(&test)?))
}
