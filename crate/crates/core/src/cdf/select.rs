use crate::cdf::bank::FeatureBank;
use crate::cdf::mi::{discrete_mutual_information, quantile_cells};
use crate::error::{Error, Result};
use crate::scalar::{cmp, Scalar};

/// One ranked class-defining feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedFeature<T> {
    pub feature: usize,
    pub mi: T,
}

/// Per class, the top-`M` embedding features ranked by mutual information with
/// the one-vs-rest class indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable<T> {
    classes: Vec<Vec<RankedFeature<T>>>,
    bins: usize,
    embedding_dim: usize,
    model_hash: String,
}

impl<T: Scalar> CdfTable<T> {
    pub fn new(
        classes: Vec<Vec<RankedFeature<T>>>,
        bins: usize,
        embedding_dim: usize,
        model_hash: String,
    ) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Empty("CDF table has no classes"));
        }
        let m = classes[0].len();
        if m == 0 || m > embedding_dim {
            return Err(Error::invalid(format!(
                "CDF table lists {m} features for embedding dimension {embedding_dim}"
            )));
        }
        for (c, list) in classes.iter().enumerate() {
            if list.len() != m {
                return Err(Error::invalid(format!(
                    "class {c} lists {} features, expected {m}",
                    list.len()
                )));
            }
            let mut seen = vec![false; embedding_dim];
            for (k, r) in list.iter().enumerate() {
                if r.feature >= embedding_dim || std::mem::replace(&mut seen[r.feature], true) {
                    return Err(Error::invalid(format!(
                        "class {c}: feature {} duplicated or out of range",
                        r.feature
                    )));
                }
                if !(r.mi >= T::zero()) || (k > 0 && r.mi > list[k - 1].mi) {
                    return Err(Error::invalid(format!(
                        "class {c}: MI scores must be non-negative and non-increasing"
                    )));
                }
            }
        }
        Ok(Self {
            classes,
            bins,
            embedding_dim,
            model_hash,
        })
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Number of features listed per class.
    pub fn m(&self) -> usize {
        self.classes[0].len()
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    pub fn model_hash(&self) -> &str {
        &self.model_hash
    }

    pub fn ranked(&self, class: usize) -> Option<&[RankedFeature<T>]> {
        self.classes.get(class).map(Vec::as_slice)
    }

    /// First `m` feature indices of `class`, in rank order.
    pub fn features(&self, class: usize, m: usize) -> Result<Vec<usize>> {
        let list = self.ranked(class).ok_or_else(|| {
            Error::invalid(format!(
                "class {class} absent from CDF table with {} classes",
                self.class_count()
            ))
        })?;
        if m == 0 || m > list.len() {
            return Err(Error::invalid(format!(
                "M = {m} must lie in 1..={} (features stored per class)",
                list.len()
            )));
        }
        Ok(list[..m].iter().map(|r| r.feature).collect())
    }

    pub fn verify_model(&self, expected: &str) -> Result<()> {
        if self.model_hash == expected {
            Ok(())
        } else {
            Err(Error::HashMismatch {
                expected: expected.to_string(),
                found: self.model_hash.clone(),
            })
        }
    }
}

/// Ranks every bank column against each class's one-vs-rest indicator and
/// keeps the top `m`. Ties go to the lower feature index.
pub fn select_cdfs<T: Scalar>(bank: &FeatureBank<T>, m: usize, bins: usize) -> Result<CdfTable<T>> {
    let dim = bank.dim();
    if m == 0 || m > dim {
        return Err(Error::invalid(format!("M = {m} must lie in 1..={dim}")));
    }
    if bins < 2 {
        return Err(Error::invalid(format!("bins must be at least 2, got {bins}")));
    }
    let cells: Vec<Vec<usize>> = (0..dim)
        .map(|f| quantile_cells(&bank.column(f), bins))
        .collect();
    let mut classes = Vec::with_capacity(bank.class_count());
    for c in 0..bank.class_count() {
        let indicator: Vec<usize> = bank.labels().iter().map(|&l| (l == c) as usize).collect();
        let mut scored = cells
            .iter()
            .enumerate()
            .map(|(f, col)| {
                Ok(RankedFeature {
                    feature: f,
                    mi: discrete_mutual_information(col, &indicator)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        scored.sort_by(|a, b| cmp(b.mi, a.mi).then(a.feature.cmp(&b.feature)));
        scored.truncate(m);
        classes.push(scored);
    }
    CdfTable::new(classes, bins, dim, bank.model_hash().to_string())
}
