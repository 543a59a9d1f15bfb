use serde::Serialize;

use crate::bcos::BcosNetwork;
use crate::cdf::{CdfTable, FeatureBank};
use crate::comix::knn::{joint_cdf_predict, per_feature_predict, pseudo_label, votes_for_features};
use crate::comix::vote::{aggregate, VoteGrid};
use crate::data::LabeledDataset;
use crate::digest::vector_digest;
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// How neighbours are retrieved for the vote grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    /// One scalar nearest-neighbour search per class-defining feature.
    #[default]
    PerFeature,
    /// One Euclidean search over the whole class-defining subset.
    JointCdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifyOptions {
    pub m: usize,
    pub k: usize,
    pub neighborhood: Neighborhood,
}

impl ClassifyOptions {
    pub fn new(m: usize, k: usize) -> Self {
        Self {
            m,
            k,
            neighborhood: Neighborhood::PerFeature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRecord<T> {
    pub pseudo_label: usize,
    /// Class-defining features of the pseudo-label that were queried.
    pub features: Vec<usize>,
    pub votes: VoteGrid<T>,
    pub aggregated_label: usize,
    pub tie_broken: bool,
    pub neighborhood: Neighborhood,
    /// Digest of the encoded input this record was computed for.
    pub input_digest: String,
}

impl<T: Scalar> PredictionRecord<T> {
    pub fn sample_refs(&self) -> Vec<usize> {
        self.votes.iter().flatten().map(|v| v.sample_ref).collect()
    }

    /// `true` when every vote agrees with the pseudo-label.
    pub fn unanimous_with_pseudo(&self) -> bool {
        self.votes.iter().flatten().all(|v| v.label == self.pseudo_label)
    }

    /// Share of votes carrying `class`.
    pub fn vote_share(&self, class: usize) -> T {
        let total = self.votes.iter().map(Vec::len).sum::<usize>();
        let hits = self.votes.iter().flatten().filter(|v| v.label == class).count();
        T::of(hits as f64) / T::of(total.max(1) as f64)
    }
}

/// One test/neighbour attribution pair of an explanation panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelEntry<T> {
    pub feature: usize,
    pub rank: usize,
    pub sample_ref: usize,
    pub label: usize,
    /// Row `feature` of the test input's collapsed map.
    pub test_row: Vec<T>,
    /// Row `feature` of the neighbour's collapsed map.
    pub train_row: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationPanel<T> {
    pub target_class: usize,
    pub factual: bool,
    pub entries: Vec<PanelEntry<T>>,
}

impl<T: Scalar> ExplanationPanel<T> {
    pub fn sample_refs(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.sample_ref).collect()
    }

    /// Mode of the labels of referenced samples, lowest class on ties.
    pub fn referenced_label_mode(&self) -> Option<usize> {
        let classes = self.entries.iter().map(|e| e.label).max()? + 1;
        let mut counts = vec![0usize; classes];
        self.entries.iter().for_each(|e| counts[e.label] += 1);
        let best = *counts.iter().max()?;
        counts.iter().position(|&c| c == best)
    }
}

fn check_compatible<T: Scalar>(net: &BcosNetwork<T>, bank: &FeatureBank<T>, cdfs: &CdfTable<T>) -> Result<()> {
    check_dim("bank embedding width", net.embedding_dim(), bank.dim())?;
    check_dim("CDF table embedding width", net.embedding_dim(), cdfs.embedding_dim())?;
    if bank.model_hash() != cdfs.model_hash() {
        return Err(Error::HashMismatch {
            expected: bank.model_hash().to_string(),
            found: cdfs.model_hash().to_string(),
        });
    }
    Ok(())
}

fn grid_for<T: Scalar>(
    bank: &FeatureBank<T>,
    features: &[usize],
    embedding: &[T],
    opts: &ClassifyOptions,
) -> Result<VoteGrid<T>> {
    match opts.neighborhood {
        Neighborhood::PerFeature => votes_for_features(bank, features, embedding, opts.k),
        Neighborhood::JointCdf => joint_cdf_predict(bank, features, embedding, opts.k),
    }
}

/// Classifies an encoded input: embed, pseudo-label by full-embedding 1-NN,
/// per-feature `K`-NN votes over the pseudo-label's top-`M` features, then the
/// mode of the votes.
pub fn classify<T: Scalar>(
    net: &BcosNetwork<T>,
    bank: &FeatureBank<T>,
    cdfs: &CdfTable<T>,
    x: &[T],
    opts: &ClassifyOptions,
) -> Result<PredictionRecord<T>> {
    check_compatible(net, bank, cdfs)?;
    // The embedding equals collapse(x)·x; the forward pass avoids the matrix.
    let embedding = net.embed(x)?;
    let pseudo = pseudo_label(bank, &embedding)?;
    let features = cdfs.features(pseudo, opts.m)?;
    let votes = match opts.neighborhood {
        Neighborhood::PerFeature => per_feature_predict(bank, cdfs, &embedding, pseudo, opts.m, opts.k)?,
        Neighborhood::JointCdf => grid_for(bank, &features, &embedding, opts)?,
    };
    let (aggregated_label, tie_broken) = aggregate(&votes, pseudo)?;
    Ok(PredictionRecord {
        pseudo_label: pseudo,
        features,
        votes,
        aggregated_label,
        tie_broken,
        neighborhood: opts.neighborhood,
        input_digest: vector_digest(x),
    })
}

fn build_panel<T: Scalar>(
    net: &BcosNetwork<T>,
    reference: &LabeledDataset<T>,
    votes: &VoteGrid<T>,
    x: &[T],
    target_class: usize,
    factual: bool,
) -> Result<ExplanationPanel<T>> {
    let test_map = net.collapse(x)?;
    let mut entries = Vec::new();
    for vote in votes.iter().flatten() {
        if vote.sample_ref >= reference.len() || reference.label(vote.sample_ref) != vote.label {
            return Err(Error::invalid(format!(
                "vote references sample {} which does not match the reference dataset",
                vote.sample_ref
            )));
        }
        let neighbour = reference.encoded(vote.sample_ref);
        entries.push(PanelEntry {
            feature: vote.feature,
            rank: vote.rank,
            sample_ref: vote.sample_ref,
            label: vote.label,
            test_row: test_map.attribution_row(vote.feature).to_vec(),
            train_row: net.attribution_row(&neighbour, vote.feature)?,
        });
    }
    Ok(ExplanationPanel {
        target_class,
        factual,
        entries,
    })
}

/// Pairs every vote of `record` with the test and neighbour attribution rows of
/// its feature, in feature then rank order.
pub fn explain<T: Scalar>(
    net: &BcosNetwork<T>,
    reference: &LabeledDataset<T>,
    record: &PredictionRecord<T>,
    x: &[T],
) -> Result<ExplanationPanel<T>> {
    let digest = vector_digest(x);
    if digest != record.input_digest {
        return Err(Error::HashMismatch {
            expected: record.input_digest.clone(),
            found: digest,
        });
    }
    build_panel(net, reference, &record.votes, x, record.aggregated_label, true)
}

/// Panel for the evidence the model would use had `target` been the pseudo-label.
#[allow(clippy::too_many_arguments)]
pub fn counterfactual_explain<T: Scalar>(
    net: &BcosNetwork<T>,
    bank: &FeatureBank<T>,
    reference: &LabeledDataset<T>,
    cdfs: &CdfTable<T>,
    x: &[T],
    target: usize,
    opts: &ClassifyOptions,
) -> Result<ExplanationPanel<T>> {
    check_compatible(net, bank, cdfs)?;
    if target >= cdfs.class_count() {
        return Err(Error::invalid(format!(
            "unknown class {target} (table has {} classes)",
            cdfs.class_count()
        )));
    }
    let embedding = net.embed(x)?;
    let features = cdfs.features(target, opts.m)?;
    let votes = grid_for(bank, &features, &embedding, opts)?;
    build_panel(net, reference, &votes, x, target, false)
}
