//! Inference: pseudo-label, per-feature nearest-neighbour voting, mode
//! aggregation and explanation panels.

pub mod classify;
pub mod document;
pub mod knn;
pub mod vote;

pub use classify::{
    classify, counterfactual_explain, explain, ClassifyOptions, ExplanationPanel, Neighborhood,
    PanelEntry, PredictionRecord,
};
pub use document::record_document;
pub use knn::{joint_cdf_predict, nearest_row, per_feature_predict, pseudo_label, votes_for_features};
pub use vote::{aggregate, Vote, VoteGrid};
