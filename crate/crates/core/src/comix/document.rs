//! JSON documents describing a classification and its explanation.

use serde::Serialize;

use crate::comix::classify::{ExplanationPanel, Neighborhood, PredictionRecord};
use crate::comix::vote::VoteGrid;
use crate::scalar::Scalar;

pub const RECORD_FORMAT: &str = "comix-record/1";

#[derive(Serialize)]
struct PanelRef {
    feature: usize,
    rank: usize,
    sample_ref: usize,
    label: usize,
}

#[derive(Serialize)]
struct PanelDoc {
    target_class: usize,
    factual: bool,
    entries: Vec<PanelRef>,
}

#[derive(Serialize)]
struct RecordDoc<'a, T> {
    format: &'static str,
    input_digest: &'a str,
    pseudo_label: usize,
    aggregated_label: usize,
    tie_broken: bool,
    neighborhood: Neighborhood,
    features: &'a [usize],
    votes: &'a VoteGrid<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    panel: Option<PanelDoc>,
}

/// Serialises a record (and optionally the sample references of a panel).
pub fn record_document<T: Scalar + Serialize>(
    record: &PredictionRecord<T>,
    panel: Option<&ExplanationPanel<T>>,
) -> String {
    let doc = RecordDoc {
        format: RECORD_FORMAT,
        input_digest: &record.input_digest,
        pseudo_label: record.pseudo_label,
        aggregated_label: record.aggregated_label,
        tie_broken: record.tie_broken,
        neighborhood: record.neighborhood,
        features: &record.features,
        votes: &record.votes,
        panel: panel.map(|p| PanelDoc {
            target_class: p.target_class,
            factual: p.factual,
            entries: p
                .entries
                .iter()
                .map(|e| PanelRef {
                    feature: e.feature,
                    rank: e.rank,
                    sample_ref: e.sample_ref,
                    label: e.label,
                })
                .collect(),
        }),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("record serialises");
    s.push('\n');
    s
}
