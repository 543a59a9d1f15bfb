//! Faithfulness curves, sparsity and classification metrics.

pub mod classification;
pub mod curves;
pub mod report;
pub mod sparsity;

pub use classification::{accuracy, confusion_matrix};
pub use curves::{
    average_drop_increase, deletion_curve, drop_increase_from_scores, keep_top, insertion_curve, pixel_count, pixel_order, trapezoid,
    CurveResult, ScoreFunction,
};
pub use report::{MetricEntry, MetricReport};
pub use sparsity::pq_index;
