//! Datasets: synthetic generation, IDX loading, input encoding and splits.

pub mod dataset;
pub mod encoding;
pub mod idx;
pub mod pnm;
pub mod split;
pub mod synthetic;

pub use dataset::LabeledDataset;
pub use encoding::{decode_input, encode_input, InputSpec};
pub use idx::{load_dataset_dir, load_idx, save_dataset_dir};
pub use pnm::{parse_pnm, read_pnm};
pub use split::{split, split_indices};
pub use synthetic::{generate_synthetic, SyntheticConfig};
