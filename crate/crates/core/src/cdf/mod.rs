//! Feature bank over a reference set and class-defining feature selection by
//! mutual information.

pub mod bank;
pub mod io;
pub mod mi;
pub mod select;

pub use bank::{build_feature_bank, FeatureBank};
pub use io::{load_bank, load_cdf_table, save_bank, save_cdf_table};
pub use mi::{discrete_mutual_information, mutual_information, quantile_cells};
pub use select::{select_cdfs, CdfTable, RankedFeature};
