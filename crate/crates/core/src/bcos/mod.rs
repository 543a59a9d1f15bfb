//! B-cos layers and networks: forward pass, exact collapse into an
//! input-dependent linear map, training and model persistence.

pub mod io;
pub mod layer;
pub mod network;
pub mod train;

pub use io::{load_model, model_from_bytes, model_hash, model_to_bytes, save_model};
pub use layer::{bcos_unit, BcosLayer};
pub use network::{BcosNetwork, DynamicLinearMap, Forward};
pub use train::{loss_and_gradients, mean_loss, train, EpochStats, Gradients, TrainConfig, TrainReport};
