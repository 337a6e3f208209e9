//! A small convolutional network engine: im2col convolution, max pooling,
//! fully connected layers, ReLU and softmax cross-entropy, trained with ADAM.

mod adam;
pub mod checkpoint;
mod gradcheck;
mod layers;
mod network;
mod tensor;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{gradient_check, relative_error, GradCheckReport, LayerCheck, RELATIVE_FLOOR};
pub use layers::softmax;
pub use network::{architecture, lenet64, Cache, InputSpec, LayerSpec, Network, LENET64};
pub use tensor::{Real, Tensor};
pub use train::{
    evaluate, image_values, predict_all, to_batch, train, train_observed, write_log, LogEntry,
    TrainingConfig,
};
