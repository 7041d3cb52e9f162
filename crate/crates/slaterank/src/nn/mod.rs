//! Minimal dense neural-network substrate: matrices, dense layers with
//! exact analytic gradients, embedding tables, AdaGrad, and checkpoints.
//!
//! Everything is 64-bit and single-threaded-deterministic: the same seed,
//! data and config produce bitwise-identical parameters.

pub mod adagrad;
pub mod checkpoint;
pub mod layer;
pub mod matrix;
pub mod ops;

pub use adagrad::AdaGrad;
pub use layer::{Activation, DenseLayer, EmbeddingTable, LayerGrads, Mlp, MlpGrads};
pub use matrix::Matrix;
