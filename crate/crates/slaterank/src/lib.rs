//! Combinatorial slate reranking engine.
//!
//! The crate builds a complete actor-critic reranking loop at desk scale:
//!
//! - [`nn`] — dense layers with exact analytic gradients and AdaGrad;
//! - [`data`] — feature schema, decision-log ingestion, rank labels;
//! - [`evaluator`] — context-aware per-item CTR prediction over whole
//!   slates, its exposure-masked loss, AUC, and best-list selection;
//! - [`generator`] — permutation-invariant set-to-policy model emitting a
//!   generation policy matrix, with the two-sided softmax loss;
//! - [`sampler`] — temperature-controlled sequential slate sampling with
//!   pluggable legality rules, plus the point-wise heuristic generator;
//! - [`training`] — reward functions and policy-gradient training;
//! - [`simulator`] — a synthetic contextual click world closing the loop,
//!   with the two-step bootstrap that takes a ranking system to a full
//!   generator/evaluator loop;
//! - [`cli`] — the commands behind the `slaterank` binary.
//!
//! Start with the `examples/` directory: each example is a runnable tour
//! of one capability.

pub mod cli;
pub mod data;
pub mod error;
pub mod evaluator;
pub mod features;
pub mod generator;
pub mod nn;
pub mod rng;
pub mod sampler;
pub mod simulator;
pub mod training;

pub use error::{Error, Result};
