//! Domain types, feature schema, decision-log ingestion, and rank labels.

pub mod io;
pub mod schema;
pub mod types;

pub use io::{load_samples, write_samples, ErrorPolicy, LoadOptions, LoadOutcome, OovPolicy, SampleReader};
pub use schema::{FeatureDescriptor, FeatureKind, FeatureSchema, OOV_INDEX};
pub use types::{bucketize, feature_cardinality, rank_label, CandidateSet, Item, LoggedSample, PolicyMatrix, Slate};
