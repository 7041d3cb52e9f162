//! Versioned model checkpoints.
//!
//! Checkpoints are JSON containers holding the full model (layer shapes and
//! parameter arrays) plus optional optimizer state. Floats are written in
//! shortest round-trip form, so save/load is bit-exact for finite values.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::adagrad::AdaGrad;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Container<M> {
    format_version: u32,
    kind: String,
    model: M,
    optimizer: Option<AdaGrad>,
}

pub fn save<M: Serialize>(
    path: &Path,
    kind: &str,
    model: &M,
    optimizer: Option<&AdaGrad>,
) -> Result<()> {
    let container = Container {
        format_version: CHECKPOINT_VERSION,
        kind: kind.to_string(),
        model,
        optimizer: optimizer.cloned(),
    };
    let bytes = serde_json::to_vec(&container)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn load<M: DeserializeOwned>(path: &Path, kind: &str) -> Result<(M, Option<AdaGrad>)> {
    let bytes = fs::read(path)?;
    let container: Container<M> = serde_json::from_slice(&bytes)?;
    if container.format_version != CHECKPOINT_VERSION {
        return Err(Error::Config(format!(
            "checkpoint version {} unsupported (expected {})",
            container.format_version, CHECKPOINT_VERSION
        )));
    }
    if container.kind != kind {
        return Err(Error::Config(format!(
            "checkpoint kind '{}' does not match expected '{}'",
            container.kind, kind
        )));
    }
    Ok((container.model, container.optimizer))
}
