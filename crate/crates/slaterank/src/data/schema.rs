//! Feature schema: declares the user-side and item-side feature columns.
//!
//! Categorical features are dense-indexed with index 0 reserved for
//! out-of-vocabulary values; numeric features carry bucket boundaries for
//! embedding lookup (the raw value is also fed to the models).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Index reserved for out-of-vocabulary categorical values.
pub const OOV_INDEX: usize = 0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    Categorical { vocab_size: usize },
    Numeric { boundaries: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
    pub embedding_dim: usize,
}

impl FeatureDescriptor {
    pub fn categorical(name: &str, vocab_size: usize, embedding_dim: usize) -> Self {
        FeatureDescriptor {
            name: name.to_string(),
            kind: FeatureKind::Categorical { vocab_size },
            embedding_dim,
        }
    }

    pub fn numeric(name: &str, boundaries: Vec<f64>, embedding_dim: usize) -> Self {
        FeatureDescriptor {
            name: name.to_string(),
            kind: FeatureKind::Numeric { boundaries },
            embedding_dim,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 {
            return Err(Error::Config(format!(
                "feature '{}': embedding_dim must be >= 1",
                self.name
            )));
        }
        match &self.kind {
            FeatureKind::Categorical { vocab_size } => {
                if *vocab_size < 1 {
                    return Err(Error::Config(format!(
                        "feature '{}': vocab_size must be >= 1",
                        self.name
                    )));
                }
            }
            FeatureKind::Numeric { boundaries } => {
                for w in boundaries.windows(2) {
                    if !(w[0] < w[1]) {
                        return Err(Error::Config(format!(
                            "feature '{}': bucket boundaries must be strictly increasing",
                            self.name
                        )));
                    }
                }
                if boundaries.iter().any(|b| !b.is_finite()) {
                    return Err(Error::Config(format!(
                        "feature '{}': non-finite bucket boundary",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub version: u32,
    pub user_features: Vec<FeatureDescriptor>,
    pub item_features: Vec<FeatureDescriptor>,
}

impl FeatureSchema {
    pub fn new(
        user_features: Vec<FeatureDescriptor>,
        item_features: Vec<FeatureDescriptor>,
    ) -> Result<Self> {
        let schema = FeatureSchema {
            version: SCHEMA_VERSION,
            user_features,
            item_features,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = Vec::new();
        for f in self.user_features.iter().chain(&self.item_features) {
            f.validate()?;
            if names.contains(&f.name.as_str()) {
                return Err(Error::Config(format!("duplicate feature name '{}'", f.name)));
            }
            names.push(f.name.as_str());
        }
        Ok(())
    }

    fn split_counts(features: &[FeatureDescriptor]) -> (usize, usize) {
        let cat = features
            .iter()
            .filter(|f| matches!(f.kind, FeatureKind::Categorical { .. }))
            .count();
        (cat, features.len() - cat)
    }

    /// (categorical, numeric) column counts on the user side.
    pub fn user_counts(&self) -> (usize, usize) {
        Self::split_counts(&self.user_features)
    }

    /// (categorical, numeric) column counts on the item side.
    pub fn item_counts(&self) -> (usize, usize) {
        Self::split_counts(&self.item_features)
    }

    pub fn categorical_user(&self) -> impl Iterator<Item = &FeatureDescriptor> {
        self.user_features
            .iter()
            .filter(|f| matches!(f.kind, FeatureKind::Categorical { .. }))
    }

    pub fn numeric_user(&self) -> impl Iterator<Item = &FeatureDescriptor> {
        self.user_features
            .iter()
            .filter(|f| matches!(f.kind, FeatureKind::Numeric { .. }))
    }

    pub fn categorical_item(&self) -> impl Iterator<Item = &FeatureDescriptor> {
        self.item_features
            .iter()
            .filter(|f| matches!(f.kind, FeatureKind::Categorical { .. }))
    }

    pub fn numeric_item(&self) -> impl Iterator<Item = &FeatureDescriptor> {
        self.item_features
            .iter()
            .filter(|f| matches!(f.kind, FeatureKind::Numeric { .. }))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = serde_json::to_vec_pretty(self)?;
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)
            .map_err(|e| Error::Config(format!("cannot read schema {}: {e}", path.display())))?;
        let schema: FeatureSchema = serde_json::from_slice(&bytes)?;
        if schema.version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema version {} unsupported (expected {})",
                schema.version, SCHEMA_VERSION
            )));
        }
        schema.validate()?;
        Ok(schema)
    }
}
