//! AdaGrad with per-parameter accumulators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimizer state: one nonnegative accumulator per parameter, kept in
/// named blocks that must line up with the model's parameter blocks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdaGrad {
    pub learning_rate: f64,
    pub epsilon: f64,
    blocks: Vec<AccBlock>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AccBlock {
    name: String,
    acc: Vec<f64>,
}

impl AdaGrad {
    /// `shapes` gives (block name, parameter count) in update order.
    pub fn new(learning_rate: f64, epsilon: f64, shapes: &[(String, usize)]) -> Result<Self> {
        if !learning_rate.is_finite() || learning_rate <= 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(AdaGrad {
            learning_rate,
            epsilon,
            blocks: shapes
                .iter()
                .map(|(name, len)| AccBlock {
                    name: name.clone(),
                    acc: vec![0.0; *len],
                })
                .collect(),
        })
    }

    /// One update: `acc += g^2; p -= lr * g / sqrt(acc + eps)`.
    ///
    /// Parameter and gradient blocks must match the registered shapes in
    /// order, name and length. A non-finite gradient aborts with the
    /// offending block's name.
    pub fn step(
        &mut self,
        params: &mut [(&str, &mut [f64])],
        grads: &[(&str, &[f64])],
    ) -> Result<()> {
        if params.len() != self.blocks.len() || grads.len() != self.blocks.len() {
            return Err(Error::Config(format!(
                "block count mismatch: optimizer has {}, got {} params / {} grads",
                self.blocks.len(),
                params.len(),
                grads.len()
            )));
        }
        let lr = self.learning_rate;
        let eps = self.epsilon;
        for (block, ((pname, p), (gname, g))) in
            self.blocks.iter_mut().zip(params.iter_mut().zip(grads))
        {
            if block.name != *pname || block.name != *gname {
                return Err(Error::Config(format!(
                    "block order mismatch: optimizer '{}' vs params '{}' / grads '{}'",
                    block.name, pname, gname
                )));
            }
            if p.len() != block.acc.len() || g.len() != block.acc.len() {
                return Err(Error::Config(format!(
                    "block '{}' length mismatch: acc {}, params {}, grads {}",
                    block.name,
                    block.acc.len(),
                    p.len(),
                    g.len()
                )));
            }
            for (i, gv) in g.iter().enumerate() {
                if !gv.is_finite() {
                    return Err(Error::Training(format!(
                        "non-finite gradient in '{}' at index {i}",
                        block.name
                    )));
                }
                block.acc[i] += gv * gv;
                p[i] -= lr * gv / (block.acc[i] + eps).sqrt();
            }
        }
        Ok(())
    }

    /// Total accumulator mass, used as a cheap mutation witness in tests.
    pub fn accumulator_sum(&self) -> f64 {
        self.blocks.iter().map(|b| b.acc.iter().sum::<f64>()).sum()
    }

    pub fn block_names(&self) -> Vec<&str> {
        self.blocks.iter().map(|b| b.name.as_str()).collect()
    }
}
