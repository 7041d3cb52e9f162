//! Set-to-policy list generator.
//!
//! A shared point DNN encodes every candidate item; a max-pooling layer
//! fuses the item representations into a set feature, which is concatenated
//! back onto each item before a rank classifier emits `l + 1` logits per
//! item (one per slate position plus "not in the list"). Per-item (column)
//! softmax turns the logits into the generation policy matrix. The whole
//! pipeline is built from per-item operations and a symmetric pool, so the
//! output is exactly permutation-equivariant in the candidate order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{rank_label, CandidateSet, FeatureSchema, PolicyMatrix};
use crate::error::{Error, Result};
use crate::features::{EncoderGrads, FeatureEncoder};
use crate::nn::ops::{argmax, log_sum_exp, softmax};
use crate::nn::{checkpoint, Activation, AdaGrad, Matrix, Mlp, MlpGrads};
use crate::rng;
use crate::sampler::temperature_table;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Slate length (the policy has `l + 1` rows).
    pub l: usize,
    /// Hidden widths of the shared per-item trunk; the last entry is the
    /// item representation width (also the pooled set-feature width).
    pub point_hidden: Vec<usize>,
    /// Hidden widths of the rank classifier.
    pub rank_hidden: Vec<usize>,
    /// Weight of the per-item rank loss inside the two-sided softmax loss.
    pub lambda: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            l: 4,
            point_hidden: vec![64, 32],
            rank_hidden: vec![64],
            lambda: 1.0,
        }
    }
}

impl GeneratorConfig {
    fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::Config("slate length must be >= 1".into()));
        }
        if self.point_hidden.is_empty() {
            return Err(Error::Config("point_hidden must not be empty".into()));
        }
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorModel {
    schema: FeatureSchema,
    encoder: FeatureEncoder,
    point_net: Mlp,
    rank_net: Mlp,
    l: usize,
}

/// Gradients for every generator parameter block.
#[derive(Clone, Debug)]
pub struct GeneratorGrads {
    pub encoder: EncoderGrads,
    pub point: MlpGrads,
    pub rank: MlpGrads,
}

impl GeneratorGrads {
    pub fn zeros_like(model: &GeneratorModel) -> Self {
        GeneratorGrads {
            encoder: EncoderGrads::zeros_like(&model.encoder),
            point: MlpGrads::zeros_like(&model.point_net),
            rank: MlpGrads::zeros_like(&model.rank_net),
        }
    }

    pub fn accumulate(&mut self, other: &GeneratorGrads) {
        self.encoder.accumulate(&other.encoder);
        self.point.accumulate(&other.point);
        self.rank.accumulate(&other.rank);
    }

    pub fn scale(&mut self, factor: f64) {
        self.encoder.scale(factor);
        self.point.scale(factor);
        self.rank.scale(factor);
    }

    pub fn blocks(&self) -> Vec<(String, &[f64])> {
        let mut out = self.encoder.blocks("enc");
        out.extend(self.point.blocks("point"));
        out.extend(self.rank.blocks("rank"));
        out
    }
}

/// Everything the forward pass computed for one candidate set.
pub struct GeneratorForward {
    traces: Vec<crate::features::EncodeTrace>,
    point_acts: Vec<Matrix>,
    rank_acts: Vec<Matrix>,
    /// Row index that won the max pool, per representation channel.
    pool_argmax: Vec<usize>,
    /// Rank logits, shape (l + 1) x n.
    pub logits: Matrix,
    /// Column-softmax of the logits, shape (l + 1) x n.
    pub policy: Matrix,
}

impl GeneratorModel {
    pub fn new(schema: &FeatureSchema, config: &GeneratorConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = rng::stream(seed, "generator.init");
        let encoder = FeatureEncoder::new(schema, &mut init);
        let mut point_dims = vec![encoder.output_dim()];
        point_dims.extend_from_slice(&config.point_hidden);
        let point_net = Mlp::new(&point_dims, Activation::Relu, Activation::Relu, &mut init);
        let rep = *config.point_hidden.last().unwrap();
        let mut rank_dims = vec![2 * rep];
        rank_dims.extend_from_slice(&config.rank_hidden);
        rank_dims.push(config.l + 1);
        let rank_net = Mlp::new(&rank_dims, Activation::Relu, Activation::Identity, &mut init);
        Ok(GeneratorModel {
            schema: schema.clone(),
            encoder,
            point_net,
            rank_net,
            l: config.l,
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    /// Full forward pass over the candidate set.
    pub fn forward(&self, set: &CandidateSet) -> Result<GeneratorForward> {
        let n = set.len();
        if n < self.l {
            return Err(Error::Usage(format!(
                "candidate set of {n} items cannot fill {} positions",
                self.l
            )));
        }
        let indices: Vec<usize> = (0..n).collect();
        let (input, traces) = self.encoder.encode_batch(set, &indices)?;
        let point_acts = self.point_net.forward(&input)?;
        let reps = point_acts.last().unwrap();
        let rep_w = reps.cols();

        // max pool over items, remembering the winning row per channel
        let mut pooled = vec![f64::NEG_INFINITY; rep_w];
        let mut pool_argmax = vec![0usize; rep_w];
        for r in 0..n {
            for (c, v) in reps.row(r).iter().enumerate() {
                if *v > pooled[c] {
                    pooled[c] = *v;
                    pool_argmax[c] = r;
                }
            }
        }

        let mut fused = Matrix::zeros(n, 2 * rep_w);
        for r in 0..n {
            let row = fused.row_mut(r);
            row[..rep_w].copy_from_slice(reps.row(r));
            row[rep_w..].copy_from_slice(&pooled);
        }
        let rank_acts = self.rank_net.forward(&fused)?;
        let per_item = rank_acts.last().unwrap(); // n x (l + 1)

        let mut logits = Matrix::zeros(self.l + 1, n);
        for j in 0..n {
            for i in 0..=self.l {
                logits.set(i, j, per_item.get(j, i));
            }
        }
        let mut policy = Matrix::zeros(self.l + 1, n);
        for j in 0..n {
            let col: Vec<f64> = (0..=self.l).map(|i| logits.get(i, j)).collect();
            for (i, p) in softmax(&col).into_iter().enumerate() {
                policy.set(i, j, p);
            }
        }
        Ok(GeneratorForward {
            traces,
            point_acts,
            rank_acts,
            pool_argmax,
            logits,
            policy,
        })
    }

    /// The generation policy for a candidate set; columns sum to one.
    pub fn policy_matrix(&self, set: &CandidateSet) -> Result<PolicyMatrix> {
        let fwd = self.forward(set)?;
        PolicyMatrix::new(fwd.policy, self.l)
    }

    /// Backpropagates a gradient w.r.t. the (l + 1) x n logits.
    pub fn backward_from_dlogits(
        &self,
        fwd: &GeneratorForward,
        dlogits: &Matrix,
    ) -> Result<GeneratorGrads> {
        let n = fwd.logits.cols();
        let rep_w = fwd.point_acts.last().unwrap().cols();
        if dlogits.rows() != self.l + 1 || dlogits.cols() != n {
            return Err(Error::Config("dlogits shape mismatch".into()));
        }
        let mut dper_item = Matrix::zeros(n, self.l + 1);
        for j in 0..n {
            for i in 0..=self.l {
                dper_item.set(j, i, dlogits.get(i, j));
            }
        }
        let (rank_grads, dfused) = self.rank_net.backward(&fwd.rank_acts, &dper_item)?;

        let mut dreps = Matrix::zeros(n, rep_w);
        for r in 0..n {
            dreps.row_mut(r).copy_from_slice(&dfused.row(r)[..rep_w]);
        }
        // pooled channels route their summed gradient to the winning row
        for (c, &winner) in fwd.pool_argmax.iter().enumerate() {
            let mut sum = 0.0;
            for r in 0..n {
                sum += dfused.get(r, rep_w + c);
            }
            let cur = dreps.get(winner, c);
            dreps.set(winner, c, cur + sum);
        }
        let (point_grads, dinput) = self.point_net.backward(&fwd.point_acts, &dreps)?;
        let mut enc_grads = EncoderGrads::zeros_like(&self.encoder);
        for (r, trace) in fwd.traces.iter().enumerate() {
            self.encoder.backward(trace, dinput.row(r), &mut enc_grads);
        }
        Ok(GeneratorGrads {
            encoder: enc_grads,
            point: point_grads,
            rank: rank_grads,
        })
    }

    /// Backpropagates a gradient w.r.t. the policy matrix entries through
    /// the per-column softmax.
    pub fn backward_from_dpolicy(
        &self,
        fwd: &GeneratorForward,
        dpolicy: &Matrix,
    ) -> Result<GeneratorGrads> {
        let n = fwd.policy.cols();
        let rows = self.l + 1;
        if dpolicy.rows() != rows || dpolicy.cols() != n {
            return Err(Error::Config("dpolicy shape mismatch".into()));
        }
        let mut dlogits = Matrix::zeros(rows, n);
        for j in 0..n {
            let mut dot = 0.0;
            for i in 0..rows {
                dot += fwd.policy.get(i, j) * dpolicy.get(i, j);
            }
            for i in 0..rows {
                let p = fwd.policy.get(i, j);
                dlogits.set(i, j, p * (dpolicy.get(i, j) - dot));
            }
        }
        self.backward_from_dlogits(fwd, &dlogits)
    }

    /// Two-sided softmax loss and its parameter gradients for one sample.
    pub fn supervised_loss_grads(
        &self,
        set: &CandidateSet,
        ids: &[usize],
        lambda: f64,
    ) -> Result<(f64, GeneratorForward, GeneratorGrads)> {
        let fwd = self.forward(set)?;
        let loss = softmax2d_loss(&fwd.logits, ids, lambda)?;
        let dlogits = softmax2d_grad(&fwd.logits, ids, lambda)?;
        let grads = self.backward_from_dlogits(&fwd, &dlogits)?;
        Ok((loss, fwd, grads))
    }

    pub fn block_shapes(&self) -> Vec<(String, usize)> {
        let mut out = self.encoder.block_shapes("enc");
        out.extend(self.point_net.block_shapes("point"));
        out.extend(self.rank_net.block_shapes("rank"));
        out
    }

    pub fn param_blocks_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = self.encoder.param_blocks_mut("enc");
        out.extend(self.point_net.param_blocks_mut("point"));
        out.extend(self.rank_net.param_blocks_mut("rank"));
        out
    }

    /// Order-sensitive hash of all parameter bits.
    pub fn param_checksum(&self) -> u64 {
        let bytes = serde_json::to_vec(self).expect("model serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }

    pub fn save(&self, path: &Path, optimizer: Option<&AdaGrad>) -> Result<()> {
        checkpoint::save(path, "generator", self, optimizer)
    }

    pub fn load(path: &Path) -> Result<(Self, Option<AdaGrad>)> {
        checkpoint::load(path, "generator")
    }

    #[cfg(test)]
    fn zero_rank_output_layer(&mut self) {
        let last = self.rank_net.layers.last_mut().unwrap();
        for v in last.weights.data_mut() {
            *v = 0.0;
        }
        for v in &mut last.bias {
            *v = 0.0;
        }
    }
}

fn validate_ids(ids: &[usize], n: usize, l: usize) -> Result<Vec<usize>> {
    rank_label(ids, n, l)
}

/// Two-sided softmax cross entropy over the rank logits: the sum over
/// position rows of item-selection cross entropy, plus `lambda` times the
/// sum over item columns of rank-classification cross entropy.
pub fn softmax2d_loss(logits: &Matrix, ids: &[usize], lambda: f64) -> Result<f64> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::Config(format!("lambda must be >= 0, got {lambda}")));
    }
    let l = logits.rows() - 1;
    let n = logits.cols();
    let ranks = validate_ids(ids, n, l)?;
    let mut loss_id = 0.0;
    for i in 0..l {
        let row = logits.row(i);
        loss_id += log_sum_exp(row) - row[ids[i]];
    }
    let mut loss_rank = 0.0;
    for j in 0..n {
        let col: Vec<f64> = (0..=l).map(|i| logits.get(i, j)).collect();
        loss_rank += log_sum_exp(&col) - col[ranks[j]];
    }
    Ok(loss_id + lambda * loss_rank)
}

/// Gradient of [`softmax2d_loss`] w.r.t. the logits.
pub fn softmax2d_grad(logits: &Matrix, ids: &[usize], lambda: f64) -> Result<Matrix> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::Config(format!("lambda must be >= 0, got {lambda}")));
    }
    let l = logits.rows() - 1;
    let n = logits.cols();
    let ranks = validate_ids(ids, n, l)?;
    let mut grad = Matrix::zeros(l + 1, n);
    for i in 0..l {
        let p = softmax(logits.row(i));
        for (j, pj) in p.into_iter().enumerate() {
            let delta = if ids[i] == j { 1.0 } else { 0.0 };
            grad.set(i, j, grad.get(i, j) + pj - delta);
        }
    }
    for j in 0..n {
        let col: Vec<f64> = (0..=l).map(|i| logits.get(i, j)).collect();
        let p = softmax(&col);
        for (i, pi) in p.into_iter().enumerate() {
            let delta = if ranks[j] == i { 1.0 } else { 0.0 };
            grad.set(i, j, grad.get(i, j) + lambda * (pi - delta));
        }
    }
    Ok(grad)
}

/// Log-probability that the sampling chain draws exactly `positions`:
/// at step `i` the temperature-table row `i` is restricted to the items
/// not yet chosen and renormalized.
pub fn list_log_prob(m: &PolicyMatrix, positions: &[usize], t: f64) -> Result<f64> {
    Ok(list_log_prob_grad(m, positions, t)?.0)
}

/// [`list_log_prob`] plus its gradient w.r.t. the policy matrix entries
/// (the "not in" row never receives direct gradient).
pub fn list_log_prob_grad(m: &PolicyMatrix, positions: &[usize], t: f64) -> Result<(f64, Matrix)> {
    let n = m.n();
    let l = m.l();
    if positions.len() != l {
        return Err(Error::Usage(format!(
            "slate length {} does not match policy length {l}",
            positions.len()
        )));
    }
    let table = temperature_table(m, t)?;
    let mut available = vec![true; n];
    let mut seen = vec![false; n];
    for &p in positions {
        if p >= n {
            return Err(Error::Usage(format!("slate index {p} out of range {n}")));
        }
        if seen[p] {
            return Err(Error::Usage(format!("duplicate slate index {p}")));
        }
        seen[p] = true;
    }
    let mut logp = 0.0;
    let mut grad = Matrix::zeros(l + 1, n);
    for (i, &choice) in positions.iter().enumerate() {
        let row = table.row(i);
        let num = row[choice];
        let den: f64 = row
            .iter()
            .enumerate()
            .filter(|(j, _)| available[*j])
            .map(|(_, v)| v)
            .sum();
        if num <= 0.0 || den <= 0.0 {
            return Err(Error::Domain(format!(
                "slate item {choice} has zero renormalized probability at step {i}"
            )));
        }
        logp += (num / den).ln();
        for j in 0..n {
            if available[j] {
                let q = row[j] / den;
                let delta = if j == choice { 1.0 } else { 0.0 };
                grad.set(i, j, t * (delta - q));
            }
        }
        available[choice] = false;
    }
    Ok((logp, grad))
}

/// Fraction of position rows whose argmax equals the target id, and
/// fraction of item columns whose argmax equals the target rank. Argmax
/// ties break toward the lowest index.
pub fn generator_accuracies(m: &PolicyMatrix, ids: &[usize]) -> Result<(f64, f64)> {
    let l = m.l();
    let n = m.n();
    let ranks = validate_ids(ids, n, l)?;
    let mut item_hits = 0usize;
    for i in 0..l {
        let row: Vec<f64> = (0..n).map(|j| m.get(i, j)).collect();
        if argmax(&row) == ids[i] {
            item_hits += 1;
        }
    }
    let mut rank_hits = 0usize;
    for j in 0..n {
        let col: Vec<f64> = (0..=l).map(|i| m.get(i, j)).collect();
        if argmax(&col) == ranks[j] {
            rank_hits += 1;
        }
    }
    Ok((item_hits as f64 / l as f64, rank_hits as f64 / n as f64))
}
