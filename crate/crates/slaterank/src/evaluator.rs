//! List evaluator: context-aware per-item CTR prediction for whole slates.
//!
//! Each slate item is encoded and passed through a shared point DNN; the
//! per-item representations are concatenated into a list vector from which
//! one head emits a CTR logit per position. Every prediction therefore
//! depends on the entire ordered slate, not just the anchor item.
//!
//! The training loss is an exposure-masked sigmoid cross entropy: unexposed
//! positions contribute nothing. A point-wise twin of the per-item trunk
//! (no list context) ships alongside as the comparison baseline.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{CandidateSet, FeatureSchema, LoggedSample, Slate};
use crate::error::{Error, Result};
use crate::features::{EncoderGrads, FeatureEncoder};
use crate::nn::ops::sigmoid;
use crate::nn::{checkpoint, Activation, AdaGrad, Matrix, Mlp, MlpGrads};
use crate::rng;

/// Predictions are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before any log.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvaluatorConfig {
    /// Slate length the model is wired for.
    pub l: usize,
    /// Hidden widths of the shared per-item trunk; the last entry is the
    /// item representation width.
    pub point_hidden: Vec<usize>,
    /// Hidden widths of the list head emitting one logit per position.
    pub head_hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        EvaluatorConfig {
            l: 4,
            point_hidden: vec![64, 32],
            head_hidden: vec![64],
            learning_rate: 0.01,
            epsilon: 1e-8,
            epochs: 5,
            holdout_fraction: 0.2,
            seed: 0,
        }
    }
}

impl EvaluatorConfig {
    fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::Config("slate length must be >= 1".into()));
        }
        if self.point_hidden.is_empty() {
            return Err(Error::Config("point_hidden must not be empty".into()));
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(Error::Config(format!(
                "holdout_fraction {} outside [0, 1)",
                self.holdout_fraction
            )));
        }
        Ok(())
    }
}

/// Per-item CTR predictions for one slate plus their sum, the expected
/// number of clicks used as the list selection score.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationResult {
    pub per_item_ctr: Vec<f64>,
    pub list_score: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvaluatorModel {
    schema: FeatureSchema,
    encoder: FeatureEncoder,
    point_net: Mlp,
    head: Mlp,
    l: usize,
}

/// Gradients for every evaluator parameter block.
#[derive(Clone, Debug)]
pub struct EvaluatorGrads {
    pub encoder: EncoderGrads,
    pub point: MlpGrads,
    pub head: MlpGrads,
}

impl EvaluatorGrads {
    pub fn blocks(&self) -> Vec<(String, &[f64])> {
        let mut out = self.encoder.blocks("enc");
        out.extend(self.point.blocks("point"));
        out.extend(self.head.blocks("head"));
        out
    }
}

struct Forward {
    traces: Vec<crate::features::EncodeTrace>,
    point_acts: Vec<Matrix>,
    head_acts: Vec<Matrix>,
    probs: Vec<f64>,
}

impl EvaluatorModel {
    pub fn new(schema: &FeatureSchema, config: &EvaluatorConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = rng::stream(seed, "evaluator.init");
        let encoder = FeatureEncoder::new(schema, &mut init);
        let mut point_dims = vec![encoder.output_dim()];
        point_dims.extend_from_slice(&config.point_hidden);
        let point_net = Mlp::new(&point_dims, Activation::Relu, Activation::Relu, &mut init);
        let rep = *config.point_hidden.last().unwrap();
        let mut head_dims = vec![rep * config.l];
        head_dims.extend_from_slice(&config.head_hidden);
        head_dims.push(config.l);
        let head = Mlp::new(&head_dims, Activation::Relu, Activation::Identity, &mut init);
        Ok(EvaluatorModel {
            schema: schema.clone(),
            encoder,
            point_net,
            head,
            l: config.l,
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    fn forward(&self, set: &CandidateSet, positions: &[usize]) -> Result<Forward> {
        if positions.len() != self.l {
            return Err(Error::Config(format!(
                "slate length {} does not match model l={}",
                positions.len(),
                self.l
            )));
        }
        let (input, traces) = self.encoder.encode_batch(set, positions)?;
        let point_acts = self.point_net.forward(&input)?;
        let reps = point_acts.last().unwrap();
        let mut list_vec = Matrix::zeros(1, reps.rows() * reps.cols());
        {
            let row = list_vec.row_mut(0);
            for r in 0..reps.rows() {
                row[r * reps.cols()..(r + 1) * reps.cols()].copy_from_slice(reps.row(r));
            }
        }
        let head_acts = self.head.forward(&list_vec)?;
        let probs = head_acts
            .last()
            .unwrap()
            .row(0)
            .iter()
            .map(|z| sigmoid(*z).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP))
            .collect();
        Ok(Forward {
            traces,
            point_acts,
            head_acts,
            probs,
        })
    }

    /// Backpropagates a gradient w.r.t. the per-position logits.
    fn backward(&self, fwd: &Forward, dlogits: &[f64]) -> Result<EvaluatorGrads> {
        let upstream = Matrix::from_vec(1, self.l, dlogits.to_vec())?;
        let (head_grads, dlist) = self.head.backward(&fwd.head_acts, &upstream)?;
        let reps = fwd.point_acts.last().unwrap();
        let mut dreps = Matrix::zeros(reps.rows(), reps.cols());
        for r in 0..reps.rows() {
            dreps
                .row_mut(r)
                .copy_from_slice(&dlist.row(0)[r * reps.cols()..(r + 1) * reps.cols()]);
        }
        let (point_grads, dinput) = self.point_net.backward(&fwd.point_acts, &dreps)?;
        let mut enc_grads = EncoderGrads::zeros_like(&self.encoder);
        for (r, trace) in fwd.traces.iter().enumerate() {
            self.encoder.backward(trace, dinput.row(r), &mut enc_grads);
        }
        Ok(EvaluatorGrads {
            encoder: enc_grads,
            point: point_grads,
            head: head_grads,
        })
    }

    /// Predicts the CTR of every position of `slate` in its list context.
    /// Deterministic; the same slate always yields the same result.
    pub fn predict_list_ctr(&self, set: &CandidateSet, slate: &Slate) -> Result<EvaluationResult> {
        slate.validate(set.len())?;
        let fwd = self.forward(set, &slate.positions)?;
        let list_score = fwd.probs.iter().sum();
        Ok(EvaluationResult {
            per_item_ctr: fwd.probs,
            list_score,
        })
    }

    /// Loss and parameter gradients of the exposure-masked cross entropy on
    /// one logged slate.
    pub fn loss_grads(&self, set: &CandidateSet, slate: &Slate) -> Result<(f64, EvaluatorGrads)> {
        let fwd = self.forward(set, &slate.positions)?;
        let loss = evaluator_loss(&fwd.probs, &slate.exposure, &slate.click)?;
        let dlogits: Vec<f64> = fwd
            .probs
            .iter()
            .zip(&slate.exposure)
            .zip(&slate.click)
            .map(|((p, e), c)| {
                if *e {
                    p - if *c { 1.0 } else { 0.0 }
                } else {
                    0.0
                }
            })
            .collect();
        let grads = self.backward(&fwd, &dlogits)?;
        Ok((loss, grads))
    }

    pub fn block_shapes(&self) -> Vec<(String, usize)> {
        let mut out = self.encoder.block_shapes("enc");
        out.extend(self.point_net.block_shapes("point"));
        out.extend(self.head.block_shapes("head"));
        out
    }

    pub fn param_blocks_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = self.encoder.param_blocks_mut("enc");
        out.extend(self.point_net.param_blocks_mut("point"));
        out.extend(self.head.param_blocks_mut("head"));
        out
    }

    /// Order-sensitive hash of all parameter bits; cheap mutation witness.
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
        checkpoint::save(path, "evaluator", self, optimizer)
    }

    pub fn load(path: &Path) -> Result<(Self, Option<AdaGrad>)> {
        checkpoint::load(path, "evaluator")
    }

    #[cfg(test)]
    fn zero_head_output_layer(&mut self) {
        let last = self.head.layers.last_mut().unwrap();
        for v in last.weights.data_mut() {
            *v = 0.0;
        }
        for v in &mut last.bias {
            *v = 0.0;
        }
    }
}

/// Exposure-masked negative log likelihood:
/// `-sum_i exposure_i * [click_i*log(p_i) + (1-click_i)*log(1-p_i)]`.
///
/// Probabilities inside [0, 1] are clamped away from the endpoints before
/// the log; values outside [0, 1] (or non-finite) are numeric errors.
pub fn evaluator_loss(per_item_ctr: &[f64], exposure: &[bool], click: &[bool]) -> Result<f64> {
    if per_item_ctr.len() != exposure.len() || per_item_ctr.len() != click.len() {
        return Err(Error::Usage("loss vectors must share one length".into()));
    }
    if click.iter().zip(exposure).any(|(c, e)| *c && !*e) {
        return Err(Error::Usage("click without exposure".into()));
    }
    let mut loss = 0.0;
    for ((p, e), c) in per_item_ctr.iter().zip(exposure).zip(click) {
        if !p.is_finite() || !(0.0..=1.0).contains(p) {
            return Err(Error::Numeric(format!("predicted CTR {p} outside (0, 1)")));
        }
        if !e {
            continue;
        }
        let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        loss -= if *c { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(loss)
}

/// Probability that a uniformly random positive outscores a uniformly
/// random negative, ties counted one half. Rank-sum implementation.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Usage("scores and labels must share one length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("NaN score in AUC input".into()));
    }
    let positives = labels.iter().filter(|l| **l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs at least one positive and one negative label".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|a, b| scores[*a].partial_cmp(&scores[*b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // 1-based average rank of the tie group [i, j)
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let np = positives as f64;
    let nn = negatives as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn))
}

/// Index of the slate with the highest list score; ties go to the lowest
/// index, so the winner is stable under permutation of equal scores.
pub fn select_best(model: &EvaluatorModel, set: &CandidateSet, slates: &[Slate]) -> Result<usize> {
    if slates.is_empty() {
        return Err(Error::Usage("select_best needs at least one slate".into()));
    }
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, slate) in slates.iter().enumerate() {
        let score = model.predict_list_ctr(set, slate)?.list_score;
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalEpochMetrics {
    pub epoch: usize,
    pub loss: f64,
    pub auc: Option<f64>,
}

fn split_holdout(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut indices: Vec<usize> = (0..n).collect();
    shuffle(&mut indices, &mut rng::stream(seed, "train.split"));
    let holdout_n = ((n as f64) * fraction).round() as usize;
    let holdout_n = holdout_n.min(n.saturating_sub(1));
    let train = indices[..n - holdout_n].to_vec();
    let holdout = indices[n - holdout_n..].to_vec();
    (train, holdout)
}

/// Fisher-Yates over our seeded stream, kept local so shuffles stay
/// reproducible across rand versions.
pub(crate) fn shuffle(indices: &mut [usize], rng: &mut impl rand::Rng) {
    for i in (1..indices.len()).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
}

/// Trains the list evaluator with AdaGrad, one update per logged sample.
/// Returns the model and per-epoch (mean train loss, holdout AUC).
pub fn train_evaluator(
    samples: &[LoggedSample],
    schema: &FeatureSchema,
    config: &EvaluatorConfig,
) -> Result<(EvaluatorModel, Vec<EvalEpochMetrics>)> {
    if samples.is_empty() {
        return Err(Error::Usage("training set is empty".into()));
    }
    for s in samples {
        if s.l() != config.l {
            return Err(Error::Config(format!(
                "sample slate length {} does not match config l={}",
                s.l(),
                config.l
            )));
        }
    }
    let mut model = EvaluatorModel::new(schema, config, config.seed)?;
    let shapes = model.block_shapes();
    let mut opt = AdaGrad::new(config.learning_rate, config.epsilon, &shapes)?;
    let (train_idx, holdout_idx) = split_holdout(samples.len(), config.holdout_fraction, config.seed);
    let holdout: Vec<&LoggedSample> = holdout_idx.iter().map(|i| &samples[*i]).collect();

    let mut metrics = Vec::with_capacity(config.epochs);
    let mut order = train_idx;
    for epoch in 0..config.epochs {
        shuffle(&mut order, &mut rng::indexed_stream(config.seed, "eval.epoch", epoch as u64));
        let mut total_loss = 0.0;
        for &i in &order {
            total_loss += evaluator_step(&mut model, &samples[i], &mut opt).map_err(|e| {
                Error::Training(format!("sample {i}, epoch {epoch}: {e}"))
            })?;
        }
        let auc_val = holdout_auc(&model, &holdout);
        metrics.push(EvalEpochMetrics {
            epoch,
            loss: total_loss / order.len().max(1) as f64,
            auc: auc_val,
        });
    }
    Ok((model, metrics))
}

/// One AdaGrad update of the evaluator from one logged sample; returns the
/// sample loss. Building block for day-by-day retraining.
pub fn evaluator_step(
    model: &mut EvaluatorModel,
    sample: &LoggedSample,
    opt: &mut AdaGrad,
) -> Result<f64> {
    let (loss, grads) = model.loss_grads(&sample.candidate_set, &sample.selected)?;
    if !loss.is_finite() {
        return Err(Error::Training("non-finite evaluator loss".into()));
    }
    apply_step(model, opt, &grads)?;
    Ok(loss)
}

/// One AdaGrad update of the point-wise baseline from the exposed items of
/// one logged sample; returns the summed item loss.
pub fn pointwise_step(
    model: &mut PointwiseModel,
    sample: &LoggedSample,
    opt: &mut AdaGrad,
) -> Result<f64> {
    let exposed: Vec<usize> = sample
        .selected
        .positions
        .iter()
        .enumerate()
        .filter(|(pos, _)| sample.selected.exposure[*pos])
        .map(|(_, idx)| *idx)
        .collect();
    if exposed.is_empty() {
        return Ok(0.0);
    }
    let clicks: Vec<bool> = sample
        .selected
        .click
        .iter()
        .zip(&sample.selected.exposure)
        .filter(|(_, e)| **e)
        .map(|(c, _)| *c)
        .collect();
    let (input, traces) = model.encoder.encode_batch(&sample.candidate_set, &exposed)?;
    let acts = model.net.forward(&input)?;
    let out = acts.last().unwrap();
    let mut loss = 0.0;
    let mut dlogits = Matrix::zeros(out.rows(), 1);
    for r in 0..out.rows() {
        let p = sigmoid(out.get(r, 0)).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        loss -= if clicks[r] { p.ln() } else { (1.0 - p).ln() };
        dlogits.set(r, 0, p - if clicks[r] { 1.0 } else { 0.0 });
    }
    let (net_grads, dinput) = model.net.backward(&acts, &dlogits)?;
    let mut enc_grads = EncoderGrads::zeros_like(&model.encoder);
    for (r, trace) in traces.iter().enumerate() {
        model.encoder.backward(trace, dinput.row(r), &mut enc_grads);
    }
    let mut params = model.encoder.param_blocks_mut("enc");
    params.extend(model.net.param_blocks_mut("net"));
    let grad_blocks: Vec<(String, &[f64])> = {
        let mut b = enc_grads.blocks("enc");
        b.extend(net_grads.blocks("net"));
        b
    };
    let mut p: Vec<(&str, &mut [f64])> = params
        .iter_mut()
        .map(|(n, s)| (n.as_str(), &mut **s))
        .collect();
    let g: Vec<(&str, &[f64])> = grad_blocks.iter().map(|(n, s)| (n.as_str(), *s)).collect();
    opt.step(&mut p, &g)?;
    Ok(loss)
}

/// Optimizer sized for this model's parameter blocks.
pub fn evaluator_optimizer(model: &EvaluatorModel, config: &EvaluatorConfig) -> Result<AdaGrad> {
    AdaGrad::new(config.learning_rate, config.epsilon, &model.block_shapes())
}

/// Optimizer sized for the point-wise baseline's parameter blocks.
pub fn pointwise_optimizer(model: &PointwiseModel, config: &EvaluatorConfig) -> Result<AdaGrad> {
    let mut shapes = model.encoder.block_shapes("enc");
    shapes.extend(model.net.block_shapes("net"));
    AdaGrad::new(config.learning_rate, config.epsilon, &shapes)
}

fn apply_step(model: &mut EvaluatorModel, opt: &mut AdaGrad, grads: &EvaluatorGrads) -> Result<()> {
    let mut params = model.param_blocks_mut();
    let grad_blocks = grads.blocks();
    let mut p: Vec<(&str, &mut [f64])> = params
        .iter_mut()
        .map(|(n, s)| (n.as_str(), &mut **s))
        .collect();
    let g: Vec<(&str, &[f64])> = grad_blocks.iter().map(|(n, s)| (n.as_str(), *s)).collect();
    opt.step(&mut p, &g)
}

/// Pooled AUC of the evaluator's predictions on the exposed positions of
/// the given samples; `None` when undefined (no samples or one class).
pub fn holdout_auc(model: &EvaluatorModel, samples: &[&LoggedSample]) -> Option<f64> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for s in samples {
        let result = model.predict_list_ctr(&s.candidate_set, &s.selected).ok()?;
        for (pos, p) in result.per_item_ctr.iter().enumerate() {
            if s.selected.exposure[pos] {
                scores.push(*p);
                labels.push(s.selected.click[pos]);
            }
        }
    }
    auc(&scores, &labels).ok()
}

/// AUC of the evaluator over owned samples (convenience wrapper).
pub fn evaluate_auc(model: &EvaluatorModel, samples: &[LoggedSample]) -> Option<f64> {
    let refs: Vec<&LoggedSample> = samples.iter().collect();
    holdout_auc(model, &refs)
}

// ---------------------------------------------------------------------------
// Point-wise baseline: the same per-item trunk without any list context.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointwiseModel {
    schema: FeatureSchema,
    encoder: FeatureEncoder,
    net: Mlp,
}

impl PointwiseModel {
    pub fn new(schema: &FeatureSchema, config: &EvaluatorConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = rng::stream(seed, "pointwise.init");
        let encoder = FeatureEncoder::new(schema, &mut init);
        let mut dims = vec![encoder.output_dim()];
        dims.extend_from_slice(&config.point_hidden);
        dims.push(1);
        let net = Mlp::new(&dims, Activation::Relu, Activation::Identity, &mut init);
        Ok(PointwiseModel {
            schema: schema.clone(),
            encoder,
            net,
        })
    }

    /// CTR of one item scored in isolation.
    pub fn predict_item(&self, set: &CandidateSet, item_idx: usize) -> Result<f64> {
        let (input, _) = self.encoder.encode_batch(set, &[item_idx])?;
        let acts = self.net.forward(&input)?;
        Ok(sigmoid(acts.last().unwrap().get(0, 0)).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP))
    }

    pub fn save(&self, path: &Path, optimizer: Option<&AdaGrad>) -> Result<()> {
        checkpoint::save(path, "pointwise", self, optimizer)
    }

    pub fn load(path: &Path) -> Result<(Self, Option<AdaGrad>)> {
        checkpoint::load(path, "pointwise")
    }
}

/// Trains the point-wise baseline on exposed items only.
pub fn train_pointwise(
    samples: &[LoggedSample],
    schema: &FeatureSchema,
    config: &EvaluatorConfig,
) -> Result<(PointwiseModel, Vec<EvalEpochMetrics>)> {
    if samples.is_empty() {
        return Err(Error::Usage("training set is empty".into()));
    }
    let mut model = PointwiseModel::new(schema, config, config.seed)?;
    let mut shapes = model.encoder.block_shapes("enc");
    shapes.extend(model.net.block_shapes("net"));
    let mut opt = AdaGrad::new(config.learning_rate, config.epsilon, &shapes)?;
    let (train_idx, holdout_idx) = split_holdout(samples.len(), config.holdout_fraction, config.seed);
    let holdout: Vec<&LoggedSample> = holdout_idx.iter().map(|i| &samples[*i]).collect();

    let mut metrics = Vec::with_capacity(config.epochs);
    let mut order = train_idx;
    for epoch in 0..config.epochs {
        shuffle(&mut order, &mut rng::indexed_stream(config.seed, "pw.epoch", epoch as u64));
        let mut total_loss = 0.0;
        for &i in &order {
            total_loss += pointwise_step(&mut model, &samples[i], &mut opt).map_err(|e| {
                Error::Training(format!("sample {i}, epoch {epoch}: {e}"))
            })?;
        }
        let auc_val = pointwise_holdout_auc(&model, &holdout);
        metrics.push(EvalEpochMetrics {
            epoch,
            loss: total_loss / order.len().max(1) as f64,
            auc: auc_val,
        });
    }
    Ok((model, metrics))
}

/// Pooled AUC of the point-wise model on exposed items.
pub fn pointwise_holdout_auc(model: &PointwiseModel, samples: &[&LoggedSample]) -> Option<f64> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for s in samples {
        for (pos, &idx) in s.selected.positions.iter().enumerate() {
            if s.selected.exposure[pos] {
                scores.push(model.predict_item(&s.candidate_set, idx).ok()?);
                labels.push(s.selected.click[pos]);
            }
        }
    }
    auc(&scores, &labels).ok()
}

/// AUC of the point-wise model over owned samples.
pub fn evaluate_pointwise_auc(model: &PointwiseModel, samples: &[LoggedSample]) -> Option<f64> {
    let refs: Vec<&LoggedSample> = samples.iter().collect();
    pointwise_holdout_auc(model, &refs)
}
