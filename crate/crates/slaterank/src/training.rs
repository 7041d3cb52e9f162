//! Generator training: reward functions, the policy-gradient step, and the
//! two training regimes.
//!
//! Naive mode fits the two-sided softmax loss on the logged (evaluator-
//! selected) lists; it is the variance-free supervised realization of an
//! indicator-reward update. CTR mode runs REINFORCE: slates are drawn from
//! the current policy (plus the logged list and the top-pctr list as
//! acceleration samples), rewarded by a frozen evaluator's mean predicted
//! CTR, and the advantage-weighted log-likelihood of the sampling chain is
//! pushed uphill. The baseline is the batch mean reward, which cancels any
//! constant shift of the rewards exactly.

use std::sync::Arc;

use rand::Rng;

use crate::data::{CandidateSet, FeatureSchema, LoggedSample, PolicyMatrix, Slate};
use crate::error::{Error, Result};
use crate::evaluator::EvaluatorModel;
use crate::generator::{
    generator_accuracies, list_log_prob_grad, GeneratorConfig, GeneratorGrads, GeneratorModel,
};
use crate::nn::{AdaGrad, Matrix};
use crate::rng;
use crate::sampler::{mcmc_generate, ranking_slate, temperature_table, GenerationConfig};

/// Reward assigned to a sampled slate.
#[derive(Clone)]
pub enum RewardFn {
    /// 1 if the slate equals the logged selection (same items, same
    /// order), else 0.
    Naive,
    /// Mean of the evaluator's per-item CTR predictions.
    Ctr,
    /// Caller-supplied hook over (candidate set, slate).
    Custom(Arc<dyn Fn(&CandidateSet, &Slate) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for RewardFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RewardFn::Naive => write!(f, "Naive"),
            RewardFn::Ctr => write!(f, "Ctr"),
            RewardFn::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl RewardFn {
    pub fn evaluate(
        &self,
        slate: &Slate,
        sample: &LoggedSample,
        evaluator: Option<&EvaluatorModel>,
    ) -> Result<f64> {
        let r = match self {
            RewardFn::Naive => reward_naive(slate, sample),
            RewardFn::Ctr => {
                let ev = evaluator
                    .ok_or_else(|| Error::Config("CTR reward needs an evaluator".into()))?;
                reward_ctr(slate, ev, &sample.candidate_set)?
            }
            RewardFn::Custom(f) => f(&sample.candidate_set, slate),
        };
        if !r.is_finite() {
            return Err(Error::Numeric(format!(
                "reward {r} for slate {:?} is not finite",
                slate.positions
            )));
        }
        Ok(r)
    }
}

/// 1 iff the slate is exactly the logged selection.
pub fn reward_naive(slate: &Slate, logged: &LoggedSample) -> f64 {
    if slate.positions == logged.selected.positions {
        1.0
    } else {
        0.0
    }
}

/// Mean predicted CTR of the slate under the (frozen) evaluator.
pub fn reward_ctr(slate: &Slate, evaluator: &EvaluatorModel, set: &CandidateSet) -> Result<f64> {
    let r = evaluator.predict_list_ctr(set, slate)?;
    Ok(r.list_score / slate.len() as f64)
}

/// One slate of a policy-gradient batch.
#[derive(Clone, Debug)]
pub struct BatchEntry {
    pub positions: Vec<usize>,
    pub reward: f64,
    pub log_prob: f64,
}

/// All slates drawn for one logged sample.
pub struct BatchSample<'a> {
    pub set: &'a CandidateSet,
    pub entries: Vec<BatchEntry>,
}

/// A policy-gradient batch: per-sample candidate sets with their sampled
/// slates, rewards and log-probabilities, all aligned.
pub struct TrainBatch<'a> {
    pub samples: Vec<BatchSample<'a>>,
}

impl TrainBatch<'_> {
    pub fn entry_count(&self) -> usize {
        self.samples.iter().map(|s| s.entries.len()).sum()
    }

    pub fn mean_reward(&self) -> f64 {
        let n = self.entry_count();
        if n == 0 {
            return 0.0;
        }
        let sum: f64 = self
            .samples
            .iter()
            .flat_map(|s| s.entries.iter().map(|e| e.reward))
            .sum();
        sum / n as f64
    }
}

/// Statistics of one policy-gradient step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepStats {
    pub mean_reward: f64,
    pub baseline: f64,
    /// Surrogate loss `-sum (reward - baseline) * log_prob`.
    pub surrogate_loss: f64,
    /// Mean entropy (nats) of the temperature-table position rows.
    pub row_entropy: f64,
}

/// Surrogate loss and parameter gradients of
/// `-sum_slates (reward - baseline) * list_log_prob(slate)`,
/// with `baseline` the batch mean reward. Does not touch the model.
pub fn policy_surrogate(
    model: &GeneratorModel,
    batch: &TrainBatch<'_>,
    t: f64,
) -> Result<(StepStats, GeneratorGrads)> {
    if batch.entry_count() == 0 {
        return Err(Error::Usage("policy-gradient batch is empty".into()));
    }
    let baseline = batch.mean_reward();
    let mut total = GeneratorGrads::zeros_like(model);
    let mut surrogate = 0.0;
    let mut entropy_sum = 0.0;
    for sample in &batch.samples {
        let fwd = model.forward(sample.set)?;
        let policy = PolicyMatrix::new(fwd.policy.clone(), model.l())?;
        let mut dpolicy = Matrix::zeros(model.l() + 1, sample.set.len());
        for entry in &sample.entries {
            let advantage = entry.reward - baseline;
            let (logp, dlogp) = list_log_prob_grad(&policy, &entry.positions, t)?;
            if !logp.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite log-probability for slate {:?}",
                    entry.positions
                )));
            }
            surrogate -= advantage * logp;
            for (dst, src) in dpolicy.data_mut().iter_mut().zip(dlogp.data()) {
                *dst -= advantage * src;
            }
        }
        if dpolicy.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::Training(format!(
                "non-finite policy gradient on sample with slates {:?}",
                sample
                    .entries
                    .iter()
                    .map(|e| &e.positions)
                    .collect::<Vec<_>>()
            )));
        }
        let grads = model.backward_from_dpolicy(&fwd, &dpolicy)?;
        total.accumulate(&grads);

        let table = temperature_table(&policy, t)?;
        let mut h = 0.0;
        for i in 0..policy.l() {
            for &p in table.row(i) {
                if p > 0.0 {
                    h -= p * p.ln();
                }
            }
        }
        entropy_sum += h / policy.l() as f64;
    }
    let stats = StepStats {
        mean_reward: baseline,
        baseline,
        surrogate_loss: surrogate,
        row_entropy: entropy_sum / batch.samples.len() as f64,
    };
    Ok((stats, total))
}

/// Applies one AdaGrad update from the batch's policy gradient.
pub fn policy_gradient_step(
    model: &mut GeneratorModel,
    batch: &TrainBatch<'_>,
    opt: &mut AdaGrad,
    t: f64,
) -> Result<StepStats> {
    let (stats, grads) = policy_surrogate(model, batch, t)?;
    apply_step(model, opt, &grads)?;
    Ok(stats)
}

fn apply_step(model: &mut GeneratorModel, opt: &mut AdaGrad, grads: &GeneratorGrads) -> Result<()> {
    let mut params = model.param_blocks_mut();
    let grad_blocks = grads.blocks();
    let mut p: Vec<(&str, &mut [f64])> = params
        .iter_mut()
        .map(|(n, s)| (n.as_str(), &mut **s))
        .collect();
    let g: Vec<(&str, &[f64])> = grad_blocks.iter().map(|(n, s)| (n.as_str(), *s)).collect();
    opt.step(&mut p, &g)
}

/// One supervised (two-sided softmax) AdaGrad update on a logged sample;
/// returns the sample loss. Building block for day-by-day retraining.
pub fn supervised_step(
    model: &mut GeneratorModel,
    sample: &LoggedSample,
    lambda: f64,
    opt: &mut AdaGrad,
) -> Result<f64> {
    let (loss, _, grads) = model.supervised_loss_grads(
        &sample.candidate_set,
        &sample.selected.positions,
        lambda,
    )?;
    if !loss.is_finite() {
        return Err(Error::Training("non-finite supervised loss".into()));
    }
    apply_step(model, opt, &grads)?;
    Ok(loss)
}

/// One CTR-reward REINFORCE update on a logged sample (policy draws plus
/// the logged and top-pctr lists). Building block for day-by-day
/// retraining.
pub fn ctr_step(
    model: &mut GeneratorModel,
    sample: &LoggedSample,
    evaluator: &EvaluatorModel,
    config: &GeneratorTrainConfig,
    opt: &mut AdaGrad,
    rng: &mut impl Rng,
) -> Result<StepStats> {
    let batch = assemble_ctr_batch(model, sample, evaluator, config, rng)?;
    policy_gradient_step(model, &batch, opt, config.generation.t)
}

/// Optimizer sized for this generator's parameter blocks.
pub fn generator_optimizer(model: &GeneratorModel, config: &GeneratorTrainConfig) -> Result<AdaGrad> {
    AdaGrad::new(config.learning_rate, config.epsilon, &model.block_shapes())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainMode {
    Naive,
    Ctr,
}

impl std::str::FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(TrainMode::Naive),
            "ctr" => Ok(TrainMode::Ctr),
            other => Err(Error::Config(format!("unknown training mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorTrainConfig {
    pub model: GeneratorConfig,
    pub generation: GenerationConfig,
    pub learning_rate: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for GeneratorTrainConfig {
    fn default() -> Self {
        GeneratorTrainConfig {
            model: GeneratorConfig::default(),
            generation: GenerationConfig::default(),
            learning_rate: 0.01,
            epsilon: 1e-8,
            epochs: 5,
            holdout_fraction: 0.2,
            seed: 0,
        }
    }
}

/// Per-epoch generator metrics. `average_ctr` is the frozen evaluator's
/// mean predicted CTR over slates sampled from the current policy on the
/// metric set; `mean_reward` averages the mode's own reward over the same
/// draws (imitation indicator for naive, predicted CTR for ctr).
#[derive(Clone, Debug, PartialEq)]
pub struct GenEpochMetrics {
    pub epoch: usize,
    pub mean_reward: f64,
    pub average_ctr: f64,
    pub selection_accuracy: f64,
    pub rank_accuracy: f64,
    /// Mean two-sided softmax loss; naive mode only.
    pub supervised_loss: Option<f64>,
}

/// Trains the generator in the given mode against a frozen evaluator.
/// Returns the model and per-epoch metrics on the held-out sets (the train
/// split itself when `holdout_fraction` is 0).
pub fn train_generator(
    mode: TrainMode,
    samples: &[LoggedSample],
    evaluator: &EvaluatorModel,
    schema: &FeatureSchema,
    config: &GeneratorTrainConfig,
) -> Result<(GeneratorModel, Vec<GenEpochMetrics>)> {
    let mut model = GeneratorModel::new(schema, &config.model, config.seed)?;
    let metrics = train_generator_continue(mode, samples, evaluator, config, &mut model, None)?;
    Ok((model, metrics))
}

/// Same as [`train_generator`] but updating an existing model in place,
/// optionally reusing optimizer state. Used for day-by-day retraining.
pub fn train_generator_continue(
    mode: TrainMode,
    samples: &[LoggedSample],
    evaluator: &EvaluatorModel,
    config: &GeneratorTrainConfig,
    model: &mut GeneratorModel,
    optimizer: Option<&mut AdaGrad>,
) -> Result<Vec<GenEpochMetrics>> {
    if samples.is_empty() {
        return Err(Error::Usage("training set is empty".into()));
    }
    let l = config.model.l;
    for s in samples {
        if s.l() != l {
            return Err(Error::Config(format!(
                "sample slate length {} does not match config l={l}",
                s.l()
            )));
        }
    }
    let mut local_opt;
    let opt: &mut AdaGrad = match optimizer {
        Some(o) => o,
        None => {
            local_opt = AdaGrad::new(config.learning_rate, config.epsilon, &model.block_shapes())?;
            &mut local_opt
        }
    };

    let n = samples.len();
    let mut indices: Vec<usize> = (0..n).collect();
    crate::evaluator::shuffle(&mut indices, &mut rng::stream(config.seed, "gen.split"));
    let holdout_n = ((n as f64) * config.holdout_fraction).round() as usize;
    let holdout_n = holdout_n.min(n.saturating_sub(1));
    let train_idx = indices[..n - holdout_n].to_vec();
    let metric_idx: Vec<usize> = if holdout_n == 0 {
        train_idx.clone()
    } else {
        indices[n - holdout_n..].to_vec()
    };

    let mut metrics = Vec::with_capacity(config.epochs);
    let mut order = train_idx;
    for epoch in 0..config.epochs {
        crate::evaluator::shuffle(
            &mut order,
            &mut rng::indexed_stream(config.seed, "gen.epoch", epoch as u64),
        );
        let mut rng_epoch = rng::indexed_stream(config.seed, "gen.draws", epoch as u64);
        let mut supervised_total = 0.0;
        match mode {
            TrainMode::Naive => {
                for &i in &order {
                    let sample = &samples[i];
                    let (loss, _, grads) = model.supervised_loss_grads(
                        &sample.candidate_set,
                        &sample.selected.positions,
                        config.model.lambda,
                    )?;
                    if !loss.is_finite() {
                        return Err(Error::Training(format!(
                            "non-finite supervised loss at sample {i}, epoch {epoch}"
                        )));
                    }
                    supervised_total += loss;
                    apply_step(model, opt, &grads)?;
                }
            }
            TrainMode::Ctr => {
                for &i in &order {
                    let sample = &samples[i];
                    let batch =
                        assemble_ctr_batch(model, sample, evaluator, config, &mut rng_epoch)?;
                    policy_gradient_step(model, &batch, opt, config.generation.t)?;
                }
            }
        }

        let mut rng_metric = rng::indexed_stream(config.seed, "gen.metric", epoch as u64);
        let (mean_reward, average_ctr, sel_acc, rank_acc) = evaluate_policy(
            mode,
            model,
            evaluator,
            samples,
            &metric_idx,
            &config.generation,
            &mut rng_metric,
        )?;
        metrics.push(GenEpochMetrics {
            epoch,
            mean_reward,
            average_ctr,
            selection_accuracy: sel_acc,
            rank_accuracy: rank_acc,
            supervised_loss: match mode {
                TrainMode::Naive => Some(supervised_total / order.len().max(1) as f64),
                TrainMode::Ctr => None,
            },
        });
    }
    Ok(metrics)
}

/// Builds the CTR-RL batch for one sample: policy draws plus the logged
/// list and the top-pctr list as acceleration samples.
fn assemble_ctr_batch<'a>(
    model: &GeneratorModel,
    sample: &'a LoggedSample,
    evaluator: &EvaluatorModel,
    config: &GeneratorTrainConfig,
    rng: &mut impl Rng,
) -> Result<TrainBatch<'a>> {
    let set = &sample.candidate_set;
    let policy = model.policy_matrix(set)?;
    let mut slates = mcmc_generate(&policy, set, &config.generation, rng)?;
    slates.push(sample.selected.clone());
    slates.push(Slate::unexposed(ranking_slate(set, config.model.l)));
    let mut entries = Vec::with_capacity(slates.len());
    for slate in &slates {
        let reward = reward_ctr(slate, evaluator, set)?;
        let log_prob =
            crate::generator::list_log_prob(&policy, &slate.positions, config.generation.t)?;
        entries.push(BatchEntry {
            positions: slate.positions.clone(),
            reward,
            log_prob,
        });
    }
    Ok(TrainBatch {
        samples: vec![BatchSample { set, entries }],
    })
}

/// Mean draw reward, frozen-evaluator Average CTR, and the two policy
/// accuracies against the logged selections, over the metric samples.
fn evaluate_policy(
    mode: TrainMode,
    model: &GeneratorModel,
    evaluator: &EvaluatorModel,
    samples: &[LoggedSample],
    metric_idx: &[usize],
    generation: &GenerationConfig,
    rng: &mut impl Rng,
) -> Result<(f64, f64, f64, f64)> {
    let mut reward_sum = 0.0;
    let mut ctr_sum = 0.0;
    let mut draw_count = 0usize;
    let mut sel_sum = 0.0;
    let mut rank_sum = 0.0;
    for &i in metric_idx {
        let sample = &samples[i];
        let set = &sample.candidate_set;
        let policy = model.policy_matrix(set)?;
        let slates = mcmc_generate(&policy, set, generation, rng)?;
        for slate in &slates {
            let ctr = reward_ctr(slate, evaluator, set)?;
            ctr_sum += ctr;
            reward_sum += match mode {
                TrainMode::Naive => reward_naive(slate, sample),
                TrainMode::Ctr => ctr,
            };
            draw_count += 1;
        }
        let (sel, rank) = generator_accuracies(&policy, &sample.selected.positions)?;
        sel_sum += sel;
        rank_sum += rank;
    }
    let n = metric_idx.len().max(1) as f64;
    let d = draw_count.max(1) as f64;
    Ok((reward_sum / d, ctr_sum / d, sel_sum / n, rank_sum / n))
}
