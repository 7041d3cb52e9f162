//! Synthetic contextual click world and the two-step bootstrap loop.
//!
//! The ground-truth click model is deliberately contextual: an item's click
//! probability depends on its base relevance to the user, a strictly
//! decreasing position bias, and a redundancy penalty that shrinks the
//! probability when earlier slate items share its category,
//!
//! `p(click at i) = sigmoid(w*q + affinity + bias) * pos_bias[i] *
//!  exp(-beta * same_category_before)`.
//!
//! Step 1 serves heuristic slates through an evaluator that retrains day by
//! day; step 2 adds the model generator on a gray-release traffic ramp and
//! tracks its winning rate against the heuristic proposals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{
    CandidateSet, FeatureDescriptor, FeatureSchema, Item, LoggedSample, Slate,
};
use crate::error::{Error, Result};
use crate::evaluator::{
    auc, evaluator_optimizer, evaluator_step, pointwise_optimizer,
    pointwise_step, select_best, EvaluatorConfig, EvaluatorModel, PointwiseModel,
};
use crate::generator::{generator_accuracies, GeneratorModel};
use crate::nn::ops::sigmoid;
use crate::nn::AdaGrad;
use crate::rng;
use crate::sampler::{heuristic_generate, mcmc_generate};
use crate::training::{
    ctr_step, generator_optimizer, supervised_step, GeneratorTrainConfig,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorldConfig {
    /// Catalog size; must be at least `n`.
    pub n_items: usize,
    /// User population size.
    pub n_users: usize,
    pub n_categories: usize,
    /// Slate length.
    pub l: usize,
    /// Candidates per request.
    pub n: usize,
    /// Per-position exposure multiplier, strictly decreasing for a
    /// contextual world. Length `l`.
    pub position_bias: Vec<f64>,
    /// Redundancy penalty: each earlier same-category item multiplies the
    /// click probability by `exp(-beta)`.
    pub beta: f64,
    pub quality_weight: f64,
    pub affinity_dim: usize,
    pub affinity_scale: f64,
    /// Added to every relevance logit; sets the base CTR level.
    pub relevance_bias: f64,
    /// Noise on the logged point-wise pctr, in logit space.
    pub pctr_noise: f64,
    /// Spread of per-category quality offsets; larger values concentrate
    /// top-pctr items in few categories, making redundancy matter.
    pub category_quality_spread: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            n_items: 400,
            n_users: 200,
            n_categories: 8,
            l: 4,
            n: 40,
            position_bias: vec![1.0, 0.93, 0.86, 0.8],
            beta: 1.0,
            quality_weight: 1.0,
            affinity_dim: 4,
            affinity_scale: 0.4,
            relevance_bias: -1.0,
            pctr_noise: 0.4,
            category_quality_spread: 1.2,
        }
    }
}

impl WorldConfig {
    fn validate(&self) -> Result<()> {
        if self.n_items < self.n {
            return Err(Error::Config(format!(
                "catalog of {} items cannot fill requests of {} candidates",
                self.n_items, self.n
            )));
        }
        if self.l == 0 || self.n < self.l {
            return Err(Error::Config(format!(
                "invalid slate geometry l={}, n={}",
                self.l, self.n
            )));
        }
        if self.position_bias.len() != self.l {
            return Err(Error::Config(format!(
                "position_bias length {} does not match l={}",
                self.position_bias.len(),
                self.l
            )));
        }
        if self
            .position_bias
            .iter()
            .any(|b| !b.is_finite() || *b < 0.0 || *b > 1.0)
        {
            return Err(Error::Config("position_bias entries must be in [0, 1]".into()));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::Config(format!("beta must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorldItem {
    pub item_id: u64,
    /// 1-based; 0 stays reserved for out-of-vocabulary.
    pub category: usize,
    pub quality: f64,
    pub latent: Vec<f64>,
    pub observed_quality: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorldUser {
    pub segment: usize,
    pub pref: Vec<f64>,
    pub activity: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SyntheticWorld {
    pub seed: u64,
    pub config: WorldConfig,
    pub catalog: Vec<WorldItem>,
    pub users: Vec<WorldUser>,
}

pub const USER_SEGMENTS: usize = 6;

fn normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; one draw per call keeps stream accounting simple
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Builds the world deterministically from the seed.
pub fn gen_world(seed: u64, config: &WorldConfig) -> Result<SyntheticWorld> {
    config.validate()?;
    let mut r = rng::stream(seed, "world");
    let cat_offsets: Vec<f64> = (0..config.n_categories)
        .map(|_| normal(&mut r) * config.category_quality_spread)
        .collect();
    let catalog = (0..config.n_items)
        .map(|i| {
            let category = 1 + (r.gen_range(0..config.n_categories));
            let quality = cat_offsets[category - 1] + normal(&mut r) * 0.7;
            let latent = (0..config.affinity_dim).map(|_| normal(&mut r)).collect();
            let observed_quality = quality + normal(&mut r) * 0.2;
            WorldItem {
                item_id: i as u64 + 1,
                category,
                quality,
                latent,
                observed_quality,
            }
        })
        .collect();
    let users = (0..config.n_users)
        .map(|_| WorldUser {
            segment: 1 + r.gen_range(0..USER_SEGMENTS),
            pref: (0..config.affinity_dim).map(|_| normal(&mut r)).collect(),
            activity: r.gen(),
        })
        .collect();
    Ok(SyntheticWorld {
        seed,
        config: config.clone(),
        catalog,
        users,
    })
}

impl SyntheticWorld {
    /// `Some(warning)` when the ground-truth click model has no contextual
    /// structure at all (no redundancy penalty and a flat position bias).
    pub fn contextuality_warning(&self) -> Option<String> {
        let flat = self
            .config
            .position_bias
            .windows(2)
            .all(|w| (w[0] - w[1]).abs() < 1e-12);
        if self.config.beta == 0.0 && flat {
            Some("world is non-contextual: beta = 0 and flat position bias".into())
        } else {
            None
        }
    }

    fn affinity(&self, user: &WorldUser, item: &WorldItem) -> f64 {
        let dot: f64 = user.pref.iter().zip(&item.latent).map(|(a, b)| a * b).sum();
        dot / (self.config.affinity_dim as f64).sqrt() * self.config.affinity_scale
    }

    /// Position-free base relevance in (0, 1).
    pub fn base_relevance(&self, user_idx: usize, catalog_idx: usize) -> f64 {
        let user = &self.users[user_idx];
        let item = &self.catalog[catalog_idx];
        sigmoid(
            self.config.quality_weight * item.quality
                + self.affinity(user, item)
                + self.config.relevance_bias,
        )
    }

    /// The feature schema describing this world's logged samples.
    pub fn schema(&self) -> FeatureSchema {
        world_schema(&self.config)
    }
}

pub fn world_schema(config: &WorldConfig) -> FeatureSchema {
    FeatureSchema::new(
        vec![
            FeatureDescriptor::categorical("user_segment", USER_SEGMENTS + 1, 4),
            FeatureDescriptor::numeric("user_activity", vec![0.25, 0.5, 0.75], 2),
        ],
        vec![
            FeatureDescriptor::categorical("category", config.n_categories + 1, 4),
            FeatureDescriptor::numeric(
                "observed_quality",
                vec![-1.5, -0.75, 0.0, 0.75, 1.5],
                3,
            ),
        ],
    )
    .expect("world schema is well-formed")
}

/// One request: the drawn user, the catalog rows behind each candidate,
/// and the featurized candidate set handed to the models.
#[derive(Clone, Debug)]
pub struct Request {
    pub user_idx: usize,
    pub catalog_indices: Vec<usize>,
    pub set: CandidateSet,
}

/// Draws a user and `n` distinct catalog items, producing per-request pctr
/// values (base relevance with logit noise).
pub fn sample_request(world: &SyntheticWorld, rng: &mut impl Rng) -> Result<Request> {
    if world.users.is_empty() {
        return Err(Error::Usage("world has no users".into()));
    }
    let user_idx = rng.gen_range(0..world.users.len());
    let user = &world.users[user_idx];
    let n = world.config.n;
    // partial Fisher-Yates: first n entries of a shuffled index array
    let mut pool: Vec<usize> = (0..world.catalog.len()).collect();
    for i in 0..n {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let catalog_indices: Vec<usize> = pool[..n].to_vec();
    let items = catalog_indices
        .iter()
        .map(|&ci| {
            let item = &world.catalog[ci];
            let logit = world.config.quality_weight * item.quality
                + world.affinity(user, item)
                + world.config.relevance_bias
                + world.config.pctr_noise * normal(rng);
            Item {
                item_id: item.item_id,
                categorical: vec![item.category],
                numeric: vec![item.observed_quality],
                pctr: sigmoid(logit).clamp(1e-4, 1.0 - 1e-4),
            }
        })
        .collect();
    Ok(Request {
        user_idx,
        catalog_indices,
        set: CandidateSet {
            items,
            user_categorical: vec![user.segment],
            user_numeric: vec![user.activity],
        },
    })
}

/// Ground-truth click probability of every slate position.
pub fn ground_truth_click_probs(
    world: &SyntheticWorld,
    request: &Request,
    positions: &[usize],
) -> Vec<f64> {
    let mut probs = Vec::with_capacity(positions.len());
    for (i, &p) in positions.iter().enumerate() {
        let ci = request.catalog_indices[p];
        let relevance = world.base_relevance(request.user_idx, ci);
        let cat = world.catalog[ci].category;
        let same_before = positions[..i]
            .iter()
            .filter(|q| world.catalog[request.catalog_indices[**q]].category == cat)
            .count();
        let bias = world.config.position_bias[i];
        probs.push(relevance * bias * (-world.config.beta * same_before as f64).exp());
    }
    probs
}

/// Exposes the slate: every position is shown, clicks are Bernoulli draws
/// from the ground-truth probabilities.
pub fn simulate_clicks(
    world: &SyntheticWorld,
    request: &Request,
    positions: &[usize],
    rng: &mut impl Rng,
) -> Slate {
    let probs = ground_truth_click_probs(world, request, positions);
    let click: Vec<bool> = probs.iter().map(|p| rng.gen::<f64>() < *p).collect();
    let l = positions.len();
    Slate {
        positions: positions.to_vec(),
        exposure: vec![true; l],
        click,
    }
}

/// Offline dataset: each request exposes a uniformly chosen heuristic
/// slate (ranking or a pctr-proportional draw), closing over ground-truth
/// clicks. Returns an empty vector when the world has no users or
/// `count == 0`.
pub fn generate_dataset(
    world: &SyntheticWorld,
    count: usize,
    heuristic_count: usize,
    seed: u64,
) -> Result<Vec<LoggedSample>> {
    if world.users.is_empty() || count == 0 {
        return Ok(Vec::new());
    }
    let mut rng_req = rng::stream(seed, "dataset.requests");
    let mut rng_choice = rng::stream(seed, "dataset.choice");
    let mut rng_clicks = rng::stream(seed, "dataset.clicks");
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let req = sample_request(world, &mut rng_req)?;
        let slates = heuristic_generate(&req.set, world.config.l, heuristic_count, &mut rng_req)?;
        let pick = rng_choice.gen_range(0..slates.len());
        let labeled = simulate_clicks(world, &req, &slates[pick].positions, &mut rng_clicks);
        samples.push(LoggedSample::new(req.set, labeled)?);
    }
    Ok(samples)
}

/// Who produced the winning slate of a request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WinnerSource {
    Model,
    Heuristic,
}

/// Fraction of winners tagged as model-generated. Requests where the model
/// generator did not participate count as heuristic wins; ties (the same
/// slate proposed by both) are credited to the model upstream.
pub fn winning_rate(winner_sources: &[WinnerSource]) -> Result<f64> {
    if winner_sources.is_empty() {
        return Err(Error::Usage("winning_rate needs at least one tag".into()));
    }
    let wins = winner_sources
        .iter()
        .filter(|s| **s == WinnerSource::Model)
        .count();
    Ok(wins as f64 / winner_sources.len() as f64)
}

/// One simulated day of metrics; all rates live in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct DayMetrics {
    pub day: usize,
    pub winning_rate: f64,
    pub item_selection_accuracy: f64,
    pub rank_accuracy: f64,
    pub realized_ctr: f64,
    pub evaluator_auc: f64,
}

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub world: WorldConfig,
    pub requests_per_day: usize,
    /// Heuristic slates proposed per request (1 ranking + the rest drawn).
    pub heuristic_count: usize,
    /// First day on which the generator serves `post_ramp_fraction` of the
    /// traffic (1-based); before it, `pre_ramp_fraction`.
    pub ramp_day: usize,
    pub pre_ramp_fraction: f64,
    pub post_ramp_fraction: f64,
    pub evaluator: EvaluatorConfig,
    pub evaluator_epochs_per_day: usize,
    pub generator: GeneratorTrainConfig,
    /// Supervised warm-up epochs on the step-1 log before step 2 starts.
    pub generator_pretrain_epochs: usize,
    /// Supervised + reinforcement epochs per simulated day in step 2.
    pub generator_naive_epochs_per_day: usize,
    pub generator_ctr_epochs_per_day: usize,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let world = WorldConfig::default();
        let mut evaluator = EvaluatorConfig::default();
        evaluator.l = world.l;
        let mut generator = GeneratorTrainConfig::default();
        generator.model.l = world.l;
        generator.generation.l = world.l;
        SimulationConfig {
            world,
            requests_per_day: 2000,
            heuristic_count: 8,
            ramp_day: 20,
            pre_ramp_fraction: 0.05,
            post_ramp_fraction: 0.95,
            evaluator,
            evaluator_epochs_per_day: 2,
            generator,
            generator_pretrain_epochs: 0,
            generator_naive_epochs_per_day: 1,
            generator_ctr_epochs_per_day: 1,
            seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn with_seed(seed: u64) -> Self {
        let mut cfg = SimulationConfig::default();
        cfg.seed = seed;
        cfg.evaluator.seed = seed;
        cfg.generator.seed = seed;
        cfg
    }

    fn validate(&self) -> Result<()> {
        self.world.validate()?;
        if self.requests_per_day == 0 {
            return Err(Error::Config("requests_per_day must be >= 1".into()));
        }
        if self.heuristic_count == 0 {
            return Err(Error::Config("heuristic_count must be >= 1".into()));
        }
        for f in [self.pre_ramp_fraction, self.post_ramp_fraction] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!("traffic fraction {f} outside [0, 1]")));
            }
        }
        if self.evaluator.l != self.world.l || self.generator.model.l != self.world.l {
            return Err(Error::Config("model slate lengths must match the world".into()));
        }
        Ok(())
    }

    fn generator_fraction(&self, day: usize) -> f64 {
        if day >= self.ramp_day {
            self.post_ramp_fraction
        } else {
            self.pre_ramp_fraction
        }
    }
}

/// Everything step 1 leaves behind for step 2.
pub struct Step1Artifacts {
    pub evaluator: EvaluatorModel,
    pub evaluator_opt: AdaGrad,
    pub pointwise: PointwiseModel,
    pub pointwise_opt: AdaGrad,
    pub logs: Vec<LoggedSample>,
    pub metrics: Vec<DayMetrics>,
    /// Point-wise baseline AUC per day, for side-by-side comparison with
    /// `DayMetrics::evaluator_auc`.
    pub pointwise_auc: Vec<f64>,
}

struct DayAccumulator {
    clicks: usize,
    exposures: usize,
    scores: Vec<f64>,
    labels: Vec<bool>,
    pw_scores: Vec<f64>,
    pw_labels: Vec<bool>,
}

impl DayAccumulator {
    fn new() -> Self {
        DayAccumulator {
            clicks: 0,
            exposures: 0,
            scores: Vec::new(),
            labels: Vec::new(),
            pw_scores: Vec::new(),
            pw_labels: Vec::new(),
        }
    }

    fn absorb(
        &mut self,
        labeled: &Slate,
        evaluator: &EvaluatorModel,
        pointwise: Option<&PointwiseModel>,
        set: &CandidateSet,
    ) -> Result<()> {
        self.exposures += labeled.len();
        self.clicks += labeled.click.iter().filter(|c| **c).count();
        let pred = evaluator.predict_list_ctr(set, labeled)?;
        for (pos, p) in pred.per_item_ctr.iter().enumerate() {
            self.scores.push(*p);
            self.labels.push(labeled.click[pos]);
        }
        if let Some(pw) = pointwise {
            for (pos, &idx) in labeled.positions.iter().enumerate() {
                self.pw_scores.push(pw.predict_item(set, idx)?);
                self.pw_labels.push(labeled.click[pos]);
            }
        }
        Ok(())
    }

    fn realized_ctr(&self) -> f64 {
        if self.exposures == 0 {
            0.0
        } else {
            self.clicks as f64 / self.exposures as f64
        }
    }

    fn evaluator_auc(&self) -> f64 {
        auc(&self.scores, &self.labels).unwrap_or(0.5)
    }

    fn pointwise_auc(&self) -> f64 {
        auc(&self.pw_scores, &self.pw_labels).unwrap_or(0.5)
    }
}

/// Step 1 of the bootstrap: heuristic generation + evaluator selection on
/// all traffic, with the evaluator (and the point-wise baseline) reloading
/// and retraining day by day on the day's log.
pub fn run_step1(
    world: &SyntheticWorld,
    days: usize,
    config: &SimulationConfig,
) -> Result<Step1Artifacts> {
    config.validate()?;
    let schema = world.schema();
    let mut evaluator = EvaluatorModel::new(&schema, &config.evaluator, config.seed)?;
    let mut evaluator_opt = evaluator_optimizer(&evaluator, &config.evaluator)?;
    let mut pointwise = PointwiseModel::new(&schema, &config.evaluator, config.seed)?;
    let mut pointwise_opt = pointwise_optimizer(&pointwise, &config.evaluator)?;

    let mut logs: Vec<LoggedSample> = Vec::new();
    let mut metrics = Vec::with_capacity(days);
    let mut pointwise_auc = Vec::with_capacity(days);

    for day in 1..=days {
        let mut rng_req = rng::indexed_stream(config.seed, "step1.requests", day as u64);
        let mut rng_clicks = rng::indexed_stream(config.seed, "step1.clicks", day as u64);
        let mut acc = DayAccumulator::new();
        let mut day_samples = Vec::with_capacity(config.requests_per_day);
        for _ in 0..config.requests_per_day {
            let req = sample_request(world, &mut rng_req)?;
            let slates =
                heuristic_generate(&req.set, world.config.l, config.heuristic_count, &mut rng_req)?;
            let winner = select_best(&evaluator, &req.set, &slates)?;
            let labeled = simulate_clicks(world, &req, &slates[winner].positions, &mut rng_clicks);
            acc.absorb(&labeled, &evaluator, Some(&pointwise), &req.set)?;
            day_samples.push(LoggedSample::new(req.set, labeled)?);
        }
        metrics.push(DayMetrics {
            day,
            winning_rate: 0.0,
            item_selection_accuracy: 0.0,
            rank_accuracy: 0.0,
            realized_ctr: acc.realized_ctr(),
            evaluator_auc: acc.evaluator_auc(),
        });
        pointwise_auc.push(acc.pointwise_auc());

        for _ in 0..config.evaluator_epochs_per_day {
            for sample in &day_samples {
                evaluator_step(&mut evaluator, sample, &mut evaluator_opt)?;
                pointwise_step(&mut pointwise, sample, &mut pointwise_opt)?;
            }
        }
        logs.extend(day_samples);
    }
    Ok(Step1Artifacts {
        evaluator,
        evaluator_opt,
        pointwise,
        pointwise_opt,
        logs,
        metrics,
        pointwise_auc,
    })
}

/// The frozen original system: always expose the pctr-ranking slate.
/// Shares the request and click streams with [`run_step1`], so the two
/// runs see identical worlds, users and candidate draws.
pub fn run_ranking_baseline(
    world: &SyntheticWorld,
    days: usize,
    config: &SimulationConfig,
) -> Result<Vec<DayMetrics>> {
    config.validate()?;
    let mut metrics = Vec::with_capacity(days);
    for day in 1..=days {
        let mut rng_req = rng::indexed_stream(config.seed, "step1.requests", day as u64);
        let mut rng_clicks = rng::indexed_stream(config.seed, "step1.clicks", day as u64);
        let mut clicks = 0usize;
        let mut exposures = 0usize;
        for _ in 0..config.requests_per_day {
            let req = sample_request(world, &mut rng_req)?;
            let ranking = crate::sampler::ranking_slate(&req.set, world.config.l);
            let labeled = simulate_clicks(world, &req, &ranking, &mut rng_clicks);
            exposures += labeled.len();
            clicks += labeled.click.iter().filter(|c| **c).count();
        }
        metrics.push(DayMetrics {
            day,
            winning_rate: 0.0,
            item_selection_accuracy: 0.0,
            rank_accuracy: 0.0,
            realized_ctr: clicks as f64 / exposures.max(1) as f64,
            evaluator_auc: 0.5,
        });
    }
    Ok(metrics)
}

/// A policy that exposes a uniformly chosen member of the heuristic pool.
/// Shares the request and click streams with [`run_step1`]; the reference
/// point for the untrained cold start.
pub fn run_random_baseline(
    world: &SyntheticWorld,
    days: usize,
    config: &SimulationConfig,
) -> Result<Vec<DayMetrics>> {
    config.validate()?;
    let mut metrics = Vec::with_capacity(days);
    for day in 1..=days {
        let mut rng_req = rng::indexed_stream(config.seed, "step1.requests", day as u64);
        let mut rng_clicks = rng::indexed_stream(config.seed, "step1.clicks", day as u64);
        let mut rng_pick = rng::indexed_stream(config.seed, "random.pick", day as u64);
        let mut clicks = 0usize;
        let mut exposures = 0usize;
        for _ in 0..config.requests_per_day {
            let req = sample_request(world, &mut rng_req)?;
            let slates =
                heuristic_generate(&req.set, world.config.l, config.heuristic_count, &mut rng_req)?;
            let pick = rng_pick.gen_range(0..slates.len());
            let labeled = simulate_clicks(world, &req, &slates[pick].positions, &mut rng_clicks);
            exposures += labeled.len();
            clicks += labeled.click.iter().filter(|c| **c).count();
        }
        metrics.push(DayMetrics {
            day,
            winning_rate: 0.0,
            item_selection_accuracy: 0.0,
            rank_accuracy: 0.0,
            realized_ctr: clicks as f64 / exposures.max(1) as f64,
            evaluator_auc: 0.5,
        });
    }
    Ok(metrics)
}

/// Step 2 of the bootstrap: the generator (warm-started on the step-1 log)
/// proposes slates next to the heuristics on a ramped share of traffic;
/// the evaluator picks the winner, both models retrain daily, and the
/// generator's winning rate is tracked over all requests.
pub fn run_step2(
    world: &SyntheticWorld,
    days: usize,
    config: &SimulationConfig,
    artifacts: &mut Step1Artifacts,
) -> Result<Vec<DayMetrics>> {
    config.validate()?;
    if artifacts.logs.is_empty() {
        return Err(Error::Usage("step 2 needs step-1 logs".into()));
    }
    let schema = world.schema();
    let mut generator = GeneratorModel::new(&schema, &config.generator.model, config.seed)?;
    let mut gen_opt = generator_optimizer(&generator, &config.generator)?;

    // supervised warm-up on the accumulated step-1 selections
    let mut order: Vec<usize> = (0..artifacts.logs.len()).collect();
    for epoch in 0..config.generator_pretrain_epochs {
        crate::evaluator::shuffle(
            &mut order,
            &mut rng::indexed_stream(config.seed, "step2.pretrain", epoch as u64),
        );
        for &i in &order {
            supervised_step(
                &mut generator,
                &artifacts.logs[i],
                config.generator.model.lambda,
                &mut gen_opt,
            )?;
        }
    }

    let mut metrics = Vec::with_capacity(days);
    for day in 1..=days {
        let mut rng_req = rng::indexed_stream(config.seed, "step2.requests", day as u64);
        let mut rng_clicks = rng::indexed_stream(config.seed, "step2.clicks", day as u64);
        let mut rng_gen = rng::indexed_stream(config.seed, "step2.generate", day as u64);
        let fraction = config.generator_fraction(day);

        let mut acc = DayAccumulator::new();
        let mut sources = Vec::with_capacity(config.requests_per_day);
        let mut sel_acc_sum = 0.0;
        let mut rank_acc_sum = 0.0;
        let mut participations = 0usize;
        let mut day_samples = Vec::with_capacity(config.requests_per_day);

        for _ in 0..config.requests_per_day {
            let req = sample_request(world, &mut rng_req)?;
            let mut slates =
                heuristic_generate(&req.set, world.config.l, config.heuristic_count, &mut rng_req)?;
            let heuristic_end = slates.len();
            let participates = rng_gen.gen::<f64>() < fraction;
            let policy = if participates {
                let policy = generator.policy_matrix(&req.set)?;
                let model_slates =
                    mcmc_generate(&policy, &req.set, &config.generator.generation, &mut rng_gen)?;
                slates.extend(model_slates);
                Some(policy)
            } else {
                None
            };
            let winner = select_best(&artifacts.evaluator, &req.set, &slates)?;
            let chosen = &slates[winner];
            let model_win = participates
                && slates[heuristic_end..]
                    .iter()
                    .any(|s| s.positions == chosen.positions);
            sources.push(if model_win {
                WinnerSource::Model
            } else {
                WinnerSource::Heuristic
            });
            if let Some(policy) = &policy {
                let (sel, rank) = generator_accuracies(policy, &chosen.positions)?;
                sel_acc_sum += sel;
                rank_acc_sum += rank;
                participations += 1;
            }
            let labeled = simulate_clicks(world, &req, &chosen.positions, &mut rng_clicks);
            acc.absorb(&labeled, &artifacts.evaluator, None, &req.set)?;
            day_samples.push(LoggedSample::new(req.set, labeled)?);
        }

        metrics.push(DayMetrics {
            day,
            winning_rate: winning_rate(&sources)?,
            item_selection_accuracy: sel_acc_sum / participations.max(1) as f64,
            rank_accuracy: rank_acc_sum / participations.max(1) as f64,
            realized_ctr: acc.realized_ctr(),
            evaluator_auc: acc.evaluator_auc(),
        });

        // day-end retraining: evaluator first, then the generator against
        // the freshly updated critic
        for _ in 0..config.evaluator_epochs_per_day {
            for sample in &day_samples {
                evaluator_step(&mut artifacts.evaluator, sample, &mut artifacts.evaluator_opt)?;
            }
        }
        let mut rng_train = rng::indexed_stream(config.seed, "step2.train", day as u64);
        for _ in 0..config.generator_ctr_epochs_per_day {
            for sample in &day_samples {
                ctr_step(
                    &mut generator,
                    sample,
                    &artifacts.evaluator,
                    &config.generator,
                    &mut gen_opt,
                    &mut rng_train,
                )?;
            }
        }
        for _ in 0..config.generator_naive_epochs_per_day {
            for sample in &day_samples {
                supervised_step(
                    &mut generator,
                    sample,
                    config.generator.model.lambda,
                    &mut gen_opt,
                )?;
            }
        }
    }
    Ok(metrics)
}
