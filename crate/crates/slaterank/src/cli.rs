//! Command implementations behind the `slaterank` binary.
//!
//! Three commands: `gen-data` writes a synthetic world plus a decision log,
//! `train` fits the evaluator or the generator from a log, and `simulate`
//! runs the bootstrap loop and emits day metrics. Every command is
//! deterministic given its flags: rerunning writes byte-identical files.
//! Each flag can also be set through an environment variable with the
//! `SLATERANK_` prefix.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{load_samples, write_samples, FeatureSchema, LoadOptions};
use crate::error::{Error, Result};
use crate::evaluator::{train_evaluator, EvalEpochMetrics, EvaluatorConfig, EvaluatorModel};
use crate::generator::GeneratorConfig;
use crate::sampler::{GenerationConfig, LegalityRule};
use crate::simulator::{
    gen_world, generate_dataset, run_step1, run_step2, DayMetrics, SimulationConfig, WorldConfig,
};
use crate::training::{train_generator, GenEpochMetrics, GeneratorTrainConfig, TrainMode};

/// Exit code for commands that completed but raised warnings.
pub const EXIT_WARNING: i32 = 10;

#[derive(Debug, Parser)]
#[command(
    name = "slaterank",
    about = "Combinatorial slate reranking: data synthesis, training, simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic world, schema and decision log.
    GenData(GenDataArgs),
    /// Train a model from a decision log.
    Train(TrainArgs),
    /// Run the bootstrap simulation and write day metrics.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Master seed; all randomness derives from it.
    #[arg(long, env = "SLATERANK_SEED")]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long, env = "SLATERANK_OUT")]
    pub out: PathBuf,
    /// Users in the synthetic world.
    #[arg(long, env = "SLATERANK_USERS", default_value_t = 200)]
    pub users: usize,
    /// Catalog items in the synthetic world.
    #[arg(long, env = "SLATERANK_ITEMS", default_value_t = 400)]
    pub items: usize,
    /// Logged requests to generate.
    #[arg(long, env = "SLATERANK_SAMPLES", default_value_t = 2000)]
    pub samples: usize,
    /// Slate length.
    #[arg(long = "list-len", env = "SLATERANK_LIST_LEN", default_value_t = 4)]
    pub list_len: usize,
    /// Candidates per request.
    #[arg(long, env = "SLATERANK_CANDIDATES", default_value_t = 40)]
    pub candidates: usize,
    /// Redundancy penalty of the ground-truth click model.
    #[arg(long, env = "SLATERANK_BETA", default_value_t = 1.0)]
    pub beta: f64,
    /// Heuristic slates proposed per request while logging.
    #[arg(long, env = "SLATERANK_HEURISTIC_COUNT", default_value_t = 8)]
    pub heuristic_count: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// What to train: "evaluator" or "generator".
    #[arg(value_parser = ["evaluator", "generator"])]
    pub target: String,
    #[arg(long, env = "SLATERANK_SEED")]
    pub seed: u64,
    /// Feature schema file.
    #[arg(long, env = "SLATERANK_SCHEMA")]
    pub schema: PathBuf,
    /// Decision-log sample file.
    #[arg(long, env = "SLATERANK_DATA")]
    pub data: PathBuf,
    #[arg(long, env = "SLATERANK_OUT")]
    pub out: PathBuf,
    /// Generator training mode ("naive" or "ctr"); generator only.
    #[arg(long, env = "SLATERANK_MODE", default_value = "naive")]
    pub mode: String,
    /// Frozen evaluator checkpoint; required when training the generator.
    #[arg(long, env = "SLATERANK_EVALUATOR")]
    pub evaluator: Option<PathBuf>,
    #[arg(long, env = "SLATERANK_EPOCHS", default_value_t = 5)]
    pub epochs: usize,
    /// AdaGrad initial learning rate.
    #[arg(long, env = "SLATERANK_LR", default_value_t = 0.01)]
    pub lr: f64,
    /// Weight of the rank loss inside the two-sided softmax loss.
    #[arg(long, env = "SLATERANK_LAMBDA", default_value_t = 1.0)]
    pub lambda: f64,
    /// Sampling temperature.
    #[arg(long, env = "SLATERANK_TEMPERATURE", default_value_t = 5.0)]
    pub temperature: f64,
    /// Max sampling rounds per generation.
    #[arg(long, env = "SLATERANK_K", default_value_t = 32)]
    pub k: usize,
    #[arg(long = "list-len", env = "SLATERANK_LIST_LEN", default_value_t = 4)]
    pub list_len: usize,
    /// Holdout fraction for per-epoch metrics.
    #[arg(long, env = "SLATERANK_HOLDOUT", default_value_t = 0.2)]
    pub holdout: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, env = "SLATERANK_SEED")]
    pub seed: u64,
    #[arg(long, env = "SLATERANK_OUT")]
    pub out: PathBuf,
    /// Simulated days to run (and rows in the CSV).
    #[arg(long, env = "SLATERANK_DAYS", default_value_t = 30)]
    pub days: usize,
    /// Bootstrap step to run: 1 (heuristics + evaluator) or 2 (adds the
    /// model generator).
    #[arg(long, env = "SLATERANK_STEP", default_value_t = 1)]
    pub step: u8,
    /// Day the generator traffic ramps from 5% to 95% (step 2).
    #[arg(long = "ramp-day", env = "SLATERANK_RAMP_DAY", default_value_t = 20)]
    pub ramp_day: usize,
    /// Step-1 days to run before step 2 starts.
    #[arg(long = "step1-days", env = "SLATERANK_STEP1_DAYS", default_value_t = 8)]
    pub step1_days: usize,
    #[arg(long = "requests-per-day", env = "SLATERANK_REQUESTS_PER_DAY", default_value_t = 2000)]
    pub requests_per_day: usize,
    #[arg(long, env = "SLATERANK_BETA", default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long = "list-len", env = "SLATERANK_LIST_LEN", default_value_t = 4)]
    pub list_len: usize,
    #[arg(long, env = "SLATERANK_CANDIDATES", default_value_t = 40)]
    pub candidates: usize,
    #[arg(long, env = "SLATERANK_TEMPERATURE", default_value_t = 5.0)]
    pub temperature: f64,
    #[arg(long, env = "SLATERANK_K", default_value_t = 32)]
    pub k: usize,
}

/// What a command wants the caller to surface.
#[derive(Debug, Default)]
pub struct CmdOutcome {
    pub warnings: Vec<String>,
}

impl CmdOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.warnings.is_empty() {
            0
        } else {
            EXIT_WARNING
        }
    }
}

pub fn run(cli: Cli) -> Result<CmdOutcome> {
    match cli.command {
        Command::GenData(args) => cmd_gen_data(&args),
        Command::Train(args) => cmd_train(&args),
        Command::Simulate(args) => cmd_simulate(&args),
    }
}

fn ensure_out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)
        .map_err(|e| Error::Config(format!("cannot create output dir {}: {e}", path.display())))
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        return Err(Error::data(
            0,
            format!("{what} not found at {}", path.display()),
        ));
    }
    Ok(())
}

/// Writes the synthetic world, its schema, and a logged dataset.
pub fn cmd_gen_data(args: &GenDataArgs) -> Result<CmdOutcome> {
    let mut outcome = CmdOutcome::default();
    ensure_out_dir(&args.out)?;
    let mut world_cfg = WorldConfig::default();
    world_cfg.n_users = args.users;
    world_cfg.n_items = args.items.max(args.candidates);
    world_cfg.l = args.list_len;
    world_cfg.n = args.candidates;
    world_cfg.beta = args.beta;
    if world_cfg.position_bias.len() != args.list_len {
        world_cfg.position_bias = default_position_bias(args.list_len);
    }
    let world = gen_world(args.seed, &world_cfg)?;
    if let Some(w) = world.contextuality_warning() {
        outcome.warnings.push(w);
    }
    if args.users == 0 {
        outcome
            .warnings
            .push("world has no users; wrote an empty dataset".into());
    }

    let schema = world.schema();
    schema.save(&args.out.join("schema.json"))?;
    fs::write(
        args.out.join("world.json"),
        serde_json::to_vec_pretty(&world)?,
    )?;
    let samples = generate_dataset(&world, args.samples, args.heuristic_count, args.seed)?;
    write_samples(&args.out.join("samples.jsonl"), &samples)?;
    Ok(outcome)
}

fn default_position_bias(l: usize) -> Vec<f64> {
    (0..l).map(|i| 0.85f64.powi(i as i32)).collect()
}

/// Trains the evaluator or the generator and writes a checkpoint plus a
/// per-epoch metrics CSV.
pub fn cmd_train(args: &TrainArgs) -> Result<CmdOutcome> {
    require_file(&args.schema, "schema")?;
    require_file(&args.data, "dataset")?;
    ensure_out_dir(&args.out)?;
    let schema = FeatureSchema::load(&args.schema)?;
    let outcome = load_samples(&args.data, &schema, LoadOptions::default())?;
    let samples = outcome.samples;

    match args.target.as_str() {
        "evaluator" => {
            let config = EvaluatorConfig {
                l: args.list_len,
                learning_rate: args.lr,
                epochs: args.epochs,
                holdout_fraction: args.holdout,
                seed: args.seed,
                ..EvaluatorConfig::default()
            };
            let (model, metrics) = train_evaluator(&samples, &schema, &config)?;
            model.save(&args.out.join("evaluator.ckpt.json"), None)?;
            write_eval_metrics_csv(&args.out.join("evaluator_metrics.csv"), &metrics)?;
        }
        "generator" => {
            let mode: TrainMode = args.mode.parse()?;
            let eval_path = args.evaluator.as_ref().ok_or_else(|| {
                Error::Config("training the generator needs --evaluator <checkpoint>".into())
            })?;
            require_file(eval_path, "evaluator checkpoint")?;
            let (evaluator, _) = EvaluatorModel::load(eval_path)?;
            let config = GeneratorTrainConfig {
                model: GeneratorConfig {
                    l: args.list_len,
                    lambda: args.lambda,
                    ..GeneratorConfig::default()
                },
                generation: GenerationConfig {
                    t: args.temperature,
                    k: args.k,
                    l: args.list_len,
                    rule: LegalityRule::AlwaysLegal,
                },
                learning_rate: args.lr,
                epochs: args.epochs,
                holdout_fraction: args.holdout,
                seed: args.seed,
                ..GeneratorTrainConfig::default()
            };
            let (model, metrics) = train_generator(mode, &samples, &evaluator, &schema, &config)?;
            model.save(&args.out.join("generator.ckpt.json"), None)?;
            write_gen_metrics_csv(&args.out.join("generator_metrics.csv"), &metrics)?;
        }
        other => return Err(Error::Usage(format!("unknown train target '{other}'"))),
    }
    Ok(CmdOutcome::default())
}

/// Runs bootstrap step 1 or 2 and writes the day-metrics CSV.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<CmdOutcome> {
    let mut outcome = CmdOutcome::default();
    ensure_out_dir(&args.out)?;
    let mut config = SimulationConfig::with_seed(args.seed);
    config.requests_per_day = args.requests_per_day;
    config.ramp_day = args.ramp_day;
    config.world.l = args.list_len;
    config.world.n = args.candidates;
    config.world.beta = args.beta;
    if config.world.position_bias.len() != args.list_len {
        config.world.position_bias = default_position_bias(args.list_len);
    }
    config.world.n_items = config.world.n_items.max(args.candidates);
    config.evaluator.l = args.list_len;
    config.generator.model.l = args.list_len;
    config.generator.generation = GenerationConfig {
        t: args.temperature,
        k: args.k,
        l: args.list_len,
        rule: LegalityRule::AlwaysLegal,
    };
    let world = gen_world(args.seed, &config.world)?;
    if let Some(w) = world.contextuality_warning() {
        outcome.warnings.push(w);
    }

    let metrics = match args.step {
        1 => run_step1(&world, args.days, &config)?.metrics,
        2 => {
            let mut artifacts = run_step1(&world, args.step1_days, &config)?;
            run_step2(&world, args.days, &config, &mut artifacts)?
        }
        other => return Err(Error::Config(format!("step must be 1 or 2, got {other}"))),
    };
    write_day_metrics_csv(&args.out.join("day_metrics.csv"), &metrics)?;
    Ok(outcome)
}

fn write_eval_metrics_csv(path: &Path, metrics: &[EvalEpochMetrics]) -> Result<()> {
    let mut out = String::from("epoch,loss,auc\n");
    for m in metrics {
        let auc = m.auc.map(|a| a.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", m.epoch, m.loss, auc));
    }
    write_atomic(path, out.as_bytes())
}

fn write_gen_metrics_csv(path: &Path, metrics: &[GenEpochMetrics]) -> Result<()> {
    let mut out = String::from("epoch,mean_reward,average_ctr,selection_accuracy,rank_accuracy\n");
    for m in metrics {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            m.epoch, m.mean_reward, m.average_ctr, m.selection_accuracy, m.rank_accuracy
        ));
    }
    write_atomic(path, out.as_bytes())
}

/// Day-metrics CSV with the fixed column order.
pub fn write_day_metrics_csv(path: &Path, metrics: &[DayMetrics]) -> Result<()> {
    let mut out =
        String::from("day,winning_rate,item_selection_accuracy,rank_accuracy,realized_ctr,evaluator_auc\n");
    for m in metrics {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            m.day,
            m.winning_rate,
            m.item_selection_accuracy,
            m.rank_accuracy,
            m.realized_ctr,
            m.evaluator_auc
        ));
    }
    write_atomic(path, out.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ErrorPolicy;

    fn read(path: &Path) -> Vec<u8> {
        fs::read(path).unwrap()
    }

    #[test]
    fn gen_data_is_byte_identical_per_seed() {
        let dir = tempfile::tempdir().unwrap();
        let mk = |sub: &str| GenDataArgs {
            seed: 1,
            out: dir.path().join(sub),
            users: 20,
            items: 40,
            samples: 30,
            list_len: 3,
            candidates: 8,
            beta: 0.5,
            heuristic_count: 4,
        };
        cmd_gen_data(&mk("a")).unwrap();
        cmd_gen_data(&mk("b")).unwrap();
        for f in ["schema.json", "world.json", "samples.jsonl"] {
            assert_eq!(
                read(&dir.path().join("a").join(f)),
                read(&dir.path().join("b").join(f)),
                "{f} differs between identical runs"
            );
        }
    }

    #[test]
    fn gen_data_with_zero_users_warns_and_writes_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let args = GenDataArgs {
            seed: 2,
            out: dir.path().to_path_buf(),
            users: 0,
            items: 40,
            samples: 30,
            list_len: 3,
            candidates: 8,
            beta: 0.5,
            heuristic_count: 4,
        };
        let outcome = cmd_gen_data(&args).unwrap();
        assert!(!outcome.warnings.is_empty());
        assert_eq!(outcome.exit_code(), EXIT_WARNING);
        let samples = fs::read_to_string(dir.path().join("samples.jsonl")).unwrap();
        assert!(samples.is_empty());
    }

    #[test]
    fn generated_dataset_round_trips_through_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let args = GenDataArgs {
            seed: 3,
            out: dir.path().to_path_buf(),
            users: 15,
            items: 30,
            samples: 40,
            list_len: 3,
            candidates: 8,
            beta: 0.5,
            heuristic_count: 4,
        };
        cmd_gen_data(&args).unwrap();
        let schema = FeatureSchema::load(&dir.path().join("schema.json")).unwrap();
        let loaded = load_samples(
            &dir.path().join("samples.jsonl"),
            &schema,
            LoadOptions {
                on_error: ErrorPolicy::Fail,
                oov: crate::data::OovPolicy::Reject,
            },
        )
        .unwrap();
        assert_eq!(loaded.samples.len(), 40);
        assert!(loaded.skipped.is_empty());
        for s in &loaded.samples {
            s.validate().unwrap();
        }
    }

    #[test]
    fn train_with_missing_dataset_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let args = TrainArgs {
            target: "evaluator".into(),
            seed: 4,
            schema: dir.path().join("missing_schema.json"),
            data: dir.path().join("missing.jsonl"),
            out: dir.path().to_path_buf(),
            mode: "naive".into(),
            evaluator: None,
            epochs: 1,
            lr: 0.01,
            lambda: 1.0,
            temperature: 5.0,
            k: 8,
            list_len: 4,
            holdout: 0.2,
        };
        let err = cmd_train(&args).unwrap_err();
        assert!(matches!(err, Error::Data { .. }));
        assert_ne!(err.exit_code(), 0);
    }

    #[test]
    fn simulate_zero_days_writes_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let args = SimulateArgs {
            seed: 5,
            out: dir.path().to_path_buf(),
            days: 0,
            step: 1,
            ramp_day: 2,
            step1_days: 1,
            requests_per_day: 5,
            beta: 0.5,
            list_len: 3,
            candidates: 6,
            temperature: 5.0,
            k: 4,
        };
        cmd_simulate(&args).unwrap();
        let csv = fs::read_to_string(dir.path().join("day_metrics.csv")).unwrap();
        assert_eq!(
            csv,
            "day,winning_rate,item_selection_accuracy,rank_accuracy,realized_ctr,evaluator_auc\n"
        );
    }
}
