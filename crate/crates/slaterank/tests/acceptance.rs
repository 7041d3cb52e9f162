//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with its runtime (visible under `--nocapture`).
//!
//! Criteria run serialized behind a mutex so the per-criterion runtime
//! budgets are measured without cross-test contention.

use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;

use slaterank::data::{
    load_samples, rank_label, write_samples, CandidateSet, ErrorPolicy, FeatureDescriptor,
    FeatureSchema, Item, LoadOptions, LoggedSample, OovPolicy, PolicyMatrix, Slate,
};
use slaterank::evaluator::{
    auc, evaluate_auc, evaluate_pointwise_auc, evaluator_loss, train_evaluator, train_pointwise,
    EvaluatorConfig, EvaluatorModel,
};
use slaterank::generator::{list_log_prob, softmax2d_loss, GeneratorConfig, GeneratorModel};
use slaterank::nn::Matrix;
use slaterank::rng;
use slaterank::sampler::{mcmc_generate, mcmc_rounds, GenerationConfig, LegalityRule};
use slaterank::simulator::{gen_world, generate_dataset, run_step1, run_step2, SimulationConfig, WorldConfig};
use slaterank::training::{
    policy_surrogate, train_generator, BatchEntry, BatchSample, GeneratorTrainConfig, TrainBatch,
    TrainMode,
};

static GATE: Mutex<()> = Mutex::new(());

fn criterion<F>(number: u32, name: &str, limit_s: Option<f64>, body: F)
where
    F: FnOnce() -> Result<String, String>,
{
    let _guard = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            let in_budget = limit_s.map_or(true, |lim| elapsed < lim);
            let verdict = if in_budget { "PASS" } else { "FAIL" };
            println!("ACCEPTANCE {number} {name}: {verdict} ({elapsed:.1}s) {detail}");
            if let Some(lim) = limit_s {
                assert!(in_budget, "criterion {number} took {elapsed:.1}s, budget {lim}s");
            }
        }
        Err(msg) => {
            println!("ACCEPTANCE {number} {name}: FAIL ({elapsed:.1}s) {msg}");
            panic!("criterion {number} failed: {msg}");
        }
    }
}

fn tiny_schema() -> FeatureSchema {
    FeatureSchema::new(
        vec![FeatureDescriptor::categorical("segment", 3, 2)],
        vec![
            FeatureDescriptor::categorical("category", 4, 2),
            FeatureDescriptor::numeric("quality", vec![-0.5, 0.5], 2),
        ],
    )
    .unwrap()
}

fn random_set(n: usize, rng: &mut impl Rng) -> CandidateSet {
    CandidateSet {
        items: (0..n)
            .map(|i| Item {
                item_id: i as u64 + 1,
                categorical: vec![rng.gen_range(0..4)],
                numeric: vec![rng.gen_range(-1.0..1.0)],
                pctr: rng.gen_range(0.02..0.98),
            })
            .collect(),
        user_categorical: vec![rng.gen_range(0..3)],
        user_numeric: vec![],
    }
}

fn distinct_positions(l: usize, n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..l {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(l);
    pool
}

/// Relative-error check shared by all gradient suites.
fn grad_close(analytic: f64, numeric: f64) -> bool {
    let denom = analytic.abs().max(numeric.abs());
    if denom < 1e-6 {
        (analytic - numeric).abs() < 1e-8
    } else {
        ((analytic - numeric) / denom).abs() < 1e-4
    }
}

fn check_against_fd<S, L>(
    name: &str,
    blocks: Vec<(String, Vec<f64>)>,
    mut set_param: S,
    mut loss_at: L,
) -> Result<usize, String>
where
    S: FnMut(&str, usize, f64),
    L: FnMut() -> f64,
{
    let mut checked = 0;
    for (block, grads) in &blocks {
        for (i, &analytic) in grads.iter().enumerate() {
            let mut numeric_at = |h: f64, set_param: &mut S, loss_at: &mut L| {
                set_param(block, i, h);
                let up = loss_at();
                set_param(block, i, -2.0 * h);
                let down = loss_at();
                set_param(block, i, h);
                (up - down) / (2.0 * h)
            };
            let mut numeric = numeric_at(1e-4, &mut set_param, &mut loss_at);
            if !grad_close(analytic, numeric) {
                // a relu kink inside the +-h window poisons the central
                // difference; a much smaller step leaves the kink outside
                // while a genuinely wrong analytic gradient still fails
                numeric = numeric_at(1e-6, &mut set_param, &mut loss_at);
            }
            if !grad_close(analytic, numeric) {
                return Err(format!(
                    "{name}: {block}[{i}] analytic {analytic} vs numeric {numeric}"
                ));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

#[test]
fn criterion_1_gradient_suites() {
    criterion(1, "gradient-suites", Some(30.0), || {
        let schema = tiny_schema();
        let instances = 20;
        let mut total = 0usize;

        // exposure-masked cross entropy through the evaluator
        for inst in 0..instances {
            let mut r = rng::indexed_stream(100, "acc1.eval", inst);
            let cfg = EvaluatorConfig {
                l: 2,
                point_hidden: vec![6, 4],
                head_hidden: vec![6],
                ..EvaluatorConfig::default()
            };
            let mut model = EvaluatorModel::new(&schema, &cfg, 1000 + inst).unwrap();
            let set = random_set(5, &mut r);
            let positions = distinct_positions(2, 5, &mut r);
            let exposure: Vec<bool> = (0..2).map(|_| r.gen_bool(0.8)).collect();
            let click: Vec<bool> = exposure.iter().map(|e| *e && r.gen_bool(0.5)).collect();
            let slate = Slate::labeled(positions, exposure, click).unwrap();
            let (_, grads) = model.loss_grads(&set, &slate).unwrap();
            let blocks: Vec<(String, Vec<f64>)> = grads
                .blocks()
                .into_iter()
                .map(|(n, v)| (n, v.to_vec()))
                .collect();
            let model_cell = std::cell::RefCell::new(&mut model);
            total += check_against_fd(
                "evaluator-loss",
                blocks,
                |name, i, delta| {
                    let mut m = model_cell.borrow_mut();
                    let mut b = m.param_blocks_mut();
                    b.iter_mut().find(|(n, _)| n == name).unwrap().1[i] += delta;
                },
                || {
                    let m = model_cell.borrow();
                    let pred = m.predict_list_ctr(&set, &slate).unwrap();
                    evaluator_loss(&pred.per_item_ctr, &slate.exposure, &slate.click).unwrap()
                },
            )?;
        }

        // two-sided softmax loss through the generator
        for inst in 0..instances {
            let mut r = rng::indexed_stream(101, "acc1.gen", inst);
            let cfg = GeneratorConfig {
                l: 2,
                point_hidden: vec![6, 4],
                rank_hidden: vec![6],
                lambda: r.gen_range(0.2..1.5),
            };
            let lambda = cfg.lambda;
            let mut model = GeneratorModel::new(&schema, &cfg, 2000 + inst).unwrap();
            let set = random_set(5, &mut r);
            let ids = distinct_positions(2, 5, &mut r);
            let (_, _, grads) = model.supervised_loss_grads(&set, &ids, lambda).unwrap();
            let blocks: Vec<(String, Vec<f64>)> = grads
                .blocks()
                .into_iter()
                .map(|(n, v)| (n, v.to_vec()))
                .collect();
            let model_cell = std::cell::RefCell::new(&mut model);
            total += check_against_fd(
                "softmax2d",
                blocks,
                |name, i, delta| {
                    let mut m = model_cell.borrow_mut();
                    let mut b = m.param_blocks_mut();
                    b.iter_mut().find(|(n, _)| n == name).unwrap().1[i] += delta;
                },
                || {
                    let m = model_cell.borrow();
                    softmax2d_loss(&m.forward(&set).unwrap().logits, &ids, lambda).unwrap()
                },
            )?;
        }

        // policy-gradient surrogate through the generator
        for inst in 0..instances {
            let mut r = rng::indexed_stream(102, "acc1.pg", inst);
            let cfg = GeneratorConfig {
                l: 2,
                point_hidden: vec![6, 4],
                rank_hidden: vec![6],
                lambda: 1.0,
            };
            let t = r.gen_range(0.5..4.0);
            let mut model = GeneratorModel::new(&schema, &cfg, 3000 + inst).unwrap();
            let set = random_set(5, &mut r);
            let entries: Vec<BatchEntry> = (0..3)
                .map(|_| BatchEntry {
                    positions: distinct_positions(2, 5, &mut r),
                    reward: r.gen_range(0.0..1.0),
                    log_prob: 0.0,
                })
                .collect();
            let baseline: f64 =
                entries.iter().map(|e| e.reward).sum::<f64>() / entries.len() as f64;
            let batch = TrainBatch {
                samples: vec![BatchSample {
                    set: &set,
                    entries: entries.clone(),
                }],
            };
            let (_, grads) = policy_surrogate(&model, &batch, t).unwrap();
            let blocks: Vec<(String, Vec<f64>)> = grads
                .blocks()
                .into_iter()
                .map(|(n, v)| (n, v.to_vec()))
                .collect();
            let model_cell = std::cell::RefCell::new(&mut model);
            total += check_against_fd(
                "policy-surrogate",
                blocks,
                |name, i, delta| {
                    let mut m = model_cell.borrow_mut();
                    let mut b = m.param_blocks_mut();
                    b.iter_mut().find(|(n, _)| n == name).unwrap().1[i] += delta;
                },
                || {
                    let m = model_cell.borrow();
                    let policy = m.policy_matrix(&set).unwrap();
                    entries
                        .iter()
                        .map(|e| {
                            -(e.reward - baseline)
                                * list_log_prob(&policy, &e.positions, t).unwrap()
                        })
                        .sum()
                },
            )?;
        }

        Ok(format!(
            "3 suites x {instances} instances, {total} parameter gradients within 1e-4"
        ))
    });
}

fn random_policy(l: usize, n: usize, rng: &mut impl Rng) -> PolicyMatrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let raw: Vec<f64> = (0..=l).map(|_| rng.gen_range(0.05..1.0)).collect();
        let z: f64 = raw.iter().sum();
        cols.push(raw.into_iter().map(|v| v / z).collect());
    }
    let rows: Vec<Vec<f64>> = (0..=l)
        .map(|i| (0..n).map(|j| cols[j][i]).collect())
        .collect();
    PolicyMatrix::new(Matrix::from_rows(&rows).unwrap(), l).unwrap()
}

#[test]
fn criterion_2_sampling_law_oracle() {
    criterion(2, "sampling-law-oracle", Some(60.0), || {
        let n = 3;
        let l = 2;
        let rounds = 10_000usize;
        let mut worst_tv: f64 = 0.0;
        let mut worst_sum_err: f64 = 0.0;
        for inst in 0..5u64 {
            let mut r = rng::indexed_stream(200, "acc2", inst);
            let policy = random_policy(l, n, &mut r);
            let t = r.gen_range(0.5..3.0);
            let set = random_set(n, &mut r);

            // every ordered pair of distinct items
            let mut slates = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        slates.push(vec![a, b]);
                    }
                }
            }
            let probs: Vec<f64> = slates
                .iter()
                .map(|s| list_log_prob(&policy, s, t).unwrap().exp())
                .collect();
            let sum: f64 = probs.iter().sum();
            worst_sum_err = worst_sum_err.max((sum - 1.0).abs());
            if (sum - 1.0).abs() > 1e-9 {
                return Err(format!("instance {inst}: chain probabilities sum to {sum}"));
            }

            let cfg = GenerationConfig {
                t,
                k: rounds,
                l,
                rule: LegalityRule::AlwaysLegal,
            };
            let draws = mcmc_rounds(&policy, &set, &cfg, &mut r).unwrap();
            if draws.len() != rounds {
                return Err(format!("instance {inst}: only {} rounds completed", draws.len()));
            }
            let mut counts = vec![0usize; slates.len()];
            for d in &draws {
                let idx = slates.iter().position(|s| s == d).unwrap();
                counts[idx] += 1;
            }
            let tv: f64 = counts
                .iter()
                .zip(&probs)
                .map(|(c, p)| (*c as f64 / rounds as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            worst_tv = worst_tv.max(tv);
            if tv > 0.02 {
                return Err(format!("instance {inst}: total variation {tv}"));
            }
        }
        Ok(format!(
            "5 policies: max |sum-1| = {worst_sum_err:.2e}, max TV = {worst_tv:.4} at 10^4 rounds"
        ))
    });
}

#[test]
fn criterion_3_generation_invariants() {
    criterion(3, "generation-invariants", Some(60.0), || {
        let mut r = rng::stream(300, "acc3");
        let generations = 10_000usize;
        let mut slates_seen = 0usize;
        for g in 0..generations {
            let n = r.gen_range(6..12);
            let l = r.gen_range(2..5);
            let k = r.gen_range(1..8);
            let t = r.gen_range(0.0..8.0);
            let constrained = g % 2 == 1;
            // cycling categories guarantee a legal list exists under the
            // max-2-per-category rule
            let mut set = random_set(n, &mut r);
            for (i, item) in set.items.iter_mut().enumerate() {
                item.categorical[0] = i % 3;
            }
            let rule = if constrained {
                LegalityRule::MaxPerCategory { feature: 0, max: 2 }
            } else {
                LegalityRule::AlwaysLegal
            };
            let policy = random_policy(l, n, &mut r);
            let cfg = GenerationConfig {
                t,
                k,
                l,
                rule: rule.clone(),
            };
            let slates = mcmc_generate(&policy, &set, &cfg, &mut r)
                .map_err(|e| format!("generation {g} failed: {e}"))?;
            if slates.is_empty() || slates.len() > k {
                return Err(format!("generation {g}: {} slates for k={k}", slates.len()));
            }
            for (si, slate) in slates.iter().enumerate() {
                if slate.len() != l {
                    return Err(format!("generation {g}: slate of length {}", slate.len()));
                }
                slate
                    .validate(n)
                    .map_err(|e| format!("generation {g}: {e}"))?;
                for prefix in 0..l {
                    if !rule.is_legal(&slate.positions[..prefix], slate.positions[prefix], &set) {
                        return Err(format!(
                            "generation {g}: slate {:?} illegal at prefix {prefix}",
                            slate.positions
                        ));
                    }
                }
                for other in &slates[si + 1..] {
                    if other.positions == slate.positions {
                        return Err(format!("generation {g}: duplicate slate in output"));
                    }
                }
            }
            slates_seen += slates.len();
        }
        Ok(format!(
            "{generations} generations ({slates_seen} slates), zero violations incl. max-2-per-category"
        ))
    });
}

#[test]
fn criterion_4_auc_oracle() {
    criterion(4, "auc-pair-counting-oracle", None, || {
        let mut r = rng::stream(400, "acc4");
        let mut worst: f64 = 0.0;
        let mut done = 0;
        while done < 100 {
            let n = r.gen_range(20..140);
            let scores: Vec<f64> = (0..n)
                .map(|_| (r.gen_range(0..25) as f64) / 25.0)
                .collect();
            let labels: Vec<bool> = (0..n).map(|_| r.gen_bool(0.35)).collect();
            if labels.iter().all(|l| *l) || labels.iter().all(|l| !*l) {
                continue;
            }
            let fast = auc(&scores, &labels).unwrap();
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                if !labels[i] {
                    continue;
                }
                for j in 0..n {
                    if labels[j] {
                        continue;
                    }
                    den += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
            let brute = num / den;
            worst = worst.max((fast - brute).abs());
            if (fast - brute).abs() > 1e-12 {
                return Err(format!("rank-sum {fast} vs pair count {brute}"));
            }
            done += 1;
        }
        Ok(format!("100 instances, max |diff| = {worst:.2e}"))
    });
}

#[test]
fn criterion_5_contextual_auc_gap() {
    criterion(5, "evaluator-vs-pointwise-auc", Some(300.0), || {
        let seeds = [1u64, 2, 3, 4, 5];
        let mut eval_sum = 0.0;
        let mut pw_sum = 0.0;
        let mut detail = String::new();
        for &seed in &seeds {
            let world_cfg = WorldConfig::default();
            assert!(world_cfg.beta > 0.0);
            let world = gen_world(seed, &world_cfg).map_err(|e| e.to_string())?;
            let schema = world.schema();
            let samples = generate_dataset(&world, 2600, 8, seed).map_err(|e| e.to_string())?;
            let (train, holdout) = samples.split_at(2000);
            let config = EvaluatorConfig {
                epochs: 4,
                holdout_fraction: 0.0,
                seed,
                ..EvaluatorConfig::default()
            };
            let (evaluator, _) =
                train_evaluator(train, &schema, &config).map_err(|e| e.to_string())?;
            let (pointwise, _) =
                train_pointwise(train, &schema, &config).map_err(|e| e.to_string())?;
            let e = evaluate_auc(&evaluator, holdout).ok_or("holdout AUC undefined")?;
            let p = evaluate_pointwise_auc(&pointwise, holdout).ok_or("holdout AUC undefined")?;
            eval_sum += e;
            pw_sum += p;
            detail.push_str(&format!("s{seed}:{:+.4} ", e - p));
        }
        let gap = (eval_sum - pw_sum) / seeds.len() as f64;
        if gap < 0.005 {
            return Err(format!("seed-averaged AUC gap {gap:.4} < 0.005 ({detail})"));
        }
        Ok(format!("seed-averaged gap {gap:+.4} >= 0.005 ({detail})"))
    });
}

#[test]
fn criterion_6_ctr_rl_beats_naive_rl() {
    criterion(6, "ctr-rl-vs-naive-rl", Some(600.0), || {
        let seeds = [1u64, 2, 3, 4, 5];
        let mut min_gain = f64::INFINITY;
        let mut detail = String::new();
        for &seed in &seeds {
            let world = gen_world(seed, &WorldConfig::default()).map_err(|e| e.to_string())?;
            let schema = world.schema();
            let samples = generate_dataset(&world, 2400, 8, seed).map_err(|e| e.to_string())?;
            let eval_cfg = EvaluatorConfig {
                epochs: 5,
                holdout_fraction: 0.0,
                seed,
                ..EvaluatorConfig::default()
            };
            let (evaluator, _) =
                train_evaluator(&samples[..1800], &schema, &eval_cfg).map_err(|e| e.to_string())?;
            let gen_cfg = GeneratorTrainConfig {
                epochs: 3,
                holdout_fraction: 0.25,
                seed,
                ..GeneratorTrainConfig::default()
            };
            let (_, naive) = train_generator(
                TrainMode::Naive,
                &samples[..1800],
                &evaluator,
                &schema,
                &gen_cfg,
            )
            .map_err(|e| e.to_string())?;
            let (_, ctr) = train_generator(
                TrainMode::Ctr,
                &samples[..1800],
                &evaluator,
                &schema,
                &gen_cfg,
            )
            .map_err(|e| e.to_string())?;
            let na = naive.last().unwrap().average_ctr;
            let ca = ctr.last().unwrap().average_ctr;
            if ca <= na {
                return Err(format!("seed {seed}: ctr {ca:.4} <= naive {na:.4}"));
            }
            let gain = (ca - na) / na;
            min_gain = min_gain.min(gain);
            detail.push_str(&format!("s{seed}:{:+.0}% ", gain * 100.0));
        }
        if min_gain < 0.10 {
            return Err(format!("min relative gain {:.1}% < 10% ({detail})", min_gain * 100.0));
        }
        Ok(format!(
            "ctr > naive on all 5 seeds, min relative gain {:+.0}% ({detail})",
            min_gain * 100.0
        ))
    });
}

#[test]
fn criterion_7_bootstrap_curve_shapes() {
    criterion(7, "bootstrap-curve-shapes", Some(600.0), || {
        let seed = 11;
        let config = SimulationConfig::with_seed(seed);
        assert_eq!(config.ramp_day, 20);
        let world = gen_world(seed, &config.world).map_err(|e| e.to_string())?;
        let mut artifacts = run_step1(&world, 8, &config).map_err(|e| e.to_string())?;
        let metrics = run_step2(&world, 30, &config, &mut artifacts).map_err(|e| e.to_string())?;

        let ma5 = |f: &dyn Fn(&slaterank::simulator::DayMetrics) -> f64, end_day: usize| -> f64 {
            metrics[end_day - 5..end_day].iter().map(|m| f(m)).sum::<f64>() / 5.0
        };
        let win = |m: &slaterank::simulator::DayMetrics| m.winning_rate;
        let sel = |m: &slaterank::simulator::DayMetrics| m.item_selection_accuracy;
        let rank = |m: &slaterank::simulator::DayMetrics| m.rank_accuracy;

        let mut detail = String::new();
        for (name, f) in [
            ("winning-rate", &win as &dyn Fn(&slaterank::simulator::DayMetrics) -> f64),
            ("item-selection", &sel),
            ("rank-accuracy", &rank),
        ] {
            let early = ma5(f, 5);
            let late = ma5(f, 30);
            if late <= early {
                return Err(format!("{name} 5-day MA fell: day5 {early:.3} -> day30 {late:.3}"));
            }
            detail.push_str(&format!("{name} {early:.3}->{late:.3} "));
        }
        let before = metrics[config.ramp_day - 2].winning_rate;
        let at = metrics[config.ramp_day - 1].winning_rate;
        if at <= before + 0.1 {
            return Err(format!(
                "no winning-rate jump at ramp day {}: {before:.3} -> {at:.3}",
                config.ramp_day
            ));
        }
        detail.push_str(&format!("ramp jump {before:.3}->{at:.3}"));
        Ok(detail)
    });
}

#[test]
fn criterion_8_command_determinism() {
    criterion(8, "command-determinism", None, || {
        use slaterank::cli::{
            cmd_gen_data, cmd_simulate, cmd_train, GenDataArgs, SimulateArgs, TrainArgs,
        };
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let read = |p: &std::path::Path| std::fs::read(p).map_err(|e| e.to_string());

        // gen-data twice
        let gen_args = |sub: &str| GenDataArgs {
            seed: 81,
            out: dir.path().join(sub),
            users: 18,
            items: 40,
            samples: 80,
            list_len: 3,
            candidates: 8,
            beta: 1.0,
            heuristic_count: 4,
        };
        cmd_gen_data(&gen_args("g1")).map_err(|e| e.to_string())?;
        cmd_gen_data(&gen_args("g2")).map_err(|e| e.to_string())?;
        for f in ["schema.json", "world.json", "samples.jsonl"] {
            if read(&dir.path().join("g1").join(f))? != read(&dir.path().join("g2").join(f))? {
                return Err(format!("gen-data output {f} not byte-identical"));
            }
        }

        // train twice
        let train_args = |sub: &str| TrainArgs {
            target: "evaluator".into(),
            seed: 81,
            schema: dir.path().join("g1/schema.json"),
            data: dir.path().join("g1/samples.jsonl"),
            out: dir.path().join(sub),
            mode: "naive".into(),
            evaluator: None,
            epochs: 2,
            lr: 0.01,
            lambda: 1.0,
            temperature: 5.0,
            k: 4,
            list_len: 3,
            holdout: 0.2,
        };
        cmd_train(&train_args("t1")).map_err(|e| e.to_string())?;
        cmd_train(&train_args("t2")).map_err(|e| e.to_string())?;
        for f in ["evaluator_metrics.csv", "evaluator.ckpt.json"] {
            if read(&dir.path().join("t1").join(f))? != read(&dir.path().join("t2").join(f))? {
                return Err(format!("train output {f} not byte-identical"));
            }
        }

        // simulate twice (step 2 exercises the full loop)
        let sim_args = |sub: &str| SimulateArgs {
            seed: 81,
            out: dir.path().join(sub),
            days: 3,
            step: 2,
            ramp_day: 2,
            step1_days: 1,
            requests_per_day: 40,
            beta: 1.0,
            list_len: 3,
            candidates: 8,
            temperature: 5.0,
            k: 4,
        };
        cmd_simulate(&sim_args("s1")).map_err(|e| e.to_string())?;
        cmd_simulate(&sim_args("s2")).map_err(|e| e.to_string())?;
        if read(&dir.path().join("s1/day_metrics.csv"))? != read(&dir.path().join("s2/day_metrics.csv"))? {
            return Err("simulate CSV not byte-identical".into());
        }
        Ok("gen-data, train, simulate all byte-identical on rerun".into())
    });
}

#[test]
fn criterion_9_full_scale_ingestion() {
    criterion(9, "full-scale-ingestion", None, || {
        // 51 item features as a production-style reranking log would carry
        let item_features: Vec<FeatureDescriptor> = (0..26)
            .map(|i| FeatureDescriptor::categorical(&format!("cat_{i}"), 50 + i, 4))
            .chain((0..25).map(|i| {
                FeatureDescriptor::numeric(&format!("num_{i}"), vec![-0.5, 0.0, 0.5], 2)
            }))
            .collect();
        assert_eq!(item_features.len(), 51);
        let schema = FeatureSchema::new(
            vec![
                FeatureDescriptor::categorical("user_seg", 32, 4),
                FeatureDescriptor::numeric("user_act", vec![0.5], 2),
            ],
            item_features,
        )
        .map_err(|e| e.to_string())?;

        let records = 10_000usize;
        let n = 40;
        let l = 4;
        let mut r = rng::stream(900, "acc9");
        let mut samples = Vec::with_capacity(records);
        for _ in 0..records {
            let items: Vec<Item> = (0..n)
                .map(|i| Item {
                    item_id: i as u64 + 1,
                    categorical: (0..26).map(|f| r.gen_range(0..50 + f)).collect(),
                    numeric: (0..25)
                        .map(|_| (r.gen_range(-8i32..=8) as f64) / 8.0)
                        .collect(),
                    pctr: (r.gen_range(1..=99) as f64) / 100.0,
                })
                .collect();
            let set = CandidateSet {
                items,
                user_categorical: vec![r.gen_range(0..32)],
                user_numeric: vec![(r.gen_range(0..=10) as f64) / 10.0],
            };
            let positions = distinct_positions(l, n, &mut r);
            let click: Vec<bool> = (0..l).map(|_| r.gen_bool(0.1)).collect();
            let slate = Slate::labeled(positions, vec![true; l], click).map_err(|e| e.to_string())?;
            samples.push(LoggedSample::new(set, slate).map_err(|e| e.to_string())?);
        }

        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let path = dir.path().join("full_scale.jsonl");
        write_samples(&path, &samples).map_err(|e| e.to_string())?;
        let bytes = std::fs::metadata(&path).map_err(|e| e.to_string())?.len();

        let outcome = load_samples(
            &path,
            &schema,
            LoadOptions {
                on_error: ErrorPolicy::Fail,
                oov: OovPolicy::Reject,
            },
        )
        .map_err(|e| format!("ingestion error: {e}"))?;
        if outcome.samples.len() != records || !outcome.skipped.is_empty() {
            return Err(format!(
                "{} of {records} records loaded, {} skipped",
                outcome.samples.len(),
                outcome.skipped.len()
            ));
        }
        for (i, s) in outcome.samples.iter().enumerate() {
            s.validate().map_err(|e| format!("record {i}: {e}"))?;
            if s.n() != n || s.l() != l {
                return Err(format!("record {i}: shape ({}, {})", s.n(), s.l()));
            }
            // ranks of the slate form a bijection onto 0..l
            let ranks = rank_label(&s.selected.positions, s.n(), s.l())
                .map_err(|e| format!("record {i}: {e}"))?;
            if ranks.iter().filter(|x| **x < l).count() != l {
                return Err(format!("record {i}: rank labels inconsistent"));
            }
        }
        if outcome.samples != samples {
            return Err("round trip changed sample content".into());
        }
        Ok(format!(
            "{records} records (N={n}, L={l}, 51 features, {:.1} MB) loaded with zero errors",
            bytes as f64 / 1e6
        ))
    });
}
