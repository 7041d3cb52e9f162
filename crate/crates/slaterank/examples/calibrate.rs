//! Temporary calibration sweep (removed before release).
use slaterank::evaluator::{
    evaluate_auc, evaluate_pointwise_auc, train_evaluator, train_pointwise, EvaluatorConfig,
};
use slaterank::simulator::{gen_world, generate_dataset, WorldConfig};
use std::time::Instant;

fn main() -> Result<(), slaterank::Error> {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "auc".into());
    match mode.as_str() {
        "auc" => auc_sweep()?,
        "gen" => gen_sweep()?,
        "sim" => sim_sweep()?,
        "step1" => step1_check()?,
        "oracle" => oracle_check()?,
        _ => {}
    }
    Ok(())
}

fn auc_sweep() -> Result<(), slaterank::Error> {
    let t0 = Instant::now();
    let mut gaps = Vec::new();
    let mut esum = 0.0;
    let mut psum = 0.0;
    for seed in 1..=5u64 {
        let world_cfg = WorldConfig::default();
        let world = gen_world(seed, &world_cfg)?;
        let schema = world.schema();
        let samples = generate_dataset(&world, 2600, 6, seed)?;
        let (train, holdout) = samples.split_at(2000);
        let config = EvaluatorConfig { epochs: 4, holdout_fraction: 0.0, seed, ..EvaluatorConfig::default() };
        let (evaluator, _) = train_evaluator(train, &schema, &config)?;
        let (pointwise, _) = train_pointwise(train, &schema, &config)?;
        let e = evaluate_auc(&evaluator, holdout).unwrap();
        let p = evaluate_pointwise_auc(&pointwise, holdout).unwrap();
        esum += e; psum += p;
        println!("seed {seed}: eval {e:.4} pw {p:.4} gap {:+.4}  ({:.1}s)", e - p, t0.elapsed().as_secs_f64());
        gaps.push(e - p);
    }
    println!("mean eval {:.4} mean pw {:.4} mean gap {:+.4} total {:.1}s",
        esum / 5.0, psum / 5.0, gaps.iter().sum::<f64>() / 5.0, t0.elapsed().as_secs_f64());
    Ok(())
}

fn gen_sweep() -> Result<(), slaterank::Error> {
    use slaterank::training::{train_generator, GeneratorTrainConfig, TrainMode};
    let t0 = Instant::now();
    let mut all_pos = true;
    let mut gains = Vec::new();
    for seed in 1..=5u64 {
        let world_cfg = WorldConfig::default();
        let world = gen_world(seed, &world_cfg)?;
        let schema = world.schema();
        let samples = generate_dataset(&world, 2400, 6, seed)?;
        let config = EvaluatorConfig { epochs: 5, holdout_fraction: 0.0, seed, ..EvaluatorConfig::default() };
        let (evaluator, _) = train_evaluator(&samples[..1800], &schema, &config)?;
        let gcfg = GeneratorTrainConfig { epochs: 3, holdout_fraction: 0.25, seed, ..GeneratorTrainConfig::default() };
        let (_, naive_metrics) = train_generator(TrainMode::Naive, &samples[..1800], &evaluator, &schema, &gcfg)?;
        let (_, ctr_metrics) = train_generator(TrainMode::Ctr, &samples[..1800], &evaluator, &schema, &gcfg)?;
        let na = naive_metrics.last().unwrap().average_ctr;
        let ca = ctr_metrics.last().unwrap().average_ctr;
        let gain = (ca - na) / na;
        all_pos &= ca > na;
        gains.push(gain);
        println!("seed {seed}: naive {na:.4} ctr {ca:.4} rel gain {:+.1}%  ({:.1}s)", gain*100.0, t0.elapsed().as_secs_f64());
    }
    println!("all positive: {all_pos}; min gain {:+.1}% total {:.1}s",
        gains.iter().cloned().fold(f64::INFINITY, f64::min)*100.0, t0.elapsed().as_secs_f64());
    Ok(())
}

fn sim_sweep() -> Result<(), slaterank::Error> {
    use slaterank::simulator::{run_step1, run_step2, SimulationConfig};
    let t0 = Instant::now();
    let rpd: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(600);
    let seed = 11u64;
    let mut cfg = SimulationConfig::with_seed(seed);
    cfg.requests_per_day = rpd;
    cfg.ramp_day = 20;
    let world = gen_world(seed, &cfg.world)?;
    let mut art = run_step1(&world, 8, &cfg)?;
    println!("step1 done at {:.1}s; day8 ctr {:.4} auc {:.4} (pw {:.4})",
        t0.elapsed().as_secs_f64(),
        art.metrics.last().unwrap().realized_ctr,
        art.metrics.last().unwrap().evaluator_auc,
        art.pointwise_auc.last().unwrap());
    let m = run_step2(&world, 30, &cfg, &mut art)?;
    for d in &m {
        println!("day {:>2}: win {:.3} sel {:.3} rank {:.3} ctr {:.4} auc {:.3}",
            d.day, d.winning_rate, d.item_selection_accuracy, d.rank_accuracy, d.realized_ctr, d.evaluator_auc);
    }
    let ma = |xs: &[f64], end: usize| -> f64 { xs[end.saturating_sub(5)..end].iter().sum::<f64>() / 5.0 };
    let wins: Vec<f64> = m.iter().map(|d| d.winning_rate).collect();
    let sels: Vec<f64> = m.iter().map(|d| d.item_selection_accuracy).collect();
    let ranks: Vec<f64> = m.iter().map(|d| d.rank_accuracy).collect();
    println!("win MA day5 {:.3} day30 {:.3}; sel MA {:.3} -> {:.3}; rank MA {:.3} -> {:.3}",
        ma(&wins,5), ma(&wins,30), ma(&sels,5), ma(&sels,30), ma(&ranks,5), ma(&ranks,30));
    println!("jump: day19 {:.3} day20 {:.3}", wins[18], wins[19]);
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
    Ok(())
}

fn step1_check() -> Result<(), slaterank::Error> {
    use slaterank::simulator::{run_step1, run_ranking_baseline, SimulationConfig};
    let t0 = Instant::now();
    let seed = 21u64;
    let mut cfg = SimulationConfig::with_seed(seed);
    cfg.requests_per_day = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(600);
    let world = gen_world(seed, &cfg.world)?;
    let art = run_step1(&world, 20, &cfg)?;
    let base = run_ranking_baseline(&world, 20, &cfg)?;
    for (m, b) in art.metrics.iter().zip(&base) {
        println!("day {:>2}: step1 ctr {:.4} ranking ctr {:.4} auc {:.3} pw_auc {:.3}",
            m.day, m.realized_ctr, b.realized_ctr, m.evaluator_auc, art.pointwise_auc[m.day-1]);
    }
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
    Ok(())
}

fn oracle_check() -> Result<(), slaterank::Error> {
    use slaterank::simulator::{sample_request, ground_truth_click_probs, SimulationConfig};
    use slaterank::sampler::heuristic_generate;
    use slaterank::rng;
    let seed = 21u64;
    let beta: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let spread: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(0.8);
    let mut cfg = SimulationConfig::with_seed(seed);
    cfg.world.beta = beta;
    cfg.world.category_quality_spread = spread;
    if let Some(flat) = std::env::args().nth(4).and_then(|s| s.parse::<f64>().ok()) {
        cfg.world.position_bias = (0..4).map(|i| flat.powi(i)).collect();
    }
    if let Some(hc) = std::env::args().nth(5).and_then(|s| s.parse::<usize>().ok()) {
        cfg.heuristic_count = hc;
    }
    let world = gen_world(seed, &cfg.world)?;
    let mut rng_req = rng::stream(seed, "oracle");
    let mut rank_sum = 0.0;
    let mut oracle_sum = 0.0;
    let mut oracle_wins = 0usize;
    let n_req = 3000;
    for _ in 0..n_req {
        let req = sample_request(&world, &mut rng_req)?;
        let slates = heuristic_generate(&req.set, cfg.world.l, cfg.heuristic_count, &mut rng_req)?;
        let totals: Vec<f64> = slates.iter()
            .map(|s| ground_truth_click_probs(&world, &req, &s.positions).iter().sum::<f64>())
            .collect();
        let rank_ctr = totals[0];
        let best = totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        rank_sum += rank_ctr;
        oracle_sum += best;
        if best > rank_ctr { oracle_wins += 1; }
    }
    println!("beta {beta} spread {spread}: ranking true-CTR {:.4}, oracle best-of-pool {:.4} (+{:.1}%), oracle beats ranking on {:.1}% of requests",
        rank_sum / (n_req as f64 * 4.0), oracle_sum / (n_req as f64 * 4.0),
        (oracle_sum / rank_sum - 1.0) * 100.0, 100.0 * oracle_wins as f64 / n_req as f64);
    Ok(())
}
