//! Trains the list evaluator on a synthetic decision log and compares its
//! holdout AUC against the point-wise baseline.
//!
//! The world's click model is contextual (position bias + same-category
//! redundancy), so the evaluator, which sees the whole ordered slate,
//! should come out ahead of the per-item model.
//!
//! Run: `cargo run --release --example train_evaluator [seed]`

use slaterank::evaluator::{
    evaluate_auc, evaluate_pointwise_auc, train_evaluator, train_pointwise, EvaluatorConfig,
};
use slaterank::simulator::{gen_world, generate_dataset, WorldConfig};

fn main() -> Result<(), slaterank::Error> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);

    let world_cfg = WorldConfig::default();
    let world = gen_world(seed, &world_cfg)?;
    let schema = world.schema();
    let samples = generate_dataset(&world, 4000, 6, seed)?;
    let split = 3200;
    let (train, holdout) = samples.split_at(split);
    println!(
        "world seed {seed}: {} train / {} holdout requests, {} candidates each",
        train.len(),
        holdout.len(),
        world_cfg.n
    );

    let config = EvaluatorConfig {
        epochs: 6,
        holdout_fraction: 0.0,
        seed,
        ..EvaluatorConfig::default()
    };
    let (evaluator, eval_metrics) = train_evaluator(train, &schema, &config)?;
    let (pointwise, _) = train_pointwise(train, &schema, &config)?;

    println!("epoch  train_loss");
    for m in &eval_metrics {
        println!("{:>5}  {:.4}", m.epoch, m.loss);
    }

    let eval_auc = evaluate_auc(&evaluator, holdout).expect("holdout has both classes");
    let pw_auc = evaluate_pointwise_auc(&pointwise, holdout).expect("holdout has both classes");
    println!("list evaluator holdout AUC : {eval_auc:.4}");
    println!("point-wise     holdout AUC : {pw_auc:.4}");
    println!("diff                       : {:+.4}", eval_auc - pw_auc);
    Ok(())
}
