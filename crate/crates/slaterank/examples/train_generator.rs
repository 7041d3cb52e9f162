//! Trains the set-to-policy generator both ways against one frozen
//! evaluator and prints the per-epoch metrics side by side.
//!
//! Naive mode imitates the logged (evaluator-selected) lists with the
//! two-sided softmax loss; ctr mode runs policy-gradient updates with the
//! evaluator's mean predicted CTR as reward. The headline number is
//! Average CTR: the frozen evaluator's score of slates sampled from the
//! trained policy.
//!
//! Run: `cargo run --release --example train_generator [seed]`

use slaterank::evaluator::{train_evaluator, EvaluatorConfig};
use slaterank::simulator::{gen_world, generate_dataset, WorldConfig};
use slaterank::training::{train_generator, GeneratorTrainConfig, TrainMode};

fn main() -> Result<(), slaterank::Error> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3);

    let world = gen_world(seed, &WorldConfig::default())?;
    let schema = world.schema();
    let samples = generate_dataset(&world, 2400, 8, seed)?;

    let eval_cfg = EvaluatorConfig {
        epochs: 5,
        holdout_fraction: 0.0,
        seed,
        ..EvaluatorConfig::default()
    };
    let (evaluator, _) = train_evaluator(&samples[..1800], &schema, &eval_cfg)?;
    println!("evaluator trained and frozen; training the generator two ways");

    let gen_cfg = GeneratorTrainConfig {
        epochs: 3,
        holdout_fraction: 0.25,
        seed,
        ..GeneratorTrainConfig::default()
    };
    let (_, naive) = train_generator(TrainMode::Naive, &samples[..1800], &evaluator, &schema, &gen_cfg)?;
    let (_, ctr) = train_generator(TrainMode::Ctr, &samples[..1800], &evaluator, &schema, &gen_cfg)?;

    println!("\n      naive mode                          ctr mode");
    println!("epoch avg_ctr sel_acc rank_acc loss    avg_ctr sel_acc rank_acc");
    for (n, c) in naive.iter().zip(&ctr) {
        println!(
            "{:>5} {:.4}  {:.3}   {:.3}    {:.3}   {:.4}  {:.3}   {:.3}",
            n.epoch,
            n.average_ctr,
            n.selection_accuracy,
            n.rank_accuracy,
            n.supervised_loss.unwrap_or(f64::NAN),
            c.average_ctr,
            c.selection_accuracy,
            c.rank_accuracy,
        );
    }
    let na = naive.last().unwrap().average_ctr;
    let ca = ctr.last().unwrap().average_ctr;
    println!(
        "\nAverage CTR: naive {na:.4}, ctr {ca:.4}, relative gain {:+.1}%",
        (ca - na) / na * 100.0
    );
    Ok(())
}
