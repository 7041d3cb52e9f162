//! Builds a synthetic contextual world and writes a decision log to disk:
//! `schema.json`, `world.json` and `samples.jsonl`.
//!
//! The same files come out of `slaterank gen-data`; this example shows the
//! library API and prints a few dataset statistics.
//!
//! Run: `cargo run --release --example generate_dataset [out_dir]`

use slaterank::data::write_samples;
use slaterank::simulator::{gen_world, generate_dataset, WorldConfig};

fn main() -> Result<(), slaterank::Error> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/dataset".to_string());
    let out = std::path::PathBuf::from(out);
    std::fs::create_dir_all(&out)?;

    let seed = 42;
    let config = WorldConfig::default();
    let world = gen_world(seed, &config)?;
    if let Some(w) = world.contextuality_warning() {
        eprintln!("warning: {w}");
    }

    let samples = generate_dataset(&world, 1000, 8, seed)?;
    world.schema().save(&out.join("schema.json"))?;
    std::fs::write(out.join("world.json"), serde_json::to_vec_pretty(&world)?)?;
    write_samples(&out.join("samples.jsonl"), &samples)?;

    let requests = samples.len();
    let clicks: usize = samples
        .iter()
        .map(|s| s.selected.click.iter().filter(|c| **c).count())
        .sum();
    let exposures: usize = samples.iter().map(|s| s.l()).sum();
    println!("wrote {} samples to {}", requests, out.display());
    println!(
        "catalog {} items / {} categories, {} users",
        config.n_items, config.n_categories, config.n_users
    );
    println!(
        "N={} candidates, L={} positions, realized CTR {:.4}",
        config.n, config.l,
        clicks as f64 / exposures as f64
    );
    Ok(())
}
