//! Loads a decision log against its schema, validating every record, and
//! prints shape and label statistics. Point it at the files written by
//! `gen-data` or the `generate_dataset` example.
//!
//! Run: `cargo run --example inspect_log <schema.json> <samples.jsonl>`

use slaterank::data::{load_samples, rank_label, ErrorPolicy, FeatureSchema, LoadOptions, OovPolicy};

fn main() -> Result<(), slaterank::Error> {
    let mut args = std::env::args().skip(1);
    let (schema_path, samples_path) = match (args.next(), args.next()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            eprintln!("usage: inspect_log <schema.json> <samples.jsonl>");
            std::process::exit(2);
        }
    };

    let schema = FeatureSchema::load(schema_path.as_ref())?;
    let (ucat, unum) = schema.user_counts();
    let (icat, inum) = schema.item_counts();
    println!("schema v{}: user features {}+{}, item features {}+{}",
        schema.version, ucat, unum, icat, inum);

    let outcome = load_samples(
        samples_path.as_ref(),
        &schema,
        LoadOptions {
            on_error: ErrorPolicy::Skip,
            oov: OovPolicy::MapToReserved,
        },
    )?;
    for (line, err) in &outcome.skipped {
        eprintln!("skipped line {line}: {err}");
    }

    let samples = &outcome.samples;
    if samples.is_empty() {
        println!("no valid samples");
        return Ok(());
    }
    let mut clicks = 0usize;
    let mut exposures = 0usize;
    let mut position_clicks = vec![0usize; samples[0].l()];
    for s in samples {
        s.validate()?;
        // the rank labels must be consistent with the slate ordering
        rank_label(&s.selected.positions, s.n(), s.l())?;
        for (pos, (c, e)) in s.selected.click.iter().zip(&s.selected.exposure).enumerate() {
            exposures += *e as usize;
            if *c {
                clicks += 1;
                if pos < position_clicks.len() {
                    position_clicks[pos] += 1;
                }
            }
        }
    }
    println!(
        "{} samples loaded ({} skipped), N={}, L={}",
        samples.len(),
        outcome.skipped.len(),
        samples[0].n(),
        samples[0].l()
    );
    println!("realized CTR {:.4}", clicks as f64 / exposures as f64);
    println!("clicks by position: {position_clicks:?}");
    Ok(())
}
