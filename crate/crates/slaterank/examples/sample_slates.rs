//! Tour of the sampling machinery on a hand-written policy matrix:
//! the temperature table, multi-round slate generation with and without a
//! legality rule, chain log-probabilities, and the policy accuracies.
//!
//! Run: `cargo run --example sample_slates`

use slaterank::data::{CandidateSet, Item, PolicyMatrix};
use slaterank::generator::{generator_accuracies, list_log_prob};
use slaterank::nn::Matrix;
use slaterank::rng;
use slaterank::sampler::{mcmc_generate, temperature_table, GenerationConfig, LegalityRule};

fn main() -> Result<(), slaterank::Error> {
    // a confident policy over 6 candidates for a 4-slot slate: the last
    // row is "not in the list"; every column sums to one
    let policy = PolicyMatrix::new(
        Matrix::from_rows(&[
            vec![0.9, 0.1, 0.0, 0.0, 0.0, 0.0],
            vec![0.05, 0.8, 0.15, 0.0, 0.0, 0.0],
            vec![0.05, 0.1, 0.7, 0.15, 0.0, 0.0],
            vec![0.0, 0.0, 0.15, 0.85, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
        ])?,
        4,
    )?;
    println!("policy: {} positions x {} candidates", policy.l(), policy.n());

    let set = CandidateSet {
        items: (0..6)
            .map(|i| Item {
                item_id: i + 1,
                categorical: vec![if i < 3 { 1 } else { 2 }],
                numeric: vec![],
                pctr: 0.3,
            })
            .collect(),
        user_categorical: vec![],
        user_numeric: vec![],
    };

    for t in [0.0, 1.0, 5.0, 25.0] {
        let table = temperature_table(&policy, t)?;
        let row: Vec<String> = table.row(0).iter().map(|p| format!("{p:.3}")).collect();
        println!("t = {t:>4}: position-1 distribution [{}]", row.join(", "));
    }

    let config = GenerationConfig {
        t: 5.0,
        k: 16,
        l: 4,
        rule: LegalityRule::AlwaysLegal,
    };
    let mut rng = rng::stream(7, "example.sample");
    let slates = mcmc_generate(&policy, &set, &config, &mut rng)?;
    println!("\n{} distinct slates from {} rounds at t = {}:", slates.len(), config.k, config.t);
    for s in &slates {
        let logp = list_log_prob(&policy, &s.positions, config.t)?;
        println!("  {:?}  log-prob {logp:.3}  prob {:.3}", s.positions, logp.exp());
    }

    // the built-in business rule: at most 2 items per category
    let constrained = GenerationConfig {
        rule: LegalityRule::MaxPerCategory { feature: 0, max: 2 },
        ..config
    };
    let slates = mcmc_generate(&policy, &set, &constrained, &mut rng)?;
    println!("\nwith max-2-per-category:");
    for s in &slates {
        let cats: Vec<usize> = s.positions.iter().map(|p| set.items[*p].categorical[0]).collect();
        println!("  {:?}  categories {:?}", s.positions, cats);
    }

    let (sel, rank) = generator_accuracies(&policy, &[0, 1, 2, 3])?;
    println!("\naccuracies against the ordered ids [0, 1, 2, 3]: item selection {sel}, rank {rank}");
    Ok(())
}
