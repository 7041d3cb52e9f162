//! Slate generation: the temperature table, multi-round sequential
//! sampling with legality checks, and the point-wise heuristic generator.
//!
//! Sampling consumes the policy matrix row by row (position 1 first). After
//! each pick the chosen item's column is zeroed in all rows and the rows
//! are renormalized, so a round draws a slate of distinct items. Illegal
//! picks are masked in the current row and resampled. A round whose current
//! row runs out of probability mass (every remaining item illegal) aborts
//! and still counts against the round budget `k`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::data::{CandidateSet, PolicyMatrix, Slate};
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// A pure predicate deciding whether `candidate` may extend `partial`.
#[derive(Clone)]
pub enum LegalityRule {
    AlwaysLegal,
    /// At most `max` items sharing a value of categorical item feature
    /// `feature` per slate.
    MaxPerCategory { feature: usize, max: usize },
    /// Caller-supplied predicate over (partial list, candidate, set).
    Custom(Arc<dyn Fn(&[usize], usize, &CandidateSet) -> bool + Send + Sync>),
}

impl fmt::Debug for LegalityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LegalityRule::AlwaysLegal => write!(f, "AlwaysLegal"),
            LegalityRule::MaxPerCategory { feature, max } => {
                write!(f, "MaxPerCategory {{ feature: {feature}, max: {max} }}")
            }
            LegalityRule::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl LegalityRule {
    pub fn is_legal(&self, partial: &[usize], candidate: usize, set: &CandidateSet) -> bool {
        match self {
            LegalityRule::AlwaysLegal => true,
            LegalityRule::MaxPerCategory { feature, max } => {
                let cat = |idx: usize| set.items[idx].categorical.get(*feature).copied();
                let Some(candidate_cat) = cat(candidate) else {
                    return true;
                };
                let same = partial
                    .iter()
                    .filter(|p| cat(**p) == Some(candidate_cat))
                    .count();
                same + 1 <= *max
            }
            LegalityRule::Custom(pred) => pred(partial, candidate, set),
        }
    }
}

/// Knobs of the sampling loop.
#[derive(Clone, Debug)]
pub struct GenerationConfig {
    /// Temperature: 0 is uniform, large values concentrate on the argmax.
    pub t: f64,
    /// Maximum sampling rounds (and an upper bound on returned slates).
    pub k: usize,
    /// Slate length.
    pub l: usize,
    pub rule: LegalityRule,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            t: 5.0,
            k: 32,
            l: 4,
            rule: LegalityRule::AlwaysLegal,
        }
    }
}

impl GenerationConfig {
    fn validate(&self) -> Result<()> {
        if !self.t.is_finite() || self.t < 0.0 {
            return Err(Error::Config(format!(
                "temperature must be finite and >= 0, got {}",
                self.t
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("sample rounds k must be >= 1".into()));
        }
        if self.l == 0 {
            return Err(Error::Config("slate length must be >= 1".into()));
        }
        Ok(())
    }
}

/// Row-stochastic sampling table: `prob[i][j] = exp(t*m[i][j]) / sum_m
/// exp(t*m[i][m])` over the position rows of the policy matrix. Computed
/// with max subtraction.
pub fn temperature_table(m: &PolicyMatrix, t: f64) -> Result<Matrix> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Config(format!(
            "temperature must be finite and >= 0, got {t}"
        )));
    }
    let l = m.l();
    let n = m.n();
    let mut out = Matrix::zeros(l, n);
    for i in 0..l {
        let mut max = f64::NEG_INFINITY;
        for j in 0..n {
            let v = m.get(i, j);
            if !v.is_finite() {
                return Err(Error::Numeric(format!("policy entry ({i}, {j}) is {v}")));
            }
            max = max.max(t * v);
        }
        let row = out.row_mut(i);
        let mut z = 0.0;
        for (j, slot) in row.iter_mut().enumerate() {
            let e = (t * m.get(i, j) - max).exp();
            *slot = e;
            z += e;
        }
        for slot in row.iter_mut() {
            *slot /= z;
        }
    }
    Ok(out)
}

/// Draws an index from the (possibly unnormalized) nonnegative weights of
/// `row`; `None` when the total mass is zero.
fn sample_index(row: &[f64], rng: &mut impl Rng) -> Option<usize> {
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let u: f64 = rng.gen_range(0.0..total);
    let mut acc = 0.0;
    let mut last_positive = None;
    for (j, w) in row.iter().enumerate() {
        if *w > 0.0 {
            acc += w;
            last_positive = Some(j);
            if u < acc {
                return Some(j);
            }
        }
    }
    last_positive
}

/// One full slate attempt; `None` when the round dead-ends.
fn sample_round(
    base: &Matrix,
    set: &CandidateSet,
    config: &GenerationConfig,
    rng: &mut impl Rng,
) -> Option<Vec<usize>> {
    let mut prob = base.clone();
    let l = config.l;
    let mut list: Vec<usize> = Vec::with_capacity(l);
    for position in 0..l {
        let choice = loop {
            let choice = sample_index(prob.row(position), rng)?;
            if config.rule.is_legal(&list, choice, set) {
                break choice;
            }
            prob.set(position, choice, 0.0);
        };
        list.push(choice);
        // zero the chosen column everywhere, then renormalize the rows
        // still to be consumed
        for r in 0..prob.rows() {
            prob.set(r, choice, 0.0);
        }
        for r in position + 1..prob.rows() {
            let row = prob.row_mut(r);
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                for v in row.iter_mut() {
                    *v /= sum;
                }
            }
        }
    }
    Some(list)
}

/// Runs up to `k` sampling rounds and returns every completed round's
/// slate, duplicates included and in draw order. Building block for
/// [`mcmc_generate`]; also what distribution tests sample from.
pub fn mcmc_rounds(
    m: &PolicyMatrix,
    set: &CandidateSet,
    config: &GenerationConfig,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<usize>>> {
    config.validate()?;
    if m.n() < config.l {
        return Err(Error::Usage(format!(
            "cannot draw {} positions from {} candidates",
            config.l,
            m.n()
        )));
    }
    if set.len() != m.n() {
        return Err(Error::Usage(format!(
            "candidate set size {} does not match policy width {}",
            set.len(),
            m.n()
        )));
    }
    if m.l() < config.l {
        return Err(Error::Usage(format!(
            "policy has {} position rows, config wants {}",
            m.l(),
            config.l
        )));
    }
    let base = temperature_table(m, config.t)?;
    let mut rounds = Vec::new();
    for _ in 0..config.k {
        if let Some(list) = sample_round(&base, set, config, rng) {
            rounds.push(list);
        }
    }
    if rounds.is_empty() {
        return Err(Error::GenerationExhausted { rounds: config.k });
    }
    Ok(rounds)
}

/// Multi-round slate generation: up to `k` rounds, deduplicated in first-
/// draw order. Every returned slate has length `l`, distinct in-range
/// items, and satisfies the legality rule at every prefix.
pub fn mcmc_generate(
    m: &PolicyMatrix,
    set: &CandidateSet,
    config: &GenerationConfig,
    rng: &mut impl Rng,
) -> Result<Vec<Slate>> {
    let rounds = mcmc_rounds(m, set, config, rng)?;
    let mut slates: Vec<Slate> = Vec::new();
    for list in rounds {
        if !slates.iter().any(|s| s.positions == list) {
            slates.push(Slate::unexposed(list));
        }
    }
    Ok(slates)
}

/// Heuristic list generation from point-wise scores. The first slate is
/// always the pctr-descending top-`l` ranking; the rest are sequential
/// draws without replacement proportional to pctr. Output is deduplicated.
pub fn heuristic_generate(
    set: &CandidateSet,
    l: usize,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Slate>> {
    if count == 0 {
        return Err(Error::Usage("count must be >= 1".into()));
    }
    if l == 0 || set.len() < l {
        return Err(Error::Usage(format!(
            "cannot build length-{l} slates from {} candidates",
            set.len()
        )));
    }
    let ranking = ranking_slate(set, l);
    let mut slates = vec![Slate::unexposed(ranking)];
    for _ in 1..count {
        let list = sample_by_pctr(set, l, rng);
        if !slates.iter().any(|s| s.positions == list) {
            slates.push(Slate::unexposed(list));
        }
    }
    Ok(slates)
}

/// Top-`l` items by pctr, descending; ties keep the lower index first.
pub fn ranking_slate(set: &CandidateSet, l: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|a, b| {
        set.items[*b]
            .pctr
            .partial_cmp(&set.items[*a].pctr)
            .unwrap()
            .then(a.cmp(b))
    });
    order.truncate(l);
    order
}

/// Sequential without-replacement draw with weights proportional to pctr;
/// falls back to uniform among the remainder when all weights vanish.
fn sample_by_pctr(set: &CandidateSet, l: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut weights: Vec<f64> = set.items.iter().map(|i| i.pctr).collect();
    let mut list = Vec::with_capacity(l);
    for _ in 0..l {
        let choice = match sample_index(&weights, rng) {
            Some(c) => c,
            None => {
                // all remaining weights are zero: uniform over the remainder
                let remaining: Vec<usize> = (0..weights.len())
                    .filter(|j| !list.contains(j))
                    .collect();
                remaining[rng.gen_range(0..remaining.len())]
            }
        };
        list.push(choice);
        weights[choice] = 0.0;
    }
    list
}
