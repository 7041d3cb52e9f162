//! Core domain types: items, candidate sets, slates, logged samples and the
//! generation policy matrix.
//!
//! All indices are 0-based. A rank of `l` (one past the last position)
//! means "not in the list".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Matrix;

use super::schema::{FeatureKind, FeatureSchema};

/// One candidate item: dense categorical indices, raw numeric values, and
/// the point-wise predicted CTR coming from the upstream ranking model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub item_id: u64,
    pub categorical: Vec<usize>,
    pub numeric: Vec<f64>,
    pub pctr: f64,
}

impl Item {
    pub fn validate(&self, schema: &FeatureSchema) -> Result<()> {
        let (cat, num) = schema.item_counts();
        if self.categorical.len() != cat || self.numeric.len() != num {
            return Err(Error::Config(format!(
                "item {} feature arity ({}, {}) does not match schema ({cat}, {num})",
                self.item_id,
                self.categorical.len(),
                self.numeric.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.pctr) {
            return Err(Error::Config(format!(
                "item {}: pctr {} outside [0, 1]",
                self.item_id, self.pctr
            )));
        }
        if self.numeric.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "item {}: non-finite numeric feature",
                self.item_id
            )));
        }
        Ok(())
    }
}

/// The featured candidate set for one request plus the user context.
/// Semantically permutation-invariant: any reordering denotes the same set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub items: Vec<Item>,
    pub user_categorical: Vec<usize>,
    pub user_numeric: Vec<f64>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn validate(&self, schema: &FeatureSchema, min_len: usize) -> Result<()> {
        if self.items.len() < min_len {
            return Err(Error::Config(format!(
                "candidate set has {} items, need at least {min_len}",
                self.items.len()
            )));
        }
        let (ucat, unum) = schema.user_counts();
        if self.user_categorical.len() != ucat || self.user_numeric.len() != unum {
            return Err(Error::Config(format!(
                "user context arity ({}, {}) does not match schema ({ucat}, {unum})",
                self.user_categorical.len(),
                self.user_numeric.len()
            )));
        }
        let mut ids: Vec<u64> = self.items.iter().map(|i| i.item_id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("duplicate item ids in candidate set".into()));
        }
        for item in &self.items {
            item.validate(schema)?;
        }
        Ok(())
    }
}

/// An ordered list of `l` distinct candidate indices plus per-position
/// exposure and click labels. Freshly generated slates carry all-false
/// labels until they are exposed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slate {
    pub positions: Vec<usize>,
    pub exposure: Vec<bool>,
    pub click: Vec<bool>,
}

impl Slate {
    pub fn unexposed(positions: Vec<usize>) -> Self {
        let l = positions.len();
        Slate {
            positions,
            exposure: vec![false; l],
            click: vec![false; l],
        }
    }

    pub fn labeled(positions: Vec<usize>, exposure: Vec<bool>, click: Vec<bool>) -> Result<Self> {
        let slate = Slate {
            positions,
            exposure,
            click,
        };
        slate.validate_labels()?;
        Ok(slate)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    fn validate_labels(&self) -> Result<()> {
        if self.exposure.len() != self.positions.len() || self.click.len() != self.positions.len() {
            return Err(Error::Config("slate label arity mismatch".into()));
        }
        for (c, e) in self.click.iter().zip(&self.exposure) {
            if *c && !*e {
                return Err(Error::Config("click without exposure".into()));
            }
        }
        Ok(())
    }

    /// Index distinctness, bounds against the candidate count, and the
    /// click-implies-exposure invariant.
    pub fn validate(&self, candidate_count: usize) -> Result<()> {
        self.validate_labels()?;
        let mut seen = vec![false; candidate_count];
        for &p in &self.positions {
            if p >= candidate_count {
                return Err(Error::Config(format!(
                    "slate position index {p} out of range {candidate_count}"
                )));
            }
            if seen[p] {
                return Err(Error::Config(format!("duplicate slate index {p}")));
            }
            seen[p] = true;
        }
        Ok(())
    }
}

/// One decision-log record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoggedSample {
    pub candidate_set: CandidateSet,
    pub selected: Slate,
    /// Per-candidate slate position; `None` for items left out.
    pub rerank_index: Vec<Option<usize>>,
}

impl LoggedSample {
    pub fn new(candidate_set: CandidateSet, selected: Slate) -> Result<Self> {
        let mut rerank_index = vec![None; candidate_set.len()];
        for (pos, &idx) in selected.positions.iter().enumerate() {
            if idx >= candidate_set.len() {
                return Err(Error::Config(format!("slate index {idx} out of range")));
            }
            rerank_index[idx] = Some(pos);
        }
        let sample = LoggedSample {
            candidate_set,
            selected,
            rerank_index,
        };
        sample.validate()?;
        Ok(sample)
    }

    pub fn n(&self) -> usize {
        self.candidate_set.len()
    }

    pub fn l(&self) -> usize {
        self.selected.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.selected.validate(self.candidate_set.len())?;
        if self.rerank_index.len() != self.candidate_set.len() {
            return Err(Error::Config("rerank_index arity mismatch".into()));
        }
        let labeled = self.rerank_index.iter().filter(|r| r.is_some()).count();
        if labeled != self.selected.len() {
            return Err(Error::Config(format!(
                "{labeled} items carry a position label, slate length is {}",
                self.selected.len()
            )));
        }
        for (idx, r) in self.rerank_index.iter().enumerate() {
            match r {
                Some(pos) => {
                    if self.selected.positions.get(*pos) != Some(&idx) {
                        return Err(Error::Config(format!(
                            "rerank_index {pos} of item {idx} disagrees with slate"
                        )));
                    }
                }
                None => {
                    if self.selected.positions.contains(&idx) {
                        return Err(Error::Config(format!(
                            "item {idx} in slate but missing its position label"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The (l+1) x n generation policy: entry (i, j) is the probability of
/// candidate j occupying position i, with the extra last row for "not in
/// the list". Columns sum to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyMatrix {
    entries: Matrix,
    l: usize,
}

impl PolicyMatrix {
    pub const COLUMN_SUM_TOLERANCE: f64 = 1e-6;

    pub fn new(entries: Matrix, l: usize) -> Result<Self> {
        if entries.rows() != l + 1 {
            return Err(Error::Config(format!(
                "policy matrix has {} rows, expected {}",
                entries.rows(),
                l + 1
            )));
        }
        let pm = PolicyMatrix { entries, l };
        pm.validate()?;
        Ok(pm)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        self.entries.cols()
    }

    pub fn get(&self, position: usize, item: usize) -> f64 {
        self.entries.get(position, item)
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn validate(&self) -> Result<()> {
        for v in self.entries.data() {
            if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                return Err(Error::Numeric(format!("policy entry {v} outside [0, 1]")));
            }
        }
        for (j, s) in self.entries.col_sums().iter().enumerate() {
            if (s - 1.0).abs() > Self::COLUMN_SUM_TOLERANCE {
                return Err(Error::Numeric(format!(
                    "policy column {j} sums to {s}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Converts an ordered id list into per-item ranks: item `ids[j]` gets rank
/// `j`, every other item gets rank `l` ("not in the list").
pub fn rank_label(ids: &[usize], n: usize, l: usize) -> Result<Vec<usize>> {
    if ids.len() != l {
        return Err(Error::data(
            0,
            format!("id list length {} does not match l={l}", ids.len()),
        ));
    }
    let mut ranks = vec![l; n];
    for (j, &id) in ids.iter().enumerate() {
        if id >= n {
            return Err(Error::data(0, format!("id {id} out of range {n}")));
        }
        if ranks[id] != l {
            return Err(Error::data(0, format!("duplicate id {id}")));
        }
        ranks[id] = j;
    }
    Ok(ranks)
}

/// Number of boundaries strictly below `value`; range [0, boundaries.len()].
pub fn bucketize(value: f64, boundaries: &[f64]) -> Result<usize> {
    if !value.is_finite() {
        return Err(Error::data(0, format!("cannot bucketize non-finite value {value}")));
    }
    Ok(boundaries.partition_point(|b| *b < value))
}

/// Bucket count for a feature kind (categorical vocab or numeric buckets).
pub fn feature_cardinality(kind: &FeatureKind) -> usize {
    match kind {
        FeatureKind::Categorical { vocab_size } => *vocab_size,
        FeatureKind::Numeric { boundaries } => boundaries.len() + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_label_identity_order() {
        // presentation in 1-based terms: [1,2,3,4,5,5]
        assert_eq!(rank_label(&[0, 1, 2, 3], 6, 4).unwrap(), vec![0, 1, 2, 3, 4, 4]);
    }

    #[test]
    fn rank_label_shuffled_order() {
        // presentation in 1-based terms: [2,4,3,5,1,5]
        assert_eq!(rank_label(&[4, 0, 2, 1], 6, 4).unwrap(), vec![1, 3, 2, 4, 0, 4]);
    }

    #[test]
    fn rank_label_rejects_duplicates_and_out_of_range() {
        assert!(rank_label(&[0, 0], 4, 2).is_err());
        assert!(rank_label(&[0, 9], 4, 2).is_err());
    }

    #[test]
    fn bucketize_below_first_boundary_is_zero() {
        assert_eq!(bucketize(-3.0, &[0.1, 0.5]).unwrap(), 0);
    }

    #[test]
    fn bucketize_mid_value() {
        assert_eq!(bucketize(0.3, &[0.1, 0.5]).unwrap(), 1);
    }

    #[test]
    fn bucketize_rejects_non_finite() {
        assert!(bucketize(f64::NAN, &[0.0]).is_err());
    }

    #[test]
    fn click_without_exposure_rejected() {
        let err = Slate::labeled(vec![0, 1], vec![true, false], vec![false, true]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn policy_matrix_requires_stochastic_columns() {
        let entries = Matrix::from_rows(&[vec![0.9, 0.2], vec![0.1, 0.9]]).unwrap();
        assert!(PolicyMatrix::new(entries, 1).is_err());
        let good = Matrix::from_rows(&[vec![0.9, 0.2], vec![0.1, 0.8]]).unwrap();
        assert!(PolicyMatrix::new(good, 1).is_ok());
    }

    proptest! {
        /// Exactly n-l entries rank as "not in" and the ranked entries form
        /// a bijection onto 0..l, verified by enumeration.
        #[test]
        fn rank_label_is_a_partial_bijection(perm in proptest::sample::subsequence((0..10usize).collect::<Vec<_>>(), 4)) {
            let n = 10;
            let l = perm.len();
            let ranks = rank_label(&perm, n, l).unwrap();
            let not_in = ranks.iter().filter(|r| **r == l).count();
            prop_assert_eq!(not_in, n - l);
            let mut seen = vec![false; l];
            for (item, r) in ranks.iter().enumerate() {
                if *r < l {
                    prop_assert!(!seen[*r]);
                    seen[*r] = true;
                    prop_assert_eq!(perm[*r], item);
                }
            }
            prop_assert!(seen.iter().all(|s| *s));
        }

        /// Extracting ids back from ranks inverts rank_label.
        #[test]
        fn rank_label_round_trips(perm in proptest::sample::subsequence((0..8usize).collect::<Vec<_>>(), 3)) {
            let ranks = rank_label(&perm, 8, 3).unwrap();
            let mut pairs: Vec<(usize, usize)> = ranks
                .iter()
                .enumerate()
                .filter(|(_, r)| **r < 3)
                .map(|(item, r)| (*r, item))
                .collect();
            pairs.sort_unstable();
            let ids: Vec<usize> = pairs.into_iter().map(|(_, item)| item).collect();
            prop_assert_eq!(ids, perm);
        }

        /// bucketize agrees with a linear scan.
        #[test]
        fn bucketize_matches_linear_scan(value in -2.0f64..2.0, n in 0usize..6) {
            let boundaries: Vec<f64> = (0..n).map(|i| -1.0 + i as f64 * 0.4).collect();
            let expected = boundaries.iter().filter(|b| **b < value).count();
            prop_assert_eq!(bucketize(value, &boundaries).unwrap(), expected);
        }
    }
}
