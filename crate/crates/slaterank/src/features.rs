//! Feature encoding: schema-driven embedding lookup that turns one
//! candidate item (plus the user context) into a dense input row.
//!
//! Layout per item:
//! `[user cat embs | user num embs | user num raw | item cat embs |
//!   item num embs | item num raw | pctr]`
//!
//! Categorical features index their table directly; numeric features are
//! bucketized against the schema boundaries and embedded, with the raw
//! value appended as well.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::schema::{FeatureKind, FeatureSchema};
use crate::data::types::{bucketize, feature_cardinality, CandidateSet};
use crate::error::{Error, Result};
use crate::nn::{EmbeddingTable, Matrix};

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Column {
    name: String,
    /// Bucket boundaries for numeric columns; empty for categorical.
    boundaries: Vec<f64>,
    categorical: bool,
    table: EmbeddingTable,
}

impl Column {
    fn build(name: &str, kind: &FeatureKind, dim: usize, rng: &mut impl Rng) -> Self {
        let (boundaries, categorical) = match kind {
            FeatureKind::Categorical { .. } => (Vec::new(), true),
            FeatureKind::Numeric { boundaries } => (boundaries.clone(), false),
        };
        Column {
            name: name.to_string(),
            boundaries,
            categorical,
            table: EmbeddingTable::xavier(feature_cardinality(kind), dim, rng),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureEncoder {
    user_cat: Vec<Column>,
    user_num: Vec<Column>,
    item_cat: Vec<Column>,
    item_num: Vec<Column>,
    output_dim: usize,
}

/// Table rows touched while encoding one item; consumed by `backward`.
#[derive(Clone, Debug)]
pub struct EncodeTrace {
    user_cat_rows: Vec<usize>,
    user_num_rows: Vec<usize>,
    item_cat_rows: Vec<usize>,
    item_num_rows: Vec<usize>,
}

impl FeatureEncoder {
    pub fn new(schema: &FeatureSchema, rng: &mut impl Rng) -> Self {
        let user_cat: Vec<Column> = schema
            .categorical_user()
            .map(|d| Column::build(&d.name, &d.kind, d.embedding_dim, &mut *rng))
            .collect();
        let user_num: Vec<Column> = schema
            .numeric_user()
            .map(|d| Column::build(&d.name, &d.kind, d.embedding_dim, &mut *rng))
            .collect();
        let item_cat: Vec<Column> = schema
            .categorical_item()
            .map(|d| Column::build(&d.name, &d.kind, d.embedding_dim, &mut *rng))
            .collect();
        let item_num: Vec<Column> = schema
            .numeric_item()
            .map(|d| Column::build(&d.name, &d.kind, d.embedding_dim, &mut *rng))
            .collect();
        let emb: usize = user_cat
            .iter()
            .chain(&user_num)
            .chain(&item_cat)
            .chain(&item_num)
            .map(|c| c.table.dim())
            .sum();
        let output_dim = emb + user_num.len() + item_num.len() + 1;
        FeatureEncoder {
            user_cat,
            user_num,
            item_cat,
            item_num,
            output_dim,
        }
    }

    /// Width of one encoded item row.
    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Encodes item `item_idx` of `set` into `out` (length `output_dim`).
    pub fn encode_into(
        &self,
        set: &CandidateSet,
        item_idx: usize,
        out: &mut [f64],
    ) -> Result<EncodeTrace> {
        let item = set
            .items
            .get(item_idx)
            .ok_or_else(|| Error::Usage(format!("item index {item_idx} out of range")))?;
        if out.len() != self.output_dim {
            return Err(Error::Config("encode buffer width mismatch".into()));
        }
        let mut cursor = 0;
        let mut trace = EncodeTrace {
            user_cat_rows: Vec::with_capacity(self.user_cat.len()),
            user_num_rows: Vec::with_capacity(self.user_num.len()),
            item_cat_rows: Vec::with_capacity(self.item_cat.len()),
            item_num_rows: Vec::with_capacity(self.item_num.len()),
        };

        for (col, &v) in self.user_cat.iter().zip(&set.user_categorical) {
            let row = clamp_index(v, col.table.vocab_size());
            copy_row(&col.table, row, out, &mut cursor)?;
            trace.user_cat_rows.push(row);
        }
        for (col, &v) in self.user_num.iter().zip(&set.user_numeric) {
            let row = bucketize(v, &col.boundaries)?;
            copy_row(&col.table, row, out, &mut cursor)?;
            trace.user_num_rows.push(row);
        }
        for (col, &v) in self.item_cat.iter().zip(&item.categorical) {
            let row = clamp_index(v, col.table.vocab_size());
            copy_row(&col.table, row, out, &mut cursor)?;
            trace.item_cat_rows.push(row);
        }
        for (col, &v) in self.item_num.iter().zip(&item.numeric) {
            let row = bucketize(v, &col.boundaries)?;
            copy_row(&col.table, row, out, &mut cursor)?;
            trace.item_num_rows.push(row);
        }
        for &v in &set.user_numeric {
            out[cursor] = v;
            cursor += 1;
        }
        for &v in &item.numeric {
            out[cursor] = v;
            cursor += 1;
        }
        out[cursor] = item.pctr;
        cursor += 1;
        debug_assert_eq!(cursor, self.output_dim);
        Ok(trace)
    }

    /// Encodes the given items as rows of a matrix, collecting traces.
    pub fn encode_batch(
        &self,
        set: &CandidateSet,
        item_indices: &[usize],
    ) -> Result<(Matrix, Vec<EncodeTrace>)> {
        let mut m = Matrix::zeros(item_indices.len(), self.output_dim);
        let mut traces = Vec::with_capacity(item_indices.len());
        for (r, &idx) in item_indices.iter().enumerate() {
            let trace = self.encode_into(set, idx, m.row_mut(r))?;
            traces.push(trace);
        }
        Ok((m, traces))
    }

    /// Accumulates the gradient of one encoded row back into table grads.
    pub fn backward(&self, trace: &EncodeTrace, grad_row: &[f64], grads: &mut EncoderGrads) {
        let mut cursor = 0;
        for ((col, &row), g) in self
            .user_cat
            .iter()
            .zip(&trace.user_cat_rows)
            .zip(&mut grads.user_cat)
        {
            add_row(g, row, &grad_row[cursor..cursor + col.table.dim()]);
            cursor += col.table.dim();
        }
        for ((col, &row), g) in self
            .user_num
            .iter()
            .zip(&trace.user_num_rows)
            .zip(&mut grads.user_num)
        {
            add_row(g, row, &grad_row[cursor..cursor + col.table.dim()]);
            cursor += col.table.dim();
        }
        for ((col, &row), g) in self
            .item_cat
            .iter()
            .zip(&trace.item_cat_rows)
            .zip(&mut grads.item_cat)
        {
            add_row(g, row, &grad_row[cursor..cursor + col.table.dim()]);
            cursor += col.table.dim();
        }
        for ((col, &row), g) in self
            .item_num
            .iter()
            .zip(&trace.item_num_rows)
            .zip(&mut grads.item_num)
        {
            add_row(g, row, &grad_row[cursor..cursor + col.table.dim()]);
            cursor += col.table.dim();
        }
        // raw numeric positions and pctr carry no parameters
    }

    pub fn block_shapes(&self, prefix: &str) -> Vec<(String, usize)> {
        self.columns()
            .map(|(name, col)| (format!("{prefix}.{name}"), col.table.values.data().len()))
            .collect()
    }

    pub fn param_blocks_mut(&mut self, prefix: &str) -> Vec<(String, &mut [f64])> {
        let mut out = Vec::new();
        for (group, cols) in [
            ("user_cat", &mut self.user_cat),
            ("user_num", &mut self.user_num),
            ("item_cat", &mut self.item_cat),
            ("item_num", &mut self.item_num),
        ] {
            for (i, col) in cols.iter_mut().enumerate() {
                out.push((
                    format!("{prefix}.{group}.{i}"),
                    col.table.values.data_mut(),
                ));
            }
        }
        out
    }

    fn columns(&self) -> impl Iterator<Item = (String, &Column)> {
        let groups = [
            ("user_cat", &self.user_cat),
            ("user_num", &self.user_num),
            ("item_cat", &self.item_cat),
            ("item_num", &self.item_num),
        ];
        groups.into_iter().flat_map(|(group, cols)| {
            cols.iter()
                .enumerate()
                .map(move |(i, c)| (format!("{group}.{i}"), c))
        })
    }
}

fn clamp_index(v: usize, vocab: usize) -> usize {
    if v < vocab {
        v
    } else {
        crate::data::schema::OOV_INDEX
    }
}

fn copy_row(table: &EmbeddingTable, row: usize, out: &mut [f64], cursor: &mut usize) -> Result<()> {
    let src = table.lookup(row)?;
    out[*cursor..*cursor + src.len()].copy_from_slice(src);
    *cursor += src.len();
    Ok(())
}

fn add_row(grad: &mut Matrix, row: usize, g: &[f64]) {
    for (dst, src) in grad.row_mut(row).iter_mut().zip(g) {
        *dst += src;
    }
}

/// Dense gradients matching the encoder's tables.
#[derive(Clone, Debug)]
pub struct EncoderGrads {
    user_cat: Vec<Matrix>,
    user_num: Vec<Matrix>,
    item_cat: Vec<Matrix>,
    item_num: Vec<Matrix>,
}

impl EncoderGrads {
    pub fn zeros_like(enc: &FeatureEncoder) -> Self {
        let z = |cols: &[Column]| {
            cols.iter()
                .map(|c| Matrix::zeros(c.table.vocab_size(), c.table.dim()))
                .collect::<Vec<_>>()
        };
        EncoderGrads {
            user_cat: z(&enc.user_cat),
            user_num: z(&enc.user_num),
            item_cat: z(&enc.item_cat),
            item_num: z(&enc.item_num),
        }
    }

    pub fn accumulate(&mut self, other: &EncoderGrads) {
        let add = |a: &mut Vec<Matrix>, b: &Vec<Matrix>| {
            for (x, y) in a.iter_mut().zip(b) {
                for (u, v) in x.data_mut().iter_mut().zip(y.data()) {
                    *u += v;
                }
            }
        };
        add(&mut self.user_cat, &other.user_cat);
        add(&mut self.user_num, &other.user_num);
        add(&mut self.item_cat, &other.item_cat);
        add(&mut self.item_num, &other.item_num);
    }

    pub fn scale(&mut self, factor: f64) {
        for group in [
            &mut self.user_cat,
            &mut self.user_num,
            &mut self.item_cat,
            &mut self.item_num,
        ] {
            for m in group.iter_mut() {
                for v in m.data_mut() {
                    *v *= factor;
                }
            }
        }
    }

    pub fn blocks(&self, prefix: &str) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for (group, mats) in [
            ("user_cat", &self.user_cat),
            ("user_num", &self.user_num),
            ("item_cat", &self.item_cat),
            ("item_num", &self.item_num),
        ] {
            for (i, m) in mats.iter().enumerate() {
                out.push((format!("{prefix}.{group}.{i}"), m.data()));
            }
        }
        out
    }
}
