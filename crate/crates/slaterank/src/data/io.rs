//! Decision-log ingestion and serialization.
//!
//! Sample files are UTF-8 line-delimited JSON, one request per line:
//!
//! ```json
//! {"user":{"categorical":[2],"numeric":[0.4]},
//!  "candidates":[{"id":7,"categorical":[3],"numeric":[0.1],"pctr":0.12,
//!                 "exposure":1,"click":0,"rerank_index":0}, ...]}
//! ```
//!
//! `rerank_index` is the 0-based slate position of a selected candidate and
//! -1 for items left out. Exposure may be omitted, in which case selected
//! items count as exposed. Ingestion validates every record against the
//! schema and the slate invariants, reporting 1-based line numbers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::schema::{FeatureKind, FeatureSchema, OOV_INDEX};
use super::types::{feature_cardinality, CandidateSet, Item, LoggedSample, Slate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OovPolicy {
    /// Map out-of-vocabulary categorical indices to the reserved index 0.
    MapToReserved,
    /// Reject records containing out-of-vocabulary indices.
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorPolicy {
    /// Stop at the first malformed record.
    Fail,
    /// Skip malformed records, reporting them with line numbers.
    Skip,
}

#[derive(Clone, Copy, Debug)]
pub struct LoadOptions {
    pub on_error: ErrorPolicy,
    pub oov: OovPolicy,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            on_error: ErrorPolicy::Fail,
            oov: OovPolicy::MapToReserved,
        }
    }
}

#[derive(Debug, Default)]
pub struct LoadOutcome {
    pub samples: Vec<LoggedSample>,
    /// (1-based line, error) for records skipped under `ErrorPolicy::Skip`.
    pub skipped: Vec<(usize, Error)>,
}

#[derive(Serialize, Deserialize)]
struct UserRecord {
    categorical: Vec<usize>,
    numeric: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CandidateRecord {
    id: u64,
    categorical: Vec<usize>,
    numeric: Vec<f64>,
    pctr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exposure: Option<u8>,
    click: u8,
    rerank_index: i64,
}

#[derive(Serialize, Deserialize)]
struct SampleRecord {
    user: UserRecord,
    candidates: Vec<CandidateRecord>,
}

fn parse_record(
    line: &str,
    line_no: usize,
    schema: &FeatureSchema,
    oov: OovPolicy,
) -> Result<LoggedSample> {
    let record: SampleRecord = serde_json::from_str(line)
        .map_err(|e| Error::data(line_no, format!("invalid JSON: {e}")))?;

    let (ucat, unum) = schema.user_counts();
    if record.user.categorical.len() != ucat || record.user.numeric.len() != unum {
        return Err(Error::data(
            line_no,
            format!(
                "user feature arity ({}, {}) does not match schema ({ucat}, {unum})",
                record.user.categorical.len(),
                record.user.numeric.len()
            ),
        ));
    }
    let user_categorical = remap_categorical(
        &record.user.categorical,
        schema.categorical_user().map(|f| &f.kind),
        oov,
        line_no,
    )?;
    check_numeric(&record.user.numeric, line_no)?;

    let (icat, inum) = schema.item_counts();
    let n = record.candidates.len();
    let mut items = Vec::with_capacity(n);
    let mut selected: Vec<(usize, usize, bool, bool)> = Vec::new(); // (pos, idx, exposed, clicked)
    for (idx, cand) in record.candidates.iter().enumerate() {
        if cand.categorical.len() != icat || cand.numeric.len() != inum {
            return Err(Error::data(
                line_no,
                format!(
                    "candidate {idx} feature arity ({}, {}) does not match schema ({icat}, {inum})",
                    cand.categorical.len(),
                    cand.numeric.len()
                ),
            ));
        }
        check_numeric(&cand.numeric, line_no)?;
        if !cand.pctr.is_finite() || !(0.0..=1.0).contains(&cand.pctr) {
            return Err(Error::data(
                line_no,
                format!("candidate {idx}: pctr {} outside [0, 1]", cand.pctr),
            ));
        }
        let categorical = remap_categorical(
            &cand.categorical,
            schema.categorical_item().map(|f| &f.kind),
            oov,
            line_no,
        )?;

        let is_selected = cand.rerank_index >= 0;
        let exposed = match cand.exposure {
            Some(0) => false,
            Some(1) => true,
            Some(other) => {
                return Err(Error::data(
                    line_no,
                    format!("candidate {idx}: exposure {other} not in {{0, 1}}"),
                ))
            }
            None => is_selected,
        };
        let clicked = match cand.click {
            0 => false,
            1 => true,
            other => {
                return Err(Error::data(
                    line_no,
                    format!("candidate {idx}: click {other} not in {{0, 1}}"),
                ))
            }
        };
        if clicked && !exposed {
            return Err(Error::data(
                line_no,
                format!("candidate {idx}: clicked but not exposed"),
            ));
        }
        if exposed && !is_selected {
            return Err(Error::data(
                line_no,
                format!("candidate {idx}: exposed but not in the selected slate"),
            ));
        }
        if is_selected {
            let pos = cand.rerank_index as usize;
            selected.push((pos, idx, exposed, clicked));
        }
        items.push(Item {
            item_id: cand.id,
            categorical,
            numeric: cand.numeric.clone(),
            pctr: cand.pctr,
        });
    }

    let l = selected.len();
    if l == 0 {
        return Err(Error::data(line_no, "no candidate carries a rerank_index"));
    }
    selected.sort_unstable();
    for (want, (pos, _, _, _)) in selected.iter().enumerate() {
        if *pos != want {
            return Err(Error::data(
                line_no,
                format!("rerank positions are not exactly 0..{l}"),
            ));
        }
    }

    let positions: Vec<usize> = selected.iter().map(|s| s.1).collect();
    let exposure: Vec<bool> = selected.iter().map(|s| s.2).collect();
    let click: Vec<bool> = selected.iter().map(|s| s.3).collect();
    let slate = Slate::labeled(positions, exposure, click)
        .map_err(|e| Error::data(line_no, e.to_string()))?;

    let set = CandidateSet {
        items,
        user_categorical,
        user_numeric: record.user.numeric,
    };
    set.validate(schema, l)
        .map_err(|e| Error::data(line_no, e.to_string()))?;
    LoggedSample::new(set, slate).map_err(|e| Error::data(line_no, e.to_string()))
}

fn remap_categorical<'a>(
    values: &[usize],
    kinds: impl Iterator<Item = &'a FeatureKind>,
    oov: OovPolicy,
    line_no: usize,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(values.len());
    for (v, kind) in values.iter().zip(kinds) {
        let vocab = feature_cardinality(kind);
        if *v >= vocab {
            match oov {
                OovPolicy::MapToReserved => out.push(OOV_INDEX),
                OovPolicy::Reject => {
                    return Err(Error::data(
                        line_no,
                        format!("categorical index {v} out of vocab {vocab}"),
                    ))
                }
            }
        } else {
            out.push(*v);
        }
    }
    Ok(out)
}

fn check_numeric(values: &[f64], line_no: usize) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::data(line_no, "non-finite numeric feature"));
    }
    Ok(())
}

/// Streaming reader over a sample file.
pub struct SampleReader<'a, R: BufRead> {
    reader: R,
    schema: &'a FeatureSchema,
    oov: OovPolicy,
    line_no: usize,
}

impl<'a> SampleReader<'a, BufReader<File>> {
    pub fn open(path: &Path, schema: &'a FeatureSchema, oov: OovPolicy) -> Result<Self> {
        let file = File::open(path)
            .map_err(|e| Error::data(0, format!("cannot open {}: {e}", path.display())))?;
        Ok(SampleReader {
            reader: BufReader::new(file),
            schema,
            oov,
            line_no: 0,
        })
    }
}

impl<'a, R: BufRead> Iterator for SampleReader<'a, R> {
    type Item = Result<LoggedSample>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let mut line = String::new();
            match self.reader.read_line(&mut line) {
                Ok(0) => return None,
                Ok(_) => {
                    self.line_no += 1;
                    let trimmed = line.trim();
                    if trimmed.is_empty() {
                        continue;
                    }
                    return Some(parse_record(trimmed, self.line_no, self.schema, self.oov));
                }
                Err(e) => return Some(Err(Error::Io(e))),
            }
        }
    }
}

/// Loads a whole sample file, honoring the error policy.
pub fn load_samples(path: &Path, schema: &FeatureSchema, options: LoadOptions) -> Result<LoadOutcome> {
    let reader = SampleReader::open(path, schema, options.oov)?;
    let mut outcome = LoadOutcome::default();
    let mut line_no = 0;
    for item in reader {
        line_no += 1;
        match item {
            Ok(sample) => outcome.samples.push(sample),
            Err(e) => match options.on_error {
                ErrorPolicy::Fail => return Err(e),
                ErrorPolicy::Skip => outcome.skipped.push((line_no, e)),
            },
        }
    }
    Ok(outcome)
}

fn to_record(sample: &LoggedSample) -> SampleRecord {
    SampleRecord {
        user: UserRecord {
            categorical: sample.candidate_set.user_categorical.clone(),
            numeric: sample.candidate_set.user_numeric.clone(),
        },
        candidates: sample
            .candidate_set
            .items
            .iter()
            .enumerate()
            .map(|(idx, item)| {
                let (exposure, click, rerank_index) = match sample.rerank_index[idx] {
                    Some(pos) => (
                        sample.selected.exposure[pos] as u8,
                        sample.selected.click[pos] as u8,
                        pos as i64,
                    ),
                    None => (0, 0, -1),
                };
                CandidateRecord {
                    id: item.item_id,
                    categorical: item.categorical.clone(),
                    numeric: item.numeric.clone(),
                    pctr: item.pctr,
                    exposure: Some(exposure),
                    click,
                    rerank_index,
                }
            })
            .collect(),
    }
}

/// Writes samples as line-delimited JSON; order-preserving and loss-free.
pub fn write_samples(path: &Path, samples: &[LoggedSample]) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    for sample in samples {
        let record = to_record(sample);
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
