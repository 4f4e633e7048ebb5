//! Pool, vocabulary and label-embedding ingestion.
//!
//! A pool file is line-delimited JSON. Every record must carry a string `id`,
//! a string array `labels` and a numeric `quality`; everything else on the line
//! is kept verbatim as the record payload so selected subsets can be written
//! back out unchanged.
//!
//! Label names are matched after trimming and case-folding. The first spelling
//! seen becomes the display name.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Index into a [`LabelVocabulary`].
pub type LabelId = u32;

/// One annotated pool record.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub id: String,
    /// Strictly increasing, non-empty, each below the vocabulary size.
    pub label_ids: Vec<LabelId>,
    pub quality: f64,
    /// The original record line. Never interpreted.
    pub payload: String,
}

/// Supported pool encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoolFormat {
    #[default]
    JsonLines,
}

/// Ordered label set with per-label occurrence counts over a pool.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelVocabulary {
    labels: Vec<String>,
    frequency: Vec<u64>,
    index: HashMap<String, LabelId>,
}

/// Canonical lookup key for a label name.
pub fn label_key(name: &str) -> String {
    name.trim().to_lowercase()
}

impl LabelVocabulary {
    /// Builds a vocabulary from already-unique names, with zero frequencies.
    pub fn from_labels<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vocab = LabelVocabulary::default();
        for name in names {
            let name = name.as_ref();
            let key = label_key(name);
            if key.is_empty() {
                return Err(Error::InvalidParameter("empty label name".into()));
            }
            if vocab.index.contains_key(&key) {
                return Err(Error::InvalidParameter(format!("duplicate label {name:?}")));
            }
            vocab.push(name.trim(), key);
        }
        Ok(vocab)
    }

    fn push(&mut self, display: &str, key: String) -> LabelId {
        let id = self.labels.len() as LabelId;
        self.labels.push(display.to_string());
        self.frequency.push(0);
        self.index.insert(key, id);
        id
    }

    fn intern(&mut self, name: &str) -> Option<LabelId> {
        let key = label_key(name);
        if key.is_empty() {
            return None;
        }
        if let Some(&id) = self.index.get(&key) {
            return Some(id);
        }
        Some(self.push(name.trim(), key))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: LabelId) -> &str {
        &self.labels[id as usize]
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequency
    }

    pub fn frequency(&self, id: LabelId) -> u64 {
        self.frequency[id as usize]
    }

    pub fn get(&self, name: &str) -> Option<LabelId> {
        self.index.get(&label_key(name)).copied()
    }

    /// Replaces the frequency table with counts taken from `points`.
    pub fn recount(&mut self, points: &[DataPoint]) {
        self.frequency.iter_mut().for_each(|f| *f = 0);
        for p in points {
            for &l in &p.label_ids {
                self.frequency[l as usize] += 1;
            }
        }
    }

    /// SHA-256 over the ordered label names, newline separated.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for label in &self.labels {
            hasher.update(label.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// A record dropped because it had no usable labels. `line` is 0 when the
/// record was dropped by relabeling rather than at parse time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcludedRecord {
    pub line: usize,
    pub id: String,
}

/// Validated pool: points plus the vocabulary they reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Pool {
    pub points: Vec<DataPoint>,
    pub vocab: LabelVocabulary,
    pub excluded: Vec<ExcludedRecord>,
}

impl Pool {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label_count(&self) -> usize {
        self.vocab.len()
    }

    /// Rewrites every point through `remap` into `target` vocabulary indices.
    ///
    /// Points whose labels are all dropped move to `excluded`. Target
    /// frequencies are recounted from the surviving points.
    pub fn relabel(&self, remap: &Remap, target: &LabelVocabulary) -> Result<Pool> {
        if remap.len() != self.vocab.len() {
            return Err(Error::LengthMismatch {
                expected: self.vocab.len(),
                found: remap.len(),
            });
        }
        let mut points = Vec::with_capacity(self.points.len());
        let mut excluded = self.excluded.clone();
        for p in &self.points {
            let mut labels: Vec<LabelId> =
                p.label_ids.iter().filter_map(|&l| remap.target(l)).collect();
            labels.sort_unstable();
            labels.dedup();
            if let Some(&max) = labels.last() {
                if max as usize >= target.len() {
                    return Err(Error::Invariant(format!(
                        "remap target {max} outside vocabulary of {}",
                        target.len()
                    )));
                }
                points.push(DataPoint {
                    label_ids: labels,
                    ..p.clone()
                });
            } else {
                excluded.push(ExcludedRecord {
                    line: 0,
                    id: p.id.clone(),
                });
            }
        }
        let mut vocab = target.clone();
        vocab.recount(&points);
        Ok(Pool {
            points,
            vocab,
            excluded,
        })
    }
}

struct ParsedRecord {
    line: usize,
    id: String,
    labels: Vec<String>,
    quality: f64,
    payload: String,
}

fn parse_record(line: usize, text: &str) -> Result<ParsedRecord> {
    let malformed = |reason: String| Error::MalformedRecord { line, reason };
    let value: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("record is not a JSON object".into()))?;
    let id = match obj.get("id") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(Value::String(_)) => return Err(malformed("empty `id`".into())),
        Some(_) => return Err(malformed("`id` must be a string".into())),
        None => return Err(malformed("missing `id`".into())),
    };
    let labels = match obj.get("labels") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| malformed(format!("record {id:?}: labels must be strings")))
            })
            .collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(malformed(format!("record {id:?}: `labels` must be an array"))),
        None => return Err(malformed(format!("record {id:?}: missing `labels`"))),
    };
    let quality = match obj.get("quality") {
        Some(Value::Number(n)) => n
            .as_f64()
            .ok_or_else(|| malformed(format!("record {id:?}: unrepresentable quality")))?,
        Some(_) => return Err(malformed(format!("record {id:?}: `quality` must be a number"))),
        None => return Err(malformed(format!("record {id:?}: missing `quality`"))),
    };
    if !quality.is_finite() {
        return Err(malformed(format!("record {id:?}: quality is not finite")));
    }
    Ok(ParsedRecord {
        line,
        id,
        labels,
        quality,
        payload: text.to_string(),
    })
}

/// Parses pool text already in memory.
///
/// Records are parsed in parallel; the resulting order, vocabulary order and
/// the first reported error all follow the sequential line order.
pub fn parse_pool(text: &str, format: PoolFormat) -> Result<Pool> {
    let PoolFormat::JsonLines = format;
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    let parsed: Vec<Result<ParsedRecord>> = lines
        .par_iter()
        .map(|&(line, l)| parse_record(line, l))
        .collect();

    let mut vocab = LabelVocabulary::default();
    let mut seen = HashSet::with_capacity(parsed.len());
    let mut points = Vec::with_capacity(parsed.len());
    let mut excluded = Vec::new();
    for record in parsed {
        let record = record?;
        if record.quality < 0.0 {
            return Err(Error::NegativeQuality {
                line: record.line,
                id: record.id,
                quality: record.quality,
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId {
                line: record.line,
                id: record.id,
            });
        }
        let mut label_ids: Vec<LabelId> =
            record.labels.iter().filter_map(|l| vocab.intern(l)).collect();
        label_ids.sort_unstable();
        label_ids.dedup();
        if label_ids.is_empty() {
            excluded.push(ExcludedRecord {
                line: record.line,
                id: record.id,
            });
            continue;
        }
        points.push(DataPoint {
            id: record.id,
            label_ids,
            quality: record.quality,
            payload: record.payload,
        });
    }
    if !excluded.is_empty() {
        tracing::warn!(count = excluded.len(), "excluded records without labels");
    }
    vocab.recount(&points);
    Ok(Pool {
        points,
        vocab,
        excluded,
    })
}

pub fn load_pool(path: impl AsRef<Path>, format: PoolFormat) -> Result<Pool> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pool(&text, format)
}

/// Label embedding table, row-aligned with a vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelEmbeddings {
    dim: usize,
    values: Vec<f64>,
    norms: Vec<f64>,
}

impl LabelEmbeddings {
    /// Builds a table from rows, rejecting ragged or all-zero rows.
    pub fn from_rows(rows: Vec<Vec<f64>>, names: &[String]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidParameter("embedding dimension must be positive".into()));
        }
        let mut values = Vec::with_capacity(rows.len() * dim);
        let mut norms = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    line: i + 1,
                    expected: dim,
                    found: row.len(),
                });
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::ZeroVector {
                    label: names.get(i).cloned().unwrap_or_else(|| format!("#{i}")),
                });
            }
            values.extend_from_slice(row);
            norms.push(norm);
        }
        Ok(LabelEmbeddings { dim, values, norms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    /// Keeps the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> LabelEmbeddings {
        let mut values = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        LabelEmbeddings {
            dim: self.dim,
            values,
            norms: rows.iter().map(|&r| self.norms[r]).collect(),
        }
    }

    /// Writes the `K dim` header format; rows use shortest round-trip floats.
    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        let mut line = String::new();
        for i in 0..self.len() {
            line.clear();
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{v}");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Sidecar label-order file path conventionally paired with an embedding file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".labels");
    PathBuf::from(s)
}

/// Parses the `K dim` header format.
///
/// With `order` given, row `i` belongs to label `order[i]` and rows are
/// rearranged into vocabulary order; otherwise rows are taken as already
/// aligned with the vocabulary.
pub fn parse_embeddings(
    text: &str,
    order: Option<&[String]>,
    vocab: &LabelVocabulary,
) -> Result<LabelEmbeddings> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::MalformedEmbeddings {
        line: 1,
        reason: "missing `K dim` header".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse_count = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::MalformedEmbeddings {
            line: 1,
            reason: format!("bad header field {s:?}"),
        })
    };
    let (header_rows, dim) = match fields.as_slice() {
        [k, d] => (parse_count(k)?, parse_count(d)?),
        _ => {
            return Err(Error::MalformedEmbeddings {
                line: 1,
                reason: "header must be `K dim`".into(),
            })
        }
    };
    if dim == 0 {
        return Err(Error::MalformedEmbeddings {
            line: 1,
            reason: "dimension must be positive".into(),
        });
    }

    let mut rows = Vec::with_capacity(header_rows);
    for (i, line) in lines {
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::MalformedEmbeddings {
                        line: i + 1,
                        reason: format!("bad value {t:?}"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                line: i + 1,
                expected: dim,
                found: row.len(),
            });
        }
        rows.push(row);
    }
    if rows.len() != header_rows {
        return Err(Error::MalformedEmbeddings {
            line: 1,
            reason: format!("header declares {header_rows} rows, file has {}", rows.len()),
        });
    }
    if rows.len() != vocab.len() {
        return Err(Error::RowCount {
            expected: vocab.len(),
            found: rows.len(),
        });
    }

    let rows = match order {
        None => rows,
        Some(order) => {
            if order.len() != rows.len() {
                return Err(Error::RowCount {
                    expected: rows.len(),
                    found: order.len(),
                });
            }
            let by_key: HashMap<String, usize> = order
                .iter()
                .enumerate()
                .map(|(i, name)| (label_key(name), i))
                .collect();
            let mut picked: Vec<Option<Vec<f64>>> = rows.into_iter().map(Some).collect();
            vocab
                .labels()
                .iter()
                .map(|label| {
                    by_key
                        .get(&label_key(label))
                        .and_then(|&i| picked[i].take())
                        .ok_or_else(|| Error::MissingLabel {
                            label: label.clone(),
                        })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    LabelEmbeddings::from_rows(rows, vocab.labels())
}

/// Loads an embedding file, consulting `order_path` (or the `.labels`
/// sidecar when present) for row ownership.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    order_path: Option<&Path>,
    vocab: &LabelVocabulary,
) -> Result<LabelEmbeddings> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let sidecar = sidecar_path(path);
    let order_path = order_path.or_else(|| sidecar.exists().then_some(sidecar.as_path()));
    let order = match order_path {
        Some(p) => {
            let t = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Some(
                t.lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(str::to_string)
                    .collect::<Vec<_>>(),
            )
        }
        None => None,
    };
    parse_embeddings(&text, order.as_deref(), vocab)
}

/// Maps every original label index to its surviving representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Remap {
    targets: Vec<Option<LabelId>>,
}

impl Remap {
    pub fn identity(k: usize) -> Self {
        Remap {
            targets: (0..k as LabelId).map(Some).collect(),
        }
    }

    pub fn from_targets(targets: Vec<Option<LabelId>>) -> Self {
        Remap { targets }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn target(&self, original: LabelId) -> Option<LabelId> {
        self.targets[original as usize]
    }

    pub fn targets(&self) -> &[Option<LabelId>] {
        &self.targets
    }

    pub fn is_identity(&self) -> bool {
        self.targets
            .iter()
            .enumerate()
            .all(|(i, t)| *t == Some(i as LabelId))
    }

    /// Two-column text: `original<TAB>representative` or `original<TAB>DROPPED`.
    pub fn write_table(
        &self,
        mut out: impl Write,
        original: &LabelVocabulary,
        target: &LabelVocabulary,
    ) -> std::io::Result<()> {
        for (i, t) in self.targets.iter().enumerate() {
            let from = original.label(i as LabelId);
            match t {
                Some(t) => writeln!(out, "{from}\t{}", target.label(*t))?,
                None => writeln!(out, "{from}\tDROPPED")?,
            }
        }
        Ok(())
    }
}

/// Output of [`normalize_labels`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub vocab: LabelVocabulary,
    pub embeddings: LabelEmbeddings,
    pub remap: Remap,
}

/// Frequency filtering followed by greedy similarity merging.
///
/// Labels below `min_freq` are dropped. Survivors are visited by descending
/// frequency (ties by name); each one merges into the first existing
/// representative with cosine similarity `>= merge_sim`, or becomes a new
/// representative. Representatives keep their original relative order and
/// their frequency is the sum over merged members.
pub fn normalize_labels(
    vocab: &LabelVocabulary,
    emb: &LabelEmbeddings,
    min_freq: u64,
    merge_sim: f64,
) -> Result<Normalization> {
    if min_freq < 1 {
        return Err(Error::InvalidParameter("min_freq must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&merge_sim) {
        return Err(Error::InvalidParameter(format!(
            "merge_sim {merge_sim} outside [0, 1]"
        )));
    }
    if emb.len() != vocab.len() {
        return Err(Error::RowCount {
            expected: vocab.len(),
            found: emb.len(),
        });
    }

    let mut order: Vec<usize> = (0..vocab.len())
        .filter(|&i| vocab.frequency[i] >= min_freq)
        .collect();
    if order.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    order.sort_by(|&a, &b| {
        vocab.frequency[b]
            .cmp(&vocab.frequency[a])
            .then_with(|| vocab.labels[a].cmp(&vocab.labels[b]))
    });

    let mut owner: Vec<Option<usize>> = vec![None; vocab.len()];
    let mut reps: Vec<usize> = Vec::new();
    for &label in &order {
        let rep = reps
            .iter()
            .copied()
            .find(|&r| crate::label_graph::cosine_similarity(emb, r, label) >= merge_sim);
        match rep {
            Some(r) => owner[label] = Some(r),
            None => {
                owner[label] = Some(label);
                reps.push(label);
            }
        }
    }

    reps.sort_unstable();
    let mut new_index = vec![None; vocab.len()];
    let mut out = LabelVocabulary::default();
    for &r in &reps {
        let key = label_key(&vocab.labels[r]);
        new_index[r] = Some(out.push(&vocab.labels[r], key));
    }
    let targets: Vec<Option<LabelId>> = owner.iter().map(|o| o.and_then(|r| new_index[r])).collect();
    for (orig, t) in targets.iter().enumerate() {
        if let Some(t) = t {
            out.frequency[*t as usize] += vocab.frequency[orig];
        }
    }
    Ok(Normalization {
        vocab: out,
        embeddings: emb.select_rows(&reps),
        remap: Remap { targets },
    })
}
