//! On-disk label graph artifact.
//!
//! Plain text, one item per line, regenerated byte-identically from identical
//! inputs:
//!
//! ```text
//! mig-graph 1
//! source_hash <sha256 of the pool vocabulary the graph was built from>
//! embeddings_hash <sha256 of the embedding file bytes>
//! labels <K>
//! threshold <T>
//! alpha <α>
//! edges <m>
//! [vocabulary]
//! "<label>"                      K lines, JSON string literals
//! [remap] <n>
//! "<source label>"\t<index|DROPPED>   n lines
//! [edges]
//! <p> <q> <w>                    m lines, p < q
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingestion::{label_key, LabelId, LabelVocabulary, Pool, Remap};
use crate::label_graph::{LabelGraph, Propagation};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "mig-graph";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphArtifact {
    pub source_hash: String,
    pub embeddings_hash: String,
    pub alpha: f64,
    pub graph: LabelGraph,
    pub vocab: LabelVocabulary,
    /// Source label name and its surviving index, if any.
    pub remap: Vec<(String, Option<LabelId>)>,
}

impl GraphArtifact {
    pub fn new(
        source: &LabelVocabulary,
        embeddings_hash: String,
        vocab: &LabelVocabulary,
        remap: &Remap,
        graph: LabelGraph,
        alpha: f64,
    ) -> Result<Self> {
        if graph.label_count() != vocab.len() || remap.len() != source.len() {
            return Err(Error::Invariant("artifact parts disagree on label counts".into()));
        }
        Ok(GraphArtifact {
            source_hash: source.content_hash(),
            embeddings_hash,
            alpha,
            graph,
            vocab: LabelVocabulary::from_labels(vocab.labels())?,
            remap: source
                .labels()
                .iter()
                .cloned()
                .zip(remap.targets().iter().copied())
                .collect(),
        })
    }

    pub fn propagation(&self) -> Result<Propagation> {
        self.graph.propagation(self.alpha)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let json = |s: &str| serde_json::to_string(s).expect("string serialization");
        let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
        let _ = writeln!(out, "source_hash {}", self.source_hash);
        let _ = writeln!(out, "embeddings_hash {}", self.embeddings_hash);
        let _ = writeln!(out, "labels {}", self.graph.label_count());
        let _ = writeln!(out, "threshold {}", self.graph.threshold());
        let _ = writeln!(out, "alpha {}", self.alpha);
        let _ = writeln!(out, "edges {}", self.graph.edge_count());
        out.push_str("[vocabulary]\n");
        for label in self.vocab.labels() {
            let _ = writeln!(out, "{}", json(label));
        }
        let _ = writeln!(out, "[remap] {}", self.remap.len());
        for (name, target) in &self.remap {
            match target {
                Some(t) => {
                    let _ = writeln!(out, "{}\t{t}", json(name));
                }
                None => {
                    let _ = writeln!(out, "{}\tDROPPED", json(name));
                }
            }
        }
        out.push_str("[edges]\n");
        for (p, q, w) in self.graph.edges() {
            let _ = writeln!(out, "{p} {q} {w}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::MalformedArtifact {
                line: 0,
                reason: format!("unexpected end of file, expected {what}"),
            })
        };
        let bad = |line: usize, reason: String| Error::MalformedArtifact { line, reason };

        let (ln, l) = next("header")?;
        let version = l
            .strip_prefix(MAGIC)
            .and_then(|v| v.trim().parse::<u32>().ok())
            .ok_or_else(|| bad(ln, "not a graph artifact".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::ArtifactVersion {
                found: version,
                expected: FORMAT_VERSION,
            });
        }

        let mut field = |name: &str| -> Result<(usize, String)> {
            let (ln, l) = next(name)?;
            l.strip_prefix(name)
                .and_then(|v| v.strip_prefix(' '))
                .map(|v| (ln, v.to_string()))
                .ok_or_else(|| bad(ln, format!("expected `{name} …`")))
        };
        let (_, source_hash) = field("source_hash")?;
        let (_, embeddings_hash) = field("embeddings_hash")?;
        let num = |(ln, v): (usize, String)| -> Result<f64> {
            v.parse::<f64>().map_err(|_| bad(ln, format!("bad number {v:?}")))
        };
        let count = |(ln, v): (usize, String)| -> Result<usize> {
            v.parse::<usize>().map_err(|_| bad(ln, format!("bad count {v:?}")))
        };
        let k = count(field("labels")?)?;
        let threshold = num(field("threshold")?)?;
        let alpha = num(field("alpha")?)?;
        let m = count(field("edges")?)?;

        let (ln, l) = next("[vocabulary]")?;
        if l != "[vocabulary]" {
            return Err(bad(ln, "expected [vocabulary]".into()));
        }
        let unjson = |ln: usize, s: &str| -> Result<String> {
            serde_json::from_str::<String>(s).map_err(|e| bad(ln, e.to_string()))
        };
        let mut names = Vec::with_capacity(k);
        for _ in 0..k {
            let (ln, l) = next("vocabulary entry")?;
            names.push(unjson(ln, l)?);
        }
        let vocab = LabelVocabulary::from_labels(&names).map_err(|e| bad(0, e.to_string()))?;

        let (ln, l) = next("[remap]")?;
        let n = l
            .strip_prefix("[remap] ")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| bad(ln, "expected `[remap] <n>`".into()))?;
        let mut remap = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, l) = next("remap entry")?;
            let (name, target) = l
                .rsplit_once('\t')
                .ok_or_else(|| bad(ln, "expected `<label>\\t<target>`".into()))?;
            let target = match target {
                "DROPPED" => None,
                t => {
                    let t = t.parse::<LabelId>().map_err(|_| bad(ln, format!("bad target {t:?}")))?;
                    if t as usize >= k {
                        return Err(bad(ln, format!("target {t} outside {k} labels")));
                    }
                    Some(t)
                }
            };
            remap.push((unjson(ln, name)?, target));
        }

        let (ln, l) = next("[edges]")?;
        if l != "[edges]" {
            return Err(bad(ln, "expected [edges]".into()));
        }
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, l) = next("edge")?;
            let parts: Vec<&str> = l.split(' ').collect();
            let parsed = match parts.as_slice() {
                [p, q, w] => p
                    .parse::<u32>()
                    .ok()
                    .zip(q.parse::<u32>().ok())
                    .zip(w.parse::<f64>().ok())
                    .map(|((p, q), w)| (p, q, w)),
                _ => None,
            };
            edges.push(parsed.ok_or_else(|| bad(ln, format!("bad edge {l:?}")))?);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(bad(ln, "trailing content".into()));
        }
        let graph = LabelGraph::from_edges(k, threshold, &edges).map_err(|e| bad(0, e.to_string()))?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(bad(0, format!("alpha {alpha} must be nonnegative")));
        }
        Ok(GraphArtifact {
            source_hash,
            embeddings_hash,
            alpha,
            graph,
            vocab,
            remap,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Errors unless `pool`'s vocabulary is the one the graph was built from.
    pub fn check_source(&self, pool: &Pool) -> Result<()> {
        let found = pool.vocab.content_hash();
        if found == self.source_hash {
            Ok(())
        } else {
            Err(Error::HashMismatch {
                expected: self.source_hash.clone(),
                found,
            })
        }
    }

    /// Rewrites a pool's labels, by name, into the artifact's vocabulary.
    ///
    /// Labels absent from the artifact are an error; labels the artifact
    /// dropped are removed, and points left without labels are excluded.
    pub fn align_pool(&self, pool: &Pool) -> Result<Pool> {
        let lookup: HashMap<String, Option<LabelId>> = self
            .remap
            .iter()
            .map(|(name, t)| (label_key(name), *t))
            .collect();
        let targets = pool
            .vocab
            .labels()
            .iter()
            .map(|name| {
                lookup
                    .get(&label_key(name))
                    .copied()
                    .ok_or_else(|| Error::UnknownLabel { label: name.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        pool.relabel(&Remap::from_targets(targets), &self.vocab)
    }
}
