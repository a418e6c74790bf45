//! On-disk formats: token corpora, cluster files, split assignments and
//! per-sample metric records.
//!
//! Token corpora, splits and metrics are JSONL (one JSON object per line,
//! blank lines tolerated). Cluster files are a single JSON array of arrays
//! written in a canonical order so that two duplication indexes can be
//! compared with a plain diff. Everything is UTF-8 with `\n` line endings.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::detector::{DuplicateGroup, DuplicationReport};
use crate::error::{Error, Result};

/// A file's identity plus its ordered identifier/literal token stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenDocument {
    /// Unique id within a corpus, typically a file path.
    pub id: String,
    /// Identifier and literal lexemes in order of appearance.
    pub tokens: Vec<String>,
}

impl TokenDocument {
    pub fn new(id: impl Into<String>, tokens: Vec<String>) -> Self {
        Self {
            id: id.into(),
            tokens,
        }
    }
}

/// One per-sample metric observation `f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub id: String,
    pub value: f64,
}

/// Fold labels of a train/validation/test split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fold {
    Train,
    Valid,
    Test,
}

impl Fold {
    pub fn as_str(self) -> &'static str {
        match self {
            Fold::Train => "train",
            Fold::Valid => "valid",
            Fold::Test => "test",
        }
    }

    fn parse(s: &str) -> Option<Fold> {
        match s {
            "train" => Some(Fold::Train),
            "valid" => Some(Fold::Valid),
            "test" => Some(Fold::Test),
            _ => None,
        }
    }
}

/// Maps every file id to exactly one fold.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitAssignment {
    folds: BTreeMap<String, Fold>,
}

impl SplitAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an assignment from `(id, fold)` pairs; a repeated id is an
    /// error (positions in the message are 1-based ordinals).
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Fold)>,
        S: Into<String>,
    {
        let mut folds = BTreeMap::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (pos, (id, fold)) in pairs.into_iter().enumerate() {
            let id = id.into();
            match seen.entry(id.clone()) {
                Entry::Occupied(first) => {
                    return Err(Error::DuplicateId {
                        id,
                        first_line: *first.get(),
                        second_line: pos + 1,
                    })
                }
                Entry::Vacant(v) => {
                    v.insert(pos + 1);
                }
            }
            folds.insert(id, fold);
        }
        Ok(Self { folds })
    }

    pub fn get(&self, id: &str) -> Option<Fold> {
        self.folds.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    /// Iterates `(id, fold)` in lexicographic id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, Fold)> {
        self.folds.iter().map(|(id, f)| (id.as_str(), *f))
    }

    /// Ids assigned to `fold`, in lexicographic order.
    pub fn ids_in(&self, fold: Fold) -> impl Iterator<Item = &str> {
        self.folds
            .iter()
            .filter(move |(_, f)| **f == fold)
            .map(|(id, _)| id.as_str())
    }
}

#[derive(Deserialize)]
struct TokenLine {
    filename: String,
    tokens: Vec<String>,
}

#[derive(Serialize)]
struct TokenLineRef<'a> {
    filename: &'a str,
    tokens: &'a [String],
}

#[derive(Deserialize)]
struct SplitLine {
    filename: String,
    fold: String,
}

#[derive(Deserialize)]
struct MetricLine {
    filename: String,
    value: f64,
}

fn parse_line<'a, T: Deserialize<'a>>(line: &'a str, line_no: usize) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })
}

/// Reads a token corpus: one `{"filename": …, "tokens": […]}` object per
/// line, in input order. Ids must be unique; blank lines are skipped.
pub fn read_token_documents<R: BufRead>(reader: R) -> Result<Vec<TokenDocument>> {
    let mut docs = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TokenLine = parse_line(&line, line_no)?;
        if parsed.filename.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty \"filename\"".into(),
            });
        }
        match seen.entry(parsed.filename.clone()) {
            Entry::Occupied(first) => {
                return Err(Error::DuplicateId {
                    id: parsed.filename,
                    first_line: *first.get(),
                    second_line: line_no,
                })
            }
            Entry::Vacant(v) => {
                v.insert(line_no);
            }
        }
        docs.push(TokenDocument {
            id: parsed.filename,
            tokens: parsed.tokens,
        });
    }
    Ok(docs)
}

/// Writes a token corpus as JSONL, one document per line, in slice order.
pub fn write_token_documents<W: Write>(docs: &[TokenDocument], mut writer: W) -> Result<()> {
    for doc in docs {
        let line = serde_json::to_string(&TokenLineRef {
            filename: &doc.id,
            tokens: &doc.tokens,
        })
        .expect("token document serialization cannot fail");
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes the duplicate groups of `report` as one JSON array of arrays.
///
/// Canonical form: ids inside a group sorted lexicographically, groups
/// sorted by their smallest id, one group per line. Byte-identical output
/// for equal reports.
pub fn write_clusters<W: Write>(report: &DuplicationReport, mut writer: W) -> Result<()> {
    let groups = report.groups();
    if groups.is_empty() {
        writer.write_all(b"[]\n")?;
        return Ok(());
    }
    writer.write_all(b"[\n")?;
    for (i, group) in groups.iter().enumerate() {
        let line =
            serde_json::to_string(group.members()).expect("cluster serialization cannot fail");
        writer.write_all(b"  ")?;
        writer.write_all(line.as_bytes())?;
        writer.write_all(if i + 1 < groups.len() { b",\n" } else { b"\n" })?;
    }
    writer.write_all(b"]\n")?;
    Ok(())
}

/// Reads a cluster file (any valid JSON array of arrays of strings) back
/// into groups. The universe is not stored in the file; callers attach it
/// via [`DuplicationReport::new`].
///
/// Rejects groups with fewer than two members and ids appearing in more
/// than one group.
pub fn read_clusters<R: Read>(reader: R) -> Result<Vec<DuplicateGroup>> {
    let raw: Vec<Vec<String>> =
        serde_json::from_reader(reader).map_err(|e| Error::InvalidClusters(e.to_string()))?;
    let mut seen: HashSet<String> = HashSet::new();
    let mut groups = Vec::with_capacity(raw.len());
    for members in raw {
        if members.len() < 2 {
            return Err(Error::InvalidClusters(format!(
                "group {members:?} has fewer than two members"
            )));
        }
        for id in &members {
            if !seen.insert(id.clone()) {
                return Err(Error::InvalidClusters(format!(
                    "id {id:?} appears in more than one group"
                )));
            }
        }
        groups.push(DuplicateGroup::new(members)?);
    }
    Ok(groups)
}

/// Reads a split file: JSONL of `{"filename": …, "fold": "train"|"valid"|"test"}`.
pub fn read_split<R: BufRead>(reader: R) -> Result<SplitAssignment> {
    let mut folds = BTreeMap::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: SplitLine = parse_line(&line, line_no)?;
        let fold = Fold::parse(&parsed.fold).ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!(
                "unknown fold {:?} (expected \"train\", \"valid\" or \"test\")",
                parsed.fold
            ),
        })?;
        match seen.entry(parsed.filename.clone()) {
            Entry::Occupied(first) => {
                return Err(Error::DuplicateId {
                    id: parsed.filename,
                    first_line: *first.get(),
                    second_line: line_no,
                })
            }
            Entry::Vacant(v) => {
                v.insert(line_no);
            }
        }
        folds.insert(parsed.filename, fold);
    }
    Ok(SplitAssignment { folds })
}

/// Writes a split assignment as JSONL in lexicographic id order.
pub fn write_split<W: Write>(split: &SplitAssignment, mut writer: W) -> Result<()> {
    for (id, fold) in split.iter() {
        let line = serde_json::json!({ "filename": id, "fold": fold.as_str() });
        writer.write_all(line.to_string().as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads metric records: JSONL of `{"filename": …, "value": number}`.
/// Values must be finite.
pub fn read_metrics<R: BufRead>(reader: R) -> Result<Vec<MetricRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: MetricLine = parse_line(&line, line_no)?;
        if !parsed.value.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("non-finite value for {:?}", parsed.filename),
            });
        }
        records.push(MetricRecord {
            id: parsed.filename,
            value: parsed.value,
        });
    }
    Ok(records)
}

/// Writes metric records as JSONL in slice order.
pub fn write_metrics<W: Write>(records: &[MetricRecord], mut writer: W) -> Result<()> {
    for rec in records {
        let line = serde_json::json!({ "filename": rec.id, "value": rec.value });
        writer.write_all(line.to_string().as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
