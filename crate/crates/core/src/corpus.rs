//! Document collections: loading, length filtering, persistence and the
//! human holdout split.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{rng_for, Stream};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Human,
    Machine,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Human => "human",
            Label::Machine => "machine",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "human" => Ok(Label::Human),
            "machine" => Ok(Label::Machine),
            other => Err(Error::Corpus(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: Vec<u8>,
    pub gold_label: Option<Label>,
    pub source: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<Vec<u8>>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            gold_label: None,
            source: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.gold_label = Some(label);
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn char_len(&self) -> usize {
        text::char_len(&self.text)
    }

    pub fn text_lossy(&self) -> std::borrow::Cow<'_, str> {
        String::from_utf8_lossy(&self.text)
    }
}

/// An ordered, immutable collection of documents with unique ids and
/// non-empty texts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    pub provenance: String,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if doc.text.is_empty() {
                return Err(Error::Corpus(format!(
                    "document {:?} has empty text",
                    doc.id
                )));
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::Corpus(format!("duplicate document id {:?}", doc.id)));
            }
        }
        Ok(Corpus {
            documents,
            provenance: provenance.into(),
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, ordinal: usize) -> Option<&Document> {
        self.documents.get(ordinal)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.documents.iter()
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }

    pub fn has_gold_labels(&self) -> bool {
        !self.documents.is_empty() && self.documents.iter().all(|d| d.gold_label.is_some())
    }

    /// Concatenates two corpora, failing on id collisions.
    pub fn merged(&self, other: &Corpus, provenance: impl Into<String>) -> Result<Corpus> {
        let docs = self
            .documents
            .iter()
            .chain(other.documents.iter())
            .cloned()
            .collect();
        Corpus::new(docs, provenance)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.documents.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    PlaintextDir,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "txt-dir" | "plaintext_dir" | "plaintext-dir" => Ok(CorpusFormat::PlaintextDir),
            other => Err(Error::Config(format!("unknown corpus format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRecord {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub skipped: Vec<SkippedRecord>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    text: std::borrow::Cow<'a, str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<&'a str>,
}

#[derive(Deserialize)]
struct RecordIn {
    id: Option<String>,
    text: String,
    label: Option<Label>,
    source: Option<String>,
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<(Corpus, LoadReport)> {
    match format {
        CorpusFormat::Jsonl => load_jsonl(path),
        CorpusFormat::PlaintextDir => load_plaintext_dir(path),
    }
}

fn load_jsonl(path: &Path) -> Result<(Corpus, LoadReport)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut report = LoadReport::default();
    let mut docs = Vec::new();
    let mut ids = HashSet::new();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RecordIn = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                report.skipped.push(SkippedRecord {
                    line: line_no,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let id = rec.id.unwrap_or_else(|| format!("doc{:06}", docs.len()));
        if rec.text.is_empty() {
            report.skipped.push(SkippedRecord {
                line: line_no,
                reason: format!("document {id:?} has empty text"),
            });
            continue;
        }
        if !ids.insert(id.clone()) {
            report.skipped.push(SkippedRecord {
                line: line_no,
                reason: format!("duplicate id {id:?}"),
            });
            continue;
        }
        docs.push(Document {
            id,
            text: rec.text.into_bytes(),
            gold_label: rec.label,
            source: rec.source,
        });
    }
    for s in &report.skipped {
        log::warn!(
            "{}:{}: skipped record: {}",
            path.display(),
            s.line,
            s.reason
        );
    }
    let corpus = Corpus::new(docs, path.display().to_string())?;
    Ok((corpus, report))
}

fn load_plaintext_dir(path: &Path) -> Result<(Corpus, LoadReport)> {
    let mut entries = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let entry = entry.map_err(|e| Error::io(path, e))?;
        let p = entry.path();
        if p.is_file() && p.extension().is_some_and(|e| e == "txt") {
            entries.push(p);
        }
    }
    entries.sort();

    let mut report = LoadReport::default();
    let mut docs = Vec::with_capacity(entries.len());
    for (i, p) in entries.iter().enumerate() {
        let text = fs::read(p).map_err(|e| Error::io(p, e))?;
        let id = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("doc{i:06}"));
        if text.is_empty() {
            report.skipped.push(SkippedRecord {
                line: i + 1,
                reason: format!("{} is empty", p.display()),
            });
            continue;
        }
        docs.push(Document::new(id, text));
    }
    let corpus = Corpus::new(docs, path.display().to_string())?;
    Ok((corpus, report))
}

/// Writes one JSON object per document with keys in the order
/// `id`, `text`, `label`, `source`. Invalid UTF-8 is replaced lossily.
pub fn write_jsonl<W: Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    for doc in corpus {
        let rec = RecordOut {
            id: &doc.id,
            text: doc.text_lossy(),
            label: doc.gold_label,
            source: doc.source.as_deref(),
        };
        let line = serde_json::to_string(&rec).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_jsonl(corpus, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub human_holdout_fraction: f64,
    pub min_chars: usize,
    /// `None` disables trimming.
    pub trim_chars: Option<usize>,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            human_holdout_fraction: 0.05,
            min_chars: 300,
            trim_chars: Some(300),
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.human_holdout_fraction) {
            return Err(Error::Config(format!(
                "human_holdout_fraction must be in [0, 1], got {}",
                self.human_holdout_fraction
            )));
        }
        if let Some(trim) = self.trim_chars {
            if self.min_chars > trim {
                return Err(Error::Config(format!(
                    "min_chars ({}) exceeds trim_chars ({trim})",
                    self.min_chars
                )));
            }
        }
        Ok(())
    }
}

/// Drops documents shorter than `min_chars` and truncates the rest to
/// `trim_chars` characters.
pub fn filter_and_trim(corpus: &Corpus, cfg: &SplitConfig) -> Result<Corpus> {
    cfg.validate()?;
    let docs = corpus
        .iter()
        .filter(|d| d.char_len() >= cfg.min_chars)
        .map(|d| {
            let mut d = d.clone();
            if let Some(trim) = cfg.trim_chars {
                let cut = text::char_boundary(&d.text, trim);
                d.text.truncate(cut);
            }
            d
        })
        .filter(|d| !d.text.is_empty())
        .collect();
    Corpus::new(docs, corpus.provenance.clone())
}

/// Moves `floor(fraction * #human)` gold-human documents, chosen uniformly
/// without replacement, into a holdout corpus. Both outputs keep input order.
pub fn split_human_holdout(corpus: &Corpus, cfg: &SplitConfig) -> Result<(Corpus, Corpus)> {
    cfg.validate()?;
    let humans: Vec<usize> = corpus
        .iter()
        .enumerate()
        .filter(|(_, d)| d.gold_label == Some(Label::Human))
        .map(|(i, _)| i)
        .collect();
    if cfg.human_holdout_fraction > 0.0 && humans.is_empty() {
        return Err(Error::NoHumanDocuments(cfg.human_holdout_fraction));
    }
    let n_holdout = (cfg.human_holdout_fraction * humans.len() as f64).floor() as usize;
    let mut rng = rng_for(cfg.seed, Stream::Holdout, 0);
    let mut in_holdout = vec![false; corpus.len()];
    for pick in index::sample(&mut rng, humans.len(), n_holdout) {
        in_holdout[humans[pick]] = true;
    }

    let (mut working, mut holdout) = (Vec::new(), Vec::new());
    for (doc, &h) in corpus.iter().zip(&in_holdout) {
        if h {
            holdout.push(doc.clone());
        } else {
            working.push(doc.clone());
        }
    }
    Ok((
        Corpus::new(working, format!("{} (working)", corpus.provenance))?,
        Corpus::new(holdout, format!("{} (human holdout)", corpus.provenance))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc_of_len(id: &str, n: usize) -> Document {
        Document::new(id, "x".repeat(n))
    }

    fn cfg(min: usize, trim: Option<usize>) -> SplitConfig {
        SplitConfig {
            human_holdout_fraction: 0.0,
            min_chars: min,
            trim_chars: trim,
            seed: 1,
        }
    }

    #[test]
    fn jsonl_three_lines() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"id":"a","text":"one","label":"human"}}"#).unwrap();
        writeln!(
            f,
            r#"{{"id":"b","text":"two","label":"machine","source":"topk"}}"#
        )
        .unwrap();
        writeln!(f, r#"{{"text":"three"}}"#).unwrap();
        let (c, rep) = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(c.len(), 3);
        assert!(rep.skipped.is_empty());
        assert_eq!(c.documents()[1].source.as_deref(), Some("topk"));
        assert_eq!(c.documents()[2].id, "doc000002");
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let f = tempfile::NamedTempFile::new().unwrap();
        let (c, rep) = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert!(c.is_empty());
        assert!(rep.skipped.is_empty());
    }

    #[test]
    fn malformed_line_is_skipped_and_reported() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"id":"a","text":"one"}}"#).unwrap();
        writeln!(f, r#"{{"id":"b","text":"#).unwrap();
        writeln!(f, r#"{{"id":"c","text":"three"}}"#).unwrap();
        let (c, rep) = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(rep.skipped.len(), 1);
        assert_eq!(rep.skipped[0].line, 2);
    }

    #[test]
    fn missing_path_is_an_error() {
        let err = load_corpus(Path::new("/nonexistent/corpus.jsonl"), CorpusFormat::Jsonl);
        assert!(matches!(err, Err(Error::Io { .. })));
    }

    #[test]
    fn plaintext_dir_uses_stems() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.txt"), b"second").unwrap();
        fs::write(dir.path().join("a.txt"), b"first \xff raw").unwrap();
        fs::write(dir.path().join("ignored.md"), b"nope").unwrap();
        let (c, _) = load_corpus(dir.path(), CorpusFormat::PlaintextDir).unwrap();
        let ids: Vec<_> = c.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert_eq!(c.documents()[0].text, b"first \xff raw");
    }

    #[test]
    fn filter_boundaries() {
        let c = Corpus::new(
            vec![
                doc_of_len("short", 299),
                doc_of_len("long", 450),
                doc_of_len("exact", 300),
            ],
            "t",
        )
        .unwrap();
        let out = filter_and_trim(&c, &cfg(300, Some(300))).unwrap();
        let lens: Vec<_> = out.iter().map(|d| (d.id.as_str(), d.char_len())).collect();
        assert_eq!(lens, [("long", 300), ("exact", 300)]);
        assert_eq!(out.documents()[1].text, c.documents()[2].text);
    }

    #[test]
    fn trim_counts_characters_not_bytes() {
        let c = Corpus::new(vec![Document::new("u", "é".repeat(10))], "t").unwrap();
        let out = filter_and_trim(&c, &cfg(1, Some(4))).unwrap();
        assert_eq!(out.documents()[0].text_lossy(), "éééé");
    }

    #[test]
    fn min_above_trim_rejected() {
        assert!(cfg(400, Some(300)).validate().is_err());
        assert!(cfg(400, None).validate().is_ok());
    }

    fn labeled(n_human: usize, n_machine: usize) -> Corpus {
        let mut docs = Vec::new();
        for i in 0..n_human {
            docs.push(Document::new(format!("h{i}"), "human text").with_label(Label::Human));
        }
        for i in 0..n_machine {
            docs.push(Document::new(format!("m{i}"), "machine text").with_label(Label::Machine));
        }
        Corpus::new(docs, "t").unwrap()
    }

    #[test]
    fn holdout_takes_five_percent() {
        let c = labeled(1000, 300);
        let cfg = SplitConfig {
            human_holdout_fraction: 0.05,
            ..SplitConfig::default()
        };
        let (work, hold) = split_human_holdout(&c, &cfg).unwrap();
        assert_eq!(hold.len(), 50);
        assert_eq!(work.len(), 1250);
        assert!(hold.iter().all(|d| d.gold_label == Some(Label::Human)));
    }

    #[test]
    fn zero_fraction_keeps_everything() {
        let c = labeled(10, 10);
        let cfg = SplitConfig {
            human_holdout_fraction: 0.0,
            ..SplitConfig::default()
        };
        let (work, hold) = split_human_holdout(&c, &cfg).unwrap();
        assert!(hold.is_empty());
        assert_eq!(work.documents(), c.documents());
    }

    #[test]
    fn holdout_without_humans_fails() {
        let c = labeled(0, 10);
        let err = split_human_holdout(&c, &SplitConfig::default());
        assert!(matches!(err, Err(Error::NoHumanDocuments(_))));
    }

    #[test]
    fn holdout_is_seeded() {
        let c = labeled(200, 0);
        let mk = |seed| SplitConfig {
            human_holdout_fraction: 0.1,
            seed,
            ..SplitConfig::default()
        };
        let a = split_human_holdout(&c, &mk(3)).unwrap().1;
        let b = split_human_holdout(&c, &mk(3)).unwrap().1;
        let other = split_human_holdout(&c, &mk(4)).unwrap().1;
        assert_eq!(a, b);
        assert_ne!(a.documents(), other.documents());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = Corpus::new(vec![Document::new("a", "x"), Document::new("a", "y")], "t");
        assert!(err.is_err());
    }
}
