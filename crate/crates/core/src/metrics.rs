//! Ranking evaluation and corpus statistics.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::Serialize;

use crate::corpus::{Corpus, Document, Label};
use crate::ensemble::RankedList;
use crate::error::{Error, Result};
use crate::hist::Histogram;
use crate::repeats::{docs_with_any_repeat, Repeat};

pub type GoldLabels = HashMap<String, Label>;

/// Gold labels of every labeled document, keyed by id.
pub fn gold_labels(corpus: &Corpus) -> GoldLabels {
    corpus
        .iter()
        .filter_map(|d| d.gold_label.map(|l| (d.id.clone(), l)))
        .collect()
}

/// Fraction of machine documents among the first `m` ranked entries.
pub fn precision_at_m(ranked: &RankedList, gold: &GoldLabels, m: usize) -> Result<f64> {
    if m == 0 || m > ranked.len() {
        return Err(Error::Config(format!(
            "m must be in 1..={}, got {m}",
            ranked.len()
        )));
    }
    let mut hits = 0usize;
    for e in &ranked.entries[..m] {
        match gold.get(&e.doc_id) {
            Some(Label::Machine) => hits += 1,
            Some(Label::Human) => {}
            None => return Err(Error::MissingLabel(e.doc_id.clone())),
        }
    }
    Ok(hits as f64 / m as f64)
}

/// Precision at each `m` in `ms` that does not exceed the ranking length.
pub fn precision_curve(
    ranked: &RankedList,
    gold: &GoldLabels,
    ms: &[usize],
) -> Result<BTreeMap<usize, f64>> {
    ms.iter()
        .filter(|&&m| m >= 1 && m <= ranked.len())
        .map(|&m| precision_at_m(ranked, gold, m).map(|p| (m, p)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselinePrecision {
    pub ratio: f64,
    pub m: usize,
}

/// Treats every document holding at least one super-maximal repeat as
/// machine-generated: `m` is the number of such documents and `ratio` the
/// machine fraction among them.
pub fn baseline_repeat_containment(
    corpus: &Corpus,
    repeats: &[Repeat],
    gold: &GoldLabels,
) -> Result<BaselinePrecision> {
    let docs = docs_with_any_repeat(repeats);
    if docs.is_empty() {
        return Err(Error::NoRepeats);
    }
    let mut machine = 0usize;
    for &d in &docs {
        let id = &corpus.documents()[d].id;
        match gold.get(id) {
            Some(Label::Machine) => machine += 1,
            Some(Label::Human) => {}
            None => return Err(Error::MissingLabel(id.clone())),
        }
    }
    Ok(BaselinePrecision {
        ratio: machine as f64 / docs.len() as f64,
        m: docs.len(),
    })
}

/// Distinct lowercase whitespace-separated words over total words; 0 when
/// the document has no words.
pub fn diversity(doc: &Document) -> f64 {
    let text = doc.text_lossy().to_lowercase();
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.is_empty() {
        return 0.0;
    }
    let mut distinct = tokens.clone();
    distinct.sort_unstable();
    distinct.dedup();
    distinct.len() as f64 / tokens.len() as f64
}

pub fn mean_diversity(corpus: &Corpus) -> f64 {
    if corpus.is_empty() {
        return 0.0;
    }
    corpus.iter().map(diversity).sum::<f64>() / corpus.len() as f64
}

/// Diversity histograms grouped by document source (`"unknown"` when absent).
pub fn diversity_histograms(corpus: &Corpus, width: f64) -> BTreeMap<String, Histogram> {
    let mut out: BTreeMap<String, Histogram> = BTreeMap::new();
    for doc in corpus {
        let key = doc.source.clone().unwrap_or_else(|| "unknown".into());
        out.entry(key)
            .or_insert_with(|| Histogram::new(width))
            .add(diversity(doc));
    }
    out
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EvalReport {
    pub n_documents: usize,
    pub effective_k: usize,
    pub tie_policy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_at: Option<BTreeMap<usize, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_precision: Option<BaselinePrecision>,
    /// Ensemble precision at the baseline's `m`, for direct comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_at_baseline_m: Option<f64>,
    pub n_repeats: usize,
    pub skipped_rounds: usize,
    pub diversity_histogram: BTreeMap<String, Histogram>,
    pub notices: Vec<String>,
}

pub fn write_precision_csv<W: Write>(curve: &BTreeMap<usize, f64>, mut out: W) -> Result<()> {
    let io = |e| Error::io("<precision csv>", e);
    writeln!(out, "m,precision").map_err(io)?;
    for (m, p) in curve {
        writeln!(out, "{m},{p}").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::RankedEntry;

    fn ranked(ids: &[&str]) -> RankedList {
        let n = ids.len();
        let entries = ids
            .iter()
            .enumerate()
            .map(|(i, id)| RankedEntry {
                rank: i + 1,
                doc_id: id.to_string(),
                votes: n - i,
                mean_margin: 0.0,
                gold_label: None,
            })
            .collect();
        RankedList::from_unsorted(entries, n)
    }

    fn gold(machine: &[&str], human: &[&str]) -> GoldLabels {
        machine
            .iter()
            .map(|id| (id.to_string(), Label::Machine))
            .chain(human.iter().map(|id| (id.to_string(), Label::Human)))
            .collect()
    }

    #[test]
    fn perfect_prefix() {
        let ids: Vec<String> = (0..20).map(|i| format!("d{i:02}")).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let g = gold(&refs[..10], &refs[10..]);
        let r = ranked(&refs);
        assert_eq!(precision_at_m(&r, &g, 10).unwrap(), 1.0);
        assert_eq!(precision_at_m(&r, &g, 20).unwrap(), 0.5);
        assert_eq!(precision_at_m(&r, &g, 15).unwrap(), 10.0 / 15.0);
    }

    #[test]
    fn precision_bounds_and_missing_labels() {
        let r = ranked(&["a", "b"]);
        let g = gold(&["a"], &[]);
        assert!(precision_at_m(&r, &g, 0).is_err());
        assert!(precision_at_m(&r, &g, 3).is_err());
        assert_eq!(precision_at_m(&r, &g, 1).unwrap(), 1.0);
        assert!(matches!(precision_at_m(&r, &g, 2), Err(Error::MissingLabel(id)) if id == "b"));
    }

    #[test]
    fn diversity_examples() {
        assert_eq!(diversity(&Document::new("a", "a b a c")), 0.75);
        assert_eq!(diversity(&Document::new("b", "x x x")), 1.0 / 3.0);
        assert_eq!(diversity(&Document::new("c", "one two three")), 1.0);
        assert_eq!(diversity(&Document::new("d", "The the THE")), 1.0 / 3.0);
        assert_eq!(diversity(&Document::new("e", "   ")), 0.0);
    }

    #[test]
    fn baseline_only_machine_docs() {
        let docs = vec![
            Document::new("m0", "x").with_label(Label::Machine),
            Document::new("h0", "y").with_label(Label::Human),
            Document::new("m1", "z").with_label(Label::Machine),
        ];
        let c = Corpus::new(docs, "t").unwrap();
        let rep = Repeat {
            substring: b"r".to_vec(),
            length_chars: 1,
            occurrences: vec![],
            doc_set: vec![0, 2],
        };
        let b = baseline_repeat_containment(&c, &[rep], &gold_labels(&c)).unwrap();
        assert_eq!(b, BaselinePrecision { ratio: 1.0, m: 2 });
        assert!(baseline_repeat_containment(&c, &[], &gold_labels(&c)).is_err());
    }

    #[test]
    fn precision_csv() {
        let curve: BTreeMap<usize, f64> = [(10, 1.0), (100, 0.75)].into_iter().collect();
        let mut buf = Vec::new();
        write_precision_csv(&curve, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "m,precision\n10,1\n100,0.75\n"
        );
    }
}
