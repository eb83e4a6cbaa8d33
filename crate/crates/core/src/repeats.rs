//! Super-maximal repeat mining.
//!
//! A repeat is super-maximal when no other repeated substring contains it.
//! Over the lcp-interval tree this means the interval has no child interval
//! (no right extension is repeated) and the symbols preceding its
//! occurrences are pairwise distinct (no left extension is repeated). The
//! first condition is a plateau of the bounded LCP array that is strictly
//! higher than both neighbours, so mining is a single linear scan.

use std::collections::BTreeSet;
use std::io::Write;

use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::hist::Histogram;
use crate::index::{CorpusIndex, SEP};
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinerConfig {
    /// Minimum repeat length in characters.
    pub min_len: usize,
    /// Minimum number of (possibly overlapping) occurrences.
    pub min_occ: usize,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            min_len: 20,
            min_occ: 3,
        }
    }
}

impl MinerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_len < 1 {
            return Err(Error::Config("min_len must be at least 1".into()));
        }
        if self.min_occ < 2 {
            return Err(Error::Config("min_occ must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    /// Position in the concatenated index text.
    pub position: usize,
    pub doc: usize,
    /// Byte offset inside the document.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repeat {
    pub substring: Vec<u8>,
    pub length_chars: usize,
    /// Sorted by position.
    pub occurrences: Vec<Occurrence>,
    /// Sorted, deduplicated document ordinals.
    pub doc_set: Vec<usize>,
}

impl Repeat {
    pub fn n_occurrences(&self) -> usize {
        self.occurrences.len()
    }
}

pub fn mine_supermaximal(index: &CorpusIndex, cfg: &MinerConfig) -> Vec<Repeat> {
    let lcp = index.doc_lcp();
    let sa = index.sa();
    let text = index.text();
    let n = lcp.len();
    let min_occ = cfg.min_occ.max(2);
    let min_len = cfg.min_len.max(1);

    // stamp[c] == interval tag when byte c was already seen as a predecessor
    let mut stamp = [0usize; 256];
    let mut tag = 0usize;
    let mut out = Vec::new();

    let mut i = 1;
    while i < n {
        let depth = lcp[i];
        if depth == 0 {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && lcp[j + 1] == depth {
            j += 1;
        }
        let (lo, hi) = (i - 1, j);
        let left = lcp[lo];
        let right = if hi + 1 < n { lcp[hi + 1] } else { 0 };
        i = j + 1;

        let depth = depth as usize;
        if left as usize >= depth || right as usize >= depth {
            continue;
        }
        if hi - lo + 1 < min_occ || depth < min_len {
            continue;
        }

        tag += 1;
        let left_distinct = (lo..=hi).all(|slot| {
            let p = sa[slot] as usize;
            if p == 0 || text[p - 1] == SEP {
                return true;
            }
            let c = (text[p - 1] - 2) as usize;
            if stamp[c] == tag {
                false
            } else {
                stamp[c] = tag;
                true
            }
        });
        if !left_distinct {
            continue;
        }

        let first = sa[lo] as usize;
        let Some(substring) = index.bytes(first, depth) else {
            debug_assert!(false, "bounded lcp interval crossed a separator");
            continue;
        };
        let length_chars = text::char_len(&substring);
        if length_chars < min_len {
            continue;
        }

        let mut occurrences: Vec<Occurrence> = (lo..=hi)
            .map(|slot| {
                let p = sa[slot] as usize;
                let doc = index.doc_of(p).expect("occurrence inside a document");
                Occurrence {
                    position: p,
                    doc,
                    offset: p - index.boundaries()[doc],
                }
            })
            .collect();
        occurrences.sort_unstable();
        let mut doc_set: Vec<usize> = occurrences.iter().map(|o| o.doc).collect();
        doc_set.dedup();

        out.push(Repeat {
            substring,
            length_chars,
            occurrences,
            doc_set,
        });
    }
    out
}

/// Union of the document sets of the selected repeats.
pub fn docs_containing(repeats: &[Repeat], subset: &[usize]) -> BTreeSet<usize> {
    subset
        .iter()
        .flat_map(|&r| repeats[r].doc_set.iter().copied())
        .collect()
}

/// Documents containing at least one of `repeats`.
pub fn docs_with_any_repeat(repeats: &[Repeat]) -> BTreeSet<usize> {
    repeats
        .iter()
        .flat_map(|r| r.doc_set.iter().copied())
        .collect()
}

pub fn repeat_length_histogram(repeats: &[Repeat], bucket_width: usize) -> Histogram {
    Histogram::from_values(
        bucket_width.max(1) as f64,
        repeats.iter().map(|r| r.length_chars as f64),
    )
}

#[derive(Serialize)]
struct RepeatRecord<'a> {
    substring: std::borrow::Cow<'a, str>,
    length_chars: usize,
    n_occurrences: usize,
    doc_ids: Vec<&'a str>,
}

pub fn write_repeats_jsonl<W: Write>(
    repeats: &[Repeat],
    corpus: &Corpus,
    mut out: W,
) -> Result<()> {
    for r in repeats {
        let rec = RepeatRecord {
            substring: String::from_utf8_lossy(&r.substring),
            length_chars: r.length_chars,
            n_occurrences: r.n_occurrences(),
            doc_ids: r
                .doc_set
                .iter()
                .map(|&d| corpus.documents()[d].id.as_str())
                .collect(),
        };
        let line = serde_json::to_string(&rec).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}
