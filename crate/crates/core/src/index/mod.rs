//! Generalized suffix array over a document collection.
//!
//! Documents are concatenated as `doc0 SEP doc1 SEP ... docN-1 TERMINAL`
//! with bytes remapped to `b + 2`, `SEP = 1` and `TERMINAL = 0`.
//!
//! Besides the plain LCP array the index keeps a document-bounded copy in
//! which every value is capped at the distance to the next separator. Since
//! all separators share one symbol, the plain LCP of two suffixes can run
//! through a separator; the bounded array is what a collection with a unique
//! sentinel per document would produce, and lcp-interval traversal uses it.

mod cache;
mod lcp;
mod sais;

pub use cache::{content_hash, load_cache, save_cache, CACHE_MAGIC, CACHE_VERSION};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const TERMINAL: u16 = 0;
pub const SEP: u16 = 1;
const ALPHABET: usize = 258;

/// A maximal run `[lo, hi]` (inclusive) of suffix-array slots whose suffixes
/// share a prefix of exactly `depth` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LcpInterval {
    pub depth: usize,
    pub lo: usize,
    pub hi: usize,
}

impl LcpInterval {
    pub fn n_suffixes(&self) -> usize {
        self.hi - self.lo + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusIndex {
    text: Vec<u16>,
    boundaries: Vec<usize>,
    sa: Vec<u32>,
    lcp: Vec<u32>,
    doc_lcp: Vec<u32>,
}

pub(crate) fn encode(corpus: &Corpus) -> (Vec<u16>, Vec<usize>) {
    let total: usize = corpus.iter().map(|d| d.text.len() + 1).sum();
    let mut text = Vec::with_capacity(total);
    let mut boundaries = Vec::with_capacity(corpus.len());
    for (i, doc) in corpus.iter().enumerate() {
        if i > 0 {
            text.push(SEP);
        }
        boundaries.push(text.len());
        text.extend(doc.text.iter().map(|&b| b as u16 + 2));
    }
    text.push(TERMINAL);
    (text, boundaries)
}

pub fn build_index(corpus: &Corpus) -> Result<CorpusIndex> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let (text, boundaries) = encode(corpus);
    if text.len() >= u32::MAX as usize {
        return Err(Error::Corpus(format!(
            "concatenated corpus of {} symbols exceeds the 32-bit index limit",
            text.len()
        )));
    }
    let sa = sais::suffix_array(&text, ALPHABET);
    let lcp = lcp::kasai(&text, &sa);
    Ok(CorpusIndex::from_parts(text, boundaries, sa, lcp))
}

impl CorpusIndex {
    fn from_parts(text: Vec<u16>, boundaries: Vec<usize>, sa: Vec<u32>, lcp: Vec<u32>) -> Self {
        let doc_lcp = bounded_lcp(&text, &sa, &lcp);
        CorpusIndex {
            text,
            boundaries,
            sa,
            lcp,
            doc_lcp,
        }
    }

    pub fn text(&self) -> &[u16] {
        &self.text
    }

    pub fn sa(&self) -> &[u32] {
        &self.sa
    }

    pub fn lcp(&self) -> &[u32] {
        &self.lcp
    }

    /// LCP values capped at document ends.
    pub fn doc_lcp(&self) -> &[u32] {
        &self.doc_lcp
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.boundaries.len()
    }

    /// End (exclusive) of the span of document `doc`.
    pub fn doc_end(&self, doc: usize) -> usize {
        match self.boundaries.get(doc + 1) {
            Some(&next) => next - 1,
            None => self.text.len() - 1,
        }
    }

    /// Document whose half-open span contains `pos`; `None` on separators
    /// and the terminal.
    pub fn doc_of(&self, pos: usize) -> Option<usize> {
        if pos >= self.text.len() || self.text[pos] <= SEP {
            return None;
        }
        let d = self.boundaries.partition_point(|&b| b <= pos) - 1;
        Some(d)
    }

    /// Original bytes of `[start, start + len)`; `None` if the range touches a
    /// separator or the terminal.
    pub fn bytes(&self, start: usize, len: usize) -> Option<Vec<u8>> {
        self.text
            .get(start..start + len)?
            .iter()
            .map(|&c| (c > SEP).then(|| (c - 2) as u8))
            .collect()
    }

    pub fn lcp_intervals(&self, min_depth: usize) -> LcpIntervals<'_> {
        LcpIntervals {
            lcp: &self.doc_lcp,
            min_depth: min_depth.max(1),
            i: 1,
            stack: vec![(0, 0)],
            pending: Vec::new(),
        }
    }
}

fn bounded_lcp(text: &[u16], sa: &[u32], lcp: &[u32]) -> Vec<u32> {
    let n = text.len();
    // dist[p]: symbols from p up to (not including) the next SEP/TERMINAL.
    let mut dist = vec![0u32; n];
    let mut run = 0u32;
    for p in (0..n).rev() {
        run = if text[p] <= SEP { 0 } else { run + 1 };
        dist[p] = run;
    }
    let mut out = vec![0u32; n];
    for i in 1..n {
        let a = dist[sa[i - 1] as usize];
        let b = dist[sa[i] as usize];
        out[i] = lcp[i].min(a).min(b);
    }
    out
}

/// Bottom-up enumeration of lcp-intervals over the document-bounded LCP
/// array. Each interval is produced exactly once, children before parents.
pub struct LcpIntervals<'a> {
    lcp: &'a [u32],
    min_depth: usize,
    i: usize,
    stack: Vec<(usize, usize)>,
    pending: Vec<LcpInterval>,
}

impl Iterator for LcpIntervals<'_> {
    type Item = LcpInterval;

    fn next(&mut self) -> Option<LcpInterval> {
        loop {
            if let Some(iv) = self.pending.pop() {
                return Some(iv);
            }
            let n = self.lcp.len();
            if self.i > n {
                return None;
            }
            let i = self.i;
            self.i += 1;
            let cur = if i < n { self.lcp[i] as usize } else { 0 };
            let mut lb = i - 1;
            let mut popped = Vec::new();
            while let Some(&(depth, start)) = self.stack.last() {
                if cur >= depth {
                    break;
                }
                self.stack.pop();
                if depth >= self.min_depth {
                    popped.push(LcpInterval {
                        depth,
                        lo: start,
                        hi: i - 1,
                    });
                }
                lb = start;
            }
            if self.stack.last().is_none_or(|&(d, _)| cur > d) {
                self.stack.push((cur, lb));
            }
            popped.reverse();
            self.pending = popped;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn corpus(texts: &[&str]) -> Corpus {
        let docs = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document::new(format!("d{i}"), *t))
            .collect();
        Corpus::new(docs, "test").unwrap()
    }

    #[test]
    fn banana_arrays() {
        let idx = build_index(&corpus(&["banana"])).unwrap();
        assert_eq!(idx.sa(), &[6, 5, 3, 1, 0, 4, 2]);
        assert_eq!(idx.lcp(), &[0, 0, 1, 3, 0, 0, 2]);
    }

    #[test]
    fn banana_intervals() {
        let idx = build_index(&corpus(&["banana"])).unwrap();
        let ivs: Vec<_> = idx.lcp_intervals(1).collect();
        // "a" [1,3], "ana" [2,3], "na" [5,6]
        assert!(ivs.contains(&LcpInterval {
            depth: 3,
            lo: 2,
            hi: 3
        }));
        assert!(ivs.contains(&LcpInterval {
            depth: 1,
            lo: 1,
            hi: 3
        }));
        assert!(ivs.contains(&LcpInterval {
            depth: 2,
            lo: 5,
            hi: 6
        }));
        assert_eq!(ivs.len(), 3);
        let ana = ivs.iter().find(|iv| iv.depth == 3).unwrap();
        let mut pos: Vec<_> = (ana.lo..=ana.hi).map(|i| idx.sa()[i]).collect();
        pos.sort();
        assert_eq!(pos, [1, 3]);
    }

    #[test]
    fn run_of_a() {
        let idx = build_index(&corpus(&["aaaa"])).unwrap();
        let mut depths: Vec<_> = idx.lcp_intervals(1).map(|iv| iv.depth).collect();
        depths.sort();
        assert_eq!(depths, [1, 2, 3]);
    }

    #[test]
    fn min_depth_above_longest_repeat() {
        let idx = build_index(&corpus(&["banana"])).unwrap();
        assert_eq!(idx.lcp_intervals(4).count(), 0);
    }

    #[test]
    fn separators_bound_the_lcp() {
        let idx = build_index(&corpus(&["ab", "ab"])).unwrap();
        assert_eq!(idx.text(), &[99, 100, SEP, 99, 100, TERMINAL]);
        for iv in idx.lcp_intervals(1) {
            for i in iv.lo..=iv.hi {
                let p = idx.sa()[i] as usize;
                let d = idx.doc_of(p).unwrap();
                assert!(p + iv.depth <= idx.doc_end(d));
            }
        }
        // "xa", "ya", "za": plain LCP runs across SEP, bounded LCP does not.
        let idx = build_index(&corpus(&["xa", "ya", "za"])).unwrap();
        assert!(idx.lcp().contains(&2));
        assert!(idx.doc_lcp().iter().all(|&l| l <= 1));
    }

    #[test]
    fn doc_of_maps_spans() {
        let idx = build_index(&corpus(&["abc", "de"])).unwrap();
        assert_eq!(idx.boundaries(), &[0, 4]);
        assert_eq!(idx.doc_of(0), Some(0));
        assert_eq!(idx.doc_of(2), Some(0));
        assert_eq!(idx.doc_of(3), None);
        assert_eq!(idx.doc_of(4), Some(1));
        assert_eq!(idx.doc_of(5), Some(1));
        assert_eq!(idx.doc_of(6), None);
        assert_eq!(idx.doc_end(0), 3);
        assert_eq!(idx.doc_end(1), 6);
        assert_eq!(idx.bytes(4, 2).unwrap(), b"de");
        assert!(idx.bytes(2, 2).is_none());
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(
            build_index(&Corpus::default()),
            Err(Error::EmptyCorpus)
        ));
    }
}
