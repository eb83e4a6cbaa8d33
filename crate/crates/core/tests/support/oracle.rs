//! Slow reference implementations used to check the indexed algorithms.
//! Nothing here depends on the crate under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

/// Documents joined with separator 1 and terminated by 0, bytes shifted by 2.
pub fn encode(docs: &[Vec<u8>]) -> Vec<u16> {
    let mut t = Vec::new();
    for (i, d) in docs.iter().enumerate() {
        if i > 0 {
            t.push(1);
        }
        t.extend(d.iter().map(|&b| b as u16 + 2));
    }
    t.push(0);
    t
}

pub fn naive_sa(text: &[u16]) -> Vec<u32> {
    let mut sa: Vec<u32> = (0..text.len() as u32).collect();
    sa.sort_by(|&a, &b| text[a as usize..].cmp(&text[b as usize..]));
    sa
}

/// `lcp[i]` is the longest common prefix of suffixes `sa[i-1]` and `sa[i]`;
/// `lcp[0] = 0`.
pub fn naive_lcp(text: &[u16], sa: &[u32]) -> Vec<u32> {
    let mut lcp = vec![0u32; sa.len()];
    for i in 1..sa.len() {
        let a = &text[sa[i - 1] as usize..];
        let b = &text[sa[i] as usize..];
        lcp[i] = a.iter().zip(b).take_while(|(x, y)| x == y).count() as u32;
    }
    lcp
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleRepeat {
    pub substring: Vec<u8>,
    /// (document, byte offset), sorted.
    pub occurrences: Vec<(usize, usize)>,
}

pub fn char_count(bytes: &[u8]) -> usize {
    bytes.iter().filter(|&&b| b & 0xC0 != 0x80).count()
}

type Level = BTreeMap<Vec<u8>, Vec<(usize, usize)>>;

fn repeated_at(docs: &[Vec<u8>], len: usize, starts: &[(usize, usize)]) -> Level {
    let mut m: Level = BTreeMap::new();
    for &(d, o) in starts {
        if o + len <= docs[d].len() {
            m.entry(docs[d][o..o + len].to_vec())
                .or_default()
                .push((d, o));
        }
    }
    m.retain(|_, occ| occ.len() >= 2);
    m
}

/// Every substring occurring at least twice (overlaps allowed) that is not a
/// prefix or suffix of a longer substring occurring at least twice, then
/// filtered by `min_occ` and a character-length floor. Sorted by substring.
pub fn brute_supermaximal(docs: &[Vec<u8>], min_len: usize, min_occ: usize) -> Vec<OracleRepeat> {
    let all: Vec<(usize, usize)> = docs
        .iter()
        .enumerate()
        .flat_map(|(d, t)| (0..t.len()).map(move |o| (d, o)))
        .collect();
    let mut out = Vec::new();
    let mut level = repeated_at(docs, 1, &all);
    let mut len = 1;
    while !level.is_empty() {
        let starts: Vec<(usize, usize)> = level.values().flatten().copied().collect();
        let next = repeated_at(docs, len + 1, &starts);
        // a repeated (len+1)-string has repeated len-prefix, so its start set
        // above covers every candidate; suffixes are checked directly
        let mut covered: HashSet<&[u8]> = HashSet::new();
        for s in next.keys() {
            covered.insert(&s[..len]);
            covered.insert(&s[1..]);
        }
        for (s, occ) in &level {
            if !covered.contains(s.as_slice()) && occ.len() >= min_occ && char_count(s) >= min_len {
                let mut occurrences = occ.clone();
                occurrences.sort_unstable();
                out.push(OracleRepeat {
                    substring: s.clone(),
                    occurrences,
                });
            }
        }
        level = next;
        len += 1;
    }
    out.sort();
    out
}

/// Handcrafted corpora covering runs, shared separators, nesting and
/// multi-byte characters.
pub fn handcrafted_corpora() -> Vec<Vec<Vec<u8>>> {
    let s = |v: &[&str]| v.iter().map(|x| x.as_bytes().to_vec()).collect::<Vec<_>>();
    vec![
        s(&["banana"]),
        s(&["aaaa"]),
        s(&["abcXabc", "abcYabc"]),
        s(&["xa", "ya", "za"]),
        s(&["abc", "abc"]),
        s(&["ab", "ab", "ab"]),
        s(&["a"]),
        s(&["mississippi", "missouri", "mississauga"]),
        s(&["abcdabcdabcd", "bcda"]),
        s(&["the cat sat on the mat", "the cat ate the rat", "a cat sat"]),
        s(&["ééé", "éé", "é"]),
        s(&["日本語日本語", "本語"]),
        s(&[&"ab".repeat(60), &"ba".repeat(40)]),
        s(&[&"a".repeat(300)]),
        s(&["xyz", "uvw", "rst"]),
        s(&["aXbXcXd", "eXf"]),
        s(&[
            "repeated phrase here",
            "another repeated phrase here",
            "repeated phrase",
        ]),
        vec![vec![0u8, 1, 0, 1, 0], vec![255, 0, 1], vec![1, 0]],
        vec![vec![0xC3, 0xA9, 0xA9, 0xC3], vec![0xA9, 0xC3, 0xA9]],
        s(&["abab", "baba", "abba", "baab"]),
    ]
}

/// Central finite-difference gradient of `f` at `x`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `||a - b|| / max(||a|| + ||b||, 1e-12)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / (norm(a) + norm(b)).max(1e-12)
}
