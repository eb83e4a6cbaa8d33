//! Procedural training text: a pseudo-word language with Zipfian word
//! frequencies and a short Zipfian successor list per word. Used in place of
//! a natural-language book when no such text is available.

use std::collections::HashSet;

use rand::Rng;

use crate::seed::{rng_for, Stream};

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "br",
    "st", "tr", "ch", "sh",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "l", "t"];

const SUCCESSORS: usize = 200;

fn pseudo_word<R: Rng + ?Sized>(rng: &mut R) -> String {
    let syllables = rng.random_range(1..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
        w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
        w.push_str(CODAS[rng.random_range(0..CODAS.len())]);
    }
    w
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn draw<R: Rng + ?Sized>(cum: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cum[cum.len() - 1];
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

/// Whitespace-separated text of `n_tokens` words over a vocabulary of
/// `vocab_size` pseudo-words. Sentences end with a "." token.
pub fn toy_language_text(seed: u64, vocab_size: usize, n_tokens: usize) -> String {
    let vocab_size = vocab_size.max(2);
    let mut rng = rng_for(seed, Stream::Generation, u64::MAX);

    let mut seen = HashSet::new();
    let mut vocab = Vec::with_capacity(vocab_size);
    while vocab.len() < vocab_size {
        let w = pseudo_word(&mut rng);
        if seen.insert(w.clone()) {
            vocab.push(w);
        }
    }

    let unigram = cumulative((0..vocab_size).map(|r| 1.0 / (r + 1) as f64));
    let succ_cum = cumulative((0..SUCCESSORS).map(|j| 1.0 / ((j + 1) as f64).powf(1.0)));
    let successors: Vec<Vec<usize>> = (0..vocab_size)
        .map(|_| (0..SUCCESSORS).map(|_| draw(&unigram, &mut rng)).collect())
        .collect();

    let mut out = String::new();
    let mut cur = draw(&unigram, &mut rng);
    let mut sentence = 0;
    for i in 0..n_tokens {
        if i > 0 {
            out.push(' ');
        }
        if sentence >= 8 && rng.random::<f64>() < 0.15 {
            out.push('.');
            sentence = 0;
            cur = draw(&unigram, &mut rng);
            continue;
        }
        out.push_str(&vocab[cur]);
        sentence += 1;
        cur = successors[cur][draw(&succ_cum, &mut rng)];
    }
    out
}
