//! Shared fixtures for the benchmarks.

use repdetect_core::synth::mixture::{build_mixture, Mixture, MixtureConfig};
use repdetect_core::synth::toy::toy_language_text;
use repdetect_core::{Corpus, Document};

/// Toy-language text cut into documents of `doc_chars` bytes, about
/// `total_bytes` in all.
pub fn text_corpus(total_bytes: usize, doc_chars: usize) -> Corpus {
    let text = toy_language_text(3, 2000, total_bytes / 5 + 1);
    let docs = text
        .as_bytes()
        .chunks(doc_chars)
        .take(total_bytes.div_ceil(doc_chars))
        .enumerate()
        .map(|(i, c)| Document::new(format!("b{i:06}"), c.to_vec()))
        .collect();
    Corpus::new(docs, "bench").expect("non-empty corpus")
}

/// A scaled-down labeled mixture of topk and ancestral documents.
pub fn small_mixture(n_each: usize) -> Mixture {
    build_mixture(&MixtureConfig {
        seed: 1,
        n_machine: n_each,
        n_human: n_each,
        ..Default::default()
    })
    .expect("mixture")
}
