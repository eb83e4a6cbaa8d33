//! Seeded Markov-chain text generation with greedy, ancestral, top-k and
//! nucleus decoding. Stands in for a neural generator when building test
//! collections.

mod decoding;
pub mod mixture;
pub mod toy;

pub use decoding::{renormalize, sample_index, DecodingStrategy, NUCLEUS_EPS};

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use crate::corpus::{Corpus, Document, Label};
use crate::error::{Error, Result};
use crate::seed::{rng_for, Stream};

pub type TokenId = u32;

pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

#[derive(Debug, Clone)]
struct Successors {
    total: u64,
    /// (token, count) sorted by count descending, then token id ascending.
    ranked: Vec<(TokenId, u64)>,
}

impl Successors {
    fn from_counts(counts: HashMap<TokenId, u64>) -> Self {
        let mut ranked: Vec<_> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        Successors {
            total: ranked.iter().map(|&(_, c)| c).sum(),
            ranked,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MarkovModel {
    order: usize,
    smoothing: f64,
    vocab: Vec<String>,
    ids: HashMap<String, TokenId>,
    transitions: HashMap<Vec<TokenId>, Successors>,
    unigram: Successors,
}

pub fn fit_markov(tokens: &[&str], order: usize, smoothing: f64) -> Result<MarkovModel> {
    if tokens.is_empty() {
        return Err(Error::Config("empty training text".into()));
    }
    if tokens.len() <= order {
        return Err(Error::Config(format!(
            "training text has {} tokens, need more than the order {order}",
            tokens.len()
        )));
    }
    if !(smoothing >= 0.0 && smoothing.is_finite()) {
        return Err(Error::Config("smoothing must be non-negative".into()));
    }

    let mut vocab = Vec::new();
    let mut ids: HashMap<String, TokenId> = HashMap::new();
    let seq: Vec<TokenId> = tokens
        .iter()
        .map(|&t| {
            *ids.entry(t.to_string()).or_insert_with(|| {
                vocab.push(t.to_string());
                (vocab.len() - 1) as TokenId
            })
        })
        .collect();

    let mut uni: HashMap<TokenId, u64> = HashMap::new();
    for &t in &seq {
        *uni.entry(t).or_insert(0) += 1;
    }
    let mut counts: HashMap<Vec<TokenId>, HashMap<TokenId, u64>> = HashMap::new();
    for w in seq.windows(order + 1) {
        *counts
            .entry(w[..order].to_vec())
            .or_default()
            .entry(w[order])
            .or_insert(0) += 1;
    }
    let transitions = counts
        .into_iter()
        .map(|(ctx, c)| (ctx, Successors::from_counts(c)))
        .collect();

    Ok(MarkovModel {
        order,
        smoothing,
        vocab,
        ids,
        transitions,
        unigram: Successors::from_counts(uni),
    })
}

impl MarkovModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.vocab[id as usize]
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.ids.get(token).copied()
    }

    /// Maps tokens to ids, dropping out-of-vocabulary tokens.
    pub fn encode(&self, tokens: &[&str]) -> Vec<TokenId> {
        tokens.iter().filter_map(|t| self.id(t)).collect()
    }

    /// `P(. | context)` over its support, sorted by probability descending
    /// with ties broken by token id. Only the last `order` tokens of
    /// `context` are used; unseen contexts fall back to the unigram
    /// distribution. With smoothing every vocabulary token is in the support.
    pub fn conditional(&self, context: &[TokenId]) -> Vec<(TokenId, f64)> {
        let ctx = &context[context.len().saturating_sub(self.order)..];
        let succ = if ctx.len() == self.order {
            self.transitions.get(ctx).unwrap_or(&self.unigram)
        } else {
            &self.unigram
        };
        if self.smoothing == 0.0 {
            let total = succ.total as f64;
            return succ
                .ranked
                .iter()
                .map(|&(t, c)| (t, c as f64 / total))
                .collect();
        }
        let v = self.vocab.len();
        let denom = succ.total as f64 + self.smoothing * v as f64;
        let mut counts = vec![0u64; v];
        for &(t, c) in &succ.ranked {
            counts[t as usize] = c;
        }
        let mut dist: Vec<(TokenId, f64)> = counts
            .iter()
            .enumerate()
            .map(|(t, &c)| (t as TokenId, (c as f64 + self.smoothing) / denom))
            .collect();
        dist.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        dist
    }

    /// Samples `n_tokens` continuation tokens after `prompt`.
    pub fn generate<R: Rng + ?Sized>(
        &self,
        prompt: &[TokenId],
        n_tokens: usize,
        strategy: &DecodingStrategy,
        rng: &mut R,
    ) -> Result<Vec<TokenId>> {
        let mut context: Vec<TokenId> = prompt.to_vec();
        let mut out = Vec::with_capacity(n_tokens);
        for _ in 0..n_tokens {
            let dist = self.conditional(&context);
            let probs: Vec<f64> = dist.iter().map(|&(_, p)| p).collect();
            let renorm = renormalize(&probs, strategy)?;
            let tok = dist[sample_index(&renorm, rng)].0;
            out.push(tok);
            context.push(tok);
            if context.len() > self.order.max(1) * 4 {
                context.drain(..context.len() - self.order);
            }
        }
        Ok(out)
    }

    pub fn detokenize(&self, ids: &[TokenId]) -> String {
        ids.iter()
            .map(|&t| self.token(t))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct GenerationConfig {
    pub strategy: DecodingStrategy,
    pub n_docs: usize,
    pub doc_len_tokens: usize,
    pub seed: u64,
    /// Document ids are `{id_prefix}{index:06}`.
    pub id_prefix: String,
}

/// Generates `n_docs` continuations; document `i` continues prompt
/// `i % prompts.len()` with its own derived seed. Prompts are not included in
/// the output text.
pub fn generate_corpus(
    model: &MarkovModel,
    prompts: &[Vec<TokenId>],
    cfg: &GenerationConfig,
) -> Result<Corpus> {
    cfg.strategy.validate()?;
    if cfg.doc_len_tokens < 1 {
        return Err(Error::Config("doc_len_tokens must be at least 1".into()));
    }
    if cfg.n_docs == 0 {
        return Corpus::new(Vec::new(), format!("synth:{}", cfg.strategy));
    }
    if prompts.is_empty() {
        return Err(Error::Config("at least one prompt is required".into()));
    }
    let docs = (0..cfg.n_docs)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(cfg.seed, Stream::Generation, i as u64);
            let ids = model.generate(
                &prompts[i % prompts.len()],
                cfg.doc_len_tokens,
                &cfg.strategy,
                &mut rng,
            )?;
            Ok(
                Document::new(format!("{}{i:06}", cfg.id_prefix), model.detokenize(&ids))
                    .with_label(Label::Machine)
                    .with_source(cfg.strategy.name()),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Corpus::new(docs, format!("synth:{}", cfg.strategy))
}

/// Draws `n` prompts of `len` consecutive tokens from random offsets of the
/// training sequence.
pub fn sample_prompts(tokens: &[TokenId], n: usize, len: usize, seed: u64) -> Vec<Vec<TokenId>> {
    if tokens.is_empty() {
        return Vec::new();
    }
    let len = len.min(tokens.len());
    let mut rng = rng_for(seed, Stream::Prompts, 0);
    (0..n)
        .map(|_| {
            let start = rng.random_range(0..=tokens.len() - len);
            tokens[start..start + len].to_vec()
        })
        .collect()
}
