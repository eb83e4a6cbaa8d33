//! Labeled test collections made of two decoding strategies applied to one
//! Markov model: a restricted-support strategy plays the machine and
//! ancestral sampling plays the human.

use crate::corpus::{Corpus, Document, Label};
use crate::error::Result;

use super::toy::toy_language_text;
use super::{
    fit_markov, generate_corpus, sample_prompts, tokenize, DecodingStrategy, GenerationConfig,
    MarkovModel,
};

#[derive(Debug, Clone)]
pub struct MixtureConfig {
    pub seed: u64,
    pub vocab_size: usize,
    pub training_tokens: usize,
    pub order: usize,
    pub doc_len_tokens: usize,
    pub n_machine: usize,
    pub n_human: usize,
    pub machine_strategy: DecodingStrategy,
    pub human_strategy: DecodingStrategy,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            seed: 0,
            vocab_size: 2000,
            training_tokens: 1_000_000,
            order: 1,
            doc_len_tokens: 60,
            n_machine: 2000,
            n_human: 2000,
            machine_strategy: DecodingStrategy::TopK { k: 10 },
            human_strategy: DecodingStrategy::Ancestral,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mixture {
    pub model: MarkovModel,
    /// Machine-labeled, ids `m000000`...
    pub machine: Corpus,
    /// Human-labeled, ids `h000000`...
    pub human: Corpus,
}

impl Mixture {
    /// Human documents followed by machine documents.
    pub fn combined(&self) -> Result<Corpus> {
        self.human.merged(&self.machine, "synthetic mixture")
    }
}

/// Fits a model on toy-language text derived from `cfg.seed` and generates
/// both halves of the mixture. The human half uses a different generation
/// seed and different prompts.
pub fn build_mixture(cfg: &MixtureConfig) -> Result<Mixture> {
    let text = toy_language_text(cfg.seed, cfg.vocab_size, cfg.training_tokens);
    let tokens = tokenize(&text);
    let model = fit_markov(&tokens, cfg.order, 0.0)?;
    let ids = model.encode(&tokens);
    let prompt_len = cfg.order.max(1);

    let gen = |strategy: DecodingStrategy, n: usize, stream: u64, prefix: &str| {
        let seed = cfg
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(stream);
        let prompts = sample_prompts(&ids, n.max(1), prompt_len, seed);
        generate_corpus(
            &model,
            &prompts,
            &GenerationConfig {
                strategy,
                n_docs: n,
                doc_len_tokens: cfg.doc_len_tokens,
                seed,
                id_prefix: prefix.into(),
            },
        )
    };
    let machine = gen(cfg.machine_strategy, cfg.n_machine, 1, "m")?;
    let human_docs = gen(cfg.human_strategy, cfg.n_human, 2, "h")?
        .into_documents()
        .into_iter()
        .map(|d| Document {
            gold_label: Some(Label::Human),
            ..d
        })
        .collect();
    let human = Corpus::new(
        human_docs,
        format!("synth:{} (human proxy)", cfg.human_strategy),
    )?;
    Ok(Mixture {
        model,
        machine,
        human,
    })
}
