//! Construction of one pseudo-labeled training round.

use std::io::Write;
use std::str::FromStr;

use rand::seq::index;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::repeats::{docs_containing, Repeat};
use crate::seed::{rng_for, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Negatives are drawn from the working corpus itself.
    Unsupervised,
    /// Negatives are drawn from a separate collection of human text.
    SemiSupervised,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unsupervised" => Ok(Mode::Unsupervised),
            "semi" | "semi_supervised" | "semi-supervised" => Ok(Mode::SemiSupervised),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundConfig {
    pub repeats_per_round: usize,
    pub mode: Mode,
    pub seed: u64,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            repeats_per_round: 20,
            mode: Mode::SemiSupervised,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeSource {
    Working,
    Holdout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionRound {
    pub round_id: usize,
    /// Sorted repeat indices.
    pub sampled_repeats: Vec<usize>,
    /// Sorted ordinals into the working corpus.
    pub positives: Vec<usize>,
    /// Sorted ordinals into the corpus named by `negative_source`.
    pub negatives: Vec<usize>,
    pub negative_source: NegativeSource,
}

/// Samples repeats for round `k`, takes every document containing one of them
/// as a positive, and draws the same number of negatives.
pub fn build_round(
    repeats: &[Repeat],
    corpus: &Corpus,
    holdout: &Corpus,
    cfg: &RoundConfig,
    k: usize,
) -> Result<DetectionRound> {
    if cfg.repeats_per_round == 0 {
        return Err(Error::Config("repeats_per_round must be at least 1".into()));
    }
    if repeats.is_empty() {
        return Err(Error::NoRepeats);
    }
    let n_sample = cfg.repeats_per_round.min(repeats.len());
    if n_sample < cfg.repeats_per_round {
        log::warn!(
            "round {k}: only {} repeats available, sampling all of them instead of {}",
            repeats.len(),
            cfg.repeats_per_round
        );
    }
    let mut rng = rng_for(cfg.seed, Stream::RoundRepeats, k as u64);
    let mut sampled = index::sample(&mut rng, repeats.len(), n_sample).into_vec();
    sampled.sort_unstable();

    let positives: Vec<usize> = docs_containing(repeats, &sampled).into_iter().collect();
    if positives.is_empty() {
        return Err(Error::EmptyPositives { round: k });
    }

    let (pool, source): (Vec<usize>, _) = match cfg.mode {
        Mode::Unsupervised => {
            let mut is_pos = vec![false; corpus.len()];
            for &p in &positives {
                is_pos[p] = true;
            }
            let pool = (0..corpus.len()).filter(|&d| !is_pos[d]).collect();
            (pool, NegativeSource::Working)
        }
        Mode::SemiSupervised => ((0..holdout.len()).collect(), NegativeSource::Holdout),
    };
    if pool.len() < positives.len() {
        return Err(Error::NegativePoolTooSmall {
            round: k,
            needed: positives.len(),
            available: pool.len(),
        });
    }
    let mut rng = rng_for(cfg.seed, Stream::RoundNegatives, k as u64);
    let mut negatives: Vec<usize> = index::sample(&mut rng, pool.len(), positives.len())
        .into_iter()
        .map(|i| pool[i])
        .collect();
    negatives.sort_unstable();

    Ok(DetectionRound {
        round_id: k,
        sampled_repeats: sampled,
        positives,
        negatives,
        negative_source: source,
    })
}

#[derive(Serialize)]
struct AuditRecord<'a> {
    round: usize,
    sampled_repeats: &'a [usize],
    negative_source: NegativeSource,
    positives: Vec<&'a str>,
    negatives: Vec<&'a str>,
}

/// One JSON line per round with the sampled repeats and the ids of the
/// documents used as positives and negatives.
pub fn write_audit_log<W: Write>(
    rounds: &[DetectionRound],
    corpus: &Corpus,
    holdout: &Corpus,
    mut out: W,
) -> Result<()> {
    for r in rounds {
        let neg_corpus = match r.negative_source {
            NegativeSource::Working => corpus,
            NegativeSource::Holdout => holdout,
        };
        let rec = AuditRecord {
            round: r.round_id,
            sampled_repeats: &r.sampled_repeats,
            negative_source: r.negative_source,
            positives: r
                .positives
                .iter()
                .map(|&d| corpus.documents()[d].id.as_str())
                .collect(),
            negatives: r
                .negatives
                .iter()
                .map(|&d| neg_corpus.documents()[d].id.as_str())
                .collect(),
        };
        let line = serde_json::to_string(&rec).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<audit log>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn corpus(n: usize, prefix: &str) -> Corpus {
        let docs = (0..n)
            .map(|i| Document::new(format!("{prefix}{i}"), "text"))
            .collect();
        Corpus::new(docs, "t").unwrap()
    }

    fn repeat(docs: &[usize]) -> Repeat {
        Repeat {
            substring: b"some repeated phrase".to_vec(),
            length_chars: 20,
            occurrences: vec![],
            doc_set: docs.to_vec(),
        }
    }

    fn cfg(mode: Mode) -> RoundConfig {
        RoundConfig {
            repeats_per_round: 20,
            mode,
            seed: 11,
        }
    }

    #[test]
    fn twenty_repeats_in_distinct_docs_give_sixty_positives() {
        let repeats: Vec<_> = (0..20)
            .map(|r| repeat(&[3 * r, 3 * r + 1, 3 * r + 2]))
            .collect();
        let c = corpus(200, "d");
        let round = build_round(
            &repeats,
            &c,
            &Corpus::default(),
            &cfg(Mode::Unsupervised),
            0,
        )
        .unwrap();
        assert_eq!(round.positives.len(), 60);
        assert_eq!(round.negatives.len(), 60);
        assert!(round.negatives.iter().all(|n| !round.positives.contains(n)));
        assert_eq!(round.negative_source, NegativeSource::Working);
    }

    #[test]
    fn shared_document_counted_once() {
        let repeats = vec![repeat(&[1, 2]), repeat(&[2, 3])];
        let c = corpus(10, "d");
        let round = build_round(
            &repeats,
            &c,
            &Corpus::default(),
            &cfg(Mode::Unsupervised),
            0,
        )
        .unwrap();
        assert_eq!(round.sampled_repeats, [0, 1]);
        assert_eq!(round.positives, [1, 2, 3]);
    }

    #[test]
    fn same_seed_and_round_is_reproducible() {
        let repeats: Vec<_> = (0..100).map(|r| repeat(&[r, r + 1])).collect();
        let c = corpus(300, "d");
        let h = corpus(300, "h");
        let a = build_round(&repeats, &c, &h, &cfg(Mode::SemiSupervised), 4).unwrap();
        let b = build_round(&repeats, &c, &h, &cfg(Mode::SemiSupervised), 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.negative_source, NegativeSource::Holdout);
    }

    #[test]
    fn rounds_draw_different_samples() {
        let repeats: Vec<_> = (0..100).map(|r| repeat(&[r])).collect();
        let c = corpus(300, "d");
        let first = build_round(
            &repeats,
            &c,
            &Corpus::default(),
            &cfg(Mode::Unsupervised),
            0,
        )
        .unwrap()
        .sampled_repeats;
        let distinct = (1..100)
            .map(|k| {
                build_round(
                    &repeats,
                    &c,
                    &Corpus::default(),
                    &cfg(Mode::Unsupervised),
                    k,
                )
                .unwrap()
                .sampled_repeats
            })
            .filter(|s| *s != first)
            .count();
        assert!(distinct > 0);
    }

    #[test]
    fn few_repeats_are_all_sampled() {
        let repeats = vec![repeat(&[0]), repeat(&[1])];
        let round = build_round(
            &repeats,
            &corpus(10, "d"),
            &Corpus::default(),
            &cfg(Mode::Unsupervised),
            0,
        )
        .unwrap();
        assert_eq!(round.sampled_repeats, [0, 1]);
    }

    #[test]
    fn small_negative_pool_is_an_error() {
        let repeats = vec![repeat(&[0, 1, 2])];
        let err = build_round(
            &repeats,
            &corpus(10, "d"),
            &corpus(2, "h"),
            &cfg(Mode::SemiSupervised),
            0,
        );
        assert!(matches!(
            err,
            Err(Error::NegativePoolTooSmall {
                needed: 3,
                available: 2,
                ..
            })
        ));
    }

    #[test]
    fn empty_positives_is_degenerate() {
        let repeats = vec![repeat(&[])];
        let err = build_round(
            &repeats,
            &corpus(10, "d"),
            &Corpus::default(),
            &cfg(Mode::Unsupervised),
            2,
        );
        assert!(matches!(err, Err(Error::EmptyPositives { round: 2 })));
    }

    #[test]
    fn audit_log_names_documents() {
        let repeats = vec![repeat(&[0])];
        let c = corpus(3, "d");
        let h = corpus(3, "h");
        let round = build_round(&repeats, &c, &h, &cfg(Mode::SemiSupervised), 0).unwrap();
        let mut buf = Vec::new();
        write_audit_log(&[round], &c, &h, &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.starts_with("{\"round\":0,\"sampled_repeats\":[0],\"negative_source\":\"holdout\",\"positives\":[\"d0\"],\"negatives\":[\"h"));
    }
}
