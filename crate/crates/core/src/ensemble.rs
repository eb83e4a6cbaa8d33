//! Ensemble detection: K pseudo-labeled rounds, one classifier per round,
//! documents ranked by machine votes.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{
    featurize, train_features, ClassifierBackend, ClassifierConfig, HashedNgramBackend,
    TrainedClassifier,
};
use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::index::build_index;
use crate::pseudo_label::{build_round, DetectionRound, NegativeSource, RoundConfig};
use crate::repeats::{mine_supermaximal, MinerConfig, Repeat};
use crate::seed::{derive_seed, rng_for, Stream};

pub const TIE_POLICY: &str = "votes desc, mean_margin desc, doc_id asc";

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    /// Number of rounds (classifiers).
    pub k: usize,
    /// `round.seed` is ignored; round seeds derive from `master_seed`.
    pub round: RoundConfig,
    /// `classifier.seed` is ignored; per-round seeds derive from `master_seed`.
    pub classifier: ClassifierConfig,
    pub miner: MinerConfig,
    pub master_seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            k: 30,
            round: RoundConfig::default(),
            classifier: ClassifierConfig::default(),
            miner: MinerConfig::default(),
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub rank: usize,
    pub doc_id: String,
    pub votes: usize,
    pub mean_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gold_label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
    pub effective_k: usize,
    pub tie_policy: &'static str,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sorts by the tie policy and renumbers ranks from 1.
    pub fn from_unsorted(mut entries: Vec<RankedEntry>, effective_k: usize) -> Self {
        entries.sort_by(compare_entries);
        for (i, e) in entries.iter_mut().enumerate() {
            e.rank = i + 1;
        }
        RankedList {
            entries,
            effective_k,
            tie_policy: TIE_POLICY,
        }
    }
}

fn compare_entries(a: &RankedEntry, b: &RankedEntry) -> Ordering {
    b.votes
        .cmp(&a.votes)
        .then_with(|| b.mean_margin.total_cmp(&a.mean_margin))
        .then_with(|| a.doc_id.cmp(&b.doc_id))
}

#[derive(Debug, Clone)]
pub struct SkippedRound {
    pub round: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Detection {
    pub ranked: RankedList,
    pub repeats: Vec<Repeat>,
    pub rounds: Vec<DetectionRound>,
    pub skipped: Vec<SkippedRound>,
}

pub fn run_detection(corpus: &Corpus, holdout: &Corpus, cfg: &EnsembleConfig) -> Result<Detection> {
    let backend = HashedNgramBackend::new(cfg.classifier.clone());
    cfg.classifier.validate()?;
    run_detection_with(corpus, holdout, cfg, &backend)
}

/// Mines repeats, trains `cfg.k` classifiers in parallel and aggregates their
/// votes. The result does not depend on thread scheduling.
pub fn run_detection_with<B: ClassifierBackend>(
    corpus: &Corpus,
    holdout: &Corpus,
    cfg: &EnsembleConfig,
    backend: &B,
) -> Result<Detection> {
    if cfg.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    cfg.miner.validate()?;
    let index = build_index(corpus)?;
    let repeats = mine_supermaximal(&index, &cfg.miner);
    drop(index);
    if repeats.is_empty() {
        return Err(Error::NoRepeats);
    }
    run_rounds(corpus, holdout, repeats, cfg, backend)
}

/// Runs the rounds over an already mined repeat set.
pub fn run_rounds<B: ClassifierBackend>(
    corpus: &Corpus,
    holdout: &Corpus,
    repeats: Vec<Repeat>,
    cfg: &EnsembleConfig,
    backend: &B,
) -> Result<Detection> {
    if repeats.is_empty() {
        return Err(Error::NoRepeats);
    }
    let features: Vec<B::Features> = corpus
        .documents()
        .par_iter()
        .map(|d| backend.featurize(d))
        .collect();
    let holdout_features: Vec<B::Features> = holdout
        .documents()
        .par_iter()
        .map(|d| backend.featurize(d))
        .collect();

    let round_cfg = RoundConfig {
        seed: cfg.master_seed,
        ..cfg.round.clone()
    };

    let outcomes: Vec<Result<(DetectionRound, Vec<f64>)>> = (0..cfg.k)
        .into_par_iter()
        .map(|k| {
            let round = build_round(&repeats, corpus, holdout, &round_cfg, k)?;
            let pos: Vec<&B::Features> = round.positives.iter().map(|&d| &features[d]).collect();
            let neg_pool = match round.negative_source {
                NegativeSource::Working => &features,
                NegativeSource::Holdout => &holdout_features,
            };
            let neg: Vec<&B::Features> = round.negatives.iter().map(|&d| &neg_pool[d]).collect();
            let seed = derive_seed(cfg.master_seed, Stream::Classifier, k as u64);
            let model = backend.train(&pos, &neg, seed)?;
            let scores = features.iter().map(|x| backend.score(&model, x)).collect();
            Ok((round, scores))
        })
        .collect();

    let n = corpus.len();
    let mut votes = vec![0usize; n];
    let mut margin = vec![0.0f64; n];
    let mut rounds = Vec::new();
    let mut skipped = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((round, scores)) => {
                for (d, s) in scores.into_iter().enumerate() {
                    if s > 0.5 {
                        votes[d] += 1;
                    }
                    margin[d] += s - 0.5;
                }
                rounds.push(round);
            }
            Err(e @ (Error::EmptyPositives { .. } | Error::NegativePoolTooSmall { .. })) => {
                log::warn!("skipping round {k}: {e}");
                skipped.push(SkippedRound {
                    round: k,
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    let effective_k = rounds.len();
    if effective_k == 0 {
        return Err(Error::AllRoundsDegenerate(cfg.k));
    }

    let entries = corpus
        .iter()
        .enumerate()
        .map(|(d, doc)| RankedEntry {
            rank: 0,
            doc_id: doc.id.clone(),
            votes: votes[d],
            mean_margin: margin[d] / effective_k as f64,
            gold_label: doc.gold_label,
        })
        .collect();
    Ok(Detection {
        ranked: RankedList::from_unsorted(entries, effective_k),
        repeats,
        rounds,
        skipped,
    })
}

/// Trains one classifier with the `top_n` ranked documents as positives and
/// as many gold human documents as negatives, then reports its accuracy on
/// `test_set`.
pub fn full_classification(
    corpus: &Corpus,
    holdout_human: &Corpus,
    ranked: &RankedList,
    top_n: usize,
    clf_cfg: &ClassifierConfig,
    test_set: &Corpus,
) -> Result<(TrainedClassifier, f64)> {
    clf_cfg.validate()?;
    if top_n == 0 {
        return Err(Error::EmptyClass);
    }
    if top_n > ranked.len() {
        return Err(Error::Config(format!(
            "top_n ({top_n}) exceeds the ranking length ({})",
            ranked.len()
        )));
    }
    let humans: Vec<_> = holdout_human
        .iter()
        .filter(|d| d.gold_label != Some(Label::Machine))
        .collect();
    if humans.len() < top_n {
        return Err(Error::InsufficientHuman {
            needed: top_n,
            available: humans.len(),
        });
    }
    if test_set.is_empty() {
        return Err(Error::Config("held-out test set is empty".into()));
    }

    let by_id: HashMap<&str, usize> = corpus
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.as_str(), i))
        .collect();
    let pos_feats = ranked.entries[..top_n]
        .iter()
        .map(|e| {
            by_id
                .get(e.doc_id.as_str())
                .map(|&i| featurize(&corpus.documents()[i].text, clf_cfg))
                .ok_or_else(|| {
                    Error::Corpus(format!("ranked document {:?} not in corpus", e.doc_id))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = rng_for(clf_cfg.seed, Stream::FullClassifier, 0);
    let mut picks = index::sample(&mut rng, humans.len(), top_n).into_vec();
    picks.sort_unstable();
    let neg_feats: Vec<_> = picks
        .iter()
        .map(|&i| featurize(&humans[i].text, clf_cfg))
        .collect();

    let pos: Vec<_> = pos_feats.iter().collect();
    let neg: Vec<_> = neg_feats.iter().collect();
    let model = train_features(&pos, &neg, clf_cfg)?;

    let mut correct = 0usize;
    for doc in test_set {
        let gold = doc
            .gold_label
            .ok_or_else(|| Error::MissingLabel(doc.id.clone()))?;
        let predicted = if model.votes_machine(doc) {
            Label::Machine
        } else {
            Label::Human
        };
        if predicted == gold {
            correct += 1;
        }
    }
    Ok((model, correct as f64 / test_set.len() as f64))
}

pub fn write_ranking_csv<W: Write>(ranked: &RankedList, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["rank", "doc_id", "votes", "mean_margin", "gold_label"])
        .map_err(fmt)?;
    for e in &ranked.entries {
        w.write_record([
            e.rank.to_string(),
            e.doc_id.clone(),
            e.votes.to_string(),
            e.mean_margin.to_string(),
            e.gold_label.map(|l| l.to_string()).unwrap_or_default(),
        ])
        .map_err(fmt)?;
    }
    w.flush().map_err(|e| Error::io("<ranking csv>", e))
}

pub fn write_ranking_jsonl<W: Write>(ranked: &RankedList, mut out: W) -> Result<()> {
    for e in &ranked.entries {
        let line = serde_json::to_string(e).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<ranking jsonl>", e))?;
    }
    Ok(())
}

/// Reads a ranking written by [`write_ranking_jsonl`]. `effective_k` is not
/// stored per line and is reported as the maximum vote count seen.
pub fn read_ranking_jsonl<R: BufRead>(input: R) -> Result<RankedList> {
    let mut entries = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<ranking jsonl>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let e: RankedEntry = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("ranking line {}: {e}", i + 1)))?;
        entries.push(e);
    }
    let effective_k = entries.iter().map(|e| e.votes).max().unwrap_or(0);
    Ok(RankedList::from_unsorted(entries, effective_k))
}
