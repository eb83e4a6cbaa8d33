//! Corpus-level detection of machine-generated documents.
//!
//! The pipeline mines super-maximal repeats from an unannotated collection
//! with a generalized suffix array, uses the documents containing a random
//! sample of them as pseudo-positive examples, trains a small ensemble of
//! character n-gram classifiers, and ranks every document by the number of
//! classifiers that vote "machine".

pub mod classifier;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod hist;
pub mod index;
pub mod metrics;
pub mod pseudo_label;
pub mod repeats;
pub mod seed;
pub mod synth;
pub mod text;

pub use classifier::{
    ClassifierBackend, ClassifierConfig, HashedNgramBackend, TrainMode, TrainedClassifier,
};
pub use corpus::{Corpus, CorpusFormat, Document, Label, SplitConfig};
pub use ensemble::{run_detection, Detection, EnsembleConfig, RankedEntry, RankedList};
pub use error::{Error, Result};
pub use hist::Histogram;
pub use index::{build_index, CorpusIndex, LcpInterval};
pub use metrics::{EvalReport, GoldLabels};
pub use pseudo_label::{DetectionRound, Mode, RoundConfig};
pub use repeats::{mine_supermaximal, MinerConfig, Repeat};
pub use synth::{fit_markov, generate_corpus, DecodingStrategy, GenerationConfig, MarkovModel};
