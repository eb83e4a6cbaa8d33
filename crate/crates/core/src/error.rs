use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid corpus: {0}")]
    Corpus(String),

    #[error("human holdout fraction is {0} but the corpus has no human-labeled documents")]
    NoHumanDocuments(f64),

    #[error("no repeats above thresholds")]
    NoRepeats,

    #[error("degenerate round {round}: no positive documents")]
    EmptyPositives { round: usize },

    #[error("round {round}: negative pool has {available} documents but {needed} are required")]
    NegativePoolTooSmall {
        round: usize,
        needed: usize,
        available: usize,
    },

    #[error("all {0} detection rounds were degenerate")]
    AllRoundsDegenerate(usize),

    #[error("cannot train on an empty class")]
    EmptyClass,

    #[error("not enough gold human documents: need {needed}, have {available}")]
    InsufficientHuman { needed: usize, available: usize },

    #[error("missing gold label for document {0:?}")]
    MissingLabel(String),

    #[error("distribution is not sorted in descending order at index {0}")]
    UnsortedDistribution(usize),

    #[error("bad binary format: {0}")]
    Format(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
