//! Bag-of-ngrams sentiment classification.
//!
//! The pipeline is: read labeled TSV corpora ([`corpus`]), normalize and
//! tokenize text ([`textproc`]), build a capped uni/bigram vocabulary
//! ([`vocab`]), and train an ensemble of small MLPs ([`nncore`], [`optim`],
//! [`training`]). Trained ensembles are saved, loaded and queried through
//! [`inference`]; [`metrics`] and [`probe`] evaluate them.

pub mod corpus;
pub mod error;
pub mod inference;
pub mod metrics;
pub mod nncore;
pub mod optim;
pub mod probe;
pub mod rng;
pub mod synthetic;
pub mod textproc;
pub mod training;
pub mod vocab;

pub use corpus::{filter_binary, load_examples, shuffle_split, Example, ExampleKind, SplitSpec};
pub use error::{Error, Result};
pub use inference::{load_model, predict, save_model, Ensemble, Prediction};
pub use metrics::{accuracy, broken_rate, f1_report, MetricsReport, MinimalPair};
pub use nncore::{backward, cross_entropy, forward, init_params, softmax, ForwardCache, Gradients, ModelDims, ModelParams};
pub use optim::{adam_step, AdamHyper, AdamState};
pub use probe::{coverage_report, oov_substitution_probe, ProbeResult};
pub use textproc::{extract_ngrams, normalize, tokenize, TokenSeq, TokenizerMode};
pub use training::{train_ensemble, train_model, EpochRecord, TrainConfig, TrainedModel};
pub use vocab::{build_vocabulary, featurize, FeatureBag, NgramVocabulary};

/// Binary sentiment polarity. Class index 0 is negative, 1 is positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sentiment {
    Negative,
    Positive,
}

impl Sentiment {
    pub fn class_index(self) -> usize {
        match self {
            Sentiment::Negative => 0,
            Sentiment::Positive => 1,
        }
    }

    pub fn from_class_index(class: usize) -> Option<Self> {
        match class {
            0 => Some(Sentiment::Negative),
            1 => Some(Sentiment::Positive),
            _ => None,
        }
    }

    /// The `-1` / `+1` integer used in the TSV formats.
    pub fn as_i8(self) -> i8 {
        match self {
            Sentiment::Negative => -1,
            Sentiment::Positive => 1,
        }
    }

    pub fn from_i8(label: i8) -> Option<Self> {
        match label {
            -1 => Some(Sentiment::Negative),
            1 => Some(Sentiment::Positive),
            _ => None,
        }
    }

    /// Argmax over a two-class distribution; ties go to positive.
    pub fn from_distribution<F: PartialOrd>(p: &[F; 2]) -> Self {
        if p[1] >= p[0] {
            Sentiment::Positive
        } else {
            Sentiment::Negative
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sentiment::Negative => Sentiment::Positive,
            Sentiment::Positive => Sentiment::Negative,
        }
    }
}

impl std::fmt::Display for Sentiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}
