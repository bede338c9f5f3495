//! Generated corpora and hand-built models with known behaviour, used by the
//! test suites and benchmarks.

use crate::inference::Ensemble;
use crate::nncore::{ModelDims, ModelParams};
use crate::rng::SplitMix64;
use crate::textproc::{TokenSeq, TokenizerMode};
use crate::training::{Sample, TrainedModel};
use crate::vocab::{featurize, NgramCounts, NgramVocabulary};
use crate::Sentiment;

pub const KEYWORDS: [&str; 5] = ["superb", "wonderful", "delightful", "masterful", "riveting"];

/// Sentences of 4..=12 filler words; positive iff one of [`KEYWORDS`] was
/// inserted (probability 1/2).
pub fn keyword_corpus(n: usize, filler_vocab: usize, seed: u64) -> Vec<(String, Sentiment)> {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|_| {
            let len = 4 + rng.next_below(9) as usize;
            let mut words: Vec<String> = (0..len)
                .map(|_| format!("w{}", rng.next_below(filler_vocab as u64)))
                .collect();
            let positive = rng.next_below(2) == 1;
            if positive {
                let kw = KEYWORDS[rng.next_below(KEYWORDS.len() as u64) as usize];
                let at = rng.next_below(len as u64 + 1) as usize;
                words.insert(at, kw.to_string());
            }
            let label = if positive { Sentiment::Positive } else { Sentiment::Negative };
            (words.join(" "), label)
        })
        .collect()
}

/// `count` texts of distinct random filler words with labels drawn
/// independently of the text.
pub fn random_label_corpus(count: usize, seed: u64) -> Vec<(String, Sentiment)> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|i| {
            let len = 3 + rng.next_below(4) as usize;
            let words: Vec<String> = (0..len).map(|j| format!("r{i}x{j}y{}", rng.next_below(1000))).collect();
            let label = if rng.next_below(2) == 1 {
                Sentiment::Positive
            } else {
                Sentiment::Negative
            };
            (words.join(" "), label)
        })
        .collect()
}

pub fn pretokenize(corpus: &[(String, Sentiment)]) -> Vec<TokenSeq> {
    corpus
        .iter()
        .map(|(t, _)| TokenSeq::analyze(t, TokenizerMode::Pretokenized))
        .collect()
}

pub fn featurize_corpus(corpus: &[(String, Sentiment)], vocab: &NgramVocabulary) -> Vec<Sample> {
    corpus
        .iter()
        .map(|(t, label)| (featurize(&TokenSeq::analyze(t, TokenizerMode::Pretokenized), vocab), *label))
        .collect()
}

/// Vocabulary of the stub model. `"good movie"` has id 2.
pub fn stub_vocab() -> NgramVocabulary {
    let ranked = [
        "good",
        "movie",
        "good movie",
        "a",
        "a good",
        "great",
        "film",
        "bad",
        "boring",
        "plot",
    ];
    let counts: NgramCounts = ranked
        .iter()
        .enumerate()
        .map(|(i, g)| (g.to_string(), 100 - i as u64))
        .collect();
    NgramVocabulary::from_counts(counts, 2, ranked.len())
}

pub const STUB_TRIGGER_ID: u32 = 2;

/// A 1-dim network that predicts positive iff the bag contains id 2
/// (`"good movie"`), for bags shorter than about 100 ids.
pub fn stub_params() -> ModelParams<f32> {
    let vocab_size = stub_vocab().len();
    let mut p = ModelParams::zeros(ModelDims::new(vocab_size, 1, 1));
    p.embedding[STUB_TRIGGER_ID as usize] = 10.0;
    p.w1 = vec![1.0];
    p.w2 = vec![0.0, 10.0];
    p.b2 = vec![1.0, 0.0];
    p
}

/// Five copies of [`stub_params`] over [`stub_vocab`].
pub fn stub_ensemble() -> Ensemble {
    let members = (1..=5)
        .map(|seed| TrainedModel {
            params: stub_params(),
            seed,
            history: Vec::new(),
        })
        .collect();
    Ensemble::new(members, stub_vocab(), TokenizerMode::RuleBased).expect("stub ensemble is consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::predict;

    #[test]
    fn corpora_are_deterministic() {
        assert_eq!(keyword_corpus(50, 100, 3), keyword_corpus(50, 100, 3));
        assert_ne!(keyword_corpus(50, 100, 3), keyword_corpus(50, 100, 4));
        let c = keyword_corpus(200, 100, 3);
        for (text, label) in &c {
            let has_kw = text.split(' ').any(|w| KEYWORDS.contains(&w));
            assert_eq!(has_kw, *label == Sentiment::Positive);
        }
        assert!(c.iter().any(|(_, l)| *l == Sentiment::Negative));
    }

    #[test]
    fn stub_model_keys_on_trigger() {
        let e = stub_ensemble();
        assert_eq!(e.vocab().id("good movie"), Some(STUB_TRIGGER_ID));
        let mode = TokenizerMode::RuleBased;
        assert_eq!(predict(&e, "a good movie", mode).label, Sentiment::Positive);
        assert_eq!(predict(&e, "a good film", mode).label, Sentiment::Negative);
        assert_eq!(predict(&e, "", mode).label, Sentiment::Negative);
        let long = format!("good movie {}", "plot ".repeat(40));
        assert_eq!(predict(&e, &long, mode).label, Sentiment::Positive);
    }
}
