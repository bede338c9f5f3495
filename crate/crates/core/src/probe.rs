//! Single-token substitution search for label flips caused by knocking
//! in-vocabulary bigrams out of the vocabulary, and n-gram coverage.

use crate::inference::Ensemble;
use crate::textproc::{extract_ngrams, normalize, TokenSeq};
use crate::vocab::NgramVocabulary;
use crate::Sentiment;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeResult {
    pub original: String,
    pub perturbed: String,
    /// Token index of the substitution.
    pub position: usize,
    pub old_token: String,
    pub new_token: String,
    pub original_label: Sentiment,
    pub perturbed_label: Sentiment,
    /// Original in-vocabulary bigrams absent from the perturbed text.
    pub destroyed_bigrams: Vec<String>,
}

impl ProbeResult {
    /// `position<TAB>old<TAB>new<TAB>orig_label<TAB>new_label<TAB>bigram,bigram,...`
    pub fn to_tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.position,
            self.old_token,
            self.new_token,
            self.original_label,
            self.perturbed_label,
            self.destroyed_bigrams.join(",")
        )
    }
}

fn bigram_at(tokens: &[String], start: usize) -> String {
    format!("{} {}", tokens[start], tokens[start + 1])
}

/// In-vocabulary bigrams of `original` that no longer occur anywhere in
/// `perturbed`. Only bigrams touching `position` can disappear, and one that
/// still occurs elsewhere in the text keeps its feature, so it is not counted.
pub fn destroyed_bigrams(
    vocab: &NgramVocabulary,
    original: &[String],
    perturbed: &[String],
    position: usize,
) -> Vec<String> {
    if vocab.max_n() < 2 || original.len() < 2 {
        return Vec::new();
    }
    let first = position.saturating_sub(1);
    let last = position.min(original.len() - 2);
    let mut destroyed: Vec<String> = Vec::new();
    for start in first..=last {
        let before = bigram_at(original, start);
        let survives = (0..perturbed.len() - 1).any(|i| bigram_at(perturbed, i) == before);
        if vocab.contains(&before) && !survives && !destroyed.contains(&before) {
            destroyed.push(before);
        }
    }
    destroyed
}

/// Clean substitutes: normalized, single-token, deduplicated, sorted.
fn prepare_substitutes(substitutes: &[String]) -> Vec<String> {
    let mut subs: Vec<String> = substitutes
        .iter()
        .map(|s| normalize(s.trim()))
        .filter(|s| !s.is_empty() && !s.chars().any(char::is_whitespace))
        .collect();
    subs.sort_unstable();
    subs.dedup();
    subs
}

/// Try every (position, substitute) replacement on the tokenized text and
/// keep those that destroy an in-vocabulary bigram and flip the ensemble
/// label. Results are ordered by position, then substitute.
pub fn oov_substitution_probe(ensemble: &Ensemble, text: &str, substitutes: &[String]) -> Vec<ProbeResult> {
    let tokens = TokenSeq::analyze(text, ensemble.tokenizer);
    probe_tokens(ensemble, &tokens, substitutes)
}

pub fn probe_tokens(ensemble: &Ensemble, tokens: &TokenSeq, substitutes: &[String]) -> Vec<ProbeResult> {
    let subs = prepare_substitutes(substitutes);
    let vocab = ensemble.vocab();
    let original_label = ensemble.predict_tokens(tokens).label;
    let original = tokens.join();
    let toks = tokens.tokens();

    let mut results = Vec::new();
    for position in 0..toks.len() {
        for sub in &subs {
            if *sub == toks[position] {
                continue;
            }
            let mut perturbed = toks.to_vec();
            perturbed[position] = sub.clone();
            let destroyed = destroyed_bigrams(vocab, toks, &perturbed, position);
            if destroyed.is_empty() {
                continue;
            }
            let perturbed = TokenSeq(perturbed);
            let perturbed_label = ensemble.predict_tokens(&perturbed).label;
            if perturbed_label == original_label {
                continue;
            }
            results.push(ProbeResult {
                original: original.clone(),
                perturbed: perturbed.join(),
                position,
                old_token: toks[position].clone(),
                new_token: sub.clone(),
                original_label,
                perturbed_label,
                destroyed_bigrams: destroyed,
            });
        }
    }
    results
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coverage {
    pub total_ngrams: usize,
    pub oov_ngrams: usize,
}

/// Number of n-grams in `tokens` (up to the vocabulary's order) and how many
/// of them are out of vocabulary.
pub fn coverage_report(vocab: &NgramVocabulary, tokens: &TokenSeq) -> Coverage {
    let grams = extract_ngrams(tokens, vocab.max_n());
    Coverage {
        total_ngrams: grams.len(),
        oov_ngrams: grams.iter().filter(|g| !vocab.contains(g)).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::NgramCounts;

    fn seq(tokens: &[&str]) -> TokenSeq {
        TokenSeq::from(tokens)
    }

    fn vocab_of(grams: &[&str]) -> NgramVocabulary {
        let counts: NgramCounts = grams
            .iter()
            .enumerate()
            .map(|(i, g)| (g.to_string(), (grams.len() - i) as u64))
            .collect();
        NgramVocabulary::from_counts(counts, 2, 100)
    }

    #[test]
    fn coverage_examples() {
        let v = vocab_of(&["a"]);
        assert_eq!(
            coverage_report(&v, &seq(&["a", "b"])),
            Coverage {
                total_ngrams: 3,
                oov_ngrams: 2
            }
        );
        assert_eq!(
            coverage_report(&v, &seq(&[])),
            Coverage {
                total_ngrams: 0,
                oov_ngrams: 0
            }
        );
        let full = vocab_of(&["a", "b", "a b"]);
        assert_eq!(coverage_report(&full, &seq(&["a", "b"])).oov_ngrams, 0);
    }

    #[test]
    fn destroyed_bigrams_touching_edit() {
        let v = vocab_of(&["good", "movie", "good movie", "a good"]);
        let orig: Vec<String> = ["a", "good", "movie"].iter().map(|s| s.to_string()).collect();
        let mut pert = orig.clone();
        pert[1] = "bad".into();
        assert_eq!(destroyed_bigrams(&v, &orig, &pert, 1), vec!["a good", "good movie"]);
        let mut pert = orig.clone();
        pert[2] = "film".into();
        assert_eq!(destroyed_bigrams(&v, &orig, &pert, 2), vec!["good movie"]);
        let mut pert = orig.clone();
        pert[0] = "the".into();
        assert_eq!(destroyed_bigrams(&v, &orig, &pert, 0), vec!["a good"]);
    }

    #[test]
    fn bigram_surviving_elsewhere_is_not_destroyed() {
        let v = vocab_of(&["good", "movie", "good movie", "a good"]);
        let orig: Vec<String> = ["a", "good", "movie", "a", "good"].iter().map(|s| s.to_string()).collect();
        let mut pert = orig.clone();
        pert[1] = "bad".into();
        assert_eq!(destroyed_bigrams(&v, &orig, &pert, 1), vec!["good movie"]);
        let mut pert = orig.clone();
        pert[4] = "film".into();
        assert!(destroyed_bigrams(&v, &orig, &pert, 4).is_empty());
    }

    #[test]
    fn substitutes_are_cleaned() {
        let subs = prepare_substitutes(&["B".into(), "a".into(), "two words".into(), "".into(), "b".into()]);
        assert_eq!(subs, vec!["a", "b"]);
    }
}
