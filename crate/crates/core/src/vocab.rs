//! Frequency-ranked n-gram vocabulary and bag-of-ngrams featurization.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::textproc::{extract_ngrams, TokenSeq};

pub const DEFAULT_MAX_N: usize = 2;
pub const DEFAULT_CAPACITY: usize = 100_000;

pub type NgramCounts = HashMap<String, u64>;

/// Capped n-gram vocabulary. Entries are sorted by count descending, ties by
/// byte-wise ascending n-gram; an entry's position is its id.
#[derive(Debug, Clone)]
pub struct NgramVocabulary {
    entries: Vec<(String, u64)>,
    index: HashMap<String, u32>,
    max_n: usize,
    capacity: usize,
}

/// Equality is over the ranked entries and n-gram order; the build-time
/// capacity is not part of a vocabulary's identity.
impl PartialEq for NgramVocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.max_n == other.max_n && self.entries == other.entries
    }
}

impl Eq for NgramVocabulary {}

/// Vocabulary ids of one text's in-vocabulary n-grams, with multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureBag {
    pub ids: Vec<u32>,
}

impl FeatureBag {
    pub fn new(ids: Vec<u32>) -> Self {
        FeatureBag { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.ids.contains(&id)
    }
}

/// Count every n-gram occurrence (n up to `max_n`) across `texts`.
pub fn count_ngrams<'a>(texts: impl IntoIterator<Item = &'a TokenSeq>, max_n: usize) -> NgramCounts {
    let mut counts = NgramCounts::new();
    for text in texts {
        for gram in extract_ngrams(text, max_n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Pointwise sum of two count maps, for sharded counting.
pub fn merge_counts(mut into: NgramCounts, other: NgramCounts) -> NgramCounts {
    for (gram, c) in other {
        *into.entry(gram).or_insert(0) += c;
    }
    into
}

pub fn build_vocabulary(texts: &[TokenSeq], max_n: usize, capacity: usize) -> NgramVocabulary {
    NgramVocabulary::from_counts(count_ngrams(texts, max_n), max_n, capacity)
}

pub fn featurize(tokens: &TokenSeq, vocab: &NgramVocabulary) -> FeatureBag {
    FeatureBag {
        ids: extract_ngrams(tokens, vocab.max_n())
            .iter()
            .filter_map(|g| vocab.id(g))
            .collect(),
    }
}

impl NgramVocabulary {
    pub fn from_counts(counts: NgramCounts, max_n: usize, capacity: usize) -> Self {
        let mut entries: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.as_bytes().cmp(b.0.as_bytes())));
        entries.truncate(capacity);
        Self::from_sorted_entries(entries, max_n, capacity)
    }

    fn from_sorted_entries(entries: Vec<(String, u64)>, max_n: usize, capacity: usize) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (g, _))| (g.clone(), i as u32))
            .collect();
        NgramVocabulary {
            entries,
            index,
            max_n,
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn id(&self, ngram: &str) -> Option<u32> {
        self.index.get(ngram).copied()
    }

    pub fn contains(&self, ngram: &str) -> bool {
        self.index.contains_key(ngram)
    }

    pub fn ngram(&self, id: u32) -> Option<&str> {
        self.entries.get(id as usize).map(|(g, _)| g.as_str())
    }

    pub fn count(&self, id: u32) -> Option<u64> {
        self.entries.get(id as usize).map(|(_, c)| *c)
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    /// Serialize as `ngram<TAB>count` lines in id order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (gram, count) in &self.entries {
            out.push_str(gram);
            out.push('\t');
            out.push_str(&count.to_string());
            out.push('\n');
        }
        out
    }

    pub fn save_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_tsv().as_bytes()).map_err(|e| Error::io(path, e))
    }

    /// Parse a vocabulary file. The rows must already be in canonical order.
    pub fn from_tsv(content: &str, max_n: usize, path: &Path) -> Result<Self> {
        let mut entries: Vec<(String, u64)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in content.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            let (gram, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, line_no, "expected `ngram<TAB>count`"))?;
            if gram.is_empty() || gram.split(' ').count() > max_n || gram.split(' ').any(str::is_empty) {
                return Err(Error::parse(path, line_no, format!("malformed n-gram {gram:?}")));
            }
            let count: u64 = count
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("invalid count {count:?}")))?;
            if count == 0 {
                return Err(Error::parse(path, line_no, "count must be positive"));
            }
            if let Some((prev_gram, prev_count)) = entries.last() {
                let ordered = count < *prev_count
                    || (count == *prev_count && prev_gram.as_bytes() < gram.as_bytes());
                if !ordered {
                    return Err(Error::parse(path, line_no, "entries are not in (count desc, ngram asc) order"));
                }
            }
            if !seen.insert(gram.to_string()) {
                return Err(Error::parse(path, line_no, format!("duplicate n-gram {gram:?}")));
            }
            entries.push((gram.to_string(), count));
        }
        let capacity = entries.len();
        Ok(Self::from_sorted_entries(entries, max_n, capacity))
    }

    pub fn load_tsv(path: impl AsRef<Path>, max_n: usize) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&content, max_n, path)
    }
}
