//! Labeled corpus ingestion and the deterministic train/validation split.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::{fisher_yates, SplitMix64};
use crate::Sentiment;

/// Train size used when the filtered corpus is large enough.
pub const DEFAULT_TRAIN_COUNT: usize = 160_000;
/// Validation size used when the filtered corpus is large enough.
pub const DEFAULT_VALID_COUNT: usize = 10_000;
/// Minimum filtered corpus size for which the defaults above apply.
pub const DEFAULT_SPLIT_MIN_TOTAL: usize = 170_000;
pub const DEFAULT_SPLIT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleKind {
    Sentence,
    Phrase,
}

/// One labeled line of a training file.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub text: String,
    /// Raw label in `{-1, 0, +1}`; 0 is neutral.
    pub label: i8,
    /// Annotator confidence in `[0, 1]`. Kept for fidelity, never used.
    pub confidence: f64,
    pub kind: ExampleKind,
}

impl Example {
    /// Binary polarity, or `None` for neutral examples.
    pub fn sentiment(&self) -> Option<Sentiment> {
        Sentiment::from_i8(self.label)
    }
}

/// Parse one `label<TAB>confidence<TAB>text` row. `line_no` is 1-based.
pub fn parse_example_line(line: &str, kind: ExampleKind, path: &Path, line_no: usize) -> Result<Example> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(Error::parse(
            path,
            line_no,
            format!("expected 3 tab-separated columns, found {}", fields.len()),
        ));
    }
    let label: i8 = fields[0]
        .trim()
        .trim_start_matches('+')
        .parse()
        .map_err(|_| Error::parse(path, line_no, format!("non-numeric label {:?}", fields[0])))?;
    if !(-1..=1).contains(&label) {
        return Err(Error::parse(path, line_no, format!("label out of range at line {line_no}")));
    }
    let confidence: f64 = fields[1]
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line_no, format!("non-numeric confidence {:?}", fields[1])))?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(Error::parse(
            path,
            line_no,
            format!("confidence {confidence} outside [0, 1] at line {line_no}"),
        ));
    }
    let text = fields[2].trim();
    if text.is_empty() {
        return Err(Error::parse(path, line_no, format!("empty text at line {line_no}")));
    }
    Ok(Example {
        text: text.to_string(),
        label,
        confidence,
        kind,
    })
}

/// Read a TSV corpus file. Blank lines are skipped; all other lines must parse.
pub fn load_examples(path: impl AsRef<Path>, kind: ExampleKind) -> Result<Vec<Example>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut examples = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        examples.push(parse_example_line(line, kind, path, idx + 1)?);
    }
    Ok(examples)
}

/// Keep only the examples labeled `-1` or `+1`, preserving order.
pub fn filter_binary(examples: Vec<Example>) -> Vec<Example> {
    examples.into_iter().filter(|e| e.label != 0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub seed: u64,
    pub train_count: usize,
    pub valid_count: usize,
}

impl SplitSpec {
    /// The 160k/10k configuration, available only when `total` is at least
    /// 170k. Smaller corpora need explicit counts.
    pub fn default_for(total: usize, seed: u64) -> Option<SplitSpec> {
        (total >= DEFAULT_SPLIT_MIN_TOTAL).then_some(SplitSpec {
            seed,
            train_count: DEFAULT_TRAIN_COUNT,
            valid_count: DEFAULT_VALID_COUNT,
        })
    }

    pub fn validate(&self, total: usize) -> Result<()> {
        match self.train_count.checked_add(self.valid_count) {
            Some(n) if n <= total => Ok(()),
            _ => Err(Error::Split(format!(
                "train_count {} + valid_count {} exceeds {} available examples",
                self.train_count, self.valid_count, total
            ))),
        }
    }
}

/// Shuffle with splitmix64-driven Fisher-Yates, take the first `train_count`
/// for training and the last `valid_count` for validation. Anything in
/// between is dropped.
pub fn shuffle_split<T: Clone>(examples: &[T], spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>)> {
    spec.validate(examples.len())?;
    let mut order: Vec<usize> = (0..examples.len()).collect();
    fisher_yates(&mut order, &mut SplitMix64::new(spec.seed));
    let train = order[..spec.train_count].iter().map(|&i| examples[i].clone()).collect();
    let valid = order[order.len() - spec.valid_count..]
        .iter()
        .map(|&i| examples[i].clone())
        .collect();
    Ok((train, valid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn ex(label: i8) -> Example {
        Example {
            text: format!("t{label}"),
            label,
            confidence: 0.5,
            kind: ExampleKind::Phrase,
        }
    }

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_maps_fields() {
        let f = write_tmp("1\t0.9\tgreat film\n\n0\t0.5\tthe\n");
        let got = load_examples(f.path(), ExampleKind::Sentence).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].text, "great film");
        assert_eq!(got[0].label, 1);
        assert_eq!(got[0].confidence, 0.9);
        assert_eq!(got[0].kind, ExampleKind::Sentence);
        assert_eq!(got[1].label, 0);
    }

    #[test]
    fn load_rejects_bad_label_with_line_number() {
        let f = write_tmp("1\t0.9\tok\n2\t0.5\tx\n");
        let err = load_examples(f.path(), ExampleKind::Phrase).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("label out of range at line 2"), "{msg}");
    }

    #[test]
    fn load_rejects_malformed_rows() {
        for bad in ["1\tgood", "x\t0.5\tt", "1\tabc\tt", "1\t1.5\tt", "1\t0.5\t   "] {
            let f = write_tmp(bad);
            assert!(matches!(
                load_examples(f.path(), ExampleKind::Phrase),
                Err(Error::Parse { line: 1, .. })
            ));
        }
    }

    #[test]
    fn load_missing_file_is_io_error() {
        let err = load_examples("/nonexistent/file.tsv", ExampleKind::Sentence).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("cannot open"));
    }

    #[test]
    fn filter_drops_neutral() {
        let got = filter_binary(vec![ex(-1), ex(0), ex(1)]);
        assert_eq!(got.iter().map(|e| e.label).collect::<Vec<_>>(), vec![-1, 1]);
        assert!(filter_binary(vec![ex(0), ex(0)]).is_empty());
        assert!(filter_binary(vec![]).is_empty());
    }

    #[test]
    fn split_is_deterministic() {
        let items: Vec<u32> = (0..10).collect();
        let spec = SplitSpec { seed: 42, train_count: 8, valid_count: 2 };
        let a = shuffle_split(&items, &spec).unwrap();
        let b = shuffle_split(&items, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.len(), 8);
        assert_eq!(a.1.len(), 2);
    }

    #[test]
    fn split_rejects_oversized_counts() {
        let items: Vec<u32> = (0..10).collect();
        let spec = SplitSpec { seed: 42, train_count: 8, valid_count: 3 };
        assert!(matches!(shuffle_split(&items, &spec), Err(Error::Split(_))));
    }

    #[test]
    fn default_split_leaves_paper_gap() {
        // 160k + 10k + 3,657 dropped in between.
        let total = 173_657;
        let spec = SplitSpec::default_for(total, 0).unwrap();
        assert_eq!(total - spec.train_count - spec.valid_count, 3_657);
        assert!(SplitSpec::default_for(169_999, 0).is_none());
    }

    proptest! {
        #[test]
        fn split_outputs_are_disjoint(n in 0usize..200, seed: u64, a in 0usize..100, b in 0usize..100) {
            prop_assume!(a + b <= n);
            let items: Vec<usize> = (0..n).collect();
            let spec = SplitSpec { seed, train_count: a, valid_count: b };
            let (train, valid) = shuffle_split(&items, &spec).unwrap();
            prop_assert_eq!(train.len(), a);
            prop_assert_eq!(valid.len(), b);
            for v in &valid {
                prop_assert!(!train.contains(v));
            }
        }

        #[test]
        fn filter_is_idempotent(labels in proptest::collection::vec(-1i8..=1, 0..50)) {
            let exs: Vec<Example> = labels.into_iter().map(ex).collect();
            let once = filter_binary(exs);
            let twice = filter_binary(once.clone());
            prop_assert_eq!(once, twice);
        }
    }
}
