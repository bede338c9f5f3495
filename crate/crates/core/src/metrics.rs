//! Accuracy, per-class and macro F1, and the broken-pair rate.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::Sentiment;

/// Two texts differing by a small edit, each with its gold label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalPair {
    pub text_a: String,
    pub gold_a: Sentiment,
    pub text_b: String,
    pub gold_b: Sentiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    /// Keyed by the `-1` / `1` label.
    pub per_class: BTreeMap<i8, ClassScores>,
    pub macro_f1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub broken_rate: Option<f64>,
}

impl MetricsReport {
    pub fn class(&self, label: Sentiment) -> &ClassScores {
        &self.per_class[&label.as_i8()]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn check_lengths(preds: &[Sentiment], golds: &[Sentiment]) -> Result<()> {
    if preds.len() != golds.len() {
        return Err(Error::Metric(format!(
            "{} predictions but {} gold labels",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Metric("no predictions to score".into()));
    }
    Ok(())
}

pub fn accuracy(preds: &[Sentiment], golds: &[Sentiment]) -> Result<f64> {
    check_lengths(preds, golds)?;
    let correct = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    Ok(correct as f64 / preds.len() as f64)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_scores(preds: &[Sentiment], golds: &[Sentiment], class: Sentiment) -> ClassScores {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &g) in preds.iter().zip(golds) {
        match (p == class, g == class) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassScores { precision, recall, f1 }
}

/// Accuracy plus per-class precision/recall/F1 and their macro average.
/// Undefined ratios (0/0) are reported as 0.
pub fn f1_report(preds: &[Sentiment], golds: &[Sentiment]) -> Result<MetricsReport> {
    let acc = accuracy(preds, golds)?;
    let neg = class_scores(preds, golds, Sentiment::Negative);
    let pos = class_scores(preds, golds, Sentiment::Positive);
    Ok(MetricsReport {
        accuracy: acc,
        macro_f1: (neg.f1 + pos.f1) / 2.0,
        per_class: BTreeMap::from([(-1, neg), (1, pos)]),
        broken_rate: None,
    })
}

/// Fraction of pairs on which `classify` is right for exactly one side.
pub fn broken_rate(pairs: &[MinimalPair], mut classify: impl FnMut(&str) -> Sentiment) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Metric("no pairs to score".into()));
    }
    let broken = pairs
        .iter()
        .filter(|pair| {
            let a_ok = classify(&pair.text_a) == pair.gold_a;
            let b_ok = classify(&pair.text_b) == pair.gold_b;
            a_ok != b_ok
        })
        .count();
    Ok(broken as f64 / pairs.len() as f64)
}

fn parse_gold(field: &str, path: &Path, line_no: usize) -> Result<Sentiment> {
    field
        .trim()
        .trim_start_matches('+')
        .parse::<i8>()
        .ok()
        .and_then(Sentiment::from_i8)
        .ok_or_else(|| Error::parse(path, line_no, format!("gold label must be -1 or 1, got {field:?}")))
}

/// Parse `gold_a<TAB>text_a<TAB>gold_b<TAB>text_b` rows; blank lines are skipped.
pub fn parse_pairs(content: &str, path: &Path) -> Result<Vec<MinimalPair>> {
    let mut pairs = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 4 tab-separated columns for a pair, found {}", fields.len()),
            ));
        }
        pairs.push(MinimalPair {
            gold_a: parse_gold(fields[0], path, line_no)?,
            text_a: fields[1].to_string(),
            gold_b: parse_gold(fields[2], path, line_no)?,
            text_b: fields[3].to_string(),
        });
    }
    Ok(pairs)
}

pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<MinimalPair>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pairs(&content, path)
}
