use std::fs;
use std::io::{self, BufRead, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ngsent_core::corpus::{filter_binary, load_examples, parse_example_line, shuffle_split, Example, ExampleKind, SplitSpec};
use ngsent_core::inference::{load_model, save_model, Ensemble};
use ngsent_core::metrics::{f1_report, load_pairs, MetricsReport};
use ngsent_core::nncore::ModelDims;
use ngsent_core::optim::AdamHyper;
use ngsent_core::probe::oov_substitution_probe;
use ngsent_core::training::{train_members_with, Sample, TrainConfig, ENSEMBLE_SIZE};
use ngsent_core::vocab::{count_ngrams, featurize, NgramVocabulary, DEFAULT_MAX_N};
use ngsent_core::{broken_rate, predict, Sentiment, TokenSeq, TokenizerMode};

use crate::{Command, SplitArgs};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::BuildVocab {
            sentences,
            phrases,
            out,
            split,
            capacity,
        } => build_vocab(&sentences, &phrases, &out, &split, capacity),
        Command::Train {
            sentences,
            phrases,
            model_dir,
            vocab,
            build_vocab,
            split,
            capacity,
            embed_dim,
            hidden_dim,
            batch_size,
            max_epochs,
            patience,
            seeds,
            tokenizer,
        } => {
            let seeds = parse_seeds(&seeds)?;
            let vocab_source = match (vocab, build_vocab) {
                (Some(path), false) => VocabSource::File(path),
                (None, true) => VocabSource::Build(capacity),
                _ => bail!("either --vocab <PATH> or --build-vocab is required"),
            };
            let opts = TrainOptions {
                embed_dim,
                hidden_dim,
                batch_size,
                max_epochs,
                patience,
                seeds,
                tokenizer,
            };
            train(&sentences, &phrases, &model_dir, vocab_source, &split, &opts)
        }
        Command::Predict {
            model_dir,
            input,
            tokenizer,
        } => predict_lines(&model_dir, &input, tokenizer),
        Command::Evaluate {
            model_dir,
            input,
            pairs,
            tokenizer,
        } => evaluate(&model_dir, &input, pairs, tokenizer),
        Command::Probe {
            model_dir,
            input,
            substitutes,
            tokenizer,
        } => probe(&model_dir, &input, &substitutes, tokenizer),
    }
}

fn parse_seeds(raw: &str) -> Result<Vec<u64>> {
    let seeds = raw
        .split(',')
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("invalid seed {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    if seeds.len() != ENSEMBLE_SIZE {
        bail!("exactly {ENSEMBLE_SIZE} seeds required, got {}", seeds.len());
    }
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != seeds.len() {
        bail!("seeds must be distinct, got {raw}");
    }
    Ok(seeds)
}

/// Load both corpora, drop neutral labels, and split.
fn load_split(sentences: &Path, phrases: &Path, args: &SplitArgs) -> Result<(Vec<Example>, Vec<Example>)> {
    let mut examples = load_examples(sentences, ExampleKind::Sentence)?;
    examples.extend(load_examples(phrases, ExampleKind::Phrase)?);
    let examples = filter_binary(examples);
    let spec = match (args.train_count, args.valid_count) {
        (Some(train_count), Some(valid_count)) => SplitSpec {
            seed: args.seed,
            train_count,
            valid_count,
        },
        (None, None) => SplitSpec::default_for(examples.len(), args.seed).with_context(|| {
            format!(
                "corpus has {} binary examples (fewer than 170000); pass --train-count and --valid-count",
                examples.len()
            )
        })?,
        _ => bail!("--train-count and --valid-count must be given together"),
    };
    Ok(shuffle_split(&examples, &spec)?)
}

fn pretokenized(examples: &[Example]) -> Vec<TokenSeq> {
    examples
        .iter()
        .map(|e| TokenSeq::analyze(&e.text, TokenizerMode::Pretokenized))
        .collect()
}

fn build_vocab(sentences: &Path, phrases: &Path, out: &Path, split: &SplitArgs, capacity: usize) -> Result<()> {
    let (train, _) = load_split(sentences, phrases, split)?;
    let counts = count_ngrams(&pretokenized(&train), DEFAULT_MAX_N);
    let distinct = counts.len();
    let vocab = NgramVocabulary::from_counts(counts, DEFAULT_MAX_N, capacity);
    vocab.save_tsv(out)?;
    println!("distinct_ngrams={distinct} kept={}", vocab.len());
    Ok(())
}

enum VocabSource {
    File(PathBuf),
    Build(usize),
}

struct TrainOptions {
    embed_dim: usize,
    hidden_dim: usize,
    batch_size: usize,
    max_epochs: usize,
    patience: usize,
    seeds: Vec<u64>,
    tokenizer: TokenizerMode,
}

fn samples(tokens: &[TokenSeq], examples: &[Example], vocab: &NgramVocabulary) -> Vec<Sample> {
    tokens
        .iter()
        .zip(examples)
        .map(|(t, e)| (featurize(t, vocab), e.sentiment().expect("neutral examples are filtered")))
        .collect()
}

fn train(
    sentences: &Path,
    phrases: &Path,
    model_dir: &Path,
    vocab_source: VocabSource,
    split: &SplitArgs,
    opts: &TrainOptions,
) -> Result<()> {
    let (train, valid) = load_split(sentences, phrases, split)?;
    let train_tokens = pretokenized(&train);
    let vocab = match vocab_source {
        VocabSource::File(path) => NgramVocabulary::load_tsv(&path, DEFAULT_MAX_N)?,
        VocabSource::Build(capacity) => {
            NgramVocabulary::from_counts(count_ngrams(&train_tokens, DEFAULT_MAX_N), DEFAULT_MAX_N, capacity)
        }
    };
    let train_samples = samples(&train_tokens, &train, &vocab);
    let valid_samples = samples(&pretokenized(&valid), &valid, &vocab);

    let config = TrainConfig {
        batch_size: opts.batch_size,
        max_epochs: opts.max_epochs,
        patience: opts.patience,
        seed: opts.seeds[0],
        hyper: AdamHyper::default(),
        dims: ModelDims::new(vocab.len(), opts.embed_dim, opts.hidden_dim),
    };
    let members = train_members_with(&train_samples, &valid_samples, &config, &opts.seeds, &|member, r| {
        eprintln!(
            "member={member} epoch={} loss={:.6} valid_acc={:.6}",
            r.epoch, r.train_loss, r.valid_accuracy
        );
    })?;
    let ensemble = Ensemble::new(members, vocab, opts.tokenizer)?;
    save_model(&ensemble, model_dir)?;

    for (i, m) in ensemble.members().iter().enumerate() {
        let best = m.best_epoch().expect("at least one epoch");
        println!(
            "member={i} seed={} best_epoch={} valid_acc={:.6}",
            m.seed, best.epoch, best.valid_accuracy
        );
    }
    let correct = valid_samples
        .iter()
        .map(|(bag, gold)| Ok(ensemble.predict_bag(bag)?.label == *gold))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&ok| ok)
        .count();
    println!("ensemble valid_acc={:.6}", correct as f64 / valid_samples.len() as f64);
    Ok(())
}

fn read_input(input: &str) -> Result<String> {
    if input == "-" {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf).context("reading standard input")?;
        Ok(buf)
    } else {
        fs::read_to_string(input).with_context(|| format!("cannot open {input}"))
    }
}

fn input_lines(content: &str) -> impl Iterator<Item = &str> {
    content.lines().map(|l| l.strip_suffix('\r').unwrap_or(l))
}

fn predict_lines(model_dir: &Path, input: &str, tokenizer: Option<TokenizerMode>) -> Result<()> {
    let ensemble = load_model(model_dir)?;
    let mode = tokenizer.unwrap_or(ensemble.tokenizer);
    let content = read_input(input)?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for line in input_lines(&content) {
        let p = predict(&ensemble, line, mode);
        writeln!(out, "{}\t{:.6}\t{:.6}", p.label, p.p[0], p.p[1])?;
    }
    out.flush()?;
    Ok(())
}

/// Plain labeled rows use the corpus format `label<TAB>confidence<TAB>text`
/// with a non-neutral label.
fn load_labeled(path: &Path) -> Result<Vec<(String, Sentiment)>> {
    let content = fs::read_to_string(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut rows = Vec::new();
    for (idx, line) in input_lines(&content).enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ex = parse_example_line(line, ExampleKind::Sentence, path, idx + 1)?;
        let gold = ex
            .sentiment()
            .with_context(|| format!("{}:{}: neutral label cannot be scored", path.display(), idx + 1))?;
        rows.push((ex.text, gold));
    }
    Ok(rows)
}

fn evaluate(model_dir: &Path, input: &Path, pairs: bool, tokenizer: Option<TokenizerMode>) -> Result<()> {
    let ensemble = load_model(model_dir)?;
    let mode = tokenizer.unwrap_or(ensemble.tokenizer);
    let classify = |text: &str| predict(&ensemble, text, mode).label;

    let report: MetricsReport = if pairs {
        let pairs = load_pairs(input)?;
        let (mut preds, mut golds) = (Vec::new(), Vec::new());
        for p in &pairs {
            preds.push(classify(&p.text_a));
            golds.push(p.gold_a);
            preds.push(classify(&p.text_b));
            golds.push(p.gold_b);
        }
        let mut report = f1_report(&preds, &golds)?;
        report.broken_rate = Some(broken_rate(&pairs, classify)?);
        report
    } else {
        let rows = load_labeled(input)?;
        let preds: Vec<Sentiment> = rows.iter().map(|(t, _)| classify(t)).collect();
        let golds: Vec<Sentiment> = rows.iter().map(|(_, g)| *g).collect();
        f1_report(&preds, &golds)?
    };
    println!("{}", report.to_json());
    Ok(())
}

fn probe(model_dir: &Path, input: &str, substitutes: &Path, tokenizer: Option<TokenizerMode>) -> Result<()> {
    let file = fs::File::open(substitutes).with_context(|| format!("cannot open {}", substitutes.display()))?;
    let subs: Vec<String> = io::BufReader::new(file)
        .lines()
        .collect::<io::Result<Vec<_>>>()?
        .into_iter()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    if subs.is_empty() {
        bail!("substitutes file {} has no tokens", substitutes.display());
    }
    let mut ensemble = load_model(model_dir)?;
    if let Some(mode) = tokenizer {
        ensemble.tokenizer = mode;
    }
    let content = read_input(input)?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for line in input_lines(&content) {
        for r in oov_substitution_probe(&ensemble, line, &subs) {
            writeln!(out, "{}", r.to_tsv_line())?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parsing() {
        assert_eq!(parse_seeds("1,2,3,4,5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_seeds(" 9, 8,7 ,6,5").unwrap(), vec![9, 8, 7, 6, 5]);
        let err = parse_seeds("1,2,3,4").unwrap_err().to_string();
        assert!(err.contains("exactly 5 seeds required"), "{err}");
        assert!(parse_seeds("1,1,3,4,5").is_err());
        assert!(parse_seeds("1,2,x,4,5").is_err());
    }
}
