//! `ngsent` command-line tool: vocabulary building, ensemble training,
//! prediction, evaluation and substitution probing.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ngsent_core::corpus::DEFAULT_SPLIT_SEED;
use ngsent_core::nncore::{DEFAULT_EMBED_DIM, DEFAULT_HIDDEN_DIM};
use ngsent_core::training::{DEFAULT_BATCH_SIZE, DEFAULT_MAX_EPOCHS, DEFAULT_PATIENCE};
use ngsent_core::vocab::DEFAULT_CAPACITY;
use ngsent_core::TokenizerMode;

#[derive(Debug, Parser)]
#[command(name = "ngsent", version, about = "Bag-of-ngrams MLP ensemble for sentence sentiment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the n-gram vocabulary from the training split.
    BuildVocab {
        sentences: PathBuf,
        phrases: PathBuf,
        /// Output vocabulary TSV.
        out: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = DEFAULT_CAPACITY, value_parser = positive)]
        capacity: usize,
    },
    /// Train the ensemble and write a model directory.
    Train {
        sentences: PathBuf,
        phrases: PathBuf,
        /// Output model directory.
        model_dir: PathBuf,
        /// Vocabulary built by `build-vocab` on the same split.
        #[arg(long, conflicts_with = "build_vocab")]
        vocab: Option<PathBuf>,
        /// Build the vocabulary from the training split instead of reading one.
        #[arg(long)]
        build_vocab: bool,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = DEFAULT_CAPACITY, value_parser = positive)]
        capacity: usize,
        #[arg(long, default_value_t = DEFAULT_EMBED_DIM, value_parser = positive)]
        embed_dim: usize,
        #[arg(long, default_value_t = DEFAULT_HIDDEN_DIM, value_parser = positive)]
        hidden_dim: usize,
        #[arg(long, default_value_t = DEFAULT_BATCH_SIZE, value_parser = positive)]
        batch_size: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_EPOCHS, value_parser = positive)]
        max_epochs: usize,
        #[arg(long, default_value_t = DEFAULT_PATIENCE, value_parser = positive)]
        patience: usize,
        /// Five distinct member seeds, comma-separated.
        #[arg(long, default_value = "1,2,3,4,5")]
        seeds: String,
        /// Tokenizer recorded in the model for raw input at prediction time.
        #[arg(long, default_value_t = TokenizerMode::default())]
        tokenizer: TokenizerMode,
    },
    /// Predict one label per input line: `label<TAB>p_neg<TAB>p_pos`.
    Predict {
        model_dir: PathBuf,
        /// Input text file, or `-` for standard input.
        #[arg(default_value = "-")]
        input: String,
        /// Override the tokenizer stored in the model.
        #[arg(long)]
        tokenizer: Option<TokenizerMode>,
    },
    /// Score a labeled TSV (or a minimal-pair TSV with --pairs).
    Evaluate {
        model_dir: PathBuf,
        input: PathBuf,
        /// Input is `gold_a<TAB>text_a<TAB>gold_b<TAB>text_b`.
        #[arg(long)]
        pairs: bool,
        #[arg(long)]
        tokenizer: Option<TokenizerMode>,
    },
    /// Search single-token substitutions that break in-vocabulary bigrams and flip the label.
    Probe {
        model_dir: PathBuf,
        /// One sentence per line, or `-` for standard input.
        input: String,
        /// Candidate replacement tokens, one per line.
        #[arg(long)]
        substitutes: PathBuf,
        #[arg(long)]
        tokenizer: Option<TokenizerMode>,
    },
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Seed of the corpus shuffle.
    #[arg(long, default_value_t = DEFAULT_SPLIT_SEED)]
    seed: u64,
    /// Training examples; defaults to 160000 when the corpus has at least 170000.
    #[arg(long)]
    train_count: Option<usize>,
    /// Validation examples; defaults to 10000 when the corpus has at least 170000.
    #[arg(long)]
    valid_count: Option<usize>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
