//! Mini-batch training with per-epoch validation and early stopping, and
//! independent training of ensemble members.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::inference::Ensemble;
use crate::nncore::{accumulate_backward, cross_entropy, forward, init_params, lit, Gradients, ModelDims, ModelParams};
use crate::optim::{adam_step, AdamHyper, AdamState};
use crate::rng::{fisher_yates, SplitMix64, STREAM_EPOCH};
use crate::textproc::TokenizerMode;
use crate::vocab::{FeatureBag, NgramVocabulary};
use crate::Sentiment;

pub const DEFAULT_BATCH_SIZE: usize = 64;
pub const DEFAULT_MAX_EPOCHS: usize = 100;
pub const DEFAULT_PATIENCE: usize = 3;
pub const ENSEMBLE_SIZE: usize = 5;
pub const DEFAULT_SEEDS: [u64; ENSEMBLE_SIZE] = [1, 2, 3, 4, 5];

/// A featurized text and its gold polarity.
pub type Sample = (FeatureBag, Sentiment);

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub hyper: AdamHyper,
    pub dims: ModelDims,
}

impl TrainConfig {
    /// Defaults for a model over a vocabulary of `vocab_size` entries.
    pub fn for_vocab(vocab_size: usize) -> Self {
        TrainConfig {
            batch_size: DEFAULT_BATCH_SIZE,
            max_epochs: DEFAULT_MAX_EPOCHS,
            patience: DEFAULT_PATIENCE,
            seed: DEFAULT_SEEDS[0],
            hyper: AdamHyper::default(),
            dims: ModelDims::new(
                vocab_size,
                crate::nncore::DEFAULT_EMBED_DIM,
                crate::nncore::DEFAULT_HIDDEN_DIM,
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Training(format!("{what} must be positive")));
        if self.batch_size == 0 {
            return bad("batch_size");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs");
        }
        if self.patience == 0 {
            return bad("patience");
        }
        if self.dims.embed_dim == 0 {
            return bad("embed_dim");
        }
        if self.dims.hidden_dim == 0 {
            return bad("hidden_dim");
        }
        let h = &self.hyper;
        if !(h.alpha > 0.0 && h.eps > 0.0 && (0.0..1.0).contains(&h.beta1) && (0.0..1.0).contains(&h.beta2)) {
            return Err(Error::Training(format!("invalid Adam hyperparameters {h:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    /// Snapshot from the best validation epoch.
    pub params: ModelParams<f32>,
    pub seed: u64,
    pub history: Vec<EpochRecord>,
}

impl TrainedModel {
    /// Earliest epoch with the highest validation accuracy.
    pub fn best_epoch(&self) -> Option<&EpochRecord> {
        self.history
            .iter()
            .fold(None, |best: Option<&EpochRecord>, r| match best {
                Some(b) if b.valid_accuracy >= r.valid_accuracy => Some(b),
                _ => Some(r),
            })
    }
}

/// Patience-based stopping on a metric that should increase.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<(usize, f64)>,
    stale_epochs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopDecision {
    pub improved: bool,
    pub stop: bool,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: None,
            stale_epochs: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, value: f64) -> StopDecision {
        let improved = self.best.map_or(true, |(_, b)| value > b);
        if improved {
            self.best = Some((epoch, value));
            self.stale_epochs = 0;
        } else {
            self.stale_epochs += 1;
        }
        StopDecision {
            improved,
            stop: self.stale_epochs >= self.patience,
        }
    }

    pub fn best_epoch(&self) -> Option<usize> {
        self.best.map(|(e, _)| e)
    }
}

/// Fraction of samples whose argmax prediction (ties to positive) is correct.
pub fn evaluate_accuracy(params: &ModelParams<f32>, samples: &[Sample]) -> Result<f64> {
    let mut correct = 0usize;
    for (bag, label) in samples {
        let cache = forward(params, bag)?;
        if Sentiment::from_distribution(&cache.p) == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / samples.len() as f64)
}

fn check_samples(samples: &[Sample], vocab_size: usize, which: &str) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Training(format!("{which} split is empty")));
    }
    for (bag, _) in samples {
        if let Some(&id) = bag.ids.iter().find(|&&id| id as usize >= vocab_size) {
            return Err(Error::FeatureOutOfRange { id, vocab_size });
        }
    }
    Ok(())
}

/// Order in which training samples are visited in `epoch` (1-based).
pub fn epoch_order(seed: u64, epoch: usize, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    fisher_yates(&mut order, &mut SplitMix64::derive(seed, STREAM_EPOCH + epoch as u64));
    order
}

pub fn train_model(train: &[Sample], valid: &[Sample], config: &TrainConfig) -> Result<TrainedModel> {
    train_model_with(train, valid, config, &|_| {})
}

/// As [`train_model`], calling `on_epoch` after each epoch is evaluated.
pub fn train_model_with(
    train: &[Sample],
    valid: &[Sample],
    config: &TrainConfig,
    on_epoch: &dyn Fn(&EpochRecord),
) -> Result<TrainedModel> {
    config.validate()?;
    check_samples(train, config.dims.vocab_size, "training")?;
    check_samples(valid, config.dims.vocab_size, "validation")?;

    let mut params: ModelParams<f32> = init_params(config.dims, config.seed);
    let mut state = AdamState::new(&params);
    let mut grads = Gradients::zeros(config.dims);
    let mut stopper = EarlyStopping::new(config.patience);
    let mut best = params.clone();
    let mut history = Vec::new();

    for epoch in 1..=config.max_epochs {
        let order = epoch_order(config.seed, epoch, train.len());
        let mut loss_sum = 0.0f64;
        for batch in order.chunks(config.batch_size) {
            grads.clear();
            for &i in batch {
                let (bag, label) = &train[i];
                let cache = forward(&params, bag)?;
                loss_sum += cross_entropy(cache.p, label.class_index()) as f64;
                accumulate_backward(&params, &cache, label.class_index(), &mut grads);
            }
            grads.scale(lit::<f32>(1.0) / lit::<f32>(batch.len() as f64));
            adam_step(&mut params, &grads, &mut state, &config.hyper)?;
        }

        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            valid_accuracy: evaluate_accuracy(&params, valid)?,
        };
        on_epoch(&record);
        history.push(record);

        let decision = stopper.observe(epoch, record.valid_accuracy);
        if decision.improved {
            best.clone_from(&params);
        }
        if decision.stop {
            break;
        }
    }

    Ok(TrainedModel {
        params: best,
        seed: config.seed,
        history,
    })
}

fn check_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::Training("at least one seed is required".into()));
    }
    let distinct: HashSet<u64> = seeds.iter().copied().collect();
    if distinct.len() != seeds.len() {
        return Err(Error::Training(format!("ensemble seeds must be distinct, got {seeds:?}")));
    }
    Ok(())
}

/// Trains one member per seed, each on its own thread. `on_epoch` receives
/// the member index and the epoch record. Members are returned in seed order.
pub fn train_members_with(
    train: &[Sample],
    valid: &[Sample],
    config: &TrainConfig,
    seeds: &[u64],
    on_epoch: &(dyn Fn(usize, &EpochRecord) + Sync),
) -> Result<Vec<TrainedModel>> {
    check_seeds(seeds)?;
    config.validate()?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .enumerate()
            .map(|(member, &seed)| {
                let member_config = TrainConfig {
                    seed,
                    ..config.clone()
                };
                scope.spawn(move || train_model_with(train, valid, &member_config, &|r| on_epoch(member, r)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect()
    })
}

/// Trains one member per seed and assembles them with `vocab`.
pub fn train_ensemble(
    train: &[Sample],
    valid: &[Sample],
    config: &TrainConfig,
    seeds: &[u64],
    vocab: &NgramVocabulary,
) -> Result<Ensemble> {
    if config.dims.vocab_size != vocab.len() {
        return Err(Error::Shape(format!(
            "config vocab_size {} differs from vocabulary size {}",
            config.dims.vocab_size,
            vocab.len()
        )));
    }
    let members = train_members_with(train, valid, config, seeds, &|_, _| {})?;
    Ensemble::new(members, vocab.clone(), TokenizerMode::default())
}
