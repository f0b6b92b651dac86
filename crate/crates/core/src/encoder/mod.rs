//! Desk-scale transformer-encoder classifier.
//!
//! A corpus-trained subword tokenizer feeds a small post-norm encoder
//! trained from scratch; the CLS position's final vector goes through a
//! single-logit sigmoid head. Training defaults mirror the usual BERT
//! fine-tuning regime (lr 1e-5, 5 epochs, batch 32, 128 tokens, per-epoch
//! evaluation); from-scratch runs will want a larger learning rate.

mod model;
mod tokenizer;

pub use model::{EncoderModel, EncoderParams, ForwardTrace, LayerParams, LayerTrace, TensorRecord};
pub use tokenizer::{EncodedInput, SubwordTokenizer, TokenizerRecord, CLS_ID, PAD_ID, UNK_ID};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::linear::{decide, DEFAULT_THRESHOLD};
use crate::metrics::ClassReport;

#[derive(Debug, Error, PartialEq)]
pub enum EncoderError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("no training data")]
    EmptyData,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid encoder config: {0}")]
    InvalidConfig(String),
    #[error("inconsistent encoder state: {0}")]
    Inconsistent(String),
}

pub const MAX_LENGTH: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncoderConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub max_length: usize,
    pub dropout: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            d_model: 64,
            n_heads: 4,
            n_layers: 2,
            d_ff: 128,
            max_length: MAX_LENGTH,
            dropout: 0.0,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), EncoderError> {
        let bad = |m: String| Err(EncoderError::InvalidConfig(m));
        if self.d_model == 0 || self.n_heads == 0 || self.d_ff == 0 {
            return bad("d_model, n_heads and d_ff must be positive".into());
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return bad(format!(
                "d_model {} not divisible by n_heads {}",
                self.d_model, self.n_heads
            ));
        }
        if self.max_length < 1 {
            return bad("max_length must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EvalStrategy {
    #[default]
    #[serde(rename = "epoch")]
    PerEpoch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfigEnc {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub eval_strategy: EvalStrategy,
    pub seed: u64,
}

impl Default for TrainConfigEnc {
    fn default() -> Self {
        Self {
            learning_rate: 1e-5,
            epochs: 5,
            batch_size: 32,
            eval_strategy: EvalStrategy::PerEpoch,
            seed: 0,
        }
    }
}

impl TrainConfigEnc {
    pub fn validate(&self) -> Result<(), EncoderError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(EncoderError::InvalidConfig(
                "learning_rate must be finite and >= 0".into(),
            ));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(EncoderError::InvalidConfig("epochs and batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean per-batch loss seen during the epoch.
    pub train_loss: f64,
    pub dev_macro_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderTrainingReport {
    pub n_train: usize,
    pub n_dev: usize,
    pub epochs: Vec<EpochRecord>,
}

pub type LabeledInput = (EncodedInput, Label);

/// Predicted labels for `inputs` at the default threshold.
pub fn predict_labels(model: &EncoderModel, inputs: &[LabeledInput]) -> Result<Vec<Label>, EncoderError> {
    inputs
        .iter()
        .map(|(x, _)| model.forward(x).map(|p| decide(p, DEFAULT_THRESHOLD)))
        .collect()
}

/// Plain mini-batch gradient descent for a fixed number of epochs.
///
/// The seed drives parameter init, per-epoch shuffling and dropout. Dev
/// macro-F1 is recorded after every epoch when `dev` is non-empty but never
/// used to pick a model: the final-epoch parameters are returned.
pub fn train_encoder(
    train: &[LabeledInput],
    dev: &[LabeledInput],
    vocab_len: usize,
    config: &EncoderConfig,
    train_config: &TrainConfigEnc,
) -> Result<(EncoderModel, EncoderTrainingReport), EncoderError> {
    train_config.validate()?;
    if train.is_empty() {
        return Err(EncoderError::EmptyData);
    }
    let mut model = EncoderModel::init(config.clone(), vocab_len, train_config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(train_config.seed ^ 0x5e_ed0f_5a17);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut epochs = Vec::with_capacity(train_config.epochs);
    let dev_gold: Vec<Label> = dev.iter().map(|(_, y)| *y).collect();

    for epoch in 1..=train_config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut n_batches = 0;
        for chunk in order.chunks(train_config.batch_size) {
            let batch: Vec<(&EncodedInput, Label)> = chunk.iter().map(|&i| (&train[i].0, train[i].1)).collect();
            let (loss, grad) = model.loss_and_gradient_with(&batch, Some(&mut rng))?;
            model.params_mut().apply_update(&grad, train_config.learning_rate);
            loss_sum += loss;
            n_batches += 1;
        }
        if !model.params().all_finite() {
            return Err(EncoderError::Inconsistent(format!(
                "parameters diverged in epoch {epoch}"
            )));
        }
        let dev_macro_f1 = if dev.is_empty() {
            None
        } else {
            let pred = predict_labels(&model, dev)?;
            Some(
                ClassReport::evaluate(&dev_gold, &pred)
                    .expect("non-empty, equal length")
                    .macro_f1,
            )
        };
        epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / n_batches as f64,
            dev_macro_f1,
        });
    }
    Ok((
        model,
        EncoderTrainingReport {
            n_train: train.len(),
            n_dev: dev.len(),
            epochs,
        },
    ))
}

/// On-disk layout of an [`EncoderModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderRecord {
    pub config: EncoderConfig,
    pub tensors: Vec<TensorRecord>,
}

impl From<&EncoderModel> for EncoderRecord {
    fn from(m: &EncoderModel) -> Self {
        Self {
            config: m.config().clone(),
            tensors: model::params_to_records(m.params()),
        }
    }
}

impl TryFrom<EncoderRecord> for EncoderModel {
    type Error = EncoderError;

    fn try_from(r: EncoderRecord) -> Result<Self, Self::Error> {
        r.config.validate()?;
        let params = model::params_from_records(&r.config, r.tensors)?;
        EncoderModel::new(r.config, params)
    }
}
