//! Logistic regression over sparse TF-IDF vectors, trained by mini-batch
//! gradient descent on mean binary cross-entropy with an L2 penalty.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::vectorizer::SparseVector;

#[derive(Debug, Error, PartialEq)]
pub enum LinearError {
    #[error("dimension mismatch: model has {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no training data")]
    EmptyData,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("model contains non-finite parameters")]
    NonFinite,
}

/// Numerically stable logistic function.
///
/// The result is clamped to the open interval (0, 1), so very negative
/// inputs return `f64::MIN_POSITIVE` instead of underflowing to zero.
pub fn sigmoid(z: f64) -> f64 {
    const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, BELOW_ONE)
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Binary cross-entropy of a logit against a 0/1 target.
pub fn bce_with_logit(logit: f64, target: f64) -> f64 {
    softplus(logit) - target * logit
}

/// Abusive iff `p >= threshold`.
pub fn decide(p: f64, threshold: f64) -> Label {
    if p >= threshold {
        Label::Abusive
    } else {
        Label::NonAbusive
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModel {
    weights: Vec<f64>,
    bias: f64,
}

impl LinearModel {
    pub fn zeros(dimension: usize) -> Self {
        Self {
            weights: vec![0.0; dimension],
            bias: 0.0,
        }
    }

    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self, LinearError> {
        let m = Self { weights, bias };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), LinearError> {
        if self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite()) {
            Ok(())
        } else {
            Err(LinearError::NonFinite)
        }
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    fn check(&self, x: &SparseVector) -> Result<(), LinearError> {
        if x.dimension() != self.dimension() {
            return Err(LinearError::DimensionMismatch {
                expected: self.dimension(),
                found: x.dimension(),
            });
        }
        Ok(())
    }

    pub fn logit(&self, x: &SparseVector) -> Result<f64, LinearError> {
        self.check(x)?;
        Ok(x.dot_dense(&self.weights) + self.bias)
    }

    pub fn predict_proba(&self, x: &SparseVector) -> Result<f64, LinearError> {
        self.logit(x).map(sigmoid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfigLR {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2_penalty: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfigLR {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 50,
            batch_size: 32,
            l2_penalty: 1e-4,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfigLR {
    pub fn validate(&self) -> Result<(), LinearError> {
        let bad = |m: &str| Err(LinearError::InvalidConfig(m.into()));
        // A zero step is accepted; it leaves the zero model untouched.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and >= 0");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return bad("l2_penalty must be finite and >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrTrainingReport {
    pub n_examples: usize,
    /// Full-data objective after each epoch.
    pub epoch_losses: Vec<f64>,
    /// Set when the training data contained only one class.
    pub single_class: bool,
}

fn target(label: Label) -> f64 {
    f64::from(label.value())
}

/// Mean cross-entropy plus `(l2 / 2) * ||w||^2` over `data`.
pub fn objective(model: &LinearModel, data: &[(SparseVector, Label)], l2_penalty: f64) -> Result<f64, LinearError> {
    if data.is_empty() {
        return Err(LinearError::EmptyData);
    }
    let mut total = 0.0;
    for (x, y) in data {
        total += bce_with_logit(model.logit(x)?, target(*y));
    }
    let penalty = 0.5 * l2_penalty * model.weights.iter().map(|w| w * w).sum::<f64>();
    Ok(total / data.len() as f64 + penalty)
}

/// Gradient of [`objective`] with respect to (weights, bias).
pub fn gradient(
    model: &LinearModel,
    batch: &[&(SparseVector, Label)],
    l2_penalty: f64,
) -> Result<(Vec<f64>, f64), LinearError> {
    if batch.is_empty() {
        return Err(LinearError::EmptyData);
    }
    let scale = 1.0 / batch.len() as f64;
    let mut gw: Vec<f64> = model.weights.iter().map(|w| l2_penalty * w).collect();
    let mut gb = 0.0;
    for (x, y) in batch {
        let residual = (sigmoid(model.logit(x)?) - target(*y)) * scale;
        for (i, v) in x.entries() {
            gw[*i] += residual * v;
        }
        gb += residual;
    }
    Ok((gw, gb))
}

/// Trains from a zero model; returns the final-epoch model.
pub fn train_lr(
    data: &[(SparseVector, Label)],
    config: &TrainConfigLR,
) -> Result<(LinearModel, LrTrainingReport), LinearError> {
    config.validate()?;
    let first = data.first().ok_or(LinearError::EmptyData)?;
    let dimension = first.0.dimension();
    if let Some((x, _)) = data.iter().find(|(x, _)| x.dimension() != dimension) {
        return Err(LinearError::DimensionMismatch {
            expected: dimension,
            found: x.dimension(),
        });
    }
    let single_class = data.iter().all(|(_, y)| *y == first.1);

    let mut model = LinearModel::zeros(dimension);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&(SparseVector, Label)> = chunk.iter().map(|&i| &data[i]).collect();
            let (gw, gb) = gradient(&model, &batch, config.l2_penalty)?;
            for (w, g) in model.weights.iter_mut().zip(&gw) {
                *w -= config.learning_rate * g;
            }
            model.bias -= config.learning_rate * gb;
        }
        epoch_losses.push(objective(&model, data, config.l2_penalty)?);
    }
    model.validate()?;
    Ok((
        model,
        LrTrainingReport {
            n_examples: data.len(),
            epoch_losses,
            single_class,
        },
    ))
}
