//! Confusion matrices, per-class precision/recall/F1 and macro-F1.
//!
//! Abusive is the positive class. Any 0/0 ratio evaluates to 0. Macro-F1
//! is the unweighted mean of the two per-class F1 scores.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("gold has {gold} labels but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("no labels to evaluate")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        Self { tp, fn_, fp, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    /// The matrix seen with Non-Abusive as the positive class.
    pub fn swapped(&self) -> Self {
        Self::new(self.tn, self.fp, self.fn_, self.tp)
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }
}

pub fn confusion(gold: &[Label], pred: &[Label]) -> Result<ConfusionMatrix, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut cm = ConfusionMatrix::default();
    for (g, p) in gold.iter().zip(pred) {
        match (g, p) {
            (Label::Abusive, Label::Abusive) => cm.tp += 1,
            (Label::Abusive, Label::NonAbusive) => cm.fn_ += 1,
            (Label::NonAbusive, Label::Abusive) => cm.fp += 1,
            (Label::NonAbusive, Label::NonAbusive) => cm.tn += 1,
        }
    }
    Ok(cm)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn scores(tp: u64, fn_: u64, fp: u64) -> ClassScores {
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    ClassScores {
        precision,
        recall,
        f1: harmonic(precision, recall),
    }
}

pub fn per_class_prf(cm: &ConfusionMatrix) -> BTreeMap<Label, ClassScores> {
    BTreeMap::from([
        (Label::Abusive, scores(cm.tp, cm.fn_, cm.fp)),
        (Label::NonAbusive, scores(cm.tn, cm.fp, cm.fn_)),
    ])
}

pub fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    let per = per_class_prf(cm);
    per.values().map(|s| s.f1).sum::<f64>() / per.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub per_class: BTreeMap<Label, ClassScores>,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

impl ClassReport {
    pub fn from_confusion(cm: ConfusionMatrix) -> Self {
        Self {
            per_class: per_class_prf(&cm),
            macro_f1: macro_f1(&cm),
            accuracy: cm.accuracy(),
            confusion: cm,
        }
    }

    pub fn evaluate(gold: &[Label], pred: &[Label]) -> Result<Self, MetricsError> {
        confusion(gold, pred).map(Self::from_confusion)
    }
}

impl fmt::Display for ClassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:>9} {:>9} {:>9}", "class", "precision", "recall", "f1")?;
        for label in [Label::NonAbusive, Label::Abusive] {
            let s = &self.per_class[&label];
            writeln!(
                f,
                "{:<12} {:>9.4} {:>9.4} {:>9.4}",
                label.as_str(),
                s.precision,
                s.recall,
                s.f1
            )?;
        }
        writeln!(f, "macro_f1     {:.4}", self.macro_f1)?;
        writeln!(f, "accuracy     {:.4}", self.accuracy)?;
        let c = &self.confusion;
        writeln!(f, "confusion    tp={} fn={} fp={} tn={}", c.tp, c.fn_, c.fp, c.tn)
    }
}
