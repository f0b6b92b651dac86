//! Versioned, self-describing JSON model bundles.
//!
//! A bundle binds a trained classifier to the preprocessing policy and
//! feature extractor it was trained with. Serialization is deterministic:
//! saving a loaded bundle reproduces the original bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::DatasetStats;
use crate::encoder::{
    EncoderError, EncoderModel, EncoderRecord, EncoderTrainingReport, SubwordTokenizer, TokenizerRecord, TrainConfigEnc,
};
use crate::linear::{LinearModel, LrTrainingReport, TrainConfigLR};
use crate::textprep::{preprocess, CleanPolicy};
use crate::vectorizer::{TfIdfModel, TfIdfRecord};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("bundle format version {found:?} is not supported (expected {FORMAT_VERSION})")]
    Version { found: Option<u64> },
    #[error("inconsistent bundle: {0}")]
    Inconsistent(String),
    #[error("malformed bundle: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<EncoderError> for BundleError {
    fn from(e: EncoderError) -> Self {
        BundleError::Inconsistent(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    TfidfLr,
    MicroEncoder,
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tfidf_lr" => Ok(ModelKind::TfidfLr),
            "micro_encoder" => Ok(ModelKind::MicroEncoder),
            other => Err(format!(
                "unknown model kind {other:?} (expected tfidf_lr or micro_encoder)"
            )),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::TfidfLr => "tfidf_lr",
            ModelKind::MicroEncoder => "micro_encoder",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfidfLrPayload {
    pub vectorizer: TfIdfRecord,
    pub linear: LinearModel,
    pub train_config: TrainConfigLR,
    pub report: LrTrainingReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroEncoderPayload {
    pub tokenizer: TokenizerRecord,
    pub encoder: EncoderRecord,
    pub train_config: TrainConfigEnc,
    pub report: EncoderTrainingReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    TfidfLr(TfidfLrPayload),
    MicroEncoder(MicroEncoderPayload),
}

impl Payload {
    pub fn kind(&self) -> ModelKind {
        match self {
            Payload::TfidfLr(_) => ModelKind::TfidfLr,
            Payload::MicroEncoder(_) => ModelKind::MicroEncoder,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBundle {
    pub format_version: u32,
    pub model_kind: ModelKind,
    pub language_tag: String,
    pub preprocessing: CleanPolicy,
    pub training_stats: DatasetStats,
    pub payload: Payload,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<serde_json::Value>,
}

impl ModelBundle {
    pub fn new(
        language_tag: String,
        preprocessing: CleanPolicy,
        training_stats: DatasetStats,
        payload: Payload,
    ) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            model_kind: payload.kind(),
            language_tag,
            preprocessing,
            training_stats,
            payload,
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    /// Parses and validates a bundle. The version is checked before the
    /// rest of the document, so a future layout is reported as a version
    /// mismatch rather than a schema error.
    pub fn from_json(text: &str) -> Result<Self, BundleError> {
        let probe: VersionProbe = serde_json::from_str(text)?;
        let found = probe.format_version.as_ref().and_then(serde_json::Value::as_u64);
        if found != Some(u64::from(FORMAT_VERSION)) {
            return Err(BundleError::Version { found });
        }
        let bundle: ModelBundle = serde_json::from_str(text)?;
        if bundle.model_kind != bundle.payload.kind() {
            return Err(BundleError::Inconsistent(format!(
                "model_kind {} does not match a {} payload",
                bundle.model_kind,
                bundle.payload.kind()
            )));
        }
        Ok(bundle)
    }

    /// Rebuilds the runnable classifier, checking that the feature
    /// extractor and the model agree on dimensions.
    pub fn classifier(&self) -> Result<Classifier, BundleError> {
        let model = match &self.payload {
            Payload::TfidfLr(p) => {
                let vectorizer =
                    TfIdfModel::try_from(p.vectorizer.clone()).map_err(|e| BundleError::Inconsistent(e.to_string()))?;
                p.linear
                    .validate()
                    .map_err(|e| BundleError::Inconsistent(e.to_string()))?;
                if vectorizer.dimension() != p.linear.dimension() {
                    return Err(BundleError::Inconsistent(format!(
                        "vectorizer has {} features but the linear model expects {}",
                        vectorizer.dimension(),
                        p.linear.dimension()
                    )));
                }
                ClassifierModel::TfidfLr {
                    vectorizer,
                    linear: p.linear.clone(),
                }
            }
            Payload::MicroEncoder(p) => {
                let tokenizer = SubwordTokenizer::try_from(p.tokenizer.clone())?;
                let encoder = EncoderModel::try_from(p.encoder.clone())?;
                if tokenizer.vocab_len() != encoder.vocab_len() {
                    return Err(BundleError::Inconsistent(format!(
                        "tokenizer has {} ids but the encoder embeds {}",
                        tokenizer.vocab_len(),
                        encoder.vocab_len()
                    )));
                }
                ClassifierModel::MicroEncoder { tokenizer, encoder }
            }
        };
        Ok(Classifier {
            policy: self.preprocessing,
            model,
        })
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum ClassifierModel {
    TfidfLr {
        vectorizer: TfIdfModel,
        linear: LinearModel,
    },
    MicroEncoder {
        tokenizer: SubwordTokenizer,
        encoder: EncoderModel,
    },
}

/// A loaded model together with the preprocessing it was trained under.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub policy: CleanPolicy,
    pub model: ClassifierModel,
}

impl Classifier {
    /// Probability that a raw (uncleaned) comment is abusive.
    pub fn predict_proba(&self, raw_text: &str) -> Result<f64, BundleError> {
        let text = preprocess(raw_text, &self.policy);
        match &self.model {
            ClassifierModel::TfidfLr { vectorizer, linear } => linear
                .predict_proba(&vectorizer.transform(&text))
                .map_err(|e| BundleError::Inconsistent(e.to_string())),
            ClassifierModel::MicroEncoder { tokenizer, encoder } => {
                let input = tokenizer.encode(&text, encoder.config().max_length);
                Ok(encoder.forward(&input)?)
            }
        }
    }
}
