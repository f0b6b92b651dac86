//! End-to-end train / predict / evaluate flow shared by the CLI and the
//! Python bindings.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundle::{BundleError, Classifier, MicroEncoderPayload, ModelBundle, ModelKind, Payload, TfidfLrPayload};
use crate::corpus::{compute_stats, CorpusError, DatasetSplit, DatasetStats, Label, TableFormat};
use crate::encoder::{
    self, EncoderConfig, EncoderError, EncoderRecord, LabeledInput, SubwordTokenizer, TokenizerRecord, TrainConfigEnc,
};
use crate::linear::{self, decide, LinearError, TrainConfigLR, DEFAULT_THRESHOLD};
use crate::metrics::{ClassReport, MetricsError};
use crate::textprep::{preprocess, CleanPolicy};
use crate::vectorizer::{TfIdfConfig, TfIdfModel, TfIdfRecord, VectorizerError};

pub const SEED_ENV: &str = "ABUSIVETEXT_SEED";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Vectorizer(#[from] VectorizerError),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("the micro_encoder arm needs a dev split for per-epoch evaluation")]
    DevRequired,
    #[error("gold and prediction ids do not align: {}", .offenders.join(", "))]
    IdMismatch { offenders: Vec<String>, total: usize },
    #[error("invalid run config: {0}")]
    Config(String),
}

/// Everything needed to reproduce a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model_kind: ModelKind,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: TableFormat,
    pub language_tag: String,
    /// Overrides the per-arm seeds when set.
    pub seed: Option<u64>,
    pub subword_vocab_size: usize,
    pub preprocessing: CleanPolicy,
    pub tfidf: TfIdfConfig,
    pub lr: TrainConfigLR,
    pub encoder: EncoderConfig,
    pub encoder_train: TrainConfigEnc,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model_kind: ModelKind::TfidfLr,
            train: None,
            dev: None,
            test: None,
            model: None,
            output: None,
            format: TableFormat::Tsv,
            language_tag: String::new(),
            seed: None,
            subword_vocab_size: 1000,
            preprocessing: CleanPolicy::default(),
            tfidf: TfIdfConfig::default(),
            lr: TrainConfigLR::default(),
            encoder: EncoderConfig::default(),
            encoder_train: TrainConfigEnc::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Fills a missing seed from `ABUSIVETEXT_SEED`, then copies it into
    /// both arms' training configs.
    pub fn resolve_seed(&mut self) -> Result<(), PipelineError> {
        if self.seed.is_none() {
            if let Ok(raw) = std::env::var(SEED_ENV) {
                let seed = raw
                    .trim()
                    .parse()
                    .map_err(|_| PipelineError::Config(format!("{SEED_ENV}={raw:?} is not an integer")))?;
                self.seed = Some(seed);
            }
        }
        if let Some(seed) = self.seed {
            self.lr.seed = seed;
            self.encoder_train.seed = seed;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub model_kind: ModelKind,
    pub train_stats: DatasetStats,
    pub dev_stats: Option<DatasetStats>,
    /// Per-epoch training objective.
    pub epoch_losses: Vec<f64>,
    /// Per-epoch dev macro-F1 (encoder arm only).
    pub epoch_dev_macro_f1: Vec<f64>,
    /// Final model on the dev split, when one was given.
    pub dev_report: Option<ClassReport>,
}

fn labels_of(split: &DatasetSplit) -> Vec<Label> {
    split
        .examples()
        .iter()
        .map(|e| e.label.expect("train/dev splits are labeled"))
        .collect()
}

fn cleaned(split: &DatasetSplit, policy: &CleanPolicy) -> Vec<String> {
    split.texts().map(|t| preprocess(t, policy)).collect()
}

/// Fits the configured arm on `train` and packages it as a bundle.
pub fn train_bundle(
    config: &RunConfig,
    train: &DatasetSplit,
    dev: Option<&DatasetSplit>,
) -> Result<(ModelBundle, TrainSummary), PipelineError> {
    if train.is_empty() {
        return Err(PipelineError::Linear(LinearError::EmptyData));
    }
    let policy = config.preprocessing;
    let train_texts = cleaned(train, &policy);
    let train_labels = labels_of(train);
    let train_stats = compute_stats(train);

    let (payload, epoch_losses, epoch_dev_macro_f1) = match config.model_kind {
        ModelKind::TfidfLr => {
            let vectorizer = TfIdfModel::fit(&train_texts, &config.tfidf)?;
            let data: Vec<_> = train_texts
                .iter()
                .map(|t| vectorizer.transform(t))
                .zip(train_labels)
                .collect();
            let (model, report) = linear::train_lr(&data, &config.lr)?;
            let losses = report.epoch_losses.clone();
            let payload = Payload::TfidfLr(TfidfLrPayload {
                vectorizer: TfIdfRecord::from(&vectorizer),
                linear: model,
                train_config: config.lr.clone(),
                report,
            });
            (payload, losses, Vec::new())
        }
        ModelKind::MicroEncoder => {
            let dev = dev.ok_or(PipelineError::DevRequired)?;
            let tokenizer = SubwordTokenizer::train(&train_texts, config.subword_vocab_size)?;
            let max_length = config.encoder.max_length;
            let encode = |texts: &[String], labels: Vec<Label>| -> Vec<LabeledInput> {
                texts
                    .iter()
                    .map(|t| tokenizer.encode(t, max_length))
                    .zip(labels)
                    .collect()
            };
            let train_inputs = encode(&train_texts, train_labels);
            let dev_inputs = encode(&cleaned(dev, &policy), labels_of(dev));
            let (model, report) = encoder::train_encoder(
                &train_inputs,
                &dev_inputs,
                tokenizer.vocab_len(),
                &config.encoder,
                &config.encoder_train,
            )?;
            let losses = report.epochs.iter().map(|e| e.train_loss).collect();
            let f1s = report.epochs.iter().filter_map(|e| e.dev_macro_f1).collect();
            let payload = Payload::MicroEncoder(MicroEncoderPayload {
                tokenizer: TokenizerRecord::from(&tokenizer),
                encoder: EncoderRecord::from(&model),
                train_config: config.encoder_train.clone(),
                report,
            });
            (payload, losses, f1s)
        }
    };

    let bundle = ModelBundle::new(config.language_tag.clone(), policy, train_stats.clone(), payload);
    let dev_report = match dev {
        Some(d) if !d.is_empty() => {
            let classifier = bundle.classifier()?;
            let preds = predict(&classifier, d)?;
            let pred_labels: Vec<Label> = preds.iter().map(|p| p.label).collect();
            Some(ClassReport::evaluate(&labels_of(d), &pred_labels)?)
        }
        _ => None,
    };
    let summary = TrainSummary {
        model_kind: config.model_kind,
        train_stats,
        dev_stats: dev.map(compute_stats),
        epoch_losses,
        epoch_dev_macro_f1,
        dev_report,
    };
    Ok((bundle, summary))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub probability: f64,
    pub label: Label,
}

/// Scores every example of `split` in input order.
pub fn predict(classifier: &Classifier, split: &DatasetSplit) -> Result<Vec<Prediction>, PipelineError> {
    split
        .examples()
        .iter()
        .map(|ex| {
            let probability = classifier.predict_proba(&ex.text)?;
            Ok(Prediction {
                id: ex.id.clone(),
                probability,
                label: decide(probability, DEFAULT_THRESHOLD),
            })
        })
        .collect()
}

/// Writes `id\tprobability\tlabel` rows with 6-decimal probabilities.
pub fn write_predictions<W: Write>(predictions: &[Prediction], mut out: W) -> std::io::Result<()> {
    writeln!(out, "id\tprobability\tlabel")?;
    for p in predictions {
        writeln!(out, "{}\t{:.6}\t{}", p.id, p.probability, p.label)?;
    }
    Ok(())
}

pub fn predictions_tsv(predictions: &[Prediction]) -> String {
    let mut buf = Vec::new();
    write_predictions(predictions, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("predictions are UTF-8")
}

/// Joins gold and predicted labels on id (in gold order) and scores them.
///
/// Every gold id must have exactly one prediction and vice versa; up to
/// ten offending ids are reported otherwise.
pub fn evaluate_pairs(gold: &[(String, Label)], pred: &[(String, Label)]) -> Result<ClassReport, PipelineError> {
    let by_id: HashMap<&str, Label> = pred.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    let gold_ids: BTreeMap<&str, ()> = gold.iter().map(|(id, _)| (id.as_str(), ())).collect();
    let mut offenders: Vec<String> = gold
        .iter()
        .filter(|(id, _)| !by_id.contains_key(id.as_str()))
        .map(|(id, _)| id.clone())
        .chain(
            pred.iter()
                .filter(|(id, _)| !gold_ids.contains_key(id.as_str()))
                .map(|(id, _)| id.clone()),
        )
        .collect();
    if !offenders.is_empty() {
        let total = offenders.len();
        offenders.truncate(10);
        return Err(PipelineError::IdMismatch { offenders, total });
    }
    let gold_labels: Vec<Label> = gold.iter().map(|(_, l)| *l).collect();
    let pred_labels: Vec<Label> = gold.iter().map(|(id, _)| by_id[id.as_str()]).collect();
    Ok(ClassReport::evaluate(&gold_labels, &pred_labels)?)
}

/// Pretty JSON with a trailing newline.
pub fn report_json(report: &ClassReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synth_corpus, SplitName, SynthProfile};

    #[test]
    fn run_config_round_trips_and_rejects_unknown_keys() {
        let text = r#"
model_kind = "micro_encoder"
train = "train.tsv"
dev = "dev.tsv"
seed = 3

[encoder_train]
learning_rate = 0.001
epochs = 7
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.model_kind, ModelKind::MicroEncoder);
        assert_eq!(cfg.encoder_train.epochs, 7);
        assert_eq!(cfg.encoder_train.batch_size, 32);
        let echoed = cfg.to_toml();
        assert_eq!(RunConfig::from_toml(&echoed).unwrap(), cfg);
        assert!(RunConfig::from_toml("bogus = 1").is_err());
        assert!(RunConfig::from_toml("[lr]\nmomentum = 0.9").is_err());
    }

    #[test]
    fn explicit_seed_reaches_both_arms() {
        let mut cfg = RunConfig {
            seed: Some(42),
            ..RunConfig::default()
        };
        cfg.resolve_seed().unwrap();
        assert_eq!((cfg.lr.seed, cfg.encoder_train.seed), (42, 42));
    }

    #[test]
    fn encoder_arm_requires_dev() {
        let train = synth_corpus(1, 5, &SynthProfile::default());
        let cfg = RunConfig {
            model_kind: ModelKind::MicroEncoder,
            ..RunConfig::default()
        };
        assert!(matches!(
            train_bundle(&cfg, &train, None),
            Err(PipelineError::DevRequired)
        ));
    }

    #[test]
    fn evaluate_joins_by_id() {
        let gold = vec![("a".to_string(), Label::Abusive), ("b".to_string(), Label::NonAbusive)];
        let pred = vec![("b".to_string(), Label::NonAbusive), ("a".to_string(), Label::Abusive)];
        assert_eq!(evaluate_pairs(&gold, &pred).unwrap().macro_f1, 1.0);
        let extra = vec![("a".to_string(), Label::Abusive), ("z".to_string(), Label::Abusive)];
        match evaluate_pairs(&gold, &extra) {
            Err(PipelineError::IdMismatch { offenders, total }) => {
                assert_eq!(offenders, ["b", "z"]);
                assert_eq!(total, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn offender_list_is_capped() {
        let gold: Vec<_> = (0..25).map(|i| (format!("g{i}"), Label::Abusive)).collect();
        match evaluate_pairs(&gold, &[]) {
            Err(PipelineError::IdMismatch { offenders, total }) => {
                assert_eq!(offenders.len(), 10);
                assert_eq!(total, 25);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tfidf_lr_bundle_predicts_training_data() {
        let p = SynthProfile::default();
        let train = synth_corpus(7, 40, &p);
        let dev = synth_corpus(8, 20, &p).with_name(SplitName::Dev).unwrap();
        let mut cfg = RunConfig {
            seed: Some(7),
            ..RunConfig::default()
        };
        cfg.resolve_seed().unwrap();
        let (bundle, summary) = train_bundle(&cfg, &train, Some(&dev)).unwrap();
        assert_eq!(summary.epoch_losses.len(), cfg.lr.epochs);
        assert!(summary.dev_report.unwrap().macro_f1 >= 0.95);
        let reloaded = ModelBundle::from_json(&bundle.to_json()).unwrap();
        assert_eq!(reloaded.to_json(), bundle.to_json());
        let preds = predict(&reloaded.classifier().unwrap(), &train).unwrap();
        let tsv = predictions_tsv(&preds);
        assert!(tsv.starts_with("id\tprobability\tlabel\n"));
        assert_eq!(tsv.lines().count(), train.len() + 1);
    }
}
