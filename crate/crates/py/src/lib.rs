//! Python bindings: `import abusivetext_py`.
//!
//! Labels cross the boundary as strings (`"Abusive"`, `"Non-Abusive"`, or
//! any spelling `map_label` accepts); examples as `(id, text, label)`
//! tuples.

use std::collections::BTreeMap;

use abusivetext::bundle::ModelBundle;
use abusivetext::corpus::{self, DatasetSplit, Label, LabeledExample, SplitName, SynthProfile};
use abusivetext::linear::{self, DEFAULT_THRESHOLD};
use abusivetext::metrics::{self, ClassReport};
use abusivetext::pipeline::{self, RunConfig};
use abusivetext::textprep::{self, CleanPolicy};
use abusivetext::vectorizer::{self, TfIdfConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_label(raw: &str) -> PyResult<Label> {
    corpus::map_label(raw).map_err(value_error)
}

fn parse_labels(raw: &[String]) -> PyResult<Vec<Label>> {
    raw.iter().map(|l| parse_label(l)).collect()
}

/// Cleans one comment. All steps are on by default.
#[pyfunction]
#[pyo3(signature = (text, remove_urls=true, strip_specials=true, collapse_whitespace=true, lowercase_latin=true))]
fn preprocess(
    text: &str,
    remove_urls: bool,
    strip_specials: bool,
    collapse_whitespace: bool,
    lowercase_latin: bool,
) -> String {
    let policy = CleanPolicy {
        remove_urls,
        strip_specials,
        collapse_whitespace,
        lowercase_latin,
    };
    textprep::preprocess(text, &policy)
}

/// Canonical label string for a raw annotation.
#[pyfunction]
fn map_label(raw: &str) -> PyResult<&'static str> {
    parse_label(raw).map(Label::as_str)
}

/// A labeled synthetic corpus as `(id, text, label)` tuples.
#[pyfunction]
#[pyo3(signature = (seed, n_per_class, lexicon_seed=0))]
fn synth_corpus(seed: u64, n_per_class: usize, lexicon_seed: u64) -> Vec<(String, String, &'static str)> {
    let profile = SynthProfile {
        lexicon_seed,
        ..SynthProfile::default()
    };
    corpus::synth_corpus(seed, n_per_class, &profile)
        .examples()
        .iter()
        .map(|e| (e.id.clone(), e.text.clone(), e.label.map_or("", Label::as_str)))
        .collect()
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct SparseVector {
    inner: vectorizer::SparseVector,
}

#[pymethods]
impl SparseVector {
    #[new]
    fn new(dimension: usize, entries: Vec<(usize, f64)>) -> PyResult<Self> {
        if let Some((i, _)) = entries.iter().find(|(i, _)| *i >= dimension) {
            return Err(value_error(format!(
                "index {i} out of bounds for dimension {dimension}"
            )));
        }
        Ok(Self {
            inner: vectorizer::SparseVector::from_entries(dimension, entries),
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn entries(&self) -> Vec<(usize, f64)> {
        self.inner.entries().to_vec()
    }

    fn to_dense(&self) -> Vec<f64> {
        self.inner.to_dense()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn __len__(&self) -> usize {
        self.inner.dimension()
    }

    fn __repr__(&self) -> String {
        format!(
            "SparseVector(dimension={}, nnz={})",
            self.inner.dimension(),
            self.inner.nnz()
        )
    }
}

#[pyclass(frozen)]
struct TfIdf {
    inner: vectorizer::TfIdfModel,
}

#[pymethods]
impl TfIdf {
    /// Fits on already-cleaned texts.
    #[staticmethod]
    #[pyo3(signature = (corpus, min_df=1, max_vocab=None, ngram_max=1, l2_normalize=true))]
    fn fit(
        corpus: Vec<String>,
        min_df: usize,
        max_vocab: Option<usize>,
        ngram_max: usize,
        l2_normalize: bool,
    ) -> PyResult<Self> {
        let config = TfIdfConfig {
            min_df,
            max_vocab,
            ngram_max,
            l2_normalize,
        };
        let inner = vectorizer::TfIdfModel::fit(&corpus, &config).map_err(value_error)?;
        Ok(Self { inner })
    }

    fn transform(&self, text: &str) -> SparseVector {
        SparseVector {
            inner: self.inner.transform(text),
        }
    }

    #[getter]
    fn vocabulary(&self) -> Vec<String> {
        self.inner.vocab().tokens().to_vec()
    }

    #[getter]
    fn idf(&self) -> Vec<f64> {
        self.inner.idf().to_vec()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
}

#[pyclass(frozen)]
struct LogisticRegression {
    inner: linear::LinearModel,
    #[pyo3(get)]
    epoch_losses: Vec<f64>,
}

#[pymethods]
impl LogisticRegression {
    #[staticmethod]
    #[pyo3(signature = (features, labels, learning_rate=0.1, epochs=50, batch_size=32, l2_penalty=1e-4, seed=0, shuffle=true))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        features: Vec<SparseVector>,
        labels: Vec<String>,
        learning_rate: f64,
        epochs: usize,
        batch_size: usize,
        l2_penalty: f64,
        seed: u64,
        shuffle: bool,
    ) -> PyResult<Self> {
        if features.len() != labels.len() {
            return Err(value_error(format!(
                "{} features but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let data: Vec<_> = features
            .into_iter()
            .map(|f| f.inner)
            .zip(parse_labels(&labels)?)
            .collect();
        let config = linear::TrainConfigLR {
            learning_rate,
            epochs,
            batch_size,
            l2_penalty,
            seed,
            shuffle,
        };
        let (inner, report) = linear::train_lr(&data, &config).map_err(value_error)?;
        Ok(Self {
            inner,
            epoch_losses: report.epoch_losses,
        })
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.inner.bias()
    }

    fn predict_proba(&self, x: &SparseVector) -> PyResult<f64> {
        self.inner.predict_proba(&x.inner).map_err(value_error)
    }

    #[pyo3(signature = (x, threshold=DEFAULT_THRESHOLD))]
    fn predict(&self, x: &SparseVector, threshold: f64) -> PyResult<&'static str> {
        Ok(linear::decide(self.predict_proba(x)?, threshold).as_str())
    }
}

#[pyclass(frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct ConfusionMatrix {
    #[pyo3(get)]
    tp: u64,
    #[pyo3(get, name = "fn_")]
    fn_: u64,
    #[pyo3(get)]
    fp: u64,
    #[pyo3(get)]
    tn: u64,
}

impl ConfusionMatrix {
    fn core(&self) -> metrics::ConfusionMatrix {
        metrics::ConfusionMatrix::new(self.tp, self.fn_, self.fp, self.tn)
    }
}

#[pymethods]
impl ConfusionMatrix {
    #[new]
    fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        Self { tp, fn_, fp, tn }
    }

    fn macro_f1(&self) -> f64 {
        metrics::macro_f1(&self.core())
    }

    fn accuracy(&self) -> f64 {
        self.core().accuracy()
    }

    fn __repr__(&self) -> String {
        format!(
            "ConfusionMatrix(tp={}, fn_={}, fp={}, tn={})",
            self.tp, self.fn_, self.fp, self.tn
        )
    }
}

/// Confusion counts with Abusive as the positive class.
#[pyfunction]
fn confusion(gold: Vec<String>, pred: Vec<String>) -> PyResult<ConfusionMatrix> {
    let cm = metrics::confusion(&parse_labels(&gold)?, &parse_labels(&pred)?).map_err(value_error)?;
    Ok(ConfusionMatrix::new(cm.tp, cm.fn_, cm.fp, cm.tn))
}

#[pyfunction]
fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    cm.macro_f1()
}

#[pyclass(frozen, name = "ClassReport")]
struct PyClassReport {
    inner: ClassReport,
}

#[pymethods]
impl PyClassReport {
    #[staticmethod]
    fn evaluate(gold: Vec<String>, pred: Vec<String>) -> PyResult<Self> {
        let inner = ClassReport::evaluate(&parse_labels(&gold)?, &parse_labels(&pred)?).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn macro_f1(&self) -> f64 {
        self.inner.macro_f1
    }

    #[getter]
    fn accuracy(&self) -> f64 {
        self.inner.accuracy
    }

    /// `{label: (precision, recall, f1)}`.
    #[getter]
    fn per_class(&self) -> BTreeMap<&'static str, (f64, f64, f64)> {
        self.inner
            .per_class
            .iter()
            .map(|(l, s)| (l.as_str(), (s.precision, s.recall, s.f1)))
            .collect()
    }

    #[getter]
    fn confusion(&self) -> ConfusionMatrix {
        let c = &self.inner.confusion;
        ConfusionMatrix::new(c.tp, c.fn_, c.fp, c.tn)
    }

    fn to_json(&self) -> String {
        pipeline::report_json(&self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

fn to_split(rows: Vec<(String, String, String)>, name: SplitName) -> PyResult<DatasetSplit> {
    let examples = rows
        .into_iter()
        .map(|(id, text, label)| {
            let label = if label.is_empty() {
                None
            } else {
                Some(parse_label(&label)?)
            };
            Ok(LabeledExample { id, text, label })
        })
        .collect::<PyResult<Vec<_>>>()?;
    DatasetSplit::new(name, "", examples).map_err(value_error)
}

/// A trained classifier bound to its preprocessing and features.
#[pyclass(frozen)]
struct Bundle {
    bundle: ModelBundle,
    classifier: abusivetext::Classifier,
}

impl Bundle {
    fn wrap(bundle: ModelBundle) -> PyResult<Self> {
        let classifier = bundle.classifier().map_err(value_error)?;
        Ok(Self { bundle, classifier })
    }
}

#[pymethods]
impl Bundle {
    /// Trains from `(id, text, label)` rows. `config` is a TOML run config.
    #[staticmethod]
    #[pyo3(signature = (train, dev=None, config=None))]
    fn train(
        train: Vec<(String, String, String)>,
        dev: Option<Vec<(String, String, String)>>,
        config: Option<&str>,
    ) -> PyResult<Self> {
        let mut cfg = match config {
            Some(text) => RunConfig::from_toml(text).map_err(value_error)?,
            None => RunConfig::default(),
        };
        cfg.resolve_seed().map_err(value_error)?;
        let train = to_split(train, SplitName::Train)?;
        let dev = dev.map(|d| to_split(d, SplitName::Dev)).transpose()?;
        let (bundle, _) = pipeline::train_bundle(&cfg, &train, dev.as_ref()).map_err(value_error)?;
        Self::wrap(bundle)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Self::wrap(ModelBundle::from_json(text).map_err(value_error)?)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path)?;
        Self::from_json(&text)
    }

    fn to_json(&self) -> String {
        self.bundle.to_json()
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        Ok(std::fs::write(path, self.bundle.to_json())?)
    }

    #[getter]
    fn model_kind(&self) -> String {
        self.bundle.model_kind.to_string()
    }

    #[getter]
    fn language_tag(&self) -> &str {
        &self.bundle.language_tag
    }

    /// Probability that a raw comment is abusive.
    fn predict_proba(&self, text: &str) -> PyResult<f64> {
        self.classifier.predict_proba(text).map_err(value_error)
    }

    /// `(probability, label)` per raw comment.
    fn predict(&self, texts: Vec<String>) -> PyResult<Vec<(f64, &'static str)>> {
        texts
            .iter()
            .map(|t| {
                let p = self.predict_proba(t)?;
                Ok((p, linear::decide(p, DEFAULT_THRESHOLD).as_str()))
            })
            .collect()
    }
}

#[pymodule]
fn abusivetext_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(map_label, m)?)?;
    m.add_function(wrap_pyfunction!(synth_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(confusion, m)?)?;
    m.add_function(wrap_pyfunction!(macro_f1, m)?)?;
    m.add_class::<SparseVector>()?;
    m.add_class::<TfIdf>()?;
    m.add_class::<LogisticRegression>()?;
    m.add_class::<ConfusionMatrix>()?;
    m.add_class::<PyClassReport>()?;
    m.add_class::<Bundle>()?;
    m.add("FORMAT_VERSION", abusivetext::bundle::FORMAT_VERSION)?;
    Ok(())
}
