//! Binary abusive-comment classification for code-mixed social-media text.
//!
//! Two model arms share one preprocessing and evaluation path:
//!
//! - [`vectorizer`] TF-IDF features feeding a [`linear`] logistic regression;
//! - a from-scratch transformer [`encoder`] with its own subword tokenizer.
//!
//! [`pipeline`] ties them together with dataset loading ([`corpus`]),
//! cleaning ([`textprep`]), scoring ([`metrics`]) and versioned model
//! files ([`bundle`]).

pub mod bundle;
pub mod corpus;
pub mod encoder;
pub mod linear;
pub mod metrics;
pub mod pipeline;
pub mod textprep;
pub mod vectorizer;

pub use bundle::{Classifier, ModelBundle, ModelKind};
pub use corpus::{DatasetSplit, DatasetStats, Label, LabeledExample};
pub use metrics::{ClassReport, ConfusionMatrix};
pub use pipeline::RunConfig;
