use std::fmt;
use std::io;
use std::path::Path;

use abusivetext::bundle::BundleError;
use abusivetext::corpus::CorpusError;
use abusivetext::pipeline::PipelineError;

/// A failure reported as `error CODE: message` on one stderr line.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        let code = if err.kind() == io::ErrorKind::NotFound {
            "FILE_NOT_FOUND"
        } else {
            "IO_ERROR"
        };
        Self::new(code, format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self.code {
            "FILE_NOT_FOUND" => 2,
            "DEV_REQUIRED" => 3,
            "BUNDLE_VERSION" => 4,
            "BUNDLE_INCONSISTENT" => 5,
            "ID_MISMATCH" => 6,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Keep the report on a single line whatever the message contains.
        let message = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error {}: {message}", self.code)
    }
}

impl From<BundleError> for CliError {
    fn from(e: BundleError) -> Self {
        let code = match e {
            BundleError::Version { .. } => "BUNDLE_VERSION",
            BundleError::Inconsistent(_) => "BUNDLE_INCONSISTENT",
            BundleError::Json(_) => "BUNDLE_MALFORMED",
        };
        Self::new(code, e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io(io) => Self::new("IO_ERROR", io.to_string()),
            other => Self::new("PARSE_ERROR", other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Corpus(c) => c.into(),
            PipelineError::Bundle(b) => b.into(),
            PipelineError::DevRequired => Self::new("DEV_REQUIRED", e.to_string()),
            PipelineError::IdMismatch { ref offenders, total } => Self::new(
                "ID_MISMATCH",
                format!(
                    "{total} unmatched ids, first {}: {}",
                    offenders.len(),
                    offenders.join(", ")
                ),
            ),
            PipelineError::Config(_) => Self::new("CONFIG_ERROR", e.to_string()),
            PipelineError::Metrics(_) => Self::new("METRICS_ERROR", e.to_string()),
            other => Self::new("TRAINING_ERROR", other.to_string()),
        }
    }
}
