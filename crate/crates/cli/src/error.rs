use std::fmt;

use adl_core::experiment::ExperimentError;
use adl_core::features::FeatureError;
use adl_core::ingest::IngestError;
use adl_core::nn::{ModelIoError, NnError};
use adl_core::synth::SynthError;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

/// Rendered as `error: <kind>: <detail>`.
#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub detail: String,
    pub code: i32,
}

impl CliError {
    pub fn validation(kind: impl Into<String>, detail: impl Into<String>) -> Self {
        CliError { kind: kind.into(), detail: detail.into(), code: EXIT_VALIDATION }
    }

    pub fn numeric(kind: impl Into<String>, detail: impl Into<String>) -> Self {
        CliError { kind: kind.into(), detail: detail.into(), code: EXIT_NUMERIC }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::validation("IoError", format!("{}: {e}", path.display()))
    }

    /// Prefixes the detail with the offending file.
    pub fn in_file(mut self, path: &std::path::Path) -> Self {
        self.detail = format!("{}: {}", path.display(), self.detail);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let detail = self.detail.replace('\n', " ");
        write!(f, "error: {}: {}", self.kind, detail)
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        Self::validation(e.kind(), e.to_string())
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        Self::validation(e.kind(), e.to_string())
    }
}

impl From<ModelIoError> for CliError {
    fn from(e: ModelIoError) -> Self {
        Self::validation(e.kind(), e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        Self::validation("InvalidParams", e.to_string())
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::NonFiniteLoss => Self::numeric(e.kind(), e.to_string()),
            _ => Self::validation(e.kind(), e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        if e.is_numeric() {
            Self::numeric(e.kind(), e.to_string())
        } else {
            Self::validation(e.kind(), e.to_string())
        }
    }
}
