//! Failure kinds and their exit codes.

use std::fmt;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Causality could not be certified, so a label-setting solve was refused.
    Refused,
    /// Bad arguments, unreadable or invalid inputs.
    Validation,
    NonConvergence,
    /// Outputs could not be written.
    Io,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Refused => 2,
            Kind::Validation => 3,
            Kind::NonConvergence => 4,
            Kind::Io => 1,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into(), detail: None }
    }

    pub fn refused(message: impl Into<String>) -> Self {
        Self::new(Kind::Refused, message)
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(Kind::Validation, message)
    }

    pub fn with_detail(mut self, detail: impl Serialize) -> Self {
        self.detail = serde_json::to_value(detail).ok();
        self
    }

    /// One-line JSON for `--json-errors`.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("error serializes");
        v["exit_code"] = self.kind.exit_code().into();
        v.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<ossp::solve::SolveError> for CliError {
    fn from(e: ossp::solve::SolveError) -> Self {
        match e {
            ossp::solve::SolveError::NonConvergence { .. } => CliError::new(Kind::NonConvergence, e.to_string()),
            ossp::solve::SolveError::BadOrdering => CliError::invalid(e.to_string()),
        }
    }
}

impl From<ossp::io::IoError> for CliError {
    fn from(e: ossp::io::IoError) -> Self {
        let detail = match &e {
            ossp::io::IoError::Invalid(report) => serde_json::to_value(report).ok(),
            _ => None,
        };
        CliError { kind: Kind::Validation, message: e.to_string(), detail }
    }
}

impl From<ossp::hjb::HjbError> for CliError {
    fn from(e: ossp::hjb::HjbError) -> Self {
        match e {
            ossp::hjb::HjbError::CausalityRefused(_) => CliError::refused(e.to_string()),
            ossp::hjb::HjbError::Solve(s) => s.into(),
            ossp::hjb::HjbError::Label(_) => CliError::invalid(e.to_string()),
        }
    }
}
