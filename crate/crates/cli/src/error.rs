use std::fmt;
use std::path::PathBuf;

use node_sense::cell_network::{CellError, ScriptError};
use node_sense::coverage::CoverageError;
use node_sense::curve_fit::FitError;
use node_sense::exp_models::ExpError;
use node_sense::mc_estimation::McError;
use node_sense::position_prediction::PredictError;
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// Bad flag values or combinations (exit 2).
    Usage(String),
    /// Input files that cannot be read or parsed (exit 1).
    Input {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },
    Output {
        path: PathBuf,
        message: String,
    },
    /// Well-formed input the model rejects (exit 1).
    Domain {
        code: &'static str,
        message: String,
    },
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<u64>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Input { line: Some(_), .. } => "malformed_input",
            Self::Input { .. } => "input",
            Self::Output { .. } => "output",
            Self::Domain { code, .. } => code,
        }
    }

    /// The one-line JSON written to stderr.
    pub fn to_json(&self) -> String {
        let line = match self {
            Self::Input { line, .. } => *line,
            _ => None,
        };
        let body = ErrorLine {
            error: self.code(),
            message: self.to_string(),
            line,
        };
        serde_json::to_string(&body).expect("error line serializes")
    }

    pub fn input(path: &std::path::Path, line: Option<u64>, message: impl Into<String>) -> Self {
        Self::Input {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => f.write_str(m),
            Self::Input {
                path,
                line: Some(l),
                message,
            } => {
                write!(f, "{}: line {l}: {message}", path.display())
            }
            Self::Input {
                path,
                line: None,
                message,
            } => write!(f, "{}: {message}", path.display()),
            Self::Output { path, message } => write!(f, "{}: {message}", path.display()),
            Self::Domain { message, .. } => f.write_str(message),
        }
    }
}

impl std::error::Error for CliError {}

fn domain(code: &'static str, e: impl fmt::Display) -> CliError {
    CliError::Domain {
        code,
        message: e.to_string(),
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::FunctionOutOfBounds { .. } => domain("function_out_of_bounds", e),
            McError::NoNodes => domain("no_nodes", e),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CoverageError> for CliError {
    fn from(e: CoverageError) -> Self {
        match e {
            CoverageError::NonFinite => domain("non_finite", e),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        domain(e.code(), e)
    }
}

impl From<ExpError> for CliError {
    fn from(e: ExpError) -> Self {
        domain(e.code(), e)
    }
}

impl From<PredictError> for CliError {
    fn from(e: PredictError) -> Self {
        domain(e.code(), e)
    }
}

impl From<CellError> for CliError {
    fn from(e: CellError) -> Self {
        domain(e.code(), e)
    }
}

impl From<ScriptError> for CliError {
    fn from(e: ScriptError) -> Self {
        domain(e.source.code(), e)
    }
}
