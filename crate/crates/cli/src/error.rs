use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}{}: {}{message}", position(*.line, *.column), field_prefix(.field))]
    Config { origin: String, line: usize, column: usize, field: String, message: String },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("numeric precondition violated: {0}")]
    Numeric(#[from] zdet::Error),
}

fn position(line: usize, column: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(":{line}:{column}")
    }
}

fn field_prefix(field: &str) -> String {
    if field.is_empty() {
        String::new()
    } else {
        format!("field `{field}`: ")
    }
}

impl CliError {
    /// Config error attached to a field rather than a text position.
    pub fn field(origin: &str, field: &str, message: impl Into<String>) -> Self {
        Self::Config { origin: origin.to_string(), line: 0, column: 0, field: field.to_string(), message: message.into() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } => 2,
            Self::Numeric(_) => 3,
            Self::Io { .. } => 4,
        }
    }
}
