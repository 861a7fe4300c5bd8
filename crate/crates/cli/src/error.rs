use crate::scenario::SchemaViolation;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Schema(Vec<SchemaViolation>),
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Domain {
        context: String,
        #[source]
        source: bridgeland_local::Error,
    },
}

impl CliError {
    pub fn domain(context: impl Into<String>, source: bridgeland_local::Error) -> Self {
        CliError::Domain {
            context: context.into(),
            source,
        }
    }

    /// 1 for domain errors, 2 for usage and schema errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain { .. } => 1,
            CliError::Schema(_) | CliError::Usage(_) => 2,
        }
    }
}
