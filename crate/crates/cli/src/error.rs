//! Error classes mapped to process exit codes: configuration problems exit
//! 2, data and I/O problems exit 3, numerical failures (wealth exhaustion,
//! scaling violations) exit 4 with the offending iteration when known.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Numerical {
        iteration: Option<usize>,
        message: String,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical { .. } => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numerical {
                iteration: Some(it),
                message,
            } => write!(f, "numerical error at iteration {it}: {message}"),
            CliError::Numerical {
                iteration: None,
                message,
            } => write!(f, "numerical error: {message}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Sorts a core error into its exit-code class.
pub fn from_core(e: cbmm_core::Error) -> CliError {
    use cbmm_core::Error as E;
    fn base(e: &E) -> &E {
        if let E::AtIteration { source, .. } = e {
            base(source)
        } else {
            e
        }
    }
    // The iteration moves into the Numerical variant, so the message is the
    // unwrapped cause; anything else keeps the full wrapped text.
    if e.is_numerical() {
        return CliError::Numerical {
            iteration: e.iteration(),
            message: base(&e).to_string(),
        };
    }
    match base(&e) {
        E::Parse { .. } | E::Format { .. } | E::EmptyDataset | E::UnmappedLabel(_) => {
            CliError::Data(e.to_string())
        }
        E::InfiniteKl { .. } => CliError::Numerical {
            iteration: e.iteration(),
            message: base(&e).to_string(),
        },
        _ => CliError::Config(e.to_string()),
    }
}
