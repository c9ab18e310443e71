use thiserror::Error;

pub type Result<T> = std::result::Result<T, LgiError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LgiError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "quadrature did not converge: best estimate {estimate:.6e} with error {abs_error:.3e} \
         after {evaluations} evaluations"
    )]
    Convergence {
        estimate: f64,
        abs_error: f64,
        evaluations: usize,
    },

    /// `|sin(tau2 - tau1)|` fell below the propagator guard. Use the
    /// identity/parity map for intervals that are multiples of pi.
    #[error("singular propagator interval{}: |sin(dtau)| = {sin_delta:.3e}; use the parity shortcut", pair_suffix(*.pair))]
    SingularInterval { pair: Option<usize>, sin_delta: f64 },

    #[error("capability: {0}")]
    Capability(String),

    #[error("measurement branch unreachable (probability {0:.3e})")]
    BranchUnreachable(f64),

    #[error("grid configuration: {0}")]
    GridConfig(String),

    #[error("i/o: {0}")]
    Io(String),
}

fn pair_suffix(pair: Option<usize>) -> String {
    match pair {
        Some(i) => match crate::lgi::PAIR_LABELS.get(i) {
            Some(label) => format!(" in pair {i} ({label})"),
            None => format!(" in pair {i}"),
        },
        None => String::new(),
    }
}

impl LgiError {
    /// Process exit code used by the CLI: 2 for bad input, 3 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LgiError::Parameter(_)
            | LgiError::Capability(_)
            | LgiError::GridConfig(_)
            | LgiError::Io(_) => 2,
            LgiError::Convergence { .. }
            | LgiError::SingularInterval { .. }
            | LgiError::BranchUnreachable(_) => 3,
        }
    }

    pub(crate) fn with_pair(self, index: usize) -> Self {
        match self {
            LgiError::SingularInterval { sin_delta, .. } => LgiError::SingularInterval {
                pair: Some(index),
                sin_delta,
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for LgiError {
    fn from(e: std::io::Error) -> Self {
        LgiError::Io(e.to_string())
    }
}
