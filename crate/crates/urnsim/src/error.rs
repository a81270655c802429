use urn_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const TEST_FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const ASSUMPTION_A: u8 = 3;
    pub const SINGULAR: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("assumption (A) fails: {0}")]
    AssumptionA(String),
    #[error("numerically singular: {0}")]
    Singular(String),
    #[error("{0}")]
    Core(CoreError),
    #[error("verification failed: {0}")]
    TestFailure(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ZeroInDegree { vertex } | CoreError::AssumptionAViolated { vertex } => {
                CliError::AssumptionA(format!("vertex {} has zero in-degree", vertex + 1))
            }
            CoreError::SingularMatrix { .. }
            | CoreError::SingularSylvester(..)
            | CoreError::SingularLimitSystem
            | CoreError::NonDiagonalizable { .. } => CliError::Singular(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Core(_) => exit::USAGE,
            CliError::AssumptionA(_) => exit::ASSUMPTION_A,
            CliError::Singular(_) => exit::SINGULAR,
            CliError::TestFailure(_) => exit::TEST_FAILURE,
        }
    }
}
