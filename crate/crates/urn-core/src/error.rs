use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("vertex {vertex} has zero in-degree")]
    ZeroInDegree { vertex: usize },
    #[error("assumption (A) violated: vertex {vertex} has zero in-degree")]
    AssumptionAViolated { vertex: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },
    #[error("Sylvester/Lyapunov equation is singular: eigenvalues {0} and {1} sum to (nearly) zero")]
    SingularSylvester(f64, f64),
    #[error("matrix is singular (estimated condition number {condition:e})")]
    SingularMatrix { condition: f64 },
    #[error("no eigenvalue has real part 1/2; not in the critical regime")]
    NotCriticalRegime,
    #[error("matrix is not diagonalizable (eigenvector condition number {condition:e})")]
    NonDiagonalizable { condition: f64 },
    #[error("replacement scheme is of Pólya type (alpha + beta = 2)")]
    PolyaType,
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("graph is not undirected regular (weighted adjacency not symmetric doubly stochastic)")]
    NotRegular,
    #[error("limit system I - C A M^-1 is singular")]
    SingularLimitSystem,
    #[error("scaling does not match regime: {0}")]
    RegimeMismatch(String),
    #[error("need at least {needed} checkpoints, got {got}")]
    InsufficientCheckpoints { needed: usize, got: usize },
    #[error("brute-force enumeration too large: n*T = {0} exceeds 20")]
    TooLarge(u64),
    #[error("horizon mismatch: {0} vs {1}")]
    HorizonMismatch(u64, u64),
    #[error("ball count overflow")]
    Overflow,
    #[error("test not applicable: {0}")]
    NotApplicable(String),
}
