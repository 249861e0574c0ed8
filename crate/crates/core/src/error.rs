use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u32),
    #[error("defining polynomial is reducible over F_{0}")]
    ReduciblePolynomial(u32),
    #[error("field size {0} exceeds the supported bound")]
    FieldTooLarge(u64),
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),
    #[error("enumeration of {size} elements exceeds bound {bound}")]
    EnumerationBoundExceeded { size: u128, bound: u128 },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("eigenspace splitting failed after {0} attempts")]
    EigenspaceSplitFailure(usize),
    #[error("orthogonality check failed: {0}")]
    InconsistentOrthogonality(String),
    #[error("character theta_{0} is not regular")]
    NonRegularTheta(u64),
    #[error("subset is not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("{0} is not invertible in the computation field")]
    NonInvertibleOrder(u64),
    #[error("row {0} is not cuspidal")]
    NotCuspidal(usize),
    #[error("projection has rank {got}, expected {expected}")]
    ProjectionRankMismatch { expected: usize, got: usize },
    #[error("matrix is not in GL_n(o)")]
    NotIntegral,
    #[error("window overflow: {0}")]
    WindowOverflow(String),
    #[error("insufficient precision: {0}")]
    PrecisionLoss(String),
    #[error("element is not a monomial t^k")]
    NotMonomial,
    #[error("unknown coset family '{0}'")]
    UnknownFamily(String),
    #[error("coset partition failed: {0}")]
    PartitionFailure(String),
    #[error("witness conjugation failed: {0}")]
    WitnessConjugationFailure(String),
    #[error("verification failed: {0}")]
    VerificationFailure(String),
    #[error("residue polynomial is reducible")]
    ReducibleResiduePolynomial,
    #[error("m must be odd, got {0}")]
    EvenM(u32),
    #[error("element is not in the filtration: {0}")]
    NotInFiltration(String),
    #[error("counterexample found: {0}")]
    CounterexampleFound(String),
    #[error("factorization failed: {0}")]
    FactorizationFailure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
