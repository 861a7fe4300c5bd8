use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("gram matrix must be square and nonempty")]
    MalformedGram,
    #[error("gram matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("lattice is flagged even but gram[{0}][{0}] is odd")]
    OddDiagonal(usize),
    #[error("stability function vanishes on the class")]
    DegenerateValue,
    #[error("Z = {0} lies outside the image of the heart")]
    OutsideHeart(String),
    #[error("stability function is not normalized: Z(v) = {0}, expected i")]
    NotNormalized(String),
    #[error("filtration is malformed: {0}")]
    MalformedFiltration(String),
    #[error("summand {index} is malformed: {reason}")]
    MalformedSummand { index: usize, reason: String },
    #[error("summands {i} and {j} pair negatively (<v_i, v_j> = {pairing})")]
    HomNonvanishing { i: usize, j: usize, pairing: i64 },
    #[error("zero dimension vector where a nonzero one is required")]
    ZeroDimensionVector,
    #[error("{what} exceeds the budget of {budget}")]
    BudgetExceeded { what: &'static str, budget: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed subrepresentation witness: {0}")]
    MalformedWitness(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("character is not orthogonal to the dimension vector (theta . n = {0})")]
    NotInCharacterSpace(String),
    #[error("stability function is off the slice (gamma . n = {0})")]
    OffSlice(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("arithmetic overflow")]
    Overflow,
    #[error("a returned witness failed re-verification: {0}")]
    WitnessRejected(String),
    #[error("lattice is not hyperbolic: signature {0}")]
    NotHyperbolic(String),
    #[error("embedding basis is not primitive (gcd of 2x2 minors is {0})")]
    NotPrimitive(i64),
    #[error("report has verdict {0}, which has no product shape")]
    NoProductShape(&'static str),
}
