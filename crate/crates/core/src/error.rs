use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CuError {
    #[error("element `{element}` does not belong to model `{model}`")]
    ModelMismatch { model: String, element: String },
    #[error("chain is not increasing at index {index}")]
    NotMonotone { index: u64 },
    #[error("no closed form for this chain: {0}")]
    UnsupportedChainForm(String),
    #[error("no divisibility witness found: {0}")]
    NoWitnessFound(String),
    #[error("{n} is not a product of the given primes")]
    NotADivisor { n: u64 },
    #[error("quotient is not unique: {0}")]
    Ambiguous(String),
    #[error("soft identity fails: got {got}, expected {expected}")]
    SoftnessViolated { got: String, expected: String },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{0}")]
    Parse(String),
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown model kind `{kind}`")]
    UnknownModelKind { line: usize, col: usize, kind: String },
    #[error("{line}:{col}: unknown morphism kind `{kind}`")]
    UnknownMorphismKind { line: usize, col: usize, kind: String },
    #[error("{line}:{col}: undeclared name `{name}`")]
    UndeclaredName { line: usize, col: usize, name: String },
    #[error("composition cycle through `{name}`")]
    CyclicComposition { name: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CuError {
    fn from(e: std::io::Error) -> Self {
        CuError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CuError>;
