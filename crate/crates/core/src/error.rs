use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("degree {degree} needs window margin, window is {min}..{max}")]
    WindowTooNarrow { degree: i64, min: i64, max: i64 },
    #[error("elements live over different algebras")]
    AlgebraMismatch,
    #[error("elements belong to different presentations")]
    PresentationMismatch,
    #[error("series did not terminate within order {0}")]
    NotNilpotent(usize),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("a generator filtration is required")]
    MissingFiltration,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("not a morphism: {0}")]
    NotAMorphism(String),
    #[error("Maurer-Cartan residual is nonzero")]
    ResidualNonzero,
    #[error("convolution variants do not match")]
    VariantMismatch,
    #[error("incompatible twisted product rule: {0}")]
    RuleIncompatible(String),
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown generator `{name}` at {line}:{col}")]
    UnknownGenerator { name: String, line: usize, col: usize },
    #[error("invalid model: {0}")]
    Validation(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("certificate failure: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
