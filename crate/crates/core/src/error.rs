use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("subsystem `{label}` has dimension 0")]
    ZeroDimension { label: String },
    #[error("total dimension {dim} exceeds the budget of {budget}")]
    BudgetExceeded { dim: usize, budget: usize },
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("subsystem label `{0}` appears in both operands")]
    LabelClash(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("layouts differ: {0}")]
    LayoutMismatch(String),
    #[error("qudit dimension must be at least 2, got {0}")]
    QuditDimension(usize),
    #[error("not a density operator: {0}")]
    NotDensity(String),
    #[error("not unitary: deviation {0:.3e}")]
    NotUnitary(f64),
    #[error("state is not key correlated: leakage {0:.3e} outside the maximally correlated subspace")]
    NotKeyCorrelated(f64),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("shield states {0} and {1} have overlapping supports (overlap {2:.3e})")]
    NonOrthogonalSupports(usize, usize, f64),
    #[error("block form precondition violated: {0}")]
    BlockForm(BlockFormViolation),
    #[error("layout has no subsystem with role `{0}`")]
    MissingRole(&'static str),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("unsupported family/dimension combination: {0}")]
    UnsupportedFamily(String),
    #[error("unknown closed form `{0}`")]
    UnknownClosedForm(String),
    #[error("closed form parameter out of range: {0}")]
    ClosedFormRange(String),
    #[error("expected {expected} angles, got {found}")]
    AngleCount { expected: usize, found: usize },
    #[error("label `{0}` is not held by Alice")]
    NotAliceLabel(String),
    #[error("average shield state is not the uniform mixture (deviation {0:.3e})")]
    MixtureMismatch(f64),
    #[error("labels do not partition the layout: {0}")]
    BadPartition(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockFormViolation {
    NotNormal(f64),
    TraceNorm(f64),
    PowerNotPositive(f64),
}

impl std::fmt::Display for BlockFormViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NotNormal(dev) => write!(f, "Y is not normal (deviation {dev:.3e})"),
            Self::TraceNorm(n) => write!(f, "trace norm of Y is {n}, expected 1"),
            Self::PowerNotPositive(ev) => {
                write!(f, "Y^(2^m) is not positive semidefinite (eigenvalue {ev:.3e})")
            }
        }
    }
}
