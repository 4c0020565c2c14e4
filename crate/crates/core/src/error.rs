use thiserror::Error;

/// Errors raised by the numerical kernels and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("potential spec line {line}, column {column}: {message}")]
    SpecSyntax { line: usize, column: usize, message: String },

    #[error("grid file {path}: {message}")]
    GridFile { path: String, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("potential has infinite integral (hard core present)")]
    InfiniteIntegral,

    #[error("scattering length not constant outside the support: {at_support} vs {at_rmax} (tol {tol})")]
    NonConstantScatteringLength { at_support: f64, at_rmax: f64, tol: f64 },

    #[error("integrator did not reach tolerance {tol}: last refinement changed a by {change}")]
    NoConvergence { tol: f64, change: f64 },

    #[error("integration grid would need {nodes} nodes, above the limit of {limit}")]
    GridBudget { nodes: usize, limit: usize },

    #[error("nothing to cut: (8 pi a)^-1 int v = {ratio} does not exceed T = {t}")]
    NothingToCut { ratio: f64, t: f64 },

    #[error("cap height search exceeded {doublings} doublings (last height {height})")]
    CapSearchExhausted { doublings: usize, height: f64 },

    #[error("mode coefficients violate |B| <= A: A = {a}, B = {b}")]
    UnstableMode { a: f64, b: f64 },

    #[error("negative discriminant A^2 - B^2 at k = {k}")]
    NegativeDiscriminant { k: f64 },

    #[error("quadrature tail estimate {tail} exceeds budget {budget}")]
    TailBudget { tail: f64, budget: f64 },

    #[error("support radius {radius} is not below half the box length {ell}/2")]
    SupportTooLarge { radius: f64, ell: f64 },

    #[error("unknown quantity `{0}`")]
    UnknownQuantity(String),

    #[error("relation syntax error at line {line}, column {column}: {message}")]
    RelationSyntax { line: usize, column: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical procedure rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConstantScatteringLength { .. }
                | Error::NoConvergence { .. }
                | Error::GridBudget { .. }
                | Error::CapSearchExhausted { .. }
                | Error::TailBudget { .. }
                | Error::NegativeDiscriminant { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
