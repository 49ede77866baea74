use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Kummer series did not converge within {terms} terms at a={a}, b={b}, z={z}")]
    KummerNonConvergence { a: f64, b: f64, z: f64, terms: usize },

    #[error("argument outside the supported domain: {0}")]
    Domain(String),

    #[error("invalid radius profile: {0}")]
    InvalidProfile(String),

    #[error("root scan exhausted before {wanted} eigenvalues were bracketed (found {found} below {limit}): {modes}")]
    IncompleteSpectrum {
        wanted: usize,
        found: usize,
        limit: f64,
        modes: String,
    },

    #[error("quadrature did not reach tolerance: {0}")]
    Quadrature(String),

    #[error("matrix assembly failed: {0}")]
    Assembly(String),

    #[error("eigensolver did not converge after {iterations} restarts; worst relative residual {residual:.3e}")]
    EigenSolver { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("theorem hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("q_{n} has a pole: M({a}, {b}, {z}) = {value:e}")]
    Pole {
        n: usize,
        a: f64,
        b: f64,
        z: f64,
        value: f64,
    },

    #[error("{required} magnetic eigenvalues are needed to pin the first {wanted} Pauli eigenvalues, got {have}")]
    InsufficientInput {
        wanted: usize,
        required: usize,
        have: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Library module the error originates from.
    pub fn module(&self) -> &'static str {
        match self {
            Error::KummerNonConvergence { .. } | Error::Domain(_) => "special_fn",
            Error::InvalidProfile(_) => "geometry",
            Error::IncompleteSpectrum { .. } => "disk_spectrum",
            Error::Quadrature(_) => "quadrature",
            Error::Assembly(_) | Error::EigenSolver { .. } => "fem_solver",
            Error::Hypothesis(_) => "functionals",
            Error::Degenerate(_) | Error::Pole { .. } => "perturbation",
            Error::InsufficientInput { .. } => "pauli",
            Error::Precondition(_) => "input",
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => "io",
        }
    }
}
