use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed model, out-of-range parameter, inadmissible size.
    Validation,
    /// A solver, quadrature or eigensolver did not deliver.
    Numerical,
    /// An optimizer maximizer sits on the edge of its search box.
    Boundary,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("mixture has no term with a positive coefficient")]
    EmptyMixture,

    #[error("duplicate term ({p}, {q})")]
    DuplicateTerm { p: u32, q: u32 },

    #[error("term ({p}, {q}) has negative coefficient {beta}")]
    NegativeCoefficient { p: u32, q: u32, beta: f64 },

    #[error("term ({p}, {q}) has non-finite coefficient")]
    NonFiniteCoefficient { p: u32, q: u32 },

    #[error("mixture is not normalized: sum of squared coefficients is {sum} (deviation {deviation:.3e})")]
    NotNormalized { sum: f64, deviation: f64 },

    #[error("gamma must lie in (0, 1), got {0}")]
    InvalidGamma(f64),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("model is not pure: {0}")]
    NotPure(String),

    #[error("spectral parameter must have positive imaginary part, got {re} + {im}i")]
    InvalidSpectralParameter { re: f64, im: f64 },

    #[error("MDE solver did not converge at z = {re} + {im}i after {iterations} iterations (residuals {residual1:.3e}, {residual2:.3e})")]
    NonConvergence {
        re: f64,
        im: f64,
        iterations: usize,
        residual1: f64,
        residual2: f64,
    },

    #[error("window [{left}, {right}] does not contain the support (mass {mass:.6}, boundary density {boundary_density:.3e})")]
    WindowTooSmall {
        left: f64,
        right: f64,
        mass: f64,
        boundary_density: f64,
    },

    #[error("edge detection failed: {0}")]
    EdgeDetection(String),

    #[error("quadrature did not reach tolerance (estimated error {estimate:.3e})")]
    Quadrature { estimate: f64 },

    #[error("maximizer {point:?} lies on the boundary of the search box (radius {radius})")]
    BoundaryMaximizer { point: [f64; 3], radius: f64 },

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("bracketing failed: {0}")]
    Bracketing(String),

    #[error("N = {n} is not admissible for gamma = {gamma}; nearest admissible values: {}", format_nearest(*.below, *.above))]
    InadmissibleDims {
        gamma: f64,
        n: usize,
        below: Option<usize>,
        above: Option<usize>,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sample {sample} has an eigenvalue of magnitude below 1e-300")]
    SingularSample { sample: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn format_nearest(below: Option<usize>, above: Option<usize>) -> String {
    match (below, above) {
        (Some(b), Some(a)) => format!("{b} and {a}"),
        (Some(b), None) => b.to_string(),
        (None, Some(a)) => a.to_string(),
        (None, None) => "none".to_string(),
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonConvergence { .. }
            | Error::WindowTooSmall { .. }
            | Error::EdgeDetection(_)
            | Error::Quadrature { .. }
            | Error::Optimizer(_)
            | Error::Bracketing(_)
            | Error::SingularSample { .. } => ErrorKind::Numerical,
            Error::BoundaryMaximizer { .. } => ErrorKind::Boundary,
            _ => ErrorKind::Validation,
        }
    }
}
