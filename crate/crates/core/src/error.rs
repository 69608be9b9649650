use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("non-finite vector field value at {point:?} (alpha = {alpha})")]
    EvaluationDomain { point: Vec<f64>, alpha: f64 },

    #[error("point {point:?} lies outside the declared domain of `{label}`")]
    OutsideDomain { label: String, point: Vec<f64> },

    #[error("eigenvalues are real at parameter {param} (discriminant {discriminant:e}); not a focus")]
    NotAFocus { param: f64, discriminant: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure {
        t: f64,
        last_state: Vec<f64>,
        reason: String,
    },

    #[error("Newton iteration did not converge to an equilibrium (residual {residual:e})")]
    NoEquilibrium { residual: f64 },

    #[error("singular Jacobian at candidate equilibrium {point:?}")]
    DegenerateEquilibrium { point: Vec<f64> },

    #[error("real part of the critical eigenvalue does not change sign on [{lo}, {hi}]")]
    NoHopfInBracket { lo: f64, hi: f64 },

    #[error("transversality fails at the Hopf point: d(Re lambda)/d(alpha) = {beta_prime:e}")]
    TransversalityFailure { beta_prime: f64 },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("quadrature did not converge (last change {change:e})")]
    Quadrature { change: f64 },

    #[error("averaged equilibrium is not hyperbolic (eigenvalue real part {real_part:e})")]
    HyperbolicityFailure { real_part: f64 },

    #[error("alpha = {alpha} lies on the wrong side of the bifurcation (orbit branch has sign {branch_side})")]
    BranchMismatch { alpha: f64, branch_side: f64 },

    #[error("predicted radius {radius} is outside the small-amplitude regime: the averaged radius is not monotone there")]
    OutsideAsymptoticRegime { radius: f64 },

    #[error("no periodic orbit found: {0}")]
    OrbitNotFound(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("no coexistence equilibrium: right side of the xi1 relation is {rhs}")]
    NoCoexistence { rhs: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),
}

impl Error {
    /// Stable machine-readable identifier used in serialized reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EvaluationDomain { .. } => "evaluation-domain",
            Error::OutsideDomain { .. } => "outside-domain",
            Error::NotAFocus { .. } => "not-a-focus",
            Error::IntegrationFailure { .. } => "integration-failure",
            Error::NoEquilibrium { .. } => "no-equilibrium",
            Error::DegenerateEquilibrium { .. } => "degenerate-equilibrium",
            Error::NoHopfInBracket { .. } => "no-hopf-in-bracket",
            Error::TransversalityFailure { .. } => "transversality-failure",
            Error::InternalConsistency(_) => "internal-consistency",
            Error::Quadrature { .. } => "quadrature",
            Error::HyperbolicityFailure { .. } => "hyperbolicity-failure",
            Error::BranchMismatch { .. } => "branch-mismatch",
            Error::OutsideAsymptoticRegime { .. } => "outside-asymptotic-regime",
            Error::OrbitNotFound(_) => "orbit-not-found",
            Error::InvalidParameters(_) => "invalid-parameters",
            Error::NoCoexistence { .. } => "no-coexistence",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::UnknownModel(_) => "unknown-model",
        }
    }
}
