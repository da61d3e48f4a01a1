use thiserror::Error;

/// Everything that can go wrong between reading a model definition and
/// evaluating a Jost matrix.
#[derive(Debug, Error)]
pub enum JostError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Function value does not exist (for example y_l at the origin for l > 0).
    #[error("singular evaluation: {0}")]
    Singular(String),

    /// The requested energy/rotation combination has no decaying integrand,
    /// so the radial limits do not exist.
    #[error("outside the convergence domain: best margin {margin:.3e} along theta = {theta:.3} rad")]
    OutsideDomain { theta: f64, margin: f64 },

    /// Solution norm passed the overflow guard during integration.
    #[error("radial integration diverged near |r| = {radius:.3}")]
    Diverged { radius: f64 },

    #[error("step size underflow near |r| = {radius:.3}")]
    StepUnderflow { radius: f64 },

    #[error("integration exceeded {0} steps")]
    MaxSteps(usize),

    /// A channel momentum is too close to zero for a formulation that divides
    /// by powers of k. The factorised route does not have this restriction.
    #[error("channel {channel} momentum |k| = {magnitude:.3e} is too close to threshold")]
    NearThreshold { channel: usize, magnitude: f64 },

    /// F_in is numerically singular, e.g. when asking for an S-matrix at a
    /// spectral point.
    #[error("Jost matrix F_in is singular (|det| = {det:.3e})")]
    SingularJost { det: f64 },

    #[error("root search did not converge after {iterations} iterations (last step {last_step:.3e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    /// The root iteration left the region where the determinant can be
    /// evaluated; carries the underlying failure.
    #[error("root search wandered outside the solver's valid region: {0}")]
    RootWandered(Box<JostError>),

    #[error("potential error: {0}")]
    Potential(String),

    #[error("too many channels for sheet enumeration ({0} > 16)")]
    TooManySheets(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("expansion file: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T, E = JostError> = std::result::Result<T, E>;
