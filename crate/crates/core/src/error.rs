//! Error type shared by the numeric kernels.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Fundamental-domain reduction did not terminate within the step guard.
    /// Signals a degenerate/boundary numerical state; callers may perturb the
    /// input by ~1e-12 and retry once.
    #[error("fundamental-domain reduction exceeded {steps} steps")]
    NonTermination { steps: usize },

    /// The backward Riccati horizon was too short to stabilize the decaying
    /// Jacobi branch at the requested accuracy.
    #[error("Riccati horizon too short: u(0) changed by {residual:.3e} (want <= {tol:.1e})")]
    HorizonTooShort { residual: f64, tol: f64 },

    /// Bisection for the normalizing time could not bracket a root.
    #[error("normalizing-time bisection failed to bracket a root in [0, {upper}]")]
    BracketFailure { upper: f64 },

    /// The omega grid is below the Nyquist bound for the observable support.
    #[error("omega grid too coarse: N = {got}, support needs N >= {needed}")]
    GridTooCoarse { needed: usize, got: usize },

    /// Quadrature step too coarse for the requested integrand.
    #[error("quadrature step {step} too coarse (limit {limit})")]
    StepTooCoarse { step: f64, limit: f64 },

    /// Power iteration failed to settle the leading eigenvalue.
    #[error("power iteration stalled: relative change {change:.3e} after {iters} iterations")]
    PowerIterationStall { change: f64, iters: usize },

    /// Covariance estimate is numerically singular (Cholesky failed).
    #[error("singular covariance estimate; raise the sample count or the flow time")]
    SingularEstimate,

    /// Deviation data fell below the quadrature noise floor; the fit would be
    /// meaningless.
    #[error("degenerate fit: deviations below noise floor {floor:.3e}")]
    DegenerateFit { floor: f64 },

    /// A flow-time guard tripped (pushed-arc length would overflow the step
    /// budget).
    #[error("flow time {t} exceeds overflow guard {limit}")]
    Overflow { t: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
