use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the domain of generator `{generator}`")]
    Domain { generator: String, point: Vec<f64> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e} below floor {floor:e})")]
    NotPositiveDefinite { min_eigenvalue: f64, floor: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("generator `{0}` is not strongly coercive and locally bounded; Bregman projection unavailable")]
    NotProjectionCapable(String),

    #[error("line search stalled after {iterations} iterations (step norm {step_norm:e})")]
    NoProgress { iterations: usize, step_norm: f64 },

    #[error("iterate left the domain of the generator and could not be pulled back")]
    DomainExit,

    #[error("maximum iterations ({iterations}) reached with step norm {step_norm:e}")]
    MaxIterations { iterations: usize, step_norm: f64 },

    #[error("sampler for set `{0}` failed to produce a point")]
    SamplerFailure(String),

    #[error("point left the set by {distance:e} (beyond drift tolerance)")]
    LeftSet { distance: f64 },

    #[error("no witness found in the search box (best defect {best_defect:e})")]
    NotFoundInBox { best_defect: f64 },

    #[error("empty set or empty Folner box")]
    EmptySet,

    #[error("barycenters did not converge: final gap {gap:e} above tolerance {tol:e}")]
    NoConvergence { gap: f64, tol: f64 },

    #[error("attractive-set model has no constraints")]
    EmptyModel,

    #[error("attractive-set model is infeasible (constraint violation {violation:e} after Dykstra)")]
    InfeasibleModel { violation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
