use thiserror::Error;

/// Errors raised by the simulation modules.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stationary state reaches the edge of the grid.
    #[error("state {state} leaks to the grid boundary (edge/max amplitude = {ratio:.3e}); widen the grid")]
    BoundaryLeakage { state: usize, ratio: f64 },

    /// Time step violates the spectral stability limit.
    #[error("time step {dt:.3e} s exceeds the stability limit {limit:.3e} s for this grid")]
    Stability { dt: f64, limit: f64 },

    /// More basis states were requested than the grid can represent.
    #[error("thermal basis needs {required} states but the grid represents only {capacity}")]
    Capacity { required: usize, capacity: usize },

    /// Survival curve rose by more than the tolerance, usually reflections from the grid edge.
    #[error("survival is non-monotone (rise of {rise:.3e} at t = {time:.3e} s); use a larger grid or absorber")]
    NonMonotoneSurvival { rise: f64, time: f64 },

    /// A fit could not be carried out.
    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
