use thiserror::Error;

/// Errors raised by the numerical pipeline. Each variant names the stage that
/// produced it so front ends can attribute failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),

    #[error("basis: unknown basis set `{0}`")]
    UnknownBasis(String),

    #[error("integrals: overlap matrix is numerically singular (smallest eigenvalue {0:.3e})")]
    DegenerateBasis(f64),

    #[error("partition: {0}")]
    Partition(String),

    #[error("manybody: {0}")]
    ManyBody(String),

    #[error("scf: no convergence after {iterations} iterations (last density change {delta:.3e})")]
    ScfNotConverged { iterations: usize, delta: f64 },

    #[error("operator: {0}")]
    Operator(String),

    #[error("dynamics: {0}")]
    Dynamics(String),

    #[error("decoherence: {0}")]
    Decoherence(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Short name of the module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Geometry(_) => "basis_geom",
            Error::UnknownBasis(_) => "basis_geom",
            Error::DegenerateBasis(_) => "integrals_analytic",
            Error::Partition(_) => "partition_grid",
            Error::ManyBody(_) | Error::ScfNotConverged { .. } => "manybody",
            Error::Operator(_) => "subsystem_op",
            Error::Dynamics(_) => "dynamics",
            Error::Decoherence(_) => "decoherence",
            Error::Config(_) => "config",
        }
    }

    /// True for input-validation failures as opposed to numerical ones.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Geometry(_) | Error::UnknownBasis(_) | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
