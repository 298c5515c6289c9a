use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "propagator unitarity residual {residual:.3e} exceeds tolerance \
         {tolerance:.3e}; increase n_big_t"
    )]
    UnitarityLoss { residual: f64, tolerance: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error(
        "quadrature did not converge: estimate {estimate:.9e}, \
         error bound {bound:.3e}, requested {target:.3e}"
    )]
    QuadratureNonConvergence {
        estimate: f64,
        bound: f64,
        target: f64,
    },

    #[error("mode-table propagation drift {0:.3e} exceeds 1e-6")]
    TableDrift(f64),

    #[error("averaged energy has imaginary residual {0:.3e}")]
    ImaginaryResidual(f64),

    #[error("aliasing guard: k_max {k_max} exceeds (n_t - 1)/2 = {limit}")]
    Aliasing { k_max: usize, limit: usize },

    #[error("steady-state solve failed: {0}")]
    SteadyState(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("LAPACK routine {routine} returned info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error(transparent)]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;
