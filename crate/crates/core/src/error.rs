use thiserror::Error;

use crate::C64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the set where the operation is defined.
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("interpolation error: {0}")]
    Interpolation(String),

    #[error("quadrature resolution too low: {points} points for {modes} modes, need at least {required}")]
    Resolution {
        points: usize,
        modes: usize,
        required: usize,
    },

    #[error("singular tridiagonal system at t = {t}, dt = {dt}, M = {m}")]
    SingularSystem { t: f64, dt: f64, m: usize },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(&'static str),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("weight matrix is not positive definite")]
    NotPositiveDefinite,

    /// The Gramian has a (numerical) kernel; `kernel` is a unit vector spanning it.
    #[error("observation is not exactly observable: min eigenvalue {min_eigenvalue:e} below threshold {threshold:e}, kernel vector {kernel:?}")]
    NonObservable {
        min_eigenvalue: f64,
        threshold: f64,
        kernel: Vec<C64>,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: impl Into<String>) -> Self {
        Error::Domain {
            what,
            value,
            domain: domain.into(),
        }
    }
}
