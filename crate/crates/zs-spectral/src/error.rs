use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("zero input: {0}")]
    ZeroInput(&'static str),

    #[error("non-finite value while integrating at lambda = {0}")]
    NonFinite(Complex64),

    #[error("root too close to contour (min |f| = {min:.3e}, scale = {scale:.3e})")]
    BoundaryRoot { min: f64, scale: f64 },

    #[error("winding number did not settle on an integer (last value {0:.6})")]
    NonIntegerWinding(Complex64),

    #[error("{0} roots in disk exceeds the limit")]
    TooManyRoots(usize),

    #[error("root clusters closer than the separation bound ({0:.3e})")]
    ClusterAmbiguity(f64),

    #[error("counting layout failed: {0}")]
    Layout(String),

    #[error("lambda = {lambda} is not an eigenvalue (residual {residual:.3e})")]
    NotAnEigenvalue { lambda: Complex64, residual: f64 },

    #[error("geometric multiplicity two at lambda = {0}")]
    GeometricMultiplicityTwo(Complex64),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no improvement after {0} tries")]
    Exhausted(usize),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::ZeroInput(_) => 1,
            Error::Layout(_) => 2,
            Error::NonFinite(_)
            | Error::BoundaryRoot { .. }
            | Error::NonIntegerWinding(_)
            | Error::TooManyRoots(_)
            | Error::ClusterAmbiguity(_)
            | Error::Exhausted(_) => 3,
            Error::NotAnEigenvalue { .. }
            | Error::GeometricMultiplicityTwo(_)
            | Error::Precondition(_) => 4,
        }
    }
}
