use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("basis mismatch: expected {expected} labels, got {found}")]
    BasisMismatch { expected: usize, found: usize },

    #[error("site {site} is not part of the lattice (N = {n_sites})")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("state would be the null vector: {0}")]
    NullState(String),

    #[error("eigensolver did not converge for a {0}x{0} matrix")]
    EigenNoConvergence(usize),

    #[error("invalid time grid: {0}")]
    InvalidTimes(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("probability {mass:.3e} reached the grid edge by t = {time}")]
    BoundaryLeak { mass: f64, time: f64 },

    #[error("relaxation did not converge: {0}")]
    NoConvergence(String),

    #[error("overlap matrix is ill-conditioned (smallest eigenvalue {0:.3e}); sites too close")]
    IllConditioned(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
