use thiserror::Error;

use crate::quantum::Qubit;

pub type Result<T> = std::result::Result<T, EdssError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdssError {
    #[error("qubit {0} is not part of this system")]
    UnknownQubit(Qubit),

    #[error("matrix is not Hermitian (max |M - M^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigensolver failed to converge")]
    EigenSolver,

    #[error("numerical check failed: {0}")]
    CheckFailed(String),

    #[error("coefficient {name} = {value} outside [-1, 1]")]
    CoefficientRange { name: &'static str, value: f64 },

    #[error(
        "negative Bell-diagonal eigenvalue {value:e} for sign pattern (a, b) = ({a:+}, {b:+})"
    )]
    Positivity { a: i8, b: i8, value: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("ancilla parameter s = {0} outside [0, 1]")]
    AncillaRange(f64),

    #[error("state is not canonical; call canonicalize() first")]
    NonCanonical,

    #[error("s11 = {0:e} is nonzero")]
    NonzeroS11(f64),

    #[error("s11 = 0: no entanglement can be distributed from this resource")]
    UselessResource,

    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    BadVertex { vertex: usize, n: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("nothing to localize: partial transpose over {qubit} has minimum eigenvalue {min:e}")]
    NothingToLocalize { qubit: Qubit, min: f64 },

    #[error(
        "decomposition not claimed by Lemma 2: cut {qubit}|rest has minimum PT eigenvalue {min:e}"
    )]
    DecompositionNotClaimed { qubit: Qubit, min: f64 },

    #[error("no feasible point found; best infeasible lambda_c_ab = {best_lambda_c_ab:e} after {evaluations} evaluations")]
    NoFeasiblePoint {
        best_lambda_c_ab: f64,
        evaluations: usize,
    },

    #[error("noise probability q = {0} outside [0, 1]")]
    NoiseRange(f64),
}
