use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("{what} is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NonHermitian { what: &'static str, deviation: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} must be normalized, got norm {norm}")]
    NormViolation { what: &'static str, norm: f64 },

    #[error("probe Hamiltonian couples the reference and detecting branches (max entry {coupling:e})")]
    BranchCoupling { coupling: f64 },

    #[error("object Hamiltonian couples H_S to its decaying complement (max entry {coupling:e})")]
    ObjectLeakCoupling { coupling: f64 },

    #[error("<chi|D|psi_d> deviates from c*I_S by {deviation:e}")]
    WitnessMismatch { deviation: f64 },

    #[error("witness does not admit a nondistortion interrogation")]
    InfeasibleWitness,

    #[error("probe split alpha = {alpha} leaves no successful outcome (Delta = 0)")]
    DegenerateAlpha { alpha: f64 },

    #[error("no Zeno plan: {0}")]
    NoSolution(String),

    #[error("Zeno plan constant c = {plan_c} does not match <chi|D|chi> (deviation {deviation:e})")]
    PlanSpecMismatch { plan_c: String, deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("system is infeasible for nondistortion interrogation")]
    InfeasibleSystem,

    #[error("bad sweep range: {0}")]
    BadSweepRange(String),

    #[error("config error at {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
