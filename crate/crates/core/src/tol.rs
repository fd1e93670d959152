use serde::{Deserialize, Serialize};

/// Numerical thresholds shared across the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank and kernel decisions.
    pub tol_rel: f64,
    /// Residual norm below which a vector counts as linearly dependent.
    pub tol_lin: f64,
    /// Relative Hermiticity slack for Hamiltonians.
    pub eps_herm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_rel: 1e-10,
            tol_lin: 1e-8,
            eps_herm: 1e-12,
        }
    }
}
