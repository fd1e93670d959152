//! Nondistortion quantum interrogation (NQI).
//!
//! Decides whether a probe/object system lets you detect the presence of an
//! object in a box without disturbing its (unknown) internal state, builds the
//! optimal single-shot probe and final measurement when it does, and simulates
//! both single-shot and iterative Zeno-type interrogation.
//!
//! The pipeline is:
//!
//! 1. describe the physics as a [`SystemSpec`] (or use [`atom`]);
//! 2. reduce it to the interrogation operator `D` with
//!    [`build_interrogation_operator`];
//! 3. search for a feasibility witness with [`criterion::search_feasible_probe`];
//! 4. construct and optimize the measurement with [`protocol`];
//! 5. verify by exact simulation.

pub mod atom;
pub mod cli;
pub mod criterion;
pub mod error;
pub mod linalg;
pub mod model;
pub mod protocol;
pub mod random;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use model::{build_interrogation_operator, InterrogationOperator, JointState, SystemSpec};
pub use tol::Tolerances;
