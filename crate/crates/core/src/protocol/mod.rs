//! Measurement construction, probe-split optimization and protocol
//! simulation, for both the single-shot scheme and the iterative Zeno scheme.

pub mod measurement;
pub mod simulate;
pub mod zeno;

pub use measurement::{
    construct_measurement, optimize_alpha, success_probability, success_probability_at, MeasurementSetup,
};
pub use simulate::{sample_outcomes, simulate_single_shot, OutcomeCounts, OutcomeReport};
pub use zeno::{check_zeno_condition, final_overlap, plan_zeno, simulate_zeno, ZenoPlan, ZenoRun, ZenoWitness};
