use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::measurement::MeasurementSetup;
use crate::error::{Error, Result};
use crate::linalg::{inner, CVector};
use crate::model::{check_unit, JointState, SystemSpec};
use crate::tol::Tolerances;

/// Exact outcome distribution of one protocol run. The five probabilities
/// sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    /// Lost to decay of the object (photon absorbed).
    pub decay: f64,
    /// Lost to the inter-loop projections of an iterative run.
    pub rejected: f64,
    /// The "nothing there" outcome.
    pub p_e: f64,
    /// The successful interrogation outcome.
    pub p_i: f64,
    /// Anything else the final measurement can report.
    pub other: f64,
    /// Fidelity of the object, conditioned on the `p_i` outcome, with its
    /// freely evolved initial state. Absent when `p_i` is zero.
    pub success_fidelity: Option<f64>,
}

impl OutcomeReport {
    pub fn total(&self) -> f64 {
        self.decay + self.rejected + self.p_e + self.p_i + self.other
    }
}

/// Counts from sampling an [`OutcomeReport`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub decay: u64,
    pub rejected: u64,
    pub p_e: u64,
    pub p_i: u64,
    pub other: u64,
}

/// Draws `trials` outcomes from the exact distribution.
pub fn sample_outcomes(report: &OutcomeReport, trials: u64, seed: u64) -> Result<OutcomeCounts> {
    let weights = [report.decay, report.rejected, report.p_e, report.p_i, report.other]
        .map(|w| w.max(0.0));
    let dist = WeightedIndex::new(weights)
        .map_err(|e| Error::InvalidParameter(format!("outcome distribution: {e}")))?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut counts = OutcomeCounts::default();
    for _ in 0..trials {
        match dist.sample(&mut rng) {
            0 => counts.decay += 1,
            1 => counts.rejected += 1,
            2 => counts.p_e += 1,
            3 => counts.p_i += 1,
            _ => counts.other += 1,
        }
    }
    Ok(counts)
}

/// `|<target|phi>|^2 / ||phi||^2` for an unnormalized conditional state.
pub(crate) fn conditional_fidelity(target: &CVector, phi: &CVector) -> Option<f64> {
    let norm = phi.norm_squared();
    (norm > 1e-300).then(|| inner(target, phi).norm_sqr() / norm)
}

/// Sends the setup's probe through the box once and measures
/// `{P_e, P_I, 1 - P_e - P_I}` on the probe.
pub fn simulate_single_shot(
    spec: &SystemSpec,
    setup: &MeasurementSetup,
    object_state: &CVector,
    occupied: bool,
    tol: &Tolerances,
) -> Result<OutcomeReport> {
    check_unit(object_state, "object state")?;
    let dynamics = spec.dynamics(tol)?;
    let probe = setup.initial_probe(spec, &dynamics.probe_free)?;
    let out = spec.evolve_joint(&dynamics, &probe, object_state, occupied)?;
    let target = &dynamics.object_free * spec.embed_object(object_state)?;
    Ok(measure(spec, &out, &setup.p_e_vector, &setup.psi_i, &target))
}

/// Splits a final joint state over two orthonormal probe outcomes.
pub(crate) fn measure(
    spec: &SystemSpec,
    state: &JointState,
    e: &CVector,
    success: &CVector,
    object_target: &CVector,
) -> OutcomeReport {
    let on_e = state.contract_probe(e, spec.n_ext);
    let on_i = state.contract_probe(success, spec.n_ext);
    let p_e = on_e.norm_squared();
    let p_i = on_i.norm_squared();
    let other = (state.norm_sqr() - p_e - p_i).max(0.0);
    OutcomeReport {
        decay: state.leaked_probability,
        rejected: 0.0,
        p_e,
        p_i,
        other,
        success_fidelity: if p_i > 1e-14 {
            conditional_fidelity(object_target, &on_i)
        } else {
            None
        },
    }
}
