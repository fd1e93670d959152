use crate::criterion::Witness;
use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt_extend, inner, CMatrix, CVector, C64};
use crate::model::{check_len, check_unit, SystemSpec};
use crate::tol::Tolerances;

/// Probe split plus the final projectors `P_e = |e><e|` and `P_I = |Psi_I><Psi_I|`
/// on `H_D`.
///
/// `psi_r` is the reference-branch state at injection; the primed vectors are
/// after one period of free evolution and are what the witness talks about.
#[derive(Debug, Clone)]
pub struct MeasurementSetup {
    pub alpha: f64,
    pub beta: f64,
    pub psi_r: CVector,
    /// `Psi_r'` embedded in `H_D`.
    pub psi_r_evolved: CVector,
    /// `Psi_d'` embedded in `H_D`.
    pub psi_d_evolved: CVector,
    pub psi_i: CVector,
    pub delta_amp: C64,
    /// Unit vector along `alpha Psi_r' + beta Psi_d'`.
    pub p_e_vector: CVector,
    /// `chi` followed by the `chi_j`, embedded in `H_D`.
    pub chi_family: Vec<CVector>,
    pub c: C64,
}

impl MeasurementSetup {
    /// The probe to inject: `alpha psi_r + beta exp(+i H^D t) Psi_d'`.
    pub fn initial_probe(&self, spec: &SystemSpec, probe_free: &CMatrix) -> Result<CVector> {
        let back = probe_free.adjoint() * &self.psi_d_evolved;
        Ok(spec.embed_reference(&self.psi_r)? * C64::from(self.alpha) + back * C64::from(self.beta))
    }

    /// Largest of `|<Psi_I|e>|` and `|<Psi_I|chi_j>|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = inner(&self.psi_i, &self.p_e_vector).norm();
        for q in self.chi_family.iter().skip(1) {
            worst = worst.max(inner(&self.psi_i, q).norm());
        }
        worst
    }
}

fn split(alpha: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    Ok((alpha, (1.0 - alpha * alpha).sqrt()))
}

/// Orthonormalizes `{chi_j}`, then `alpha Psi_r' + beta Psi_d'`, then
/// `alpha Psi_r' + c beta chi`; the last survivor is `Psi_I`.
pub fn construct_measurement(
    spec: &SystemSpec,
    witness: &Witness,
    alpha: f64,
    psi_r: &CVector,
    tol: &Tolerances,
) -> Result<MeasurementSetup> {
    if !witness.feasible {
        return Err(Error::InfeasibleWitness);
    }
    let (alpha, beta) = split(alpha)?;
    check_len(psi_r, spec.dim_r, "reference-branch state")?;
    check_unit(psi_r, "reference-branch state")?;
    check_len(&witness.psi_d, spec.m, "witness probe")?;

    let probe_free = crate::linalg::propagator(&spec.h_probe, spec.t, tol.eps_herm)?;
    let psi_r_evolved = &probe_free * spec.embed_reference(psi_r)?;
    let psi_d_evolved = spec.embed_detecting(&witness.psi_d)?;

    let dec = &witness.decomposition;
    let chi = spec.embed_detecting(&dec.chi)?;
    let chi_j = dec
        .chi_perp
        .iter()
        .map(|v| spec.embed_detecting(v))
        .collect::<Result<Vec<_>>>()?;

    let (a, b) = (C64::from(alpha), C64::from(beta));
    let e_raw = &psi_r_evolved * a + &psi_d_evolved * b;
    let f_raw = &psi_r_evolved * a + &chi * (dec.c * b);

    let candidates = [e_raw.clone(), f_raw.clone()];
    let ext = gram_schmidt_extend(&chi_j, &candidates, tol.tol_lin);
    let psi_i = ext
        .from_candidate(1)
        .cloned()
        .ok_or(Error::DegenerateAlpha { alpha })?;
    let delta_amp = inner(&psi_i, &f_raw);

    let mut chi_family = vec![chi];
    chi_family.extend(chi_j);
    Ok(MeasurementSetup {
        alpha,
        beta,
        psi_r: psi_r.clone(),
        psi_r_evolved,
        psi_d_evolved,
        p_e_vector: e_raw.unscale(e_raw.norm()),
        psi_i,
        delta_amp,
        chi_family,
        c: dec.c,
    })
}

/// `|Delta|^2`, the chance of the `P_I` click when the box is occupied.
pub fn success_probability(setup: &MeasurementSetup) -> f64 {
    setup.delta_amp.norm_sqr()
}

/// `Prob(alpha)`, with a degenerate split counted as zero.
pub fn success_probability_at(
    spec: &SystemSpec,
    witness: &Witness,
    alpha: f64,
    psi_r: &CVector,
    tol: &Tolerances,
) -> Result<f64> {
    match construct_measurement(spec, witness, alpha, psi_r, tol) {
        Ok(setup) => Ok(success_probability(&setup)),
        Err(Error::DegenerateAlpha { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Upper end of the `alpha` search interval.
pub const ALPHA_MAX: f64 = 1.0 - 1e-9;

/// Maximizes `Prob(alpha)` over `alpha in [0, 1)`: a uniform scan with
/// `resolution` points, then golden-section refinement around the best one.
pub fn optimize_alpha(
    spec: &SystemSpec,
    witness: &Witness,
    psi_r: &CVector,
    resolution: usize,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    if !witness.feasible {
        return Err(Error::InfeasibleWitness);
    }
    let points = resolution.max(3);
    let h = ALPHA_MAX / (points - 1) as f64;
    let prob = |alpha: f64| success_probability_at(spec, witness, alpha, psi_r, tol);

    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..points {
        let alpha = k as f64 * h;
        let p = prob(alpha)?;
        if p > best.1 {
            best = (alpha, p);
        }
    }

    let (mut lo, mut hi) = ((best.0 - h).max(0.0), (best.0 + h).min(ALPHA_MAX));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (prob(x1)?, prob(x2)?);
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = prob(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = prob(x1)?;
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f > best.1 {
            best = (x, f);
        }
    }
    Ok(best)
}
