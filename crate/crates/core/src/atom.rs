//! Multi-level atom probed by single circularly polarized photons.
//!
//! The atom sits in a superposition of two degenerate metastable states
//! `|m+>, |m->`. A `+` (`-`) photon drives `|m+> <-> |e+>` (`|m-> <-> |e->`)
//! resonantly with coupling `g+` (`g-`); the excited states decay. With one
//! photon the dynamics never leave the six-state sector
//! `{|e+>|0>, |e->|0>, |mk>|k'>}`.
//!
//! Embedding into the generic model: `H_d = span{|+>, |->}`, one reference
//! mode in `H_r`, `H_S = span{|m+>, |m->}` and `H_S^perp = span{|e+>, |e->}`.
//! The excited level keeps the absorbed photon's polarization as its probe
//! label, so `|e k>|0>` is stored as `|k>|e k>` and all of the energy `omega`
//! is booked on the probe. That makes the free Hamiltonian `omega * I`, whose
//! only trace is the global phase `exp(-i omega t)`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::criterion::{build_witness, Witness};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64, I, ONE};
use crate::model::{build_interrogation_operator, SystemSpec};
use crate::tol::Tolerances;

/// Optimal single-shot success probability of the Pötting configuration.
pub const POTTING_P_OPT: f64 = 1.0 / 16.0;

const M_PLUS: usize = 0;
const M_MINUS: usize = 1;
const E_PLUS: usize = 2;
const E_MINUS: usize = 3;
const N_EXT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    pub g_plus: f64,
    pub g_minus: f64,
    pub t: f64,
    /// Transition frequency; only ever a global phase.
    pub omega: f64,
}

impl AtomParams {
    pub fn new(g_plus: f64, g_minus: f64, t: f64) -> Result<Self> {
        let params = AtomParams {
            g_plus,
            g_minus,
            t,
            omega: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with `cos(g+ t) = p_plus`, `cos(g- t) = p_minus` at `t = 1`.
    pub fn from_p(p_plus: f64, p_minus: f64) -> Result<Self> {
        for p in [p_plus, p_minus] {
            if !(-1.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("p = {p} is outside [-1, 1]")));
            }
        }
        Self::new(p_plus.acos(), p_minus.acos(), 1.0)
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_plus >= 0.0 && self.g_minus >= 0.0) {
            return Err(Error::InvalidParameter("couplings must be non-negative".into()));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter("interaction time must be positive".into()));
        }
        Ok(())
    }

    pub fn p_plus(&self) -> f64 {
        (self.g_plus * self.t).cos()
    }

    pub fn p_minus(&self) -> f64 {
        (self.g_minus * self.t).cos()
    }
}

/// Joint index of `|probe>|object>` with one reference mode in front of the
/// two polarization modes.
fn joint(probe: usize, object: usize) -> usize {
    probe * N_EXT + object
}

/// Detecting-branch index of polarization `+` / `-` inside `H_D`.
const PROBE_PLUS: usize = 1;
const PROBE_MINUS: usize = 2;

pub fn build_atom_spec(params: &AtomParams) -> Result<SystemSpec> {
    params.validate()?;
    let mut h_int = CMatrix::zeros(2 * N_EXT, 2 * N_EXT);
    // H_d (x) H_S,ext, detecting-major: |+> is 0, |-> is 1
    for (pol, m, e, g) in [
        (0, M_PLUS, E_PLUS, params.g_plus),
        (1, M_MINUS, E_MINUS, params.g_minus),
    ] {
        let ground = pol * N_EXT + m;
        let excited = pol * N_EXT + e;
        h_int[(excited, ground)] = C64::from(g);
        h_int[(ground, excited)] = C64::from(g);
    }
    let h_probe = CMatrix::identity(3, 3) * C64::from(params.omega);
    SystemSpec::new(
        2,
        N_EXT,
        2,
        1,
        CMatrix::zeros(N_EXT, N_EXT),
        h_probe,
        h_int,
        params.t,
        Tolerances::default().eps_herm,
    )
}

/// `D` written down directly: `diag(p+, 1, 1, p-)` in the basis
/// `{|+>|m+>, |+>|m->, |->|m+>, |->|m->}`.
pub fn expected_interrogation_operator(params: &AtomParams) -> CMatrix {
    let mut d = CMatrix::zeros(4, 4);
    d[(0, 0)] = C64::from(params.p_plus());
    d[(1, 1)] = ONE;
    d[(2, 2)] = ONE;
    d[(3, 3)] = C64::from(params.p_minus());
    d
}

/// Joint-space indices of the sector basis
/// `[|e+>|0>, |e->|0>, |m+>|+>, |m+>|->, |m->|+>, |m->|->]`.
pub fn sector_indices() -> [usize; 6] {
    [
        joint(PROBE_PLUS, E_PLUS),
        joint(PROBE_MINUS, E_MINUS),
        joint(PROBE_PLUS, M_PLUS),
        joint(PROBE_MINUS, M_PLUS),
        joint(PROBE_PLUS, M_MINUS),
        joint(PROBE_MINUS, M_MINUS),
    ]
}

/// The closed-form one-photon propagator on the six-state sector, in the
/// order of [`sector_indices`].
pub fn sector_propagator(params: &AtomParams) -> CMatrix {
    let t = params.t;
    let mut u = CMatrix::zeros(6, 6);
    // (excited, resonant ground) pairs with their couplings
    for (e, g_idx, g) in [(0, 2, params.g_plus), (1, 5, params.g_minus)] {
        let (c, s) = ((g * t).cos(), (g * t).sin());
        u[(g_idx, g_idx)] = C64::from(c);
        u[(e, e)] = C64::from(c);
        u[(e, g_idx)] = -I * s;
        u[(g_idx, e)] = -I * s;
    }
    // off-resonant pairs |m->|+>, |m+>|-> are untouched
    u[(4, 4)] = ONE;
    u[(3, 3)] = ONE;
    u * (-I * params.omega * t).exp()
}

/// The `a` coefficients and `|c|` solving the witness equations in closed
/// form, or `None` when `p+ p- = 1` or `b+ b- = 0`.
pub fn closed_form_witness(params: &AtomParams, b: &CVector) -> Option<(CVector, f64)> {
    let (pp, pm) = (params.p_plus(), params.p_minus());
    let (bp, bm) = (b[0], b[1]);
    if (pp * pm - 1.0).abs() < 1e-12 || (bp * bm).norm() < 1e-12 {
        return None;
    }
    let c_mag = (bp * bm).norm() * (1.0 - pp * pm)
        / ((pm - 1.0).powi(2) * bm.norm_sqr() + (pp - 1.0).powi(2) * bp.norm_sqr()).sqrt();
    let c = C64::from(c_mag);
    let a_plus = c * (pm - 1.0) / ((pp * pm - 1.0) * bp);
    let a_minus = c * (pp - 1.0) / ((pp * pm - 1.0) * bm);
    Some((CVector::from_vec(vec![a_plus, a_minus]), c_mag))
}

/// `(|-> - |+>) / sqrt 2` in the `(+, -)` basis.
pub fn potting_chi() -> CVector {
    CVector::from_vec(vec![C64::from(-FRAC_1_SQRT_2), C64::from(FRAC_1_SQRT_2)])
}

/// The `p+ = p- = 0` atom with `chi = psi_d' = (|-> - |+>)/sqrt 2`, `c = 1/2`.
#[derive(Debug, Clone)]
pub struct PottingConfiguration {
    pub params: AtomParams,
    pub spec: SystemSpec,
    pub witness: Witness,
    pub expected_p_opt: f64,
}

pub fn potting_configuration() -> Result<PottingConfiguration> {
    let params = AtomParams::new(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, 1.0)?;
    let spec = build_atom_spec(&params)?;
    let tol = Tolerances::default();
    let d = build_interrogation_operator(&spec, &tol)?;
    let chi = potting_chi();
    let witness = build_witness(&d, &chi, &chi, C64::from(0.5), &tol)?;
    Ok(PottingConfiguration {
        params,
        spec,
        witness,
        expected_p_opt: POTTING_P_OPT,
    })
}
