//! Probe/object setup and the interrogation operator.
//!
//! Index conventions used everywhere in the crate:
//!
//! * probe space `H_D = H_r (+) H_d`: reference-branch states first
//!   (`0..dim_r`), detecting-branch states after (`dim_r..dim_r + m`);
//! * extended object space: the `n` metastable states of `H_S` first, then
//!   the `n_ext - n` decaying states of `H_S^perp`;
//! * joint space `H_D (x) H_S,ext`, probe-major: `index = p * n_ext + s`;
//! * the interrogation operator acts on `H_d (x) H_S`, detecting-major:
//!   `index = d * n + s`.
//!
//! `hbar = 1`; Hamiltonian entries are angular frequencies.

use crate::error::{Error, Result};
use crate::linalg::{
    ensure_hermitian, expm_hermitian, max_abs, singular_values, tensor, CMatrix, CVector,
    Direction, C64, ZERO,
};
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    /// Dimension of the metastable object space `H_S`.
    pub n: usize,
    /// Dimension of `H_S (+) H_S^perp`.
    pub n_ext: usize,
    /// Dimension of the detecting branch `H_d`.
    pub m: usize,
    /// Dimension of the reference branch `H_r`.
    pub dim_r: usize,
    /// Free object Hamiltonian on the extended object space.
    pub h_object: CMatrix,
    /// Free probe Hamiltonian on `H_r (+) H_d`.
    pub h_probe: CMatrix,
    /// Interaction on `H_d (x) H_S,ext`; implicitly zero on the reference branch.
    pub h_interaction: CMatrix,
    /// Interaction time.
    pub t: f64,
}

impl SystemSpec {
    /// Validates dimensions, Hermiticity and the block structure the
    /// framework relies on.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        n_ext: usize,
        m: usize,
        dim_r: usize,
        h_object: CMatrix,
        h_probe: CMatrix,
        h_interaction: CMatrix,
        t: f64,
        eps_herm: f64,
    ) -> Result<Self> {
        let spec = SystemSpec {
            n,
            n_ext,
            m,
            dim_r,
            h_object,
            h_probe,
            h_interaction,
            t,
        };
        spec.validate(eps_herm)?;
        Ok(spec)
    }

    pub fn validate(&self, eps_herm: f64) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.dim_r == 0 {
            return Err(Error::InvalidParameter(
                "n, m and dim_r must all be at least 1".into(),
            ));
        }
        if self.n_ext < self.n {
            return Err(Error::InvalidParameter(format!(
                "n_ext = {} is smaller than n = {}",
                self.n_ext, self.n
            )));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "interaction time must be positive, got {}",
                self.t
            )));
        }
        check_square(&self.h_object, self.n_ext, "object Hamiltonian")?;
        check_square(&self.h_probe, self.probe_dim(), "probe Hamiltonian")?;
        check_square(&self.h_interaction, self.m * self.n_ext, "interaction Hamiltonian")?;
        ensure_hermitian(&self.h_object, eps_herm, "object Hamiltonian")?;
        ensure_hermitian(&self.h_probe, eps_herm, "probe Hamiltonian")?;
        ensure_hermitian(&self.h_interaction, eps_herm, "interaction Hamiltonian")?;

        let scale = max_abs(&self.h_probe).max(1.0);
        let coupling = off_block_max(&self.h_probe, self.dim_r);
        if coupling > eps_herm * scale {
            return Err(Error::BranchCoupling { coupling });
        }
        let scale = max_abs(&self.h_object).max(1.0);
        let coupling = off_block_max(&self.h_object, self.n);
        if coupling > eps_herm * scale {
            return Err(Error::ObjectLeakCoupling { coupling });
        }
        Ok(())
    }

    pub fn probe_dim(&self) -> usize {
        self.dim_r + self.m
    }

    pub fn joint_dim(&self) -> usize {
        self.probe_dim() * self.n_ext
    }

    /// `H^D (x) I + I (x) H^S` on the joint space.
    pub fn free_hamiltonian(&self) -> CMatrix {
        tensor(&self.h_probe, &CMatrix::identity(self.n_ext, self.n_ext))
            + tensor(&CMatrix::identity(self.probe_dim(), self.probe_dim()), &self.h_object)
    }

    /// The interaction lifted to the joint space, zero on `H_r (x) H_S,ext`.
    pub fn interaction_on_joint(&self) -> CMatrix {
        let dim = self.joint_dim();
        let offset = self.dim_r * self.n_ext;
        let block = self.m * self.n_ext;
        let mut h = CMatrix::zeros(dim, dim);
        h.view_mut((offset, offset), (block, block))
            .copy_from(&self.h_interaction);
        h
    }

    pub fn total_hamiltonian(&self) -> CMatrix {
        self.free_hamiltonian() + self.interaction_on_joint()
    }

    /// Joint-space indices of `H_d (x) H_S`, in detecting-major order.
    pub fn detecting_object_indices(&self) -> Vec<usize> {
        (0..self.m)
            .flat_map(|d| (0..self.n).map(move |s| (self.dim_r + d) * self.n_ext + s))
            .collect()
    }

    pub fn is_nondecay_index(&self, joint_index: usize) -> bool {
        joint_index % self.n_ext < self.n
    }

    /// Lifts a reference-branch vector into `H_D`.
    pub fn embed_reference(&self, v: &CVector) -> Result<CVector> {
        check_len(v, self.dim_r, "reference-branch vector")?;
        let mut out = CVector::zeros(self.probe_dim());
        out.rows_mut(0, self.dim_r).copy_from(v);
        Ok(out)
    }

    /// Lifts a detecting-branch vector into `H_D`.
    pub fn embed_detecting(&self, v: &CVector) -> Result<CVector> {
        check_len(v, self.m, "detecting-branch vector")?;
        let mut out = CVector::zeros(self.probe_dim());
        out.rows_mut(self.dim_r, self.m).copy_from(v);
        Ok(out)
    }

    /// Lifts an `H_S` vector into the extended object space.
    pub fn embed_object(&self, v: &CVector) -> Result<CVector> {
        check_len(v, self.n, "object state")?;
        let mut out = CVector::zeros(self.n_ext);
        out.rows_mut(0, self.n).copy_from(v);
        Ok(out)
    }

    /// Detecting-branch coordinates of an `H_D` vector.
    pub fn detecting_part(&self, v: &CVector) -> CVector {
        v.rows(self.dim_r, self.m).into_owned()
    }

    /// Precomputes every propagator a protocol run needs.
    pub fn dynamics(&self, tol: &Tolerances) -> Result<Dynamics> {
        let t = self.t;
        let eps = tol.eps_herm;
        let free = expm_hermitian(&self.free_hamiltonian(), t, Direction::Forward, eps)?;
        let full = expm_hermitian(&self.total_hamiltonian(), t, Direction::Forward, eps)?;
        let probe_free = expm_hermitian(&self.h_probe, t, Direction::Forward, eps)?;
        let object_free = expm_hermitian(&self.h_object, t, Direction::Forward, eps)?;
        Ok(Dynamics {
            free,
            full,
            probe_free,
            object_free,
        })
    }

    /// Zeroes amplitude outside `H_D (x) H_S` and books it as decay.
    /// Amplitudes are not renormalized.
    pub fn apply_nondecay_projection(&self, state: &JointState) -> JointState {
        let mut out = state.clone();
        let mut leaked = 0.0;
        for (idx, z) in out.amplitudes.iter_mut().enumerate() {
            if !self.is_nondecay_index(idx) {
                leaked += z.norm_sqr();
                *z = ZERO;
            }
        }
        out.leaked_probability += leaked;
        out
    }

    /// Sends `probe (x) object` through the box once (one passage of the
    /// detecting branch), followed by the decay check when `occupied`.
    pub fn evolve_joint(
        &self,
        dynamics: &Dynamics,
        probe: &CVector,
        object: &CVector,
        occupied: bool,
    ) -> Result<JointState> {
        check_len(probe, self.probe_dim(), "probe state")?;
        check_unit(probe, "probe state")?;
        check_unit(object, "object state")?;
        let initial = JointState::product(probe, &self.embed_object(object)?);
        Ok(self.step(dynamics, &initial, occupied))
    }

    /// One interaction period applied to an arbitrary (possibly
    /// subnormalized) joint state.
    pub fn step(&self, dynamics: &Dynamics, state: &JointState, occupied: bool) -> JointState {
        let u = if occupied {
            &dynamics.full
        } else {
            &dynamics.free
        };
        let evolved = JointState {
            amplitudes: u * &state.amplitudes,
            leaked_probability: state.leaked_probability,
        };
        if occupied {
            self.apply_nondecay_projection(&evolved)
        } else {
            evolved
        }
    }
}

fn check_square(m: &CMatrix, dim: usize, context: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch {
            context,
            expected: dim,
            found: m.nrows(),
        });
    }
    Ok(())
}

pub(crate) fn check_len(v: &CVector, dim: usize, context: &'static str) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            context,
            expected: dim,
            found: v.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_unit(v: &CVector, what: &'static str) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NormViolation { what, norm });
    }
    Ok(())
}

/// Largest entry coupling indices `< split` to indices `>= split`.
fn off_block_max(h: &CMatrix, split: usize) -> f64 {
    let dim = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..split.min(dim) {
        for j in split..dim {
            worst = worst.max(h[(i, j)].norm()).max(h[(j, i)].norm());
        }
    }
    worst
}

/// Propagators for one interaction period.
#[derive(Debug, Clone)]
pub struct Dynamics {
    /// `exp(-i (H^S + H^D) t)` on the joint space.
    pub free: CMatrix,
    /// `exp(-i (H^S + H^D + H^I) t)` on the joint space.
    pub full: CMatrix,
    /// `exp(-i H^D t)` on `H_D`.
    pub probe_free: CMatrix,
    /// `exp(-i H^S t)` on the extended object space.
    pub object_free: CMatrix,
}

impl Dynamics {
    /// `exp(-i H t) exp(+i H_0 t)`: unitary whose `H_d (x) H_S` block is `D`.
    pub fn interaction_picture(&self) -> CMatrix {
        &self.full * self.free.adjoint()
    }
}

/// Unnormalized joint state plus the probability already lost to decay
/// (or, in iterative protocols, to failed inter-loop projections).
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub amplitudes: CVector,
    pub leaked_probability: f64,
}

impl JointState {
    pub fn product(probe: &CVector, object_ext: &CVector) -> Self {
        JointState {
            amplitudes: probe.kronecker(object_ext),
            leaked_probability: 0.0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `||amplitudes||^2 + leaked`, which stays at 1 for a normalized start.
    pub fn total_probability(&self) -> f64 {
        self.norm_sqr() + self.leaked_probability
    }

    /// `(<phi| (x) I) |state>`, a vector on the extended object space.
    pub fn contract_probe(&self, phi: &CVector, n_ext: usize) -> CVector {
        let probe_dim = self.amplitudes.len() / n_ext;
        CVector::from_fn(n_ext, |s, _| {
            (0..probe_dim)
                .map(|p| phi[p].conj() * self.amplitudes[p * n_ext + s])
                .sum::<C64>()
        })
    }
}

/// The restricted evolution block `D` on `H_d (x) H_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterrogationOperator {
    pub matrix: CMatrix,
    pub m: usize,
    pub n: usize,
    pub source: String,
}

impl InterrogationOperator {
    /// Wraps a raw `mn x mn` matrix, e.g. a block cut from a known unitary.
    pub fn from_matrix(matrix: CMatrix, m: usize, n: usize, source: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != m * n || matrix.ncols() != m * n {
            return Err(Error::DimensionMismatch {
                context: "interrogation operator",
                expected: m * n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(InterrogationOperator {
            matrix,
            m,
            n,
            source: source.into(),
        })
    }

    /// `d_{i,j;k,l} = <i|<k| D |j>|l>` with `i, j` in `H_d` and `k, l` in `H_S`.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.matrix[(i * self.n + k, j * self.n + l)]
    }

    /// The `n x n` object operator `<bra| D |ket>` for `bra, ket` in `H_d`.
    pub fn object_block(&self, bra: &CVector, ket: &CVector) -> CMatrix {
        let (m, n) = (self.m, self.n);
        CMatrix::from_fn(n, n, |k, l| {
            let mut acc = ZERO;
            for i in 0..m {
                let bi = bra[i].conj();
                if bi == ZERO {
                    continue;
                }
                for j in 0..m {
                    acc += bi * self.matrix[(i * n + k, j * n + l)] * ket[j];
                }
            }
            acc
        })
    }

    /// Largest singular value; at most 1 for a block of a unitary.
    pub fn operator_norm(&self) -> f64 {
        singular_values(&self.matrix)
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// `D = P_dS exp(-i(H^S+H^D+H^I)t) exp(+i(H^S+H^D)t) P_dS`, restricted to
/// `H_d (x) H_S`.
pub fn build_interrogation_operator(spec: &SystemSpec, tol: &Tolerances) -> Result<InterrogationOperator> {
    spec.validate(tol.eps_herm)?;
    let dynamics = spec.dynamics(tol)?;
    Ok(interrogation_operator_from(spec, &dynamics))
}

pub fn interrogation_operator_from(spec: &SystemSpec, dynamics: &Dynamics) -> InterrogationOperator {
    let w = dynamics.interaction_picture();
    let idx = spec.detecting_object_indices();
    let matrix = CMatrix::from_fn(idx.len(), idx.len(), |a, b| w[(idx[a], idx[b])]);
    InterrogationOperator {
        matrix,
        m: spec.m,
        n: spec.n,
        source: "interaction-picture block of the system propagator".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, unitarity_defect, ONE};
    use crate::random;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    /// Two-level probe branch coupled to a two-level object with one decaying level.
    fn random_spec(rng: &mut StdRng, m: usize, n: usize, n_ext: usize, dim_r: usize) -> SystemSpec {
        random::system_spec(m, n, n_ext, dim_r, rng)
    }

    fn empty_interaction(spec: &SystemSpec) -> SystemSpec {
        let mut s = spec.clone();
        s.h_interaction = CMatrix::zeros(s.m * s.n_ext, s.m * s.n_ext);
        s
    }

    #[test]
    fn no_interaction_gives_identity() {
        let mut rng = StdRng::seed_from_u64(1);
        let spec = empty_interaction(&random_spec(&mut rng, 2, 2, 3, 1));
        let d = build_interrogation_operator(&spec, &Tolerances::default()).unwrap();
        assert!(max_abs(&(d.matrix - CMatrix::identity(4, 4))) < 1e-10);
    }

    #[test]
    fn resonant_coupling_is_a_strict_contraction() {
        // |d>|m> <-> |d>|e> at g t = pi/2, free Hamiltonians zero
        let (m, n, n_ext) = (1, 1, 2);
        let g = 1.0;
        let t = std::f64::consts::FRAC_PI_2;
        let mut h_int = CMatrix::zeros(2, 2);
        h_int[(0, 1)] = C64::from(g);
        h_int[(1, 0)] = C64::from(g);
        let spec = SystemSpec::new(n, n_ext, m, 1, CMatrix::zeros(2, 2), CMatrix::zeros(2, 2), h_int, t, 1e-12).unwrap();
        let d = build_interrogation_operator(&spec, &Tolerances::default()).unwrap();
        let sv = singular_values(&d.matrix);
        assert!(sv.iter().all(|&s| s <= 1.0 + 1e-10));
        assert!(sv.iter().any(|&s| s < 1.0));
        assert!(d.matrix[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn rejects_malformed_specs() {
        let mut rng = StdRng::seed_from_u64(2);
        let good = random_spec(&mut rng, 2, 2, 3, 1);

        let mut bad = good.clone();
        bad.h_probe[(0, 1)] = ONE;
        bad.h_probe[(1, 0)] = ONE;
        assert!(matches!(bad.validate(1e-12), Err(Error::BranchCoupling { .. })));

        let mut bad = good.clone();
        bad.h_object[(0, 2)] = ONE;
        bad.h_object[(2, 0)] = ONE;
        assert!(matches!(bad.validate(1e-12), Err(Error::ObjectLeakCoupling { .. })));

        let mut bad = good.clone();
        bad.h_interaction[(0, 1)] += ONE;
        assert!(matches!(bad.validate(1e-12), Err(Error::NonHermitian { .. })));

        let mut bad = good.clone();
        bad.h_interaction = CMatrix::zeros(5, 5);
        assert!(matches!(bad.validate(1e-12), Err(Error::DimensionMismatch { .. })));

        let mut bad = good;
        bad.n_ext = 1;
        assert!(bad.validate(1e-12).is_err());
    }

    #[test]
    fn nondecay_projection_books_leakage() {
        let mut rng = StdRng::seed_from_u64(3);
        let spec = random_spec(&mut rng, 1, 1, 2, 1);
        // probe |d>, object superposition of |m> and |e>
        let s = 1.0 / 2f64.sqrt();
        let inside = basis_vector(4, 2);
        let outside = basis_vector(4, 3);
        let state = JointState {
            amplitudes: (inside.clone() + outside) * C64::from(s),
            leaked_probability: 0.0,
        };
        let out = spec.apply_nondecay_projection(&state);
        assert!((out.leaked_probability - 0.5).abs() < 1e-15);
        assert!((out.norm_sqr() - 0.5).abs() < 1e-15);

        let clean = JointState {
            amplitudes: inside,
            leaked_probability: 0.0,
        };
        assert_eq!(spec.apply_nondecay_projection(&clean), clean);
    }

    #[test]
    fn empty_box_is_free_evolution() {
        let mut rng = StdRng::seed_from_u64(4);
        let spec = random_spec(&mut rng, 2, 2, 3, 1);
        let tol = Tolerances::default();
        let dyn_ = spec.dynamics(&tol).unwrap();
        let probe = random::state(3, &mut rng);
        let object = random::state(2, &mut rng);
        let out = spec.evolve_joint(&dyn_, &probe, &object, false).unwrap();
        let expected = (&dyn_.probe_free * &probe)
            .kronecker(&(&dyn_.object_free * spec.embed_object(&object).unwrap()));
        assert!((out.amplitudes - expected).norm() < 1e-12);
        assert_eq!(out.leaked_probability, 0.0);
    }

    #[test]
    fn occupied_detecting_block_matches_interrogation_operator() {
        let mut rng = StdRng::seed_from_u64(5);
        let spec = random_spec(&mut rng, 2, 2, 4, 2);
        let tol = Tolerances::default();
        let dyn_ = spec.dynamics(&tol).unwrap();
        let d = interrogation_operator_from(&spec, &dyn_);
        let probe = random::state(4, &mut rng);
        let object = random::state(2, &mut rng);
        let out = spec.evolve_joint(&dyn_, &probe, &object, true).unwrap();

        // beta D |psi_d'>|psi_S'> with primes denoting free evolution
        let evolved_probe = &dyn_.probe_free * &probe;
        let psi_d_prime = spec.detecting_part(&evolved_probe);
        let psi_s_prime = (&dyn_.object_free * spec.embed_object(&object).unwrap()).rows(0, 2).into_owned();
        let expected_block = &d.matrix * psi_d_prime.kronecker(&psi_s_prime);
        let idx = spec.detecting_object_indices();
        for (a, &j) in idx.iter().enumerate() {
            assert!((out.amplitudes[j] - expected_block[a]).norm() < 1e-10);
        }
        // reference branch is untouched free evolution
        for r in 0..spec.dim_r {
            for s in 0..spec.n_ext {
                let expected = evolved_probe[r] * (&dyn_.object_free * spec.embed_object(&object).unwrap())[s];
                assert!((out.amplitudes[r * spec.n_ext + s] - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn evolve_rejects_unnormalized_inputs() {
        let mut rng = StdRng::seed_from_u64(6);
        let spec = random_spec(&mut rng, 1, 1, 2, 1);
        let dyn_ = spec.dynamics(&Tolerances::default()).unwrap();
        let probe = CVector::from_element(2, ONE);
        let object = CVector::from_element(1, ONE);
        assert!(matches!(
            spec.evolve_joint(&dyn_, &probe, &object, true),
            Err(Error::NormViolation { .. })
        ));
    }

    #[test]
    fn interaction_picture_block_structure() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let spec = random_spec(&mut rng, 2, 2, 3, 1);
            let dyn_ = spec.dynamics(&Tolerances::default()).unwrap();
            let w = dyn_.interaction_picture();
            assert!(unitarity_defect(&w) <= 1e-9);
            let d = interrogation_operator_from(&spec, &dyn_);
            assert!(d.operator_norm() <= 1.0 + 1e-10);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn probability_is_conserved(seed in any::<u64>(), occupied in any::<bool>()) {
                let mut rng = StdRng::seed_from_u64(seed);
                let m = rng.random_range(1..=3);
                let n = rng.random_range(1..=2);
                let n_ext = n + rng.random_range(0..=2);
                let spec = random_spec(&mut rng, m, n, n_ext, 1);
                let dyn_ = spec.dynamics(&Tolerances::default()).unwrap();
                let probe = random::state(spec.probe_dim(), &mut rng);
                let object = random::state(n, &mut rng);
                let out = spec.evolve_joint(&dyn_, &probe, &object, occupied).unwrap();
                prop_assert!((out.total_probability() - 1.0).abs() <= 1e-9);
                if !occupied {
                    prop_assert_eq!(out.leaked_probability, 0.0);
                    let projected = spec.apply_nondecay_projection(&out);
                    prop_assert!((projected.amplitudes - &out.amplitudes).norm() < 1e-12);
                }
            }
        }
    }
}
