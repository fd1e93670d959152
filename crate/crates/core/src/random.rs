//! Random states and operators for tests, examples and randomized checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{gram_schmidt_extend, CMatrix, CVector, C64};
use crate::model::SystemSpec;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unit vector.
pub fn state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let a = matrix(dim, dim, rng);
    (&a + a.adjoint()).scale(0.5)
}

/// Haar-random unitary from orthonormalized Gaussian columns.
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    loop {
        let cols: Vec<CVector> = (0..dim).map(|_| state(dim, rng)).collect();
        let ext = gram_schmidt_extend(&[], &cols, 1e-6);
        if ext.added.len() == dim {
            return crate::linalg::stack_columns(&ext.added, dim);
        }
    }
}

fn block_diagonal<R: Rng + ?Sized>(split: usize, dim: usize, rng: &mut R) -> CMatrix {
    let mut h = CMatrix::zeros(dim, dim);
    h.view_mut((0, 0), (split, split)).copy_from(&hermitian(split, rng));
    let k = dim - split;
    if k > 0 {
        h.view_mut((split, split), (k, k)).copy_from(&hermitian(k, rng));
    }
    h
}

/// A valid system with random Hamiltonians: `H^D` block-diagonal over
/// `H_r (+) H_d`, `H^S` block-diagonal over `H_S (+) H_S^perp`, a dense
/// interaction and `t` in `[0.2, 2)`.
pub fn system_spec<R: Rng + ?Sized>(m: usize, n: usize, n_ext: usize, dim_r: usize, rng: &mut R) -> SystemSpec {
    let h_probe = block_diagonal(dim_r, dim_r + m, rng);
    let h_object = block_diagonal(n, n_ext, rng);
    let h_int = hermitian(m * n_ext, rng);
    let t = rng.random_range(0.2..2.0);
    SystemSpec::new(n, n_ext, m, dim_r, h_object, h_probe, h_int, t, 1e-12).expect("block-diagonal Hamiltonians are valid")
}
