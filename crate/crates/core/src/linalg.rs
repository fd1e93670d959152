//! Dense complex linear algebra used throughout the crate.
//!
//! Vectors and matrices are plain `nalgebra` dynamic types over `Complex64`.
//! Everything here is a pure function of its inputs.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Direction of time in a propagator `exp(-i * sign * H * t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

/// `<a|b>`, antilinear in the first argument.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    max_abs(&(h - h.adjoint()))
}

/// `max |U^dagger U - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// Checks squareness and Hermiticity relative to the matrix scale.
pub fn ensure_hermitian(h: &CMatrix, eps_herm: f64, what: &'static str) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::NonSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    let deviation = hermiticity_defect(h);
    if deviation > eps_herm * max_abs(h).max(1.0) {
        return Err(Error::NonHermitian { what, deviation });
    }
    Ok(())
}

/// `exp(-i * sign * H * t)` for Hermitian `H`, via `H = V diag(lambda) V^dagger`.
pub fn expm_hermitian(h: &CMatrix, t: f64, direction: Direction, eps_herm: f64) -> Result<CMatrix> {
    ensure_hermitian(h, eps_herm, "generator")?;
    let n = h.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    // Symmetrize so roundoff asymmetry does not leak into the eigenvectors.
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let phase = -direction.sign() * t;
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let factor = (I * (lambda * phase)).exp();
        for z in scaled.column_mut(j).iter_mut() {
            *z *= factor;
        }
    }
    Ok(scaled * v.adjoint())
}

/// Forward propagator `exp(-i H t)`.
pub fn propagator(h: &CMatrix, t: f64, eps_herm: f64) -> Result<CMatrix> {
    expm_hermitian(h, t, Direction::Forward, eps_herm)
}

/// Singular values in descending order. Wide matrices are zero-padded so the
/// right singular vectors always form a full basis.
fn padded_svd(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (rows, cols) = m.shape();
    let tall = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(tall, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    (svd.singular_values.iter().copied().collect(), v_t)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

/// Number of singular values above `tol_rel * sigma_max`.
pub fn rank(m: &CMatrix, tol_rel: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol_rel * smax).count()
}

/// Orthonormal basis of `{v : M v = 0}`, with singular values at or below
/// `tol_rel * sigma_max` treated as zero.
pub fn null_space(m: &CMatrix, tol_rel: f64) -> Vec<CVector> {
    null_space_with(m, |smax| tol_rel * smax)
}

/// Like [`null_space`] but with an absolute singular-value cutoff, for when the
/// natural scale lives outside `M` itself.
pub fn null_space_below(m: &CMatrix, cutoff: f64) -> Vec<CVector> {
    null_space_with(m, |_| cutoff)
}

fn null_space_with(m: &CMatrix, cutoff: impl Fn(f64) -> f64) -> Vec<CVector> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Vec::new();
    }
    if rows == 0 {
        return (0..cols).map(|i| basis_vector(cols, i)).collect();
    }
    let (sv, v_t) = padded_svd(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let cut = cutoff(smax);
    sv.iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= cut)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect()
}

/// Result of extending an orthonormal set.
#[derive(Debug, Clone, Default)]
pub struct Extension {
    /// New orthonormal vectors, in the order their candidates were accepted.
    pub added: Vec<CVector>,
    /// Candidate index that produced each entry of `added`.
    pub sources: Vec<usize>,
    /// Candidates found linearly dependent on what came before.
    pub skipped: Vec<usize>,
}

impl Extension {
    /// The vector contributed by candidate `index`, if it was not skipped.
    pub fn from_candidate(&self, index: usize) -> Option<&CVector> {
        self.sources
            .iter()
            .position(|&s| s == index)
            .map(|k| &self.added[k])
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// `fixed` must already be orthonormal. Candidates are processed in order; a
/// candidate whose residual norm is at most `tol` is recorded in `skipped`.
pub fn gram_schmidt_extend(fixed: &[CVector], candidates: &[CVector], tol: f64) -> Extension {
    let mut basis: Vec<CVector> = fixed.to_vec();
    let mut out = Extension::default();
    for (idx, cand) in candidates.iter().enumerate() {
        let mut r = cand.clone();
        for _pass in 0..2 {
            for q in &basis {
                let proj = inner(q, &r);
                r.axpy(-proj, q, ONE);
            }
        }
        let norm = r.norm();
        if norm <= tol {
            out.skipped.push(idx);
            continue;
        }
        r.unscale_mut(norm);
        basis.push(r.clone());
        out.added.push(r);
        out.sources.push(idx);
    }
    out
}

/// Kronecker product `A (x) B`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

fn check_bipartite(m: &CMatrix, dims: (usize, usize)) -> Result<()> {
    let total = dims.0 * dims.1;
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: total,
            found: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

/// Traces out the second factor of `M` on `H_A (x) H_B`, `dims = (dim A, dim B)`.
pub fn partial_trace_second(m: &CMatrix, dims: (usize, usize)) -> Result<CMatrix> {
    check_bipartite(m, dims)?;
    let (a, b) = dims;
    Ok(CMatrix::from_fn(a, a, |i, j| {
        (0..b).map(|k| m[(i * b + k, j * b + k)]).sum()
    }))
}

/// Traces out the first factor of `M` on `H_A (x) H_B`.
pub fn partial_trace_first(m: &CMatrix, dims: (usize, usize)) -> Result<CMatrix> {
    check_bipartite(m, dims)?;
    let (a, b) = dims;
    Ok(CMatrix::from_fn(b, b, |k, l| {
        (0..a).map(|i| m[(i * b + k, i * b + l)]).sum()
    }))
}

/// Columns-as-vectors view of a basis.
pub fn stack_columns(vectors: &[CVector], dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}
