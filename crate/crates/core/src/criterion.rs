//! Single-shot feasibility.
//!
//! A system admits a single-shot nondistortion interrogation iff there are
//! unit vectors `chi`, `psi_d` in `H_d` with `<chi|D|psi_d> = c I_S`, and
//! `psi_d - c chi` is linearly independent of the vectors `chi_j` that
//! complete `chi` to a basis of the support of `D |psi_d>`.
//!
//! For a fixed `psi_d = sum_j b_j |j>` the first condition is linear in the
//! coefficients `a_i` of `<chi| = sum_i a_i <i|`; [`solve_chi_for_fixed_b`]
//! decides it with a rank test and [`search_feasible_probe`] scans `b` over a
//! deterministic grid. The grid is a heuristic: an infeasible verdict means no
//! grid point worked, not that no probe exists.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{
    gram_schmidt_extend, inner, max_abs, null_space, null_space_below, partial_trace_second, rank,
    singular_values, stack_columns, CMatrix, CVector, C64, ONE, ZERO,
};
use crate::model::{check_len, check_unit, InterrogationOperator};
use crate::tol::Tolerances;

/// Probe-grid resolution for [`search_feasible_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Points per direction of the `|b_j|^2` simplex.
    pub magnitude_points: usize,
    /// Relative phases per nonzero component.
    pub phase_points: usize,
    /// When set, the phase grid is shifted by a seeded random offset.
    pub seed: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            magnitude_points: 21,
            phase_points: 8,
            seed: None,
        }
    }
}

/// Unit vectors on the `m`-dimensional sphere: every composition of the
/// magnitude simplex, times a phase grid on each nonzero component after the
/// first (the global phase is fixed by making that one real).
pub fn probe_grid(m: usize, cfg: &SearchConfig) -> Vec<CVector> {
    let steps = cfg.magnitude_points.max(2) - 1;
    let phases = cfg.phase_points.max(1);
    let offset = cfg
        .seed
        .map(|s| StdRng::seed_from_u64(s).random_range(0.0..TAU / phases as f64))
        .unwrap_or(0.0);

    let mut out = Vec::new();
    let mut comp = vec![0usize; m];
    compositions(steps, 0, &mut comp, &mut |weights| {
        let nonzero: Vec<usize> = (0..m).filter(|&i| weights[i] > 0).collect();
        let free = nonzero.len().saturating_sub(1);
        let total = phases.pow(free as u32);
        for code in 0..total {
            let mut b = CVector::zeros(m);
            let mut rest = code;
            for (pos, &i) in nonzero.iter().enumerate() {
                let mag = (weights[i] as f64 / steps as f64).sqrt();
                let phase = if pos == 0 {
                    0.0
                } else {
                    let k = rest % phases;
                    rest /= phases;
                    offset + TAU * k as f64 / phases as f64
                };
                b[i] = C64::from_polar(mag, phase);
            }
            out.push(b);
        }
    });
    out
}

fn compositions(remaining: usize, pos: usize, comp: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    let m = comp.len();
    if pos + 1 == m {
        comp[pos] = remaining;
        f(comp);
        return;
    }
    for k in (0..=remaining).rev() {
        comp[pos] = k;
        compositions(remaining - k, pos + 1, comp, f);
    }
}

/// `Q^(i) = Tr_S[ D (|psi_d><psi_d| (x) |i><i|) D^dagger ]` for each object
/// basis state `|i>`.
pub fn compute_q_operators(d: &InterrogationOperator, psi_d: &CVector) -> Result<Vec<CMatrix>> {
    check_len(psi_d, d.m, "detecting-branch probe")?;
    let (m, n) = (d.m, d.n);
    (0..n)
        .map(|i| {
            let e_i = crate::linalg::basis_vector(n, i);
            let w = &d.matrix * psi_d.kronecker(&e_i);
            partial_trace_second(&(&w * w.adjoint()), (m, n))
        })
        .collect()
}

/// Orthonormal bases of `K = intersection of ker Q^(i)` and of its
/// orthogonal complement in `H_d`.
#[derive(Debug, Clone)]
pub struct KernelSplit {
    pub kernel: Vec<CVector>,
    pub complement: Vec<CVector>,
}

impl KernelSplit {
    /// Dimension `l` of the complement.
    pub fn l(&self) -> usize {
        self.complement.len()
    }
}

/// Intersects the kernels one operator at a time, restricting each `Q^(i)` to
/// the kernel found so far.
pub fn kernel_intersection(qs: &[CMatrix], tol_rel: f64) -> KernelSplit {
    let m = qs.first().map(|q| q.nrows()).unwrap_or(0);
    let scale = qs
        .iter()
        .map(|q| singular_values(q).into_iter().fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let cutoff = tol_rel * scale;

    let mut basis = CMatrix::identity(m, m);
    if scale > 0.0 {
        for q in qs {
            if basis.ncols() == 0 {
                break;
            }
            let restricted = q * &basis;
            let local = null_space_below(&restricted, cutoff);
            basis = &basis * stack_columns(&local, basis.ncols());
        }
    }
    let kernel: Vec<CVector> = basis.column_iter().map(|c| c.into_owned()).collect();

    let complement = if kernel.is_empty() {
        (0..m).map(|i| crate::linalg::basis_vector(m, i)).collect()
    } else {
        let rows = stack_columns(&kernel, m).adjoint();
        null_space(&rows, tol_rel)
    };
    KernelSplit { kernel, complement }
}

/// The `n^2 x m` coefficient matrix of the linear system for `a`:
/// row `(k, l)`, column `i` holds `sum_j d_{i,j;k,l} b_j`.
pub fn coefficient_matrix(d: &InterrogationOperator, b: &CVector) -> CMatrix {
    let (m, n) = (d.m, d.n);
    CMatrix::from_fn(n * n, m, |row, i| {
        let (k, l) = (row / n, row % n);
        (0..m).map(|j| d.component(i, j, k, l) * b[j]).sum()
    })
}

fn identity_rhs(n: usize) -> CVector {
    CVector::from_fn(n * n, |row, _| if row / n == row % n { ONE } else { ZERO })
}

/// A solution `<chi| = sum_i a_i <i|` with `||a|| = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSolution {
    pub a: CVector,
    pub c: C64,
}

impl ChiSolution {
    pub fn chi(&self) -> CVector {
        self.a.conjugate()
    }
}

/// Outcome of the rank test for one fixed `b`.
#[derive(Debug, Clone)]
pub struct LinearSolve {
    /// Rank of the coefficient matrix.
    pub rank: usize,
    /// Rank after appending the `c * delta_kl` column.
    pub rank_augmented: usize,
    pub solution: Option<ChiSolution>,
    /// The ranks agree but the solution breaks `|c| <= 1`.
    pub degenerate: bool,
}

/// Decides `sum_i a_i R_{i;k,l} = c delta_kl` for a fixed detecting probe `b`.
///
/// With `c != 0` the system is solved at `c = 1` (minimum-norm least squares,
/// which maximizes the final `|c|`) and rescaled so `chi` is a unit vector,
/// leaving `c` real and positive. When only the homogeneous system is
/// solvable a `c = 0` witness is returned, provided `chi` can be taken inside
/// the support of `D|b>` (or that support is empty).
pub fn solve_chi_for_fixed_b(d: &InterrogationOperator, b: &CVector, tol: &Tolerances) -> Result<LinearSolve> {
    check_len(b, d.m, "detecting-branch probe")?;
    check_unit(b, "detecting-branch probe")?;
    let a_mat = coefficient_matrix(d, b);
    let rhs = identity_rhs(d.n);
    let mut aug = CMatrix::zeros(a_mat.nrows(), d.m + 1);
    aug.view_mut((0, 0), (a_mat.nrows(), d.m)).copy_from(&a_mat);
    aug.set_column(d.m, &rhs);

    let r = rank(&a_mat, tol.tol_rel);
    let r_aug = rank(&aug, tol.tol_rel);
    let mut out = LinearSolve {
        rank: r,
        rank_augmented: r_aug,
        solution: None,
        degenerate: false,
    };

    if r == r_aug {
        let smax = singular_values(&a_mat).into_iter().fold(0.0, f64::max);
        let svd = nalgebra::SVD::new(a_mat.clone(), true, true);
        let x = svd
            .solve(&rhs, tol.tol_rel * smax)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let norm = x.norm();
        let consistent = (&a_mat * &x - &rhs).norm() <= 1e-8 * rhs.norm();
        if norm.is_finite() && norm > 0.0 && consistent {
            let c = 1.0 / norm;
            if c > 1.0 + 1e-9 {
                out.degenerate = true;
            } else {
                out.solution = Some(ChiSolution {
                    a: x.unscale(norm),
                    c: C64::from(c),
                });
            }
        }
        return Ok(out);
    }

    if r < d.m {
        let split = kernel_intersection(&compute_q_operators(d, b)?, tol.tol_rel);
        let a = if split.complement.is_empty() {
            // D|b> vanishes on every object state; any chi will do.
            Some(b.conjugate())
        } else {
            // a = conj(chi) with chi ranging over the support
            let support = stack_columns(&split.complement, d.m).conjugate();
            null_space(&(&a_mat * &support), tol.tol_rel)
                .first()
                .map(|y| &support * y)
        };
        if let Some(a) = a {
            let norm = a.norm();
            out.solution = Some(ChiSolution {
                a: a.unscale(norm),
                c: ZERO,
            });
        }
    }
    Ok(out)
}

/// Expansion `D|psi_d>|psi_S> = c|chi>|psi_S> + sum_j |chi_j> M_j |psi_S>`
/// over the support of `D|psi_d>`.
#[derive(Debug, Clone)]
pub struct CompactDecomposition {
    pub chi: CVector,
    /// Orthonormal completion of `chi` within the support.
    pub chi_perp: Vec<CVector>,
    pub c: C64,
    /// Dimension of the support (the complement of the common kernel).
    pub l: usize,
    pub kernel: Vec<CVector>,
    /// `M_j = <chi_j| D |psi_d>`, so `|m_S(j)> = M_j |psi_S>`.
    pub branch_operators: Vec<CMatrix>,
}

impl CompactDecomposition {
    /// The object-space states `|m_S(j)>` for a given object state.
    pub fn m_states(&self, psi_s: &CVector) -> Vec<CVector> {
        self.branch_operators.iter().map(|op| op * psi_s).collect()
    }

    /// Right-hand side of the expansion, on `H_d (x) H_S`.
    pub fn reconstruct(&self, psi_s: &CVector) -> CVector {
        let mut out = self.chi.kronecker(psi_s) * self.c;
        for (chi_j, m_j) in self.chi_perp.iter().zip(self.m_states(psi_s)) {
            out += chi_j.kronecker(&m_j);
        }
        out
    }
}

/// A verified pair `(psi_d', chi)` together with its decomposition.
#[derive(Debug, Clone)]
pub struct Witness {
    /// Detecting-branch probe after free evolution.
    pub psi_d: CVector,
    pub decomposition: CompactDecomposition,
    /// Norm of `psi_d - c chi` after removing its `chi_j` components.
    pub independence_residual: f64,
    pub feasible: bool,
}

impl Witness {
    pub fn chi(&self) -> &CVector {
        &self.decomposition.chi
    }

    pub fn c(&self) -> C64 {
        self.decomposition.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureReason {
    NoSolutionToLinearSystem,
    LinearDependenceClauseFailed,
    DegenerateC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointOutcome {
    NoSolution,
    Degenerate,
    Dependent,
    Feasible,
}

/// One grid point of a probe search.
#[derive(Debug, Clone)]
pub struct SearchRecord {
    pub index: usize,
    pub b: CVector,
    pub c: Option<C64>,
    pub rank: usize,
    pub rank_augmented: usize,
    pub outcome: PointOutcome,
}

#[derive(Debug, Clone)]
pub struct CriterionVerdict {
    pub feasible: bool,
    pub witness: Option<Witness>,
    pub failure_reason: Option<FailureReason>,
    pub search_log: Vec<SearchRecord>,
}

impl CriterionVerdict {
    pub fn feasible_points(&self) -> usize {
        self.search_log
            .iter()
            .filter(|r| r.outcome == PointOutcome::Feasible)
            .count()
    }
}

/// Builds the compact decomposition for a candidate witness and applies the
/// linear-independence clause.
pub fn check_witness(
    d: &InterrogationOperator,
    psi_d: &CVector,
    chi: &CVector,
    c: C64,
    tol: &Tolerances,
) -> Result<CriterionVerdict> {
    let witness = build_witness(d, psi_d, chi, c, tol)?;
    let feasible = witness.feasible;
    Ok(CriterionVerdict {
        feasible,
        failure_reason: (!feasible).then_some(FailureReason::LinearDependenceClauseFailed),
        witness: Some(witness),
        search_log: Vec::new(),
    })
}

pub fn build_witness(
    d: &InterrogationOperator,
    psi_d: &CVector,
    chi: &CVector,
    c: C64,
    tol: &Tolerances,
) -> Result<Witness> {
    check_len(psi_d, d.m, "detecting-branch probe")?;
    check_len(chi, d.m, "chi")?;
    check_unit(psi_d, "detecting-branch probe")?;
    check_unit(chi, "chi")?;

    let block = d.object_block(chi, psi_d);
    let deviation = max_abs(&(block - CMatrix::identity(d.n, d.n) * c));
    if deviation > 1e-8 {
        return Err(Error::WitnessMismatch { deviation });
    }

    let split = kernel_intersection(&compute_q_operators(d, psi_d)?, tol.tol_rel);
    let chi_perp = gram_schmidt_extend(std::slice::from_ref(chi), &split.complement, tol.tol_lin).added;
    let branch_operators = chi_perp.iter().map(|x| d.object_block(x, psi_d)).collect();

    let mut residual = psi_d - chi * c;
    for _pass in 0..2 {
        for q in &chi_perp {
            let proj = inner(q, &residual);
            residual.axpy(-proj, q, ONE);
        }
    }
    let independence_residual = residual.norm();

    Ok(Witness {
        psi_d: psi_d.clone(),
        independence_residual,
        feasible: independence_residual > tol.tol_lin,
        decomposition: CompactDecomposition {
            chi: chi.clone(),
            chi_perp,
            c,
            l: split.l(),
            kernel: split.kernel,
            branch_operators,
        },
    })
}

fn evaluate_point(
    d: &InterrogationOperator,
    index: usize,
    b: &CVector,
    tol: &Tolerances,
) -> (SearchRecord, Option<Witness>) {
    let mut record = SearchRecord {
        index,
        b: b.clone(),
        c: None,
        rank: 0,
        rank_augmented: 0,
        outcome: PointOutcome::NoSolution,
    };
    let solve = match solve_chi_for_fixed_b(d, b, tol) {
        Ok(s) => s,
        Err(_) => return (record, None),
    };
    record.rank = solve.rank;
    record.rank_augmented = solve.rank_augmented;
    if solve.degenerate {
        record.outcome = PointOutcome::Degenerate;
        return (record, None);
    }
    let Some(sol) = solve.solution else {
        return (record, None);
    };
    record.c = Some(sol.c);
    match build_witness(d, b, &sol.chi(), sol.c, tol) {
        Ok(w) if w.feasible => {
            record.outcome = PointOutcome::Feasible;
            (record, Some(w))
        }
        Ok(_) => {
            record.outcome = PointOutcome::Dependent;
            (record, None)
        }
        Err(_) => {
            record.outcome = PointOutcome::Degenerate;
            (record, None)
        }
    }
}

/// Scans the probe grid. Among feasible points the witness with the largest
/// `|c|` is kept (earliest grid index on ties).
pub fn search_feasible_probe(d: &InterrogationOperator, cfg: &SearchConfig, tol: &Tolerances) -> CriterionVerdict {
    let grid = probe_grid(d.m, cfg);
    let results: Vec<(SearchRecord, Option<Witness>)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, b)| evaluate_point(d, i, b, tol))
        .collect();

    let mut best: Option<Witness> = None;
    let mut log = Vec::with_capacity(results.len());
    for (record, witness) in results {
        if let Some(w) = witness {
            let better = best.as_ref().is_none_or(|cur| w.c().norm() > cur.c().norm() + 1e-12);
            if better {
                best = Some(w);
            }
        }
        log.push(record);
    }

    let failure_reason = if best.is_some() {
        None
    } else if log.iter().any(|r| r.outcome == PointOutcome::Dependent) {
        Some(FailureReason::LinearDependenceClauseFailed)
    } else if log.iter().any(|r| r.outcome == PointOutcome::Degenerate) {
        Some(FailureReason::DegenerateC)
    } else {
        Some(FailureReason::NoSolutionToLinearSystem)
    };
    log::debug!(
        "probe search: {} grid points, {} feasible",
        log.len(),
        log.iter().filter(|r| r.outcome == PointOutcome::Feasible).count()
    );
    CriterionVerdict {
        feasible: best.is_some(),
        witness: best,
        failure_reason,
        search_log: log,
    }
}
