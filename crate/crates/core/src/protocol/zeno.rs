use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simulate::{measure, OutcomeReport};
use crate::criterion::{probe_grid, SearchConfig};
use crate::error::{Error, Result};
use crate::linalg::{inner, max_abs, CMatrix, CVector, C64, ONE};
use crate::model::{build_interrogation_operator, check_len, check_unit, InterrogationOperator, JointState, SystemSpec};
use crate::tol::Tolerances;

/// Angles of an `N`-loop Zeno run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenoPlan {
    #[serde(rename = "N")]
    pub n: usize,
    pub theta: f64,
    pub theta_prime: f64,
    pub delta: f64,
    /// `<chi|D|chi> = c I`; real and non-negative.
    pub c: f64,
    pub survival_probability: f64,
}

/// `chi` with `<chi|D|chi> = c I_S` and `c != 1`.
#[derive(Debug, Clone)]
pub struct ZenoWitness {
    pub chi: CVector,
    pub c: C64,
    /// `||<chi|D|chi> - c I||_F`.
    pub residual: f64,
}

fn theta_prime(theta: f64, k: f64) -> f64 {
    (k * theta.tan()).atan()
}

/// Solves `N (theta - theta'(theta)) = pi/2` with `tan theta' = |c| tan theta`.
///
/// `delta(theta)` rises from 0 to its maximum at `theta* = atan(1/sqrt|c|)`,
/// so bisection runs on `(0, theta*)`.
pub fn plan_zeno(c: C64, n: usize) -> Result<ZenoPlan> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if c.im.abs() > 1e-9 || c.re < -1e-12 {
        return Err(Error::InvalidParameter(format!(
            "Zeno plans need a real non-negative c, got {c}"
        )));
    }
    let k = c.re.max(0.0);
    if k > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!("|c| = {k} exceeds 1")));
    }
    if (k - 1.0).abs() < 1e-12 {
        return Err(Error::NoSolution("c = 1 gives a zero rotation angle".into()));
    }
    let target = FRAC_PI_2 / n as f64;
    let theta_star = if k == 0.0 {
        FRAC_PI_2
    } else {
        (1.0 / k.sqrt()).atan()
    };
    let delta_max = if k == 0.0 {
        FRAC_PI_2
    } else {
        theta_star - theta_prime(theta_star, k)
    };
    if delta_max <= target {
        return Err(Error::NoSolution(format!(
            "N = {n} is too small for |c| = {k}: largest rotation {delta_max} <= pi/(2N)"
        )));
    }

    let theta = if k == 0.0 {
        target
    } else {
        let (mut lo, mut hi) = (0.0, theta_star);
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let err = n as f64 * (mid - theta_prime(mid, k)) - FRAC_PI_2;
            if err.abs() <= 1e-12 {
                break;
            }
            if err < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        mid
    };
    let tp = theta_prime(theta, k);
    let per_loop = theta.cos().powi(2) + k * k * theta.sin().powi(2);
    Ok(ZenoPlan {
        n,
        theta,
        theta_prime: tp,
        delta: theta - tp,
        c: k,
        survival_probability: per_loop.powi(n as i32),
    })
}

fn scalar_residual(d: &InterrogationOperator, b: &CVector) -> (f64, C64) {
    let m = d.object_block(b, b);
    let c = m.trace() / C64::from(d.n as f64);
    let res = (m - CMatrix::identity(d.n, d.n) * c).norm();
    (res, c)
}

fn unpack(x: &DVector<f64>, m: usize) -> CVector {
    let v = CVector::from_fn(m, |i, _| C64::new(x[i], x[m + i]));
    let norm = v.norm();
    v.unscale(norm)
}

fn residual_vector(d: &InterrogationOperator, x: &DVector<f64>) -> DVector<f64> {
    let b = unpack(x, d.m);
    let mat = d.object_block(&b, &b);
    let c = mat.trace() / C64::from(d.n as f64);
    let dev = mat - CMatrix::identity(d.n, d.n) * c;
    let nn = d.n * d.n;
    DVector::from_fn(2 * nn, |i, _| {
        let z = dev[(i % nn / d.n, i % nn % d.n)];
        if i < nn {
            z.re
        } else {
            z.im
        }
    })
}

/// Levenberg-Marquardt on `||<b|D|b> - (tr/n) I||` with a central-difference
/// Jacobian.
fn refine(d: &InterrogationOperator, start: &CVector) -> CVector {
    let m = d.m;
    let mut x = DVector::from_fn(2 * m, |i, _| if i < m { start[i].re } else { start[i - m].im });
    let mut r = residual_vector(d, &x);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let h = 1e-7;
    for _ in 0..200 {
        if cost < 1e-28 {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), 2 * m);
        for j in 0..2 * m {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let col = (residual_vector(d, &xp) - residual_vector(d, &xm)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let jt = jac.transpose();
        let grad = &jt * &r;
        let normal = &jt * &jac;
        let mut improved = false;
        while lambda < 1e12 {
            let lhs = &normal + DMatrix::identity(2 * m, 2 * m) * lambda;
            let Some(step) = lhs.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &x + step;
            let r_trial = residual_vector(d, &trial);
            let c_trial = r_trial.norm_squared();
            if c_trial < cost {
                // keep the parameters on the unit sphere
                x = &trial / trial.norm();
                r = residual_vector(d, &x);
                cost = r.norm_squared();
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    unpack(&x, m)
}

/// Starting points taken from the probe grid for refinement.
const ZENO_STARTS: usize = 8;
/// Largest residual accepted as an exact solution.
const ZENO_RESIDUAL: f64 = 1e-10;

/// Looks for `chi` with `<chi|D|chi> = c I_S`, `c != 1`, preferring real
/// non-negative `c` and then the smallest `|c|`.
pub fn check_zeno_condition(d: &InterrogationOperator, cfg: &SearchConfig) -> Option<ZenoWitness> {
    if d.m == 0 || d.n == 0 {
        return None;
    }
    let grid = probe_grid(d.m, cfg);
    let mut scored: Vec<(f64, usize)> = grid
        .par_iter()
        .enumerate()
        .filter_map(|(i, b)| {
            let (res, c) = scalar_residual(d, b);
            ((c - ONE).norm() > 1e-3).then_some((res, i))
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let found: Vec<ZenoWitness> = scored
        .par_iter()
        .take(ZENO_STARTS)
        .filter_map(|&(_, i)| {
            let chi = refine(d, &grid[i]);
            let (residual, c) = scalar_residual(d, &chi);
            (residual <= ZENO_RESIDUAL && (c - ONE).norm() > 1e-8).then_some(ZenoWitness { chi, c, residual })
        })
        .collect();

    let plannable = |w: &ZenoWitness| w.c.im.abs() <= 1e-9 && w.c.re >= -1e-12;
    found.into_iter().min_by(|a, b| {
        plannable(b)
            .cmp(&plannable(a))
            .then(a.c.norm().total_cmp(&b.c.norm()))
    })
}

/// Result of [`simulate_zeno`]: outcome distribution and the final joint
/// state (probe in the frame of the rotation `U`).
#[derive(Debug, Clone)]
pub struct ZenoRun {
    pub report: OutcomeReport,
    pub state: JointState,
    /// `cos theta psi_r + sin theta chi`, reached when the box is occupied.
    pub success_probe: CVector,
    /// `cos(theta + N delta) psi_r + sin(theta + N delta) chi`, reached when it is empty.
    pub empty_probe: CVector,
}

/// Runs `N` loops of free or full evolution, decay check, projection onto
/// `span{psi_r, chi} (x) H_S`, rotation by `delta` and the phase
/// `exp(+i H^D t)`, starting from `cos theta psi_r + sin theta chi`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_zeno(
    spec: &SystemSpec,
    plan: &ZenoPlan,
    chi: &CVector,
    psi_r: &CVector,
    object_state: &CVector,
    occupied: bool,
    tol: &Tolerances,
) -> Result<ZenoRun> {
    check_len(chi, spec.m, "chi")?;
    check_unit(chi, "chi")?;
    check_len(psi_r, spec.dim_r, "reference-branch state")?;
    check_unit(psi_r, "reference-branch state")?;
    check_unit(object_state, "object state")?;

    let d = build_interrogation_operator(spec, tol)?;
    let block = d.object_block(chi, chi);
    let deviation = max_abs(&(block - CMatrix::identity(spec.n, spec.n) * C64::from(plan.c)));
    if deviation > 1e-8 {
        return Err(Error::PlanSpecMismatch {
            plan_c: plan.c.to_string(),
            deviation,
        });
    }

    let dynamics = spec.dynamics(tol)?;
    let r = spec.embed_reference(psi_r)?;
    let x = spec.embed_detecting(chi)?;
    let ident = CMatrix::identity(spec.n_ext, spec.n_ext);

    let span = &r * r.adjoint() + &x * x.adjoint();
    let (s, co) = (plan.delta.sin(), plan.delta.cos());
    let rot = CMatrix::identity(spec.probe_dim(), spec.probe_dim()) + &span * C64::from(co - 1.0)
        + (&x * r.adjoint() - &r * x.adjoint()) * C64::from(s);
    let projector = span.kronecker(&ident);
    let rotation = rot.kronecker(&ident);
    let phase = dynamics.probe_free.adjoint().kronecker(&ident);

    let along = |angle: f64| &r * C64::from(angle.cos()) + &x * C64::from(angle.sin());
    let success_probe = along(plan.theta);
    let empty_probe = along(plan.theta + plan.n as f64 * plan.delta);

    let mut state = JointState::product(&success_probe, &spec.embed_object(object_state)?);
    let mut rejected = 0.0;
    for _ in 0..plan.n {
        state.amplitudes = &phase * &state.amplitudes;
        state = spec.step(&dynamics, &state, occupied);
        let before = state.norm_sqr();
        state.amplitudes = &projector * &state.amplitudes;
        rejected += (before - state.norm_sqr()).max(0.0);
        state.amplitudes = &rotation * &state.amplitudes;
    }

    let mut object_target = spec.embed_object(object_state)?;
    for _ in 0..plan.n {
        object_target = &dynamics.object_free * object_target;
    }
    let mut report = measure(spec, &state, &empty_probe, &success_probe, &object_target);
    report.rejected = rejected;
    report.other = (report.other).max(0.0);
    Ok(ZenoRun {
        report,
        state,
        success_probe,
        empty_probe,
    })
}

/// `|<empty|success>|` between the two final probe directions.
pub fn final_overlap(run: &ZenoRun) -> f64 {
    inner(&run.empty_probe, &run.success_probe).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{build_atom_spec, AtomParams};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn opaque_plan_matches_closed_form() {
        let plan = plan_zeno(C64::from(0.0), 100).unwrap();
        assert!((plan.theta - FRAC_PI_2 / 100.0).abs() < 1e-15);
        let expected = (FRAC_PI_2 / 100.0).cos().powi(200);
        assert!((plan.survival_probability - expected).abs() < 1e-12);
        assert!((plan.survival_probability - 0.97563).abs() < 1e-5);
    }

    #[test]
    fn plan_invariants() {
        for &(c, n) in &[(0.5, 5), (0.5, 50), (0.2, 3), (0.9, 200), (0.0, 2)] {
            let plan = plan_zeno(C64::from(c), n).unwrap();
            assert!((plan.n as f64 * plan.delta - FRAC_PI_2).abs() < 1e-9);
            let cos_tp = plan.theta.cos() / (plan.theta.cos().powi(2) + c * c * plan.theta.sin().powi(2)).sqrt();
            assert!((plan.theta_prime.cos() - cos_tp).abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_plans() {
        assert!(matches!(plan_zeno(C64::from(1.0), 10), Err(Error::NoSolution(_))));
        assert!(matches!(plan_zeno(C64::from(0.0), 1), Err(Error::NoSolution(_))));
        assert!(matches!(plan_zeno(C64::from(0.5), 4), Err(Error::NoSolution(_))));
        assert!(plan_zeno(C64::from(0.5), 5).is_ok());
        assert!(matches!(plan_zeno(C64::new(0.3, 0.2), 10), Err(Error::InvalidParameter(_))));
        assert!(matches!(plan_zeno(C64::from(0.3), 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn zeno_condition_on_atoms() {
        let cfg = SearchConfig::default();
        let tol = Tolerances::default();
        let d = build_interrogation_operator(&build_atom_spec(&AtomParams::from_p(0.4, 0.4).unwrap()).unwrap(), &tol)
            .unwrap();
        let w = check_zeno_condition(&d, &cfg).unwrap();
        assert!(w.residual < 1e-10);
        assert!((w.c - C64::from(0.7)).norm() < 1e-9);

        let d = build_interrogation_operator(&build_atom_spec(&AtomParams::from_p(0.2, -0.5).unwrap()).unwrap(), &tol)
            .unwrap();
        let w = check_zeno_condition(&d, &cfg).unwrap();
        let block = d.object_block(&w.chi, &w.chi);
        assert!(max_abs(&(block - CMatrix::identity(2, 2) * w.c)) < 1e-10);
        // |x+|^2 (1 - p+) = |x-|^2 (1 - p-)
        let (wp, wm) = (w.chi[0].norm_sqr(), w.chi[1].norm_sqr());
        assert!((wp * 0.8 - wm * 1.5).abs() < 1e-9);

        let id = InterrogationOperator::from_matrix(CMatrix::identity(4, 4), 2, 2, "identity").unwrap();
        assert!(check_zeno_condition(&id, &cfg).is_none());
    }

    #[test]
    fn simulated_survival_matches_plan() {
        let tol = Tolerances::default();
        let spec = build_atom_spec(&AtomParams::from_p(0.0, 0.0).unwrap()).unwrap();
        let chi = CVector::from_vec(vec![C64::from(FRAC_1_SQRT_2), C64::from(FRAC_1_SQRT_2)]);
        let psi_r = CVector::from_element(1, ONE);
        let obj = CVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let plan = plan_zeno(C64::from(0.5), 50).unwrap();
        let run = simulate_zeno(&spec, &plan, &chi, &psi_r, &obj, true, &tol).unwrap();
        assert!((run.report.p_i - plan.survival_probability).abs() < 1e-9);
        assert!((run.report.success_fidelity.unwrap() - 1.0).abs() < 1e-9);
        assert!((run.report.total() - 1.0).abs() < 1e-9);
        assert!(final_overlap(&run) < 1e-9);

        let empty = simulate_zeno(&spec, &plan, &chi, &psi_r, &obj, false, &tol).unwrap();
        assert!((empty.report.p_e - 1.0).abs() < 1e-12);

        let bad = plan_zeno(C64::from(0.3), 50).unwrap();
        assert!(matches!(
            simulate_zeno(&spec, &bad, &chi, &psi_r, &obj, true, &tol),
            Err(Error::PlanSpecMismatch { .. })
        ));
    }
}
