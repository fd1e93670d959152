//! The pieces behind a feasibility verdict: the common kernel of the
//! `Q` operators, the solved witness and the compact decomposition of
//! `D|psi_d>|psi_S>`.

use nqi::atom::{build_atom_spec, AtomParams};
use nqi::criterion::{check_witness, compute_q_operators, kernel_intersection, solve_chi_for_fixed_b};
use nqi::{build_interrogation_operator, random, CVector, Tolerances, C64};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn main() -> nqi::Result<()> {
    let tol = Tolerances::default();
    let spec = build_atom_spec(&AtomParams::from_p(0.5, -0.25)?)?;
    let d = build_interrogation_operator(&spec, &tol)?;
    let b = CVector::from_vec(vec![C64::new(0.8, 0.0), C64::new(0.0, 0.6)]);

    let qs = compute_q_operators(&d, &b)?;
    let split = kernel_intersection(&qs, tol.tol_rel);
    println!("dim K = {}, l = {}", split.kernel.len(), split.l());

    let solve = solve_chi_for_fixed_b(&d, &b, &tol)?;
    let Some(sol) = solve.solution else {
        println!("no chi for this probe");
        return Ok(());
    };
    let verdict = check_witness(&d, &b, &sol.chi(), sol.c, &tol)?;
    let Some(w) = verdict.witness else {
        println!("witness rejected: {:?}", verdict.failure_reason);
        return Ok(());
    };
    let dec = &w.decomposition;
    println!("c = {:.6}, feasible = {}, independence residual = {:.3e}", dec.c, w.feasible, w.independence_residual);
    let chi: Vec<String> = dec.chi.iter().map(|z| format!("{z:.4}")).collect();
    println!("chi = [{}]", chi.join(", "));

    let psi_s = random::state(2, &mut StdRng::seed_from_u64(5));
    let lhs = &d.matrix * b.kronecker(&psi_s);
    let err = (&lhs - dec.reconstruct(&psi_s)).norm();
    println!("|D|b>|psi> - expansion| = {err:.3e}");
    for (j, m) in dec.m_states(&psi_s).iter().enumerate() {
        println!("m_S({j}) norm = {:.6}", m.norm());
    }
    Ok(())
}
