//! Scans the atom's transmission amplitudes `p+ = p-` and `p+ != p-` and
//! reports where nondistortion interrogation is possible.

use nqi::atom::{build_atom_spec, AtomParams};
use nqi::criterion::{search_feasible_probe, SearchConfig};
use nqi::protocol::optimize_alpha;
use nqi::{build_interrogation_operator, CVector, Tolerances, C64};

fn main() -> nqi::Result<()> {
    let tol = Tolerances::default();
    let psi_r = CVector::from_element(1, C64::from(1.0));
    println!("{:>7} {:>7} {:>9} {:>8} {:>10}", "p+", "p-", "feasible", "|c|", "P_opt");
    let pairs = (0..=10)
        .map(|k| -1.0 + 0.2 * k as f64)
        .map(|p| (p, p))
        .chain([(0.0, 0.5), (0.9, -0.9), (1.0, 0.0)]);
    for (p_plus, p_minus) in pairs {
        let spec = build_atom_spec(&AtomParams::from_p(p_plus, p_minus)?)?;
        let d = build_interrogation_operator(&spec, &tol)?;
        let verdict = search_feasible_probe(&d, &SearchConfig::default(), &tol);
        match &verdict.witness {
            Some(w) => {
                let (_, p) = optimize_alpha(&spec, w, &psi_r, 201, &tol)?;
                println!("{p_plus:>7.2} {p_minus:>7.2} {:>9} {:>8.4} {p:>10.6}", true, w.c().norm());
            }
            None => println!(
                "{p_plus:>7.2} {p_minus:>7.2} {:>9} {:>8} {:>10}  ({:?})",
                false, "-", "-", verdict.failure_reason.unwrap()
            ),
        }
    }
    Ok(())
}
