//! A perfectly absorbing object: `D = 0`, so `c = 0` and the protocol falls
//! back to the plain beam-splitter bound of 1/4 per shot.

use nqi::criterion::{search_feasible_probe, SearchConfig};
use nqi::protocol::{optimize_alpha, plan_zeno};
use nqi::{build_interrogation_operator, CMatrix, CVector, SystemSpec, Tolerances, C64};

fn main() -> nqi::Result<()> {
    let tol = Tolerances::default();
    let mut h_int = CMatrix::zeros(2, 2);
    h_int[(0, 1)] = C64::from(std::f64::consts::FRAC_PI_2);
    h_int[(1, 0)] = C64::from(std::f64::consts::FRAC_PI_2);
    let spec = SystemSpec::new(1, 2, 1, 1, CMatrix::zeros(2, 2), CMatrix::zeros(2, 2), h_int, 1.0, 1e-12)?;

    let d = build_interrogation_operator(&spec, &tol)?;
    println!("||D|| = {:.3e}", d.operator_norm());
    let w = search_feasible_probe(&d, &SearchConfig::default(), &tol)
        .witness
        .ok_or(nqi::Error::InfeasibleSystem)?;
    let (alpha, p) = optimize_alpha(&spec, &w, &CVector::from_element(1, C64::from(1.0)), 201, &tol)?;
    println!("c = {:.3e}  alpha_opt = {alpha:.6}  P_opt = {p:.9}", w.c().norm());
    for n in [2, 10, 100] {
        println!("Zeno N = {n}: survival {:.6}", plan_zeno(C64::from(0.0), n)?.survival_probability);
    }
    Ok(())
}
