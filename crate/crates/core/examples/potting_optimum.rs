//! Optimal single-shot interrogation of the two-level-photon atom with fully
//! absorbing transitions.

use nqi::atom::potting_configuration;
use nqi::protocol::{construct_measurement, optimize_alpha, success_probability};
use nqi::{CVector, Tolerances, C64};

fn main() -> nqi::Result<()> {
    let tol = Tolerances::default();
    let cfg = potting_configuration()?;
    let psi_r = CVector::from_element(1, C64::from(1.0));

    println!("c = {:.6}", cfg.witness.c());
    let (alpha, p_opt) = optimize_alpha(&cfg.spec, &cfg.witness, &psi_r, 201, &tol)?;
    println!("alpha_opt = {alpha:.9}  P_opt = {p_opt:.12}  (expected {})", cfg.expected_p_opt);

    for alpha in [0.3, 0.5, std::f64::consts::FRAC_1_SQRT_2, 0.9] {
        let setup = construct_measurement(&cfg.spec, &cfg.witness, alpha, &psi_r, &tol)?;
        let closed = alpha * alpha * (1.0 - alpha * alpha) / 4.0;
        println!("alpha = {alpha:.4}  P = {:.12}  a^2 b^2 / 4 = {closed:.12}", success_probability(&setup));
    }
    Ok(())
}
