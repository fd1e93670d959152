//! Survival probability of the iterative protocol as the loop count grows,
//! checked against the exact simulation for the absorbing atom.

use nqi::atom::potting_configuration;
use nqi::protocol::{plan_zeno, simulate_zeno};
use nqi::{CVector, Tolerances, C64};

fn main() -> nqi::Result<()> {
    let tol = Tolerances::default();
    let cfg = potting_configuration()?;
    let psi_r = CVector::from_element(1, C64::from(1.0));
    let object = CVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);

    println!("{:>6} {:>12} {:>12} {:>12}", "N", "c = 0", "c = 1/2", "simulated");
    for n in [5, 10, 20, 50, 100, 200, 500, 1000] {
        let absorbing = plan_zeno(C64::from(0.0), n)?.survival_probability;
        let plan = plan_zeno(C64::from(0.5), n)?;
        let run = simulate_zeno(&cfg.spec, &plan, cfg.witness.chi(), &psi_r, &object, true, &tol)?;
        println!("{n:>6} {absorbing:>12.8} {:>12.8} {:>12.8}", plan.survival_probability, run.report.p_i);
    }
    Ok(())
}
