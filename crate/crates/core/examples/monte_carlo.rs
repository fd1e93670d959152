//! Exact single-shot outcome probabilities next to a seeded Monte Carlo
//! sample, for an occupied and an empty box.

use nqi::atom::{build_atom_spec, AtomParams};
use nqi::criterion::{search_feasible_probe, SearchConfig};
use nqi::protocol::{construct_measurement, optimize_alpha, sample_outcomes, simulate_single_shot};
use nqi::{build_interrogation_operator, random, CVector, Tolerances, C64};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn main() -> nqi::Result<()> {
    let tol = Tolerances::default();
    let spec = build_atom_spec(&AtomParams::from_p(0.3, -0.2)?)?;
    let d = build_interrogation_operator(&spec, &tol)?;
    let witness = search_feasible_probe(&d, &SearchConfig::default(), &tol)
        .witness
        .ok_or(nqi::Error::InfeasibleSystem)?;
    let psi_r = CVector::from_element(1, C64::from(1.0));
    let (alpha, _) = optimize_alpha(&spec, &witness, &psi_r, 201, &tol)?;
    let setup = construct_measurement(&spec, &witness, alpha, &psi_r, &tol)?;

    let object = random::state(2, &mut StdRng::seed_from_u64(3));
    let trials = 100_000;
    for occupied in [true, false] {
        let exact = simulate_single_shot(&spec, &setup, &object, occupied, &tol)?;
        let counts = sample_outcomes(&exact, trials, 42)?;
        let f = |k: u64| k as f64 / trials as f64;
        println!("occupied = {occupied}");
        println!("  decay  {:.5}  sampled {:.5}", exact.decay, f(counts.decay));
        println!("  P_e    {:.5}  sampled {:.5}", exact.p_e, f(counts.p_e));
        println!("  P_I    {:.5}  sampled {:.5}", exact.p_i, f(counts.p_i));
        println!("  other  {:.5}  sampled {:.5}", exact.other, f(counts.other));
        if let Some(fid) = exact.success_fidelity {
            println!("  object fidelity after success: {fid:.12}");
        }
    }
    Ok(())
}
