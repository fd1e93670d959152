//! A hand-built system fed to the command-line front end as an inline JSON
//! configuration.

use nqi::cli::config::InlineSystem;
use nqi::cli::{cmd_optimize, RunConfig};
use nqi::{CMatrix, SystemSpec, C64};

fn main() -> nqi::Result<()> {
    // Two-level probe, two-level object plus one absorbing level. Probe mode 0
    // is partly absorbed by object level 0, mode 1 fully by level 1.
    let mut h_int = CMatrix::zeros(6, 6);
    let couple = |h: &mut CMatrix, a: usize, b: usize, g: f64| {
        h[(a, b)] = C64::from(g);
        h[(b, a)] = C64::from(g);
    };
    couple(&mut h_int, 0, 2, 0.7);
    couple(&mut h_int, 4, 5, std::f64::consts::FRAC_PI_2);
    let spec = SystemSpec::new(2, 3, 2, 1, CMatrix::zeros(3, 3), CMatrix::zeros(3, 3), h_int, 1.0, 1e-12)?;

    let mut cfg = RunConfig::default();
    cfg.system.inline = Some(InlineSystem::from_spec(&spec));
    println!("config:\n{}\n", serde_json::to_string_pretty(&cfg)?);

    let report = cmd_optimize(&cfg)?;
    println!("{}", report.to_text());
    Ok(())
}
