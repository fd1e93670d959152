//! Programmatic sweep of the probe split over the absorbing atom, the same
//! pipeline `nqi sweep` drives.

use nqi::cli::{cmd_sweep, RunConfig, SweepParam, SweepRange};

fn main() -> nqi::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.system.preset = Some("atom-potting".into());
    let range = SweepRange {
        param: SweepParam::Alpha,
        from: 0.05,
        to: 0.95,
        steps: 10,
    };
    cmd_sweep(&cfg, &range, |report| {
        let point = report.sweep.as_ref().expect("sweep point");
        let p = report.measurement.as_ref().map(|m| m.success_probability);
        println!("alpha = {:.2}  Prob = {:.6}", point.value, p.unwrap_or(f64::NAN));
        Ok(())
    })
}
