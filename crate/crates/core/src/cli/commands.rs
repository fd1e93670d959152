use rayon::prelude::*;
use std::io::Write;

use super::config::{pairs_to_vector, unpair, Mode, RunConfig, DEFAULT_ZENO_LOOPS};
use super::presets::{resolve_system, ResolvedSystem};
use super::report::{
    MeasurementReport, OptimumReport, OutcomesReport, Report, SweepPoint, VerdictReport, ZenoReport,
};
use crate::criterion::{check_witness, search_feasible_probe, CriterionVerdict};
use crate::error::{Error, Result};
use crate::linalg::{basis_vector, CVector, C64};
use crate::model::{build_interrogation_operator, check_len, check_unit, InterrogationOperator};
use crate::protocol::{
    check_zeno_condition, construct_measurement, optimize_alpha, plan_zeno, sample_outcomes, simulate_single_shot,
    simulate_zeno, MeasurementSetup,
};

struct Prepared {
    system: ResolvedSystem,
    d: InterrogationOperator,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let system = resolve_system(cfg)?;
    let d = build_interrogation_operator(&system.spec, &cfg.tolerances)?;
    log::info!("interrogation operator: m = {}, n = {}, ||D|| = {:.6}", d.m, d.n, d.operator_norm());
    Ok(Prepared { system, d })
}

fn verdict(p: &Prepared, cfg: &RunConfig) -> Result<(CriterionVerdict, &'static str)> {
    if let Some(w) = &cfg.witness {
        let psi_d = pairs_to_vector(&w.psi_d);
        let chi = pairs_to_vector(&w.chi);
        return Ok((check_witness(&p.d, &psi_d, &chi, unpair(w.c), &cfg.tolerances)?, "config"));
    }
    if let Some(w) = &p.system.witness {
        return Ok((
            CriterionVerdict {
                feasible: w.feasible,
                witness: Some(w.clone()),
                failure_reason: None,
                search_log: Vec::new(),
            },
            "preset",
        ));
    }
    Ok((search_feasible_probe(&p.d, &cfg.search, &cfg.tolerances), "search"))
}

fn psi_r(p: &Prepared, cfg: &RunConfig) -> Result<CVector> {
    let v = match &cfg.protocol.psi_r {
        Some(v) => pairs_to_vector(v),
        None => basis_vector(p.system.spec.dim_r, 0),
    };
    check_len(&v, p.system.spec.dim_r, "protocol.psi_r")?;
    check_unit(&v, "protocol.psi_r")?;
    Ok(v)
}

fn object_state(p: &Prepared, cfg: &RunConfig) -> Result<CVector> {
    let n = p.system.spec.n;
    let v = match &cfg.protocol.object_state {
        Some(v) => pairs_to_vector(v),
        None => CVector::from_element(n, C64::from(1.0 / (n as f64).sqrt())),
    };
    check_len(&v, n, "protocol.object_state")?;
    check_unit(&v, "protocol.object_state")?;
    Ok(v)
}

/// Shared front half of construct/optimize/simulate: verdict, then the
/// measurement at the configured or optimal `alpha`.
struct SingleShot {
    report: Report,
    setup: Option<MeasurementSetup>,
}

fn single_shot(command: &str, cfg: &RunConfig, p: &Prepared, always_optimize: bool) -> Result<SingleShot> {
    let mut report = Report::new(command, cfg, p.system.preset.clone());
    let (v, source) = verdict(p, cfg)?;
    report.verdict = Some(VerdictReport::from_verdict(&v, source));
    let Some(witness) = v.witness.filter(|w| v.feasible && w.feasible) else {
        return Ok(SingleShot { report, setup: None });
    };
    let psi_r = psi_r(p, cfg)?;
    let tol = &cfg.tolerances;
    let alpha = match cfg.protocol.alpha {
        Some(a) if !always_optimize => a,
        _ => {
            let (alpha_opt, p_opt) = optimize_alpha(&p.system.spec, &witness, &psi_r, cfg.protocol.resolution, tol)?;
            report.optimum = Some(OptimumReport { alpha_opt, p_opt });
            alpha_opt
        }
    };
    let setup = construct_measurement(&p.system.spec, &witness, alpha, &psi_r, tol)?;
    report.measurement = Some(MeasurementReport::from_setup(&setup));
    Ok(SingleShot {
        report,
        setup: Some(setup),
    })
}

pub fn cmd_check(cfg: &RunConfig) -> Result<Report> {
    let p = prepare(cfg)?;
    let mut report = Report::new("check", cfg, p.system.preset.clone());
    let (v, source) = verdict(&p, cfg)?;
    report.verdict = Some(VerdictReport::from_verdict(&v, source));
    Ok(report)
}

pub fn cmd_construct(cfg: &RunConfig) -> Result<Report> {
    let p = prepare(cfg)?;
    Ok(single_shot("construct", cfg, &p, false)?.report)
}

pub fn cmd_optimize(cfg: &RunConfig) -> Result<Report> {
    let p = prepare(cfg)?;
    Ok(single_shot("optimize", cfg, &p, true)?.report)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Report> {
    let p = prepare(cfg)?;
    match cfg.protocol.mode {
        Mode::Single => simulate_single(cfg, &p),
        Mode::Zeno => simulate_iterative(cfg, &p),
    }
}

fn occupancies(cfg: &RunConfig) -> &'static [bool] {
    if cfg.protocol.empty {
        &[false]
    } else {
        &[true, false]
    }
}

fn record_outcome(
    outcomes: &mut OutcomesReport,
    occupied: bool,
    report: crate::protocol::OutcomeReport,
    cfg: &RunConfig,
) -> Result<()> {
    let counts = match cfg.protocol.trials {
        Some(trials) => Some(sample_outcomes(&report, trials, cfg.search.seed.unwrap_or(0))?),
        None => None,
    };
    if occupied {
        outcomes.occupied = Some(report);
        outcomes.occupied_counts = counts;
    } else {
        outcomes.empty = Some(report);
        outcomes.empty_counts = counts;
    }
    Ok(())
}

fn simulate_single(cfg: &RunConfig, p: &Prepared) -> Result<Report> {
    let SingleShot { mut report, setup } = single_shot("simulate", cfg, p, false)?;
    let Some(setup) = setup else {
        return Ok(report);
    };
    let object = object_state(p, cfg)?;
    let mut outcomes = OutcomesReport::default();
    for &occupied in occupancies(cfg) {
        let r = simulate_single_shot(&p.system.spec, &setup, &object, occupied, &cfg.tolerances)?;
        record_outcome(&mut outcomes, occupied, r, cfg)?;
    }
    report.outcomes = Some(outcomes);
    Ok(report)
}

fn simulate_iterative(cfg: &RunConfig, p: &Prepared) -> Result<Report> {
    let mut report = Report::new("simulate", cfg, p.system.preset.clone());
    let Some(w) = check_zeno_condition(&p.d, &cfg.search) else {
        report.zeno = Some(ZenoReport::infeasible());
        return Ok(report);
    };
    let plan = plan_zeno(w.c, cfg.protocol.n.unwrap_or(DEFAULT_ZENO_LOOPS))?;
    report.zeno = Some(ZenoReport::from_witness(&w, Some(plan)));
    let psi_r = psi_r(p, cfg)?;
    let object = object_state(p, cfg)?;
    let mut outcomes = OutcomesReport::default();
    for &occupied in occupancies(cfg) {
        let run = simulate_zeno(&p.system.spec, &plan, &w.chi, &psi_r, &object, occupied, &cfg.tolerances)?;
        record_outcome(&mut outcomes, occupied, run.report, cfg)?;
    }
    report.outcomes = Some(outcomes);
    Ok(report)
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    P,
    PPlus,
    PMinus,
    Alpha,
    N,
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(SweepParam::P),
            "p_plus" | "p-plus" => Ok(SweepParam::PPlus),
            "p_minus" | "p-minus" => Ok(SweepParam::PMinus),
            "alpha" => Ok(SweepParam::Alpha),
            "N" | "n" => Ok(SweepParam::N),
            other => Err(Error::BadSweepRange(format!(
                "unknown parameter {other:?}, expected p, p_plus, p_minus, alpha or N"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::P => "p",
            SweepParam::PPlus => "p_plus",
            SweepParam::PMinus => "p_minus",
            SweepParam::Alpha => "alpha",
            SweepParam::N => "N",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepRange {
    /// The grid values, validated for the parameter.
    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = |msg: String| Err(Error::BadSweepRange(msg));
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if !(self.from.is_finite() && self.to.is_finite()) || self.from > self.to {
            return bad(format!("need finite from <= to, got {}..{}", self.from, self.to));
        }
        let (lo, hi) = match self.param {
            SweepParam::P | SweepParam::PPlus | SweepParam::PMinus => (-1.0, 1.0),
            SweepParam::Alpha => (0.0, 1.0 - 1e-12),
            SweepParam::N => (1.0, 1e6),
        };
        if self.from < lo || self.to > hi {
            return bad(format!("{} must stay within [{lo}, {hi}]", self.param.name()));
        }
        let values: Vec<f64> = if self.steps == 1 {
            vec![self.from]
        } else {
            (0..self.steps)
                .map(|k| self.from + (self.to - self.from) * k as f64 / (self.steps - 1) as f64)
                .collect()
        };
        Ok(match self.param {
            SweepParam::N => {
                let mut ns: Vec<f64> = values.into_iter().map(f64::round).collect();
                ns.dedup();
                ns
            }
            _ => values,
        })
    }
}

fn sweep_point(base: &RunConfig, param: SweepParam, value: f64, index: usize) -> Result<Report> {
    let mut cfg = base.clone();
    match param {
        SweepParam::P => {
            cfg.system.p = Some(value);
            cfg.system.p_plus = None;
            cfg.system.p_minus = None;
        }
        SweepParam::PPlus => cfg.system.p_plus = Some(value),
        SweepParam::PMinus => cfg.system.p_minus = Some(value),
        SweepParam::Alpha => cfg.protocol.alpha = Some(value),
        SweepParam::N => cfg.protocol.n = Some(value as usize),
    }
    let outcome = match (param, cfg.protocol.mode) {
        (_, Mode::Zeno) | (SweepParam::N, _) => {
            cfg.protocol.mode = Mode::Zeno;
            cmd_simulate(&cfg)
        }
        (SweepParam::Alpha, Mode::Single) => cmd_construct(&cfg),
        _ => cmd_optimize(&cfg),
    };
    let mut report = match outcome {
        Ok(r) => r,
        Err(e @ (Error::Config { .. } | Error::Io(_) | Error::Json(_))) => return Err(e),
        Err(e) => {
            let mut r = Report::new("sweep", &cfg, None);
            r.error = Some(e.to_string());
            r
        }
    };
    report.command = "sweep".into();
    report.sweep = Some(SweepPoint {
        parameter: param.name().into(),
        value,
        index,
    });
    Ok(report)
}

/// Runs the sweep in parallel batches and hands each finished report to
/// `emit` in grid order.
pub fn cmd_sweep(cfg: &RunConfig, range: &SweepRange, mut emit: impl FnMut(&Report) -> Result<()>) -> Result<()> {
    cfg.validate()?;
    let values = range.values()?;
    let is_atom_param = matches!(range.param, SweepParam::P | SweepParam::PPlus | SweepParam::PMinus);
    if is_atom_param && cfg.system.preset.as_deref() != Some("atom") {
        return Err(Error::BadSweepRange(format!(
            "{} can only be swept on the atom preset",
            range.param.name()
        )));
    }
    let batch = rayon::current_num_threads().max(1) * 2;
    for (chunk_idx, chunk) in values.chunks(batch).enumerate() {
        let reports: Vec<Result<Report>> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, &v)| sweep_point(cfg, range.param, v, chunk_idx * batch + i))
            .collect();
        for r in reports {
            emit(&r?)?;
        }
    }
    Ok(())
}

/// Writes a report in the configured format.
pub fn write_report(out: &mut dyn Write, report: &Report, text: bool) -> Result<()> {
    if text {
        out.write_all(report.to_text().as_bytes())?;
    } else {
        writeln!(out, "{}", report.to_json())?;
    }
    Ok(())
}
