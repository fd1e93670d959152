use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::{pair, vector_to_pairs, Pair, RunConfig};
use super::presets::PresetInfo;
use crate::criterion::{CriterionVerdict, FailureReason, PointOutcome, Witness};
use crate::protocol::{MeasurementSetup, OutcomeCounts, OutcomeReport, ZenoPlan, ZenoWitness};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub psi_d: Vec<Pair>,
    pub chi: Vec<Pair>,
    pub chi_perp: Vec<Vec<Pair>>,
    pub c: Pair,
    pub c_abs: f64,
    /// Dimension of the support of `D |psi_d>`.
    pub l: usize,
    pub independence_residual: f64,
}

impl WitnessReport {
    pub fn from_witness(w: &Witness) -> Self {
        let dec = &w.decomposition;
        WitnessReport {
            psi_d: vector_to_pairs(&w.psi_d),
            chi: vector_to_pairs(&dec.chi),
            chi_perp: dec.chi_perp.iter().map(vector_to_pairs).collect(),
            c: pair(dec.c),
            c_abs: dec.c.norm(),
            l: dec.l,
            independence_residual: w.independence_residual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchSummary {
    pub points: usize,
    pub feasible: usize,
    pub dependent: usize,
    pub degenerate: usize,
    pub no_solution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<FailureReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    /// Where the witness came from: `search`, `preset` or `config`.
    pub source: String,
    pub search: SearchSummary,
}

impl VerdictReport {
    pub fn from_verdict(v: &CriterionVerdict, source: &str) -> Self {
        let mut search = SearchSummary {
            points: v.search_log.len(),
            ..Default::default()
        };
        for r in &v.search_log {
            match r.outcome {
                PointOutcome::Feasible => search.feasible += 1,
                PointOutcome::Dependent => search.dependent += 1,
                PointOutcome::Degenerate => search.degenerate += 1,
                PointOutcome::NoSolution => search.no_solution += 1,
            }
        }
        VerdictReport {
            feasible: v.feasible,
            failure_reason: v.failure_reason,
            witness: v.witness.as_ref().map(WitnessReport::from_witness),
            source: source.into(),
            search,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub alpha: f64,
    pub beta: f64,
    pub psi_r: Vec<Pair>,
    pub psi_i: Vec<Pair>,
    pub p_e_vector: Vec<Pair>,
    pub delta: Pair,
    pub success_probability: f64,
}

impl MeasurementReport {
    pub fn from_setup(s: &MeasurementSetup) -> Self {
        MeasurementReport {
            alpha: s.alpha,
            beta: s.beta,
            psi_r: vector_to_pairs(&s.psi_r),
            psi_i: vector_to_pairs(&s.psi_i),
            p_e_vector: vector_to_pairs(&s.p_e_vector),
            delta: pair(s.delta_amp),
            success_probability: s.delta_amp.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub alpha_opt: f64,
    pub p_opt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomesReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupied: Option<OutcomeReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empty: Option<OutcomeReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupied_counts: Option<OutcomeCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empty_counts: Option<OutcomeCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZenoReport {
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<ZenoPlan>,
}

impl ZenoReport {
    pub fn infeasible() -> Self {
        ZenoReport {
            feasible: false,
            chi: None,
            c: None,
            residual: None,
            plan: None,
        }
    }

    pub fn from_witness(w: &ZenoWitness, plan: Option<ZenoPlan>) -> Self {
        ZenoReport {
            feasible: true,
            chi: Some(vector_to_pairs(&w.chi)),
            c: Some(pair(w.c)),
            residual: Some(w.residual),
            plan,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub parameter: String,
    pub value: f64,
    pub index: usize,
}

/// One command's output. Sections a command does not produce are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum: Option<OptimumReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeno: Option<ZenoReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<OutcomesReport>,
    /// Set when a sweep point could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: RunConfig,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, preset: Option<PresetInfo>) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            preset,
            sweep: None,
            verdict: None,
            measurement: None,
            optimum: None,
            zeno: None,
            outcomes: None,
            error: None,
            config: config.clone(),
        }
    }

    /// False when the system (or the Zeno condition) was found infeasible.
    pub fn is_feasible(&self) -> bool {
        self.verdict.as_ref().is_none_or(|v| v.feasible) && self.zeno.as_ref().is_none_or(|z| z.feasible)
    }

    /// Every probability in `[0, 1 + 1e-9]` and each distribution summing to
    /// one within `1e-9`.
    pub fn probabilities_consistent(&self) -> bool {
        let in_range = |p: f64| (0.0..=1.0 + 1e-9).contains(&p);
        let dist_ok = |r: &OutcomeReport| {
            [r.decay, r.rejected, r.p_e, r.p_i, r.other].into_iter().all(in_range)
                && (r.total() - 1.0).abs() <= 1e-9
                && r.success_fidelity.is_none_or(in_range)
        };
        let mut ok = true;
        if let Some(o) = &self.outcomes {
            ok &= o.occupied.as_ref().is_none_or(dist_ok);
            ok &= o.empty.as_ref().is_none_or(dist_ok);
        }
        if let Some(m) = &self.measurement {
            ok &= in_range(m.success_probability);
        }
        if let Some(o) = &self.optimum {
            ok &= in_range(o.p_opt);
        }
        if let Some(p) = self.zeno.as_ref().and_then(|z| z.plan.as_ref()) {
            ok &= in_range(p.survival_probability);
        }
        ok
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports contain only finite numbers")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{} {}", self.tool, self.command);
        if let Some(p) = &self.preset {
            let _ = write!(s, " [{}]", p.name);
        }
        if let Some(sw) = &self.sweep {
            let _ = write!(s, " {}={}", sw.parameter, sw.value);
        }
        s.push('\n');
        if let Some(e) = &self.error {
            let _ = writeln!(s, "  error: {e}");
        }
        if let Some(v) = &self.verdict {
            if v.feasible {
                let _ = writeln!(s, "  verdict: feasible ({})", v.source);
            } else {
                let reason = v.failure_reason.map(|r| format!("{r:?}")).unwrap_or_default();
                let _ = writeln!(s, "  verdict: infeasible ({reason})");
            }
            if v.search.points > 0 {
                let _ = writeln!(
                    s,
                    "  search: {} points, {} feasible, {} dependent, {} degenerate, {} without solution",
                    v.search.points, v.search.feasible, v.search.dependent, v.search.degenerate, v.search.no_solution
                );
            }
            if let Some(w) = &v.witness {
                let _ = writeln!(s, "  |c| = {:.12}  l = {}", w.c_abs, w.l);
                let _ = writeln!(s, "  psi_d = {}", fmt_vec(&w.psi_d));
                let _ = writeln!(s, "  chi   = {}", fmt_vec(&w.chi));
            }
        }
        if let Some(m) = &self.measurement {
            let _ = writeln!(s, "  alpha = {:.9}  beta = {:.9}", m.alpha, m.beta);
            let _ = writeln!(s, "  Psi_I = {}", fmt_vec(&m.psi_i));
            let _ = writeln!(s, "  Prob(alpha) = {:.12}", m.success_probability);
        }
        if let Some(o) = &self.optimum {
            let _ = writeln!(s, "  alpha_opt = {:.9}  P_opt = {:.12}", o.alpha_opt, o.p_opt);
        }
        if let Some(z) = &self.zeno {
            match (&z.c, &z.plan) {
                (Some(c), Some(p)) => {
                    let _ = writeln!(
                        s,
                        "  zeno: c = {:.9}{:+.9}i  N = {}  theta = {:.9}  delta = {:.9}  survival = {:.12}",
                        c[0], c[1], p.n, p.theta, p.delta, p.survival_probability
                    );
                }
                (Some(c), None) => {
                    let _ = writeln!(s, "  zeno: c = {:.9}{:+.9}i", c[0], c[1]);
                }
                _ => {
                    let _ = writeln!(s, "  zeno: no chi with <chi|D|chi> = c I, c != 1");
                }
            }
        }
        if let Some(o) = &self.outcomes {
            for (label, r) in [("occupied", &o.occupied), ("empty", &o.empty)] {
                if let Some(r) = r {
                    let _ = write!(
                        s,
                        "  {label}: P_e = {:.12}  P_I = {:.12}  decay = {:.12}  rejected = {:.12}  other = {:.12}",
                        r.p_e, r.p_i, r.decay, r.rejected, r.other
                    );
                    if let Some(f) = r.success_fidelity {
                        let _ = write!(s, "  fidelity = {f:.12}");
                    }
                    s.push('\n');
                }
            }
            for (label, c) in [("occupied", &o.occupied_counts), ("empty", &o.empty_counts)] {
                if let Some(c) = c {
                    let _ = writeln!(
                        s,
                        "  {label} samples: P_e {}  P_I {}  decay {}  rejected {}  other {}",
                        c.p_e, c.p_i, c.decay, c.rejected, c.other
                    );
                }
            }
        }
        s
    }
}

fn fmt_vec(v: &[Pair]) -> String {
    let parts: Vec<String> = v.iter().map(|p| format!("{:.6}{:+.6}i", p[0], p[1])).collect();
    format!("[{}]", parts.join(", "))
}
