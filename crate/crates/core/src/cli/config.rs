//! Run configuration, read from JSON and overridable from the command line.
//!
//! Complex numbers are `[re, im]` pairs; matrices are row-major arrays of rows.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::criterion::SearchConfig;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::model::SystemSpec;
use crate::tol::Tolerances;

pub type Pair = [f64; 2];

pub fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

pub fn unpair(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

pub fn vector_to_pairs(v: &CVector) -> Vec<Pair> {
    v.iter().map(|z| pair(*z)).collect()
}

pub fn pairs_to_vector(v: &[Pair]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|p| unpair(*p)))
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    m.row_iter()
        .map(|row| row.iter().map(|z| pair(*z)).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<Pair>], field: &str) -> Result<CMatrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(config_error(
            format!("{field}[{i}]"),
            format!("row has {} entries, expected {ncols}", rows[i].len()),
        ));
    }
    Ok(CMatrix::from_fn(rows.len(), ncols, |i, j| unpair(rows[i][j])))
}

fn config_error(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Single,
    Zeno,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

/// An explicit system, mirroring [`SystemSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineSystem {
    pub n: usize,
    pub n_ext: usize,
    pub m: usize,
    pub dim_r: usize,
    pub h_object: Vec<Vec<Pair>>,
    pub h_probe: Vec<Vec<Pair>>,
    pub h_interaction: Vec<Vec<Pair>>,
    pub t: f64,
}

impl InlineSystem {
    pub fn from_spec(spec: &SystemSpec) -> Self {
        InlineSystem {
            n: spec.n,
            n_ext: spec.n_ext,
            m: spec.m,
            dim_r: spec.dim_r,
            h_object: matrix_to_rows(&spec.h_object),
            h_probe: matrix_to_rows(&spec.h_probe),
            h_interaction: matrix_to_rows(&spec.h_interaction),
            t: spec.t,
        }
    }

    pub fn to_spec(&self, eps_herm: f64) -> Result<SystemSpec> {
        SystemSpec::new(
            self.n,
            self.n_ext,
            self.m,
            self.dim_r,
            rows_to_matrix(&self.h_object, "system.inline.h_object")?,
            rows_to_matrix(&self.h_probe, "system.inline.h_probe")?,
            rows_to_matrix(&self.h_interaction, "system.inline.h_interaction")?,
            self.t,
            eps_herm,
        )
        .map_err(|e| config_error("system.inline", e.to_string()))
    }
}

/// Either a named preset (with its parameters) or an inline system.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Sets both `p_plus` and `p_minus` of the atom preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<InlineSystem>,
}

/// A user-supplied `(psi_d, chi, c)` to verify instead of searching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub psi_d: Vec<Pair>,
    pub chi: Vec<Pair>,
    pub c: Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Simulate only the empty box.
    pub empty: bool,
    /// Object state in `H_S`; the uniform superposition when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub object_state: Option<Vec<Pair>>,
    /// Reference-branch state; the first basis vector of `H_r` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_r: Option<Vec<Pair>>,
    /// Points of the initial `alpha` scan.
    pub resolution: usize,
    /// Monte Carlo trials on top of the exact distribution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            mode: Mode::Single,
            alpha: None,
            n: None,
            empty: false,
            object_state: None,
            psi_r: None,
            resolution: 201,
            trials: None,
        }
    }
}

pub const DEFAULT_ZENO_LOOPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessConfig>,
    pub tolerances: Tolerances,
    pub search: SearchConfig,
    pub protocol: ProtocolConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            config_error(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        match (&s.preset, &s.inline) {
            (Some(_), Some(_)) => {
                return Err(config_error("system", "give either a preset or an inline system, not both"))
            }
            (None, None) => return Err(config_error("system", "a preset or an inline system is required")),
            (None, Some(_)) if s.p.is_some() || s.p_plus.is_some() || s.p_minus.is_some() => {
                return Err(config_error("system.p", "p parameters only apply to the atom preset"))
            }
            _ => {}
        }
        if let Some(name) = &s.preset {
            super::presets::lookup(name)?;
        }
        let t = &self.tolerances;
        for (field, v) in [("tolerances.tol_rel", t.tol_rel), ("tolerances.tol_lin", t.tol_lin), ("tolerances.eps_herm", t.eps_herm)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_error(field, format!("must be positive, got {v}")));
            }
        }
        if let Some(a) = self.protocol.alpha {
            if !(0.0..1.0).contains(&a) {
                return Err(config_error("protocol.alpha", format!("must lie in [0, 1), got {a}")));
            }
        }
        if self.protocol.n == Some(0) {
            return Err(config_error("protocol.N", "must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_name_the_line() {
        let err = RunConfig::from_json("{\n  \"system\": {\"preset\": \"atom\",\n  \"bogus\": 1}\n}").unwrap_err();
        match err {
            Error::Config { field, .. } => assert!(field.starts_with("line 3")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exactly_one_system() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_err());
        cfg.system.preset = Some("atom".into());
        cfg.validate().unwrap();
        cfg.system.preset = Some("nope".into());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn ragged_matrix_rejected() {
        let rows = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0]]];
        assert!(matches!(rows_to_matrix(&rows, "h"), Err(Error::Config { .. })));
    }

    #[test]
    fn defaults_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.system.preset = Some("atom-potting".into());
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
