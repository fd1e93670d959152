use serde::{Deserialize, Serialize};

use super::config::{InlineSystem, RunConfig};
use crate::atom::{build_atom_spec, potting_configuration, AtomParams};
use crate::criterion::Witness;
use crate::error::{Error, Result};
use crate::model::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Atom,
    AtomPotting,
}

pub const PRESET_NAMES: [&str; 2] = ["atom", "atom-potting"];

pub fn lookup(name: &str) -> Result<Preset> {
    match name {
        "atom" => Ok(Preset::Atom),
        "atom-potting" => Ok(Preset::AtomPotting),
        other => Err(Error::Config {
            field: "system.preset".into(),
            message: format!("unknown preset {other:?}, expected one of {PRESET_NAMES:?}"),
        }),
    }
}

/// What a preset stands for, echoed in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetInfo {
    pub name: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_minus: Option<f64>,
}

/// A configured system ready for the pipeline.
#[derive(Debug, Clone)]
pub struct ResolvedSystem {
    pub spec: SystemSpec,
    pub preset: Option<PresetInfo>,
    /// Known single-shot witness shipped with the preset.
    pub witness: Option<Witness>,
}

fn p_value(v: Option<f64>, field: &str) -> Result<f64> {
    let p = v.unwrap_or(0.0);
    if !(-1.0..=1.0).contains(&p) {
        return Err(Error::Config {
            field: field.into(),
            message: format!("p = {p} is outside [-1, 1]"),
        });
    }
    Ok(p)
}

pub fn resolve_system(cfg: &RunConfig) -> Result<ResolvedSystem> {
    cfg.validate()?;
    let sys = &cfg.system;
    if let Some(inline) = &sys.inline {
        return Ok(ResolvedSystem {
            spec: inline.to_spec(cfg.tolerances.eps_herm)?,
            preset: None,
            witness: None,
        });
    }
    let name = sys.preset.as_deref().unwrap_or_default();
    match lookup(name)? {
        Preset::Atom => {
            let p_plus = p_value(sys.p_plus.or(sys.p), "system.p_plus")?;
            let p_minus = p_value(sys.p_minus.or(sys.p), "system.p_minus")?;
            let params = AtomParams::from_p(p_plus, p_minus)?;
            Ok(ResolvedSystem {
                spec: build_atom_spec(&params)?,
                preset: Some(PresetInfo {
                    name: name.into(),
                    description: "four-level atom with degenerate metastable states |m+>, |m->, probed by one \
                                  circularly polarized photon; p = cos(g t) per polarization"
                        .into(),
                    p_plus: Some(p_plus),
                    p_minus: Some(p_minus),
                }),
                witness: None,
            })
        }
        Preset::AtomPotting => {
            let pc = potting_configuration()?;
            Ok(ResolvedSystem {
                spec: pc.spec,
                preset: Some(PresetInfo {
                    name: name.into(),
                    description: "atom with p+ = p- = 0 and chi = psi_d' = (|-> - |+>)/sqrt 2, c = 1/2; \
                                  optimal single-shot success probability 1/16"
                        .into(),
                    p_plus: Some(0.0),
                    p_minus: Some(0.0),
                }),
                witness: Some(pc.witness),
            })
        }
    }
}

/// Replaces a preset with the equivalent inline system.
pub fn inline_of(cfg: &RunConfig) -> Result<InlineSystem> {
    Ok(InlineSystem::from_spec(&resolve_system(cfg)?.spec))
}
