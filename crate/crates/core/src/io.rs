//! JSON model files and CSV value tables.
//!
//! ```json
//! {"format": 1, "n": 2, "target": 2, "actions": [
//!   [{"cost": 1.0, "to": [[2, 0.5], [1, 0.5]]}, {"cost": 3.0, "to": [[2, 1.0]]}],
//!   [{"mode": {"stay": 2, "switch": 0, "curve": {"kind": "quadratic", "beta": 1, "gamma": 2, "offset": 0}, "support": "interval"}}]
//! ]}
//! ```

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::CostCurve;
use crate::hjb::geometry::Vec3;
use crate::hjb::profile::SpeedProfile;
use crate::model::{Action, FiniteAction, OsspModel, SimplexMode, Support, UrgencyMode, ValueFunction};
use crate::validate::{validate_model, ValidationReport};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("target must equal n ({n}), got {target}")]
    Target { n: usize, target: usize },
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("model violates {} assumption(s); first: {}", .0.hard().count(), .0.hard().next().map(|v| v.detail.as_str()).unwrap_or(""))]
    Invalid(ValidationReport),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<u32>,
    n: usize,
    target: usize,
    actions: Vec<Vec<ActionFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ActionFile {
    Finite { cost: f64, to: Vec<(usize, f64)> },
    Mode { mode: ModeFile },
    Simplex { simplex: SimplexFile },
}

#[derive(Serialize, Deserialize)]
struct ModeFile {
    stay: usize,
    switch: usize,
    curve: CostCurve,
    support: SupportFile,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SupportFile {
    Points(Vec<f64>),
    Named(String),
}

#[derive(Serialize, Deserialize)]
struct SimplexFile {
    successors: Vec<usize>,
    offsets: Vec<Vec3>,
    profile: SpeedProfile,
}

fn to_file(model: &OsspModel) -> ModelFile {
    let actions = model
        .actions
        .iter()
        .map(|set| {
            set.iter()
                .map(|a| match a {
                    Action::Finite(f) => ActionFile::Finite { cost: f.cost, to: f.transitions.clone() },
                    Action::Urgency(m) => ActionFile::Mode {
                        mode: ModeFile {
                            stay: m.stay,
                            switch: m.switch,
                            curve: m.curve.clone(),
                            support: match &m.support {
                                Support::Points(ps) => SupportFile::Points(ps.clone()),
                                Support::Interval => SupportFile::Named("interval".into()),
                            },
                        },
                    },
                    Action::Simplex(s) => ActionFile::Simplex {
                        simplex: SimplexFile {
                            successors: s.successors.clone(),
                            offsets: s.offsets.clone(),
                            profile: (*s.profile).clone(),
                        },
                    },
                })
                .collect()
        })
        .collect();
    ModelFile { format: Some(FORMAT_VERSION), n: model.n, target: model.n, actions, labels: model.labels.clone() }
}

pub fn model_to_json(model: &OsspModel) -> String {
    serde_json::to_string_pretty(&to_file(model)).expect("model serializes")
}

/// Parses a model without checking the modelling assumptions.
pub fn model_from_json_unchecked(text: &str) -> Result<OsspModel, IoError> {
    let file: ModelFile = serde_json::from_str(text)?;
    if let Some(v) = file.format {
        if v != FORMAT_VERSION {
            return Err(IoError::Version(v));
        }
    }
    if file.target != file.n {
        return Err(IoError::Target { n: file.n, target: file.target });
    }
    let mut profiles: Vec<Arc<SpeedProfile>> = Vec::new();
    let mut actions = Vec::with_capacity(file.actions.len());
    for set in file.actions {
        let mut out = Vec::with_capacity(set.len());
        for a in set {
            out.push(match a {
                ActionFile::Finite { cost, to } => Action::Finite(FiniteAction::new(cost, to)),
                ActionFile::Mode { mode } => {
                    let support = match mode.support {
                        SupportFile::Points(ps) => Support::Points(ps),
                        SupportFile::Named(s) if s == "interval" => Support::Interval,
                        SupportFile::Named(s) => {
                            return Err(IoError::Json(serde::de::Error::custom(format!("unknown support {s:?}"))))
                        }
                    };
                    Action::Urgency(UrgencyMode::new(mode.stay, mode.switch, mode.curve, support))
                }
                ActionFile::Simplex { simplex } => {
                    // Share identical profiles so large grids stay small in memory.
                    let profile = match profiles.iter().find(|p| ***p == simplex.profile) {
                        Some(p) => p.clone(),
                        None => {
                            let p = Arc::new(simplex.profile);
                            profiles.push(p.clone());
                            p
                        }
                    };
                    Action::Simplex(SimplexMode { successors: simplex.successors, offsets: simplex.offsets, profile })
                }
            });
        }
        actions.push(out);
    }
    Ok(OsspModel { n: file.n, actions, labels: file.labels })
}

/// Parses a model and rejects hard assumption violations.
pub fn model_from_json(text: &str) -> Result<OsspModel, IoError> {
    let model = model_from_json_unchecked(text)?;
    let report = validate_model(&model);
    if !report.is_valid() {
        return Err(IoError::Invalid(report));
    }
    Ok(model)
}

/// `node,value` rows, target included; shortest round-trip float formatting.
pub fn values_csv(values: &ValueFunction) -> String {
    let mut out = String::from("node,value\n");
    for (i, v) in values.values.iter().enumerate() {
        writeln!(out, "{i},{}", fmt_f64(*v)).unwrap();
    }
    out
}

/// Shortest representation that parses back to the same double.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}
