//! TOML case files.
//!
//! ```toml
//! [meta]
//! name = "threebus"
//! T = 1
//! reference_bus = 1
//!
//! [[buses]]
//! id = 1
//!
//! [[lines]]
//! from = 1
//! to = 2
//! x = 0.1
//! capacity = 30.0
//!
//! [[generators]]
//! id = "U1"
//! owner = "GENCO1"
//! bus = 1
//! segments = [{ price = 10.0, min = 10.0, max = 90.0 }]
//! ```
//!
//! `id` is optional for generators and loads; `ramp_up` and `ramp_down`
//! are optional for generators.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ed::{Bus, EdError, Generator, Line, Load, MarketSystem, Segment};

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Invalid { path: String, source: EdError },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub name: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub reference_bus: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineEntry {
    pub from: u32,
    pub to: u32,
    pub x: f64,
    pub capacity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub owner: String,
    pub bus: u32,
    pub segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_up: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_down: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub owner: String,
    pub bus: u32,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub meta: Meta,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub lines: Vec<LineEntry>,
    #[serde(default)]
    pub generators: Vec<GeneratorEntry>,
    #[serde(default)]
    pub loads: Vec<LoadEntry>,
}

impl CaseFile {
    pub fn from_system(s: &MarketSystem) -> Self {
        Self {
            meta: Meta {
                name: s.name.clone(),
                horizon: s.horizon,
                reference_bus: s.reference_bus,
            },
            buses: s.buses.clone(),
            lines: s
                .lines
                .iter()
                .map(|l| LineEntry {
                    from: l.from,
                    to: l.to,
                    x: l.reactance,
                    capacity: l.capacity,
                })
                .collect(),
            generators: s
                .generators
                .iter()
                .map(|g| GeneratorEntry {
                    id: Some(g.id.clone()),
                    owner: g.owner.clone(),
                    bus: g.bus,
                    segments: g.segments.clone(),
                    ramp_up: g.ramp_up,
                    ramp_down: g.ramp_down,
                })
                .collect(),
            loads: s
                .loads
                .iter()
                .map(|l| LoadEntry {
                    id: Some(l.id.clone()),
                    owner: l.owner.clone(),
                    bus: l.bus,
                    segments: l.segments.clone(),
                })
                .collect(),
        }
    }

    /// Unnamed generators become `U1, U2, ...` and loads `L1, L2, ...`.
    pub fn into_system(self) -> MarketSystem {
        MarketSystem {
            name: self.meta.name,
            horizon: self.meta.horizon,
            reference_bus: self.meta.reference_bus,
            buses: self.buses,
            lines: self
                .lines
                .into_iter()
                .map(|l| Line {
                    from: l.from,
                    to: l.to,
                    reactance: l.x,
                    capacity: l.capacity,
                })
                .collect(),
            generators: self
                .generators
                .into_iter()
                .enumerate()
                .map(|(i, g)| Generator {
                    id: g.id.unwrap_or_else(|| format!("U{}", i + 1)),
                    owner: g.owner,
                    bus: g.bus,
                    segments: g.segments,
                    ramp_up: g.ramp_up,
                    ramp_down: g.ramp_down,
                })
                .collect(),
            loads: self
                .loads
                .into_iter()
                .enumerate()
                .map(|(i, l)| Load {
                    id: l.id.unwrap_or_else(|| format!("L{}", i + 1)),
                    owner: l.owner,
                    bus: l.bus,
                    segments: l.segments,
                })
                .collect(),
        }
    }
}

/// Parses and validates case text. `origin` names the source in errors.
pub fn parse_case(text: &str, origin: &str) -> Result<MarketSystem, CaseError> {
    let case: CaseFile = toml::from_str(text).map_err(|e| CaseError::Parse {
        path: origin.to_string(),
        message: e.to_string().trim_end().to_string(),
    })?;
    let system = case.into_system();
    system.validate().map_err(|source| CaseError::Invalid {
        path: origin.to_string(),
        source,
    })?;
    Ok(system)
}

pub fn read_case(path: &Path) -> Result<MarketSystem, CaseError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CaseError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_case(&text, &shown)
}

pub fn to_case_string(system: &MarketSystem) -> String {
    toml::to_string(&CaseFile::from_system(system)).expect("case files always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::{fixtures::three_bus, gen_synthetic};

    #[test]
    fn round_trip() {
        for sys in [three_bus(), gen_synthetic(9, 3, 2, 2, 3, 4).unwrap()] {
            let text = to_case_string(&sys);
            assert_eq!(parse_case(&text, "mem").unwrap(), sys);
        }
    }

    #[test]
    fn errors_name_the_field() {
        let text = to_case_string(&three_bus()).replacen("capacity", "capacty", 1);
        let msg = parse_case(&text, "bad.case").unwrap_err().to_string();
        assert!(msg.starts_with("bad.case:"), "{msg}");
        assert!(msg.contains("capacty"), "{msg}");

        let text = to_case_string(&three_bus()).replacen("x = 0.1", "x = -0.1", 1);
        let msg = parse_case(&text, "neg.case").unwrap_err().to_string();
        assert!(msg.contains("line 1 reactance"), "{msg}");

        let text = to_case_string(&three_bus()).replacen("T = 1\n", "", 1);
        let msg = parse_case(&text, "short.case").unwrap_err().to_string();
        assert!(msg.contains("`T`"), "{msg}");
    }

    #[test]
    fn default_ids() {
        let text = to_case_string(&three_bus()).replace("id = \"U1\"\n", "");
        let sys = parse_case(&text, "mem").unwrap();
        assert_eq!(sys.generators[0].id, "U1");
    }
}
