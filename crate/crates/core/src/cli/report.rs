//! JSON and CSV output of the command-line driver.
//!
//! Numbers are written with six decimals. Timing lives in its own object
//! (JSON) or its own columns (CSV) so that golden comparisons can drop it.

use serde::Serialize;
use serde_json::value::RawValue;

use crate::ed::{ClearedMarket, MarketSystem};
use crate::protocol::CostReport;

pub const SCHEMA: u32 = 1;

/// A number rendered with six decimals.
#[derive(Clone, Debug)]
pub struct Fixed(pub f64);

pub fn fixed(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

impl Serialize for Fixed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawValue::from_string(fixed(self.0))
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

fn fx(v: &[f64]) -> Vec<Fixed> {
    v.iter().copied().map(Fixed).collect()
}

#[derive(Serialize)]
pub struct AssetReport {
    pub id: String,
    pub owner: String,
    pub bus: u32,
    /// Segment quantities, one list per hour.
    pub segments: Vec<Vec<Fixed>>,
    /// Total per hour.
    pub total: Vec<Fixed>,
}

#[derive(Serialize)]
pub struct BusSeries {
    pub bus: u32,
    pub values: Vec<Fixed>,
}

#[derive(Serialize)]
pub struct LineSeries {
    pub from: u32,
    pub to: u32,
    pub values: Vec<Fixed>,
}

#[derive(Serialize)]
pub struct CommSummary {
    pub up_scalars: usize,
    pub up_bytes: usize,
    pub up_megabits: Fixed,
    pub down_scalars: usize,
    pub down_bytes: usize,
    pub down_megabits: Fixed,
}

impl From<&CostReport> for CommSummary {
    fn from(c: &CostReport) -> Self {
        Self {
            up_scalars: c.up_scalars,
            up_bytes: c.up_bytes,
            up_megabits: Fixed(c.up_megabits()),
            down_scalars: c.down_scalars,
            down_bytes: c.down_bytes,
            down_megabits: Fixed(c.down_megabits()),
        }
    }
}

#[derive(Serialize)]
pub struct Timing {
    pub solve_ms: Fixed,
}

#[derive(Serialize)]
pub struct SolveReport {
    pub schema: u32,
    pub case: String,
    pub mode: String,
    pub seed: u64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<Fixed>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<AssetReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub loads: Vec<AssetReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub angles: Vec<BusSeries>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flows: Vec<LineSeries>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lmp: Vec<BusSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comm: Option<CommSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl SolveReport {
    pub fn failed(system: &MarketSystem, mode: &str, seed: u64, status: &str, message: String) -> Self {
        Self {
            schema: SCHEMA,
            case: system.name.clone(),
            mode: mode.to_string(),
            seed,
            status: status.to_string(),
            message: Some(message),
            objective: None,
            generators: vec![],
            loads: vec![],
            angles: vec![],
            flows: vec![],
            lmp: vec![],
            comm: None,
            timing: None,
        }
    }

    pub fn optimal(system: &MarketSystem, m: &ClearedMarket, mode: &str, seed: u64) -> Self {
        let t = system.horizon;
        let per_hour = |v: &[f64]| -> (Vec<Vec<Fixed>>, Vec<Fixed>) {
            let nseg = v.len() / t;
            let chunks: Vec<&[f64]> = v.chunks(nseg.max(1)).collect();
            (
                chunks.iter().map(|c| fx(c)).collect(),
                chunks.iter().map(|c| Fixed(c.iter().sum())).collect(),
            )
        };
        let nb = system.num_buses();
        let nl = system.lines.len();
        let bus_series = |v: &[f64]| -> Vec<BusSeries> {
            system
                .buses
                .iter()
                .enumerate()
                .map(|(b, bus)| BusSeries {
                    bus: bus.id,
                    values: (0..t).map(|h| Fixed(v[h * nb + b])).collect(),
                })
                .collect()
        };
        Self {
            objective: Some(Fixed(m.objective)),
            message: None,
            status: "optimal".into(),
            generators: system
                .generators
                .iter()
                .zip(&m.dispatch.generators)
                .map(|(g, v)| {
                    let (segments, total) = per_hour(v);
                    AssetReport {
                        id: g.id.clone(),
                        owner: g.owner.clone(),
                        bus: g.bus,
                        segments,
                        total,
                    }
                })
                .collect(),
            loads: system
                .loads
                .iter()
                .zip(&m.dispatch.loads)
                .map(|(l, v)| {
                    let (segments, total) = per_hour(v);
                    AssetReport {
                        id: l.id.clone(),
                        owner: l.owner.clone(),
                        bus: l.bus,
                        segments,
                        total,
                    }
                })
                .collect(),
            angles: bus_series(&m.angles),
            flows: system
                .lines
                .iter()
                .enumerate()
                .map(|(l, line)| LineSeries {
                    from: line.from,
                    to: line.to,
                    values: (0..t).map(|h| Fixed(m.flows[h * nl + l])).collect(),
                })
                .collect(),
            lmp: bus_series(&m.lmp),
            ..Self::failed(system, mode, seed, "optimal", String::new())
        }
    }
}

/// One row of the `compare` CSV.
#[derive(Serialize)]
pub struct CompareRow {
    pub seed: u64,
    pub obj_clear: String,
    pub obj_masked: String,
    pub max_dispatch_diff: String,
    pub max_lmp_diff: String,
    pub t_clear_ms: String,
    pub t_masked_ms: String,
    pub scalars_up: usize,
    pub scalars_down: usize,
    /// `t_masked_ms / t_clear_ms`.
    pub ratio: String,
}
