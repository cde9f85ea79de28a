use serde::{Deserialize, Serialize};

use crate::ed::MarketSystem;

use super::message::{CommLog, MessageKind, AGENT, BYTES_PER_SCALAR, HEADER_BYTES};
use super::Mode;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PartyCost {
    pub party: String,
    pub up_scalars: usize,
    pub up_bytes: usize,
    pub down_scalars: usize,
    pub down_bytes: usize,
}

/// Traffic per party and in total. "Up" is every submission, "down" every
/// solution slice returned by the agent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub parties: Vec<PartyCost>,
    pub up_scalars: usize,
    pub up_bytes: usize,
    pub down_scalars: usize,
    pub down_bytes: usize,
}

impl CostReport {
    pub fn up_megabytes(&self) -> f64 {
        self.up_bytes as f64 / 1e6
    }

    pub fn down_megabytes(&self) -> f64 {
        self.down_bytes as f64 / 1e6
    }

    pub fn up_megabits(&self) -> f64 {
        self.up_bytes as f64 * 8.0 / 1e6
    }

    pub fn down_megabits(&self) -> f64 {
        self.down_bytes as f64 * 8.0 / 1e6
    }

    /// Time to move both directions over a link of `mbps` megabits per second.
    pub fn transfer_seconds(&self, mbps: f64) -> f64 {
        (self.up_megabits() + self.down_megabits()) / mbps
    }

    pub fn party(&self, id: &str) -> Option<&PartyCost> {
        self.parties.iter().find(|p| p.party == id)
    }
}

fn entry(parties: &mut Vec<PartyCost>, id: &str) -> usize {
    match parties.iter().position(|p| p.party == id) {
        Some(i) => i,
        None => {
            parties.push(PartyCost {
                party: id.to_string(),
                ..PartyCost::default()
            });
            parties.len() - 1
        }
    }
}

pub fn comm_cost(log: &CommLog) -> CostReport {
    let mut r = CostReport::default();
    for m in &log.messages {
        match m.kind {
            MessageKind::Submission => {
                let i = entry(&mut r.parties, &m.sender);
                r.parties[i].up_scalars += m.scalar_count;
                r.parties[i].up_bytes += m.byte_size;
            }
            MessageKind::TransformedSolutionSlice if m.sender == AGENT => {
                let i = entry(&mut r.parties, &m.receiver);
                r.parties[i].down_scalars += m.scalar_count;
                r.parties[i].down_bytes += m.byte_size;
            }
            _ => {}
        }
    }
    r.up_scalars = r.parties.iter().map(|p| p.up_scalars).sum();
    r.up_bytes = r.parties.iter().map(|p| p.up_bytes).sum();
    r.down_scalars = r.parties.iter().map(|p| p.down_scalars).sum();
    r.down_bytes = r.parties.iter().map(|p| p.down_bytes).sum();
    r
}

/// Traffic of a round computed from dimensions alone, without building or
/// masking any matrix. Matches the log of an actual round exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectedCounts {
    pub up_scalars: usize,
    pub up_messages: usize,
    pub down_scalars: usize,
    pub down_messages: usize,
}

impl ProjectedCounts {
    pub fn up_bytes(&self) -> usize {
        self.up_scalars * BYTES_PER_SCALAR + self.up_messages * HEADER_BYTES
    }

    pub fn down_bytes(&self) -> usize {
        self.down_scalars * BYTES_PER_SCALAR + self.down_messages * HEADER_BYTES
    }
}

struct EntityDims {
    n: usize,
    m: usize,
    clear: usize,
}

fn entity_dims(system: &MarketSystem) -> Vec<EntityDims> {
    let t = system.horizon;
    let mut out = Vec::new();
    for owner in system.gencos() {
        let mut d = EntityDims { n: 0, m: 0, clear: 0 };
        for g in system.generators_of(&owner).map(|g| &system.generators[g]) {
            let ramps = g.ramp_up.is_some() as usize + g.ramp_down.is_some() as usize;
            d.n += t * g.segments.len();
            d.m += 2 * t * g.segments.len() + (t - 1) * ramps;
            d.clear += 3 * g.segments.len() + ramps;
        }
        out.push(d);
    }
    for owner in system.lses() {
        let mut d = EntityDims { n: 0, m: 0, clear: 0 };
        for l in system.loads_of(&owner).map(|l| &system.loads[l]) {
            d.n += t * l.segments.len();
            d.m += 2 * t * l.segments.len();
            d.clear += 3 * l.segments.len();
        }
        out.push(d);
    }
    out
}

pub fn projected_counts(system: &MarketSystem, mode: Mode) -> ProjectedCounts {
    let t = system.horizon;
    let tb = t * system.num_buses();
    let na = t * (system.num_buses() - 1);
    let tl = t * system.lines.len();
    let ents = entity_dims(system);
    let sum_n: usize = ents.iter().map(|e| e.n).sum();
    let (up_scalars, up_messages) = match mode {
        Mode::Clear => (
            ents.iter().map(|e| e.clear).sum::<usize>() + 1 + system.num_buses() + 4 * system.lines.len(),
            ents.len() + 1,
        ),
        Mode::Masked => {
            let entities: usize = ents
                .iter()
                .map(|e| e.n + e.m * e.n + e.m * e.m + e.m + tb * e.n)
                .sum();
            let iso = 2 * tl * na + 2 * tl * tl + 2 * tl + tb * sum_n + tb * na;
            (entities + iso, 2 * ents.len() + 1)
        }
    };
    ProjectedCounts {
        up_scalars,
        up_messages,
        down_scalars: sum_n + na + tb,
        down_messages: ents.len() + 1,
    }
}
