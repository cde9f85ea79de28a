use serde::{Deserialize, Serialize};

use super::EdError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from: u32,
    pub to: u32,
    /// Reactance in p.u.
    pub reactance: f64,
    /// Thermal limit in MW, applied in both directions.
    pub capacity: f64,
}

/// One price/quantity step of an offer or bid curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// $/MWh
    pub price: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    /// GENCO owning the unit.
    pub owner: String,
    pub bus: u32,
    pub segments: Vec<Segment>,
    /// Largest hour-to-hour increase of total output, MW/h.
    pub ramp_up: Option<f64>,
    /// Largest hour-to-hour decrease of total output, MW/h, as a positive magnitude.
    pub ramp_down: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub id: String,
    /// LSE owning the load.
    pub owner: String,
    pub bus: u32,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketSystem {
    pub name: String,
    /// Number of hourly periods.
    pub horizon: usize,
    pub reference_bus: u32,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
}

fn first_seen<'a>(owners: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for o in owners {
        if !out.iter().any(|e| e == o) {
            out.push(o.to_string());
        }
    }
    out
}

impl MarketSystem {
    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn bus_index(&self, id: u32) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn reference_index(&self) -> usize {
        self.bus_index(self.reference_bus)
            .expect("reference bus validated")
    }

    /// GENCO ids in order of first appearance.
    pub fn gencos(&self) -> Vec<String> {
        first_seen(self.generators.iter().map(|g| g.owner.as_str()))
    }

    /// LSE ids in order of first appearance.
    pub fn lses(&self) -> Vec<String> {
        first_seen(self.loads.iter().map(|l| l.owner.as_str()))
    }

    pub fn generators_of<'a>(&'a self, owner: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.generators
            .iter()
            .enumerate()
            .filter(move |(_, g)| g.owner == owner)
            .map(|(i, _)| i)
    }

    pub fn loads_of<'a>(&'a self, owner: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.loads
            .iter()
            .enumerate()
            .filter(move |(_, l)| l.owner == owner)
            .map(|(i, _)| i)
    }

    pub fn validate(&self) -> Result<(), EdError> {
        let bad = |m: String| Err(EdError::Invalid(m));
        if self.horizon == 0 {
            return bad("horizon must be at least one hour".into());
        }
        if self.buses.is_empty() {
            return bad("system has no buses".into());
        }
        for (i, b) in self.buses.iter().enumerate() {
            if self.buses[..i].iter().any(|o| o.id == b.id) {
                return bad(format!("duplicate bus id {}", b.id));
            }
        }
        if self.bus_index(self.reference_bus).is_none() {
            return bad(format!("reference bus {} does not exist", self.reference_bus));
        }
        for (l, line) in self.lines.iter().enumerate() {
            for end in [line.from, line.to] {
                if self.bus_index(end).is_none() {
                    return bad(format!("line {} references unknown bus {end}", l + 1));
                }
            }
            if line.from == line.to {
                return bad(format!("line {} connects bus {} to itself", l + 1, line.from));
            }
            if !(line.reactance > 0.0 && line.reactance.is_finite()) {
                return bad(format!("line {} reactance must be positive", l + 1));
            }
            if !(line.capacity > 0.0 && line.capacity.is_finite()) {
                return bad(format!("line {} capacity must be positive", l + 1));
            }
        }
        let check_segments = |what: &str, id: &str, bus: u32, segs: &[Segment]| {
            if self.bus_index(bus).is_none() {
                return bad(format!("{what} {id} sits on unknown bus {bus}"));
            }
            if segs.is_empty() {
                return bad(format!("{what} {id} has no segments"));
            }
            for (k, s) in segs.iter().enumerate() {
                if ![s.price, s.min, s.max].iter().all(|v| v.is_finite()) {
                    return bad(format!("{what} {id} segment {} is not finite", k + 1));
                }
                if s.min > s.max {
                    return bad(format!(
                        "{what} {id} segment {}: min {} exceeds max {}",
                        k + 1,
                        s.min,
                        s.max
                    ));
                }
            }
            Ok(())
        };
        let mut ids: Vec<&str> = Vec::new();
        for g in &self.generators {
            check_segments("generator", &g.id, g.bus, &g.segments)?;
            if g.owner.is_empty() {
                return bad(format!("generator {} has no owner", g.id));
            }
            for r in [g.ramp_up, g.ramp_down].into_iter().flatten() {
                if !(r >= 0.0) || r.is_nan() {
                    return bad(format!("generator {} ramp limit must be non-negative", g.id));
                }
            }
            ids.push(&g.id);
        }
        for l in &self.loads {
            check_segments("load", &l.id, l.bus, &l.segments)?;
            if l.owner.is_empty() {
                return bad(format!("load {} has no owner", l.id));
            }
            ids.push(&l.id);
        }
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return bad(format!("duplicate asset id {id}"));
            }
        }
        let gencos = self.gencos();
        if let Some(o) = self.lses().iter().find(|o| gencos.contains(o)) {
            return bad(format!("entity {o} owns both generators and loads"));
        }
        Ok(())
    }
}
