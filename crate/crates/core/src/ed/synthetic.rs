use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Bus, EdError, Generator, Line, Load, MarketSystem, Segment};

/// Recipe for a random but always feasible market.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub buses: usize,
    pub gencos: usize,
    pub lses: usize,
    /// Units per GENCO and loads per LSE, unless totals are given.
    pub entity_size: usize,
    /// Total units spread over the GENCOs; the last GENCO takes the remainder.
    pub total_units: Option<usize>,
    pub total_loads: Option<usize>,
    pub horizon: usize,
    pub gen_segments: usize,
    pub load_segments: usize,
    /// Extra lines on top of the random spanning tree.
    pub chords: Option<usize>,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn new(buses: usize, gencos: usize, lses: usize, entity_size: usize, horizon: usize, seed: u64) -> Self {
        Self {
            buses,
            gencos,
            lses,
            entity_size,
            total_units: None,
            total_loads: None,
            horizon,
            gen_segments: 3,
            load_segments: 2,
            chords: None,
            seed,
        }
    }

    fn per_entity(total: Option<usize>, entities: usize, size: usize) -> Vec<usize> {
        match total {
            None => vec![size; entities],
            Some(total) => {
                let mut out = Vec::with_capacity(entities);
                let mut left = total;
                for e in 0..entities {
                    let take = if e + 1 == entities { left } else { size.min(left) };
                    out.push(take);
                    left -= take;
                }
                out
            }
        }
    }

    fn check(&self) -> Result<(), EdError> {
        let named = [
            ("buses", self.buses),
            ("gencos", self.gencos),
            ("lses", self.lses),
            ("entity_size", self.entity_size),
            ("hours", self.horizon),
            ("generator segments", self.gen_segments),
            ("load segments", self.load_segments),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| *v == 0) {
            return Err(EdError::InvalidCounts(format!("{name} must be at least 1")));
        }
        for (what, total, entities) in [
            ("units", self.total_units, self.gencos),
            ("loads", self.total_loads, self.lses),
        ] {
            if let Some(t) = total {
                if t < entities {
                    return Err(EdError::InvalidCounts(format!(
                        "{t} {what} cannot give each of {entities} entities an asset"
                    )));
                }
                if self.entity_size * (entities - 1) >= t {
                    return Err(EdError::InvalidCounts(format!(
                        "{t} {what} leave the last of {entities} entities empty at entity size {}",
                        self.entity_size
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A market at the scale of the IEEE 118-bus study: 118 buses, 54 units,
/// 91 loads and 24 hours, with five offer segments per unit and one bid
/// segment per load. Entities own `entity_size` assets each.
pub fn full_scale(entity_size: usize, seed: u64) -> SyntheticConfig {
    let k = entity_size.max(1);
    SyntheticConfig {
        buses: 118,
        gencos: 54usize.div_ceil(k),
        lses: 91usize.div_ceil(k),
        entity_size: k,
        total_units: Some(54),
        total_loads: Some(91),
        horizon: 24,
        gen_segments: 5,
        load_segments: 1,
        chords: Some(186 - 117),
        seed,
    }
}

pub fn gen_synthetic(
    buses: usize,
    gencos: usize,
    lses: usize,
    entity_size: usize,
    horizon: usize,
    seed: u64,
) -> Result<MarketSystem, EdError> {
    gen_synthetic_with(&SyntheticConfig::new(buses, gencos, lses, entity_size, horizon, seed))
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

fn floor_to(v: f64, step: f64) -> f64 {
    (v / step + 1e-9).floor() * step
}

pub fn gen_synthetic_with(cfg: &SyntheticConfig) -> Result<MarketSystem, EdError> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nb = cfg.buses;

    let mut order: Vec<u32> = (1..=nb as u32).collect();
    order.shuffle(&mut rng);
    let mut lines = Vec::new();
    let mut linked = std::collections::BTreeSet::new();
    let mut add_line = |rng: &mut ChaCha8Rng, a: u32, b: u32, lines: &mut Vec<Line>| {
        let key = (a.min(b), a.max(b));
        if a == b || !linked.insert(key) {
            return false;
        }
        lines.push(Line {
            from: a,
            to: b,
            reactance: round_to(rng.gen_range(0.05..0.3), 0.001),
            capacity: rng.gen_range(50..=300) as f64,
        });
        true
    };
    for i in 1..nb {
        let parent = order[rng.gen_range(0..i)];
        add_line(&mut rng, order[i], parent, &mut lines);
    }
    let max_chords = nb * (nb - 1) / 2 - (nb - 1);
    let chords = cfg.chords.unwrap_or(nb / 2).min(max_chords);
    let mut added = 0;
    while added < chords {
        let a = rng.gen_range(1..=nb as u32);
        let b = rng.gen_range(1..=nb as u32);
        if add_line(&mut rng, a, b, &mut lines) {
            added += 1;
        }
    }

    let multi_hour = cfg.horizon > 1;
    let mut generators = Vec::new();
    for (e, count) in SyntheticConfig::per_entity(cfg.total_units, cfg.gencos, cfg.entity_size)
        .into_iter()
        .enumerate()
    {
        for _ in 0..count {
            let mut price = rng.gen_range(8.0..20.0);
            let segments: Vec<Segment> = (0..cfg.gen_segments)
                .map(|_| {
                    let s = Segment {
                        price: round_to(price, 0.01),
                        min: 0.0,
                        max: round_to(rng.gen_range(20.0..80.0), 0.1),
                    };
                    price += rng.gen_range(1.0..6.0);
                    s
                })
                .collect();
            let cap: f64 = segments.iter().map(|s| s.max).sum();
            let ramp = multi_hour.then(|| round_to(cap * rng.gen_range(0.3..0.6), 0.1));
            generators.push(Generator {
                id: format!("G{}", generators.len() + 1),
                owner: format!("GENCO{}", e + 1),
                bus: rng.gen_range(1..=nb as u32),
                segments,
                ramp_up: ramp,
                ramp_down: ramp,
            });
        }
    }

    // Each bus can serve its own minimum demand, so zero flow is feasible.
    let mut local_room = vec![0.0; nb + 1];
    for g in &generators {
        local_room[g.bus as usize] += g.segments.iter().map(|s| s.max).sum::<f64>();
    }
    let mut loads = Vec::new();
    for (e, count) in SyntheticConfig::per_entity(cfg.total_loads, cfg.lses, cfg.entity_size)
        .into_iter()
        .enumerate()
    {
        for _ in 0..count {
            let bus = rng.gen_range(1..=nb as u32);
            let mut price = rng.gen_range(30.0..45.0);
            let mut segments: Vec<Segment> = (0..cfg.load_segments)
                .map(|_| {
                    let s = Segment {
                        price: round_to(price, 0.01),
                        min: 0.0,
                        max: round_to(rng.gen_range(10.0..60.0), 0.1),
                    };
                    price -= rng.gen_range(1.0..8.0);
                    s
                })
                .collect();
            let wanted = segments[0].max * rng.gen_range(0.2..0.8);
            let room = local_room[bus as usize];
            let min = floor_to(wanted.min(room), 0.1).max(0.0);
            local_room[bus as usize] = room - min;
            segments[0].min = min;
            loads.push(Load {
                id: format!("L{}", loads.len() + 1),
                owner: format!("LSE{}", e + 1),
                bus,
                segments,
            });
        }
    }

    Ok(MarketSystem {
        name: format!("synthetic-{}b-{}g-{}l-k{}-t{}-s{}", nb, cfg.gencos, cfg.lses, cfg.entity_size, cfg.horizon, cfg.seed),
        horizon: cfg.horizon,
        reference_bus: 1,
        buses: (1..=nb as u32).map(|id| Bus { id }).collect(),
        lines,
        generators,
        loads,
    })
}
