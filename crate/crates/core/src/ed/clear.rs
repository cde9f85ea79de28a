use serde::{Deserialize, Serialize};

use super::{build_ed_blocks, EdBlocks, EdError, EntityKind, Family, MarketSystem};
use crate::lp::{solve_lp, LpStatus, SolverConfig};

/// Segment quantities per asset, indexed `hour * segments + segment`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dispatch {
    pub horizon: usize,
    pub generators: Vec<Vec<f64>>,
    pub loads: Vec<Vec<f64>>,
}

impl Dispatch {
    pub fn zeros(system: &MarketSystem) -> Self {
        let t = system.horizon;
        Self {
            horizon: t,
            generators: system
                .generators
                .iter()
                .map(|g| vec![0.0; t * g.segments.len()])
                .collect(),
            loads: system
                .loads
                .iter()
                .map(|l| vec![0.0; t * l.segments.len()])
                .collect(),
        }
    }

    /// Scatters per-entity solution vectors (ordered as in `EntityBlock::vars`).
    pub fn from_entity_vectors(
        system: &MarketSystem,
        blocks: &EdBlocks,
        gencos: &[Vec<f64>],
        lses: &[Vec<f64>],
    ) -> Self {
        let mut d = Self::zeros(system);
        for (block, values) in blocks.gencos.iter().zip(gencos) {
            for (v, x) in block.vars.iter().zip(values) {
                let nseg = system.generators[v.asset].segments.len();
                d.generators[v.asset][v.hour * nseg + v.segment] = *x;
            }
        }
        for (block, values) in blocks.lses.iter().zip(lses) {
            for (v, x) in block.vars.iter().zip(values) {
                let nseg = system.loads[v.asset].segments.len();
                d.loads[v.asset][v.hour * nseg + v.segment] = *x;
            }
        }
        d
    }

    fn hour_total(values: &[f64], horizon: usize, t: usize) -> f64 {
        let nseg = values.len() / horizon;
        values[t * nseg..(t + 1) * nseg].iter().sum()
    }

    pub fn generator_total(&self, g: usize, t: usize) -> f64 {
        Self::hour_total(&self.generators[g], self.horizon, t)
    }

    pub fn load_total(&self, d: usize, t: usize) -> f64 {
        Self::hour_total(&self.loads[d], self.horizon, t)
    }

    /// Largest absolute difference over every segment quantity.
    pub fn max_abs_diff(&self, other: &Dispatch) -> f64 {
        self.generators
            .iter()
            .chain(&self.loads)
            .zip(other.generators.iter().chain(&other.loads))
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClearedMarket {
    pub dispatch: Dispatch,
    /// Angles for every bus-hour, `t * B + b`; the reference bus is 0.
    pub angles: Vec<f64>,
    /// MW per line-hour, `t * L + l`, positive in the from→to direction.
    pub flows: Vec<f64>,
    /// $/MWh per bus-hour, `t * B + b`.
    pub lmp: Vec<f64>,
    pub objective: f64,
}

impl ClearedMarket {
    /// Assembles a cleared market from entity dispatch vectors, the reduced
    /// angle vector and balance-row prices.
    pub fn from_parts(
        system: &MarketSystem,
        blocks: &EdBlocks,
        gencos: &[Vec<f64>],
        lses: &[Vec<f64>],
        reduced_angles: &[f64],
        lmp: Vec<f64>,
    ) -> Result<Self, EdError> {
        let dispatch = Dispatch::from_entity_vectors(system, blocks, gencos, lses);
        let flows = line_flows(system, reduced_angles)?;
        let objective = social_welfare(system, &dispatch)?;
        Ok(Self {
            dispatch,
            angles: expand_angles(blocks, reduced_angles),
            flows,
            lmp,
            objective,
        })
    }

    pub fn max_lmp_diff(&self, other: &ClearedMarket) -> f64 {
        max_diff(&self.lmp, &other.lmp)
    }

    pub fn max_angle_diff(&self, other: &ClearedMarket) -> f64 {
        max_diff(&self.angles, &other.angles)
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn expand_angles(blocks: &EdBlocks, reduced: &[f64]) -> Vec<f64> {
    let nb = blocks.num_buses;
    let na = blocks.iso.angle_buses.len();
    let mut full = vec![0.0; blocks.horizon * nb];
    for t in 0..blocks.horizon {
        for (c, &b) in blocks.iso.angle_buses.iter().enumerate() {
            full[t * nb + b] = reduced[t * na + c];
        }
    }
    full
}

/// Line flows `(θ_from − θ_to) / x` for every line-hour given the angles of
/// the non-reference buses.
pub fn line_flows(system: &MarketSystem, reduced_angles: &[f64]) -> Result<Vec<f64>, EdError> {
    let nb = system.num_buses();
    let t_len = system.horizon;
    let reference = system
        .bus_index(system.reference_bus)
        .ok_or_else(|| EdError::Invalid("reference bus does not exist".into()))?;
    let na = nb - 1;
    if reduced_angles.len() != t_len * na {
        return Err(EdError::DimensionMismatch(format!(
            "expected {} angles, found {}",
            t_len * na,
            reduced_angles.len()
        )));
    }
    let angle = |t: usize, bus: usize| -> f64 {
        match bus.cmp(&reference) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => reduced_angles[t * na + bus],
            std::cmp::Ordering::Greater => reduced_angles[t * na + bus - 1],
        }
    };
    let mut flows = Vec::with_capacity(t_len * system.lines.len());
    for t in 0..t_len {
        for line in &system.lines {
            let a = system.bus_index(line.from).ok_or_else(|| {
                EdError::Invalid(format!("line endpoint {} does not exist", line.from))
            })?;
            let b = system.bus_index(line.to).ok_or_else(|| {
                EdError::Invalid(format!("line endpoint {} does not exist", line.to))
            })?;
            flows.push((angle(t, a) - angle(t, b)) / line.reactance);
        }
    }
    Ok(flows)
}

/// Bid value of served load minus offered cost of dispatched generation.
pub fn social_welfare(system: &MarketSystem, dispatch: &Dispatch) -> Result<f64, EdError> {
    let t_len = system.horizon;
    let shape_ok = dispatch.generators.len() == system.generators.len()
        && dispatch.loads.len() == system.loads.len()
        && system
            .generators
            .iter()
            .zip(&dispatch.generators)
            .all(|(g, v)| v.len() == t_len * g.segments.len())
        && system
            .loads
            .iter()
            .zip(&dispatch.loads)
            .all(|(l, v)| v.len() == t_len * l.segments.len());
    if !shape_ok {
        return Err(EdError::DimensionMismatch(
            "dispatch does not match the system's assets, segments and horizon".into(),
        ));
    }
    let value = |segs: &[super::Segment], q: &[f64]| -> f64 {
        let n = segs.len();
        q.iter().enumerate().map(|(i, x)| segs[i % n].price * x).sum()
    };
    let cost: f64 = system
        .generators
        .iter()
        .zip(&dispatch.generators)
        .map(|(g, q)| value(&g.segments, q))
        .sum();
    let benefit: f64 = system
        .loads
        .iter()
        .zip(&dispatch.loads)
        .map(|(l, q)| value(&l.segments, q))
        .sum();
    Ok(benefit - cost)
}

pub fn solve_clear(system: &MarketSystem) -> Result<ClearedMarket, EdError> {
    solve_clear_with(system, &SolverConfig::default())
}

/// Clears the market with all data in one place.
pub fn solve_clear_with(system: &MarketSystem, cfg: &SolverConfig) -> Result<ClearedMarket, EdError> {
    let blocks = build_ed_blocks(system)?;
    blocks.lp_shape().check(cfg)?;
    let lp = blocks.to_lp(system);
    let sol = solve_lp(&lp, cfg)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(EdError::Infeasible {
                family: diagnose_infeasible(system, &blocks, cfg),
            })
        }
        LpStatus::Unbounded => return Err(EdError::Unbounded),
    }
    let layout = blocks.layout();
    let gencos: Vec<Vec<f64>> = layout
        .genco_cols
        .iter()
        .map(|c| sol.x[c.clone()].to_vec())
        .collect();
    let lses: Vec<Vec<f64>> = layout
        .lse_cols
        .iter()
        .map(|c| sol.x[c.clone()].to_vec())
        .collect();
    let lmp = sol.dual_eq.iter().map(|y| -y).collect();
    ClearedMarket::from_parts(
        system,
        &blocks,
        &gencos,
        &lses,
        &sol.x[layout.angle_cols.clone()],
        lmp,
    )
}

/// Names the first constraint family whose removal restores feasibility.
fn diagnose_infeasible(system: &MarketSystem, blocks: &EdBlocks, cfg: &SolverConfig) -> String {
    let groups: [(&str, Vec<(Family, Option<EntityKind>)>); 4] = [
        (
            "line capacity",
            vec![(Family::LineForward, None), (Family::LineReverse, None)],
        ),
        (
            "ramp limits",
            vec![
                (Family::RampUp, Some(EntityKind::Genco)),
                (Family::RampDown, Some(EntityKind::Genco)),
            ],
        ),
        (
            "load segment minimum",
            vec![(Family::SegmentMin, Some(EntityKind::Lse))],
        ),
        (
            "generator segment minimum",
            vec![(Family::SegmentMin, Some(EntityKind::Genco))],
        ),
    ];
    for (name, drop) in groups {
        let relaxed = blocks.to_lp_without(system, &drop);
        if relaxed.num_in() == blocks.to_lp(system).num_in() {
            continue;
        }
        if let Ok(s) = solve_lp(&relaxed, cfg) {
            if s.status != LpStatus::Infeasible {
                return name.to_string();
            }
        }
    }
    Family::Balance.describe(None).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::fixtures::{single_bus, three_bus};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn three_bus_clearing() {
        let sys = three_bus();
        let m = solve_clear(&sys).unwrap();
        assert!(close(&m.dispatch.generators[0], &[90.0, 20.0, 0.0], 1e-9));
        assert!(close(&m.dispatch.generators[1], &[80.0, 0.0, 0.0], 1e-9));
        assert!(close(&m.dispatch.loads[0], &[150.0, 40.0, 0.0], 1e-9));
        assert!(close(&m.angles, &[0.0, -1.0, -10.0], 1e-9));
        assert!(close(&m.flows, &[10.0, 90.0, 100.0], 1e-9));
        assert!(close(&m.lmp, &[15.0, 15.5, 16.0], 1e-9));
        assert!((m.objective - 1330.0).abs() < 1e-9);
    }

    #[test]
    fn single_bus_marginal_unit_sets_price() {
        let m = solve_clear(&single_bus()).unwrap();
        assert!((m.dispatch.generators[0][0] - 50.0).abs() < 1e-9);
        assert!((m.lmp[0] - 10.0).abs() < 1e-9);
        assert!(m.flows.is_empty());
    }

    #[test]
    fn uncongested_prices_are_uniform() {
        let mut sys = three_bus();
        sys.lines[0].capacity = 10_000.0;
        sys.lines[2].capacity = 10_000.0;
        let m = solve_clear(&sys).unwrap();
        assert!(m.lmp.iter().all(|p| (p - m.lmp[0]).abs() < 1e-9));
    }

    #[test]
    fn flows_from_angles() {
        let sys = three_bus();
        assert_eq!(line_flows(&sys, &[-1.0, -10.0]).unwrap(), vec![10.0, 90.0, 100.0]);
        assert_eq!(line_flows(&sys, &[0.0, 0.0]).unwrap(), vec![0.0; 3]);
        let mut one = sys.clone();
        one.lines.truncate(1);
        assert_eq!(line_flows(&one, &[-1.0, 0.0]).unwrap(), vec![10.0]);
        assert!(matches!(
            line_flows(&sys, &[0.0]),
            Err(EdError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn welfare_is_linear_in_prices() {
        let sys = three_bus();
        let m = solve_clear(&sys).unwrap();
        assert!((social_welfare(&sys, &m.dispatch).unwrap() - 1330.0).abs() < 1e-9);
        assert_eq!(social_welfare(&sys, &Dispatch::zeros(&sys)).unwrap(), 0.0);
        let mut doubled = sys.clone();
        for s in doubled
            .generators
            .iter_mut()
            .flat_map(|g| g.segments.iter_mut())
            .chain(doubled.loads.iter_mut().flat_map(|l| l.segments.iter_mut()))
        {
            s.price *= 2.0;
        }
        let w = social_welfare(&doubled, &m.dispatch).unwrap();
        assert!((w - 2660.0).abs() < 1e-9);
        let mut short = m.dispatch.clone();
        short.loads[0].pop();
        assert!(social_welfare(&sys, &short).is_err());
    }

    #[test]
    fn infeasibility_names_family() {
        let mut sys = three_bus();
        sys.loads[0].segments[0].min = 600.0;
        sys.loads[0].segments[0].max = 600.0;
        match solve_clear(&sys) {
            Err(EdError::Infeasible { family }) => assert_eq!(family, "load segment minimum"),
            other => panic!("unexpected {other:?}"),
        }
        let mut tight = three_bus();
        for l in &mut tight.lines {
            l.capacity = 1.0;
        }
        match solve_clear(&tight) {
            Err(EdError::Infeasible { family }) => assert_eq!(family, "line capacity"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn energy_balances_each_hour() {
        let mut sys = three_bus();
        sys.horizon = 3;
        let m = solve_clear(&sys).unwrap();
        for t in 0..3 {
            let g: f64 = (0..2).map(|i| m.dispatch.generator_total(i, t)).sum();
            let d = m.dispatch.load_total(0, t);
            assert!((g - d).abs() < 1e-9);
        }
    }
}
