use std::collections::VecDeque;
use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{EdError, MarketSystem, Segment};
use crate::lp::{LpProblem, LpShape, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Genco,
    Lse,
}

/// Constraint family of a row of the ED program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    SegmentMax,
    SegmentMin,
    RampUp,
    RampDown,
    LineForward,
    LineReverse,
    Balance,
}

impl Family {
    pub fn describe(self, kind: Option<EntityKind>) -> &'static str {
        match (self, kind) {
            (Family::SegmentMax, Some(EntityKind::Lse)) => "load segment maximum",
            (Family::SegmentMin, Some(EntityKind::Lse)) => "load segment minimum",
            (Family::SegmentMax, _) => "generator segment maximum",
            (Family::SegmentMin, _) => "generator segment minimum",
            (Family::RampUp, _) => "ramp-up limit",
            (Family::RampDown, _) => "ramp-down limit",
            (Family::LineForward, _) | (Family::LineReverse, _) => "line capacity",
            (Family::Balance, _) => "nodal balance",
        }
    }
}

/// Position of one decision variable of an entity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarIndex {
    /// Index into `MarketSystem::generators` or `MarketSystem::loads`.
    pub asset: usize,
    pub hour: usize,
    pub segment: usize,
}

/// Everything one GENCO or LSE knows about its own assets, in matrix form.
#[derive(Clone, Debug, PartialEq)]
pub struct EntityBlock {
    pub owner: String,
    pub kind: EntityKind,
    pub assets: Vec<usize>,
    pub vars: Vec<VarIndex>,
    /// Offer price `c_i` or bid price `d_j` per variable, $/MWh.
    pub price: Vec<f64>,
    /// `E_i` or `F_j`, `m × n`.
    pub constraints: DMatrix<f64>,
    /// `M_i` or `N_j`.
    pub rhs: Vec<f64>,
    /// `KP_i` or `KD_j`, `T·B × n`.
    pub incidence: DMatrix<f64>,
    pub row_family: Vec<Family>,
    pub row_labels: Vec<String>,
}

impl EntityBlock {
    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Signed objective row for a maximization: `−c_i` or `d_j`.
    pub fn welfare_row(&self) -> Vec<f64> {
        let s = match self.kind {
            EntityKind::Genco => -1.0,
            EntityKind::Lse => 1.0,
        };
        self.price.iter().map(|p| s * p).collect()
    }

    /// Sign of this entity's incidence in the balance rows.
    pub fn balance_sign(&self) -> f64 {
        match self.kind {
            EntityKind::Genco => 1.0,
            EntityKind::Lse => -1.0,
        }
    }
}

/// Network data private to the ISO.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoBlock {
    /// `G·KL`, `T·L × T·(B−1)`.
    pub flow: DMatrix<f64>,
    /// Nodal admittance with the reference column removed, `T·B × T·(B−1)`.
    pub admittance: DMatrix<f64>,
    /// `P̄L`, `T·L`.
    pub capacity: Vec<f64>,
    /// Bus indices carrying an angle variable, in column order within each hour.
    pub angle_buses: Vec<usize>,
}

impl IsoBlock {
    pub fn num_angles(&self) -> usize {
        self.admittance.ncols()
    }

    pub fn num_line_rows(&self) -> usize {
        self.capacity.len()
    }

    pub fn num_balance_rows(&self) -> usize {
        self.admittance.nrows()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdBlocks {
    pub horizon: usize,
    pub num_buses: usize,
    pub num_lines: usize,
    pub reference: usize,
    pub gencos: Vec<EntityBlock>,
    pub lses: Vec<EntityBlock>,
    pub iso: IsoBlock,
}

/// Column and row spans of the assembled ED program.
///
/// Columns are ordered `P_1 … P_G | D_1 … D_L | θ`; inequality rows are
/// ordered `E_1 … E_G | F_1 … F_L | +G·KL | −G·KL`; equality rows are the
/// `T·B` balance rows.
#[derive(Clone, Debug, PartialEq)]
pub struct EdLayout {
    pub genco_cols: Vec<Range<usize>>,
    pub lse_cols: Vec<Range<usize>>,
    pub angle_cols: Range<usize>,
    pub genco_rows: Vec<Range<usize>>,
    pub lse_rows: Vec<Range<usize>>,
    pub line_forward_rows: Range<usize>,
    pub line_reverse_rows: Range<usize>,
    /// Family and owning entity kind of each inequality row.
    pub in_families: Vec<(Family, Option<EntityKind>)>,
}

fn spans(sizes: impl Iterator<Item = usize>, start: &mut usize) -> Vec<Range<usize>> {
    sizes
        .map(|s| {
            let r = *start..*start + s;
            *start += s;
            r
        })
        .collect()
}

impl EdBlocks {
    pub fn entities(&self) -> impl Iterator<Item = &EntityBlock> {
        self.gencos.iter().chain(&self.lses)
    }

    pub fn num_structural(&self) -> usize {
        self.entities().map(|e| e.num_vars()).sum::<usize>() + self.iso.num_angles()
    }

    pub fn num_entity_rows(&self) -> usize {
        self.entities().map(|e| e.num_rows()).sum()
    }

    /// Inequality rows of the original program; slack columns after masking.
    pub fn num_inequalities(&self) -> usize {
        self.num_entity_rows() + 2 * self.iso.num_line_rows()
    }

    /// Size of `to_lp` without building it.
    pub fn lp_shape(&self) -> LpShape {
        let negative = |v: &[f64]| v.iter().filter(|b| **b < 0.0).count();
        LpShape {
            nonneg_vars: 0,
            free_vars: self.num_structural(),
            eq_rows: self.iso.num_balance_rows(),
            in_rows: self.num_inequalities(),
            // Capacities bound both flow directions.
            negative_in_rows: self.entities().map(|e| negative(&e.rhs)).sum::<usize>()
                + 2 * negative(&self.iso.capacity),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.num_inequalities() + self.iso.num_balance_rows()
    }

    pub fn layout(&self) -> EdLayout {
        let mut col = 0;
        let genco_cols = spans(self.gencos.iter().map(|e| e.num_vars()), &mut col);
        let lse_cols = spans(self.lses.iter().map(|e| e.num_vars()), &mut col);
        let angle_cols = col..col + self.iso.num_angles();
        let mut row = 0;
        let genco_rows = spans(self.gencos.iter().map(|e| e.num_rows()), &mut row);
        let lse_rows = spans(self.lses.iter().map(|e| e.num_rows()), &mut row);
        let tl = self.iso.num_line_rows();
        let line_forward_rows = row..row + tl;
        let line_reverse_rows = row + tl..row + 2 * tl;
        let mut in_families = Vec::new();
        for e in self.entities() {
            in_families.extend(e.row_family.iter().map(|f| (*f, Some(e.kind))));
        }
        in_families.extend(std::iter::repeat_n((Family::LineForward, None), tl));
        in_families.extend(std::iter::repeat_n((Family::LineReverse, None), tl));
        EdLayout {
            genco_cols,
            lse_cols,
            angle_cols,
            genco_rows,
            lse_rows,
            line_forward_rows,
            line_reverse_rows,
            in_families,
        }
    }

    /// The welfare-maximizing ED program with every variable free.
    pub fn to_lp(&self, system: &MarketSystem) -> LpProblem {
        self.to_lp_without(system, &[])
    }

    /// As `to_lp`, dropping inequality rows of the listed families.
    pub fn to_lp_without(
        &self,
        system: &MarketSystem,
        drop: &[(Family, Option<EntityKind>)],
    ) -> LpProblem {
        let layout = self.layout();
        let n = self.num_structural();
        let mut cost = vec![0.0; n];
        for (e, cols) in self
            .gencos
            .iter()
            .zip(&layout.genco_cols)
            .chain(self.lses.iter().zip(&layout.lse_cols))
        {
            cost[cols.clone()].copy_from_slice(&e.welfare_row());
        }

        let keep: Vec<usize> = (0..self.num_inequalities())
            .filter(|r| !drop.contains(&layout.in_families[*r]))
            .collect();
        let mut a_full = DMatrix::<f64>::zeros(self.num_inequalities(), n);
        let mut b_full = vec![0.0; self.num_inequalities()];
        let mut labels_full = Vec::with_capacity(self.num_inequalities());
        for (e, (cols, rows)) in self.gencos.iter().zip(layout.genco_cols.iter().zip(&layout.genco_rows)).chain(
            self.lses
                .iter()
                .zip(layout.lse_cols.iter().zip(&layout.lse_rows)),
        ) {
            a_full
                .view_mut((rows.start, cols.start), (rows.len(), cols.len()))
                .copy_from(&e.constraints);
            b_full[rows.clone()].copy_from_slice(&e.rhs);
            labels_full.extend(e.row_labels.iter().cloned());
        }
        let ac = layout.angle_cols.clone();
        let tl = self.iso.num_line_rows();
        let fwd = layout.line_forward_rows.clone();
        let rev = layout.line_reverse_rows.clone();
        a_full
            .view_mut((fwd.start, ac.start), (tl, ac.len()))
            .copy_from(&self.iso.flow);
        a_full
            .view_mut((rev.start, ac.start), (tl, ac.len()))
            .copy_from(&(-&self.iso.flow));
        b_full[fwd.clone()].copy_from_slice(&self.iso.capacity);
        b_full[rev.clone()].copy_from_slice(&self.iso.capacity);
        for dir in ["forward", "reverse"] {
            for t in 0..self.horizon {
                for l in 0..self.num_lines {
                    labels_full.push(format!("line {} t{} {dir} capacity", l + 1, t + 1));
                }
            }
        }

        let a_in = a_full.select_rows(keep.iter());
        let b_in: Vec<f64> = keep.iter().map(|r| b_full[*r]).collect();
        let in_labels: Vec<String> = keep.iter().map(|r| labels_full[*r].clone()).collect();

        let tb = self.iso.num_balance_rows();
        let mut a_eq = DMatrix::<f64>::zeros(tb, n);
        for (e, cols) in self
            .gencos
            .iter()
            .zip(&layout.genco_cols)
            .chain(self.lses.iter().zip(&layout.lse_cols))
        {
            a_eq.view_mut((0, cols.start), (tb, cols.len()))
                .copy_from(&(&e.incidence * e.balance_sign()));
        }
        a_eq.view_mut((0, ac.start), (tb, ac.len()))
            .copy_from(&(-&self.iso.admittance));
        let eq_labels = (0..self.horizon)
            .flat_map(|t| {
                system
                    .buses
                    .iter()
                    .map(move |b| format!("bus {} t{} balance", b.id, t + 1))
            })
            .collect();

        let mut var_labels = Vec::with_capacity(n);
        for e in self.entities() {
            for v in &e.vars {
                let id = match e.kind {
                    EntityKind::Genco => &system.generators[v.asset].id,
                    EntityKind::Lse => &system.loads[v.asset].id,
                };
                var_labels.push(format!("{id} t{} s{}", v.hour + 1, v.segment + 1));
            }
        }
        for t in 0..self.horizon {
            for b in &self.iso.angle_buses {
                var_labels.push(format!("theta bus {} t{}", system.buses[*b].id, t + 1));
            }
        }

        let mut lp = LpProblem::new(Sense::Maximize, cost)
            .with_inequalities(a_in, b_in)
            .with_equalities(a_eq, vec![0.0; tb]);
        lp.var_labels = Some(var_labels);
        lp.in_labels = Some(in_labels);
        lp.eq_labels = Some(eq_labels);
        lp
    }
}

fn check_connected(system: &MarketSystem) -> Result<(), EdError> {
    let nb = system.num_buses();
    let mut adj = vec![Vec::new(); nb];
    for line in &system.lines {
        let a = system.bus_index(line.from).unwrap();
        let b = system.bus_index(line.to).unwrap();
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; nb];
    let start = system.reference_index();
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    let islanded: Vec<u32> = (0..nb)
        .filter(|b| !seen[*b])
        .map(|b| system.buses[b].id)
        .collect();
    if islanded.is_empty() {
        Ok(())
    } else {
        Err(EdError::IslandedNetwork(islanded))
    }
}

struct AssetView<'a> {
    id: &'a str,
    bus: usize,
    segments: &'a [Segment],
    ramp: (Option<f64>, Option<f64>),
}

fn entity_block(
    owner: &str,
    kind: EntityKind,
    assets: Vec<usize>,
    views: &[AssetView<'_>],
    horizon: usize,
    num_buses: usize,
) -> EntityBlock {
    let mut vars = Vec::new();
    for t in 0..horizon {
        for (local, &a) in assets.iter().enumerate() {
            for k in 0..views[local].segments.len() {
                vars.push(VarIndex {
                    asset: a,
                    hour: t,
                    segment: k,
                });
            }
        }
    }
    let n = vars.len();
    let local_of = |asset: usize| assets.iter().position(|a| *a == asset).unwrap();
    let price: Vec<f64> = vars
        .iter()
        .map(|v| views[local_of(v.asset)].segments[v.segment].price)
        .collect();

    let mut rows: Vec<(Vec<f64>, f64, Family, String)> = Vec::new();
    for (j, v) in vars.iter().enumerate() {
        let view = &views[local_of(v.asset)];
        let seg = view.segments[v.segment];
        let tag = format!("{} t{} s{}", view.id, v.hour + 1, v.segment + 1);
        let mut upper = vec![0.0; n];
        upper[j] = 1.0;
        rows.push((upper, seg.max, Family::SegmentMax, format!("{tag} max")));
        let mut lower = vec![0.0; n];
        lower[j] = -1.0;
        rows.push((lower, 0.0 - seg.min, Family::SegmentMin, format!("{tag} min")));
    }
    for t in 1..horizon {
        for (local, &a) in assets.iter().enumerate() {
            let view = &views[local];
            let mut delta = vec![0.0; n];
            for (j, v) in vars.iter().enumerate() {
                if v.asset == a && v.hour == t {
                    delta[j] = 1.0;
                } else if v.asset == a && v.hour == t - 1 {
                    delta[j] = -1.0;
                }
            }
            if let Some(up) = view.ramp.0 {
                rows.push((
                    delta.clone(),
                    up,
                    Family::RampUp,
                    format!("{} t{} ramp up", view.id, t + 1),
                ));
            }
            if let Some(dn) = view.ramp.1 {
                let neg = delta.iter().map(|d| -d).collect();
                rows.push((
                    neg,
                    dn,
                    Family::RampDown,
                    format!("{} t{} ramp down", view.id, t + 1),
                ));
            }
        }
    }

    let m = rows.len();
    let mut constraints = DMatrix::<f64>::zeros(m, n);
    let mut rhs = Vec::with_capacity(m);
    let mut row_family = Vec::with_capacity(m);
    let mut row_labels = Vec::with_capacity(m);
    for (r, (coef, b, fam, label)) in rows.into_iter().enumerate() {
        for (j, c) in coef.into_iter().enumerate() {
            constraints[(r, j)] = c;
        }
        rhs.push(b);
        row_family.push(fam);
        row_labels.push(label);
    }

    let mut incidence = DMatrix::<f64>::zeros(horizon * num_buses, n);
    for (j, v) in vars.iter().enumerate() {
        incidence[(v.hour * num_buses + views[local_of(v.asset)].bus, j)] = 1.0;
    }

    EntityBlock {
        owner: owner.to_string(),
        kind,
        assets,
        vars,
        price,
        constraints,
        rhs,
        incidence,
        row_family,
        row_labels,
    }
}

/// Splits the ED program into per-entity and ISO-owned blocks.
pub fn build_ed_blocks(system: &MarketSystem) -> Result<EdBlocks, EdError> {
    system.validate()?;
    if system.generators.is_empty() || system.loads.is_empty() {
        return Err(EdError::EmptyMarket);
    }
    check_connected(system)?;
    let t_len = system.horizon;
    let nb = system.num_buses();
    let nl = system.lines.len();
    let reference = system.reference_index();

    let gencos = system
        .gencos()
        .iter()
        .map(|owner| {
            let assets: Vec<usize> = system.generators_of(owner).collect();
            let views: Vec<AssetView> = assets
                .iter()
                .map(|&g| {
                    let gen = &system.generators[g];
                    AssetView {
                        id: &gen.id,
                        bus: system.bus_index(gen.bus).unwrap(),
                        segments: &gen.segments,
                        ramp: (gen.ramp_up, gen.ramp_down),
                    }
                })
                .collect();
            entity_block(owner, EntityKind::Genco, assets, &views, t_len, nb)
        })
        .collect();
    let lses = system
        .lses()
        .iter()
        .map(|owner| {
            let assets: Vec<usize> = system.loads_of(owner).collect();
            let views: Vec<AssetView> = assets
                .iter()
                .map(|&d| {
                    let load = &system.loads[d];
                    AssetView {
                        id: &load.id,
                        bus: system.bus_index(load.bus).unwrap(),
                        segments: &load.segments,
                        ramp: (None, None),
                    }
                })
                .collect();
            entity_block(owner, EntityKind::Lse, assets, &views, t_len, nb)
        })
        .collect();

    let angle_buses: Vec<usize> = (0..nb).filter(|b| *b != reference).collect();
    let na = angle_buses.len();
    let angle_col = |bus: usize| angle_buses.iter().position(|a| *a == bus);
    let mut flow = DMatrix::<f64>::zeros(t_len * nl, t_len * na);
    let mut admittance = DMatrix::<f64>::zeros(t_len * nb, t_len * na);
    let mut capacity = Vec::with_capacity(t_len * nl);
    for t in 0..t_len {
        for (l, line) in system.lines.iter().enumerate() {
            let a = system.bus_index(line.from).unwrap();
            let b = system.bus_index(line.to).unwrap();
            let g = 1.0 / line.reactance;
            if let Some(c) = angle_col(a) {
                flow[(t * nl + l, t * na + c)] += g;
            }
            if let Some(c) = angle_col(b) {
                flow[(t * nl + l, t * na + c)] -= g;
            }
            for (row, other) in [(a, b), (b, a)] {
                if let Some(c) = angle_col(row) {
                    admittance[(t * nb + row, t * na + c)] += g;
                }
                if let Some(c) = angle_col(other) {
                    admittance[(t * nb + row, t * na + c)] -= g;
                }
            }
        }
        capacity.extend(system.lines.iter().map(|l| l.capacity));
    }

    Ok(EdBlocks {
        horizon: t_len,
        num_buses: nb,
        num_lines: nl,
        reference,
        gencos,
        lses,
        iso: IsoBlock {
            flow,
            admittance,
            capacity,
            angle_buses,
        },
    })
}
