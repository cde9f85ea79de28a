//! Oracles shared by the integration tests. None of them go through the
//! simplex solver or the block builder.

#![allow(dead_code)]

use maskdispatch::ed::MarketSystem;
use maskdispatch::lp::{LpProblem, Sense, SignClass};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result of brute-force vertex enumeration.
#[derive(Debug, Clone)]
pub struct VertexOutcome {
    pub objective: f64,
    /// Distinct optimal vertices.
    pub optimal: Vec<Vec<f64>>,
    pub feasible_vertices: usize,
}

impl VertexOutcome {
    pub fn unique(&self) -> bool {
        self.optimal.len() == 1
    }
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Enumerates every basic solution of a bounded LP: all equalities plus
/// every choice of `n - m_eq` tight rows among the inequalities and sign
/// constraints. Returns `None` when no feasible vertex exists.
pub fn vertex_oracle(p: &LpProblem) -> Option<VertexOutcome> {
    let n = p.num_vars();
    let mut ineq: Vec<(Vec<f64>, f64)> = (0..p.num_in())
        .map(|i| (p.a_in.row(i).iter().copied().collect(), p.b_in[i]))
        .collect();
    for (j, s) in p.sign.iter().enumerate() {
        if *s == SignClass::NonNegative {
            let mut row = vec![0.0; n];
            row[j] = -1.0;
            ineq.push((row, 0.0));
        }
    }
    let m_eq = p.num_eq();
    if m_eq > n {
        return None;
    }
    let k = n - m_eq;
    if k > ineq.len() {
        return None;
    }
    let better = |a: f64, b: f64| match p.sense {
        Sense::Minimize => a < b,
        Sense::Maximize => a > b,
    };
    let scale = 1.0
        + p.b_in.iter().chain(&p.b_eq).fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-7 * scale;
    let mut best: Option<f64> = None;
    let mut optimal: Vec<Vec<f64>> = Vec::new();
    let mut feasible = 0;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for i in 0..m_eq {
            m.row_mut(i).copy_from(&p.a_eq.row(i));
            rhs[i] = p.b_eq[i];
        }
        for (r, &c) in idx.iter().enumerate() {
            for j in 0..n {
                m[(m_eq + r, j)] = ineq[c].0[j];
            }
            rhs[m_eq + r] = ineq[c].1;
        }
        let lu = m.clone().lu();
        let u_min = (0..n).map(|i| lu.u()[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if n == 0 || u_min > 1e-10 {
            if let Some(x) = lu.solve(&rhs) {
                let x: Vec<f64> = x.iter().copied().collect();
                let ok_in = ineq
                    .iter()
                    .all(|(a, b)| a.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>() <= b + tol);
                let ok_eq = (0..m_eq).all(|i| {
                    let ax: f64 = p.a_eq.row(i).iter().zip(&x).map(|(u, v)| u * v).sum();
                    (ax - p.b_eq[i]).abs() <= tol
                });
                if ok_in && ok_eq {
                    feasible += 1;
                    let obj = p.objective_at(&x);
                    let otol = 1e-7 * (1.0 + obj.abs());
                    match best {
                        Some(b) if (obj - b).abs() <= otol => {
                            if !optimal.iter().any(|v| max_abs_diff(v, &x) < 1e-6 * scale) {
                                optimal.push(x);
                            }
                        }
                        Some(b) if !better(obj, b) => {}
                        _ => {
                            best = Some(obj);
                            optimal = vec![x];
                        }
                    }
                }
            }
        }
        if k == 0 || !next_combination(&mut idx, ineq.len()) {
            break;
        }
    }
    best.map(|objective| VertexOutcome {
        objective,
        optimal,
        feasible_vertices: feasible,
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Random LP with the two-entity-local plus one-shared row pattern:
/// `min cᵀx`, rows 0–1 touch x0..2, rows 2–3 touch x2..4, rows 4–5 touch
/// every variable, `x >= 0`. Positive coefficients keep it bounded.
pub fn random_partitioned_lp(seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::<f64>::zeros(6, 6);
    for (rows, cols) in [(0..2, 0..2), (2..4, 2..4), (4..6, 0..6)] {
        for i in rows.clone() {
            for j in cols.clone() {
                a[(i, j)] = rng.gen_range(0.1..1.0);
            }
        }
    }
    let b: Vec<f64> = (0..6).map(|_| rng.gen_range(1.0..10.0)).collect();
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..0.2)).collect();
    LpProblem::new(Sense::Minimize, c)
        .with_inequalities(a, b)
        .with_signs(vec![SignClass::NonNegative; 6])
}

/// Random bounded LP with up to 6 variables, mixed sign classes and an
/// optional equality row.
pub fn random_small_lp(seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=5);
    let mut rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-3i32..=3) as f64).collect())
        .collect();
    let mut b: Vec<f64> = (0..m).map(|_| rng.gen_range(0i32..=8) as f64).collect();
    // A box keeps every instance bounded.
    for j in 0..n {
        let mut up = vec![0.0; n];
        up[j] = 1.0;
        rows.push(up);
        b.push(rng.gen_range(1i32..=6) as f64);
        let mut lo = vec![0.0; n];
        lo[j] = -1.0;
        rows.push(lo);
        b.push(rng.gen_range(0i32..=6) as f64);
    }
    let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-4i32..=4) as f64).collect();
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let signs = (0..n)
        .map(|_| if rng.gen_bool(0.5) { SignClass::Free } else { SignClass::NonNegative })
        .collect();
    let mut lp = LpProblem::new(sense, c).with_inequalities(a, b).with_signs(signs);
    if rng.gen_bool(0.3) {
        // An equality through the origin keeps the box point feasible.
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
        if row.iter().any(|v| *v != 0.0) {
            lp = lp.with_equalities(DMatrix::from_row_slice(1, n, &row), vec![0.0]);
        }
    }
    lp
}

/// The dispatch program written one scalar at a time, independently of the
/// block builder. Variables: per generator, per hour, per segment; then per
/// load likewise; then every bus angle, with an explicit row fixing the
/// reference angle. Balance rows come last among the equalities, hour-major.
pub struct ScalarEd {
    pub lp: LpProblem,
    pub gen_offset: Vec<usize>,
    pub load_offset: Vec<usize>,
    pub angle_offset: usize,
    pub balance_rows: std::ops::Range<usize>,
}

pub fn scalar_ed(system: &MarketSystem) -> ScalarEd {
    let t = system.horizon;
    let nb = system.buses.len();
    let mut n = 0;
    let mut gen_offset = Vec::new();
    for g in &system.generators {
        gen_offset.push(n);
        n += t * g.segments.len();
    }
    let mut load_offset = Vec::new();
    for l in &system.loads {
        load_offset.push(n);
        n += t * l.segments.len();
    }
    let angle_offset = n;
    n += t * nb;
    let bus = |id: u32| system.buses.iter().position(|b| b.id == id).unwrap();
    let theta = |h: usize, b: usize| angle_offset + h * nb + b;

    let mut cost = vec![0.0; n];
    let mut ineq: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for (gi, g) in system.generators.iter().enumerate() {
        let ns = g.segments.len();
        for h in 0..t {
            for (k, s) in g.segments.iter().enumerate() {
                let v = gen_offset[gi] + h * ns + k;
                cost[v] = -s.price;
                ineq.push((vec![(v, 1.0)], s.max));
                ineq.push((vec![(v, -1.0)], -s.min));
            }
        }
        for h in 1..t {
            let mut delta = Vec::new();
            for k in 0..ns {
                delta.push((gen_offset[gi] + h * ns + k, 1.0));
                delta.push((gen_offset[gi] + (h - 1) * ns + k, -1.0));
            }
            if let Some(up) = g.ramp_up {
                ineq.push((delta.clone(), up));
            }
            if let Some(dn) = g.ramp_down {
                ineq.push((delta.iter().map(|(v, c)| (*v, -c)).collect(), dn));
            }
        }
    }
    for (li, l) in system.loads.iter().enumerate() {
        let ns = l.segments.len();
        for h in 0..t {
            for (k, s) in l.segments.iter().enumerate() {
                let v = load_offset[li] + h * ns + k;
                cost[v] = s.price;
                ineq.push((vec![(v, 1.0)], s.max));
                ineq.push((vec![(v, -1.0)], -s.min));
            }
        }
    }
    for h in 0..t {
        for line in &system.lines {
            let (a, b) = (bus(line.from), bus(line.to));
            let f = vec![(theta(h, a), 1.0 / line.reactance), (theta(h, b), -1.0 / line.reactance)];
            ineq.push((f.clone(), line.capacity));
            ineq.push((f.iter().map(|(v, c)| (*v, -c)).collect(), line.capacity));
        }
    }

    let mut eq: Vec<Vec<(usize, f64)>> = Vec::new();
    let r = bus(system.reference_bus);
    for h in 0..t {
        eq.push(vec![(theta(h, r), 1.0)]);
    }
    let balance_start = eq.len();
    for h in 0..t {
        for b in 0..nb {
            let mut row = Vec::new();
            for (gi, g) in system.generators.iter().enumerate() {
                if bus(g.bus) == b {
                    let ns = g.segments.len();
                    row.extend((0..ns).map(|k| (gen_offset[gi] + h * ns + k, 1.0)));
                }
            }
            for (li, l) in system.loads.iter().enumerate() {
                if bus(l.bus) == b {
                    let ns = l.segments.len();
                    row.extend((0..ns).map(|k| (load_offset[li] + h * ns + k, -1.0)));
                }
            }
            // Minus the flow leaving the bus.
            for line in &system.lines {
                let (fa, fb) = (bus(line.from), bus(line.to));
                let y = 1.0 / line.reactance;
                if fa == b {
                    row.push((theta(h, fa), -y));
                    row.push((theta(h, fb), y));
                } else if fb == b {
                    row.push((theta(h, fb), -y));
                    row.push((theta(h, fa), y));
                }
            }
            eq.push(row);
        }
    }
    let dense = |rows: &[Vec<(usize, f64)>]| {
        let mut m = DMatrix::<f64>::zeros(rows.len(), n);
        for (i, r) in rows.iter().enumerate() {
            for (j, c) in r {
                m[(i, *j)] += c;
            }
        }
        m
    };
    let in_rows: Vec<Vec<(usize, f64)>> = ineq.iter().map(|(r, _)| r.clone()).collect();
    let b_in: Vec<f64> = ineq.iter().map(|(_, b)| *b).collect();
    let m_eq = eq.len();
    let lp = LpProblem::new(Sense::Maximize, cost)
        .with_inequalities(dense(&in_rows), b_in)
        .with_equalities(dense(&eq), vec![0.0; m_eq]);
    ScalarEd {
        lp,
        gen_offset,
        load_offset,
        angle_offset,
        balance_rows: balance_start..m_eq,
    }
}

impl ScalarEd {
    /// Maps a point of the block-built program (entity columns, then
    /// reduced angles) into this program's variable order.
    pub fn from_block_point(
        &self,
        system: &MarketSystem,
        gencos: &[Vec<f64>],
        lses: &[Vec<f64>],
        reduced_angles: &[f64],
    ) -> Vec<f64> {
        let blocks = maskdispatch::ed::build_ed_blocks(system).unwrap();
        let d = maskdispatch::ed::Dispatch::from_entity_vectors(system, &blocks, gencos, lses);
        let mut x = vec![0.0; self.lp.num_vars()];
        for (g, v) in d.generators.iter().enumerate() {
            x[self.gen_offset[g]..self.gen_offset[g] + v.len()].copy_from_slice(v);
        }
        for (l, v) in d.loads.iter().enumerate() {
            x[self.load_offset[l]..self.load_offset[l] + v.len()].copy_from_slice(v);
        }
        let nb = system.buses.len();
        let na = blocks.iso.angle_buses.len();
        for h in 0..system.horizon {
            for (c, &b) in blocks.iso.angle_buses.iter().enumerate() {
                x[self.angle_offset + h * nb + b] = reduced_angles[h * na + c];
            }
        }
        x
    }

    /// Places a cleared market (per-asset dispatch, every bus angle) into
    /// this program's variable order.
    pub fn from_market(&self, system: &MarketSystem, m: &maskdispatch::ed::ClearedMarket) -> Vec<f64> {
        let mut x = vec![0.0; self.lp.num_vars()];
        for (g, v) in m.dispatch.generators.iter().enumerate() {
            x[self.gen_offset[g]..self.gen_offset[g] + v.len()].copy_from_slice(v);
        }
        for (l, v) in m.dispatch.loads.iter().enumerate() {
            x[self.load_offset[l]..self.load_offset[l] + v.len()].copy_from_slice(v);
        }
        let nb = system.buses.len();
        x[self.angle_offset..self.angle_offset + system.horizon * nb].copy_from_slice(&m.angles);
        x
    }
}

/// Random square key with entries on `range`, resampled until well conditioned.
pub fn random_key(rng: &mut ChaCha8Rng, n: usize, range: (f64, f64)) -> DMatrix<f64> {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(range.0..range.1));
        if maskdispatch::privacy::condition_number(&m) < 1e3 {
            return m;
        }
    }
}

/// Outcome of masking one random partitioned program.
pub struct TransformTrial {
    pub direct: f64,
    pub masked: f64,
    /// Objective of the recovered point in the input program.
    pub recovered: f64,
    pub recovered_feasible: bool,
}

impl TransformTrial {
    pub fn error(&self) -> f64 {
        (self.direct - self.masked).abs().max((self.direct - self.recovered).abs())
    }
}

/// Column masking with one positive key per owner block `0..2, 2..4, 4..6`.
pub fn vertical_trial(seed: u64) -> TransformTrial {
    use maskdispatch::lp::{check_point, solve_lp, SolverConfig};
    let lp = random_partitioned_lp(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let ys: Vec<_> = (0..3).map(|_| random_key(&mut rng, 2, (0.01, 1.0))).collect();
    let v = maskdispatch::privacy::vertical_mask_generic(&lp, &[0..2, 2..4, 4..6], &ys).unwrap();
    let cfg = SolverConfig::default();
    let direct = solve_lp(&lp, &cfg).unwrap();
    let masked = solve_lp(&v.lp, &cfg).unwrap();
    let x = v.recover(&masked.x);
    TransformTrial {
        direct: direct.objective,
        masked: masked.objective,
        recovered: lp.objective_at(&x),
        recovered_feasible: check_point(&lp, &x, 1e-8).unwrap().feasible,
    }
}

/// Row masking with groups `{0,1}, {2,3}, {4,5}`, signed `X` and positive `R`.
pub fn horizontal_trial(seed: u64) -> TransformTrial {
    use maskdispatch::lp::{check_point, solve_lp, SolverConfig};
    use maskdispatch::privacy::{horizontal_mask_generic, RowGroup};
    let lp = random_partitioned_lp(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xface);
    let groups: Vec<RowGroup> = (0..3)
        .map(|g| RowGroup {
            rows: vec![2 * g, 2 * g + 1],
            x: random_key(&mut rng, 2, (-1.0, 1.0)),
            r: (0..2).map(|_| rng.gen_range(0.5..2.0)).collect(),
        })
        .collect();
    let h = horizontal_mask_generic(&lp, &groups).unwrap();
    let cfg = SolverConfig::default();
    let direct = solve_lp(&lp, &cfg).unwrap();
    let masked = solve_lp(&h.lp, &cfg).unwrap();
    let x = h.recover(&masked.x);
    TransformTrial {
        direct: direct.objective,
        masked: masked.objective,
        recovered: lp.objective_at(&x),
        recovered_feasible: check_point(&lp, &x, 1e-8).unwrap().feasible,
    }
}

/// Identity keys must hand back the input program unchanged (vertical) or its
/// plain slack form (horizontal).
pub fn identity_transforms_are_exact(seed: u64) -> bool {
    use maskdispatch::privacy::{horizontal_mask_generic, vertical_mask_generic, RowGroup};
    let lp = random_partitioned_lp(seed);
    let ident = DMatrix::<f64>::identity(2, 2);
    let v = vertical_mask_generic(&lp, &[0..2, 2..4, 4..6], &[ident.clone(), ident.clone(), ident]).unwrap();
    let groups: Vec<RowGroup> = (0..3)
        .map(|g| RowGroup {
            rows: vec![2 * g, 2 * g + 1],
            x: DMatrix::identity(2, 2),
            r: vec![1.0; 2],
        })
        .collect();
    let h = horizontal_mask_generic(&lp, &groups).unwrap();
    let mut slack_form = DMatrix::<f64>::zeros(6, 12);
    slack_form.view_mut((0, 0), (6, 6)).copy_from(&lp.a_in);
    slack_form.view_mut((0, 6), (6, 6)).fill_with_identity();
    v.lp == lp && h.lp.a_eq == slack_form && h.lp.b_eq == lp.b_in && h.lp.cost[..6] == lp.cost[..] && h.lp.num_in() == 0
}

/// Masked round against a clear reference on one seed.
pub struct RoundCheck {
    pub objective_rel: f64,
    pub dispatch_diff: f64,
    pub angle_diff: f64,
    pub lmp_diff: f64,
    /// Worst row violation of the recovered point in the scalar program.
    pub violation: f64,
    pub feasible: bool,
    pub recovered_objective_rel: f64,
}

pub fn round_check(
    system: &MarketSystem,
    clear: &maskdispatch::ed::ClearedMarket,
    scalar: &ScalarEd,
    seed: u64,
) -> RoundCheck {
    use maskdispatch::protocol::{run_market_round, Mode};
    let (m, _) = run_market_round(system, seed, Mode::Masked).unwrap();
    let x = scalar.from_market(system, &m);
    let rep = maskdispatch::lp::check_point(&scalar.lp, &x, 1e-6).unwrap();
    let scale = 1.0 + clear.objective.abs();
    RoundCheck {
        objective_rel: (m.objective - clear.objective).abs() / scale,
        dispatch_diff: clear.dispatch.max_abs_diff(&m.dispatch),
        angle_diff: clear.max_angle_diff(&m),
        lmp_diff: clear.max_lmp_diff(&m),
        violation: rep.max_eq_residual.max(rep.max_in_violation),
        feasible: rep.feasible,
        recovered_objective_rel: (rep.objective - clear.objective).abs() / scale,
    }
}

/// Unmasked rows the scan must never find: entity constraint rows, limits and
/// prices; network admittance rows, flow rows and capacities.
pub fn private_rows(blocks: &maskdispatch::ed::EdBlocks) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for e in blocks.gencos.iter().chain(&blocks.lses) {
        for i in 0..e.constraints.nrows() {
            out.push(e.constraints.row(i).iter().copied().collect());
        }
        out.push(e.rhs.clone());
        out.push(e.price.clone());
    }
    for m in [&blocks.iso.admittance, &blocks.iso.flow] {
        for i in 0..m.nrows() {
            out.push(m.row(i).iter().copied().collect());
        }
    }
    out.push(blocks.iso.capacity.clone());
    out.retain(|r| r.iter().any(|v| *v != 0.0));
    out
}

pub fn contains_run(hay: &[f64], needle: &[f64]) -> bool {
    needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Looks for any private row as a contiguous run in a block read row by row
/// or column by column.
pub fn leaked(log: &maskdispatch::protocol::CommLog, blocks: &maskdispatch::ed::EdBlocks) -> Option<String> {
    let private = private_rows(blocks);
    for m in &log.messages {
        let maskdispatch::protocol::Payload::Encrypted(sub) = &m.payload else {
            if matches!(m.payload, maskdispatch::protocol::Payload::ClearBid(_) | maskdispatch::protocol::Payload::ClearNetwork(_)) {
                return Some(format!("{} sent raw data", m.sender));
            }
            continue;
        };
        for (name, b) in sub.blocks() {
            let by_col: Vec<f64> = b.iter().copied().collect();
            let by_row: Vec<f64> = b.transpose().iter().copied().collect();
            if private.iter().any(|p| contains_run(&by_col, p) || contains_run(&by_row, p)) {
                return Some(format!("{} {name}", m.sender));
            }
        }
    }
    None
}
