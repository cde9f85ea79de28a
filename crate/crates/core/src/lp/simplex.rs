//! Two-phase primal simplex on a dense row-major tableau.
//!
//! The problem is rewritten in standard form `min ĉᵀz, Âz = b̂, z >= 0, b̂ >= 0`:
//! free variables split into a difference of two non-negative columns,
//! inequality rows gain a slack column, and rows with negative right-hand side
//! are negated. Rows without a usable slack start on an artificial column.
//!
//! Once the optimal basis is known the primal and dual values are recomputed
//! from an LU factorization of the basis matrix, which removes the round-off
//! accumulated by the tableau updates.

use nalgebra::{DMatrix, DVector};

use super::{Certificate, LpError, LpProblem, LpSolution, LpStatus, Sense, SignClass};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Absolute primal feasibility tolerance.
    pub feas_tol: f64,
    /// Duality gap and complementary slackness tolerance, scaled by `1 + |objective|`.
    pub gap_tol: f64,
    /// Smallest LU pivot, relative to the largest basis entry, before a
    /// basis counts as singular.
    pub pivot_tol: f64,
    /// Smallest tableau entry accepted as a pivot. Entries below it are
    /// treated as rounding noise.
    pub ratio_tol: f64,
    /// Reduced-cost threshold for an improving column.
    pub opt_tol: f64,
    pub max_iterations: usize,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub degenerate_threshold: usize,
    /// Pivots between refactorizations of the tableau from the original data.
    pub refactor_interval: usize,
    /// Upper bound on the number of tableau entries the solver will allocate.
    pub max_tableau_entries: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-6,
            gap_tol: 1e-6,
            pivot_tol: 1e-9,
            ratio_tol: 1e-7,
            opt_tol: 1e-9,
            max_iterations: 200_000,
            degenerate_threshold: 50,
            refactor_interval: 250,
            // 2^28 doubles = 2 GiB
            max_tableau_entries: 1 << 28,
        }
    }
}

/// Origin of a standard-form column.
#[derive(Clone, Copy, Debug)]
enum Column {
    Positive(usize),
    Negative(usize),
    Slack(usize),
}

struct StandardForm {
    rows: usize,
    cols: usize,
    /// `rows × cols`, row-major, rows already multiplied by `sign`.
    a: Vec<f64>,
    b: Vec<f64>,
    /// Minimization cost.
    c: Vec<f64>,
    sign: Vec<f64>,
    origin: Vec<Column>,
    /// Per row: structural column usable as the initial basic variable.
    unit_column: Vec<Option<usize>>,
    /// The other half of a split free variable.
    mirror: Vec<Option<usize>>,
}

impl StandardForm {
    fn build(p: &LpProblem) -> Self {
        let m_eq = p.num_eq();
        let m_in = p.num_in();
        let rows = m_eq + m_in;
        let flip = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };

        let mut origin = Vec::new();
        for (j, s) in p.sign.iter().enumerate() {
            origin.push(Column::Positive(j));
            if *s == SignClass::Free {
                origin.push(Column::Negative(j));
            }
        }
        for i in 0..m_in {
            origin.push(Column::Slack(i));
        }
        let cols = origin.len();

        let mut a = vec![0.0; rows * cols];
        let mut b = vec![0.0; rows];
        let mut sign = vec![1.0; rows];
        for r in 0..rows {
            let (src, rhs) = if r < m_eq {
                (&p.a_eq, p.b_eq[r])
            } else {
                (&p.a_in, p.b_in[r - m_eq])
            };
            let local = if r < m_eq { r } else { r - m_eq };
            let s = if rhs < 0.0 { -1.0 } else { 1.0 };
            sign[r] = s;
            b[r] = s * rhs;
            let row = &mut a[r * cols..(r + 1) * cols];
            for (k, col) in origin.iter().enumerate() {
                row[k] = match *col {
                    Column::Positive(j) => s * src[(local, j)],
                    Column::Negative(j) => -s * src[(local, j)],
                    Column::Slack(i) if r >= m_eq && i == local => s,
                    Column::Slack(_) => 0.0,
                };
            }
        }

        let c = origin
            .iter()
            .map(|col| match *col {
                Column::Positive(j) => flip * p.cost[j],
                Column::Negative(j) => -flip * p.cost[j],
                Column::Slack(_) => 0.0,
            })
            .collect();

        let unit_column = (0..rows)
            .map(|r| {
                if r < m_eq || sign[r] < 0.0 {
                    return None;
                }
                origin
                    .iter()
                    .position(|col| matches!(col, Column::Slack(i) if *i == r - m_eq))
            })
            .collect();

        let mirror = origin
            .iter()
            .enumerate()
            .map(|(k, col)| match *col {
                Column::Positive(j) if p.sign[j] == SignClass::Free => Some(k + 1),
                Column::Negative(_) => Some(k - 1),
                _ => None,
            })
            .collect();

        Self {
            mirror,
            rows,
            cols,
            a,
            b,
            c,
            sign,
            origin,
            unit_column,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Phase {
    One,
    Two,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

/// Tableau laid out per row as `[structural | rhs | artificial]`, with the
/// reduced-cost row stored last.
struct Tableau<'a> {
    sf: &'a StandardForm,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Row owning each artificial column.
    artificial_row: Vec<usize>,
    phase: Phase,
    iterations: usize,
    since_refactor: usize,
}

impl<'a> Tableau<'a> {
    fn new(sf: &'a StandardForm) -> Self {
        let artificial_row: Vec<usize> = (0..sf.rows)
            .filter(|&r| sf.unit_column[r].is_none())
            .collect();
        let width = sf.cols + 1 + artificial_row.len();
        let mut data = vec![0.0; (sf.rows + 1) * width];
        let mut basis = vec![0; sf.rows];
        let mut next_art = 0;
        for r in 0..sf.rows {
            let row = &mut data[r * width..(r + 1) * width];
            row[..sf.cols].copy_from_slice(&sf.a[r * sf.cols..(r + 1) * sf.cols]);
            row[sf.cols] = sf.b[r];
            match sf.unit_column[r] {
                Some(j) => basis[r] = j,
                None => {
                    row[sf.cols + 1 + next_art] = 1.0;
                    basis[r] = sf.cols + 1 + next_art;
                    next_art += 1;
                }
            }
        }
        let mut t = Self {
            sf,
            width,
            data,
            basis,
            artificial_row,
            phase: Phase::One,
            iterations: 0,
            since_refactor: 0,
        };
        t.reset_objective();
        t
    }

    fn rhs_col(&self) -> usize {
        self.sf.cols
    }

    fn is_artificial(&self, col: usize) -> bool {
        col > self.sf.cols
    }

    /// Columns touched by row operations in the current phase.
    fn active_width(&self) -> usize {
        match self.phase {
            Phase::One => self.width,
            Phase::Two => self.sf.cols + 1,
        }
    }

    fn cost(&self, col: usize) -> f64 {
        match self.phase {
            Phase::One => {
                if self.is_artificial(col) {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if col < self.sf.cols {
                    self.sf.c[col]
                } else {
                    0.0
                }
            }
        }
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn reset_objective(&mut self) {
        let m = self.sf.rows;
        let w = self.width;
        let active = self.active_width();
        let mut obj = vec![0.0; w];
        for (j, o) in obj.iter_mut().enumerate().take(active) {
            *o = if j == self.rhs_col() { 0.0 } else { self.cost(j) };
        }
        for r in 0..m {
            let cb = self.cost(self.basis[r]);
            if cb != 0.0 {
                let row = &self.data[r * w..r * w + active];
                for (o, v) in obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
        self.data[m * w..(m + 1) * w].copy_from_slice(&obj);
    }

    fn objective_value(&self) -> f64 {
        -self.at(self.sf.rows, self.rhs_col())
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let active = self.active_width();
        let piv = self.data[r * w + q];
        let inv = 1.0 / piv;
        {
            let row = &mut self.data[r * w..r * w + active];
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[q] = 1.0;
        }
        let pivot_row: Vec<f64> = self.data[r * w..r * w + active].to_vec();
        for i in 0..=self.sf.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..i * w + active];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            row[q] = 0.0;
        }
        self.basis[r] = q;
    }

    /// Rebuilds `B⁻¹[Â | b̂]` and the reduced-cost row from the original data.
    fn refactor(&mut self, cfg: &SolverConfig) -> Result<(), LpError> {
        let m = self.sf.rows;
        if m == 0 {
            self.reset_objective();
            return Ok(());
        }
        let basis_matrix = self.basis_matrix();
        let lu = basis_matrix.clone().lu();
        check_conditioning(&basis_matrix, &lu, cfg)?;

        let active = self.active_width();
        let mut rhs = DMatrix::<f64>::zeros(m, active);
        for r in 0..m {
            for j in 0..self.sf.cols {
                rhs[(r, j)] = self.sf.a[r * self.sf.cols + j];
            }
            rhs[(r, self.sf.cols)] = self.sf.b[r];
        }
        if self.phase == Phase::One {
            for (k, &row) in self.artificial_row.iter().enumerate() {
                rhs[(row, self.sf.cols + 1 + k)] = 1.0;
            }
        }
        let solved = lu.solve(&rhs).ok_or(LpError::NumericalBreakdown(
            "singular basis during refactorization".into(),
        ))?;
        let w = self.width;
        for r in 0..m {
            for j in 0..active {
                self.data[r * w + j] = solved[(r, j)];
            }
            // Basic columns are exact unit vectors.
            for (k, &bc) in self.basis.iter().enumerate() {
                if bc < active {
                    self.data[r * w + bc] = if k == r { 1.0 } else { 0.0 };
                }
            }
        }
        self.reset_objective();
        self.since_refactor = 0;
        Ok(())
    }

    fn basis_column(&self, col: usize) -> DVector<f64> {
        let m = self.sf.rows;
        if col < self.sf.cols {
            DVector::from_fn(m, |r, _| self.sf.a[r * self.sf.cols + col])
        } else {
            let row = self.artificial_row[col - self.sf.cols - 1];
            DVector::from_fn(m, |r, _| if r == row { 1.0 } else { 0.0 })
        }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let m = self.sf.rows;
        let mut bm = DMatrix::<f64>::zeros(m, m);
        for (k, &col) in self.basis.iter().enumerate() {
            bm.set_column(k, &self.basis_column(col));
        }
        bm
    }

    /// Columns whose mirror is basic. Their tableau column is the negated
    /// unit vector, so any positive entry there is rounding noise and
    /// pivoting on it would make the basis singular.
    fn blocked_mirrors(&self) -> Vec<bool> {
        let mut blocked = vec![false; self.sf.cols];
        for &b in &self.basis {
            if let Some(Some(m)) = self.sf.mirror.get(b) {
                blocked[*m] = true;
            }
        }
        blocked
    }

    fn choose_entering(&self, bland: bool, cfg: &SolverConfig) -> Option<usize> {
        let obj = &self.data[self.sf.rows * self.width..];
        let blocked = self.blocked_mirrors();
        let mut best: Option<(usize, f64)> = None;
        for (j, &d) in obj.iter().enumerate().take(self.sf.cols) {
            if d < -cfg.opt_tol && !blocked[j] {
                if bland {
                    return Some(j);
                }
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Minimum-ratio row for entering column `q`, and the step length.
    fn choose_leaving(&self, q: usize, bland: bool, cfg: &SolverConfig) -> Option<(usize, f64)> {
        let rhs = self.rhs_col();
        let mut min_ratio = f64::INFINITY;
        for r in 0..self.sf.rows {
            let a = self.at(r, q);
            if a > cfg.ratio_tol {
                let ratio = self.at(r, rhs).max(0.0) / a;
                if ratio < min_ratio {
                    min_ratio = ratio;
                }
            }
        }
        if !min_ratio.is_finite() {
            return None;
        }
        // Among near-ties prefer the largest pivot, or the lowest basic index under Bland.
        let slack = 1e-12 * (1.0 + min_ratio);
        let mut chosen: Option<usize> = None;
        for r in 0..self.sf.rows {
            let a = self.at(r, q);
            if a <= cfg.ratio_tol {
                continue;
            }
            let ratio = self.at(r, rhs).max(0.0) / a;
            if ratio > min_ratio + slack {
                continue;
            }
            chosen = match chosen {
                None => Some(r),
                Some(c) => {
                    let better = if bland {
                        self.basis[r] < self.basis[c]
                    } else {
                        a > self.at(c, q)
                    };
                    if better {
                        Some(r)
                    } else {
                        Some(c)
                    }
                }
            };
        }
        chosen.map(|r| (r, min_ratio))
    }

    fn run(&mut self, cfg: &SolverConfig) -> Result<PhaseEnd, LpError> {
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run > cfg.degenerate_threshold;
            let Some(q) = self.choose_entering(bland, cfg) else {
                return Ok(PhaseEnd::Optimal);
            };
            let Some((r, step)) = self.choose_leaving(q, bland, cfg) else {
                return Ok(PhaseEnd::Unbounded);
            };
            if self.iterations >= cfg.max_iterations {
                return Err(LpError::IterationLimit(cfg.max_iterations));
            }
            self.pivot(r, q);
            self.iterations += 1;
            self.since_refactor += 1;
            if step <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            if self.since_refactor >= cfg.refactor_interval {
                self.refactor(cfg)?;
            }
        }
    }

    /// Pivots basic artificials out of the basis after phase one. Rows where
    /// that is impossible are linearly dependent on the others.
    fn drive_out_artificials(&mut self, cfg: &SolverConfig) {
        for r in 0..self.sf.rows {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let blocked = self.blocked_mirrors();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.sf.cols {
                let a = self.at(r, j).abs();
                if a > cfg.ratio_tol && !blocked[j] && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(r, j);
            }
        }
    }
}

/// Rejects bases whose LU factor has a pivot below `pivot_tol` relative to the largest.
fn check_conditioning(
    bm: &DMatrix<f64>,
    lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    cfg: &SolverConfig,
) -> Result<(), LpError> {
    let u = lu.u();
    let scale = bm.amax().max(1.0);
    let min_pivot = (0..u.nrows())
        .map(|i| u[(i, i)].abs())
        .fold(f64::INFINITY, f64::min);
    if !(min_pivot > cfg.pivot_tol * scale) {
        return Err(LpError::NumericalBreakdown(format!(
            "basis pivot {min_pivot:.3e} below tolerance"
        )));
    }
    Ok(())
}

/// Dimensions that decide the tableau size, known before any matrix exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LpShape {
    pub nonneg_vars: usize,
    pub free_vars: usize,
    pub eq_rows: usize,
    pub in_rows: usize,
    /// Inequality rows with a negative right-hand side; each needs an artificial.
    pub negative_in_rows: usize,
}

impl LpShape {
    pub fn of(p: &LpProblem) -> Self {
        let free_vars = p.sign.iter().filter(|s| **s == SignClass::Free).count();
        Self {
            nonneg_vars: p.num_vars() - free_vars,
            free_vars,
            eq_rows: p.num_eq(),
            in_rows: p.num_in(),
            negative_in_rows: p.b_in.iter().filter(|b| **b < 0.0).count(),
        }
    }

    /// Standard-form rows and columns.
    pub fn standard_dims(&self) -> (usize, usize) {
        (
            self.eq_rows + self.in_rows,
            self.nonneg_vars + 2 * self.free_vars + self.in_rows,
        )
    }

    pub fn tableau_entries(&self) -> usize {
        let (rows, cols) = self.standard_dims();
        let artificials = self.eq_rows + self.negative_in_rows;
        (rows + 1).saturating_mul(cols + 1 + artificials)
    }

    /// Fails with `TooLarge` when the tableau would exceed the configured limit.
    pub fn check(&self, cfg: &SolverConfig) -> Result<(), LpError> {
        let entries = self.tableau_entries();
        if entries > cfg.max_tableau_entries {
            let (rows, cols) = self.standard_dims();
            return Err(LpError::TooLarge {
                rows,
                cols,
                entries,
                limit: cfg.max_tableau_entries,
            });
        }
        Ok(())
    }
}

/// Solves `problem` to optimality, or reports it infeasible or unbounded.
pub fn solve_lp(problem: &LpProblem, cfg: &SolverConfig) -> Result<LpSolution, LpError> {
    problem.validate()?;
    LpShape::of(problem).check(cfg)?;
    let sf = StandardForm::build(problem);

    let mut t = Tableau::new(&sf);
    let b_scale = 1.0 + sf.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    if !t.artificial_row.is_empty() {
        t.run(cfg)?;
        t.refactor(cfg)?;
        t.run(cfg)?;
        if t.objective_value() > cfg.feas_tol * b_scale {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, t.iterations));
        }
        t.drive_out_artificials(cfg);
    }

    t.phase = Phase::Two;
    t.refactor(cfg)?;
    let mut polished = None;
    for _ in 0..4 {
        match t.run(cfg)? {
            PhaseEnd::Unbounded => {
                return Ok(LpSolution::without_point(LpStatus::Unbounded, t.iterations));
            }
            PhaseEnd::Optimal => {}
        }
        // Re-derive the tableau from the data; if drift hid an improving
        // column the loop continues from the refreshed basis.
        t.refactor(cfg)?;
        if t.choose_entering(false, cfg).is_none() {
            polished = Some(extract(problem, &sf, &t, cfg)?);
            break;
        }
    }
    let solution = polished.ok_or_else(|| {
        LpError::NumericalBreakdown("reduced costs did not settle after refactorization".into())
    })?;
    let cert = &solution.certificate;
    let scale = 1.0 + solution.objective.abs();
    if cert.primal_residual > cfg.feas_tol
        || cert.dual_residual > cfg.feas_tol * scale
        || cert.duality_gap > cfg.gap_tol * scale
        || cert.complementarity > cfg.gap_tol * scale
    {
        return Err(LpError::NumericalBreakdown(format!(
            "optimality certificate out of tolerance: {cert:?}"
        )));
    }
    super::watermark::record(cert, solution.objective);
    Ok(solution)
}

fn extract(
    p: &LpProblem,
    sf: &StandardForm,
    t: &Tableau<'_>,
    cfg: &SolverConfig,
) -> Result<LpSolution, LpError> {
    let m = sf.rows;
    let mut z = vec![0.0; sf.cols];
    let mut y_hat = vec![0.0; m];
    if m > 0 {
        let bm = t.basis_matrix();
        let lu = bm.clone().lu();
        check_conditioning(&bm, &lu, cfg)?;
        let xb = lu
            .solve(&DVector::from_column_slice(&sf.b))
            .ok_or(LpError::NumericalBreakdown("singular optimal basis".into()))?;
        for (k, &col) in t.basis.iter().enumerate() {
            if col < sf.cols {
                z[col] = xb[k].max(0.0);
            }
        }
        let cb = DVector::from_fn(m, |k, _| {
            let col = t.basis[k];
            if col < sf.cols {
                sf.c[col]
            } else {
                0.0
            }
        });
        let yh = bm
            .transpose()
            .lu()
            .solve(&cb)
            .ok_or(LpError::NumericalBreakdown("singular transposed basis".into()))?;
        y_hat.copy_from_slice(yh.as_slice());
    }

    let n = p.num_vars();
    let mut x = vec![0.0; n];
    for (k, col) in sf.origin.iter().enumerate() {
        match *col {
            Column::Positive(j) => x[j] += z[k],
            Column::Negative(j) => x[j] -= z[k],
            Column::Slack(_) => {}
        }
    }
    let flip = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let duals: Vec<f64> = (0..m).map(|r| flip * sf.sign[r] * y_hat[r]).collect();
    let dual_eq = duals[..p.num_eq()].to_vec();
    let dual_in = duals[p.num_eq()..].to_vec();
    let objective = p.objective_at(&x);
    let certificate = Certificate::evaluate(p, &x, &dual_eq, &dual_in);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        dual_eq,
        dual_in,
        objective,
        iterations: t.iterations,
        certificate,
    })
}
