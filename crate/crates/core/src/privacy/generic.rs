//! Masking of partitioned linear programs whose owners hold column blocks
//! (vertical) or row blocks (horizontal).

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use super::{keys::condition_number, PrivacyError};
use crate::lp::{LpProblem, LpSolution, SignClass};

const SINGULAR_COND: f64 = 1e12;

fn check_invertible(m: &DMatrix<f64>, what: &str) -> Result<(), PrivacyError> {
    if !m.is_square() {
        return Err(PrivacyError::DimensionMismatch(format!("{what} is not square")));
    }
    if condition_number(m) > SINGULAR_COND {
        return Err(PrivacyError::SingularMask(what.to_string()));
    }
    Ok(())
}

fn is_positive_diagonal(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| {
        (0..m.ncols()).all(|j| if i == j { m[(i, j)] > 0.0 } else { m[(i, j)] == 0.0 })
    })
}

/// Column-masked program with the data needed to map solutions back.
#[derive(Clone, Debug, PartialEq)]
pub struct VerticalMasked {
    pub lp: LpProblem,
    pub blocks: Vec<Range<usize>>,
    ys: Vec<DMatrix<f64>>,
    /// Number of leading inequality rows copied from the input.
    pub original_in_rows: usize,
}

impl VerticalMasked {
    /// `x = blkdiag(Y) · x̃`.
    pub fn recover(&self, x_tilde: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; x_tilde.len()];
        for (r, y) in self.blocks.iter().zip(&self.ys) {
            let v = y * DVector::from_column_slice(&x_tilde[r.clone()]);
            x[r.clone()].copy_from_slice(v.as_slice());
        }
        x
    }

    /// Input-LP duals; the masked rows keep their right-hand sides, so they
    /// carry over unchanged.
    pub fn recover_duals(&self, masked: &LpSolution) -> (Vec<f64>, Vec<f64>) {
        (
            masked.dual_eq.clone(),
            masked.dual_in[..self.original_in_rows].to_vec(),
        )
    }
}

/// Substitutes `x = blkdiag(Y_1, …, Y_k) x̃` where block `i` owns the columns
/// `blocks[i]`. Non-negativity of a masked column becomes an explicit row
/// `−(Y x̃)_j ≤ 0` unless its `Y` block is a positive diagonal.
pub fn vertical_mask_generic(
    lp: &LpProblem,
    blocks: &[Range<usize>],
    ys: &[DMatrix<f64>],
) -> Result<VerticalMasked, PrivacyError> {
    lp.validate()?;
    let n = lp.num_vars();
    if blocks.len() != ys.len() {
        return Err(PrivacyError::DimensionMismatch(format!(
            "{} column blocks but {} masks",
            blocks.len(),
            ys.len()
        )));
    }
    let mut owner = vec![None; n];
    for (i, r) in blocks.iter().enumerate() {
        if r.end > n {
            return Err(PrivacyError::DimensionMismatch(format!(
                "column block {i} ends at {} beyond {n} variables",
                r.end
            )));
        }
        for j in r.clone() {
            if owner[j].replace(i).is_some() {
                return Err(PrivacyError::DimensionMismatch(format!(
                    "column {j} is owned by more than one block"
                )));
            }
        }
        if ys[i].shape() != (r.len(), r.len()) {
            return Err(PrivacyError::DimensionMismatch(format!(
                "mask {i} is {:?}, block has {} columns",
                ys[i].shape(),
                r.len()
            )));
        }
        check_invertible(&ys[i], &format!("Y{}", i + 1))?;
    }
    if let Some(j) = owner.iter().position(|o| o.is_none()) {
        return Err(PrivacyError::DimensionMismatch(format!(
            "column {j} is not covered by any block"
        )));
    }

    let mut y_full = DMatrix::<f64>::zeros(n, n);
    for (r, y) in blocks.iter().zip(ys) {
        y_full
            .view_mut((r.start, r.start), (r.len(), r.len()))
            .copy_from(y);
    }
    let cost = DVector::from_column_slice(&lp.cost).transpose() * &y_full;
    let a_eq = &lp.a_eq * &y_full;
    let mut a_in = &lp.a_in * &y_full;
    let mut b_in = lp.b_in.clone();
    let mut sign = vec![SignClass::Free; n];
    let mut extra_rows = Vec::new();
    for j in 0..n {
        if lp.sign[j] != SignClass::NonNegative {
            continue;
        }
        let b = owner[j].unwrap();
        if is_positive_diagonal(&ys[b]) {
            sign[j] = SignClass::NonNegative;
        } else {
            extra_rows.push(j);
        }
    }
    if !extra_rows.is_empty() {
        let base = a_in.nrows();
        a_in = a_in.resize_vertically(base + extra_rows.len(), 0.0);
        for (k, &j) in extra_rows.iter().enumerate() {
            for c in 0..n {
                a_in[(base + k, c)] = -y_full[(j, c)];
            }
            b_in.push(0.0);
        }
    }
    let mut masked = LpProblem::new(lp.sense, cost.iter().copied().collect())
        .with_equalities(a_eq, lp.b_eq.clone())
        .with_inequalities(a_in, b_in)
        .with_signs(sign);
    masked.eq_labels = lp.eq_labels.clone();
    if let Some(l) = &lp.in_labels {
        let mut labels = l.clone();
        labels.extend(extra_rows.iter().map(|j| format!("x{j} >= 0")));
        masked.in_labels = Some(labels);
    }
    Ok(VerticalMasked {
        lp: masked,
        blocks: blocks.to_vec(),
        ys: ys.to_vec(),
        original_in_rows: lp.num_in(),
    })
}

/// Rows owned by one party, indexed over the equality rows followed by the
/// inequality rows of the input program.
#[derive(Clone, Debug, PartialEq)]
pub struct RowGroup {
    pub rows: Vec<usize>,
    /// `rows.len()` square.
    pub x: DMatrix<f64>,
    /// Slack coefficients for the inequality rows of the group, in group order.
    pub r: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalMasked {
    /// All-equality program; columns are the input columns then one slack per
    /// inequality row, grouped like the rows.
    pub lp: LpProblem,
    pub groups: Vec<RowGroup>,
    pub num_structural: usize,
    num_eq: usize,
    /// Masked row span of each group.
    pub row_spans: Vec<Range<usize>>,
    /// Slack column span of each group.
    pub slack_spans: Vec<Range<usize>>,
}

impl HorizontalMasked {
    pub fn recover(&self, x_masked: &[f64]) -> Vec<f64> {
        x_masked[..self.num_structural].to_vec()
    }

    /// Duals of the input rows: `y_g = X_gᵀ ỹ_g` for each group.
    pub fn recover_duals(&self, masked: &LpSolution) -> (Vec<f64>, Vec<f64>) {
        let total: usize = self.groups.iter().map(|g| g.rows.len()).sum();
        let mut unified = vec![0.0; total];
        for (g, span) in self.groups.iter().zip(&self.row_spans) {
            let y_t = DVector::from_column_slice(&masked.dual_eq[span.clone()]);
            let y = g.x.transpose() * y_t;
            for (k, &row) in g.rows.iter().enumerate() {
                unified[row] = y[k];
            }
        }
        let dual_in = unified.split_off(self.num_eq);
        (unified, dual_in)
    }
}

/// Converts each group's inequalities to equalities with slack coefficients
/// `R_g` and left-multiplies the group's rows by `X_g`.
pub fn horizontal_mask_generic(
    lp: &LpProblem,
    groups: &[RowGroup],
) -> Result<HorizontalMasked, PrivacyError> {
    lp.validate()?;
    let n = lp.num_vars();
    let m_eq = lp.num_eq();
    let total = m_eq + lp.num_in();
    let mut seen = vec![false; total];
    for (gi, g) in groups.iter().enumerate() {
        for &r in &g.rows {
            if r >= total || std::mem::replace(&mut seen[r], true) {
                return Err(PrivacyError::DimensionMismatch(format!(
                    "row {r} of group {gi} is out of range or already owned"
                )));
            }
        }
        if g.x.shape() != (g.rows.len(), g.rows.len()) {
            return Err(PrivacyError::DimensionMismatch(format!(
                "group {gi} has {} rows but X is {:?}",
                g.rows.len(),
                g.x.shape()
            )));
        }
        let ineq = g.rows.iter().filter(|r| **r >= m_eq).count();
        if g.r.len() != ineq {
            return Err(PrivacyError::DimensionMismatch(format!(
                "group {gi} has {ineq} inequality rows but {} slack coefficients",
                g.r.len()
            )));
        }
        if let Some(v) = g.r.iter().find(|v| !(**v > 0.0)) {
            return Err(PrivacyError::NonPositiveDiagonal(format!("group {gi}: {v}")));
        }
        check_invertible(&g.x, &format!("X{}", gi + 1))?;
    }
    if let Some(r) = seen.iter().position(|s| !s) {
        return Err(PrivacyError::DimensionMismatch(format!("row {r} is not owned")));
    }

    let slacks = lp.num_in();
    let cols = n + slacks;
    let row_of = |r: usize| -> (Vec<f64>, f64, bool) {
        if r < m_eq {
            (lp.a_eq.row(r).iter().copied().collect(), lp.b_eq[r], false)
        } else {
            let i = r - m_eq;
            (lp.a_in.row(i).iter().copied().collect(), lp.b_in[i], true)
        }
    };
    let mut a = DMatrix::<f64>::zeros(total, cols);
    let mut b = vec![0.0; total];
    let mut row_spans = Vec::new();
    let mut slack_spans = Vec::new();
    let mut row0 = 0;
    let mut slack0 = n;
    for g in groups {
        let k = g.rows.len();
        let ineq = g.r.len();
        let mut block = DMatrix::<f64>::zeros(k, cols);
        let mut rhs = DVector::<f64>::zeros(k);
        let mut s = 0;
        for (local, &r) in g.rows.iter().enumerate() {
            let (coef, bound, is_in) = row_of(r);
            for (j, c) in coef.into_iter().enumerate() {
                block[(local, j)] = c;
            }
            if is_in {
                block[(local, slack0 + s)] = g.r[s];
                s += 1;
            }
            rhs[local] = bound;
        }
        let masked = &g.x * block;
        let masked_rhs = &g.x * rhs;
        a.view_mut((row0, 0), (k, cols)).copy_from(&masked);
        b[row0..row0 + k].copy_from_slice(masked_rhs.as_slice());
        row_spans.push(row0..row0 + k);
        slack_spans.push(slack0..slack0 + ineq);
        row0 += k;
        slack0 += ineq;
    }
    let mut cost = lp.cost.clone();
    cost.resize(cols, 0.0);
    let mut sign = lp.sign.clone();
    sign.resize(cols, SignClass::NonNegative);
    let masked = LpProblem::new(lp.sense, cost)
        .with_equalities(a, b)
        .with_signs(sign);
    Ok(HorizontalMasked {
        lp: masked,
        groups: groups.to_vec(),
        num_structural: n,
        num_eq: m_eq,
        row_spans,
        slack_spans,
    })
}
