use std::ops::Range;

use nalgebra::DMatrix;

use super::submission::{EncryptedSubmission, EntitySubmission, IsoSubmission};
use super::PrivacyError;
use crate::ed::{EdBlocks, EntityKind};
use crate::lp::{LpProblem, LpShape, Sense, SignClass};

#[derive(Clone, Debug, PartialEq)]
pub struct EntitySpans {
    pub owner: String,
    pub kind: EntityKind,
    /// Masked decision columns `P̃_i` or `D̃_j`.
    pub cols: Range<usize>,
    /// Masked slack columns `s̃G_i` or `s̃D_j`.
    pub slack_cols: Range<usize>,
    pub rows: Range<usize>,
}

/// Where each owner's variables and rows sit in the transformed program.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedSpans {
    pub gencos: Vec<EntitySpans>,
    pub lses: Vec<EntitySpans>,
    pub angle_cols: Range<usize>,
    pub line_forward_slack: Range<usize>,
    pub line_reverse_slack: Range<usize>,
    pub line_forward_rows: Range<usize>,
    pub line_reverse_rows: Range<usize>,
    pub balance_rows: Range<usize>,
}

impl TransformedSpans {
    pub fn entities(&self) -> impl Iterator<Item = &EntitySpans> {
        self.gencos.iter().chain(&self.lses)
    }

    pub fn num_structural(&self) -> usize {
        self.angle_cols.end
    }
}

/// The masked, all-equality dispatch program handed to the clearing agent.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedLp {
    pub lp: LpProblem,
    pub spans: TransformedSpans,
}

impl TransformedLp {
    pub fn num_slacks(&self) -> usize {
        self.lp.num_vars() - self.spans.num_structural()
    }
}

/// Size of the program `build_transformed_ed` would assemble for `blocks`:
/// free masked structurals, one non-negative slack per inequality, and
/// equality rows only.
pub fn transformed_shape(blocks: &EdBlocks) -> LpShape {
    LpShape {
        nonneg_vars: blocks.num_inequalities(),
        free_vars: blocks.num_structural(),
        eq_rows: blocks.num_rows(),
        in_rows: 0,
        negative_in_rows: 0,
    }
}

fn sign_of(kind: EntityKind) -> f64 {
    match kind {
        EntityKind::Genco => 1.0,
        EntityKind::Lse => -1.0,
    }
}

fn check_entity(e: &EntitySubmission, tb: usize, balance: &DMatrix<f64>) -> Result<(), PrivacyError> {
    let m = e.rhs.len();
    let n = e.cost.len();
    if e.constraints.shape() != (m, n) || e.slack.shape() != (m, m) || balance.shape() != (tb, n) {
        return Err(PrivacyError::DimensionMismatch(format!(
            "submission of {} has inconsistent block shapes",
            e.owner
        )));
    }
    Ok(())
}

/// Assembles the transformed program from submissions alone.
///
/// Entity submissions are laid out GENCOs first, then LSEs, each in the
/// order received. Incidence submissions are addressed to the ISO and are
/// ignored here.
pub fn build_transformed_ed(submissions: &[EncryptedSubmission]) -> Result<TransformedLp, PrivacyError> {
    let mut iso: Option<&IsoSubmission> = None;
    let mut gencos: Vec<&EntitySubmission> = Vec::new();
    let mut lses: Vec<&EntitySubmission> = Vec::new();
    for s in submissions {
        match s {
            EncryptedSubmission::Iso(i) => {
                if iso.replace(i).is_some() {
                    return Err(PrivacyError::DimensionMismatch(
                        "more than one ISO submission".into(),
                    ));
                }
            }
            EncryptedSubmission::Entity(e) => match e.kind {
                EntityKind::Genco => gencos.push(e),
                EntityKind::Lse => lses.push(e),
            },
            EncryptedSubmission::Incidence(_) => {}
        }
    }
    let iso = iso.ok_or_else(|| PrivacyError::MissingSubmission("ISO".into()))?;
    for b in &iso.balance_entities {
        if !gencos.iter().chain(&lses).any(|e| e.owner == b.owner && e.kind == b.kind) {
            return Err(PrivacyError::MissingSubmission(b.owner.clone()));
        }
    }
    let balance_of = |e: &EntitySubmission| {
        iso.balance_entities
            .iter()
            .find(|b| b.owner == e.owner && b.kind == e.kind)
            .map(|b| &b.block)
            .ok_or_else(|| {
                PrivacyError::DimensionMismatch(format!(
                    "ISO submission has no balance block for {}",
                    e.owner
                ))
            })
    };

    let na = iso.balance_angles.ncols();
    let tb = iso.balance_angles.nrows();
    let tl = iso.flow_forward.nrows();
    let iso_ok = iso.flow_forward.shape() == (tl, na)
        && iso.flow_reverse.shape() == (tl, na)
        && iso.slack_forward.shape() == (tl, tl)
        && iso.slack_reverse.shape() == (tl, tl)
        && iso.capacity_forward.len() == tl
        && iso.capacity_reverse.len() == tl;
    if !iso_ok {
        return Err(PrivacyError::DimensionMismatch(
            "ISO submission has inconsistent block shapes".into(),
        ));
    }
    let ordered: Vec<&EntitySubmission> = gencos.iter().chain(&lses).copied().collect();
    for e in &ordered {
        check_entity(e, tb, balance_of(e)?)?;
    }

    let n_struct: usize = ordered.iter().map(|e| e.cost.len()).sum::<usize>() + na;
    let m_ent: usize = ordered.iter().map(|e| e.rhs.len()).sum();
    let cols = n_struct + m_ent + 2 * tl;
    let rows = m_ent + 2 * tl + tb;

    let mut spans_list = Vec::new();
    let mut col = 0;
    let mut slack = n_struct;
    let mut row = 0;
    for e in &ordered {
        let (n, m) = (e.cost.len(), e.rhs.len());
        spans_list.push(EntitySpans {
            owner: e.owner.clone(),
            kind: e.kind,
            cols: col..col + n,
            slack_cols: slack..slack + m,
            rows: row..row + m,
        });
        col += n;
        slack += m;
        row += m;
    }
    let angle_cols = col..col + na;
    let line_forward_slack = slack..slack + tl;
    let line_reverse_slack = slack + tl..slack + 2 * tl;
    let line_forward_rows = row..row + tl;
    let line_reverse_rows = row + tl..row + 2 * tl;
    let balance_rows = row + 2 * tl..rows;

    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = vec![0.0; rows];
    let mut cost = vec![0.0; cols];
    let put = |a: &mut DMatrix<f64>, r0: usize, c0: usize, m: &DMatrix<f64>, s: f64| {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                a[(r0 + i, c0 + j)] = s * m[(i, j)];
            }
        }
    };
    for (e, sp) in ordered.iter().zip(&spans_list) {
        put(&mut a, sp.rows.start, sp.cols.start, &e.constraints, 1.0);
        put(&mut a, sp.rows.start, sp.slack_cols.start, &e.slack, 1.0);
        b[sp.rows.clone()].copy_from_slice(&e.rhs);
        let s = -sign_of(e.kind);
        for (c, v) in sp.cols.clone().zip(&e.cost) {
            cost[c] = s * v;
        }
        put(&mut a, balance_rows.start, sp.cols.start, balance_of(e)?, sign_of(e.kind));
    }
    put(&mut a, line_forward_rows.start, angle_cols.start, &iso.flow_forward, 1.0);
    put(&mut a, line_forward_rows.start, line_forward_slack.start, &iso.slack_forward, 1.0);
    b[line_forward_rows.clone()].copy_from_slice(&iso.capacity_forward);
    put(&mut a, line_reverse_rows.start, angle_cols.start, &iso.flow_reverse, -1.0);
    put(&mut a, line_reverse_rows.start, line_reverse_slack.start, &iso.slack_reverse, 1.0);
    b[line_reverse_rows.clone()].copy_from_slice(&iso.capacity_reverse);
    put(&mut a, balance_rows.start, angle_cols.start, &iso.balance_angles, -1.0);

    let mut sign = vec![SignClass::Free; n_struct];
    sign.resize(cols, SignClass::NonNegative);
    let mut lp = LpProblem::new(Sense::Maximize, cost)
        .with_equalities(a, b)
        .with_signs(sign);
    let mut labels = Vec::with_capacity(rows);
    for sp in &spans_list {
        labels.extend(sp.rows.clone().map(|r| format!("{} masked row {}", sp.owner, r - sp.rows.start + 1)));
    }
    labels.extend((0..tl).map(|r| format!("masked line row {} forward", r + 1)));
    labels.extend((0..tl).map(|r| format!("masked line row {} reverse", r + 1)));
    labels.extend((0..tb).map(|r| format!("masked balance row {}", r + 1)));
    lp.eq_labels = Some(labels);

    let n_gencos = gencos.len();
    let lses_spans = spans_list.split_off(n_gencos);
    Ok(TransformedLp {
        lp,
        spans: TransformedSpans {
            gencos: spans_list,
            lses: lses_spans,
            angle_cols,
            line_forward_slack,
            line_reverse_slack,
            line_forward_rows,
            line_reverse_rows,
            balance_rows,
        },
    })
}
