use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use super::assemble::TransformedSpans;
use super::keys::MaskKeys;
use super::PrivacyError;
use crate::lp::LpSolution;

fn slice<'a>(v: &'a [f64], span: &Range<usize>, what: &str) -> Result<&'a [f64], PrivacyError> {
    v.get(span.clone()).ok_or_else(|| {
        PrivacyError::SpanMismatch(format!(
            "{what} span {span:?} exceeds solution length {}",
            v.len()
        ))
    })
}

/// `x = Y · x̃` for one owner's slice of the transformed solution.
pub fn unmask_slice(y: &DMatrix<f64>, x_tilde: &[f64]) -> Result<Vec<f64>, PrivacyError> {
    if y.ncols() != x_tilde.len() {
        return Err(PrivacyError::SpanMismatch(format!(
            "mask has {} columns, slice has {} entries",
            y.ncols(),
            x_tilde.len()
        )));
    }
    Ok((y * DVector::from_column_slice(x_tilde)).iter().copied().collect())
}

/// `LMP = −X_bᵀ λ̃`, with `λ̃` the balance-row duals of the transformed
/// program in its maximization sense.
pub fn recover_lmp(x_b: &DMatrix<f64>, lambda_tilde: &[f64]) -> Result<Vec<f64>, PrivacyError> {
    if x_b.nrows() != lambda_tilde.len() || !x_b.is_square() {
        return Err(PrivacyError::DimensionMismatch(format!(
            "X_b is {:?}, dual vector has {} entries",
            x_b.shape(),
            lambda_tilde.len()
        )));
    }
    let lmp = -(x_b.transpose() * DVector::from_column_slice(lambda_tilde));
    Ok(lmp.iter().copied().collect())
}

/// Per-owner results of unmasking a transformed solution.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredFragments {
    pub gencos: Vec<Vec<f64>>,
    pub lses: Vec<Vec<f64>>,
    /// Angles of the non-reference buses.
    pub angles: Vec<f64>,
    pub lmp: Vec<f64>,
}

/// Unmasks every owner's slice, each with that owner's key only.
pub fn recover_primal(
    keys: &MaskKeys,
    solution: &LpSolution,
    spans: &TransformedSpans,
) -> Result<RecoveredFragments, PrivacyError> {
    if keys.gencos.len() != spans.gencos.len() || keys.lses.len() != spans.lses.len() {
        return Err(PrivacyError::SpanMismatch(
            "key set and spans list different entities".into(),
        ));
    }
    let each = |ks: &[super::EntityKeys], sp: &[super::EntitySpans]| {
        ks.iter()
            .zip(sp)
            .map(|(k, s)| unmask_slice(&k.y, slice(&solution.x, &s.cols, &s.owner)?))
            .collect::<Result<Vec<_>, _>>()
    };
    Ok(RecoveredFragments {
        gencos: each(&keys.gencos, &spans.gencos)?,
        lses: each(&keys.lses, &spans.lses)?,
        angles: unmask_slice(&keys.iso.y_theta, slice(&solution.x, &spans.angle_cols, "angle")?)?,
        lmp: recover_lmp(
            &keys.iso.x_b,
            slice(&solution.dual_eq, &spans.balance_rows, "balance")?,
        )?,
    })
}
