//! Random-matrix masking of the dispatch program.
//!
//! Each GENCO and LSE right-multiplies its columns by a secret positive
//! matrix `Y`, turns its inequalities into equalities with positive slack
//! coefficients `R` and left-multiplies its rows by a secret `X`. The ISO
//! does the same for the angle columns, the line rows and the balance rows.
//! The clearing agent only ever sees the products.

mod assemble;
mod audit;
mod generic;
mod keys;
mod recover;
mod submission;

pub use assemble::{build_transformed_ed, transformed_shape, EntitySpans, TransformedLp, TransformedSpans};
pub use audit::{leakage_audit, AuditReport, Verdict};
pub use generic::{
    horizontal_mask_generic, vertical_mask_generic, HorizontalMasked, RowGroup, VerticalMasked,
};
pub use keys::{
    condition_number, gen_keys, party_stream, EntityKeys, IsoKeys, MaskConfig, MaskKeys,
};
pub use recover::{recover_lmp, recover_primal, unmask_slice, RecoveredFragments};
pub use submission::{
    mask_entity, mask_iso, BalanceBlock, EncryptedSubmission, EntitySubmission,
    IncidenceSubmission, IsoSubmission,
};

use crate::ed::EdBlocks;
use crate::lp::LpError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PrivacyError {
    #[error("could not sample an acceptable {what} in {retries} retries")]
    KeyGenerationFailed { what: String, retries: usize },
    #[error("mask {0} is singular")]
    SingularMask(String),
    #[error("slack coefficients must be positive: {0}")]
    NonPositiveDiagonal(String),
    #[error("missing submission from {0}")]
    MissingSubmission(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("span mismatch: {0}")]
    SpanMismatch(String),
    #[error(transparent)]
    Solver(#[from] LpError),
}

/// Every submission of a round, computed in one place. Useful for tests and
/// tooling; the protocol has each party mask its own data instead.
pub fn mask_all(blocks: &EdBlocks, keys: &MaskKeys) -> Result<Vec<EncryptedSubmission>, PrivacyError> {
    let mut out = Vec::new();
    let mut incidences = Vec::new();
    for (b, k) in blocks
        .gencos
        .iter()
        .zip(&keys.gencos)
        .chain(blocks.lses.iter().zip(&keys.lses))
    {
        let (e, i) = mask_entity(b, k)?;
        out.push(EncryptedSubmission::Entity(e));
        incidences.push(i);
    }
    let iso = mask_iso(&blocks.iso, &keys.iso, &incidences)?;
    out.extend(incidences.into_iter().map(EncryptedSubmission::Incidence));
    out.push(EncryptedSubmission::Iso(iso));
    Ok(out)
}
