//! Counting argument for what an observer of the submissions could solve for.
//!
//! The auditor does not attempt to solve anything. It compares the number of
//! equations a curious observer can write about a party's secret matrices
//! with the number of unknown entries in those matrices.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::submission::EncryptedSubmission;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// More unknowns than linear equations: `Y` cannot be pinned down.
    Underdetermined,
    /// Enough linear equations that `Y` may be recoverable.
    AtRisk,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Underdetermined => "UNDERDETERMINED",
            Verdict::AtRisk => "AT-RISK",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub owner: String,
    /// Linear equations in the entries of `Y` alone.
    pub linear_equations: usize,
    pub linear_unknowns: usize,
    /// Bilinear equations coupling `X`, `R` and `Y`.
    pub bilinear_equations: usize,
    pub bilinear_unknowns: usize,
    pub verdict: Verdict,
}

impl AuditReport {
    pub fn linear_line(&self) -> String {
        format!(
            "linear: {} eq / {} unk → {}",
            self.linear_equations, self.linear_unknowns, self.verdict
        )
    }

    pub fn bilinear_line(&self) -> String {
        format!(
            "bilinear: {} eq / {} unk",
            self.bilinear_equations, self.bilinear_unknowns
        )
    }
}

fn nonzero_rows(m: &nalgebra::DMatrix<f64>) -> usize {
    m.row_iter().filter(|r| r.iter().any(|v| *v != 0.0)).count()
}

/// Audits the submissions of one party.
///
/// For an entity with `n` variables and `m` rows:
/// - linear: every structurally nonzero row of `K·Y` gives `n` equations
///   in `Y` (the rows of `K` are public 0/1 patterns), and a published
///   recovered vector `Y·x̃` gives one equation per entry; unknowns `n²`;
/// - bilinear: `X·E·Y` gives `m·n`, `X·R` gives `m²`, the full `K·Y` block
///   `T·B·n`, plus the published entries; unknowns `m² + m + n²`.
///
/// For the ISO the angle mask `Yθ` plays the role of `Y`, the two line keys
/// and `X_b` the role of `X`.
pub fn leakage_audit(submissions: &[&EncryptedSubmission], published: Option<&[f64]>) -> AuditReport {
    let published_len = published.map_or(0, |p| p.len());
    let mut report = AuditReport {
        owner: submissions
            .first()
            .map(|s| s.owner().to_string())
            .unwrap_or_default(),
        linear_equations: published_len,
        linear_unknowns: 0,
        bilinear_equations: published_len,
        bilinear_unknowns: 0,
        verdict: Verdict::AtRisk,
    };
    for s in submissions {
        match s {
            EncryptedSubmission::Entity(e) => {
                let (m, n) = (e.rhs.len(), e.cost.len());
                report.linear_unknowns = n * n;
                report.bilinear_equations += m * n + m * m;
                report.bilinear_unknowns = m * m + m + n * n;
            }
            EncryptedSubmission::Incidence(i) => {
                let n = i.incidence.ncols();
                report.linear_equations += nonzero_rows(&i.incidence) * n;
                report.bilinear_equations += i.incidence.len();
            }
            EncryptedSubmission::Iso(iso) => {
                let na = iso.balance_angles.ncols();
                let tl = iso.flow_forward.nrows();
                let tb = iso.balance_angles.nrows();
                report.linear_unknowns = na * na;
                report.bilinear_equations += iso.flow_forward.len()
                    + iso.flow_reverse.len()
                    + iso.slack_forward.len()
                    + iso.slack_reverse.len()
                    + iso.balance_angles.len()
                    + iso.balance_entities.iter().map(|b| b.block.len()).sum::<usize>();
                report.bilinear_unknowns = na * na + 2 * tl * tl + 2 * tl + tb * tb;
            }
        }
    }
    report.verdict = if report.linear_unknowns > report.linear_equations {
        Verdict::Underdetermined
    } else {
        Verdict::AtRisk
    };
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::EntityKind;
    use crate::privacy::{EntitySubmission, IncidenceSubmission};
    use nalgebra::DMatrix;

    #[test]
    fn one_variable_one_row_is_at_risk() {
        let e = EncryptedSubmission::Entity(EntitySubmission {
            owner: "G".into(),
            kind: EntityKind::Genco,
            cost: vec![0.7],
            constraints: DMatrix::from_element(1, 1, 0.3),
            slack: DMatrix::from_element(1, 1, 0.9),
            rhs: vec![4.0],
        });
        let i = EncryptedSubmission::Incidence(IncidenceSubmission {
            owner: "G".into(),
            kind: EntityKind::Genco,
            incidence: DMatrix::from_element(1, 1, 0.5),
        });
        let r = leakage_audit(&[&e, &i], Some(&[3.0]));
        assert_eq!((r.linear_equations, r.linear_unknowns), (2, 1));
        assert_eq!(r.verdict, Verdict::AtRisk);
        assert_eq!(r.linear_line(), "linear: 2 eq / 1 unk → AT-RISK");
    }
}
