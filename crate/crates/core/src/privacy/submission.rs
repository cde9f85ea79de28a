use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::keys::{EntityKeys, IsoKeys};
use super::PrivacyError;
use crate::ed::{EntityBlock, EntityKind, IsoBlock};

/// Masked bid data one GENCO or LSE hands to the clearing agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntitySubmission {
    pub owner: String,
    pub kind: EntityKind,
    /// `c·Y` or `d·Y`.
    pub cost: Vec<f64>,
    /// `X·E·Y`, `m × n`.
    pub constraints: DMatrix<f64>,
    /// `X·R`, `m × m`.
    pub slack: DMatrix<f64>,
    /// `X·M`.
    pub rhs: Vec<f64>,
}

/// Masked bus incidence `K·Y` an entity hands to the ISO.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceSubmission {
    pub owner: String,
    pub kind: EntityKind,
    /// `T·B × n`.
    pub incidence: DMatrix<f64>,
}

/// Balance-row block of one entity, already premultiplied by `X_b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceBlock {
    pub owner: String,
    pub kind: EntityKind,
    /// `X_b·K·Y`.
    pub block: DMatrix<f64>,
}

/// Masked network data the ISO hands to the clearing agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoSubmission {
    /// `X_l1·G·KL·Yθ`.
    pub flow_forward: DMatrix<f64>,
    /// `X_l2·G·KL·Yθ`; enters the reverse rows with a minus sign.
    pub flow_reverse: DMatrix<f64>,
    /// `X_l1·R_l1`.
    pub slack_forward: DMatrix<f64>,
    /// `X_l2·R_l2`.
    pub slack_reverse: DMatrix<f64>,
    /// `X_l1·P̄L`.
    pub capacity_forward: Vec<f64>,
    /// `X_l2·P̄L`.
    pub capacity_reverse: Vec<f64>,
    /// One block per entity, in entity order.
    pub balance_entities: Vec<BalanceBlock>,
    /// `X_b·B·Yθ`; enters the balance rows with a minus sign.
    pub balance_angles: DMatrix<f64>,
}

/// The only data that leaves a party before the solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EncryptedSubmission {
    Entity(EntitySubmission),
    Incidence(IncidenceSubmission),
    Iso(IsoSubmission),
}

impl EncryptedSubmission {
    pub fn owner(&self) -> &str {
        match self {
            Self::Entity(e) => &e.owner,
            Self::Incidence(i) => &i.owner,
            Self::Iso(_) => "ISO",
        }
    }

    /// Every numeric block with a name, in serialization order.
    pub fn blocks(&self) -> Vec<(String, DMatrix<f64>)> {
        let row = |v: &[f64]| DMatrix::from_row_slice(1, v.len(), v);
        let col = |v: &[f64]| DMatrix::from_column_slice(v.len(), 1, v);
        match self {
            Self::Entity(e) => vec![
                ("cost".into(), row(&e.cost)),
                ("constraints".into(), e.constraints.clone()),
                ("slack".into(), e.slack.clone()),
                ("rhs".into(), col(&e.rhs)),
            ],
            Self::Incidence(i) => vec![("incidence".into(), i.incidence.clone())],
            Self::Iso(s) => {
                let mut out = vec![
                    ("flow_forward".into(), s.flow_forward.clone()),
                    ("flow_reverse".into(), s.flow_reverse.clone()),
                    ("slack_forward".into(), s.slack_forward.clone()),
                    ("slack_reverse".into(), s.slack_reverse.clone()),
                    ("capacity_forward".into(), col(&s.capacity_forward)),
                    ("capacity_reverse".into(), col(&s.capacity_reverse)),
                ];
                for b in &s.balance_entities {
                    out.push((format!("balance {}", b.owner), b.block.clone()));
                }
                out.push(("balance_angles".into(), s.balance_angles.clone()));
                out
            }
        }
    }

    pub fn scalar_count(&self) -> usize {
        self.blocks().iter().map(|(_, m)| m.len()).sum()
    }
}

fn diag_times(x: &DMatrix<f64>, r: &[f64]) -> DMatrix<f64> {
    let mut out = x.clone();
    for (j, v) in r.iter().enumerate() {
        out.column_mut(j).scale_mut(*v);
    }
    out
}

fn check_entity(block: &EntityBlock, keys: &EntityKeys) -> Result<(), PrivacyError> {
    let (m, n) = (block.num_rows(), block.num_vars());
    if keys.y.shape() != (n, n) || keys.x.shape() != (m, m) || keys.r.len() != m {
        return Err(PrivacyError::DimensionMismatch(format!(
            "keys of {} do not match {m} rows and {n} variables",
            block.owner
        )));
    }
    Ok(())
}

/// Masks an entity's own blocks with its own keys.
pub fn mask_entity(
    block: &EntityBlock,
    keys: &EntityKeys,
) -> Result<(EntitySubmission, IncidenceSubmission), PrivacyError> {
    check_entity(block, keys)?;
    let cost = DVector::from_column_slice(&block.price).transpose() * &keys.y;
    let constraints = &keys.x * &block.constraints * &keys.y;
    let slack = diag_times(&keys.x, &keys.r);
    let rhs = &keys.x * DVector::from_column_slice(&block.rhs);
    let incidence = &block.incidence * &keys.y;
    Ok((
        EntitySubmission {
            owner: block.owner.clone(),
            kind: block.kind,
            cost: cost.iter().copied().collect(),
            constraints,
            slack,
            rhs: rhs.iter().copied().collect(),
        },
        IncidenceSubmission {
            owner: block.owner.clone(),
            kind: block.kind,
            incidence,
        },
    ))
}

/// Masks the network data and premultiplies every entity's masked incidence
/// by the ISO's balance-row key.
pub fn mask_iso(
    iso: &IsoBlock,
    keys: &IsoKeys,
    incidences: &[IncidenceSubmission],
) -> Result<IsoSubmission, PrivacyError> {
    let (tl, na, tb) = (iso.num_line_rows(), iso.num_angles(), iso.num_balance_rows());
    if keys.y_theta.shape() != (na, na)
        || keys.x_l1.shape() != (tl, tl)
        || keys.x_l2.shape() != (tl, tl)
        || keys.r_l1.len() != tl
        || keys.r_l2.len() != tl
        || keys.x_b.shape() != (tb, tb)
    {
        return Err(PrivacyError::DimensionMismatch(
            "ISO keys do not match the network dimensions".into(),
        ));
    }
    if let Some(bad) = incidences.iter().find(|i| i.incidence.nrows() != tb) {
        return Err(PrivacyError::DimensionMismatch(format!(
            "incidence of {} has {} rows, expected {tb}",
            bad.owner,
            bad.incidence.nrows()
        )));
    }
    let flow_y = &iso.flow * &keys.y_theta;
    let cap = DVector::from_column_slice(&iso.capacity);
    Ok(IsoSubmission {
        flow_forward: &keys.x_l1 * &flow_y,
        flow_reverse: &keys.x_l2 * &flow_y,
        slack_forward: diag_times(&keys.x_l1, &keys.r_l1),
        slack_reverse: diag_times(&keys.x_l2, &keys.r_l2),
        capacity_forward: (&keys.x_l1 * &cap).iter().copied().collect(),
        capacity_reverse: (&keys.x_l2 * &cap).iter().copied().collect(),
        balance_entities: incidences
            .iter()
            .map(|i| BalanceBlock {
                owner: i.owner.clone(),
                kind: i.kind,
                block: &keys.x_b * &i.incidence,
            })
            .collect(),
        balance_angles: &keys.x_b * &iso.admittance * &keys.y_theta,
    })
}
