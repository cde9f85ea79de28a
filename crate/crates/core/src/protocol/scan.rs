use nalgebra::DMatrix;

use crate::ed::EdBlocks;

use super::message::{CommLog, MessageKind, Payload};
use super::ProtocolError;

fn rows(m: &DMatrix<f64>) -> impl Iterator<Item = Vec<f64>> + '_ {
    m.row_iter().map(|r| r.iter().copied().collect())
}

fn cols(m: &DMatrix<f64>) -> impl Iterator<Item = Vec<f64>> + '_ {
    m.column_iter().map(|c| c.iter().copied().collect())
}

/// Every unmasked private array of the round, labelled by owner: constraint
/// rows, right-hand sides and prices of each entity; admittance rows, flow
/// rows and capacities of the ISO. All-zero arrays carry nothing and are
/// skipped.
pub fn private_arrays(blocks: &EdBlocks) -> Vec<(String, Vec<f64>)> {
    let mut out = Vec::new();
    for e in blocks.entities() {
        for r in rows(&e.constraints) {
            out.push((format!("{} constraint row", e.owner), r));
        }
        out.push((format!("{} limits", e.owner), e.rhs.clone()));
        out.push((format!("{} prices", e.owner), e.price.clone()));
    }
    for r in rows(&blocks.iso.admittance) {
        out.push(("ISO admittance row".into(), r));
    }
    for r in rows(&blocks.iso.flow) {
        out.push(("ISO flow row".into(), r));
    }
    out.push(("ISO line capacities".into(), blocks.iso.capacity.clone()));
    out.retain(|(_, v)| v.iter().any(|x| *x != 0.0));
    out
}

/// Fails if any submission carries raw data or contains a row or column
/// equal to one of the private arrays.
pub fn privacy_scan(log: &CommLog, blocks: &EdBlocks) -> Result<(), ProtocolError> {
    let private = private_arrays(blocks);
    for m in log.of_kind(MessageKind::Submission) {
        let sub = match &m.payload {
            Payload::Encrypted(s) => s,
            _ => {
                return Err(ProtocolError::ProtocolViolation(format!(
                    "{} sent unmasked data to {}",
                    m.sender, m.receiver
                )))
            }
        };
        for (name, block) in sub.blocks() {
            for v in rows(&block).chain(cols(&block)) {
                if let Some((what, _)) = private.iter().find(|(_, p)| *p == v) {
                    return Err(ProtocolError::ProtocolViolation(format!(
                        "{}'s {name} block to {} contains {what}",
                        m.sender, m.receiver
                    )));
                }
            }
        }
    }
    Ok(())
}
