//! In-process simulation of one market round between GENCOs, LSEs, the ISO
//! and a clearing agent, with a log of every message exchanged.

mod cost;
mod message;
mod party;
mod scan;
mod timing;

pub use cost::{comm_cost, projected_counts, CostReport, PartyCost, ProjectedCounts};
pub use message::{
    byte_size, ClearBid, ClearNetwork, CommLog, Message, MessageKind, Payload, AGENT,
    BYTES_PER_SCALAR, HEADER_BYTES, MARKET,
};
pub use party::{ClearingAgent, Party, Role};
pub use scan::{private_arrays, privacy_scan};
pub use timing::{runtime_trial, runtime_trial_with, TimingReport, TimingRow};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ed::{build_ed_blocks, ClearedMarket, EdError, MarketSystem};
use crate::lp::{LpError, SolverConfig};
use crate::privacy::{leakage_audit, transformed_shape, AuditReport, EncryptedSubmission, MaskConfig, PrivacyError};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Model(#[from] EdError),
    #[error(transparent)]
    Privacy(#[from] PrivacyError),
    #[error(transparent)]
    Solver(#[from] LpError),
    #[error("the market program is infeasible")]
    Infeasible,
    #[error("the market program is unbounded")]
    Unbounded,
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Clear,
    Masked,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Clear => "clear",
            Mode::Masked => "masked",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clear" => Ok(Mode::Clear),
            "masked" => Ok(Mode::Masked),
            other => Err(format!("unknown mode {other:?}, expected clear or masked")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RoundConfig {
    pub solver: SolverConfig,
    pub mask: MaskConfig,
    /// Scan masked submissions for raw private rows before solving.
    pub scan: bool,
}

impl RoundConfig {
    pub fn checked() -> Self {
        Self {
            scan: true,
            ..Self::default()
        }
    }
}

fn inbox<'a>(log: &'a CommLog, receiver: &str, kind: MessageKind) -> Vec<&'a Message> {
    log.messages
        .iter()
        .filter(|m| m.receiver == receiver && m.kind == kind)
        .collect()
}

/// Runs one round with the privacy scan enabled.
pub fn run_market_round(
    system: &MarketSystem,
    seed: u64,
    mode: Mode,
) -> Result<(ClearedMarket, CommLog), ProtocolError> {
    run_market_round_with(system, seed, mode, &RoundConfig::checked())
}

pub fn run_market_round_with(
    system: &MarketSystem,
    seed: u64,
    mode: Mode,
    cfg: &RoundConfig,
) -> Result<(ClearedMarket, CommLog), ProtocolError> {
    let blocks = build_ed_blocks(system)?;
    let mut parties = Party::from_system(system, &blocks, seed);
    let mut agent = ClearingAgent::new(cfg.solver.clone());
    let mut log = CommLog::default();
    let iso = parties.len() - 1;

    let objective = match mode {
        Mode::Clear => {
            for p in &parties {
                log.push(p.clear_submission());
            }
            agent.solve_clear(&inbox(&log, AGENT, MessageKind::Submission))?
        }
        Mode::Masked => {
            // Refuse before any party draws keys for a program the agent cannot hold.
            transformed_shape(&blocks).check(&cfg.solver)?;
            for p in parties.iter_mut() {
                p.generate_keys(&cfg.mask)?;
            }
            for p in &parties[..iso] {
                for m in p.entity_submissions()? {
                    log.push(m);
                }
            }
            let m = parties[iso].iso_submission(&inbox(&log, "ISO", MessageKind::Submission))?;
            log.push(m);
            if cfg.scan {
                privacy_scan(&log, &blocks)?;
            }
            agent.solve_masked(&inbox(&log, AGENT, MessageKind::Submission))?
        }
    };

    for m in agent.slices(&parties)? {
        let p = parties
            .iter_mut()
            .find(|p| p.id == m.receiver)
            .expect("slice addressed to a party");
        p.receive(&m)?;
        log.push(m);
    }
    for p in &parties {
        log.push(p.publication());
    }
    log.push(Message::new(
        AGENT,
        MARKET,
        MessageKind::RecoveredPublication,
        Payload::Published { values: vec![objective] },
    ));

    let n_gencos = blocks.gencos.len();
    let ent: Vec<Vec<f64>> = parties[..iso].iter().map(|p| p.recovered().to_vec()).collect();
    let market = ClearedMarket::from_parts(
        system,
        &blocks,
        &ent[..n_gencos],
        &ent[n_gencos..],
        parties[iso].recovered(),
        parties[iso].lmp().to_vec(),
    )?;
    Ok((market, log))
}

/// Leakage audit of every party that submitted in a masked round, using what
/// it published afterwards.
pub fn audit_round(log: &CommLog) -> Vec<AuditReport> {
    let mut owners: Vec<&str> = Vec::new();
    for m in log.of_kind(MessageKind::Submission) {
        if !owners.contains(&m.sender.as_str()) {
            owners.push(&m.sender);
        }
    }
    owners
        .into_iter()
        .filter_map(|owner| {
            let subs: Vec<&EncryptedSubmission> = log
                .of_kind(MessageKind::Submission)
                .filter(|m| m.sender == owner)
                .filter_map(|m| match &m.payload {
                    Payload::Encrypted(s) => Some(s),
                    _ => None,
                })
                .collect();
            if subs.is_empty() {
                return None;
            }
            let published = log
                .of_kind(MessageKind::RecoveredPublication)
                .find(|m| m.sender == owner)
                .and_then(|m| match &m.payload {
                    Payload::Published { values } => Some(values.as_slice()),
                    _ => None,
                });
            // The ISO's publication is prices and angles, not a masked dispatch.
            let published = if owner == "ISO" { None } else { published };
            Some(leakage_audit(&subs, published))
        })
        .collect()
}
