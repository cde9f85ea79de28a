use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ed::{Bus, Generator, Line, Load};
use crate::privacy::EncryptedSubmission;

/// Bytes per transmitted scalar (f64, little-endian).
pub const BYTES_PER_SCALAR: usize = 8;
/// Fixed framing cost of every message.
pub const HEADER_BYTES: usize = 32;

/// Name of the clearing agent in sender/receiver fields.
pub const AGENT: &str = "AGENT";
/// Receiver of publications.
pub const MARKET: &str = "MARKET";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MessageKind {
    Submission,
    TransformedSolutionSlice,
    RecoveredPublication,
}

/// Raw offers or bids of one entity, sent only in clear mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClearBid {
    pub owner: String,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
}

impl ClearBid {
    /// Prices, segment bounds and ramp limits.
    pub fn scalar_count(&self) -> usize {
        let g: usize = self
            .generators
            .iter()
            .map(|g| 3 * g.segments.len() + g.ramp_up.is_some() as usize + g.ramp_down.is_some() as usize)
            .sum();
        let l: usize = self.loads.iter().map(|l| 3 * l.segments.len()).sum();
        g + l
    }
}

/// The ISO's network model and asset registry, sent only in clear mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClearNetwork {
    pub name: String,
    pub horizon: usize,
    pub reference_bus: u32,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
}

impl ClearNetwork {
    /// Reference bus, bus ids, and endpoints/reactance/capacity per line.
    pub fn scalar_count(&self) -> usize {
        1 + self.buses.len() + 4 * self.lines.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    Encrypted(EncryptedSubmission),
    ClearBid(ClearBid),
    ClearNetwork(ClearNetwork),
    /// A contiguous slice of the solved program: primal columns for an
    /// entity, angle columns followed by balance duals for the ISO.
    Slice { primal: Vec<f64>, dual: Vec<f64> },
    /// Values a party makes public after recovery.
    Published { values: Vec<f64> },
}

impl Payload {
    pub fn scalar_count(&self) -> usize {
        match self {
            Payload::Encrypted(s) => s.scalar_count(),
            Payload::ClearBid(b) => b.scalar_count(),
            Payload::ClearNetwork(n) => n.scalar_count(),
            Payload::Slice { primal, dual } => primal.len() + dual.len(),
            Payload::Published { values } => values.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub sender: String,
    pub receiver: String,
    pub kind: MessageKind,
    pub payload: Payload,
    pub scalar_count: usize,
    pub byte_size: usize,
}

impl Message {
    pub fn new(sender: &str, receiver: &str, kind: MessageKind, payload: Payload) -> Self {
        let scalar_count = payload.scalar_count();
        Self {
            sender: sender.to_string(),
            receiver: receiver.to_string(),
            kind,
            payload,
            scalar_count,
            byte_size: byte_size(scalar_count),
        }
    }
}

pub fn byte_size(scalars: usize) -> usize {
    scalars * BYTES_PER_SCALAR + HEADER_BYTES
}

/// Ordered record of every message of a round.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CommLog {
    pub messages: Vec<Message>,
}

/// One row of the CSV export.
#[derive(Serialize)]
struct LogRow<'a> {
    index: usize,
    sender: &'a str,
    receiver: &'a str,
    kind: MessageKind,
    scalar_count: usize,
    byte_size: usize,
}

impl CommLog {
    pub fn push(&mut self, m: Message) {
        self.messages.push(m);
    }

    pub fn of_kind(&self, kind: MessageKind) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(move |m| m.kind == kind)
    }

    /// Submissions from every party, whether addressed to the agent or the ISO.
    pub fn up_scalars(&self) -> usize {
        self.of_kind(MessageKind::Submission).map(|m| m.scalar_count).sum()
    }

    pub fn up_bytes(&self) -> usize {
        self.of_kind(MessageKind::Submission).map(|m| m.byte_size).sum()
    }

    /// Solution slices returned by the agent.
    pub fn down_scalars(&self) -> usize {
        self.of_kind(MessageKind::TransformedSolutionSlice)
            .map(|m| m.scalar_count)
            .sum()
    }

    pub fn down_bytes(&self) -> usize {
        self.of_kind(MessageKind::TransformedSolutionSlice)
            .map(|m| m.byte_size)
            .sum()
    }

    /// Message metadata as CSV, one row per message, payloads omitted.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        for (index, m) in self.messages.iter().enumerate() {
            out.serialize(LogRow {
                index,
                sender: &m.sender,
                receiver: &m.receiver,
                kind: m.kind,
                scalar_count: m.scalar_count,
                byte_size: m.byte_size,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(self)
    }
}
