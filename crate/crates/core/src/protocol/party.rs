use crate::ed::{
    build_ed_blocks, EdBlocks, EntityBlock, EntityKind, Generator, IsoBlock, Load, MarketSystem,
};
use crate::lp::{solve_lp, LpSolution, LpStatus, SolverConfig};
use crate::privacy::{
    build_transformed_ed, mask_entity, mask_iso, party_stream, recover_lmp, unmask_slice,
    EncryptedSubmission, EntityKeys, IncidenceSubmission, IsoKeys, MaskConfig, TransformedSpans,
};

use super::message::{ClearBid, ClearNetwork, Message, MessageKind, Payload, AGENT, MARKET};
use super::ProtocolError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Genco,
    Lse,
    Iso,
}

impl From<EntityKind> for Role {
    fn from(k: EntityKind) -> Self {
        match k {
            EntityKind::Genco => Role::Genco,
            EntityKind::Lse => Role::Lse,
        }
    }
}

#[derive(Clone, Debug)]
enum Private {
    Entity {
        block: EntityBlock,
        generators: Vec<Generator>,
        loads: Vec<Load>,
    },
    Network {
        block: IsoBlock,
        network: ClearNetwork,
    },
}

#[derive(Clone, Debug)]
enum Keys {
    Entity(EntityKeys),
    Iso(IsoKeys),
}

/// A market participant. Its data and keys never leave the object except
/// through the messages it builds.
#[derive(Clone, Debug)]
pub struct Party {
    pub id: String,
    pub role: Role,
    index: usize,
    private: Private,
    keys: Option<Keys>,
    seed: u64,
    recovered: Vec<f64>,
    lmp: Vec<f64>,
}

impl Party {
    /// One party per GENCO, then per LSE, then the ISO, each holding its
    /// slice of the system.
    pub fn from_system(system: &MarketSystem, blocks: &EdBlocks, seed: u64) -> Vec<Party> {
        let mut out = Vec::new();
        for (list, kind) in [(&blocks.gencos, EntityKind::Genco), (&blocks.lses, EntityKind::Lse)] {
            for (index, b) in list.iter().enumerate() {
                out.push(Party {
                    id: b.owner.clone(),
                    role: kind.into(),
                    index,
                    private: Private::Entity {
                        block: b.clone(),
                        generators: system.generators_of(&b.owner).map(|g| system.generators[g].clone()).collect(),
                        loads: system.loads_of(&b.owner).map(|l| system.loads[l].clone()).collect(),
                    },
                    keys: None,
                    seed,
                    recovered: Vec::new(),
                    lmp: Vec::new(),
                });
            }
        }
        out.push(Party {
            id: "ISO".into(),
            role: Role::Iso,
            index: 0,
            private: Private::Network {
                block: blocks.iso.clone(),
                network: ClearNetwork {
                    name: system.name.clone(),
                    horizon: system.horizon,
                    reference_bus: system.reference_bus,
                    buses: system.buses.clone(),
                    lines: system.lines.clone(),
                },
            },
            keys: None,
            seed,
            recovered: Vec::new(),
            lmp: Vec::new(),
        });
        out
    }

    pub fn kind(&self) -> Option<EntityKind> {
        match self.role {
            Role::Genco => Some(EntityKind::Genco),
            Role::Lse => Some(EntityKind::Lse),
            Role::Iso => None,
        }
    }

    /// Draws this party's keys from its own stream of the seed.
    pub fn generate_keys(&mut self, cfg: &MaskConfig) -> Result<(), ProtocolError> {
        let keys = match &self.private {
            Private::Entity { block, .. } => Keys::Entity(EntityKeys::generate(
                block.num_vars(),
                block.num_rows(),
                self.seed,
                party_stream(self.kind(), self.index),
                cfg,
            )?),
            Private::Network { block, .. } => Keys::Iso(IsoKeys::generate(
                block.num_angles(),
                block.num_line_rows(),
                block.num_balance_rows(),
                self.seed,
                cfg,
            )?),
        };
        self.keys = Some(keys);
        Ok(())
    }

    fn no_keys(&self) -> ProtocolError {
        ProtocolError::ProtocolViolation(format!("{} has no keys", self.id))
    }

    /// Masked bids to the agent and masked incidence to the ISO.
    pub fn entity_submissions(&self) -> Result<Vec<Message>, ProtocolError> {
        let (Private::Entity { block, .. }, Some(Keys::Entity(k))) = (&self.private, &self.keys) else {
            return Err(self.no_keys());
        };
        let (e, i) = mask_entity(block, k)?;
        Ok(vec![
            Message::new(&self.id, AGENT, MessageKind::Submission, Payload::Encrypted(EncryptedSubmission::Entity(e))),
            Message::new(&self.id, "ISO", MessageKind::Submission, Payload::Encrypted(EncryptedSubmission::Incidence(i))),
        ])
    }

    /// The ISO's masked network, built from the incidences addressed to it.
    pub fn iso_submission(&self, inbox: &[&Message]) -> Result<Message, ProtocolError> {
        let (Private::Network { block, .. }, Some(Keys::Iso(k))) = (&self.private, &self.keys) else {
            return Err(self.no_keys());
        };
        let incidences: Vec<IncidenceSubmission> = inbox
            .iter()
            .filter_map(|m| match &m.payload {
                Payload::Encrypted(EncryptedSubmission::Incidence(i)) => Some(i.clone()),
                _ => None,
            })
            .collect();
        let s = mask_iso(block, k, &incidences)?;
        Ok(Message::new(&self.id, AGENT, MessageKind::Submission, Payload::Encrypted(EncryptedSubmission::Iso(s))))
    }

    /// Raw data, used only in clear mode.
    pub fn clear_submission(&self) -> Message {
        let payload = match &self.private {
            Private::Entity { generators, loads, .. } => Payload::ClearBid(ClearBid {
                owner: self.id.clone(),
                generators: generators.clone(),
                loads: loads.clone(),
            }),
            Private::Network { network, .. } => Payload::ClearNetwork(network.clone()),
        };
        Message::new(&self.id, AGENT, MessageKind::Submission, payload)
    }

    /// Unmasks the slice returned by the agent. Without keys the slice is
    /// taken as already in the clear.
    pub fn receive(&mut self, slice: &Message) -> Result<(), ProtocolError> {
        let Payload::Slice { primal, dual } = &slice.payload else {
            return Err(unexpected(&self.id, slice));
        };
        match &self.keys {
            Some(Keys::Entity(k)) => self.recovered = unmask_slice(&k.y, primal)?,
            Some(Keys::Iso(k)) => {
                self.recovered = unmask_slice(&k.y_theta, primal)?;
                self.lmp = recover_lmp(&k.x_b, dual)?;
            }
            None => {
                self.recovered = primal.clone();
                self.lmp = dual.clone();
            }
        }
        Ok(())
    }

    /// Dispatch for an entity; angles followed by LMPs for the ISO.
    pub fn publication(&self) -> Message {
        let mut values = self.recovered.clone();
        values.extend(&self.lmp);
        Message::new(&self.id, MARKET, MessageKind::RecoveredPublication, Payload::Published { values })
    }

    pub fn recovered(&self) -> &[f64] {
        &self.recovered
    }

    pub fn lmp(&self) -> &[f64] {
        &self.lmp
    }
}

fn unexpected(who: &str, m: &Message) -> ProtocolError {
    ProtocolError::ProtocolViolation(format!(
        "{who} received an unexpected {:?} message from {}",
        m.kind, m.sender
    ))
}

/// Where each party's slice sits in the solved program.
#[derive(Clone, Debug)]
struct Slices {
    entities: Vec<(String, std::ops::Range<usize>)>,
    angles: std::ops::Range<usize>,
    balance: std::ops::Range<usize>,
}

impl Slices {
    fn from_transformed(s: &TransformedSpans) -> Self {
        Self {
            entities: s.entities().map(|e| (e.owner.clone(), e.cols.clone())).collect(),
            angles: s.angle_cols.clone(),
            balance: s.balance_rows.clone(),
        }
    }
}

/// Solver of the program assembled from whatever it receives. Holds no keys.
#[derive(Debug, Default)]
pub struct ClearingAgent {
    pub solver: SolverConfig,
    solution: Option<LpSolution>,
    slices: Option<Slices>,
}

impl ClearingAgent {
    pub fn new(solver: SolverConfig) -> Self {
        Self {
            solver,
            ..Self::default()
        }
    }

    fn finish(&mut self, sol: LpSolution, slices: Slices) -> Result<f64, ProtocolError> {
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(ProtocolError::Infeasible),
            LpStatus::Unbounded => return Err(ProtocolError::Unbounded),
        }
        let obj = sol.objective;
        self.solution = Some(sol);
        self.slices = Some(slices);
        Ok(obj)
    }

    /// Assembles and solves the masked program. Returns its objective.
    pub fn solve_masked(&mut self, inbox: &[&Message]) -> Result<f64, ProtocolError> {
        let mut subs = Vec::new();
        for m in inbox {
            match &m.payload {
                Payload::Encrypted(s) => subs.push(s.clone()),
                _ => return Err(unexpected(AGENT, m)),
            }
        }
        let t = build_transformed_ed(&subs)?;
        let sol = solve_lp(&t.lp, &self.solver)?;
        self.finish(sol, Slices::from_transformed(&t.spans))
    }

    /// Rebuilds the system from raw bids and solves it directly.
    pub fn solve_clear(&mut self, inbox: &[&Message]) -> Result<f64, ProtocolError> {
        let mut net = None;
        let mut gencos = Vec::new();
        let mut lses = Vec::new();
        for m in inbox {
            match &m.payload {
                Payload::ClearNetwork(n) => net = Some(n.clone()),
                Payload::ClearBid(b) if !b.generators.is_empty() => gencos.push(b.clone()),
                Payload::ClearBid(b) => lses.push(b.clone()),
                _ => return Err(unexpected(AGENT, m)),
            }
        }
        let net = net.ok_or_else(|| ProtocolError::ProtocolViolation("no network submission".into()))?;
        let system = MarketSystem {
            name: net.name,
            horizon: net.horizon,
            reference_bus: net.reference_bus,
            buses: net.buses,
            lines: net.lines,
            generators: gencos.iter().flat_map(|b| b.generators.clone()).collect(),
            loads: lses.iter().flat_map(|b| b.loads.clone()).collect(),
        };
        let blocks = build_ed_blocks(&system)?;
        blocks.lp_shape().check(&self.solver)?;
        let layout = blocks.layout();
        let lp = blocks.to_lp(&system);
        let sol = solve_lp(&lp, &self.solver)?;
        let slices = Slices {
            entities: blocks
                .entities()
                .zip(layout.genco_cols.iter().chain(&layout.lse_cols))
                .map(|(b, c)| (b.owner.clone(), c.clone()))
                .collect(),
            angles: layout.angle_cols.clone(),
            balance: 0..lp.num_eq(),
        };
        // The agent speaks in prices; the clear program's duals are negated LMPs.
        let mut sol = sol;
        sol.dual_eq.iter_mut().for_each(|v| *v = -*v);
        self.finish(sol, slices)
    }

    /// One slice message per party.
    pub fn slices(&self, parties: &[Party]) -> Result<Vec<Message>, ProtocolError> {
        let (Some(sol), Some(sl)) = (&self.solution, &self.slices) else {
            return Err(ProtocolError::ProtocolViolation("agent has not solved".into()));
        };
        let mut out = Vec::new();
        for p in parties {
            let payload = if p.role == Role::Iso {
                Payload::Slice {
                    primal: sol.x[sl.angles.clone()].to_vec(),
                    dual: sol.dual_eq[sl.balance.clone()].to_vec(),
                }
            } else {
                let (_, cols) = sl.entities.iter().find(|(o, _)| *o == p.id).ok_or_else(|| {
                    ProtocolError::ProtocolViolation(format!("no slice for {}", p.id))
                })?;
                Payload::Slice {
                    primal: sol.x[cols.clone()].to_vec(),
                    dual: Vec::new(),
                }
            };
            out.push(Message::new(AGENT, &p.id, MessageKind::TransformedSolutionSlice, payload));
        }
        Ok(out)
    }
}
