//! DC economic-dispatch market model.

mod blocks;
mod clear;
pub mod fixtures;
mod synthetic;
mod system;

pub use blocks::{
    build_ed_blocks, EdBlocks, EdLayout, EntityBlock, EntityKind, Family, IsoBlock, VarIndex,
};
pub use clear::{
    line_flows, social_welfare, solve_clear, solve_clear_with, ClearedMarket, Dispatch,
};
pub use synthetic::{gen_synthetic, gen_synthetic_with, full_scale, SyntheticConfig};
pub use system::{Bus, Generator, Line, Load, MarketSystem, Segment};

use crate::lp::LpError;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EdError {
    #[error("invalid market system: {0}")]
    Invalid(String),
    #[error("network is islanded: buses {0:?} are not connected to the reference bus")]
    IslandedNetwork(Vec<u32>),
    #[error("market needs at least one generator and one load")]
    EmptyMarket,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("dispatch is infeasible; conflicting constraint family: {family}")]
    Infeasible { family: String },
    #[error("dispatch is unbounded")]
    Unbounded,
    #[error(transparent)]
    Solver(#[from] LpError),
}
