//! Process-wide record of the worst optimality certificate returned so far.

use std::sync::atomic::{AtomicU64, Ordering};

use super::Certificate;

static SOLVES: AtomicU64 = AtomicU64::new(0);
static GAP: AtomicU64 = AtomicU64::new(0);
static COMP: AtomicU64 = AtomicU64::new(0);
static GAP_REL: AtomicU64 = AtomicU64::new(0);
static COMP_REL: AtomicU64 = AtomicU64::new(0);

// Bit patterns of nonnegative floats order like the floats themselves.
fn raise(cell: &AtomicU64, v: f64) {
    cell.fetch_max(v.max(0.0).to_bits(), Ordering::Relaxed);
}

fn read(cell: &AtomicU64) -> f64 {
    f64::from_bits(cell.load(Ordering::Relaxed))
}

pub(super) fn record(cert: &Certificate, objective: f64) {
    let scale = 1.0 + objective.abs();
    SOLVES.fetch_add(1, Ordering::Relaxed);
    raise(&GAP, cert.duality_gap);
    raise(&COMP, cert.complementarity);
    raise(&GAP_REL, cert.duality_gap / scale);
    raise(&COMP_REL, cert.complementarity / scale);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WatermarkReport {
    /// Optimal solves so far in this process.
    pub solves: u64,
    pub max_gap: f64,
    pub max_complementarity: f64,
    /// Both relative to `1 + |objective|`.
    pub max_relative_gap: f64,
    pub max_relative_complementarity: f64,
}

pub fn certificate_watermark() -> WatermarkReport {
    WatermarkReport {
        solves: SOLVES.load(Ordering::Relaxed),
        max_gap: read(&GAP),
        max_complementarity: read(&COMP),
        max_relative_gap: read(&GAP_REL),
        max_relative_complementarity: read(&COMP_REL),
    }
}
