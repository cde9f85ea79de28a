use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ed::MarketSystem;

use super::{run_market_round_with, Mode, ProtocolError, RoundConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub seed: u64,
    pub masked_ms: f64,
    pub clear_ms: f64,
    pub ratio: f64,
    pub objective: f64,
}

/// Wall-clock of masked rounds against one clear baseline. Spread is the
/// population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub clear_ms: f64,
    pub clear_objective: f64,
    pub rows: Vec<TimingRow>,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl TimingReport {
    pub fn from_rows(clear_ms: f64, clear_objective: f64, rows: Vec<TimingRow>) -> Self {
        let n = rows.len().max(1) as f64;
        let mean = rows.iter().map(|r| r.masked_ms).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r.masked_ms - mean).powi(2)).sum::<f64>() / n;
        Self {
            clear_ms,
            clear_objective,
            mean_ms: mean,
            std_ms: var.sqrt(),
            min_ms: rows.iter().map(|r| r.masked_ms).fold(f64::INFINITY, f64::min),
            max_ms: rows.iter().map(|r| r.masked_ms).fold(f64::NEG_INFINITY, f64::max),
            rows,
        }
    }

    pub fn mean_ratio(&self) -> f64 {
        self.mean_ms / self.clear_ms
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(self)
    }
}

fn timed(system: &MarketSystem, seed: u64, mode: Mode, cfg: &RoundConfig) -> Result<(f64, f64), ProtocolError> {
    let start = Instant::now();
    let (m, _) = run_market_round_with(system, seed, mode, cfg)?;
    Ok((start.elapsed().as_secs_f64() * 1e3, m.objective))
}

pub fn runtime_trial(system: &MarketSystem, seeds: &[u64]) -> Result<TimingReport, ProtocolError> {
    runtime_trial_with(system, seeds, &RoundConfig::default())
}

pub fn runtime_trial_with(
    system: &MarketSystem,
    seeds: &[u64],
    cfg: &RoundConfig,
) -> Result<TimingReport, ProtocolError> {
    if seeds.is_empty() {
        return Err(ProtocolError::ProtocolViolation("a trial needs at least one seed".into()));
    }
    let (clear_ms, clear_obj) = timed(system, 0, Mode::Clear, cfg)?;
    let mut rows = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let (masked_ms, objective) = timed(system, seed, Mode::Masked, cfg)?;
        rows.push(TimingRow {
            seed,
            masked_ms,
            clear_ms,
            ratio: masked_ms / clear_ms,
            objective,
        });
    }
    Ok(TimingReport::from_rows(clear_ms, clear_obj, rows))
}
