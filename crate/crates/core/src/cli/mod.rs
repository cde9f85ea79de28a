//! Command-line driver: `solve`, `compare`, `gen`, `audit`.
//!
//! Exit codes: 0 optimal, 1 input or usage error, 2 infeasible,
//! 3 unbounded, 4 solver failure (numerical trouble or a problem too large
//! for the dense solver).

pub mod casefile;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::ed::{gen_synthetic_with, EdError, MarketSystem, SyntheticConfig};
use crate::protocol::{audit_round, comm_cost, run_market_round, Mode, ProtocolError};

pub use casefile::{parse_case, read_case, to_case_string, CaseError, CaseFile};
use report::{fixed, CommSummary, CompareRow, Fixed, SolveReport, Timing};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_UNBOUNDED: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "maskdispatch", version, about = "Clear a DC dispatch market, in the clear or under masking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Clear one case and write a JSON report.
    Solve {
        case: PathBuf,
        #[arg(long, default_value = "clear")]
        mode: Mode,
        #[arg(long, env = "MASKDISPATCH_SEED", default_value_t = 42)]
        seed: u64,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One clear round against masked rounds on consecutive seeds, as CSV.
    Compare {
        case: PathBuf,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        /// First seed.
        #[arg(long, env = "MASKDISPATCH_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic case file.
    Gen {
        #[arg(long)]
        buses: usize,
        #[arg(long)]
        gencos: usize,
        #[arg(long)]
        lses: usize,
        #[arg(long, default_value_t = 1)]
        entity_size: usize,
        #[arg(long, default_value_t = 1)]
        hours: usize,
        #[arg(long, env = "MASKDISPATCH_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count what an observer of a masked round could solve for.
    Audit {
        case: PathBuf,
        #[arg(long, env = "MASKDISPATCH_SEED", default_value_t = 42)]
        seed: u64,
    },
}

struct Failure {
    code: i32,
    status: &'static str,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            status: "error",
            message: message.into(),
        }
    }
}

impl From<CaseError> for Failure {
    fn from(e: CaseError) -> Self {
        Failure::input(e.to_string())
    }
}

fn classify(e: &ProtocolError, system: &MarketSystem) -> Failure {
    match e {
        ProtocolError::Infeasible | ProtocolError::Model(EdError::Infeasible { .. }) => {
            // Name the binding family when the direct solve can tell.
            let message = match crate::ed::solve_clear(system) {
                Err(EdError::Infeasible { family }) => format!("infeasible: {family} cannot be met"),
                _ => e.to_string(),
            };
            Failure {
                code: EXIT_INFEASIBLE,
                status: "infeasible",
                message,
            }
        }
        ProtocolError::Unbounded | ProtocolError::Model(EdError::Unbounded) => Failure {
            code: EXIT_UNBOUNDED,
            status: "unbounded",
            message: e.to_string(),
        },
        ProtocolError::Solver(_) | ProtocolError::Model(EdError::Solver(_)) => Failure {
            code: EXIT_SOLVER,
            status: "solver-error",
            message: e.to_string(),
        },
        _ => Failure::input(e.to_string()),
    }
}

fn write_out(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(format!("cannot write output: {e}"))),
    }
}

fn cmd_solve(case: &Path, mode: Mode, seed: u64, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let system = read_case(case)?;
    let start = Instant::now();
    let result = run_market_round(&system, seed, mode);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let (report, failure) = match result {
        Ok((market, log)) => {
            let mut r = SolveReport::optimal(&system, &market, &mode.to_string(), seed);
            if mode == Mode::Masked {
                r.comm = Some(CommSummary::from(&comm_cost(&log)));
            }
            r.timing = Some(Timing { solve_ms: Fixed(ms) });
            (r, None)
        }
        Err(e) => {
            let f = classify(&e, &system);
            (SolveReport::failed(&system, &mode.to_string(), seed, f.status, f.message.clone()), Some(f))
        }
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_out(path, &text, out)?;
    failure.map_or(Ok(()), Err)
}

fn cmd_compare(case: &Path, seeds: usize, first: u64, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    if seeds == 0 {
        return Err(Failure::input("--seeds must be at least 1"));
    }
    let system = read_case(case)?;
    let start = Instant::now();
    let (clear, _) = run_market_round(&system, first, Mode::Clear).map_err(|e| classify(&e, &system))?;
    let t_clear = start.elapsed().as_secs_f64() * 1e3;
    let mut w = csv::Writer::from_writer(Vec::new());
    for seed in first..first + seeds as u64 {
        let start = Instant::now();
        let (masked, log) = run_market_round(&system, seed, Mode::Masked).map_err(|e| classify(&e, &system))?;
        let t_masked = start.elapsed().as_secs_f64() * 1e3;
        w.serialize(CompareRow {
            seed,
            obj_clear: fixed(clear.objective),
            obj_masked: fixed(masked.objective),
            max_dispatch_diff: fixed(clear.dispatch.max_abs_diff(&masked.dispatch)),
            max_lmp_diff: fixed(clear.max_lmp_diff(&masked)),
            t_clear_ms: fixed(t_clear),
            t_masked_ms: fixed(t_masked),
            scalars_up: log.up_scalars(),
            scalars_down: log.down_scalars(),
            ratio: fixed(t_masked / t_clear),
        })
        .map_err(|e| Failure::input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::input(e.to_string()))?;
    write_out(path, &String::from_utf8(bytes).expect("csv is utf-8"), out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    buses: usize,
    gencos: usize,
    lses: usize,
    entity_size: usize,
    hours: usize,
    seed: u64,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let cfg = SyntheticConfig::new(buses, gencos, lses, entity_size, hours, seed);
    let system = gen_synthetic_with(&cfg).map_err(|e| Failure::input(e.to_string()))?;
    write_out(path, &to_case_string(&system), out)
}

fn cmd_audit(case: &Path, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let system = read_case(case)?;
    let (_, log) = run_market_round(&system, seed, Mode::Masked).map_err(|e| classify(&e, &system))?;
    let mut text = String::new();
    for r in audit_round(&log) {
        text.push_str(&format!("{}  {}\n", r.owner, r.linear_line()));
        text.push_str(&format!("{}  {}\n", r.owner, r.bilinear_line()));
    }
    write_out(None, &text, out)
}

/// Runs the driver on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve { case, mode, seed, out: p } => cmd_solve(case, *mode, *seed, p.as_deref(), out),
        Command::Compare { case, seeds, seed, out: p } => cmd_compare(case, *seeds, *seed, p.as_deref(), out),
        Command::Gen {
            buses,
            gencos,
            lses,
            entity_size,
            hours,
            seed,
            out: p,
        } => cmd_gen(*buses, *gencos, *lses, *entity_size, *hours, *seed, p.as_deref(), out),
        Command::Audit { case, seed } => cmd_audit(case, *seed, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("maskdispatch").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn missing_file_names_the_path() {
        let (code, _, err) = call(&["solve", "/nonexistent/x.case"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("/nonexistent/x.case"), "{err}");
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&["solve"]).0, EXIT_INPUT);
        assert_eq!(call(&["solve", "a", "--mode", "secret"]).0, EXIT_INPUT);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn gen_is_deterministic_and_parses() {
        let (c1, a, _) = call(&["gen", "--buses", "3", "--gencos", "2", "--lses", "1", "--seed", "7"]);
        let (c2, b, _) = call(&["gen", "--buses", "3", "--gencos", "2", "--lses", "1", "--seed", "7"]);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b);
        assert!(parse_case(&a, "gen").is_ok());
        assert_eq!(call(&["gen", "--buses", "0", "--gencos", "1", "--lses", "1"]).0, EXIT_INPUT);
    }
}
