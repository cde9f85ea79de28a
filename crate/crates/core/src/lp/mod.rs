//! Dense linear programs and a two-phase simplex solver with dual extraction.

mod check;
mod problem;
mod simplex;
mod watermark;

pub use check::{check_point, FeasibilityReport, RowViolation};
pub use problem::{LpProblem, Sense, SignClass};
pub use simplex::{solve_lp, LpShape, SolverConfig};
pub use watermark::{certificate_watermark, WatermarkReport};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
    #[error("tableau of {rows}x{cols} needs {entries} entries, limit is {limit}")]
    TooLarge {
        rows: usize,
        cols: usize,
        entries: usize,
        limit: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Optimality evidence recomputed from the original data.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Largest equality residual or inequality/sign violation.
    pub primal_residual: f64,
    /// Largest violation of dual sign or stationarity conditions.
    pub dual_residual: f64,
    /// `|cᵀx − bᵀy|`.
    pub duality_gap: f64,
    /// Largest `|dual · slack|` over inequality rows and bounded variables.
    pub complementarity: f64,
}

impl Certificate {
    /// Evaluates the certificate for a candidate primal/dual pair. Duals
    /// follow the solver convention: `y = ∂objective / ∂rhs`.
    pub fn evaluate(p: &LpProblem, x: &[f64], dual_eq: &[f64], dual_in: &[f64]) -> Self {
        let max_sense = p.sense == Sense::Maximize;
        let mut primal = 0.0f64;
        for (i, b) in p.b_eq.iter().enumerate() {
            let ax: f64 = p.a_eq.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
            primal = primal.max((ax - b).abs());
        }
        let mut comp = 0.0f64;
        let mut dual = 0.0f64;
        for (i, b) in p.b_in.iter().enumerate() {
            let ax: f64 = p.a_in.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
            let slack = b - ax;
            primal = primal.max(-slack);
            comp = comp.max((dual_in[i] * slack).abs());
            let wrong_sign = if max_sense { -dual_in[i] } else { dual_in[i] };
            dual = dual.max(wrong_sign);
        }
        for (j, s) in p.sign.iter().enumerate() {
            let aty: f64 = p
                .a_eq
                .column(j)
                .iter()
                .zip(dual_eq)
                .chain(p.a_in.column(j).iter().zip(dual_in))
                .map(|(a, y)| a * y)
                .sum();
            let reduced = p.cost[j] - aty;
            match s {
                SignClass::Free => dual = dual.max(reduced.abs()),
                SignClass::NonNegative => {
                    primal = primal.max(-x[j]);
                    let wrong = if max_sense { reduced } else { -reduced };
                    dual = dual.max(wrong);
                    comp = comp.max((reduced * x[j]).abs());
                }
            }
        }
        let primal_obj = p.objective_at(x);
        let dual_obj: f64 = p
            .b_eq
            .iter()
            .zip(dual_eq)
            .chain(p.b_in.iter().zip(dual_in))
            .map(|(b, y)| b * y)
            .sum();
        Self {
            primal_residual: primal,
            dual_residual: dual,
            duality_gap: (primal_obj - dual_obj).abs(),
            complementarity: comp,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; empty unless optimal.
    pub x: Vec<f64>,
    /// `∂objective/∂b_eq` in the declared sense.
    pub dual_eq: Vec<f64>,
    /// `∂objective/∂b_in` in the declared sense: `<= 0` for minimization, `>= 0` for maximization.
    pub dual_in: Vec<f64>,
    /// NaN unless optimal.
    pub objective: f64,
    pub iterations: usize,
    pub certificate: Certificate,
}

impl LpSolution {
    fn without_point(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            x: Vec::new(),
            dual_eq: Vec::new(),
            dual_in: Vec::new(),
            objective: f64::NAN,
            iterations,
            certificate: Certificate::default(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
