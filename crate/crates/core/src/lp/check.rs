use serde::{Deserialize, Serialize};

use super::{LpError, LpProblem, SignClass};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowViolation {
    pub row: usize,
    pub label: String,
    pub amount: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub max_eq_residual: f64,
    pub max_in_violation: f64,
    pub worst_eq: Option<RowViolation>,
    pub worst_in: Option<RowViolation>,
    /// Non-negative variables that are below `-tol`.
    pub sign_violations: Vec<usize>,
    pub objective: f64,
    pub feasible: bool,
}

/// Evaluates how far `x` is from satisfying every constraint of `problem`.
pub fn check_point(problem: &LpProblem, x: &[f64], tol: f64) -> Result<FeasibilityReport, LpError> {
    problem.validate()?;
    if x.len() != problem.num_vars() {
        return Err(LpError::DimensionMismatch(format!(
            "point has {} entries, problem has {} variables",
            x.len(),
            problem.num_vars()
        )));
    }
    let mut worst_eq: Option<RowViolation> = None;
    for i in 0..problem.num_eq() {
        let ax: f64 = problem.a_eq.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
        let r = (ax - problem.b_eq[i]).abs();
        if worst_eq.as_ref().is_none_or(|w| r > w.amount) {
            worst_eq = Some(RowViolation {
                row: i,
                label: problem.eq_label(i),
                amount: r,
            });
        }
    }
    let mut worst_in: Option<RowViolation> = None;
    for i in 0..problem.num_in() {
        let ax: f64 = problem.a_in.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
        let v = (ax - problem.b_in[i]).max(0.0);
        if worst_in.as_ref().is_none_or(|w| v > w.amount) {
            worst_in = Some(RowViolation {
                row: i,
                label: problem.in_label(i),
                amount: v,
            });
        }
    }
    let sign_violations: Vec<usize> = problem
        .sign
        .iter()
        .enumerate()
        .filter(|(j, s)| **s == SignClass::NonNegative && x[*j] < -tol)
        .map(|(j, _)| j)
        .collect();
    let max_eq_residual = worst_eq.as_ref().map_or(0.0, |w| w.amount);
    let max_in_violation = worst_in.as_ref().map_or(0.0, |w| w.amount);
    Ok(FeasibilityReport {
        max_eq_residual,
        max_in_violation,
        worst_eq,
        worst_in,
        feasible: max_eq_residual <= tol && max_in_violation <= tol && sign_violations.is_empty(),
        sign_violations,
        objective: problem.objective_at(x),
    })
}
