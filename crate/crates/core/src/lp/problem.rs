use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::LpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Domain of a single decision variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignClass {
    Free,
    NonNegative,
}

/// Dense linear program
///
/// ```text
/// min|max  cᵀx
///   s.t.   A_eq x  = b_eq
///          A_in x <= b_in
///          x_j free or x_j >= 0
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub cost: Vec<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: Vec<f64>,
    pub a_in: DMatrix<f64>,
    pub b_in: Vec<f64>,
    pub sign: Vec<SignClass>,
    pub var_labels: Option<Vec<String>>,
    pub eq_labels: Option<Vec<String>>,
    pub in_labels: Option<Vec<String>>,
}

impl LpProblem {
    /// A problem with `cost.len()` free variables and no constraints.
    pub fn new(sense: Sense, cost: Vec<f64>) -> Self {
        let n = cost.len();
        Self {
            sense,
            cost,
            a_eq: DMatrix::zeros(0, n),
            b_eq: Vec::new(),
            a_in: DMatrix::zeros(0, n),
            b_in: Vec::new(),
            sign: vec![SignClass::Free; n],
            var_labels: None,
            eq_labels: None,
            in_labels: None,
        }
    }

    pub fn with_equalities(mut self, a: DMatrix<f64>, b: Vec<f64>) -> Self {
        self.a_eq = a;
        self.b_eq = b;
        self
    }

    pub fn with_inequalities(mut self, a: DMatrix<f64>, b: Vec<f64>) -> Self {
        self.a_in = a;
        self.b_in = b;
        self
    }

    pub fn with_signs(mut self, sign: Vec<SignClass>) -> Self {
        self.sign = sign;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_eq(&self) -> usize {
        self.b_eq.len()
    }

    pub fn num_in(&self) -> usize {
        self.b_in.len()
    }

    /// Label of inequality row `i`, or a positional fallback.
    pub fn in_label(&self, i: usize) -> String {
        self.in_labels
            .as_ref()
            .and_then(|l| l.get(i).cloned())
            .unwrap_or_else(|| format!("in[{i}]"))
    }

    pub fn eq_label(&self, i: usize) -> String {
        self.eq_labels
            .as_ref()
            .and_then(|l| l.get(i).cloned())
            .unwrap_or_else(|| format!("eq[{i}]"))
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let shape = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(LpError::DimensionMismatch(format!(
                    "{what}: expected {want}, found {got}"
                )))
            }
        };
        shape("equality matrix columns", self.a_eq.ncols(), n)?;
        shape("inequality matrix columns", self.a_in.ncols(), n)?;
        shape("equality rhs length", self.b_eq.len(), self.a_eq.nrows())?;
        shape("inequality rhs length", self.b_in.len(), self.a_in.nrows())?;
        shape("sign class count", self.sign.len(), n)?;
        if let Some(l) = &self.var_labels {
            shape("variable labels", l.len(), n)?;
        }
        if let Some(l) = &self.eq_labels {
            shape("equality labels", l.len(), self.num_eq())?;
        }
        if let Some(l) = &self.in_labels {
            shape("inequality labels", l.len(), self.num_in())?;
        }
        let finite = self
            .cost
            .iter()
            .chain(&self.b_eq)
            .chain(&self.b_in)
            .chain(self.a_eq.iter())
            .chain(self.a_in.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(LpError::Invalid("non-finite coefficient".into()));
        }
        Ok(())
    }
}
