//! Small dense linear and mixed-integer programming.
//!
//! [`solve_lp`] is a two-phase tableau simplex (Dantzig pricing with a Bland fallback);
//! [`solve_milp`] runs best-first branch-and-bound over binary variables on
//! top of it. Both maximize.

mod milp;
mod simplex;

pub use milp::{solve_milp, MilpModel, MilpOptions, MilpSolution};
pub use simplex::solve_lp;

use crate::error::{Error, Result};

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-8;
/// Reduced-cost tolerance for optimality.
pub const COST_TOL: f64 = 1e-9;
/// Integrality tolerance for binaries.
pub const INT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `max objective·x + offset` subject to `rows[i]·x (sense) rhs[i]` and
/// `lower <= x <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Constant added to the objective value.
    pub offset: f64,
    pub rows: Vec<Vec<f64>>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program over `num_vars` nonnegative variables with zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; num_vars],
            offset: 0.0,
            rows: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(coeffs);
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.rows.len() - 1
    }

    /// Adds a row given as sparse `(var, coeff)` pairs.
    pub fn add_sparse_row(&mut self, terms: &[(usize, f64)], sense: Sense, rhs: f64) -> usize {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_row(coeffs, sense, rhs)
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Model(format!(
                "{} variables but {} lower / {} upper bounds",
                n,
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self.senses.len() != self.rows.len() || self.rhs.len() != self.rows.len() {
            return Err(Error::Model(format!(
                "{} rows but {} senses / {} right-hand sides",
                self.rows.len(),
                self.senses.len(),
                self.rhs.len()
            )));
        }
        if let Some((i, r)) = self.rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Model(format!("row {i} has {} coefficients, expected {n}", r.len())));
        }
        let finite = self.objective.iter().chain(self.rows.iter().flatten()).chain(&self.rhs);
        if finite.clone().any(|v| !v.is_finite()) || !self.offset.is_finite() {
            return Err(Error::Model("non-finite coefficient".into()));
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::Model(format!("variable {j} has bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for ((row, sense), b) in self.rows.iter().zip(&self.senses).zip(&self.rhs) {
            let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match sense {
                Sense::Le => lhs - b,
                Sense::Ge => b - lhs,
                Sense::Eq => (lhs - b).abs(),
            };
            worst = worst.max(v);
        }
        for ((v, lo), hi) in x.iter().zip(&self.lower).zip(&self.upper) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values; meaningful only when optimal.
    pub x: Vec<f64>,
    /// Objective value including the offset; NaN unless optimal.
    pub objective: f64,
    /// Simplex pivots performed (both phases).
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
