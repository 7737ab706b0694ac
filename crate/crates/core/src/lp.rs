//! Dense linear-programming engine shared by every LP-based module.
//!
//! Programs are stated as `maximize c.x` subject to rows `a.x {<=,>=,=} b`
//! and finite per-variable bounds `lo <= x <= hi`. The solver is a
//! two-phase tableau simplex with Bland's anti-cycling rule, run first in
//! floating point and re-run in exact rational arithmetic if the float
//! pass reports numerical trouble. Returned optima are basic feasible
//! solutions (vertices), and identical inputs always produce identical
//! outputs.

use crate::num::Rat;
use thiserror::Error;

mod simplex;

/// Absolute feasibility tolerance for float solves.
pub const TAU_FEAS: f64 = 1e-9;
/// Absolute optimality tolerance for float solves.
pub const TAU_OPT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

/// A dense LP in inequality form. Variables default to bounds `[0, 1]`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    n: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        LinearProgram {
            n,
            objective: vec![0.0; n],
            rows: Vec::new(),
            bounds: vec![(0.0, 1.0); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, rel: Rel, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n);
        self.rows.push(Row { coeffs, rel, rhs });
    }

    /// Adds a row given only its nonzero entries.
    pub fn add_row_sparse(&mut self, entries: &[(usize, f64)], rel: Rel, rhs: f64) {
        let mut coeffs = vec![0.0; self.n];
        for &(j, a) in entries {
            coeffs[j] += a;
        }
        self.rows.push(Row { coeffs, rel, rhs });
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.n || self.bounds.len() != self.n {
            return Err(LpError::Malformed("objective/bounds length".into()));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(LpError::Malformed(format!("bounds of x{j} must be finite")));
            }
            if lo > hi {
                return Err(LpError::Malformed(format!("bounds of x{j} are crossed")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != self.n {
                return Err(LpError::Malformed(format!("row {i} length")));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::Malformed(format!("row {i} has non-finite data")));
            }
        }
        for c in &self.objective {
            if !c.is_finite() {
                return Err(LpError::Malformed("non-finite objective".into()));
            }
        }
        Ok(())
    }
}

/// Outcome of a solve: either an optimal vertex or proof of emptiness.
#[derive(Debug, Clone)]
pub enum LpSolution {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
}

impl LpSolution {
    pub fn optimal(&self) -> Option<(&[f64], f64)> {
        match self {
            LpSolution::Optimal { x, value } => Some((x, *value)),
            LpSolution::Infeasible => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpSolution::Infeasible)
    }
}

/// Solves the program, falling back to exact rational pivoting when the
/// floating-point pass fails numerically.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    match simplex::solve::<f64>(lp, TAU_FEAS) {
        Ok(sol) => Ok(sol),
        Err(LpError::Numerical(_)) => simplex::solve::<Rat>(lp, 0.0),
        Err(e) => Err(e),
    }
}

/// Solves in exact rational arithmetic only. Slower; used by tests and
/// as the fallback path of [`solve_lp`].
pub fn solve_lp_exact(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    simplex::solve::<Rat>(lp, 0.0)
}

/// Where a residual report entry comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualSource {
    Row(usize),
    Bound(usize),
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub max_row_violation: f64,
    pub max_bound_violation: f64,
    /// Entries whose violation exceeds the tolerance passed to
    /// [`check_solution`].
    pub over_tolerance: Vec<(ResidualSource, f64)>,
}

impl ResidualReport {
    pub fn max_violation(&self) -> f64 {
        self.max_row_violation.max(self.max_bound_violation)
    }

    pub fn within_tolerance(&self) -> bool {
        self.over_tolerance.is_empty()
    }
}

/// Measures how far `x` is from satisfying every row and bound.
pub fn check_solution(lp: &LinearProgram, x: &[f64], tau: f64) -> ResidualReport {
    assert_eq!(x.len(), lp.n());
    let mut report = ResidualReport {
        max_row_violation: 0.0,
        max_bound_violation: 0.0,
        over_tolerance: Vec::new(),
    };
    for (i, row) in lp.rows.iter().enumerate() {
        let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, xi)| a * xi).sum();
        let violation = match row.rel {
            Rel::Le => (lhs - row.rhs).max(0.0),
            Rel::Ge => (row.rhs - lhs).max(0.0),
            Rel::Eq => (lhs - row.rhs).abs(),
        };
        report.max_row_violation = report.max_row_violation.max(violation);
        if violation > tau {
            report.over_tolerance.push((ResidualSource::Row(i), violation));
        }
    }
    for (j, (&(lo, hi), &xj)) in lp.bounds.iter().zip(x).enumerate() {
        let violation = (lo - xj).max(xj - hi).max(0.0);
        report.max_bound_violation = report.max_bound_violation.max(violation);
        if violation > tau {
            report
                .over_tolerance
                .push((ResidualSource::Bound(j), violation));
        }
    }
    report
}
