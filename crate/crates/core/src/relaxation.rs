//! LP relaxations of the natural integer program and gap reporting.
//!
//! Variables are `x[i][t]` in `[0, 1]` ordered item-major for
//! reproducible vertex selection. The strengthened variant fixes
//! `x[i][t] = 0` whenever item `i` cannot fit alone at period `t`.

use crate::exact::{brute_force, OracleError};
use crate::lp::{solve_lp, LinearProgram, LpError, Rel};
use crate::model::Instance;
use crate::num::{rat_to_f64, Rat};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GapError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("relaxation unexpectedly infeasible")]
    Infeasible,
}

/// Builds the relaxation of the natural formulation: capacity rows per
/// period, precedence rows per item, objective `sum v_i d_t x[i][t]`.
pub fn build_relaxation(inst: &Instance, strengthened: bool) -> LinearProgram {
    let n = inst.item_count();
    let horizon = inst.horizon();
    let var = |i: usize, t: usize| i * horizon + (t - 1);
    let mut lp = LinearProgram::new(n * horizon);
    for (i, item) in inst.items().iter().enumerate() {
        let v = rat_to_f64(&item.value);
        for t in 1..=horizon {
            lp.set_objective(var(i, t), v * rat_to_f64(inst.discount(t)));
            if strengthened && item.weight > *inst.capacity(t) {
                lp.set_bounds(var(i, t), 0.0, 0.0);
            }
        }
    }
    for t in 1..=horizon {
        let entries: Vec<(usize, f64)> = inst
            .items()
            .iter()
            .enumerate()
            .map(|(i, item)| (var(i, t), rat_to_f64(&item.weight)))
            .collect();
        lp.add_row_sparse(&entries, Rel::Le, rat_to_f64(inst.capacity(t)));
    }
    for i in 0..n {
        for t in 2..=horizon {
            lp.add_row_sparse(&[(var(i, t - 1), 1.0), (var(i, t), -1.0)], Rel::Le, 0.0);
        }
    }
    lp
}

/// Relaxation optima next to the exact integer optimum.
#[derive(Debug, Clone)]
pub struct GapReport {
    /// Strengthened relaxation optimum (the primary gap measure).
    pub lp_value: f64,
    /// Plain relaxation optimum.
    pub lp_value_unstrengthened: f64,
    pub ip_value: Rat,
    /// `lp_value / ip_value`; `None` when the integer optimum is zero.
    pub ratio: Option<f64>,
    pub ratio_unstrengthened: Option<f64>,
}

/// Solves both relaxations and the exact instance. The instance must be
/// within the oracle's enumeration budget.
pub fn gap_report(inst: &Instance) -> Result<GapReport, GapError> {
    let solve_value = |strengthened: bool| -> Result<f64, GapError> {
        let lp = build_relaxation(inst, strengthened);
        match solve_lp(&lp)? {
            crate::lp::LpSolution::Optimal { value, .. } => Ok(value),
            crate::lp::LpSolution::Infeasible => Err(GapError::Infeasible),
        }
    };
    let lp_value = solve_value(true)?;
    let lp_value_unstrengthened = solve_value(false)?;
    let ip = brute_force(inst)?;
    let ip_f = rat_to_f64(&ip.value);
    let ratio = (!ip.value.is_zero()).then(|| lp_value / ip_f);
    let ratio_unstrengthened = (!ip.value.is_zero()).then(|| lp_value_unstrengthened / ip_f);
    Ok(GapReport {
        lp_value,
        lp_value_unstrengthened,
        ip_value: ip.value,
        ratio,
        ratio_unstrengthened,
    })
}

pub fn gap_csv_header() -> &'static str {
    "k,m,T,lp,ip,ratio"
}

/// One CSV row for a gap-family member `(k, m)`.
pub fn gap_csv_row(k: u64, m: u32, horizon: usize, report: &GapReport) -> String {
    format!(
        "{},{},{},{},{},{}",
        k,
        m,
        horizon,
        report.lp_value,
        rat_to_f64(&report.ip_value),
        report
            .ratio
            .map(|r| r.to_string())
            .unwrap_or_else(|| "inf".into())
    )
}
