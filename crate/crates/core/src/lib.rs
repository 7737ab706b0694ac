//! Solver suite for the incremental knapsack problem: a knapsack whose
//! capacity grows weakly over a finite horizon, items that stay once
//! inserted, and a discounted sum of per-period knapsack values as the
//! objective.
//!
//! The crate provides:
//!
//! - an exact oracle (branch-and-bound knapsack plus schedule
//!   enumeration) for desk-scale ground truth,
//! - a constant-factor approximation built on replicated single-period
//!   knapsacks and two-stage disjunct LP rounding,
//! - an approximation scheme for the undiscounted case built on value
//!   classes and per-class prefix-count enumeration,
//! - LP relaxations of the natural integer program with gap reporting,
//! - instance generators (worst-case gap family, 3-partition reduction,
//!   seeded random instances), and
//! - canonical JSON formats for instances, schedules, and results.

pub mod exact;
pub mod gen;
pub mod io;
pub mod lp;
pub mod model;
pub mod num;
pub mod ptas;
pub mod relaxation;
pub mod split;

pub mod constant;

pub(crate) mod par;

pub use model::{
    check_feasible, evaluate, perturb_values, AlgoResult, Algorithm, Instance, Item, ModelError,
    PerturbedInstance, Schedule, Witness,
};
pub use num::Rat;
