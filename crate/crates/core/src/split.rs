//! Capacity-growth splits and the guaranteed factor of the
//! constant-factor algorithm.
//!
//! A split at period `t` (for a fraction `kappa`) means the remaining
//! capacity growth after `t` is at most `kappa * B_T` while the
//! discounted time before `t` is at most `ratio` times the discounted
//! time from `t` on. The minimal such ratio controls how much value the
//! rounded disjunct solutions can lose.

use crate::model::Instance;
use crate::num::{rat, Rat};
use num_traits::{One, Zero};

/// The minimal past/future discount ratio over all periods satisfying
/// the capacity condition for `kappa`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitInfo {
    pub kappa: Rat,
    /// Earliest period achieving the minimal ratio (1-based).
    pub period: usize,
    /// Minimal ratio of discounted time before the period to discounted
    /// time from the period on.
    pub ratio: Rat,
}

/// Exact minimizing scan over periods. `t = horizon` always satisfies
/// the capacity condition, so a split always exists; ties resolve to the
/// earliest period.
#[allow(clippy::needless_range_loop)] // 1-based period indexing
pub fn split_time(inst: &Instance, kappa: &Rat) -> SplitInfo {
    debug_assert!(*kappa > Rat::zero() && *kappa <= Rat::one());
    let horizon = inst.horizon();
    let final_capacity = inst.capacity(horizon);
    let suffix = inst.discount_suffix_sums();
    let total = suffix[1].clone();
    let mut best: Option<(Rat, usize)> = None;
    for t in 1..=horizon {
        if final_capacity - inst.capacity(t) <= kappa * final_capacity {
            let past = &total - &suffix[t];
            let ratio = past / &suffix[t];
            match &best {
                Some((current, _)) if *current <= ratio => {}
                _ => best = Some((ratio, t)),
            }
        }
    }
    let (ratio, period) = best.expect("the final period always satisfies the capacity condition");
    SplitInfo {
        kappa: kappa.clone(),
        period,
        ratio,
    }
}

/// Approximation factor guaranteed by the constant-factor algorithm:
/// `min(1/9, 1/(6 * max(1, ratio)))` at `kappa = 1/2`.
pub fn guarantee_factor(inst: &Instance) -> Rat {
    let split = split_time(inst, &rat(1, 2));
    let denominator = if split.ratio > Rat::one() {
        split.ratio
    } else {
        Rat::one()
    };
    let alt = Rat::one() / (rat(6, 1) * denominator);
    let ninth = rat(1, 9);
    if alt < ninth {
        alt
    } else {
        ninth
    }
}
