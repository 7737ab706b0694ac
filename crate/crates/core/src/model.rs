//! Problem and solution data model: instances, schedules, evaluation,
//! feasibility checking, and value perturbation.
//!
//! All types are immutable after construction, so they can be shared
//! freely across threads. Invariants (positive data, nondecreasing
//! capacities, matching lengths) are enforced by the constructors and
//! hold for the lifetime of a value.
//!
//! Periods are 1-based throughout the public API: a schedule entry
//! `Some(t)` means the item enters the knapsack at period `t` and stays
//! there through the horizon.

use crate::num::{rat_display, rat_int, Rat};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("capacity decreases from period {period} to {}", period + 1)]
    NonMonotoneCapacity { period: usize },
    #[error("{field}[{index}] must be positive")]
    NonPositiveDatum { field: &'static str, index: usize },
    #[error("capacities[{index}] must be nonnegative")]
    NegativeCapacity { index: usize },
    #[error("{field} has length {actual}, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("duplicate item id {id:?}")]
    DuplicateItemId { id: String },
    #[error("unknown item: {0}")]
    UnknownItem(String),
    #[error("item {item:?} has insertion period {period}, expected 1..={horizon}")]
    InvalidPeriod {
        item: String,
        period: usize,
        horizon: usize,
    },
    #[error("result schedule violates capacity at period {period}")]
    InfeasibleResult { period: usize },
}

/// A single item: stable string id, positive value and weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub id: String,
    pub value: Rat,
    pub weight: Rat,
}

impl Item {
    pub fn new(id: impl Into<String>, value: Rat, weight: Rat) -> Self {
        Item {
            id: id.into(),
            value,
            weight,
        }
    }
}

/// An incremental knapsack instance over periods `1..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    items: Vec<Item>,
    horizon: usize,
    capacities: Vec<Rat>,
    discounts: Vec<Rat>,
}

impl Instance {
    /// Validates and builds an instance. `discounts` defaults to all
    /// ones (the time-invariant case) when absent.
    pub fn new(
        items: Vec<Item>,
        horizon: usize,
        capacities: Vec<Rat>,
        discounts: Option<Vec<Rat>>,
    ) -> Result<Instance, ModelError> {
        if horizon == 0 {
            return Err(ModelError::ZeroHorizon);
        }
        if capacities.len() != horizon {
            return Err(ModelError::LengthMismatch {
                field: "capacities",
                expected: horizon,
                actual: capacities.len(),
            });
        }
        let discounts = match discounts {
            Some(d) => {
                if d.len() != horizon {
                    return Err(ModelError::LengthMismatch {
                        field: "discounts",
                        expected: horizon,
                        actual: d.len(),
                    });
                }
                d
            }
            None => vec![Rat::one(); horizon],
        };
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item.id.clone()) {
                return Err(ModelError::DuplicateItemId {
                    id: item.id.clone(),
                });
            }
        }
        for (i, item) in items.iter().enumerate() {
            if !item.value.is_positive() {
                return Err(ModelError::NonPositiveDatum {
                    field: "value",
                    index: i,
                });
            }
            if !item.weight.is_positive() {
                return Err(ModelError::NonPositiveDatum {
                    field: "weight",
                    index: i,
                });
            }
        }
        for (t, d) in discounts.iter().enumerate() {
            if !d.is_positive() {
                return Err(ModelError::NonPositiveDatum {
                    field: "discounts",
                    index: t,
                });
            }
        }
        for (t, b) in capacities.iter().enumerate() {
            if b.is_negative() {
                return Err(ModelError::NegativeCapacity { index: t });
            }
        }
        for t in 1..horizon {
            if capacities[t] < capacities[t - 1] {
                return Err(ModelError::NonMonotoneCapacity { period: t });
            }
        }
        Ok(Instance {
            items,
            horizon,
            capacities,
            discounts,
        })
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn item(&self, index: usize) -> &Item {
        &self.items[index]
    }

    /// Capacity at a 1-based period.
    pub fn capacity(&self, period: usize) -> &Rat {
        &self.capacities[period - 1]
    }

    pub fn capacities(&self) -> &[Rat] {
        &self.capacities
    }

    /// Discount at a 1-based period.
    pub fn discount(&self, period: usize) -> &Rat {
        &self.discounts[period - 1]
    }

    pub fn discounts(&self) -> &[Rat] {
        &self.discounts
    }

    /// True when every discount equals one.
    pub fn is_time_invariant(&self) -> bool {
        self.discounts.iter().all(|d| d.is_one())
    }

    pub fn total_weight(&self) -> Rat {
        self.items
            .iter()
            .fold(Rat::zero(), |acc, it| acc + &it.weight)
    }

    /// `sums[tau] = sum of discounts over periods tau..=horizon`, for
    /// `tau` in `0..=horizon + 1` (`sums[0] == sums[1]`, `sums[horizon+1] == 0`).
    pub fn discount_suffix_sums(&self) -> Vec<Rat> {
        let t = self.horizon;
        let mut sums = vec![Rat::zero(); t + 2];
        for tau in (1..=t).rev() {
            sums[tau] = &sums[tau + 1] + &self.discounts[tau - 1];
        }
        sums[0] = sums[1].clone();
        sums
    }

    /// Same shape with replaced item values. The caller guarantees the
    /// new values are positive.
    pub(crate) fn with_values(&self, values: Vec<Rat>) -> Instance {
        debug_assert_eq!(values.len(), self.items.len());
        let items = self
            .items
            .iter()
            .zip(values)
            .map(|(it, v)| Item::new(it.id.clone(), v, it.weight.clone()))
            .collect();
        Instance {
            items,
            horizon: self.horizon,
            capacities: self.capacities.clone(),
            discounts: self.discounts.clone(),
        }
    }
}

/// Per-item insertion periods (1-based); `None` means never inserted.
///
/// Storing insertion times makes the nesting S_1 ⊆ … ⊆ S_T structural:
/// an item is in the knapsack at period `t` iff its time is `<= t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    times: Vec<Option<usize>>,
}

impl Schedule {
    /// The empty schedule: no item is ever inserted.
    pub fn never(item_count: usize) -> Self {
        Schedule {
            times: vec![None; item_count],
        }
    }

    /// Builds a schedule from raw insertion times. Periods must be ≥ 1.
    pub fn new(times: Vec<Option<usize>>) -> Self {
        debug_assert!(times.iter().flatten().all(|&t| t >= 1));
        Schedule { times }
    }

    /// Inserts every item of `subset` (item indices) at `period`.
    pub fn single_subset(item_count: usize, subset: &[usize], period: usize) -> Self {
        let mut times = vec![None; item_count];
        for &i in subset {
            times[i] = Some(period);
        }
        Schedule { times }
    }

    pub fn insertion_time(&self, item: usize) -> Option<usize> {
        self.times[item]
    }

    pub fn times(&self) -> &[Option<usize>] {
        &self.times
    }

    pub fn item_count(&self) -> usize {
        self.times.len()
    }

    /// True when `item` is in the knapsack at `period`.
    pub fn contains_at(&self, item: usize, period: usize) -> bool {
        matches!(self.times[item], Some(t) if t <= period)
    }
}

fn check_shape(inst: &Instance, schedule: &Schedule) -> Result<(), ModelError> {
    if schedule.item_count() != inst.item_count() {
        return Err(ModelError::UnknownItem(format!(
            "schedule covers {} items, instance has {}",
            schedule.item_count(),
            inst.item_count()
        )));
    }
    for (i, time) in schedule.times().iter().enumerate() {
        if let Some(t) = *time {
            if t == 0 || t > inst.horizon() {
                return Err(ModelError::InvalidPeriod {
                    item: inst.item(i).id.clone(),
                    period: t,
                    horizon: inst.horizon(),
                });
            }
        }
    }
    Ok(())
}

/// Objective value of a schedule: the discounted sum over periods of the
/// total value in the knapsack. Does not check feasibility.
pub fn evaluate(inst: &Instance, schedule: &Schedule) -> Result<Rat, ModelError> {
    check_shape(inst, schedule)?;
    let suffix = inst.discount_suffix_sums();
    let mut total = Rat::zero();
    for (i, time) in schedule.times().iter().enumerate() {
        if let Some(t) = *time {
            total += &inst.item(i).value * &suffix[t];
        }
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct CapacityViolation {
    pub period: usize,
    pub load: Rat,
    pub capacity: Rat,
}

#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub violations: Vec<CapacityViolation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact capacity check: reports every period whose load exceeds the
/// capacity, or an empty list when the schedule is feasible.
pub fn check_feasible(inst: &Instance, schedule: &Schedule) -> Result<FeasibilityReport, ModelError> {
    check_shape(inst, schedule)?;
    let mut violations = Vec::new();
    for t in 1..=inst.horizon() {
        let mut load = Rat::zero();
        for (i, item) in inst.items().iter().enumerate() {
            if schedule.contains_at(i, t) {
                load += &item.weight;
            }
        }
        if load > *inst.capacity(t) {
            violations.push(CapacityViolation {
                period: t,
                load,
                capacity: inst.capacity(t).clone(),
            });
        }
    }
    Ok(FeasibilityReport { violations })
}

/// A value-perturbed copy of an instance together with the original
/// values for reporting.
#[derive(Debug, Clone)]
pub struct PerturbedInstance {
    pub instance: Instance,
    pub original_values: Vec<Rat>,
    pub eta_used: Rat,
}

/// Multiplies item `i` (1-based position) by `1 + i*eta` so that all
/// value/weight ratios become pairwise distinct. If a collision remains,
/// retries with `eta/2`; collisions are finitely many, so this halts.
pub fn perturb_values(inst: &Instance, eta: &Rat) -> PerturbedInstance {
    assert!(eta.is_positive(), "perturbation step must be positive");
    let original_values: Vec<Rat> = inst.items().iter().map(|it| it.value.clone()).collect();
    let mut step = eta.clone();
    loop {
        let values: Vec<Rat> = inst
            .items()
            .iter()
            .enumerate()
            .map(|(i, it)| &it.value * (Rat::one() + rat_int(i as i64 + 1) * &step))
            .collect();
        let ratios: BTreeSet<Rat> = values
            .iter()
            .zip(inst.items())
            .map(|(v, it)| v / &it.weight)
            .collect();
        if ratios.len() == inst.item_count() {
            return PerturbedInstance {
                instance: inst.with_values(values),
                original_values,
                eta_used: step,
            };
        }
        step /= rat_int(2);
    }
}

/// Which solver produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Exact,
    ConstantFactor,
    Ptas,
    LpStrong,
    LpWeak,
}

impl Algorithm {
    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::Exact => "exact",
            Algorithm::ConstantFactor => "constant",
            Algorithm::Ptas => "ptas",
            Algorithm::LpStrong => "lp-strong",
            Algorithm::LpWeak => "lp-weak",
        }
    }
}

/// How the winning solution was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Exhaustive enumeration (the exact oracle).
    Exhaustive,
    /// Single-subset solution replicated from `period` onward.
    Replicated { period: usize },
    /// Two-stage disjunct LP rounding.
    Disjunct {
        pivot_period: usize,
        entry_period: usize,
        anchor_item: usize,
    },
    /// Rounded point of one disjunct of the value-class enumeration.
    ProfilePoint {
        anchor_item: usize,
        anchor_period: usize,
        profile: Vec<Vec<u32>>,
    },
    /// No candidate produced a nonempty schedule.
    Empty,
}

/// A feasible schedule together with its exact objective value and the
/// provenance needed to audit it.
#[derive(Debug, Clone)]
pub struct AlgoResult {
    pub schedule: Schedule,
    pub value: Rat,
    pub algorithm: Algorithm,
    pub witness: Witness,
    pub claimed_factor: Option<Rat>,
}

impl AlgoResult {
    /// Evaluates `schedule` against `inst` and checks feasibility, so a
    /// constructed result always satisfies its own invariants.
    pub fn new(
        inst: &Instance,
        schedule: Schedule,
        algorithm: Algorithm,
        witness: Witness,
        claimed_factor: Option<Rat>,
    ) -> Result<AlgoResult, ModelError> {
        let report = check_feasible(inst, &schedule)?;
        if let Some(v) = report.violations.first() {
            return Err(ModelError::InfeasibleResult { period: v.period });
        }
        let value = evaluate(inst, &schedule)?;
        Ok(AlgoResult {
            schedule,
            value,
            algorithm,
            witness,
            claimed_factor,
        })
    }

    pub fn value_display(&self) -> String {
        rat_display(&self.value)
    }
}
