//! Exact solvers for desk-scale problems: a branch-and-bound 0/1
//! knapsack and a full schedule enumeration. These are the ground truth
//! every approximation is measured against, so all arithmetic is exact.
//!
//! The enumeration works in scaled integers: values, weights, and
//! discounts are put over common denominators once, after which every
//! node costs a handful of `i128` operations.

use crate::model::{AlgoResult, Algorithm, Instance, Schedule, Witness};
use crate::num::{lcm_bigint, Rat};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Default cap on item count for [`knapsack_exact`].
pub const DEFAULT_ITEM_CAP: usize = 30;
/// Default cap on `(horizon + 1)^items` for [`brute_force`].
pub const DEFAULT_LEAF_BUDGET: u128 = 10_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("instance numbers exceed the exact solver's integer range")]
    NumericRange,
}

/// A max-value subset of items within a capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackSolution {
    /// Chosen item indices, ascending.
    pub chosen: Vec<usize>,
    pub value: Rat,
}

/// Exact 0/1 knapsack via branch and bound with the fractional
/// relaxation as the pruning bound. Deterministic: items are explored in
/// value-density order and only strict improvements replace the
/// incumbent.
pub fn knapsack_exact(
    values: &[Rat],
    weights: &[Rat],
    capacity: &Rat,
) -> Result<KnapsackSolution, OracleError> {
    assert_eq!(values.len(), weights.len());
    let n = values.len();
    if n > DEFAULT_ITEM_CAP {
        return Err(OracleError::SizeLimit(format!(
            "{n} items exceed the exact knapsack cap of {DEFAULT_ITEM_CAP}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let ratios: Vec<Rat> = values
        .iter()
        .zip(weights)
        .map(|(v, w)| v / w)
        .collect();
    order.sort_by(|&a, &b| ratios[b].cmp(&ratios[a]).then(a.cmp(&b)));

    struct Bb<'a> {
        values: &'a [Rat],
        weights: &'a [Rat],
        capacity: &'a Rat,
        order: &'a [usize],
        best_value: Rat,
        best_set: Vec<usize>,
    }

    impl Bb<'_> {
        fn bound(&self, from: usize, room: &Rat) -> Rat {
            let mut bound = Rat::zero();
            let mut room = room.clone();
            for &i in &self.order[from..] {
                if self.weights[i] <= room {
                    bound += &self.values[i];
                    room -= &self.weights[i];
                } else {
                    bound += &self.values[i] * &room / &self.weights[i];
                    break;
                }
            }
            bound
        }

        fn dfs(&mut self, from: usize, value: Rat, used: Rat, chosen: &mut Vec<usize>) {
            if from == self.order.len() {
                if value > self.best_value {
                    self.best_value = value;
                    self.best_set = chosen.clone();
                }
                return;
            }
            let room = self.capacity - &used;
            if &value + self.bound(from, &room) <= self.best_value {
                return;
            }
            let item = self.order[from];
            if self.weights[item] <= room {
                chosen.push(item);
                self.dfs(
                    from + 1,
                    &value + &self.values[item],
                    &used + &self.weights[item],
                    chosen,
                );
                chosen.pop();
            }
            self.dfs(from + 1, value, used, chosen);
        }
    }

    let mut bb = Bb {
        values,
        weights,
        capacity,
        order: &order,
        best_value: Rat::zero(),
        best_set: Vec::new(),
    };
    bb.dfs(0, Rat::zero(), Rat::zero(), &mut Vec::new());
    let mut chosen = bb.best_set;
    chosen.sort_unstable();
    Ok(KnapsackSolution {
        chosen,
        value: bb.best_value,
    })
}

/// Instance data over common denominators: all arithmetic in `i128`.
struct ScaledInstance {
    /// `contribution[i][tau]` = scaled `v_i * (discount mass from tau on)`.
    contribution: Vec<Vec<i128>>,
    item_value: Vec<i128>,
    weight: Vec<i128>,
    capacity: Vec<i128>,
    discount: Vec<i128>,
    /// Item indices by value/weight ratio, descending.
    ratio_order: Vec<usize>,
}

impl ScaledInstance {
    fn build(inst: &Instance) -> Result<ScaledInstance, OracleError> {
        let n = inst.item_count();
        let t = inst.horizon();
        let mut value_den = BigInt::one();
        let mut weight_den = BigInt::one();
        let mut discount_den = BigInt::one();
        for item in inst.items() {
            value_den = lcm_bigint(&value_den, item.value.denom());
            weight_den = lcm_bigint(&weight_den, item.weight.denom());
        }
        for b in inst.capacities() {
            weight_den = lcm_bigint(&weight_den, b.denom());
        }
        for d in inst.discounts() {
            discount_den = lcm_bigint(&discount_den, d.denom());
        }
        let to_scaled = |r: &Rat, scale: &BigInt| -> Result<i128, OracleError> {
            let v = (r * Rat::from_integer(scale.clone())).to_integer();
            v.to_i128().ok_or(OracleError::NumericRange)
        };
        let item_value: Vec<i128> = inst
            .items()
            .iter()
            .map(|it| to_scaled(&it.value, &value_den))
            .collect::<Result<_, _>>()?;
        let weight: Vec<i128> = inst
            .items()
            .iter()
            .map(|it| to_scaled(&it.weight, &weight_den))
            .collect::<Result<_, _>>()?;
        let capacity: Vec<i128> = inst
            .capacities()
            .iter()
            .map(|b| to_scaled(b, &weight_den))
            .collect::<Result<_, _>>()?;
        let discount: Vec<i128> = inst
            .discounts()
            .iter()
            .map(|d| to_scaled(d, &discount_den))
            .collect::<Result<_, _>>()?;

        // Keep all sums and products comfortably inside i128.
        let headroom = i128::MAX / 8;
        let total_value: i128 = item_value
            .iter()
            .try_fold(0i128, |a, &b| a.checked_add(b))
            .ok_or(OracleError::NumericRange)?;
        let total_discount: i128 = discount
            .iter()
            .try_fold(0i128, |a, &b| a.checked_add(b))
            .ok_or(OracleError::NumericRange)?;
        let max_capacity = capacity.iter().copied().max().unwrap_or(0);
        let total_weight: i128 = weight
            .iter()
            .try_fold(0i128, |a, &b| a.checked_add(b))
            .ok_or(OracleError::NumericRange)?;
        for (a, b) in [
            (total_value, total_discount),
            (total_value, max_capacity.max(total_weight)),
        ] {
            match a.checked_mul(b) {
                Some(p) if p <= headroom => {}
                _ => return Err(OracleError::NumericRange),
            }
        }

        let mut suffix = vec![0i128; t + 2];
        for tau in (1..=t).rev() {
            suffix[tau] = suffix[tau + 1] + discount[tau - 1];
        }
        let contribution: Vec<Vec<i128>> = (0..n)
            .map(|i| {
                let mut row = vec![0i128; t + 1];
                for tau in 1..=t {
                    row[tau] = item_value[i] * suffix[tau];
                }
                row
            })
            .collect();

        let mut ratio_order: Vec<usize> = (0..n).collect();
        let ratios: Vec<Rat> = inst
            .items()
            .iter()
            .map(|it| &it.value / &it.weight)
            .collect();
        ratio_order.sort_by(|&a, &b| ratios[b].cmp(&ratios[a]).then(a.cmp(&b)));

        Ok(ScaledInstance {
            contribution,
            item_value,
            weight,
            capacity,
            discount,
            ratio_order,
        })
    }
}

struct Enumeration<'a> {
    inst: &'a ScaledInstance,
    horizon: usize,
    item_count: usize,
    load: Vec<i128>,
    times: Vec<Option<usize>>,
    best_value: i128,
    best_times: Vec<Option<usize>>,
}

impl Enumeration<'_> {
    /// Upper bound on what items `from..` can still add: per period, the
    /// fractional knapsack of undecided items in the residual capacity,
    /// weighted by that period's discount.
    fn upper_bound(&self, from: usize) -> i128 {
        let mut total = 0i128;
        for t in 1..=self.horizon {
            let mut room = self.inst.capacity[t - 1] - self.load[t];
            if room <= 0 {
                continue;
            }
            let mut pack = 0i128;
            for &i in &self.inst.ratio_order {
                if i < from {
                    continue;
                }
                let w = self.inst.weight[i];
                if w <= room {
                    pack += self.inst.item_value[i];
                    room -= w;
                } else {
                    // round up: keep the bound valid
                    pack += (self.inst.item_value[i] * room + w - 1) / w;
                    break;
                }
            }
            total += self.inst.discount[t - 1] * pack;
        }
        total
    }

    fn fits(&self, item: usize, tau: usize) -> bool {
        let w = self.inst.weight[item];
        (tau..=self.horizon).all(|t| self.load[t] + w <= self.inst.capacity[t - 1])
    }

    fn dfs(&mut self, item: usize, value: i128) {
        if item == self.item_count {
            if value > self.best_value {
                self.best_value = value;
                self.best_times = self.times.clone();
            }
            return;
        }
        if value + self.upper_bound(item) <= self.best_value {
            return;
        }
        let w = self.inst.weight[item];
        for tau in 1..=self.horizon {
            if self.fits(item, tau) {
                for t in tau..=self.horizon {
                    self.load[t] += w;
                }
                self.times[item] = Some(tau);
                self.dfs(item + 1, value + self.inst.contribution[item][tau]);
                self.times[item] = None;
                for t in tau..=self.horizon {
                    self.load[t] -= w;
                }
            }
        }
        self.dfs(item + 1, value);
    }
}

/// Exact optimum by enumeration of insertion-time vectors with capacity
/// and fractional-bound pruning. Ties break toward the lexicographically
/// earliest vector under the period order `1 < 2 < ... < T < never`.
pub fn brute_force(inst: &Instance) -> Result<AlgoResult, OracleError> {
    brute_force_budgeted(inst, DEFAULT_LEAF_BUDGET)
}

/// [`brute_force`] with an explicit leaf budget.
pub fn brute_force_budgeted(inst: &Instance, leaf_budget: u128) -> Result<AlgoResult, OracleError> {
    let n = inst.item_count();
    let t = inst.horizon();
    let mut leaves: u128 = 1;
    for _ in 0..n {
        leaves = leaves
            .checked_mul((t + 1) as u128)
            .filter(|&l| l <= leaf_budget)
            .ok_or_else(|| {
                OracleError::SizeLimit(format!(
                    "({})^{n} insertion-time vectors exceed the leaf budget {leaf_budget}",
                    t + 1
                ))
            })?;
    }
    let scaled = ScaledInstance::build(inst)?;
    let mut search = Enumeration {
        inst: &scaled,
        horizon: t,
        item_count: n,
        load: vec![0; t + 1],
        times: vec![None; n],
        best_value: 0,
        best_times: vec![None; n],
    };
    search.dfs(0, 0);
    let schedule = Schedule::new(search.best_times);
    Ok(
        AlgoResult::new(inst, schedule, Algorithm::Exact, Witness::Exhaustive, Some(Rat::one()))
            .expect("enumeration preserves feasibility"),
    )
}
