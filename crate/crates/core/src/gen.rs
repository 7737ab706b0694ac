//! Instance constructions: the worst-case relaxation-gap family, the
//! 3-partition reduction, and seeded random instances.

use crate::model::{Instance, Item, ModelError};
use crate::num::{rat, rat_floor, rat_int, Rat};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("{0}^{1} overflows the supported horizon")]
    Overflow(u64, u32),
    #[error("sum of the {count} integers is not divisible by {groups}")]
    NotDivisible { count: usize, groups: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Largest horizon a generated instance may have.
const MAX_HORIZON: u128 = 1 << 22;

/// Worst-case family for the strengthened relaxation: `m` items with
/// `v_i = w_i = k^i` over horizon `k^m`, capacities stepping through the
/// powers of `k` on a geometric timetable (the final period repeats the
/// previous capacity).
pub fn gen_gap_family(k: u64, m: u32) -> Result<Instance, GenError> {
    if k < 2 {
        return Err(GenError::BadParameter("k must be at least 2".into()));
    }
    if m < 1 {
        return Err(GenError::BadParameter("m must be at least 1".into()));
    }
    let mut horizon: u128 = 1;
    for _ in 0..m {
        horizon = horizon
            .checked_mul(k as u128)
            .filter(|&t| t <= MAX_HORIZON)
            .ok_or(GenError::Overflow(k, m))?;
    }
    let horizon = horizon as usize;

    let mut items = Vec::with_capacity(m as usize);
    let mut power = BigInt::one();
    let mut powers = Vec::with_capacity(m as usize + 1);
    powers.push(power.clone());
    for i in 1..=m {
        power *= k;
        powers.push(power.clone());
        let v = Rat::from_integer(power.clone());
        items.push(Item::new(format!("i{i}"), v.clone(), v));
    }

    let mut capacities = vec![Rat::zero(); horizon];
    for i in 1..=m as usize {
        // periods T(1 - 1/k^(i-1)) + 1 ..= T(1 - 1/k^i) hold capacity k^i
        let t = horizon as u128;
        let lo = t - t / powers[i - 1].to_u128().unwrap() + 1;
        let hi = t - t / powers[i].to_u128().unwrap();
        for period in lo..=hi {
            capacities[period as usize - 1] = Rat::from_integer(powers[i].clone());
        }
    }
    capacities[horizon - 1] = capacities[horizon - 2].clone();

    Ok(Instance::new(items, horizon, capacities, None)?)
}

/// A 3-partition input rewritten as an incremental subset-sum instance.
#[derive(Debug, Clone)]
pub struct ThreePartition {
    pub instance: Instance,
    /// Objective value reached iff the integers admit a 3-partition
    /// (given the size window below).
    pub target: Rat,
    /// Inputs outside the strict window `(B/4, B/2)`; the instance is
    /// still valid, but the target characterization needs the window.
    pub warnings: Vec<String>,
}

/// Builds the reduction: `3m` items with `v_i = w_i = a_i`, horizon `m`,
/// and capacity `t * B` at period `t` where `B` is the triple sum.
pub fn gen_3partition(a: &[u64]) -> Result<ThreePartition, GenError> {
    if a.is_empty() || !a.len().is_multiple_of(3) {
        return Err(GenError::BadParameter(format!(
            "need a positive multiple of 3 integers, got {}",
            a.len()
        )));
    }
    if let Some(pos) = a.iter().position(|&x| x == 0) {
        return Err(GenError::BadParameter(format!(
            "integer #{} must be positive",
            pos + 1
        )));
    }
    let groups = a.len() / 3;
    let total: u128 = a.iter().map(|&x| x as u128).sum();
    if !total.is_multiple_of(groups as u128) {
        return Err(GenError::NotDivisible {
            count: a.len(),
            groups,
        });
    }
    let triple_sum = total / groups as u128;
    let b = Rat::from_integer(BigInt::from(triple_sum));

    let mut warnings = Vec::new();
    for (i, &x) in a.iter().enumerate() {
        let quad = 4u128 * x as u128;
        let dbl = 2u128 * x as u128;
        if quad <= triple_sum || dbl >= triple_sum {
            warnings.push(format!(
                "integer #{} = {} lies outside ({}/4, {}/2); the target \
                 characterization may not apply",
                i + 1,
                x,
                triple_sum,
                triple_sum
            ));
        }
    }

    let items: Vec<Item> = a
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let v = Rat::from_integer(BigInt::from(x));
            Item::new(format!("a{}", i + 1), v.clone(), v)
        })
        .collect();
    let capacities: Vec<Rat> = (1..=groups as i64).map(|t| rat_int(t) * &b).collect();
    let instance = Instance::new(items, groups, capacities, None)?;
    let m = groups as i64;
    let target = &b * rat(m * (m + 1) / 2, 1);
    Ok(ThreePartition {
        instance,
        target,
        warnings,
    })
}

/// Parameters for [`gen_random`]. Instances are deterministic functions
/// of the parameters: the generator is ChaCha8 keyed by `seed`, values
/// and weights are drawn per item (value first, then weight) by unbiased
/// rejection sampling, and capacities come from `horizon` cumulative
/// uniform draws in `1..=1000` rescaled so the final capacity is
/// `floor(fill_factor * total_weight)`.
#[derive(Debug, Clone)]
pub struct RandomParams {
    pub items: usize,
    pub horizon: usize,
    pub seed: u64,
    pub value_range: (u64, u64),
    pub weight_range: (u64, u64),
    pub fill_factor: Rat,
    /// When set, discounts follow `exp(-rate * t)` rounded to 1e-6.
    pub discount_rate: Option<f64>,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            items: 5,
            horizon: 3,
            seed: 0,
            value_range: (1, 100),
            weight_range: (1, 100),
            fill_factor: rat(7, 10),
            discount_rate: None,
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> u64 {
    debug_assert!(lo <= hi);
    let range = hi - lo + 1;
    let zone = (u64::MAX / range) * range;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return lo + x % range;
        }
    }
}

/// Seeded random instance; see [`RandomParams`] for the exact scheme.
pub fn gen_random(params: &RandomParams) -> Result<Instance, GenError> {
    if params.horizon == 0 {
        return Err(GenError::BadParameter("horizon must be at least 1".into()));
    }
    for (name, (lo, hi)) in [
        ("value_range", params.value_range),
        ("weight_range", params.weight_range),
    ] {
        if lo == 0 || lo > hi {
            return Err(GenError::BadParameter(format!(
                "{name} must satisfy 1 <= lo <= hi"
            )));
        }
    }
    if params.fill_factor <= Rat::zero() {
        return Err(GenError::BadParameter("fill_factor must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut items = Vec::with_capacity(params.items);
    let mut total_weight: u128 = 0;
    for i in 0..params.items {
        let value = uniform(&mut rng, params.value_range.0, params.value_range.1);
        let weight = uniform(&mut rng, params.weight_range.0, params.weight_range.1);
        total_weight += weight as u128;
        items.push(Item::new(
            format!("i{}", i + 1),
            Rat::from_integer(BigInt::from(value)),
            Rat::from_integer(BigInt::from(weight)),
        ));
    }
    let mut cumulative: Vec<u128> = Vec::with_capacity(params.horizon);
    let mut acc: u128 = 0;
    for _ in 0..params.horizon {
        acc += uniform(&mut rng, 1, 1000) as u128;
        cumulative.push(acc);
    }
    let last = *cumulative.last().expect("horizon >= 1");
    let top = &params.fill_factor * Rat::from_integer(BigInt::from(total_weight));
    let capacities: Vec<Rat> = cumulative
        .iter()
        .map(|&g| {
            let scaled = &top * rat(g as i64, last as i64);
            Rat::from_integer(rat_floor(&scaled))
        })
        .collect();
    let discounts = params.discount_rate.map(|rate| {
        (1..=params.horizon)
            .map(|t| {
                let raw = (-rate * t as f64).exp();
                let micros = (raw * 1e6).round().max(1.0) as i64;
                rat(micros, 1_000_000)
            })
            .collect()
    });
    Ok(Instance::new(items, params.horizon, capacities, discounts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::brute_force;
    use crate::io::instance_to_json;
    use crate::num::rat_int;

    #[test]
    fn gap_family_smallest_members() {
        let inst = gen_gap_family(2, 2).unwrap();
        assert_eq!(inst.horizon(), 4);
        assert_eq!(inst.item_count(), 2);
        assert_eq!(inst.item(0).value, rat_int(2));
        assert_eq!(inst.item(0).weight, rat_int(2));
        assert_eq!(inst.item(1).value, rat_int(4));
        let caps: Vec<Rat> = inst.capacities().to_vec();
        assert_eq!(caps, vec![rat_int(2), rat_int(2), rat_int(4), rat_int(4)]);

        let tiny = gen_gap_family(2, 1).unwrap();
        assert_eq!(tiny.horizon(), 2);
        assert_eq!(tiny.capacities(), &[rat_int(2), rat_int(2)]);
    }

    #[test]
    fn gap_family_k3() {
        let inst = gen_gap_family(3, 2).unwrap();
        assert_eq!(inst.horizon(), 9);
        let mut expect = vec![rat_int(3); 6];
        expect.extend(vec![rat_int(9); 3]);
        assert_eq!(inst.capacities(), &expect[..]);
    }

    #[test]
    fn gap_family_rejects_bad_parameters() {
        assert!(matches!(gen_gap_family(1, 2), Err(GenError::BadParameter(_))));
        assert!(matches!(gen_gap_family(2, 0), Err(GenError::BadParameter(_))));
        assert!(matches!(gen_gap_family(2, 40), Err(GenError::Overflow(2, 40))));
    }

    #[test]
    fn three_partition_yes_instance_reaches_target() {
        let tp = gen_3partition(&[10, 11, 11, 10, 10, 12]).unwrap();
        assert_eq!(tp.target, rat_int(96));
        assert!(tp.warnings.is_empty());
        let opt = brute_force(&tp.instance).unwrap();
        assert_eq!(opt.value, rat_int(96));
    }

    #[test]
    fn three_partition_no_instance_stays_below_target() {
        let tp = gen_3partition(&[10, 10, 10, 10, 10, 14]).unwrap();
        assert_eq!(tp.target, rat_int(96));
        assert!(tp.warnings.is_empty());
        let opt = brute_force(&tp.instance).unwrap();
        assert_eq!(opt.value, rat_int(94));
        assert!(opt.value < tp.target);
    }

    #[test]
    fn three_partition_m3_pair() {
        // Six 5s and three 6s: triples (5,5,6) x3 reach the target.
        let yes = gen_3partition(&[5, 6, 5, 5, 5, 6, 6, 5, 5]).unwrap();
        assert!(yes.warnings.is_empty());
        let opt = brute_force(&yes.instance).unwrap();
        assert_eq!(opt.value, yes.target);

        // Seven 5s, one 6, one 7: only (5,5,6) sums to 16, so no
        // partition into three such triples exists.
        let no = gen_3partition(&[5, 5, 5, 5, 5, 5, 5, 6, 7]).unwrap();
        assert!(no.warnings.is_empty());
        let opt = brute_force(&no.instance).unwrap();
        assert!(opt.value < no.target);
    }

    #[test]
    fn three_partition_rejects_indivisible_sums() {
        let err = gen_3partition(&[1, 1, 1, 1, 1, 2]).unwrap_err();
        assert!(matches!(err, GenError::NotDivisible { .. }));
    }

    #[test]
    fn three_partition_single_group_is_subset_sum() {
        let tp = gen_3partition(&[4, 5, 7]).unwrap();
        assert_eq!(tp.instance.horizon(), 1);
        assert_eq!(tp.target, rat_int(16));
        let opt = brute_force(&tp.instance).unwrap();
        assert_eq!(opt.value, rat_int(16));
    }

    #[test]
    fn three_partition_warns_outside_window() {
        let tp = gen_3partition(&[1, 15, 16, 1, 15, 16]).unwrap();
        assert!(!tp.warnings.is_empty());
    }

    #[test]
    fn random_is_deterministic_per_seed() {
        let params = RandomParams {
            items: 6,
            horizon: 4,
            seed: 7,
            ..RandomParams::default()
        };
        let a = gen_random(&params).unwrap();
        let b = gen_random(&params).unwrap();
        assert_eq!(instance_to_json(&a), instance_to_json(&b));

        let other = gen_random(&RandomParams {
            seed: 8,
            ..params
        })
        .unwrap();
        assert_ne!(instance_to_json(&a), instance_to_json(&other));
    }

    #[test]
    fn random_full_fill_lets_everything_fit() {
        let params = RandomParams {
            items: 3,
            horizon: 2,
            seed: 11,
            fill_factor: rat_int(1),
            ..RandomParams::default()
        };
        let inst = gen_random(&params).unwrap();
        assert_eq!(*inst.capacity(inst.horizon()), inst.total_weight());
        let opt = brute_force(&inst).unwrap();
        for time in opt.schedule.times() {
            assert!(time.is_some());
        }
    }

    #[test]
    fn random_empty_instance() {
        let params = RandomParams {
            items: 0,
            horizon: 2,
            seed: 3,
            ..RandomParams::default()
        };
        let inst = gen_random(&params).unwrap();
        assert_eq!(inst.item_count(), 0);
        let opt = brute_force(&inst).unwrap();
        assert!(opt.value == rat_int(0));
    }

    #[test]
    fn random_discounts_are_positive_micros() {
        let params = RandomParams {
            items: 2,
            horizon: 3,
            seed: 5,
            discount_rate: Some(0.5),
            ..RandomParams::default()
        };
        let inst = gen_random(&params).unwrap();
        assert!(!inst.is_time_invariant());
        for d in inst.discounts() {
            assert!(*d > Rat::zero());
            assert_eq!(
                (d * rat_int(1_000_000)).denom(),
                &BigInt::from(1)
            );
        }
    }
}
