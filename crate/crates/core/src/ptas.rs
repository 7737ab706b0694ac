//! Approximation scheme for the undiscounted problem.
//!
//! For every guess of the most valuable packed item (the *anchor*) and
//! of its insertion period, item values at or below the anchor's are
//! bucketed into geometric value classes and replaced by each class's
//! upper value. Within a class only the number of packed items matters,
//! and small counts are cheaper to pin than to optimize, so the scheme
//! enumerates per-class nondecreasing count *profiles* (entries capped
//! at `J = ceil(1/eps)`), solves an LP per profile with the small counts
//! pinned to the lightest items, and rounds the vertex with per-class
//! and tail greedy packs. The best rounded schedule over all anchors,
//! anchor periods, and profiles is returned.
//!
//! Enumerating the anchor's insertion period keeps its whole row
//! integral in every LP vertex, which is what makes the rounding lose at
//! most an `eps` fraction of each disjunct's LP optimum: the tail's
//! additive loss is at most `eps` times the anchor row's value.

use crate::lp::{solve_lp, LinearProgram, LpError, LpSolution, Rel};
use crate::model::{
    check_feasible, evaluate, AlgoResult, Algorithm, Instance, ModelError, Schedule, Witness,
};
use crate::num::{rat_from_f64, rat_to_f64, Rat};
use crate::par::ordered_map;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Default cap on the number of profile LPs one solve may enumerate.
pub const DEFAULT_LP_BUDGET: u128 = 1_000_000;
/// Entries at least this close to 1 count as integral when rounding.
pub const TAU_INT: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PtasError {
    #[error("the scheme requires all discounts to equal one")]
    NotTimeInvariant,
    #[error("epsilon must lie strictly between 0 and 1 (and not be degenerately small)")]
    BadEpsilon,
    #[error("projected LP count {projected} exceeds the budget {budget}")]
    BudgetExceeded { projected: u128, budget: u128 },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Geometric value classes below an anchor item.
#[derive(Debug, Clone)]
pub struct ValueClassing {
    pub anchor_item: usize,
    pub eps: Rat,
    /// Number of classes: the smallest `K` with `(1-eps)^K < eps/T`.
    pub class_count: usize,
    /// Per-period count cap `J = ceil(1/eps)`.
    pub prefix_cap: u32,
    /// `classes[k]` holds class `k+1`'s items, lightest first.
    pub classes: Vec<Vec<usize>>,
    /// Items whose value falls below every class threshold.
    pub tail: Vec<usize>,
    /// All items with value at most the anchor's (ascending index);
    /// defines the LP variable order.
    pub members: Vec<usize>,
    /// Modified value per member (parallel to `members`): the class
    /// upper value inside a class, the own value in the tail and for
    /// the anchor.
    pub modified: Vec<Rat>,
}

impl ValueClassing {
    /// Position of an item inside [`Self::members`], if present.
    pub fn member_pos(&self, item: usize) -> Option<usize> {
        self.members.binary_search(&item).ok()
    }

    pub fn modified_value(&self, item: usize) -> Option<&Rat> {
        self.member_pos(item).map(|p| &self.modified[p])
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.len()).collect()
    }

    /// Per-class effective count alphabet: `0..=min(J, |class|)`.
    pub fn class_cap(&self, k: usize) -> u32 {
        (self.classes[k].len() as u32).min(self.prefix_cap)
    }
}

/// One enumerated disjunct: a nondecreasing count tuple per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub per_class: Vec<Vec<u32>>,
}

fn ensure_time_invariant(inst: &Instance) -> Result<(), PtasError> {
    if inst.is_time_invariant() {
        Ok(())
    } else {
        Err(PtasError::NotTimeInvariant)
    }
}

/// `K` and `J` for a given epsilon and horizon.
pub fn class_parameters(eps: &Rat, horizon: usize) -> Result<(usize, u32), PtasError> {
    if !eps.is_positive() || *eps >= Rat::one() {
        return Err(PtasError::BadEpsilon);
    }
    let threshold = eps / Rat::from_integer(horizon.into());
    let base = Rat::one() - eps;
    let mut power = base.clone();
    let mut k = 1usize;
    while power >= threshold {
        power *= &base;
        k += 1;
        if k > 100_000 {
            return Err(PtasError::BadEpsilon);
        }
    }
    let j = (Rat::one() / eps).ceil().to_integer();
    let j = j.to_u32().filter(|&j| j <= 10_000).ok_or(PtasError::BadEpsilon)?;
    Ok((k, j))
}

/// Buckets every item valued at or below the anchor into classes by the
/// geometric thresholds `(1-eps)^k * v_anchor`.
pub fn build_classes(inst: &Instance, anchor_item: usize, eps: &Rat) -> Result<ValueClassing, PtasError> {
    ensure_time_invariant(inst)?;
    let (class_count, prefix_cap) = class_parameters(eps, inst.horizon())?;
    let anchor_value = &inst.item(anchor_item).value;
    let base = Rat::one() - eps;
    // thresholds[k] = (1-eps)^k * v_anchor for k = 0..=K
    let mut thresholds = Vec::with_capacity(class_count + 1);
    thresholds.push(anchor_value.clone());
    for k in 1..=class_count {
        thresholds.push(&thresholds[k - 1] * &base);
    }

    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    let mut tail = Vec::new();
    let mut members = Vec::new();
    for (i, item) in inst.items().iter().enumerate() {
        if item.value > *anchor_value {
            continue;
        }
        members.push(i);
        if i == anchor_item {
            continue;
        }
        if item.value <= thresholds[class_count] {
            tail.push(i);
            continue;
        }
        let k = (1..=class_count)
            .find(|&k| item.value > thresholds[k])
            .expect("value above the last threshold lands in some class");
        classes[k - 1].push(i);
    }
    for class in &mut classes {
        class.sort_by(|&a, &b| {
            inst.item(a)
                .weight
                .cmp(&inst.item(b).weight)
                .then(a.cmp(&b))
        });
    }
    let modified: Vec<Rat> = members
        .iter()
        .map(|&i| {
            if i == anchor_item {
                anchor_value.clone()
            } else if let Some(k) = (0..class_count).find(|&k| classes[k].contains(&i)) {
                thresholds[k].clone()
            } else {
                inst.item(i).value.clone()
            }
        })
        .collect();
    Ok(ValueClassing {
        anchor_item,
        eps: eps.clone(),
        class_count,
        prefix_cap,
        classes,
        tail,
        members,
        modified,
    })
}

/// Number of nondecreasing `t`-tuples over `{0..=cap}`, i.e.
/// `C(t + cap, cap)`, saturating.
pub fn monotone_tuple_count(t: usize, cap: u32) -> u128 {
    let mut result: u128 = 1;
    for i in 1..=cap as u128 {
        result = result.saturating_mul(t as u128 + i);
        result /= i;
    }
    result
}

/// Exact number of profiles one (anchor, anchor period) pair visits.
pub fn profile_count(classing: &ValueClassing, horizon: usize) -> u128 {
    (0..classing.class_count)
        .map(|k| monotone_tuple_count(horizon, classing.class_cap(k)))
        .fold(1u128, |acc, c| acc.saturating_mul(c))
}

/// Periods where the anchor item alone fits the capacity — the only
/// insertion periods worth enumerating for it.
pub fn anchor_periods(inst: &Instance, anchor_item: usize) -> Vec<usize> {
    (1..=inst.horizon())
        .filter(|&t| inst.item(anchor_item).weight <= *inst.capacity(t))
        .collect()
}

/// Exact total LP count over every anchor guess and insertion period.
pub fn count_lps(inst: &Instance, eps: &Rat) -> Result<u128, PtasError> {
    ensure_time_invariant(inst)?;
    let mut total: u128 = 0;
    for h in 0..inst.item_count() {
        let classing = build_classes(inst, h, eps)?;
        let periods = anchor_periods(inst, h).len() as u128;
        total = total.saturating_add(periods.saturating_mul(profile_count(&classing, inst.horizon())));
    }
    Ok(total)
}

/// Closed-form upper bound `N * T * (J * (J + T)^J)^K` on the LP count,
/// saturating: `J * (J + T)^J` bounds one class's profile tuples, and
/// the leading `N * T` covers the anchor guesses.
pub fn count_lps_bound(items: usize, horizon: usize, eps: &Rat) -> Result<u128, PtasError> {
    let (class_count, prefix_cap) = class_parameters(eps, horizon.max(1))?;
    let j = prefix_cap as u128;
    let base = j.saturating_add(horizon as u128);
    let mut per_class: u128 = j;
    for _ in 0..prefix_cap {
        per_class = per_class.saturating_mul(base);
    }
    let mut total: u128 = (items as u128).saturating_mul(horizon as u128);
    for _ in 0..class_count {
        total = total.saturating_mul(per_class);
    }
    Ok(total)
}

/// All nondecreasing `t`-tuples over `{0..=cap}` in lexicographic order.
fn monotone_tuples(t: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(t);
    fn rec(t: usize, cap: u32, min: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() == t {
            out.push(current.clone());
            return;
        }
        for v in min..=cap {
            current.push(v);
            rec(t, cap, v, current, out);
            current.pop();
        }
    }
    rec(t, cap, 0, &mut current, &mut out);
    out
}

/// Streams every profile for a classing. Rejects up front when the
/// projected count exceeds `budget`.
pub fn enumerate_profiles(
    classing: &ValueClassing,
    horizon: usize,
    budget: u128,
) -> Result<ProfileIter, PtasError> {
    let projected = profile_count(classing, horizon);
    if projected > budget {
        return Err(PtasError::BudgetExceeded {
            projected,
            budget,
        });
    }
    let per_class: Vec<Vec<Vec<u32>>> = (0..classing.class_count)
        .map(|k| monotone_tuples(horizon, classing.class_cap(k)))
        .collect();
    Ok(ProfileIter {
        cursor: vec![0; per_class.len()],
        per_class,
        done: false,
    })
}

pub struct ProfileIter {
    per_class: Vec<Vec<Vec<u32>>>,
    cursor: Vec<usize>,
    done: bool,
}

impl Iterator for ProfileIter {
    type Item = Profile;

    fn next(&mut self) -> Option<Profile> {
        if self.done {
            return None;
        }
        let profile = Profile {
            per_class: self
                .per_class
                .iter()
                .zip(&self.cursor)
                .map(|(tuples, &i)| tuples[i].clone())
                .collect(),
        };
        // odometer: the last class cycles fastest
        let mut pos = self.per_class.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.cursor[pos] += 1;
            if self.cursor[pos] < self.per_class[pos].len() {
                break;
            }
            self.cursor[pos] = 0;
        }
        if self.per_class.is_empty() {
            self.done = true;
        }
        Some(profile)
    }
}

fn var(pos: usize, t: usize, horizon: usize) -> usize {
    pos * horizon + (t - 1)
}

/// Builds the LP of one disjunct: class counts pinned per the profile
/// (lightest items first), the anchor's row pinned to enter exactly at
/// `anchor_period`, capacity and precedence rows over the member set,
/// and the modified values as the objective.
pub fn build_profile_lp(
    inst: &Instance,
    classing: &ValueClassing,
    profile: &Profile,
    anchor_period: usize,
) -> LinearProgram {
    let horizon = inst.horizon();
    let members = &classing.members;
    let mut lp = LinearProgram::new(members.len() * horizon);
    for (pos, modified) in classing.modified.iter().enumerate() {
        let value = rat_to_f64(modified);
        for t in 1..=horizon {
            lp.set_objective(var(pos, t, horizon), value);
        }
    }
    let anchor_pos = classing
        .member_pos(classing.anchor_item)
        .expect("anchor is a member");
    for t in 1..=horizon {
        if t < anchor_period {
            lp.set_bounds(var(anchor_pos, t, horizon), 0.0, 0.0);
        } else {
            lp.set_bounds(var(anchor_pos, t, horizon), 1.0, 1.0);
        }
    }

    for (k, class) in classing.classes.iter().enumerate() {
        let size = class.len() as u32;
        for t in 1..=horizon {
            let count = profile.per_class[k][t - 1];
            if count >= size {
                for &item in class {
                    let pos = classing.member_pos(item).unwrap();
                    lp.set_bounds(var(pos, t, horizon), 1.0, 1.0);
                }
            } else if count == 0 {
                for &item in class {
                    let pos = classing.member_pos(item).unwrap();
                    lp.set_bounds(var(pos, t, horizon), 0.0, 0.0);
                }
            } else if count < classing.prefix_cap {
                for (rank, &item) in class.iter().enumerate() {
                    let pos = classing.member_pos(item).unwrap();
                    if (rank as u32) < count {
                        lp.set_bounds(var(pos, t, horizon), 1.0, 1.0);
                    } else {
                        lp.set_bounds(var(pos, t, horizon), 0.0, 0.0);
                    }
                }
            } else {
                // count == J < size: lightest J pinned, the rest free,
                // plus the (redundant but stated) row-sum floor
                let mut entries = Vec::with_capacity(class.len());
                for (rank, &item) in class.iter().enumerate() {
                    let pos = classing.member_pos(item).unwrap();
                    if (rank as u32) < count {
                        lp.set_bounds(var(pos, t, horizon), 1.0, 1.0);
                    }
                    entries.push((var(pos, t, horizon), 1.0));
                }
                lp.add_row_sparse(&entries, Rel::Ge, count as f64);
            }
        }
    }

    for t in 1..=horizon {
        let entries: Vec<(usize, f64)> = members
            .iter()
            .enumerate()
            .map(|(pos, &item)| (var(pos, t, horizon), rat_to_f64(&inst.item(item).weight)))
            .collect();
        lp.add_row_sparse(&entries, Rel::Le, rat_to_f64(inst.capacity(t)));
    }
    for pos in 0..members.len() {
        for t in 2..=horizon {
            lp.add_row_sparse(
                &[(var(pos, t - 1, horizon), 1.0), (var(pos, t, horizon), -1.0)],
                Rel::Le,
                0.0,
            );
        }
    }
    lp
}

fn exact_from_f64(x: f64) -> Rat {
    rat_from_f64(x).expect("finite LP coordinate")
}

/// Integral per-period counts for one class: pinned counts where the
/// profile dictates them, and a lightest-first greedy within the class's
/// LP weight budget where the profile saturated at `J`.
pub fn round_class(
    x_bar: &[f64],
    inst: &Instance,
    classing: &ValueClassing,
    k: usize,
    profile_k: &[u32],
) -> Vec<usize> {
    let horizon = inst.horizon();
    let class = &classing.classes[k];
    let size = class.len();
    let mut counts = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let sigma = profile_k[t - 1];
        let count = if sigma as usize >= size {
            size
        } else if sigma < classing.prefix_cap {
            sigma as usize
        } else {
            // greedy pack lightest-first within the fractional budget
            let mut budget = Rat::zero();
            for &item in class {
                let pos = classing.member_pos(item).unwrap();
                let xv = x_bar[var(pos, t, horizon)];
                if xv != 0.0 {
                    budget += &inst.item(item).weight * exact_from_f64(xv);
                }
            }
            let mut used = Rat::zero();
            let mut kept = 0usize;
            for &item in class {
                let next = &used + &inst.item(item).weight;
                if next <= budget {
                    used = next;
                    kept += 1;
                } else {
                    break;
                }
            }
            kept
        };
        counts.push(count);
    }
    debug_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    counts
}

/// Integral insertion times for the tail: per period, a best-ratio-first
/// greedy within the tail's LP weight budget, with the split item
/// dropped. Returns times parallel to `classing.tail`.
pub fn round_tail(x_bar: &[f64], inst: &Instance, classing: &ValueClassing) -> Vec<Option<usize>> {
    let horizon = inst.horizon();
    let tail = &classing.tail;
    let mut order: Vec<usize> = (0..tail.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = &inst.item(tail[a]).value / &inst.item(tail[a]).weight;
        let rb = &inst.item(tail[b]).value / &inst.item(tail[b]).weight;
        rb.cmp(&ra).then(tail[a].cmp(&tail[b]))
    });
    let mut times = vec![None; tail.len()];
    for t in 1..=horizon {
        let mut budget = Rat::zero();
        for &item in tail {
            let pos = classing.member_pos(item).unwrap();
            let xv = x_bar[var(pos, t, horizon)];
            if xv != 0.0 {
                budget += &inst.item(item).weight * exact_from_f64(xv);
            }
        }
        let mut used = Rat::zero();
        for &rank in &order {
            let item = tail[rank];
            let next = &used + &inst.item(item).weight;
            if next <= budget {
                used = next;
                if times[rank].is_none() {
                    times[rank] = Some(t);
                }
            } else {
                break;
            }
        }
    }
    times
}

/// Assembles the rounded integral schedule of one disjunct from the LP
/// point: pinned class prefixes, greedy class and tail roundings, and
/// the anchor's row floored to its integral part.
pub fn assemble(
    x_bar: &[f64],
    inst: &Instance,
    classing: &ValueClassing,
    profile: &Profile,
) -> Schedule {
    let horizon = inst.horizon();
    let mut times = vec![None; inst.item_count()];
    let anchor_pos = classing.member_pos(classing.anchor_item).unwrap();
    for t in 1..=horizon {
        if x_bar[var(anchor_pos, t, horizon)] >= 1.0 - TAU_INT {
            times[classing.anchor_item] = Some(t);
            break;
        }
    }
    for (k, class) in classing.classes.iter().enumerate() {
        let counts = round_class(x_bar, inst, classing, k, &profile.per_class[k]);
        for (rank, &item) in class.iter().enumerate() {
            for t in 1..=horizon {
                if counts[t - 1] > rank {
                    times[item] = Some(t);
                    break;
                }
            }
        }
    }
    for (rank, time) in round_tail(x_bar, inst, classing).into_iter().enumerate() {
        times[classing.tail[rank]] = time;
    }
    Schedule::new(times)
}

/// Objective value of a schedule under the classing's modified values
/// (undiscounted).
pub fn modified_value(classing: &ValueClassing, schedule: &Schedule, horizon: usize) -> Rat {
    let mut total = Rat::zero();
    for (pos, &item) in classing.members.iter().enumerate() {
        if let Some(t) = schedule.insertion_time(item) {
            total += &classing.modified[pos] * Rat::from_integer(((horizon - t + 1) as i64).into());
        }
    }
    total
}

/// Best rounded disjunct over every anchor and profile, evaluated with
/// the original values. Guarantee: at least `(1-eps)^2` of the optimum.
pub fn solve_ptas(
    inst: &Instance,
    eps: &Rat,
    budget: u128,
    threads: usize,
) -> Result<AlgoResult, PtasError> {
    ensure_time_invariant(inst)?;
    class_parameters(eps, inst.horizon())?;
    let claimed = {
        let keep = Rat::one() - eps;
        Some(&keep * &keep)
    };
    if inst.item_count() == 0 {
        return Ok(AlgoResult::new(
            inst,
            Schedule::never(0),
            Algorithm::Ptas,
            Witness::Empty,
            claimed,
        )?);
    }
    let projected = count_lps(inst, eps)?;
    if projected > budget {
        return Err(PtasError::BudgetExceeded { projected, budget });
    }

    type Best = Option<(Rat, Schedule, Witness)>;
    let anchors: Vec<usize> = (0..inst.item_count()).collect();
    let per_anchor: Vec<Result<Best, PtasError>> = ordered_map(anchors, threads, |anchor| {
        let classing = build_classes(inst, anchor, eps)?;
        let mut best: Best = None;
        for anchor_period in anchor_periods(inst, anchor) {
            for profile in enumerate_profiles(&classing, inst.horizon(), budget)? {
                let lp = build_profile_lp(inst, &classing, &profile, anchor_period);
                let LpSolution::Optimal { x, .. } = solve_lp(&lp)? else {
                    continue;
                };
                let schedule = assemble(&x, inst, &classing, &profile);
                if !check_feasible(inst, &schedule)?.feasible() {
                    continue;
                }
                let value = evaluate(inst, &schedule)?;
                let better = match &best {
                    None => true,
                    Some((bv, _, _)) => value > *bv,
                };
                if better {
                    best = Some((
                        value,
                        schedule,
                        Witness::ProfilePoint {
                            anchor_item: anchor,
                            anchor_period,
                            profile: profile.per_class.clone(),
                        },
                    ));
                }
            }
        }
        Ok(best)
    });

    let mut best: Best = None;
    for outcome in per_anchor {
        if let Some((value, schedule, witness)) = outcome? {
            let better = match &best {
                None => true,
                Some((bv, _, _)) => value > *bv,
            };
            if better {
                best = Some((value, schedule, witness));
            }
        }
    }
    let (schedule, witness) = match best {
        Some((_, s, w)) => (s, w),
        None => (Schedule::never(inst.item_count()), Witness::Empty),
    };
    Ok(AlgoResult::new(
        inst,
        schedule,
        Algorithm::Ptas,
        witness,
        claimed,
    )?)
}
