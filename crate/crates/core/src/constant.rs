//! Constant-factor approximation for the general (discounted) problem.
//!
//! Two candidate families are enumerated and the best feasible schedule
//! wins:
//!
//! 1. *Replicated* solutions: solve a single-period knapsack at some
//!    period's capacity and keep that subset from the period onward.
//! 2. *Disjunct* solutions: for every pivot period, entry period, and
//!    anchor item, solve a two-stage LP pair — stage one maximizes value
//!    subject to "at least a third of the value falls on each side of
//!    the pivot", stage two re-optimizes with those thirds fixed as
//!    value floors — then clean the vertex with weight-preserving
//!    exchanges and round it down to an integral schedule.
//!
//! The disjunct LPs require pairwise-distinct value/weight ratios, so
//! the driver perturbs values internally and evaluates every candidate
//! with the original values.

use crate::exact::{knapsack_exact, OracleError};
use crate::lp::{solve_lp, LinearProgram, LpError, LpSolution, Rel};
use crate::model::{
    check_feasible, evaluate, perturb_values, AlgoResult, Algorithm, Instance, ModelError,
    Schedule, Witness,
};
use crate::num::{rat, rat_from_f64, rat_to_f64, Rat};
use crate::par::ordered_map;
use crate::split::guarantee_factor;
use num_traits::{One, Zero};
use thiserror::Error;

/// Entries at least this close to 1 count as integral when rounding.
pub const TAU_INT: f64 = 1e-6;
/// Relative slack on the stage-2 value floors, absorbing float error in
/// the stage-1 optimum.
pub const TAU_SLACK: f64 = 1e-9;
/// Default perturbation step for making value/weight ratios distinct.
pub fn default_perturbation() -> Rat {
    rat(1, 1_000_000_000)
}

#[derive(Debug, Error)]
pub enum ConstantError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One disjunct of the LP family: the anchor item enters at
/// `entry_period` and is a highest-value packed item at `pivot_period`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DisjunctSpec {
    /// Period splitting the value thirds; `1 < pivot_period < horizon`.
    pub pivot_period: usize,
    /// Period the anchor item enters; `entry_period <= pivot_period`.
    pub entry_period: usize,
    /// Index of the anchor item.
    pub anchor_item: usize,
}

/// Which LP of the two-stage pair to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stage {
    One,
    /// Stage two takes the stage-one optimum as its value floor.
    Two { stage1_value: f64 },
}

/// Outcome of one disjunct: the stage-1 optimum, the cleaned fractional
/// point, and its rounded schedule, with exact objective bookkeeping in
/// the perturbed value space.
#[derive(Debug, Clone)]
pub struct StageResult {
    pub stage1_value: f64,
    /// Cleaned stage-2 point, item-major (`[i * horizon + t - 1]`).
    pub fractional: Vec<Rat>,
    pub schedule: Schedule,
    /// Stage-2 objective at the raw LP vertex.
    pub objective_raw: Rat,
    /// Stage-2 objective after the exchange cleanup (never smaller).
    pub objective: Rat,
    /// Value of the rounded schedule in the same (perturbed) values.
    pub rounded_value: Rat,
}

/// Best single-period knapsack at `period`'s capacity, kept from
/// `period` onward.
pub fn replicated_solution(inst: &Instance, period: usize) -> Result<AlgoResult, ConstantError> {
    let values: Vec<Rat> = inst.items().iter().map(|it| it.value.clone()).collect();
    let weights: Vec<Rat> = inst.items().iter().map(|it| it.weight.clone()).collect();
    let sol = knapsack_exact(&values, &weights, inst.capacity(period))?;
    let schedule = Schedule::single_subset(inst.item_count(), &sol.chosen, period);
    Ok(AlgoResult::new(
        inst,
        schedule,
        Algorithm::ConstantFactor,
        Witness::Replicated { period },
        None,
    )?)
}

fn value_coeff(inst: &Instance, item: usize, period: usize) -> f64 {
    rat_to_f64(&(&inst.item(item).value * inst.discount(period)))
}

/// Builds one stage of the disjunct LP for a (perturbed) instance.
/// Pins: the anchor enters exactly at `entry_period`, and no item more
/// valuable than the anchor may be packed at `pivot_period`.
pub fn build_disjunct_lp(inst: &Instance, spec: &DisjunctSpec, stage: Stage) -> LinearProgram {
    let n = inst.item_count();
    let horizon = inst.horizon();
    let var = |i: usize, t: usize| i * horizon + (t - 1);
    let mut lp = LinearProgram::new(n * horizon);
    for i in 0..n {
        for t in 1..=horizon {
            lp.set_objective(var(i, t), value_coeff(inst, i, t));
        }
    }
    lp.set_bounds(var(spec.anchor_item, spec.entry_period), 1.0, 1.0);
    if spec.entry_period >= 2 {
        lp.set_bounds(var(spec.anchor_item, spec.entry_period - 1), 0.0, 0.0);
    }
    let anchor_value = &inst.item(spec.anchor_item).value;
    for i in 0..n {
        if inst.item(i).value > *anchor_value {
            lp.set_bounds(var(i, spec.pivot_period), 0.0, 0.0);
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
    match stage {
        Stage::One => {
            // late third: sum_{t >= pivot} c x >= (1/3) sum c x
            // early third: sum_{t < pivot} c x >= (1/3) sum c x
            for late in [true, false] {
                let mut coeffs = vec![0.0; n * horizon];
                for i in 0..n {
                    for t in 1..=horizon {
                        let c = value_coeff(inst, i, t);
                        let in_side = if late { t >= spec.pivot_period } else { t < spec.pivot_period };
                        coeffs[var(i, t)] = if in_side { 2.0 / 3.0 * c } else { -c / 3.0 };
                    }
                }
                lp.add_row(coeffs, Rel::Ge, 0.0);
            }
        }
        Stage::Two { stage1_value } => {
            let floor = stage1_value / 3.0 * (1.0 - TAU_SLACK);
            for late in [true, false] {
                let mut coeffs = vec![0.0; n * horizon];
                for i in 0..n {
                    for t in 1..=horizon {
                        let in_side = if late { t >= spec.pivot_period } else { t < spec.pivot_period };
                        if in_side {
                            coeffs[var(i, t)] = value_coeff(inst, i, t);
                        }
                    }
                }
                lp.add_row(coeffs, Rel::Ge, floor);
            }
        }
    }
    lp
}

fn exact_objective(inst: &Instance, x: &[Rat]) -> Rat {
    let horizon = inst.horizon();
    let mut total = Rat::zero();
    for (i, item) in inst.items().iter().enumerate() {
        for t in 1..=horizon {
            let xv = &x[i * horizon + (t - 1)];
            if !xv.is_zero() {
                total += &item.value * inst.discount(t) * xv;
            }
        }
    }
    total
}

/// Weight-preserving exchanges that concentrate fractional mass until
/// each period holds at most one fractional item. Mass moves from a
/// lower-ratio item to a higher-ratio one over the shared period range,
/// so the objective never decreases and capacity usage is unchanged;
/// the anchor's row is never touched.
///
/// Exchanges that keep every dominance pin intact are preferred. When a
/// period's only improving exchange would raise a pinned item (the
/// receiver is more valuable than the anchor and the range spans the
/// pivot), that exchange is applied anyway: it still preserves capacity,
/// precedence, box bounds, and the stage-2 value floors, so the rounded
/// schedule stays feasible, and without it the period would keep two
/// fractional items for good — such optima exist.
pub fn defractionalize(x: &[Rat], inst: &Instance, spec: &DisjunctSpec) -> Vec<Rat> {
    let n = inst.item_count();
    let horizon = inst.horizon();
    let var = |i: usize, t: usize| i * horizon + (t - 1);
    let mut y = x.to_vec();
    let tol = rat(1, 1_000_000_000);
    let frac_lo = tol.clone();
    let frac_hi = Rat::one() - &tol;
    let is_frac = |v: &Rat| *v > frac_lo && *v < frac_hi;
    let ratios: Vec<Rat> = inst
        .items()
        .iter()
        .map(|it| &it.value / &it.weight)
        .collect();
    let anchor_value = inst.item(spec.anchor_item).value.clone();

    let max_rounds = 64 + 32 * n * horizon * horizon;
    'rounds: for _ in 0..max_rounds {
        // first period holding two or more fractional entries
        let mut target = None;
        for t in 1..=horizon {
            let mut fracs: Vec<usize> = (0..n)
                .filter(|&i| i != spec.anchor_item && is_frac(&y[var(i, t)]))
                .collect();
            if fracs.len() >= 2 {
                fracs.sort_by(|&a, &b| ratios[b].cmp(&ratios[a]).then(a.cmp(&b)));
                target = Some((t, fracs));
                break;
            }
        }
        let Some((t_hat, fracs)) = target else {
            break;
        };
        for respect_pins in [true, false] {
            for hi in 0..fracs.len() {
                for lo in (hi + 1..fracs.len()).rev() {
                    let recv = fracs[hi];
                    let give = fracs[lo];
                    if ratios[recv] <= ratios[give] {
                        continue;
                    }
                    // range starts at the giver's first supported period
                    let mut start = 1;
                    while start <= horizon && y[var(give, start)] <= tol {
                        start += 1;
                    }
                    if start > t_hat {
                        continue;
                    }
                    // receiver's fractional level around t_hat extends right
                    let level = y[var(recv, t_hat)].clone();
                    let mut end = t_hat;
                    while end < horizon
                        && (&y[var(recv, end + 1)] - &level).clone() <= tol
                        && (&level - &y[var(recv, end + 1)]).clone() <= tol
                    {
                        end += 1;
                    }
                    let pin_blocked = inst.item(recv).value > anchor_value
                        && start <= spec.pivot_period
                        && spec.pivot_period <= end;
                    if respect_pins && pin_blocked {
                        continue;
                    }
                    let peak = (start..=end)
                        .map(|t| y[var(recv, t)].clone())
                        .max()
                        .expect("nonempty range");
                    let raise_cap = if end < horizon {
                        &y[var(recv, end + 1)] - &peak
                    } else {
                        Rat::one() - &peak
                    };
                    let give_floor = y[var(give, start)].clone();
                    let w_recv = &inst.item(recv).weight;
                    let w_give = &inst.item(give).weight;
                    let raise = {
                        let by_giver = w_give / w_recv * &give_floor;
                        if by_giver < raise_cap {
                            by_giver
                        } else {
                            raise_cap
                        }
                    };
                    if raise <= Rat::zero() {
                        continue;
                    }
                    let drop = w_recv / w_give * &raise;
                    for t in start..=end {
                        y[var(give, t)] -= &drop;
                        y[var(recv, t)] += &raise;
                    }
                    continue 'rounds;
                }
            }
        }
        // no pair admits an exchange at this period; give up rather
        // than loop
        break;
    }
    y
}

/// Floors a fractional point to a schedule: an item enters at the first
/// period where its entry is within [`TAU_INT`] of 1.
pub fn round_down(x: &[Rat], item_count: usize, horizon: usize) -> Schedule {
    let threshold = Rat::one() - rat_from_f64(TAU_INT).expect("constant");
    round_down_with(x, item_count, horizon, &threshold)
}

fn round_down_with(x: &[Rat], item_count: usize, horizon: usize, threshold: &Rat) -> Schedule {
    let mut times = vec![None; item_count];
    for (i, time) in times.iter_mut().enumerate() {
        for t in 1..=horizon {
            if &x[i * horizon + (t - 1)] >= threshold {
                *time = Some(t);
                break;
            }
        }
    }
    Schedule::new(times)
}

/// Runs both LP stages for one disjunct. `Ok(None)` means the disjunct
/// is empty (its pins contradict the capacities) and should be skipped.
pub fn solve_two_stage(
    inst: &Instance,
    spec: &DisjunctSpec,
) -> Result<Option<StageResult>, ConstantError> {
    let stage1 = build_disjunct_lp(inst, spec, Stage::One);
    let sol1 = solve_lp(&stage1)?;
    let LpSolution::Optimal { value: stage1_value, .. } = sol1 else {
        return Ok(None);
    };
    let stage2 = build_disjunct_lp(inst, spec, Stage::Two { stage1_value });
    let sol2 = solve_lp(&stage2)?;
    let LpSolution::Optimal { x, .. } = sol2 else {
        return Ok(None);
    };
    let raw: Vec<Rat> = x
        .iter()
        .map(|&v| rat_from_f64(v).expect("finite LP solution"))
        .collect();
    let objective_raw = exact_objective(inst, &raw);
    let fractional = defractionalize(&raw, inst, spec);
    let objective = exact_objective(inst, &fractional);

    let n = inst.item_count();
    let horizon = inst.horizon();
    let mut schedule = round_down(&fractional, n, horizon);
    if !check_feasible(inst, &schedule)?.feasible() {
        // a genuinely fractional entry sat inside the rounding window;
        // retry with a strict threshold
        let strict = Rat::one() - rat(1, 1_000_000_000_000);
        schedule = round_down_with(&fractional, n, horizon, &strict);
        if !check_feasible(inst, &schedule)?.feasible() {
            return Ok(None);
        }
    }
    let rounded_value = evaluate(inst, &schedule)?;
    Ok(Some(StageResult {
        stage1_value,
        fractional,
        schedule,
        objective_raw,
        objective,
        rounded_value,
    }))
}

/// All disjunct specs for an instance: pivots strictly inside the
/// horizon, entries up to the pivot, every item as anchor.
pub fn disjunct_specs(inst: &Instance) -> Vec<DisjunctSpec> {
    let mut specs = Vec::new();
    let horizon = inst.horizon();
    if horizon < 3 {
        return specs;
    }
    for pivot_period in 2..horizon {
        for entry_period in 1..=pivot_period {
            for anchor_item in 0..inst.item_count() {
                specs.push(DisjunctSpec {
                    pivot_period,
                    entry_period,
                    anchor_item,
                });
            }
        }
    }
    specs
}

enum Candidate {
    Replicated(usize),
    Disjunct(DisjunctSpec),
}

/// Best of the replicated and rounded-disjunct candidates, evaluated
/// with the original values. The reported factor is the split-based
/// guarantee for this instance.
pub fn solve_constant_factor(inst: &Instance, threads: usize) -> Result<AlgoResult, ConstantError> {
    let factor = guarantee_factor(inst);
    if inst.item_count() == 0 {
        return Ok(AlgoResult::new(
            inst,
            Schedule::never(0),
            Algorithm::ConstantFactor,
            Witness::Replicated { period: 1 },
            Some(factor),
        )?);
    }
    let perturbed = perturb_values(inst, &default_perturbation());
    let perturbed_inst = &perturbed.instance;

    let mut candidates: Vec<Candidate> = (1..=inst.horizon()).map(Candidate::Replicated).collect();
    candidates.extend(disjunct_specs(inst).into_iter().map(Candidate::Disjunct));

    let outcomes = ordered_map(candidates, threads, |candidate| match candidate {
        Candidate::Replicated(period) => replicated_solution(inst, period)
            .map(|res| Some((res.schedule, Witness::Replicated { period }))),
        Candidate::Disjunct(spec) => solve_two_stage(perturbed_inst, &spec).map(|opt| {
            opt.map(|stage| {
                (
                    stage.schedule,
                    Witness::Disjunct {
                        pivot_period: spec.pivot_period,
                        entry_period: spec.entry_period,
                        anchor_item: spec.anchor_item,
                    },
                )
            })
        }),
    });

    let mut best: Option<(Rat, Schedule, Witness)> = None;
    for outcome in outcomes {
        if let Some((schedule, witness)) = outcome? {
            let value = evaluate(inst, &schedule)?;
            let better = match &best {
                None => true,
                Some((best_value, _, _)) => value > *best_value,
            };
            if better {
                best = Some((value, schedule, witness));
            }
        }
    }
    let (_, schedule, witness) = best.expect("replicated candidates always exist");
    Ok(AlgoResult::new(
        inst,
        schedule,
        Algorithm::ConstantFactor,
        witness,
        Some(factor),
    )?)
}
