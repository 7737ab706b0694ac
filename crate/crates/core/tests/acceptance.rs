//! Acceptance suite: every guarantee the solvers advertise, checked at
//! desk scale against the exact oracle. One test per criterion; each
//! prints a `PASS` line with the measured margins (visible with
//! `cargo test --test acceptance -- --nocapture`).

use inkspan::constant::{
    build_disjunct_lp, disjunct_specs, replicated_solution, solve_constant_factor,
    solve_two_stage, Stage, StageResult,
};
use inkspan::exact::brute_force;
use inkspan::gen::{gen_3partition, gen_gap_family, gen_random, RandomParams};
use inkspan::lp::{check_solution, solve_lp};
use inkspan::model::{check_feasible, perturb_values, Instance, Item, Schedule};
use inkspan::num::{rat, rat_int, rat_to_f64, Rat};
use inkspan::ptas::{
    anchor_periods, assemble, build_classes, build_profile_lp, enumerate_profiles, modified_value,
    profile_count, round_tail, solve_ptas, Profile, ValueClassing, DEFAULT_LP_BUDGET,
};
use inkspan::relaxation::{build_relaxation, gap_report};

fn report(name: &str, details: String) {
    println!("ACCEPTANCE {name}: PASS — {details}");
}

fn e1() -> Instance {
    Instance::new(
        vec![
            Item::new("i1", rat_int(3), rat_int(2)),
            Item::new("i2", rat_int(2), rat_int(2)),
        ],
        2,
        vec![rat_int(2), rat_int(4)],
        None,
    )
    .unwrap()
}

fn e2() -> Instance {
    Instance::new(
        vec![
            Item::new("i1", rat_int(3), rat_int(2)),
            Item::new("i2", rat_int(2), rat_int(2)),
        ],
        3,
        vec![rat_int(2), rat_int(4), rat_int(4)],
        None,
    )
    .unwrap()
}

/// Single item with v = w = T and capacity t at period t.
fn tight_single_item(t: usize) -> Instance {
    Instance::new(
        vec![Item::new("i1", rat_int(t as i64), rat_int(t as i64))],
        t,
        (1..=t as i64).map(rat_int).collect(),
        None,
    )
    .unwrap()
}

fn seeded(seed: u64, items: usize, horizon: usize) -> Instance {
    let fills = [rat(7, 20), rat(3, 5), rat(17, 20), rat(11, 10)];
    gen_random(&RandomParams {
        items,
        horizon,
        seed,
        value_range: (1, 100),
        weight_range: (1, 100),
        fill_factor: fills[(seed / 4) as usize % fills.len()].clone(),
        discount_rate: None,
    })
    .expect("valid parameters")
}

/// 200 seeded undiscounted instances with up to 8 items over up to 4
/// periods, plus the worked examples and two gap-family members.
fn guarantee_corpus() -> Vec<Instance> {
    let mut corpus: Vec<Instance> = (0..200u64)
        .map(|seed| seeded(seed, 2 + (seed % 7) as usize, 1 + (seed % 4) as usize))
        .collect();
    corpus.push(e1());
    corpus.push(e2());
    corpus.push(gen_gap_family(2, 2).unwrap());
    corpus.push(gen_gap_family(3, 2).unwrap());
    corpus
}

/// 100 seeded undiscounted instances with up to 8 items over up to 3
/// periods, for the scheme's bound.
fn scheme_corpus() -> Vec<Instance> {
    (1000..1100u64)
        .map(|seed| seeded(seed, 1 + (seed % 8) as usize, 1 + (seed % 3) as usize))
        .collect()
}

fn assert_feasible(inst: &Instance, schedule: &Schedule, context: &str) {
    let rep = check_feasible(inst, schedule).unwrap();
    assert!(
        rep.feasible(),
        "{context}: schedule violates capacity: {:?}",
        rep.violations
    );
}

const REL_TOL_NUM: i64 = 1;
const REL_TOL_DEN: i64 = 1_000_000;

fn within_relative(lhs: &Rat, bound: &Rat) -> bool {
    // lhs >= bound * (1 - 1e-6)
    *lhs >= bound * (rat_int(1) - rat(REL_TOL_NUM, REL_TOL_DEN))
}

#[test]
fn acceptance_01_constant_factor_guarantee() {
    let corpus = guarantee_corpus();
    let mut worst_ratio: Option<Rat> = None;
    for (idx, inst) in corpus.iter().enumerate() {
        let result = solve_constant_factor(inst, 1).unwrap();
        assert_feasible(inst, &result.schedule, &format!("instance {idx}"));
        let opt = brute_force(inst).unwrap();
        assert_feasible(inst, &opt.schedule, &format!("oracle on instance {idx}"));
        let factor = result.claimed_factor.clone().expect("factor always claimed");
        let bound = &factor * &opt.value;
        assert!(
            result.value <= opt.value,
            "instance {idx}: approximation beat the oracle"
        );
        assert!(
            within_relative(&result.value, &bound),
            "instance {idx}: value {} below {} * OPT {}",
            result.value,
            factor,
            opt.value
        );
        if opt.value > rat_int(0) {
            let ratio = &result.value / &opt.value;
            if worst_ratio.as_ref().is_none_or(|w| ratio < *w) {
                worst_ratio = Some(ratio);
            }
        }

        // dichotomy behind the guarantee: when no replicated candidate
        // reaches a third of the optimum, some interior period carries a
        // third of the oracle value on each side
        let best_replicated = (1..=inst.horizon())
            .map(|t| replicated_solution(inst, t).unwrap().value)
            .max()
            .unwrap_or_else(|| rat_int(0));
        if &best_replicated * rat_int(3) < opt.value {
            let horizon = inst.horizon();
            let mut per_period = vec![rat_int(0); horizon + 1];
            for (t, slot) in per_period.iter_mut().enumerate().skip(1) {
                let mut v = rat_int(0);
                for (i, item) in inst.items().iter().enumerate() {
                    if opt.schedule.contains_at(i, t) {
                        v += &item.value * inst.discount(t);
                    }
                }
                *slot = v;
            }
            let total = opt.value.clone();
            let third = &total / rat_int(3);
            let found = (2..horizon).any(|t| {
                let early: Rat = per_period[1..t].iter().cloned().sum();
                let late: Rat = per_period[t..=horizon].iter().cloned().sum();
                early >= third && late >= third
            });
            assert!(
                found,
                "instance {idx}: replicated below OPT/3 with no interior third split"
            );
        }
    }
    report(
        "01 constant-factor guarantee",
        format!(
            "{} instances, worst value/OPT ratio {:.4}",
            corpus.len(),
            worst_ratio.map(|r| rat_to_f64(&r)).unwrap_or(1.0)
        ),
    );
}

#[test]
fn acceptance_02_scheme_guarantee() {
    let corpus = scheme_corpus();
    let mut worst: Option<f64> = None;
    for (idx, inst) in corpus.iter().enumerate() {
        let opt = brute_force(inst).unwrap();
        for eps in [rat(3, 10), rat(1, 2)] {
            let result = solve_ptas(inst, &eps, DEFAULT_LP_BUDGET, 2).unwrap();
            assert_feasible(inst, &result.schedule, &format!("instance {idx}"));
            assert!(
                result.value <= opt.value,
                "instance {idx}: scheme beat the oracle"
            );
            let keep = rat_int(1) - &eps;
            let bound = &keep * &keep * &opt.value;
            assert!(
                within_relative(&result.value, &bound),
                "instance {idx} eps {}: value {} below (1-eps)^2 * OPT {}",
                eps,
                result.value,
                opt.value
            );
            if opt.value > rat_int(0) {
                let ratio = rat_to_f64(&(&result.value / &opt.value));
                if worst.is_none_or(|w| ratio < w) {
                    worst = Some(ratio);
                }
            }
        }
    }
    report(
        "02 scheme guarantee",
        format!(
            "{} instances x 2 epsilons, worst value/OPT ratio {:.4}",
            corpus.len(),
            worst.unwrap_or(1.0)
        ),
    );
}

#[test]
fn acceptance_03_single_item_relaxation_values() {
    for horizon in 2..=6usize {
        let inst = tight_single_item(horizon);
        let weak = solve_lp(&build_relaxation(&inst, false)).unwrap();
        let (_, weak_value) = weak.optimal().expect("feasible relaxation");
        let expect = (horizon * (horizon + 1)) as f64 / 2.0;
        assert!(
            (weak_value - expect).abs() <= 1e-6,
            "T={horizon}: plain relaxation {weak_value} != {expect}"
        );
        let opt = brute_force(&inst).unwrap();
        assert_eq!(opt.value, rat_int(horizon as i64), "T={horizon} oracle value");
    }
    report(
        "03 single-item relaxation values",
        "plain LP = T(T+1)/2 and oracle = T for T = 2..=6".to_string(),
    );
}

#[test]
fn acceptance_04_gap_family_values() {
    let mut lines = Vec::new();
    for (k, m, expect_ip) in [(2u64, 2u32, 8i64), (3, 2, 27)] {
        let inst = gen_gap_family(k, m).unwrap();
        let horizon = inst.horizon();
        let report_ = gap_report(&inst).unwrap();
        // T(k-1)log_k(T) + T with T = k^m, so log_k(T) = m
        let expect_lp = (horizon as f64) * ((k - 1) as f64) * (m as f64) + horizon as f64;
        assert!(
            (report_.lp_value - expect_lp).abs() <= 1e-6,
            "(k={k}, m={m}): strengthened LP {} != {expect_lp}",
            report_.lp_value
        );
        assert_eq!(report_.ip_value, rat_int(expect_ip), "(k={k}, m={m}) oracle");
        let ratio = report_.ratio.expect("positive optimum");
        lines.push(format!("(k={k}, m={m}): lp={}, ip={expect_ip}, ratio={ratio:.4}", report_.lp_value));
    }
    report("04 gap-family values", lines.join("; "));
}

/// Runs every disjunct of every corpus instance through the two-stage
/// solve and hands the results to `check`.
fn for_each_stage_result(check: &mut dyn FnMut(&Instance, &StageResult, usize)) -> (usize, usize) {
    let corpus = guarantee_corpus();
    let mut solved = 0usize;
    let mut skipped = 0usize;
    for inst in &corpus {
        let perturbed = perturb_values(inst, &rat(1, 1_000_000_000));
        let pinst = &perturbed.instance;
        for spec in disjunct_specs(pinst) {
            match solve_two_stage(pinst, &spec).unwrap() {
                Some(stage) => {
                    solved += 1;
                    check(pinst, &stage, spec.pivot_period);

                    // The cleaned point still satisfies capacity,
                    // precedence, box bounds, and the stage-2 value
                    // floors. The dominance pins are deliberately not
                    // asserted: concentrating fractional mass can
                    // require raising a pinned item (some optima keep
                    // two fractions in a period otherwise), and the
                    // pins do not affect the rounded schedule.
                    let mut lp = build_disjunct_lp(
                        pinst,
                        &spec,
                        Stage::Two {
                            stage1_value: stage.stage1_value,
                        },
                    );
                    let anchor_value = &pinst.item(spec.anchor_item).value;
                    for (i, item) in pinst.items().iter().enumerate() {
                        if item.value > *anchor_value {
                            let j = i * pinst.horizon() + (spec.pivot_period - 1);
                            lp.set_bounds(j, 0.0, 1.0);
                        }
                    }
                    let x: Vec<f64> = stage.fractional.iter().map(rat_to_f64).collect();
                    let residuals = check_solution(&lp, &x, 1e-7);
                    assert!(
                        residuals.within_tolerance(),
                        "cleaned point violates stage-2 rows: {residuals:?}"
                    );
                }
                None => skipped += 1,
            }
        }
    }
    (solved, skipped)
}

#[test]
fn acceptance_05_one_fraction_per_period() {
    let frac_lo = rat(1, 10_000_000);
    let frac_hi = rat_int(1) - rat(1, 10_000_000);
    let tol = rat(1, 1_000_000_000);
    let (solved, skipped) = for_each_stage_result(&mut |inst, stage, _pivot| {
        let n = inst.item_count();
        let horizon = inst.horizon();
        for t in 1..=horizon {
            let fractional = (0..n)
                .filter(|&i| {
                    let v = &stage.fractional[i * horizon + (t - 1)];
                    *v > frac_lo && *v < frac_hi
                })
                .count();
            assert!(
                fractional <= 1,
                "period {t} has {fractional} fractional items after cleanup"
            );
        }
        assert!(
            stage.objective >= &stage.objective_raw - &tol,
            "cleanup lowered the objective: {} -> {}",
            stage.objective_raw,
            stage.objective
        );
    });
    report(
        "05 one fraction per period",
        format!("{solved} disjuncts solved, {skipped} empty"),
    );
}

#[test]
fn acceptance_06_round_down_bound() {
    let (solved, _) = for_each_stage_result(&mut |inst, stage, pivot| {
        let suffix = inst.discount_suffix_sums();
        let late = suffix[pivot].clone();
        let early = &suffix[1] - &late;
        let mut scale = rat(1, 6);
        if early > rat_int(0) && late < early {
            scale *= &late / &early;
        }
        let bound = &scale * &stage.objective;
        assert!(
            stage.rounded_value >= &bound - rat(1, 1_000_000),
            "rounded value {} below bound {} at pivot {pivot}",
            stage.rounded_value,
            bound
        );
    });
    report(
        "06 round-down bound",
        format!("checked on {solved} solved disjuncts"),
    );
}

type ProfileCheck<'a> = dyn FnMut(&Instance, &ValueClassing, &Profile, &[f64], &Schedule) + 'a;

/// Solves every profile LP of every anchor and hands the vertex and its
/// rounded schedule to `check`. Returns the number of solved disjuncts.
fn for_each_profile_point(corpus: &[Instance], eps: &Rat, check: &mut ProfileCheck) -> usize {
    let mut solved = 0usize;
    for inst in corpus {
        for anchor in 0..inst.item_count() {
            let classing = build_classes(inst, anchor, eps).unwrap();
            for anchor_period in anchor_periods(inst, anchor) {
                for profile in
                    enumerate_profiles(&classing, inst.horizon(), DEFAULT_LP_BUDGET).unwrap()
                {
                    let lp = build_profile_lp(inst, &classing, &profile, anchor_period);
                    let Some((x, _)) =
                        solve_lp(&lp).unwrap().optimal().map(|(x, v)| (x.to_vec(), v))
                    else {
                        continue;
                    };
                    solved += 1;
                    let schedule = assemble(&x, inst, &classing, &profile);
                    assert_feasible(inst, &schedule, "assembled profile point");
                    check(inst, &classing, &profile, &x, &schedule);
                }
            }
        }
    }
    solved
}

#[test]
fn acceptance_07_class_and_tail_rounding_bounds() {
    // The per-disjunct sweep is the expensive half of the suite, so the
    // class/tail bounds are checked on a slice of the scheme corpus.
    let corpus: Vec<Instance> = scheme_corpus().into_iter().take(40).collect();
    let mut checked = 0usize;
    for eps in [rat(3, 10), rat(1, 2)] {
        let keep = rat_int(1) - &eps;
        checked += for_each_profile_point(&corpus, &eps, &mut |inst, classing, profile, x, schedule| {
            let horizon = inst.horizon();
            // per-class: counts stay monotone and the assembled modified
            // value keeps at least (1-eps) of the vertex's class value
            for (k, class) in classing.classes.iter().enumerate() {
                if class.is_empty() {
                    continue;
                }
                let counts =
                    inkspan::ptas::round_class(x, inst, classing, k, &profile.per_class[k]);
                assert!(
                    counts.windows(2).all(|w| w[0] <= w[1]),
                    "class counts decreased over time: {counts:?}"
                );
                let mut vertex_value = 0.0;
                let mut assembled_value = rat_int(0);
                for &item in class {
                    let pos = classing.member_pos(item).unwrap();
                    let modified = &classing.modified[pos];
                    for t in 1..=horizon {
                        vertex_value += rat_to_f64(modified) * x[pos * horizon + (t - 1)];
                        if schedule.contains_at(item, t) {
                            assembled_value += modified;
                        }
                    }
                }
                let bound = rat_to_f64(&(&keep * &assembled_value)) + 1e-6;
                let _ = bound;
                assert!(
                    rat_to_f64(&assembled_value) >= rat_to_f64(&keep) * vertex_value - 1e-6,
                    "class rounding lost more than eps: kept {assembled_value}, vertex {vertex_value}"
                );
            }
            // tail: loss at most eps * anchor value
            if !classing.tail.is_empty() {
                let mut vertex_tail = 0.0;
                let mut kept_tail = rat_int(0);
                for &item in &classing.tail {
                    let pos = classing.member_pos(item).unwrap();
                    for t in 1..=horizon {
                        vertex_tail += rat_to_f64(&classing.modified[pos]) * x[pos * horizon + (t - 1)];
                        if schedule.contains_at(item, t) {
                            kept_tail += &classing.modified[pos];
                        }
                    }
                }
                let anchor_value = &inst.item(classing.anchor_item).value;
                let allowance = rat_to_f64(&(&eps * anchor_value)) + 1e-6;
                assert!(
                    vertex_tail - rat_to_f64(&kept_tail) <= allowance,
                    "tail rounding lost {} > eps * v_h = {allowance}",
                    vertex_tail - rat_to_f64(&kept_tail)
                );
            }
        });
    }
    report(
        "07 class and tail rounding bounds",
        format!("checked on {checked} solved disjuncts"),
    );
}

#[test]
fn acceptance_08_profile_counts_match_enumeration() {
    fn splitmix(state: &mut u64) -> u64 {
        *state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
    let mut state = 42u64;
    let mut done = 0usize;
    let mut attempts = 0usize;
    while done < 20 {
        attempts += 1;
        assert!(attempts < 1000, "could not sample enough configurations");
        let class_count = 1 + (splitmix(&mut state) % 4) as usize;
        let horizon = 1 + (splitmix(&mut state) % 4) as usize;
        let prefix_cap = 1 + (splitmix(&mut state) % 4) as u32;
        let sizes: Vec<usize> = (0..class_count)
            .map(|_| (splitmix(&mut state) % 7) as usize)
            .collect();
        let mut next_item = 1usize;
        let classes: Vec<Vec<usize>> = sizes
            .iter()
            .map(|&s| {
                let c: Vec<usize> = (next_item..next_item + s).collect();
                next_item += s;
                c
            })
            .collect();
        let members: Vec<usize> = (0..next_item).collect();
        let classing = ValueClassing {
            anchor_item: 0,
            eps: rat(1, 2),
            class_count,
            prefix_cap,
            classes,
            tail: vec![],
            modified: vec![rat_int(1); members.len()],
            members,
        };
        let projected = profile_count(&classing, horizon);
        if projected > 100_000 {
            continue;
        }
        let streamed = enumerate_profiles(&classing, horizon, 100_000)
            .unwrap()
            .count() as u128;
        assert_eq!(
            streamed, projected,
            "stream length mismatch for sizes {sizes:?}, J={prefix_cap}, T={horizon}"
        );
        done += 1;
    }
    report(
        "08 profile counts match enumeration",
        format!("{done} sampled configurations"),
    );
}

#[test]
fn acceptance_09_three_partition_reduction() {
    let yes = gen_3partition(&[10, 11, 11, 10, 10, 12]).unwrap();
    assert_eq!(yes.target, rat_int(96));
    let yes_opt = brute_force(&yes.instance).unwrap();
    assert_feasible(&yes.instance, &yes_opt.schedule, "yes-instance oracle");
    assert_eq!(yes_opt.value, rat_int(96), "yes-instance must reach the target");

    let no = gen_3partition(&[10, 10, 10, 10, 10, 14]).unwrap();
    assert_eq!(no.target, rat_int(96));
    let no_opt = brute_force(&no.instance).unwrap();
    assert!(
        no_opt.value < no.target,
        "no-instance reached the target: {}",
        no_opt.value
    );
    assert_eq!(no_opt.value, rat_int(94));
    report(
        "09 three-partition reduction",
        "yes-instance reaches 96, no-instance stops at 94".to_string(),
    );
}

#[test]
fn acceptance_10_feasibility_sweep() {
    let mut schedules = 0usize;
    let mut sweep = |inst: &Instance, schedule: &Schedule, context: &str| {
        assert_feasible(inst, schedule, context);
        schedules += 1;
    };

    let corpus = guarantee_corpus();
    for (idx, inst) in corpus.iter().enumerate() {
        let opt = brute_force(inst).unwrap();
        sweep(inst, &opt.schedule, &format!("oracle {idx}"));
        let cf = solve_constant_factor(inst, 1).unwrap();
        sweep(inst, &cf.schedule, &format!("constant {idx}"));
        for t in 1..=inst.horizon() {
            let rep = replicated_solution(inst, t).unwrap();
            sweep(inst, &rep.schedule, &format!("replicated {idx}@{t}"));
        }
    }
    // per-disjunct rounded schedules on a slice
    for inst in corpus.iter().step_by(10) {
        let perturbed = perturb_values(inst, &rat(1, 1_000_000_000));
        for spec in disjunct_specs(&perturbed.instance) {
            if let Some(stage) = solve_two_stage(&perturbed.instance, &spec).unwrap() {
                sweep(
                    &perturbed.instance,
                    &stage.schedule,
                    "disjunct rounding",
                );
            }
        }
    }
    for (idx, inst) in scheme_corpus().iter().enumerate() {
        for eps in [rat(3, 10), rat(1, 2)] {
            let res = solve_ptas(inst, &eps, DEFAULT_LP_BUDGET, 2).unwrap();
            sweep(inst, &res.schedule, &format!("scheme {idx}"));
        }
    }
    // tail roundings are also schedules in their own right
    let inst = e1();
    let classing = build_classes(&inst, 0, &rat(1, 2)).unwrap();
    let times = round_tail(&[0.0; 4], &inst, &classing);
    assert!(times.iter().all(|t| t.is_none()));

    report("10 feasibility sweep", format!("{schedules} schedules checked"));
}

/// The scheme's internal chain: the assembled point keeps at least
/// (1 - eps) of its own disjunct's LP optimum in modified values. Kept
/// alongside the acceptance criteria as a module invariant.
#[test]
fn scheme_assembled_value_tracks_lp_optimum() {
    let corpus: Vec<Instance> = scheme_corpus().into_iter().take(30).collect();
    for eps in [rat(3, 10), rat(1, 2)] {
        let keep = rat_int(1) - &eps;
        for inst in &corpus {
            for anchor in 0..inst.item_count() {
                let classing = build_classes(inst, anchor, &eps).unwrap();
                for anchor_period in anchor_periods(inst, anchor) {
                    for profile in
                        enumerate_profiles(&classing, inst.horizon(), DEFAULT_LP_BUDGET).unwrap()
                    {
                        let lp = build_profile_lp(inst, &classing, &profile, anchor_period);
                        let Some((x, lp_value)) =
                            solve_lp(&lp).unwrap().optimal().map(|(x, v)| (x.to_vec(), v))
                        else {
                            continue;
                        };
                        let schedule = assemble(&x, inst, &classing, &profile);
                        let assembled = modified_value(&classing, &schedule, inst.horizon());
                        assert!(
                            rat_to_f64(&assembled) >= rat_to_f64(&keep) * lp_value - 1e-6,
                            "assembled {assembled} below (1-eps) * {lp_value}"
                        );
                    }
                }
            }
        }
    }
}
