//! Acceptance criteria 1-8. Each test prints one PASS/FAIL line and then
//! asserts, so `cargo test --test acceptance` doubles as a report.

mod common;

use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    best_memoryless, certify_plays, peak_rss, random_formula, random_trace, reduced_and_ordered, reset_peak_rss,
    verdict, Tab,
};
use qsynth::dd::{Manager, Op, Quant, VarId};
use qsynth::domain::{
    abstract_game, gen_benchmark, random_small, two_region, BenchParams, ManipInstance, ManipModel, Region,
    DEFAULT_MAX_STATES,
};
use qsynth::ltlf::{parse, to_dfa};
use qsynth::pipeline::{auto_budget, run, Objective, RunConfig, SolverKind, Task};
use qsynth::regret::{brute_force_regret, explicit_regret, symbolic_regret, AlternateMode};
use qsynth::solvers::{accepting_targets, build_product, explicit_vi, rollout, symbolic_vi_weighted, HumanPolicy};
use qsynth::symgame::{EncodeOptions, SymbolicGame, TrKind};
use qsynth::Value;

// Criteria run one at a time so their wall-clock limits mean something.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn small_task(seed: u64) -> Task {
    let (inst, formula) = random_small(seed);
    Task::manip(&format!("small-{seed}"), &inst, Some(&formula), DEFAULT_MAX_STATES).unwrap()
}

fn cfg(solver: SolverKind, objective: Objective) -> RunConfig {
    RunConfig { solver, objective, ..RunConfig::default() }
}

fn encode(task: &Task, budget: Option<u64>) -> SymbolicGame {
    SymbolicGame::encode(&abstract_game(&task.game), &task.dfa, EncodeOptions { budget, max_vars: None }).unwrap()
}

// ------------------------------------------------------------ criterion 1

/// Row `r` of a table as a `from_table` code (`vars[0]` is the MSB).
fn code_of(r: usize, n: usize) -> u128 {
    (0..n).filter(|&i| r >> i & 1 == 1).map(|i| 1u128 << (n - 1 - i)).sum()
}

fn build_by_table(mgr: &mut Manager, vars: &[VarId], t: &Tab) -> qsynth::dd::NodeRef {
    let entries: Vec<(u128, Value)> = t.rows.iter().enumerate().map(|(r, &v)| (code_of(r, t.n), v)).collect();
    mgr.from_table(&vars[..t.n], &entries, Value::ZERO).unwrap()
}

#[test]
fn criterion_1_decision_diagrams() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mgr = Manager::new();
    let vars = mgr.new_vars(10).unwrap();
    let mut wrong = Vec::new();
    for i in 0..10_000 {
        let n = rng.gen_range(1..=10);
        let kind = rng.gen_range(0..6);
        let (got, want) = match kind {
            0 => {
                let (a, b) = (Tab::random(&mut rng, n, true), Tab::random(&mut rng, n, true));
                let (op, f): (Op, fn(bool, bool) -> bool) = match rng.gen_range(0..3) {
                    0 => (Op::And, |x, y| x && y),
                    1 => (Op::Or, |x, y| x || y),
                    _ => (Op::Xor, |x, y| x != y),
                };
                let want = a.map2(&b, |x, y| Value::Finite(f(Tab::bit(x), Tab::bit(y)) as i64));
                let (fa, fb) = (a.build(&mut mgr, &vars), b.build(&mut mgr, &vars));
                (mgr.apply(op, fa, fb).unwrap(), want)
            }
            1 => {
                let (a, b) = (Tab::random(&mut rng, n, false), Tab::random(&mut rng, n, false));
                let (op, f): (Op, fn(Value, Value) -> Value) = match rng.gen_range(0..4) {
                    0 => (Op::Plus, Value::plus),
                    1 => (Op::Min, std::cmp::min),
                    2 => (Op::Max, std::cmp::max),
                    _ => (Op::Times, Value::times),
                };
                let want = a.map2(&b, f);
                let (fa, fb) = (a.build(&mut mgr, &vars), build_by_table(&mut mgr, &vars, &b));
                (mgr.apply(op, fa, fb).unwrap(), want)
            }
            2 => {
                let c = Tab::random(&mut rng, n, true);
                let (a, b) = (Tab::random(&mut rng, n, false), Tab::random(&mut rng, n, false));
                let want = Tab {
                    n,
                    rows: (0..c.rows.len()).map(|r| if Tab::bit(c.rows[r]) { a.rows[r] } else { b.rows[r] }).collect(),
                };
                let fc = c.build(&mut mgr, &vars);
                let (fa, fb) = (a.build(&mut mgr, &vars), b.build(&mut mgr, &vars));
                (mgr.ite(fc, fa, fb).unwrap(), want)
            }
            3 => {
                let set: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
                let qvars: Vec<VarId> = set.iter().map(|&i| vars[i]).collect();
                let (q, boolean, f): (Quant, bool, fn(Value, Value) -> Value) = match rng.gen_range(0..4) {
                    0 => (Quant::Exists, true, std::cmp::max),
                    1 => (Quant::Forall, true, std::cmp::min),
                    2 => (Quant::MinAbstract, false, std::cmp::min),
                    _ => (Quant::MaxAbstract, false, std::cmp::max),
                };
                let a = Tab::random(&mut rng, n, boolean);
                let want = a.abstract_vars(&set, f);
                let fa = a.build(&mut mgr, &vars);
                (mgr.quantify(q, fa, &qvars).unwrap(), want)
            }
            4 => {
                let a = Tab::random(&mut rng, n, false);
                let g = Tab::random(&mut rng, n, true);
                let v = rng.gen_range(0..n);
                let want = a.compose(v, &g);
                let (fa, fg) = (a.build(&mut mgr, &vars), g.build(&mut mgr, &vars));
                (mgr.compose(fa, vars[v], fg).unwrap(), want)
            }
            _ => {
                let a = Tab::random(&mut rng, n, true);
                let v = rng.gen_range(0..n);
                let b = rng.gen_bool(0.5);
                let want = Tab {
                    n,
                    rows: (0..a.rows.len())
                        .map(|r| {
                            let r2 = if b { r | 1 << v } else { r & !(1 << v) };
                            Value::Finite(1 - a.rows[r2].finite().unwrap())
                        })
                        .collect(),
                };
                let fa = a.build(&mut mgr, &vars);
                let fr = mgr.restrict(fa, vars[v], b).unwrap();
                (mgr.negate(fr).unwrap(), want)
            }
        };
        if Tab::read(&mgr, got, n) != want || !reduced_and_ordered(&mgr, got) {
            wrong.push((i, kind));
        }
        if i % 256 == 255 {
            mgr.collect_garbage(&[]).unwrap();
        }
    }

    // canonicity: equal functions built by two routes share a handle
    let mut canon_wrong = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=10);
        let a = Tab::random(&mut rng, n, false);
        let b = match rng.gen_range(0..3) {
            0 => a.clone(),
            1 => {
                let mut b = a.clone();
                let r = rng.gen_range(0..b.rows.len());
                b.rows[r] = b.rows[r].plus(Value::ONE);
                b
            }
            _ => Tab::random(&mut rng, n, false),
        };
        let fa = a.build(&mut mgr, &vars);
        let fb = build_by_table(&mut mgr, &vars, &b);
        if (fa == fb) != (a == b) || Tab::read(&mgr, fb, n) != b {
            canon_wrong += 1;
        }
        mgr.collect_garbage(&[]).unwrap();
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = wrong.is_empty() && canon_wrong == 0 && secs < 60.0;
    verdict(
        1,
        pass,
        &format!("{} op mismatches of 10000, {canon_wrong} canonicity failures of 1000, {secs:.1}s", wrong.len()),
    );
    assert!(pass, "first mismatches (iteration, kind): {:?}", &wrong[..wrong.len().min(10)]);
}

// ------------------------------------------------------------ criterion 2

#[test]
fn criterion_2_ltlf_translation() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pool = ["a", "b", "c"];
    let mut wrong = Vec::new();
    for _ in 0..200 {
        let k = rng.gen_range(1..=3);
        let atoms = &pool[..k];
        // derived operators expand, so resample until the stored depth fits
        let phi = loop {
            let f = random_formula(&mut rng, atoms, 4);
            if f.depth() <= 4 {
                break f;
            }
        };
        let dfa = to_dfa(&phi).unwrap();
        for _ in 0..200 {
            let trace = random_trace(&mut rng, atoms, 6);
            if dfa.accepts(&trace) != phi.evaluate(&trace) {
                wrong.push(format!("{phi:?} on {trace:?}"));
            }
        }
    }
    let fp = to_dfa(&parse("F p", None).unwrap()).unwrap();
    let pass = wrong.is_empty() && fp.num_states() == 2;
    verdict(2, pass, &format!("{} disagreements on 40000 traces, F p has {} states", wrong.len(), fp.num_states()));
    assert!(pass, "{:?}", wrong.first());
}

// ------------------------------------------------------------ criterion 3

#[test]
fn criterion_3_symbolic_matches_explicit() {
    let _g = serial();
    let start = Instant::now();
    let mut compared = 0usize;
    let mut wrong = Vec::new();
    for seed in 0..50 {
        let task = small_task(seed);
        let p = build_product(&task.game, &task.dfa).unwrap();
        let sol = explicit_vi(&p);
        let mut sg = encode(&task, None);
        let t = accepting_targets(&mut sg).unwrap();
        let mono = symbolic_vi_weighted(&mut sg, TrKind::Monolithic, t).unwrap();
        let part = symbolic_vi_weighted(&mut sg, TrKind::Partitioned, t).unwrap();
        for (i, &(v, z)) in p.robot.iter().enumerate() {
            let e = sol.robot_values[i];
            let m = mono.layers.value_of(&sg, v as usize, z as usize).unwrap();
            let q = part.layers.value_of(&sg, v as usize, z as usize).unwrap();
            compared += 1;
            if e != m || e != q {
                wrong.push((seed, v, z, e, m, q));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = wrong.is_empty() && elapsed < Duration::from_secs(300);
    verdict(
        3,
        pass,
        &format!("50 instances, {compared} product states, {} mismatches, {:.1}s", wrong.len(), elapsed.as_secs_f64()),
    );
    assert!(pass, "{:?}", wrong.first());
}

// ------------------------------------------------------------ criterion 4

#[test]
fn criterion_4_strategies_achieve_the_value() {
    let _g = serial();
    let mut checked = 0;
    let mut plays = 0;
    let mut problems = Vec::new();
    for seed in 0.. {
        if checked == 20 {
            break;
        }
        assert!(seed < 1000, "too few small instances with a finite value");
        let task = small_task(seed);
        let phi = parse(&task.formula, None).unwrap();
        let p = build_product(&task.game, &task.dfa).unwrap();
        let w = explicit_vi(&p).initial_value(&p);
        if !matches!(w, Value::Finite(x) if x <= 8) {
            continue;
        }
        checked += 1;
        for solver in SolverKind::ALL {
            let c = run(&task, &cfg(solver, Objective::Minmax)).unwrap().controller.unwrap();
            match certify_plays(&task.game, &c, &phi, w, 8) {
                Ok(n) => plays += n,
                Err(e) => problems.push(format!("seed {seed} {}: {e}", solver.name())),
            }
        }
        match best_memoryless(&task.game, &task.dfa, 2_000_000) {
            Some(best) if best == w => {}
            other => problems.push(format!("seed {seed}: best memoryless strategy {other:?}, value {w}")),
        }
    }
    let pass = problems.is_empty();
    verdict(4, pass, &format!("20 instances, {plays} plays certified, {} problems", problems.len()));
    assert!(pass, "{problems:?}");
}

// ------------------------------------------------------------ criterion 5

#[test]
fn criterion_5_regret_matches_brute_force() {
    let _g = serial();
    let start = Instant::now();
    let mut checked = 0;
    let mut wrong = Vec::new();
    let mut feasible = 0;
    for seed in 0.. {
        if checked == 20 {
            break;
        }
        assert!(seed < 2000, "too few tiny instances");
        let task = small_task(seed);
        let p = build_product(&task.game, &task.dfa).unwrap();
        if p.num_states() > 200 {
            continue;
        }
        let Some(w) = explicit_vi(&p).initial_value(&p).finite() else { continue };
        if w > 10 {
            continue;
        }
        checked += 1;
        let b = auto_budget(w as u64).min(10);
        let ex = explicit_regret(&task.game, &task.dfa, b, DEFAULT_MAX_STATES).unwrap().regret.map(|r| r as i64);
        let mut sym = Vec::new();
        for kind in [TrKind::Monolithic, TrKind::Partitioned] {
            let mut sg = encode(&task, Some(b));
            sym.push(symbolic_regret(&mut sg, kind).unwrap().result.regret.map(|r| r as i64));
        }
        let bf =
            brute_force_regret(&task.game, &task.dfa, b, AlternateMode::AllAlternates, DEFAULT_MAX_STATES).unwrap();
        feasible += bf.is_some() as usize;
        if ex != bf || sym.iter().any(|&s| s != bf) {
            wrong.push((seed, b, ex, sym, bf));
        }
    }
    let elapsed = start.elapsed();
    let pass = wrong.is_empty() && elapsed < Duration::from_secs(600);
    verdict(
        5,
        pass,
        &format!("20 instances ({feasible} feasible), {} disagreements, {:.1}s", wrong.len(), elapsed.as_secs_f64()),
    );
    assert!(pass, "{wrong:?}");
}

// ------------------------------------------------------------ criterion 6

fn action_region(inst: &ManipInstance, model: &ManipModel, a: u32) -> Region {
    inst.locations[model.robot_action_location(a as usize)].region
}

#[test]
fn criterion_6_regret_hands_over_where_minmax_does_not() {
    let _g = serial();
    let mut good = 0;
    let mut notes = Vec::new();
    for seed in 0..10 {
        let (inst, formula) = two_region(seed);
        let model = ManipModel::new(inst.clone());
        let task = Task::manip("two_region", &inst, Some(&formula), DEFAULT_MAX_STATES).unwrap();
        let mm = run(&task, &cfg(SolverKind::SymbolicMonolithic, Objective::Minmax)).unwrap().controller.unwrap();
        let rg = run(&task, &cfg(SolverKind::SymbolicMonolithic, Objective::Regret)).unwrap().controller.unwrap();

        let minmax_stays_home =
            mm.nodes.iter().filter_map(|n| n.action).all(|a| action_region(&inst, &model, a) == Region::RobotOnly);
        let mm_coop = rollout(&mm, &HumanPolicy::Cooperative, 1000).unwrap();
        let rg_coop = rollout(&rg, &HumanPolicy::Cooperative, 1000).unwrap();
        let hands_over = rg_coop.steps.iter().filter_map(|s| s.robot.as_deref()).any(|name| {
            let a = task.game.robot_actions.iter().position(|x| x.name == name).unwrap();
            action_region(&inst, &model, a as u32) != Region::RobotOnly
        });
        let cheaper = rg_coop.accepted && rg_coop.payoff < mm_coop.payoff;
        if minmax_stays_home && hands_over && cheaper {
            good += 1;
        } else {
            notes.push(format!(
                "seed {seed}: minmax robot-only {minmax_stays_home}, regret hands over {hands_over}, cooperative payoffs {} vs {}",
                rg_coop.payoff, mm_coop.payoff
            ));
        }
    }
    let pass = good >= 9;
    verdict(6, pass, &format!("{good}/10 seeds show the behaviour"));
    assert!(pass, "{notes:?}");
}

// ------------------------------------------------------------ criterion 7

#[test]
fn criterion_7_symbolic_scales_to_seven_locations() {
    let _g = serial();
    let inst = gen_benchmark(&BenchParams::new(7, 3, 0));
    let task = Task::manip("bench-l7-o3", &inst, None, DEFAULT_MAX_STATES).unwrap();
    reset_peak_rss();
    let start = Instant::now();
    let out = run(&task, &cfg(SolverKind::SymbolicMonolithic, Objective::Minmax)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let rss = peak_rss();
    let product = build_product(&task.game, &task.dfa).unwrap().num_states();

    // default regret budget on a smaller instance
    let small = gen_benchmark(&BenchParams::new(4, 2, 0));
    let small = Task::manip("bench-l4-o2", &small, None, DEFAULT_MAX_STATES).unwrap();
    let r = run(&small, &cfg(SolverKind::SymbolicMonolithic, Objective::Regret)).unwrap().report;
    let w = r.minmax.and_then(Value::finite).unwrap() as u64;
    let budget_ok = r.budget_auto && r.budget == Some(auto_budget(w));

    let mem_ok = rss.is_some_and(|b| b < 1 << 30);
    let pass = out.report.feasible && secs < 60.0 && mem_ok && budget_ok;
    verdict(
        7,
        pass,
        &format!(
            "value {:?}, {secs:.1}s, peak RSS {} MiB, {} game states, {product} explicit product states, {} peak nodes, auto budget {:?} for W={w}",
            out.report.minmax,
            rss.map_or(-1, |b| (b >> 20) as i64),
            task.game.robot_states.len() + task.game.human_states.len(),
            out.report.peak_nodes,
            r.budget,
        ),
    );
    assert!(pass);
}

// ------------------------------------------------------------ criterion 8

#[test]
fn criterion_8_partitioned_equals_monolithic() {
    let _g = serial();
    let mut tasks: Vec<Task> = (0..50).map(small_task).collect();
    for l in 3..=7 {
        let inst = gen_benchmark(&BenchParams::new(l, 3, 0));
        tasks.push(Task::manip(&format!("bench-l{l}-o3"), &inst, None, DEFAULT_MAX_STATES).unwrap());
    }
    let mut wrong = Vec::new();
    for task in &tasks {
        let mut sg = encode(task, None);
        let t = accepting_targets(&mut sg).unwrap();
        let mono = symbolic_vi_weighted(&mut sg, TrKind::Monolithic, t).unwrap();
        let part = symbolic_vi_weighted(&mut sg, TrKind::Partitioned, t).unwrap();
        if mono.layers != part.layers {
            wrong.push(task.name.clone());
        }
    }
    let pass = wrong.is_empty();
    verdict(8, pass, &format!("{} instances, {} with differing value layers", tasks.len(), wrong.len()));
    assert!(pass, "{wrong:?}");
}
