use std::collections::{BTreeMap, BTreeSet, VecDeque};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::domain::{abstract_game, random_game, ActionInfo, Game, RandomGameParams, StateInfo};
use crate::ltlf::{parse, to_dfa, Dfa};
use crate::solvers::{build_product, explicit_vi, HumanPolicy};
use crate::symgame::{EncodeOptions, SymbolicGame, TrKind};

const CAP: usize = 1 << 20;

fn dfa(text: &str) -> Dfa {
    to_dfa(&parse(text, None).unwrap()).unwrap()
}

fn st(name: &str, code: u128, labels: Vec<u32>) -> StateInfo {
    StateInfo { name: name.into(), code, labels }
}

/// `v0 -near(1)-> {v4 goal, v2 (e1)}`, `v0 -far(3)-> v3 -far-> v4`,
/// `v2 -far-> v5 -far-> v4`.
fn detour_game() -> Game {
    let robot_states = (0..6).map(|v| st(&format!("v{v}"), v, if v == 4 { vec![0] } else { vec![] })).collect();
    Game {
        propositions: vec!["goal".into()],
        robot_actions: vec![ActionInfo { name: "near".into(), cost: 1 }, ActionInfo { name: "far".into(), cost: 3 }],
        human_actions: vec!["noop".into(), "e1".into()],
        robot_states,
        human_states: (0..5).map(|h| st(&format!("h{h}"), h, vec![])).collect(),
        robot_edges: vec![vec![(0, 0), (1, 1)], vec![], vec![(1, 3)], vec![(1, 2)], vec![], vec![(1, 4)]],
        human_edges: vec![vec![(0, 4), (1, 2)], vec![(0, 3)], vec![(0, 4)], vec![(0, 5)], vec![(0, 4)]],
        initial: 0,
        code_width: 3,
    }
}

fn symbolic(g: &Game, d: &Dfa, budget: u64, kind: TrKind) -> SymbolicRegret {
    let mut sg =
        SymbolicGame::encode(&abstract_game(g), d, EncodeOptions { budget: Some(budget), max_vars: None }).unwrap();
    symbolic_regret(&mut sg, kind).unwrap()
}

#[test]
fn detour_game_by_hand() {
    let g = detour_game();
    let d = dfa("F goal");
    let w = explicit_vi(&build_product(&g, &d).unwrap());
    assert_eq!(w.robot_values[0], Value::Finite(6));
    for (budget, want) in [(7, Some(1)), (6, Some(5)), (5, None)] {
        let ex = explicit_regret(&g, &d, budget, CAP).unwrap();
        assert_eq!(ex.regret, want, "budget {budget}");
        for kind in [TrKind::Monolithic, TrKind::Partitioned] {
            assert_eq!(symbolic(&g, &d, budget, kind).result.regret, want, "budget {budget}");
        }
        let bf = brute_force_regret(&g, &d, budget, AlternateMode::AllAlternates, CAP).unwrap();
        assert_eq!(bf.map(|v| v as u64), want);
    }
    let ex = explicit_regret(&g, &d, 7, CAP).unwrap();
    let c = ex.controller.unwrap();
    assert_eq!(c.nodes[0].action, Some(0), "regret strategy goes near");
    assert_eq!(c.worst_regret(), Value::Finite(1));
    assert_eq!(c.worst_case(), Value::Finite(7));
    assert_eq!(c.best_case(), Value::Finite(1));
    // at v0 the near edge's alternative is the far route, and vice versa
    assert_eq!(ex.ba[&(0, 0, 0)], BTreeMap::from([(0, Value::Finite(6)), (1, Value::Finite(1))]));
}

#[test]
fn single_play_has_zero_regret() {
    let mut g = detour_game();
    g.robot_edges[0] = vec![(1, 1)];
    let d = dfa("F goal");
    assert_eq!(explicit_regret(&g, &d, 10, CAP).unwrap().regret, Some(0));
    assert_eq!(symbolic(&g, &d, 10, TrKind::Partitioned).result.regret, Some(0));
    assert_eq!(brute_force_regret(&g, &d, 10, AlternateMode::AllAlternates, CAP).unwrap(), Some(0));
    let r = explicit_regret(&g, &d, 10, CAP).unwrap();
    assert!(r.ba.values().flat_map(|m| m.values()).all(|b| *b == Value::Infinity));
    assert_eq!(r.stats.ba_values, 0);
}

#[test]
fn exclude_self_can_go_negative() {
    let g = detour_game();
    let d = dfa("F goal");
    // near then noop costs 1 while the far alternative costs 6
    let v = brute_force_regret(&g, &d, 7, AlternateMode::ExcludeSelf, CAP).unwrap().unwrap();
    assert!(v <= 1);
}

#[test]
fn alternatives_of_two_actions() {
    let vals = BTreeMap::from([(0, Value::Finite(3)), (1, Value::Finite(7))]);
    assert_eq!(alternatives(&vals), BTreeMap::from([(0, Value::Finite(7)), (1, Value::Finite(3))]));
    let one = BTreeMap::from([(2, Value::Finite(4))]);
    assert_eq!(alternatives(&one)[&2], Value::Infinity);
}

#[test]
fn utility_graph_edges() {
    let g = detour_game();
    let p = build_product(&g, &dfa("F goal")).unwrap();
    let ug = utility_graph(p.clone(), 0, CAP).unwrap();
    assert_eq!(ug.nodes.len(), 1);
    assert!(ug.has_sink);
    let ug = utility_graph(p, 2, CAP).unwrap();
    let us: BTreeSet<u64> = ug.nodes.iter().map(|n| n.1).collect();
    assert_eq!(us, BTreeSet::from([0, 1]));
}

fn tiny_params(seed: u64) -> RandomGameParams {
    RandomGameParams { robot_states: 3 + seed as usize % 4, robot_actions: 2 + seed as usize % 2, ..Default::default() }
}

const FORMULAS: [&str; 3] = ["F p0", "F(p0 & F p1)", "F p0 | F p1"];

fn random_case(seed: u64) -> (Game, Dfa, u64) {
    let g = random_game(seed, &tiny_params(seed));
    let d = dfa(FORMULAS[seed as usize % FORMULAS.len()]);
    let budget = 3 + seed % 6;
    (g, d, budget)
}

#[test]
fn pipelines_and_oracle_agree() {
    let mut feasible = 0;
    for seed in 0..40 {
        let (g, d, budget) = random_case(seed);
        let ex = explicit_regret(&g, &d, budget, CAP).unwrap();
        let bf = brute_force_regret(&g, &d, budget, AlternateMode::AllAlternates, CAP).unwrap();
        assert_eq!(ex.regret.map(|v| v as i64), bf, "seed {seed}");
        for kind in [TrKind::Monolithic, TrKind::Partitioned] {
            let sy = symbolic(&g, &d, budget, kind);
            assert_eq!(sy.result.regret, ex.regret, "seed {seed} {kind:?}");
            assert_eq!(sy.result.ba, ex.ba, "seed {seed} {kind:?}");
            assert_eq!(sy.result.stats.utility_states, ex.stats.utility_states, "seed {seed}");
            if let (Some(a), Some(b)) = (&sy.result.controller, &ex.controller) {
                assert_eq!(a.worst_regret(), b.worst_regret(), "seed {seed}");
            }
        }
        if let Some(r) = ex.regret {
            feasible += 1;
            assert!(r <= budget);
            let c = ex.controller.as_ref().unwrap();
            assert_eq!(c.worst_regret(), Value::Finite(r as i64), "seed {seed}");
            // winning within budget against every human
            assert!(c.worst_case() <= Value::Finite(budget as i64), "seed {seed}");
        }
    }
    assert!(feasible >= 10, "only {feasible} feasible cases");
}

#[test]
fn cooperative_values_are_shortest_paths() {
    for seed in 0..20 {
        let (g, d, budget) = random_case(seed);
        let p = build_product(&g, &d).unwrap();
        let w = explicit_vi(&p);
        let ug = utility_graph(p.clone(), budget, CAP).unwrap();
        let cval = ug.cooperative_values();
        // Bellman-Ford over product states as an independent shortest path
        let mut dist: Vec<Option<u64>> = p.accepting.iter().map(|&a| a.then_some(0)).collect();
        for _ in 0..p.robot.len() {
            for r in 0..p.robot.len() {
                if p.accepting[r] {
                    continue;
                }
                for &(a, h) in &p.robot_edges[r] {
                    for &(_, r2) in &p.human_edges[h as usize] {
                        if let Some(d2) = dist[r2 as usize] {
                            let c = d2 + p.costs[a as usize] as u64;
                            if dist[r].is_none_or(|x| c < x) {
                                dist[r] = Some(c);
                            }
                        }
                    }
                }
            }
        }
        for (n, &(r, u)) in ug.nodes.iter().enumerate() {
            let want = dist[r as usize].map(|d| u + d).filter(|&t| t <= budget);
            assert_eq!(cval[n].finite().map(|v| v as u64), want, "seed {seed}");
            let mm = w.robot_values[r as usize].add_cost(u);
            if mm <= Value::Finite(budget as i64) {
                assert!(cval[n] <= mm);
            }
        }
    }
}

#[test]
fn utility_graph_matches_bfs() {
    for seed in 0..20 {
        let (g, d, budget) = random_case(seed);
        let p = build_product(&g, &d).unwrap();
        let ug = utility_graph(p.clone(), budget, CAP).unwrap();
        let mut seen = BTreeSet::from([(p.initial, 0u64)]);
        let mut q = VecDeque::from([(p.initial, 0u64)]);
        while let Some((r, u)) = q.pop_front() {
            if p.accepting[r] {
                continue;
            }
            for &(a, h) in &p.robot_edges[r] {
                let u2 = u + p.costs[a as usize] as u64;
                if u2 > budget {
                    continue;
                }
                for &(_, r2) in &p.human_edges[h as usize] {
                    if seen.insert((r2 as usize, u2)) {
                        q.push_back((r2 as usize, u2));
                    }
                }
            }
        }
        let got: BTreeSet<(usize, u64)> = ug.nodes.iter().map(|&(r, u)| (r as usize, u)).collect();
        assert_eq!(got, seen, "seed {seed}");

        // symbolic reachable set decodes to the same pairs
        let sy = symbolic(&g, &d, budget, TrKind::Partitioned);
        assert_eq!(sy.result.stats.utility_states, seen.len());
    }
}

#[test]
fn ba_matches_double_loop() {
    for seed in 0..20 {
        let (g, d, budget) = random_case(seed);
        let p = build_product(&g, &d).unwrap();
        let ug = utility_graph(p, budget, CAP).unwrap();
        let cval = ug.cooperative_values();
        let ba = ug.best_alternatives(&cval);
        for (n, row) in ug.edges.iter().enumerate() {
            for (k, _) in row.iter().enumerate() {
                let mut want = Value::Infinity;
                for (j, other) in row.iter().enumerate() {
                    if j == k {
                        continue;
                    }
                    for &(_, t) in &other.responses {
                        if let Some(t) = t {
                            want = want.min(cval[t as usize]);
                        }
                    }
                }
                assert_eq!(ba[n][k], want, "seed {seed}");
            }
        }
    }
}

#[test]
fn b_never_increases_along_walks() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..10 {
        let (g, d, budget) = random_case(seed);
        let p = build_product(&g, &d).unwrap();
        let ug = utility_graph(p, budget, CAP).unwrap();
        let ba = ug.best_alternatives(&ug.cooperative_values());
        let br = best_response_graph(&ug, &ba, CAP).unwrap();
        for _ in 0..100 {
            let mut n = 0usize;
            loop {
                let row = &br.edges[n];
                if row.is_empty() {
                    break;
                }
                let (_, ts) = &row[rng.gen_range(0..row.len())];
                let Some(t) = ts[rng.gen_range(0..ts.len())] else { break };
                assert!(br.nodes[t as usize].1 <= br.nodes[n].1);
                n = t as usize;
            }
        }
    }
}

/// Unrolled history tree for the literal regret definition.
struct Tree {
    /// Robot nodes: `(accepting, payoff, choices)`; a choice is a list of
    /// human responses, each a robot node or `None` for overshoot.
    robot: Vec<(bool, u64, Vec<usize>)>,
    human: Vec<Vec<Option<usize>>>,
}

fn unroll(p: &crate::solvers::ProductGame, budget: u64) -> Tree {
    let mut t = Tree { robot: Vec::new(), human: Vec::new() };
    fn go(p: &crate::solvers::ProductGame, budget: u64, r: usize, u: u64, t: &mut Tree) -> usize {
        let id = t.robot.len();
        t.robot.push((p.accepting[r], u, Vec::new()));
        if p.accepting[r] {
            return id;
        }
        let mut choices = Vec::new();
        for &(a, h) in &p.robot_edges[r] {
            let u2 = u + p.costs[a as usize] as u64;
            let resp: Vec<Option<usize>> = p.human_edges[h as usize]
                .iter()
                .map(|&(_, r2)| (u2 <= budget).then(|| go(p, budget, r2 as usize, u2, t)))
                .collect();
            choices.push(t.human.len());
            t.human.push(resp);
        }
        t.robot[id].2 = choices;
        id
    }
    go(p, budget, p.initial, 0, &mut t);
    t
}

/// `min_sigma max_tau [Val(sigma, tau) - min_sigma' Val(sigma', tau)]` over
/// winning `sigma`, by enumerating both players' tree strategies.
fn literal_regret(t: &Tree, budget: u64) -> Option<i64> {
    let radix_r: Vec<usize> = t.robot.iter().map(|n| n.2.len().max(1)).collect();
    let radix_h: Vec<usize> = t.human.iter().map(|h| h.len()).collect();
    let count = |rad: &[usize]| rad.iter().product::<usize>();
    let decode = |mut k: usize, rad: &[usize]| {
        rad.iter()
            .map(|&b| {
                let d = k % b;
                k /= b;
                d
            })
            .collect::<Vec<usize>>()
    };
    let play = |sigma: &[usize], tau: &[usize]| -> Option<u64> {
        let mut n = 0;
        loop {
            let (acc, u, ref ch) = t.robot[n];
            if acc {
                return Some(u);
            }
            if ch.is_empty() {
                return None;
            }
            let h = ch[sigma[n]];
            n = t.human[h][tau[h]]?;
        }
    };
    fn best(t: &Tree, tau: &[usize], n: usize) -> Option<u64> {
        let (acc, u, ref ch) = t.robot[n];
        if acc {
            return Some(u);
        }
        ch.iter().filter_map(|&h| t.human[h][tau[h]].and_then(|m| best(t, tau, m))).min()
    }
    let taus: Vec<Vec<usize>> = (0..count(&radix_h)).map(|k| decode(k, &radix_h)).collect();
    let hindsight: Vec<Option<u64>> = taus.iter().map(|tau| best(t, tau, 0)).collect();
    let mut answer: Option<i64> = None;
    'sigma: for k in 0..count(&radix_r) {
        let sigma = decode(k, &radix_r);
        let mut worst = 0i64;
        for (tau, alt) in taus.iter().zip(&hindsight) {
            let Some(v) = play(&sigma, tau).filter(|&v| v <= budget) else { continue 'sigma };
            worst = worst.max(v as i64 - alt.expect("sigma itself is an alternative") as i64);
        }
        answer = Some(answer.map_or(worst, |a| a.min(worst)));
    }
    answer
}

#[test]
fn oracle_matches_literal_definition() {
    let mut checked = 0;
    for seed in 0..400u64 {
        let params = RandomGameParams {
            robot_states: 3 + seed as usize % 3,
            robot_actions: 2,
            human_actions: 1,
            propositions: 2,
            costs: &[1, 2],
        };
        let g = random_game(seed, &params);
        let d = dfa(FORMULAS[seed as usize % FORMULAS.len()]);
        let budget = 2 + seed % 3;
        let p = build_product(&g, &d).unwrap();
        let t = unroll(&p, budget);
        let rsize: f64 = t.robot.iter().map(|n| n.2.len().max(1) as f64).product();
        let hsize: f64 = t.human.iter().map(|h| h.len() as f64).product();
        if rsize * hsize > 2e5 {
            continue;
        }
        let want = literal_regret(&t, budget);
        let got = brute_force_regret(&g, &d, budget, AlternateMode::AllAlternates, CAP).unwrap();
        assert_eq!(got, want, "seed {seed}");
        let ex = explicit_regret(&g, &d, budget, CAP).unwrap();
        assert_eq!(ex.regret.map(|v| v as i64), want, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 50, "only {checked} micro games small enough");
}

#[test]
fn regret_strategy_rollouts_stay_in_budget() {
    for seed in 0..15 {
        let (g, d, budget) = random_case(seed);
        let ex = explicit_regret(&g, &d, budget, CAP).unwrap();
        let Some(c) = ex.controller else { continue };
        for policy in [HumanPolicy::Adversarial, HumanPolicy::Cooperative, HumanPolicy::Random(seed)] {
            let tr = crate::solvers::rollout(&c, &policy, 64).unwrap();
            assert!(tr.accepted && !tr.truncated, "seed {seed}");
            assert!(tr.payoff <= budget);
        }
    }
}

#[test]
fn regret_is_monotone_in_budget() {
    for seed in 0..10 {
        let (g, d, _) = random_case(seed);
        let mut last: Option<u64> = None;
        for budget in 2..10 {
            let r = explicit_regret(&g, &d, budget, CAP).unwrap().regret;
            if let (Some(prev), Some(now)) = (last, r) {
                assert!(now <= prev, "seed {seed} budget {budget}");
            }
            if r.is_some() {
                last = r;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leaf_regret_is_bounded(u in 0u64..100, b in proptest::option::of(0i64..100)) {
        let b = b.map_or(Value::Infinity, Value::Finite);
        let r = leaf_regret(u, b);
        prop_assert!(r <= u);
        prop_assert_eq!(r as i64, u as i64 - b.min(Value::Finite(u as i64)).finite().unwrap());
    }

    #[test]
    fn all_alternates_regret_is_nonnegative(seed in 0u64..200) {
        let (g, d, budget) = random_case(seed);
        if let Some(r) = brute_force_regret(&g, &d, budget, AlternateMode::AllAlternates, CAP).unwrap() {
            prop_assert!(r >= 0 && r as u64 <= budget);
        }
    }
}
