use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::domain::{abstract_game, random_game, RandomGameParams};
use crate::ltlf::{parse, to_dfa};

const FORMULAS: [&str; 3] = ["F p0", "F(p0 & X F p1)", "G(p0 -> F p1) & F p1"];

fn fixture(seed: u64) -> (AbstractedGame, Dfa) {
    let p = RandomGameParams { robot_states: 5 + seed as usize % 4, ..RandomGameParams::default() };
    let g = abstract_game(&random_game(seed, &p));
    let f = parse(FORMULAS[seed as usize % FORMULAS.len()], None).unwrap();
    (g, to_dfa(&f).unwrap())
}

fn encode(seed: u64) -> SymbolicGame {
    let (g, d) = fixture(seed);
    SymbolicGame::encode(&g, &d, EncodeOptions::default()).unwrap()
}

fn mask(sg: &SymbolicGame, s: u32) -> usize {
    sg.label_mask(s as usize)
}

/// Members of a function over `(X, Y, O, I)` as `(state, z, o, i)`.
fn decode_xyoi(sg: &SymbolicGame, f: NodeRef) -> BTreeSet<(usize, usize, u32, u32)> {
    let l = &sg.layout;
    let vars: Vec<VarId> = [&l.x[..], &l.y[..], &l.o[..], &l.i[..]].concat();
    let (no, ni) = (l.o.len(), l.i.len());
    let mut out = BTreeSet::new();
    sg.mgr
        .for_each_assignment(f, &vars, Some(Value::ZERO), |code, _| {
            let i = (code & ((1 << ni) - 1)) as u32;
            let o = ((code >> ni) & ((1 << no) - 1)) as u32;
            let (s, z) = sg.decode_xy(code >> (no + ni)).expect("no ghost codes");
            out.insert((s, z, o, i));
        })
        .unwrap();
    out
}

fn all_states(sg: &SymbolicGame) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for s in 0..sg.game.states.len() {
        for z in 0..sg.dfa.num_states() {
            v.push((s, z));
        }
    }
    v
}

fn random_set(sg: &mut SymbolicGame, rng: &mut ChaCha8Rng) -> (BTreeSet<(usize, usize)>, NodeRef) {
    let set: BTreeSet<(usize, usize)> = all_states(sg).into_iter().filter(|_| rng.gen_bool(0.4)).collect();
    let mut f = sg.mgr.zero();
    for &(s, z) in &set {
        let c = sg.state_cube(s, z).unwrap();
        f = sg.mgr.or(f, c).unwrap();
    }
    (set, f)
}

#[test]
fn guard_and_eta_round_trip() {
    for seed in 0..10 {
        let mut sg = encode(seed);
        let want: BTreeSet<(usize, u32, u32)> = sg
            .game
            .edges
            .iter()
            .enumerate()
            .flat_map(|(s, row)| row.iter().map(move |e| (s, e.robot, e.human)))
            .collect();
        assert_eq!(sg.decode_edges(sg.guard).unwrap(), want);
        for (s, row) in sg.game.edges.clone().iter().enumerate() {
            for e in row {
                let code = sg.game.states[e.target as usize].code;
                let mut cube = sg.mgr.one();
                let l = sg.layout.clone();
                let src = sg.mgr.cube(&l.x, sg.game.states[s].code).unwrap();
                let o = sg.mgr.cube(&l.o, e.robot as u128).unwrap();
                let i = sg.mgr.cube(&l.i, e.human as u128).unwrap();
                for c in [src, o, i] {
                    cube = sg.mgr.and(cube, c).unwrap();
                }
                for (k, &bit) in sg.eta.clone().iter().enumerate() {
                    let on = sg.mgr.and(cube, bit).unwrap();
                    let want = code >> (l.x.len() - 1 - k) & 1 == 1;
                    assert_eq!(on != sg.mgr.zero(), want, "seed {seed} state {s} bit {k}");
                }
            }
        }
    }
}

#[test]
fn slices_cover_the_same_edges() {
    for seed in 0..10 {
        let mut sg = encode(seed);
        for kind in [TrKind::Monolithic, TrKind::Partitioned] {
            let guards: Vec<NodeRef> = sg.parts(kind).iter().map(|p| p.guard).collect();
            let all = sg.mgr.or_all(guards).unwrap();
            assert_eq!(all, sg.guard);
            for p in sg.parts(kind).to_vec() {
                for (k, &e) in p.eta.iter().enumerate() {
                    let a = sg.mgr.and(e, p.guard).unwrap();
                    let b = sg.mgr.and(sg.eta[k], p.guard).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
        let costs: Vec<u32> = sg.monolithic.iter().map(|p| p.cost).collect();
        assert!(costs.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn product_pre_matches_explicit() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..10 {
        let mut sg = encode(seed);
        for _ in 0..3 {
            let (set, omega) = random_set(&mut sg, &mut rng);
            for kind in [TrKind::Monolithic, TrKind::Partitioned] {
                let mut got = BTreeSet::new();
                for p in sg.parts(kind).to_vec() {
                    let f = sg.product_pre(omega, &p).unwrap();
                    got.extend(decode_xyoi(&sg, f));
                }
                let mut want = BTreeSet::new();
                for (s, row) in sg.game.edges.iter().enumerate() {
                    for e in row {
                        for z in 0..sg.dfa.num_states() {
                            let z2 = sg.dfa.step(z, mask(&sg, e.target));
                            if set.contains(&(e.target as usize, z2)) {
                                want.insert((s, z, e.robot, e.human));
                            }
                        }
                    }
                }
                assert_eq!(got, want, "seed {seed} {kind:?}");
            }
        }
    }
}

#[test]
fn two_stage_pre_equals_simultaneous_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..10 {
        let mut sg = encode(seed);
        let (_, omega) = random_set(&mut sg, &mut rng);
        for p in sg.partitioned.clone() {
            let two = sg.product_pre(omega, &p).unwrap();
            let s = sg.step_subst(&p, Blocks::Xy);
            let moved = sg.mgr.vector_compose(omega, &s).unwrap();
            let g = sg.mgr.and(moved, p.guard).unwrap();
            let one = sg.mgr.and(g, sg.sd.valid).unwrap();
            assert_eq!(two, one);
        }
    }
}

#[test]
fn swapped_substitution_order_reads_the_wrong_label() {
    // Substituting x before y makes the DFA read the source label; on some
    // fixture that must give a different set.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut differs = false;
    for seed in 0..10 {
        let mut sg = encode(seed);
        let (_, omega) = random_set(&mut sg, &mut rng);
        for p in sg.partitioned.clone() {
            let good = sg.product_pre(omega, &p).unwrap();
            let xs: Vec<(VarId, NodeRef)> = sg.layout.x.iter().copied().zip(p.eta.iter().copied()).collect();
            let moved = sg.mgr.vector_compose(omega, &xs).unwrap();
            let step = sg.sd.step_substitution();
            let wrong = sg.mgr.vector_compose(moved, &step).unwrap();
            let wrong = sg.mgr.and(wrong, p.guard).unwrap();
            let wrong = sg.mgr.and(wrong, sg.sd.valid).unwrap();
            differs |= wrong != good;
        }
    }
    assert!(differs);
}

#[test]
fn controllable_pre_matches_explicit() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..10 {
        let mut sg = encode(seed);
        let (set, omega) = random_set(&mut sg, &mut rng);
        let mono = sg.controllable_pre(omega, TrKind::Monolithic).unwrap();
        let part = sg.controllable_pre(omega, TrKind::Partitioned).unwrap();
        assert_eq!(mono, part);
        let mut want = BTreeSet::new();
        for (s, row) in sg.game.edges.iter().enumerate() {
            for z in 0..sg.dfa.num_states() {
                let actions: BTreeSet<u32> = row.iter().map(|e| e.robot).collect();
                let ok = actions.iter().any(|&a| {
                    row.iter()
                        .filter(|e| e.robot == a)
                        .all(|e| set.contains(&(e.target as usize, sg.dfa.step(z, mask(&sg, e.target)))))
                });
                if ok {
                    want.insert((s, z));
                }
            }
        }
        assert_eq!(sg.decode_set(mono).unwrap(), want, "seed {seed}");
    }
}

#[test]
fn controllable_pre_dual_of_uncontrollable_pre() {
    // cpre(W) and the opponent's predecessor of the complement split every
    // state with at least one action.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..10 {
        let mut sg = encode(seed);
        let (_, omega) = random_set(&mut sg, &mut rng);
        let valid = sg.valid_xy().unwrap();
        let not_omega = sg.mgr.negate(omega).unwrap();
        let not_omega = sg.mgr.and(not_omega, valid).unwrap();
        let cpre = sg.controllable_pre(omega, TrKind::Partitioned).unwrap();
        // opponent: every enabled action has some response into not_omega
        let mut upre = sg.mgr.one();
        let mut enabled = sg.mgr.zero();
        let (o, i) = (sg.layout.o.clone(), sg.layout.i.clone());
        for p in sg.partitioned.clone() {
            let pre = sg.product_pre(not_omega, &p).unwrap();
            let some_i = sg.mgr.exists(pre, &i).unwrap();
            let bad = sg.mgr.implies(p.robot_valid, some_i).unwrap();
            let all_o = sg.mgr.forall(bad, &o).unwrap();
            upre = sg.mgr.and(upre, all_o).unwrap();
            let en = sg.mgr.exists(p.robot_valid, &o).unwrap();
            enabled = sg.mgr.or(enabled, en).unwrap();
        }
        let live = sg.mgr.and(enabled, valid).unwrap();
        let upre = sg.mgr.and(upre, live).unwrap();
        let not_cpre = sg.mgr.negate(cpre).unwrap();
        let not_cpre = sg.mgr.and(not_cpre, live).unwrap();
        assert_eq!(upre, not_cpre, "seed {seed}");
    }
}

#[test]
fn reachable_matches_bfs() {
    for seed in 0..10 {
        let mut sg = encode(seed);
        let (v0, z0) = sg.initial();
        let init = sg.state_cube(v0, z0).unwrap();
        let one = sg.mgr.one();
        let got = sg.reachable(init, one, TrKind::Partitioned, Blocks::Xy).unwrap();
        let mono = sg.reachable(init, one, TrKind::Monolithic, Blocks::Xy).unwrap();
        assert_eq!(got, mono);
        let mut seen = BTreeSet::from([(v0, z0)]);
        let mut q = VecDeque::from([(v0, z0)]);
        while let Some((s, z)) = q.pop_front() {
            for e in &sg.game.edges[s] {
                let n = (e.target as usize, sg.dfa.step(z, mask(&sg, e.target)));
                if seen.insert(n) {
                    q.push_back(n);
                }
            }
        }
        assert_eq!(sg.decode_set(got).unwrap(), seen, "seed {seed}");
    }
}

#[test]
fn utility_step_saturates() {
    let (g, d) = fixture(1);
    let mut sg = SymbolicGame::encode(&g, &d, EncodeOptions { budget: Some(5), max_vars: None }).unwrap();
    assert_eq!(sg.layout.u.len(), 3);
    let step = sg.utility_step(3).unwrap();
    let u = sg.layout.u.clone();
    for start in 0..8u64 {
        let mut bits = vec![false; sg.mgr.num_vars() as usize];
        for (k, v) in u.iter().enumerate() {
            bits[v.index()] = start >> (u.len() - 1 - k) & 1 == 1;
        }
        let mut next = 0u64;
        for &b in &step {
            next = next << 1 | (sg.mgr.eval(b, &bits).unwrap() == Value::ONE) as u64;
        }
        assert_eq!(next, (start + 3).min(6));
    }
    let uv = sg.utility_value().unwrap();
    assert_eq!(sg.mgr.terminals(uv).unwrap().len(), 7);
}

#[test]
fn variable_limit_is_reported() {
    let (g, d) = fixture(2);
    let err = SymbolicGame::encode(&g, &d, EncodeOptions { budget: None, max_vars: Some(3) }).err().unwrap();
    assert!(matches!(err, SymError::Bits { limit: 3, .. }));
}

#[test]
fn unknown_atom_rejected() {
    let (g, _) = fixture(0);
    let d = to_dfa(&parse("F q", None).unwrap()).unwrap();
    let err = SymbolicGame::encode(&g, &d, EncodeOptions::default()).err().unwrap();
    assert_eq!(err, SymError::UnknownAtom("q".into()));
}
