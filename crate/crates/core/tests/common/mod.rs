//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;

use qsynth::dd::{Manager, NodeRef, NodeView, VarId};
use qsynth::domain::Game;
use qsynth::ltlf::{Dfa, Formula, Letter};
use qsynth::solvers::Controller;
use qsynth::Value;
use rand::Rng;

/// One line per criterion, written past the test harness's capture so it
/// shows up in plain `cargo test` output.
pub fn verdict(criterion: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance criterion {criterion}: {tag} ({detail})");
    let _ = out.flush();
}

/// Peak resident set of this process in bytes (Linux only).
pub fn peak_rss() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Restart the peak counter so earlier tests in this process do not count.
pub fn reset_peak_rss() {
    let _ = std::fs::write("/proc/self/clear_refs", "5");
}

// ---------------------------------------------------------------- tables

/// Truth table over variables `0..n`; bit `i` of the row index is the value
/// of variable `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tab {
    pub n: usize,
    pub rows: Vec<Value>,
}

impl Tab {
    pub fn random(rng: &mut impl Rng, n: usize, boolean: bool) -> Tab {
        let rows = (0..1usize << n)
            .map(|_| {
                if boolean {
                    Value::Finite(rng.gen_range(0..2))
                } else if rng.gen_bool(0.1) {
                    Value::Infinity
                } else {
                    Value::Finite(rng.gen_range(0..6))
                }
            })
            .collect();
        Tab { n, rows }
    }

    pub fn map2(&self, other: &Tab, f: impl Fn(Value, Value) -> Value) -> Tab {
        Tab { n: self.n, rows: self.rows.iter().zip(&other.rows).map(|(&a, &b)| f(a, b)).collect() }
    }

    /// Shannon expansion on variable 0 first, built with `ite`.
    pub fn build(&self, mgr: &mut Manager, vars: &[VarId]) -> NodeRef {
        fn rec(mgr: &mut Manager, vars: &[VarId], rows: &[Value], depth: usize) -> NodeRef {
            if rows.len() == 1 {
                return mgr.constant(rows[0]);
            }
            // rows are indexed by bits `depth..n`, lowest first
            let lo: Vec<Value> = rows.iter().step_by(2).copied().collect();
            let hi: Vec<Value> = rows.iter().skip(1).step_by(2).copied().collect();
            let l = rec(mgr, vars, &lo, depth + 1);
            let h = rec(mgr, vars, &hi, depth + 1);
            let v = mgr.var(vars[depth]).unwrap();
            mgr.ite(v, h, l).unwrap()
        }
        rec(mgr, vars, &self.rows, 0)
    }

    /// Read `f` back by evaluating every assignment.
    pub fn read(mgr: &Manager, f: NodeRef, n: usize) -> Tab {
        let total = mgr.num_vars() as usize;
        let rows = (0..1usize << n)
            .map(|r| {
                let mut bits = vec![false; total];
                for (i, b) in bits.iter_mut().enumerate().take(n) {
                    *b = r >> i & 1 == 1;
                }
                mgr.eval(f, &bits).unwrap()
            })
            .collect();
        Tab { n, rows }
    }

    pub fn bit(v: Value) -> bool {
        v != Value::ZERO
    }

    /// Eliminate the variables in `set` with `combine`.
    pub fn abstract_vars(&self, set: &[usize], combine: impl Fn(Value, Value) -> Value) -> Tab {
        let mask: usize = set.iter().map(|&i| 1 << i).sum();
        let rows = (0..self.rows.len())
            .map(|r| {
                let base = r & !mask;
                let mut acc: Option<Value> = None;
                for sub in 0..self.rows.len() {
                    if sub & !mask == 0 {
                        let v = self.rows[base | sub];
                        acc = Some(acc.map_or(v, |a| combine(a, v)));
                    }
                }
                acc.unwrap()
            })
            .collect();
        Tab { n: self.n, rows }
    }

    /// `self[v := g]`.
    pub fn compose(&self, v: usize, g: &Tab) -> Tab {
        let rows = (0..self.rows.len())
            .map(|r| {
                let r2 = if Tab::bit(g.rows[r]) { r | 1 << v } else { r & !(1 << v) };
                self.rows[r2]
            })
            .collect();
        Tab { n: self.n, rows }
    }
}

/// Every node reachable from `f` is reduced and ordered.
pub fn reduced_and_ordered(mgr: &Manager, f: NodeRef) -> bool {
    let mut seen = HashSet::new();
    let mut stack = vec![f];
    while let Some(x) = stack.pop() {
        if !seen.insert(x) {
            continue;
        }
        if let NodeView::Inner { var, hi, lo } = mgr.node(x).unwrap() {
            if hi == lo {
                return false;
            }
            for c in [hi, lo] {
                if let NodeView::Inner { var: cv, .. } = mgr.node(c).unwrap() {
                    if cv <= var {
                        return false;
                    }
                }
                stack.push(c);
            }
        }
    }
    true
}

// --------------------------------------------------------------- formulas

pub fn random_formula(rng: &mut impl Rng, atoms: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return Formula::atom(atoms[rng.gen_range(0..atoms.len())]);
    }
    let sub = |rng: &mut _| random_formula(rng, atoms, depth - 1);
    match rng.gen_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::next(sub(rng)),
        4 => Formula::until(sub(rng), sub(rng)),
        5 => Formula::eventually(sub(rng)),
        6 => Formula::always(sub(rng)),
        _ => Formula::implies(sub(rng), sub(rng)),
    }
}

pub fn random_trace(rng: &mut impl Rng, atoms: &[&str], max_len: usize) -> Vec<Letter> {
    let len = rng.gen_range(1..=max_len);
    (0..len).map(|_| atoms.iter().filter(|_| rng.gen_bool(0.5)).map(|a| a.to_string()).collect()).collect()
}

// ------------------------------------------------------------------ games

pub fn letter(g: &Game, v: usize) -> Letter {
    g.robot_states[v].labels.iter().map(|&q| g.propositions[q as usize].clone()).collect()
}

fn dfa_after(g: &Game, d: &Dfa, z: usize, v: usize) -> usize {
    d.step(z, d.mask_of(letter(g, v).iter().map(String::as_str)))
}

/// Walk every play of `c` against every human behaviour, directly on the
/// game. Each finished play must satisfy `phi` (checked on its label trace)
/// and cost at most `bound`; no play may run past `horizon` robot turns.
/// Returns the number of plays.
pub fn certify_plays(g: &Game, c: &Controller, phi: &Formula, bound: Value, horizon: usize) -> Result<usize, String> {
    #[allow(clippy::too_many_arguments)]
    fn go(
        g: &Game,
        c: &Controller,
        phi: &Formula,
        bound: Value,
        horizon: usize,
        at: usize,
        trace: &mut Vec<Letter>,
        payoff: u64,
        count: &mut usize,
    ) -> Result<(), String> {
        let node = &c.nodes[at];
        if node.accepting {
            if !phi.evaluate(trace) {
                return Err(format!("accepted play violates the task: {trace:?}"));
            }
            if Value::Finite(payoff as i64) > bound {
                return Err(format!("play costs {payoff} > {bound}"));
            }
            *count += 1;
            return Ok(());
        }
        if trace.len() > horizon {
            return Err("play exceeds the horizon".into());
        }
        let v = node.key.state as usize;
        let a = node.action.ok_or("no action at a non-accepting node")?;
        let &(_, h) = g.robot_edges[v].iter().find(|(b, _)| *b == a).ok_or("action not enabled")?;
        let cost = g.cost(a) as u64;
        for &(e, v2) in &g.human_edges[h as usize] {
            let &(_, n2) = node.next.iter().find(|(e2, _)| *e2 == e).ok_or("human move missing from controller")?;
            if c.nodes[n2 as usize].key.state != v2 {
                return Err("controller successor disagrees with the game".into());
            }
            trace.push(letter(g, v2 as usize));
            go(g, c, phi, bound, horizon, n2 as usize, trace, payoff + cost, count)?;
            trace.pop();
        }
        Ok(())
    }
    let mut count = 0;
    let mut trace = vec![letter(g, c.nodes[c.initial as usize].key.state as usize)];
    go(g, c, phi, bound, horizon, c.initial as usize, &mut trace, 0, &mut count)?;
    Ok(count)
}

/// Least worst-case cost over all memoryless robot strategies on the
/// product of `g` and `d`, by enumerating strategies on the states they
/// reach. `None` when more than `cap` strategies would be needed.
type P = (usize, usize);
type Sigma = HashMap<P, u32>;

pub fn best_memoryless(g: &Game, d: &Dfa, cap: usize) -> Option<Value> {
    let start: P = (g.initial, dfa_after(g, d, d.initial, g.initial));
    let succ = |p: P, a: u32| -> Vec<P> {
        let &(_, h) = g.robot_edges[p.0].iter().find(|(b, _)| *b == a).unwrap();
        g.human_edges[h as usize].iter().map(|&(_, v2)| (v2 as usize, dfa_after(g, d, p.1, v2 as usize))).collect()
    };
    // worst-case cost of a complete strategy, or the first unassigned state
    let evaluate = |sigma: &Sigma| -> Result<Value, P> {
        fn val(
            p: P,
            sigma: &Sigma,
            g: &Game,
            d: &Dfa,
            succ: &dyn Fn(P, u32) -> Vec<P>,
            memo: &mut HashMap<P, Value>,
            onstack: &mut HashSet<P>,
        ) -> Result<Value, P> {
            if d.accepting[p.1] {
                return Ok(Value::ZERO);
            }
            if let Some(&v) = memo.get(&p) {
                return Ok(v);
            }
            let Some(&a) = sigma.get(&p) else { return Err(p) };
            if !onstack.insert(p) {
                return Ok(Value::Infinity);
            }
            let mut worst = Value::ZERO;
            let nexts = succ(p, a);
            if nexts.is_empty() {
                worst = Value::Infinity;
            }
            for q in nexts {
                worst = worst.max(val(q, sigma, g, d, succ, memo, onstack)?);
            }
            onstack.remove(&p);
            let v = worst.add_cost(g.cost(a) as u64);
            memo.insert(p, v);
            Ok(v)
        }
        // a cycle makes the strategy lose; memo entries computed inside a
        // cycle are still upper-bounded by infinity so the max is exact
        val(start, sigma, g, d, &succ, &mut HashMap::new(), &mut HashSet::new())
    };
    let mut best = Value::Infinity;
    let mut leaves = 0usize;
    fn search(
        sigma: &mut Sigma,
        g: &Game,
        evaluate: &dyn Fn(&Sigma) -> Result<Value, P>,
        best: &mut Value,
        leaves: &mut usize,
        cap: usize,
    ) -> bool {
        match evaluate(sigma) {
            Ok(v) => {
                *leaves += 1;
                *best = (*best).min(v);
                *leaves <= cap
            }
            Err(p) => {
                let actions: Vec<u32> = g.robot_edges[p.0].iter().map(|&(a, _)| a).collect();
                if actions.is_empty() {
                    *leaves += 1;
                    return *leaves <= cap;
                }
                for a in actions {
                    sigma.insert(p, a);
                    if !search(sigma, g, evaluate, best, leaves, cap) {
                        return false;
                    }
                    sigma.remove(&p);
                }
                true
            }
        }
    }
    search(&mut HashMap::new(), g, &evaluate, &mut best, &mut leaves, cap).then_some(best)
}

pub fn sorted_atoms(f: &Formula) -> BTreeSet<String> {
    f.atoms()
}
