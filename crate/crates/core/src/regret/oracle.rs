use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::domain::Game;
use crate::ltlf::Dfa;
use crate::solvers::{build_product, ProductGame};
use crate::Value;

use super::RegretError;

/// Which alternate robot strategies the hindsight minimum ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlternateMode {
    /// Every robot strategy, the chosen one included.
    AllAlternates,
    /// Strategies that leave the play somewhere; the chosen play itself is
    /// not an alternative.
    ExcludeSelf,
}

/// Cheapest cost from each robot product state to acceptance when both
/// players cooperate (Dijkstra on reversed edges).
fn coop_distance(p: &ProductGame) -> Vec<Value> {
    let mut rev: Vec<Vec<(usize, u64)>> = vec![Vec::new(); p.robot.len()];
    for (r, row) in p.robot_edges.iter().enumerate() {
        for &(a, h) in row {
            for &(_, r2) in &p.human_edges[h as usize] {
                rev[r2 as usize].push((r, p.costs[a as usize] as u64));
            }
        }
    }
    let mut dist = vec![Value::Infinity; p.robot.len()];
    let mut heap = BinaryHeap::new();
    for (r, &acc) in p.accepting.iter().enumerate() {
        if acc {
            dist[r] = Value::ZERO;
            heap.push(Reverse((0u64, r)));
        }
    }
    while let Some(Reverse((d, r))) = heap.pop() {
        if Value::Finite(d as i64) > dist[r] {
            continue;
        }
        for &(q, c) in &rev[r] {
            // accepting states are never left
            if p.accepting[q] {
                continue;
            }
            let nd = Value::Finite((d + c) as i64);
            if nd < dist[q] {
                dist[q] = nd;
                heap.push(Reverse((d + c, q)));
            }
        }
    }
    dist
}

struct Search<'a> {
    p: &'a ProductGame,
    dist: Vec<Value>,
    budget: u64,
    mode: AlternateMode,
    memo: HashMap<(usize, u64, Value), Option<i64>>,
    cap: usize,
}

impl Search<'_> {
    /// Hindsight value of leaving the play with payoff
    /// `u` by taking action `a`, then cooperating.
    fn alternative(&self, u: u64, a: u32, h: u32) -> Value {
        let c = self.p.costs[a as usize] as u64;
        self.p.human_edges[h as usize]
            .iter()
            .map(|&(_, r2)| self.dist[r2 as usize].add_cost(u + c))
            .min()
            .unwrap_or(Value::Infinity)
    }

    fn leaf(&self, u: u64, b: Value) -> i64 {
        match (self.mode, b) {
            (AlternateMode::AllAlternates, Value::Finite(b)) => u as i64 - b.min(u as i64),
            (AlternateMode::AllAlternates, Value::Infinity) => 0,
            (AlternateMode::ExcludeSelf, Value::Finite(b)) => u as i64 - b,
            (AlternateMode::ExcludeSelf, Value::Infinity) => 0,
        }
    }

    /// `min_sigma max_tau` regret from history state `(r, u)` where the best
    /// alternative seen so far is `b`; `None` if the robot cannot win within
    /// budget.
    fn solve(&mut self, r: usize, u: u64, b: Value) -> Result<Option<i64>, RegretError> {
        if self.p.accepting[r] {
            return Ok(Some(self.leaf(u, b)));
        }
        if let Some(&v) = self.memo.get(&(r, u, b)) {
            return Ok(v);
        }
        if self.memo.len() >= self.cap {
            return Err(RegretError::TooLarge { cap: self.cap });
        }
        let mut best: Option<i64> = None;
        let row = self.p.robot_edges[r].clone();
        for (k, &(a, h)) in row.iter().enumerate() {
            let u2 = u + self.p.costs[a as usize] as u64;
            if u2 > self.budget {
                continue;
            }
            let mut b2 = b;
            for (j, &(a2, h2)) in row.iter().enumerate() {
                if j != k {
                    b2 = b2.min(self.alternative(u, a2, h2));
                }
            }
            let mut worst = Some(i64::MIN);
            for &(_, r2) in &self.p.human_edges[h as usize].clone() {
                match (worst, self.solve(r2 as usize, u2, b2)?) {
                    (Some(w), Some(v)) => worst = Some(w.max(v)),
                    _ => worst = None,
                }
            }
            if let Some(w) = worst.filter(|&w| w != i64::MIN) {
                best = Some(best.map_or(w, |x| x.min(w)));
            }
        }
        self.memo.insert((r, u, b), best);
        Ok(best)
    }
}

/// Regret of the best robot strategy by search over histories. A history
/// is summarized by its last product state, its payoff and the cheapest
/// cooperative deviation available along it; alternatives use unbounded
/// shortest paths, so they do not share code with the pipelines.
/// Requires positive action costs.
pub fn brute_force_regret(
    g: &Game,
    dfa: &Dfa,
    budget: u64,
    mode: AlternateMode,
    cap: usize,
) -> Result<Option<i64>, RegretError> {
    assert!(g.robot_actions.iter().all(|a| a.cost > 0), "brute force needs positive costs");
    let p = build_product(g, dfa)?;
    let mut s = Search { dist: coop_distance(&p), p: &p, budget, mode, memo: HashMap::new(), cap };
    s.solve(p.initial, 0, Value::Infinity)
}
