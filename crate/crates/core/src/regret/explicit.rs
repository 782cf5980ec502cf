use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::domain::{abstract_game, Game};
use crate::ltlf::Dfa;
use crate::solvers::{build_product, Controller, NodeKey, ProductGame, SolveError};
use crate::Value;

use super::{leaf_regret, BaTable, RegretError, RegretResult, RegretStats};

/// One robot action from a utility-graph state; `None` targets are the
/// overshoot sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UEdge {
    pub action: u32,
    pub responses: Vec<(u32, Option<u32>)>,
}

/// Product states paired with the payoff so far, reachable from
/// `(s0, 0)` without exceeding the budget. Accepting states are leaves.
#[derive(Clone, Debug)]
pub struct UtilityGraph {
    pub budget: u64,
    pub product: ProductGame,
    pub nodes: Vec<(u32, u64)>,
    pub accepting: Vec<bool>,
    pub edges: Vec<Vec<UEdge>>,
    pub has_sink: bool,
    index: HashMap<(u32, u64), u32>,
}

impl UtilityGraph {
    pub fn node(&self, r: u32, u: u64) -> Option<u32> {
        self.index.get(&(r, u)).copied()
    }

    /// Min-min values: leaf utility at accepting nodes, infinity at the
    /// sink.
    pub fn cooperative_values(&self) -> Vec<Value> {
        let mut c: Vec<Value> = self
            .nodes
            .iter()
            .zip(&self.accepting)
            .map(|(&(_, u), &acc)| if acc { Value::Finite(u as i64) } else { Value::Infinity })
            .collect();
        loop {
            let mut changed = false;
            for n in 0..self.nodes.len() {
                if self.accepting[n] {
                    continue;
                }
                let best = self.edges[n]
                    .iter()
                    .flat_map(|e| e.responses.iter())
                    .map(|&(_, t)| t.map_or(Value::Infinity, |t| c[t as usize]))
                    .min()
                    .unwrap_or(Value::Infinity);
                if best < c[n] {
                    c[n] = best;
                    changed = true;
                }
            }
            if !changed {
                return c;
            }
        }
    }

    /// Cooperative value of taking edge `e`: the best human response.
    fn edge_value(&self, cval: &[Value], e: &UEdge) -> Value {
        e.responses
            .iter()
            .map(|&(_, t)| t.map_or(Value::Infinity, |t| cval[t as usize]))
            .min()
            .unwrap_or(Value::Infinity)
    }

    /// Best alternative of every edge, indexed like `edges`.
    pub fn best_alternatives(&self, cval: &[Value]) -> Vec<Vec<Value>> {
        self.edges
            .iter()
            .map(|row| {
                let vals: Vec<Value> = row.iter().map(|e| self.edge_value(cval, e)).collect();
                // two smallest, so each edge can skip itself
                let (mut m1, mut m2, mut arg) = (Value::Infinity, Value::Infinity, usize::MAX);
                for (k, &v) in vals.iter().enumerate() {
                    if v < m1 {
                        (m2, m1, arg) = (m1, v, k);
                    } else if v < m2 {
                        m2 = v;
                    }
                }
                (0..vals.len()).map(|k| if k == arg { m2 } else { m1 }).collect()
            })
            .collect()
    }
}

pub fn utility_graph(p: ProductGame, budget: u64, cap: usize) -> Result<UtilityGraph, RegretError> {
    let mut ug = UtilityGraph {
        budget,
        nodes: vec![(p.initial as u32, 0)],
        accepting: Vec::new(),
        edges: Vec::new(),
        has_sink: false,
        index: HashMap::from([((p.initial as u32, 0), 0)]),
        product: p,
    };
    let mut queue = VecDeque::from([0u32]);
    while let Some(n) = queue.pop_front() {
        let (r, u) = ug.nodes[n as usize];
        let acc = ug.product.accepting[r as usize];
        ug.accepting.push(acc);
        let mut row = Vec::new();
        if !acc {
            for &(a, h) in &ug.product.robot_edges[r as usize] {
                let u2 = u + ug.product.costs[a as usize] as u64;
                let mut responses = Vec::new();
                for &(e, r2) in &ug.product.human_edges[h as usize] {
                    if u2 > budget {
                        ug.has_sink = true;
                        responses.push((e, None));
                        continue;
                    }
                    let next = ug.nodes.len() as u32;
                    let id = *ug.index.entry((r2, u2)).or_insert(next);
                    if id == next {
                        if ug.nodes.len() >= cap {
                            return Err(RegretError::TooLarge { cap });
                        }
                        ug.nodes.push((r2, u2));
                        queue.push_back(id);
                    }
                    responses.push((e, Some(id)));
                }
                row.push(UEdge { action: a, responses });
            }
        }
        ug.edges.push(row);
    }
    Ok(ug)
}

/// Graph of best response: utility-graph nodes paired with the running
/// minimum `b` of best alternatives. `None` targets are losing.
#[derive(Clone, Debug)]
pub struct BrGraph {
    pub nodes: Vec<(u32, Value)>,
    pub edges: Vec<Vec<(u32, Vec<Option<u32>>)>>,
    pub index: HashMap<(u32, Value), u32>,
}

pub fn best_response_graph(ug: &UtilityGraph, ba: &[Vec<Value>], cap: usize) -> Result<BrGraph, RegretError> {
    let mut br = BrGraph {
        nodes: vec![(0, Value::Infinity)],
        edges: Vec::new(),
        index: HashMap::from([((0, Value::Infinity), 0)]),
    };
    let mut queue = VecDeque::from([0u32]);
    while let Some(n) = queue.pop_front() {
        let (un, b) = br.nodes[n as usize];
        let mut row = Vec::new();
        for (k, e) in ug.edges[un as usize].iter().enumerate() {
            let b2 = b.min(ba[un as usize][k]);
            let mut targets = Vec::new();
            for &(_, t) in &e.responses {
                let Some(t) = t else {
                    targets.push(None);
                    continue;
                };
                let next = br.nodes.len() as u32;
                let id = *br.index.entry((t, b2)).or_insert(next);
                if id == next {
                    if br.nodes.len() >= cap {
                        return Err(RegretError::TooLarge { cap });
                    }
                    br.nodes.push((t, b2));
                    queue.push_back(id);
                }
                targets.push(Some(id));
            }
            row.push((e.action, targets));
        }
        br.edges.push(row);
    }
    Ok(br)
}

/// Min-max over the graph of best response with leaf weight `u - min(b, u)`.
/// Returns values and the chosen action per node; ties go to the action
/// with the lower cooperative value, then the lower id.
fn regret_vi(ug: &UtilityGraph, br: &BrGraph, cval: &[Value]) -> (Vec<Value>, Vec<Option<u32>>, usize) {
    let leaf = |n: usize| {
        let (un, b) = br.nodes[n];
        ug.accepting[un as usize].then(|| Value::Finite(leaf_regret(ug.nodes[un as usize].1, b) as i64))
    };
    let mut r: Vec<Value> = (0..br.nodes.len()).map(|n| leaf(n).unwrap_or(Value::Infinity)).collect();
    let action_value = |r: &[Value], ts: &[Option<u32>]| {
        ts.iter().map(|t| t.map_or(Value::Infinity, |t| r[t as usize])).max().unwrap_or(Value::Infinity)
    };
    let mut rounds = 0;
    loop {
        let next: Vec<Value> = (0..br.nodes.len())
            .map(|n| match leaf(n) {
                Some(v) => v,
                None => br.edges[n].iter().map(|(_, ts)| action_value(&r, ts)).min().unwrap_or(Value::Infinity),
            })
            .collect();
        if next == r {
            break;
        }
        r = next;
        rounds += 1;
    }
    let strategy = (0..br.nodes.len())
        .map(|n| {
            if leaf(n).is_some() || !r[n].is_finite() {
                return None;
            }
            let un = br.nodes[n].0 as usize;
            br.edges[n]
                .iter()
                .zip(&ug.edges[un])
                .filter(|((_, ts), _)| action_value(&r, ts) == r[n])
                .map(|((a, _), e)| (ug.edge_value(cval, e), *a))
                .min()
                .map(|(_, a)| a)
        })
        .collect();
    (r, strategy, rounds)
}

/// Fully explicit regret pipeline.
pub fn explicit_regret(g: &Game, dfa: &Dfa, budget: u64, cap: usize) -> Result<RegretResult, RegretError> {
    let p = build_product(g, dfa)?;
    let ug = utility_graph(p, budget, cap)?;
    let cval = ug.cooperative_values();
    let ba = ug.best_alternatives(&cval);
    let br = best_response_graph(&ug, &ba, cap)?;
    let (r, strategy, rounds) = regret_vi(&ug, &br, &cval);

    let mut table = BaTable::new();
    let mut finite: Vec<Value> = Vec::new();
    for (n, row) in ug.edges.iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        let (pr, u) = ug.nodes[n];
        let (v, z) = ug.product.robot[pr as usize];
        let entry: BTreeMap<u32, Value> = row.iter().zip(&ba[n]).map(|(e, &b)| (e.action, b)).collect();
        finite.extend(entry.values().filter(|b| b.is_finite()));
        table.insert((v, z, u), entry);
    }
    finite.sort_unstable();
    finite.dedup();

    let stats = RegretStats {
        utility_states: ug.nodes.len(),
        ba_values: finite.len(),
        br_size: br.nodes.len(),
        iterations: rounds,
        peak_nodes: 0,
    };
    let regret = r[0].finite().map(|v| v as u64);
    let controller = match regret {
        Some(_) => Some(controller(g, dfa, &ug, &ba, &br, &strategy)?),
        None => None,
    };
    Ok(RegretResult { budget, regret, controller, ba: table, stats })
}

fn controller(
    g: &Game,
    dfa: &Dfa,
    ug: &UtilityGraph,
    ba: &[Vec<Value>],
    br: &BrGraph,
    strategy: &[Option<u32>],
) -> Result<Controller, SolveError> {
    let ag = abstract_game(g);
    let p = &ug.product;
    let (v0, z0) = p.robot[p.initial];
    let unode = |k: &NodeKey| {
        let pr = p.robot_index(k.state, k.dfa).expect("controller stays in the product") as u32;
        ug.node(pr, k.utility.unwrap_or(0)).expect("controller stays within budget")
    };
    let init = NodeKey { state: v0, dfa: z0, utility: Some(0), best_alt: Some(Value::Infinity) };
    Controller::explore(
        &ag,
        dfa,
        init,
        |k| {
            let n = br.index[&(unode(k), k.best_alt.unwrap_or(Value::Infinity))];
            Ok(strategy[n as usize])
        },
        |k, a, _, t| {
            let un = unode(k) as usize;
            let slot = ug.edges[un].iter().position(|e| e.action == a).expect("enabled action");
            let mask = ag.states[t as usize].labels.iter().map(|&q| ag.propositions[q as usize].as_str());
            Ok(NodeKey {
                state: t,
                dfa: dfa.step(k.dfa as usize, dfa.mask_of(mask)) as u32,
                utility: Some(k.utility.unwrap_or(0) + p.costs[a as usize] as u64),
                best_alt: Some(k.best_alt.unwrap_or(Value::Infinity).min(ba[un][slot])),
            })
        },
    )
}
