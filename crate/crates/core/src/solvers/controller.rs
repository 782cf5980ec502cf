use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{AbstractedGame, ActionInfo};
use crate::ltlf::Dfa;
use crate::Value;

use super::SolveError;

/// Memory of a controller node: the game state, the DFA state and, for
/// regret strategies, the payoff so far and the best alternative seen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeKey {
    pub state: u32,
    pub dfa: u32,
    pub utility: Option<u64>,
    pub best_alt: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtrlNode {
    pub key: NodeKey,
    pub accepting: bool,
    pub action: Option<u32>,
    /// `(human action, node)` for every human response to `action`.
    pub next: Vec<(u32, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtrlState {
    pub name: String,
    pub labels: Vec<String>,
}

/// A strategy unfolded into the finite graph it induces from the initial
/// state. This is the artifact the CLI writes and replays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Controller {
    pub objective: String,
    pub formula: String,
    pub instance_digest: String,
    pub robot_actions: Vec<ActionInfo>,
    pub human_actions: Vec<String>,
    pub dfa: Dfa,
    /// Game states mentioned by nodes, by game state id.
    pub states: BTreeMap<u32, CtrlState>,
    pub nodes: Vec<CtrlNode>,
    pub initial: u32,
}

impl Controller {
    /// Explore from `init`. `choose` returns the action at a non-accepting
    /// node; `advance` gives the successor memory for a joint edge.
    pub fn explore(
        g: &AbstractedGame,
        dfa: &Dfa,
        init: NodeKey,
        mut choose: impl FnMut(&NodeKey) -> Result<Option<u32>, SolveError>,
        mut advance: impl FnMut(&NodeKey, u32, u32, u32) -> Result<NodeKey, SolveError>,
    ) -> Result<Controller, SolveError> {
        let mut ids: HashMap<NodeKey, u32> = HashMap::from([(init, 0)]);
        let mut keys = vec![init];
        let mut nodes = Vec::new();
        let mut queue = VecDeque::from([0u32]);
        while let Some(n) = queue.pop_front() {
            let key = keys[n as usize];
            let accepting = dfa.accepting[key.dfa as usize];
            let action = if accepting { None } else { choose(&key)? };
            let mut next = Vec::new();
            if let Some(a) = action {
                for e in g.edges[key.state as usize].iter().filter(|e| e.robot == a) {
                    let k2 = advance(&key, a, e.human, e.target)?;
                    let id = match ids.get(&k2) {
                        Some(&id) => id,
                        None => {
                            let id = keys.len() as u32;
                            ids.insert(k2, id);
                            keys.push(k2);
                            queue.push_back(id);
                            id
                        }
                    };
                    next.push((e.human, id));
                }
                if next.is_empty() {
                    return Err(SolveError::Contract(format!(
                        "action {} is not enabled in state {}",
                        g.robot_actions[a as usize].name, g.states[key.state as usize].name
                    )));
                }
            }
            nodes.push(CtrlNode { key, accepting, action, next });
        }
        let states = nodes
            .iter()
            .map(|n| {
                let s = &g.states[n.key.state as usize];
                let labels = s.labels.iter().map(|&p| g.propositions[p as usize].clone()).collect();
                (n.key.state, CtrlState { name: s.name.clone(), labels })
            })
            .collect();
        Ok(Controller {
            objective: String::new(),
            formula: String::new(),
            instance_digest: String::new(),
            robot_actions: g.robot_actions.clone(),
            human_actions: g.human_actions.clone(),
            dfa: dfa.clone(),
            states,
            nodes,
            initial: 0,
        })
    }

    fn cost(&self, n: &CtrlNode) -> u64 {
        n.action.map_or(0, |a| self.robot_actions[a as usize].cost as u64)
    }

    /// Payoff-to-go of every node when the human maximizes (`worst`) or
    /// minimizes (`best`). Nodes that can loop forever or get stuck are
    /// worth infinity.
    pub fn payoffs(&self, worst: bool) -> Vec<Value> {
        self.fixpoint(|_| Value::ZERO, true, worst)
    }

    fn fixpoint(&self, leaf: impl Fn(&NodeKey) -> Value, add_cost: bool, worst: bool) -> Vec<Value> {
        let mut val: Vec<Value> =
            self.nodes.iter().map(|n| if n.accepting { leaf(&n.key) } else { Value::Infinity }).collect();
        loop {
            let mut changed = false;
            for (i, n) in self.nodes.iter().enumerate() {
                if n.accepting || n.action.is_none() {
                    continue;
                }
                let succ = n.next.iter().map(|&(_, t)| val[t as usize]);
                let pick = if worst { succ.max() } else { succ.min() };
                let mut v = pick.unwrap_or(Value::Infinity);
                if add_cost {
                    v = v.add_cost(self.cost(n));
                }
                if v < val[i] {
                    val[i] = v;
                    changed = true;
                }
            }
            if !changed {
                return val;
            }
        }
    }

    /// Largest leaf regret `u - min(b, u)` the human can force; needs
    /// utility and best-alternative memory on every node.
    pub fn worst_regret(&self) -> Value {
        let leaf = |k: &NodeKey| {
            Value::Finite(
                crate::regret::leaf_regret(k.utility.unwrap_or(0), k.best_alt.unwrap_or(Value::Infinity)) as i64
            )
        };
        self.fixpoint(leaf, false, true)[self.initial as usize]
    }

    pub fn worst_case(&self) -> Value {
        self.payoffs(true)[self.initial as usize]
    }

    pub fn best_case(&self) -> Value {
        self.payoffs(false)[self.initial as usize]
    }

    /// Robot actions used anywhere in the controller.
    pub fn actions_used(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.nodes.iter().filter_map(|n| n.action).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HumanPolicy {
    Adversarial,
    Cooperative,
    Random(u64),
    /// Human action names (or ids) per turn; `noop` once exhausted.
    Scripted(Vec<String>),
}

impl std::str::FromStr for HumanPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "adversarial" => Ok(HumanPolicy::Adversarial),
            "cooperative" => Ok(HumanPolicy::Cooperative),
            _ => {
                if let Some(seed) = s.strip_prefix("random:") {
                    return seed.parse().map(HumanPolicy::Random).map_err(|e| format!("bad seed: {e}"));
                }
                if let Some(path) = s.strip_prefix("script:") {
                    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
                    let steps: Vec<String> = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
                    return Ok(HumanPolicy::Scripted(steps));
                }
                Err(format!("unknown human policy `{s}`"))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub state: String,
    pub dfa: u32,
    pub robot: Option<String>,
    pub cost: u64,
    pub human: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub steps: Vec<Step>,
    pub payoff: u64,
    /// The visited labels satisfy the task (checked by running the DFA).
    pub accepted: bool,
    pub truncated: bool,
}

/// Play the controller against `policy` for at most `max_steps` robot turns.
pub fn rollout(c: &Controller, policy: &HumanPolicy, max_steps: usize) -> Result<Transcript, SolveError> {
    let worst = c.payoffs(true);
    let best = c.payoffs(false);
    let mut rng = match policy {
        HumanPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut at = c.initial as usize;
    let mut steps = Vec::new();
    let mut payoff = 0u64;
    let first = &c.states[&c.nodes[at].key.state];
    let mut z = c.dfa.step(c.dfa.initial, c.dfa.mask_of(first.labels.iter().map(String::as_str)));
    for turn in 0..=max_steps {
        let node = &c.nodes[at];
        let name = c.states[&node.key.state].name.clone();
        if node.accepting || turn == max_steps {
            steps.push(Step { state: name, dfa: node.key.dfa, robot: None, cost: 0, human: None });
            return Ok(Transcript { steps, payoff, accepted: c.dfa.accepting[z], truncated: !node.accepting });
        }
        let a = node.action.ok_or_else(|| SolveError::Contract(format!("strategy undefined at {name}")))?;
        let cost = c.robot_actions[a as usize].cost as u64;
        let pick = match policy {
            HumanPolicy::Adversarial => argbest(&node.next, &worst, true),
            HumanPolicy::Cooperative => argbest(&node.next, &best, false),
            HumanPolicy::Random(_) => {
                let r = rng.as_mut().expect("seeded");
                node.next[r.gen_range(0..node.next.len())]
            }
            HumanPolicy::Scripted(script) => {
                let want = script.get(turn).map_or("noop", String::as_str);
                *node
                    .next
                    .iter()
                    .find(|(e, _)| c.human_actions[*e as usize] == want || e.to_string() == want)
                    .ok_or_else(|| {
                        SolveError::Contract(format!("scripted human action `{want}` not enabled at {name}"))
                    })?
            }
        };
        payoff += cost;
        steps.push(Step {
            state: name,
            dfa: node.key.dfa,
            robot: Some(c.robot_actions[a as usize].name.clone()),
            cost,
            human: Some(c.human_actions[pick.0 as usize].clone()),
        });
        at = pick.1 as usize;
        let labels = &c.states[&c.nodes[at].key.state].labels;
        z = c.dfa.step(z, c.dfa.mask_of(labels.iter().map(String::as_str)));
    }
    unreachable!("loop returns on its last turn")
}

/// Successor with the largest (or smallest) value; ties go to the smallest
/// human action id, which is the order of `next`.
fn argbest(next: &[(u32, u32)], val: &[Value], max: bool) -> (u32, u32) {
    let mut best = next[0];
    for &cand in &next[1..] {
        let (a, b) = (val[cand.1 as usize], val[best.1 as usize]);
        if (max && a > b) || (!max && a < b) {
            best = cand;
        }
    }
    best
}
