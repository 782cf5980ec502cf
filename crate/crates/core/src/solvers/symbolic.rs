use std::collections::BTreeMap;

use crate::dd::NodeRef;
use crate::symgame::{SymError, SymbolicGame, TrKind};
use crate::Value;

/// Layer `j` holds the product states `(X, Y)` whose value is `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueLayers {
    pub layers: BTreeMap<i64, NodeRef>,
}

impl ValueLayers {
    pub fn value_of(&self, sg: &SymbolicGame, state: usize, z: usize) -> Result<Value, SymError> {
        let code = sg.game.states[state].code << sg.layout.y.len() | z as u128;
        let vars = sg.layout.xy();
        let mut bits = vec![false; sg.mgr.num_vars() as usize];
        for (k, v) in vars.iter().enumerate() {
            bits[v.index()] = code >> (vars.len() - 1 - k) & 1 == 1;
        }
        for (&j, &f) in &self.layers {
            if sg.mgr.eval(f, &bits)? == Value::ONE {
                return Ok(Value::Finite(j));
            }
        }
        Ok(Value::Infinity)
    }

    /// Every layered state with its value.
    pub fn decode(&self, sg: &SymbolicGame) -> Result<BTreeMap<(usize, usize), Value>, SymError> {
        let mut out = BTreeMap::new();
        for (&j, &f) in &self.layers {
            for sz in sg.decode_set(f)? {
                out.insert(sz, Value::Finite(j));
            }
        }
        Ok(out)
    }

    pub fn union(&self, sg: &mut SymbolicGame) -> Result<NodeRef, SymError> {
        Ok(sg.mgr.or_all(self.layers.values().copied())?)
    }
}

#[derive(Clone, Debug)]
pub struct SymbolicSolution {
    pub layers: ValueLayers,
    /// `t(X, Y, O)`: exactly one action code per non-accepting layered state.
    pub strategy: NodeRef,
    pub iterations: usize,
}

/// Default targets: valid accepting product states.
pub fn accepting_targets(sg: &mut SymbolicGame) -> Result<NodeRef, SymError> {
    Ok(sg.mgr.and(sg.valid_x, sg.accepting)?)
}

fn round_cap(sg: &mut SymbolicGame) -> Result<usize, SymError> {
    let valid = sg.valid_xy()?;
    let vars = sg.layout.xy();
    Ok(sg.mgr.sat_count(valid, &vars)? as usize + 2)
}

/// Restrict `t(X,Y,O)` to the smallest action code of each state.
pub fn pick_min_action(sg: &mut SymbolicGame, t: NodeRef) -> Result<NodeRef, SymError> {
    let o = sg.layout.o.clone();
    let mut t = t;
    for &bit in &o {
        let low = sg.mgr.nvar(bit)?;
        let with_low = sg.mgr.and(t, low)?;
        let has_low = sg.mgr.exists(with_low, &o)?;
        // where a choice with this bit clear exists, drop the others
        let high = sg.mgr.var(bit)?;
        let drop = sg.mgr.and(has_low, high)?;
        let keep = sg.mgr.negate(drop)?;
        t = sg.mgr.and(t, keep)?;
    }
    Ok(t)
}

/// Qualitative attractor to `targets`. The strategy keeps the actions
/// found when a state first joins.
pub fn symbolic_vi_uniform(
    sg: &mut SymbolicGame,
    kind: TrKind,
    targets: NodeRef,
) -> Result<(NodeRef, NodeRef, usize), SymError> {
    let valid = sg.valid_xy()?;
    let mut win = sg.mgr.and(targets, valid)?;
    let mut t = sg.mgr.zero();
    let parts = sg.parts(kind).to_vec();
    let cap = round_cap(sg)?;
    let o = sg.layout.o.clone();
    let mut rounds = 0;
    loop {
        rounds += 1;
        if rounds > cap {
            return Err(SymError::Divergence(cap));
        }
        let mut forced = sg.mgr.zero();
        for p in &parts {
            let f = sg.forced_by(win, p)?;
            forced = sg.mgr.or(forced, f)?;
        }
        let outside = sg.mgr.negate(win)?;
        let fresh_t = sg.mgr.and(forced, outside)?;
        let fresh = sg.mgr.exists(fresh_t, &o)?;
        if fresh == sg.mgr.zero() {
            break;
        }
        t = sg.mgr.or(t, fresh_t)?;
        win = sg.mgr.or(win, fresh)?;
    }
    let t = pick_min_action(sg, t)?;
    Ok((win, t, rounds - 1))
}

/// Layered min-max value iteration. Each round recomputes every layer
/// from the previous round: a state enters layer `j + c` when some action
/// of cost `c` forces every successor into layers `<= j`, and keeps only
/// its least layer. Stops when all layers repeat.
pub fn symbolic_vi_weighted(
    sg: &mut SymbolicGame,
    kind: TrKind,
    targets: NodeRef,
) -> Result<SymbolicSolution, SymError> {
    let valid = sg.valid_xy()?;
    let targets = sg.mgr.and(targets, valid)?;
    let parts = sg.parts(kind).to_vec();
    let cap = round_cap(sg)?;
    let mut layers = BTreeMap::from([(0i64, targets)]);
    let mut rounds = 0;
    loop {
        rounds += 1;
        if rounds > cap {
            return Err(SymError::Divergence(cap));
        }
        let mut cumulative = Vec::with_capacity(layers.len());
        let mut acc = sg.mgr.zero();
        for (&j, &f) in &layers {
            acc = sg.mgr.or(acc, f)?;
            cumulative.push((j, acc));
        }
        let mut witness: BTreeMap<i64, NodeRef> = BTreeMap::new();
        for p in &parts {
            if p.guard == sg.mgr.zero() {
                continue;
            }
            for &(j, below) in &cumulative {
                let f = sg.forced_by(below, p)?;
                if f == sg.mgr.zero() {
                    continue;
                }
                let v = j + p.cost as i64;
                let slot = witness.entry(v).or_insert(sg.mgr.zero());
                *slot = sg.mgr.or(*slot, f)?;
            }
        }
        let o = sg.layout.o.clone();
        let mut next = BTreeMap::from([(0i64, targets)]);
        let mut assigned = targets;
        let mut strategy = sg.mgr.zero();
        for (&v, &w) in &witness {
            let states = sg.mgr.exists(w, &o)?;
            let outside = sg.mgr.negate(assigned)?;
            let layer = sg.mgr.and(states, outside)?;
            if layer == sg.mgr.zero() {
                continue;
            }
            assigned = sg.mgr.or(assigned, layer)?;
            let chosen = sg.mgr.and(w, layer)?;
            strategy = sg.mgr.or(strategy, chosen)?;
            let slot = next.entry(v).or_insert(sg.mgr.zero());
            *slot = sg.mgr.or(*slot, layer)?;
        }
        if next == layers {
            let strategy = pick_min_action(sg, strategy)?;
            return Ok(SymbolicSolution { layers: ValueLayers { layers }, strategy, iterations: rounds - 1 });
        }
        layers = next;
    }
}

/// Action code chosen by `t` at `(state, z)`, if any.
pub fn strategy_action(sg: &SymbolicGame, t: NodeRef, state: usize, z: usize) -> Result<Option<u32>, SymError> {
    let l = &sg.layout;
    let code = sg.game.states[state].code << l.y.len() | z as u128;
    let xy = l.xy();
    let mut bits = vec![false; sg.mgr.num_vars() as usize];
    for (k, v) in xy.iter().enumerate() {
        bits[v.index()] = code >> (xy.len() - 1 - k) & 1 == 1;
    }
    for a in 0..sg.game.robot_actions.len() as u32 {
        for (k, v) in l.o.iter().enumerate() {
            bits[v.index()] = a >> (l.o.len() - 1 - k) & 1 == 1;
        }
        if sg.mgr.eval(t, &bits)? == Value::ONE {
            return Ok(Some(a));
        }
    }
    Ok(None)
}
