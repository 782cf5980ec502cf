use std::collections::{BTreeMap, BTreeSet};

use crate::dd::{NodeRef, Op, Quant, VarId};
use crate::ltlf::bits_for;
use crate::solvers::{dfa_advance, Controller, NodeKey};
use crate::symgame::{Blocks, SymError, SymbolicGame, TrKind, TrPart};
use crate::Value;

use super::{alternatives, leaf_regret, BaTable, RegretError, RegretResult, RegretStats};

/// Diagrams of a finished symbolic regret run, kept for inspection.
pub struct SymbolicRegret {
    pub result: RegretResult,
    /// Reachable `(X, Y, U)`.
    pub reachable: NodeRef,
    /// Cooperative values over `(X, Y, U)`.
    pub cval: NodeRef,
    /// Regret values over `(X, Y, U, B)`.
    pub values: NodeRef,
    pub b_vars: Vec<VarId>,
    /// Value of each `B` code; infinity is the last.
    pub b_codes: Vec<Value>,
}

fn assignment(sg: &SymbolicGame, blocks: &[(&[VarId], u128)]) -> Vec<bool> {
    let mut bits = vec![false; sg.mgr.num_vars() as usize];
    for (vars, code) in blocks {
        for (k, v) in vars.iter().enumerate() {
            bits[v.index()] = code >> (vars.len() - 1 - k) & 1 == 1;
        }
    }
    bits
}

/// `min_I` cooperative predecessor per action over `(X, Y, U, O)`;
/// infinity where the action is not enabled.
fn coop_action_values(sg: &mut SymbolicGame, c: NodeRef, p: &TrPart) -> Result<NodeRef, SymError> {
    let s = sg.step_subst(p, Blocks::Xyu);
    let moved = sg.mgr.vector_compose(c, &s)?;
    let inf = sg.mgr.infinity();
    let masked = sg.mgr.ite(p.guard, moved, inf)?;
    let i = sg.layout.i.clone();
    Ok(sg.mgr.quantify(Quant::MinAbstract, masked, &i)?)
}

/// Hybrid regret pipeline on a game encoded with a budget.
pub fn symbolic_regret(sg: &mut SymbolicGame, kind: TrKind) -> Result<SymbolicRegret, RegretError> {
    let budget = sg.budget.ok_or_else(|| {
        RegretError::Solve(crate::solvers::SolveError::Contract("regret needs a game encoded with a budget".into()))
    })?;
    let l = sg.layout.clone();
    let xyu = l.xyu();
    let parts: Vec<TrPart> = sg.parts(kind).to_vec();

    // graph of utility: reachable (X, Y, U), never expanding leaves or the
    // overshoot code
    let (v0, z0) = sg.initial();
    let s0 = sg.state_cube(v0, z0)?;
    let u0 = sg.mgr.cube(&l.u, 0)?;
    let init = sg.mgr.and(s0, u0)?;
    let within = sg.within_budget()?;
    let not_acc = sg.mgr.negate(sg.accepting)?;
    let expand = sg.mgr.and(not_acc, within)?;
    let reach = sg.reachable(init, expand, kind, Blocks::Xyu)?;
    let reach = sg.mgr.and(reach, within)?;
    let leaves = sg.mgr.and(sg.accepting, within)?;
    let overshoot = sg.mgr.negate(within)?;
    let unreached = sg.mgr.negate(reach)?;
    let dead = sg.mgr.or(overshoot, unreached)?;
    let cap = sg.mgr.sat_count(reach, &xyu)? as usize + 2;

    // cooperative values: min over O and I
    let uval = sg.utility_value()?;
    let inf = sg.mgr.infinity();
    let leaf_c = sg.mgr.ite(leaves, uval, inf)?;
    let mut c = leaf_c;
    let mut rounds = 0;
    loop {
        rounds += 1;
        if rounds > cap {
            return Err(SymError::Divergence(cap).into());
        }
        let mut best = sg.mgr.infinity();
        for p in &parts {
            let per_action = coop_action_values(sg, c, p)?;
            let o = l.o.clone();
            let m = sg.mgr.quantify(Quant::MinAbstract, per_action, &o)?;
            best = sg.mgr.apply(Op::Min, best, m)?;
        }
        let inner = sg.mgr.ite(sg.accepting, leaf_c, best)?;
        let next = sg.mgr.ite(dead, inf, inner)?;
        if next == c {
            break;
        }
        c = next;
    }
    let mut cv = sg.mgr.infinity();
    for p in &parts {
        let per_action = coop_action_values(sg, c, p)?;
        cv = sg.mgr.apply(Op::Min, cv, per_action)?;
    }

    // best alternatives, by an explicit loop over decoded edges
    let enabled: BTreeMap<usize, BTreeSet<u32>> =
        sg.decode_edges(sg.guard)?.into_iter().fold(BTreeMap::new(), |mut m, (s, o, _)| {
            m.entry(s).or_default().insert(o);
            m
        });
    let mut reach_states: Vec<(usize, usize, u64)> = Vec::new();
    let (ny, nu) = (l.y.len(), l.u.len());
    sg.mgr.for_each_assignment(reach, &xyu, Some(Value::ZERO), |code, _| {
        let u = (code & ((1 << nu) - 1)) as u64;
        if let Some((s, z)) = sg.decode_xy(code >> nu) {
            reach_states.push((s, z, u));
        }
    })?;
    let mut cv_of: BTreeMap<(usize, usize, u64), BTreeMap<u32, Value>> = BTreeMap::new();
    let xyuo: Vec<VarId> = [&xyu[..], &l.o[..]].concat();
    let no = l.o.len();
    sg.mgr.for_each_assignment(cv, &xyuo, Some(Value::Infinity), |code, v| {
        let o = (code & ((1 << no) - 1)) as u32;
        let u = ((code >> no) & ((1 << nu) - 1)) as u64;
        if let Some((s, z)) = sg.decode_xy(code >> (no + nu)) {
            cv_of.entry((s, z, u)).or_default().insert(o, v);
        }
    })?;
    let mut table = BaTable::new();
    for &(s, z, u) in &reach_states {
        if u > budget || sg.dfa.accepting[z] {
            continue;
        }
        let Some(acts) = enabled.get(&s) else { continue };
        let known = cv_of.get(&(s, z, u));
        let vals: BTreeMap<u32, Value> =
            acts.iter().map(|&a| (a, known.and_then(|m| m.get(&a)).copied().unwrap_or(Value::Infinity))).collect();
        table.insert((s as u32, z as u32, u), alternatives(&vals));
    }
    let mut b_codes: Vec<Value> = table.values().flat_map(|m| m.values().copied()).filter(|v| v.is_finite()).collect();
    b_codes.sort_unstable();
    b_codes.dedup();
    let ba_values = b_codes.len();
    b_codes.push(Value::Infinity);
    let inf_code = (b_codes.len() - 1) as i64;
    let code_of = |v: Value| b_codes.binary_search(&v).expect("listed value") as i64;

    // graph of best response: B block after everything else
    let nb = bits_for(b_codes.len()).max(1);
    let b_vars = sg.mgr.new_vars(nb).map_err(|e| match e {
        crate::dd::DdError::VariableBudget(limit) => SymError::Bits { needed: sg.mgr.num_vars() + nb as u32, limit },
        e => SymError::Dd(e),
    })?;
    let mut rows = Vec::new();
    for (&(s, z, u), m) in &table {
        let xyu_code = ((sg.game.states[s as usize].code << ny | z as u128) << nu) | u as u128;
        for (&a, &b) in m {
            rows.push(((xyu_code << no) | a as u128, Value::Finite(code_of(b))));
        }
    }
    let ba_code = sg.mgr.from_table(&xyuo, &rows, Value::Finite(inf_code))?;
    let b_rows: Vec<(u128, Value)> = (0..b_codes.len()).map(|k| (k as u128, Value::Finite(k as i64))).collect();
    let b_add = sg.mgr.from_table(&b_vars, &b_rows, Value::Finite(inf_code))?;
    let b_next = sg.mgr.apply(Op::Min, b_add, ba_code)?;
    let mut eta_b = Vec::with_capacity(nb);
    for (k, &v) in b_vars.iter().enumerate() {
        let shift = nb - 1 - k;
        let bit = sg.mgr.map_terminals(b_next, |v| match v {
            Value::Finite(c) if c >> shift & 1 == 1 => Value::ONE,
            _ => Value::ZERO,
        })?;
        eta_b.push((v, bit));
    }

    // leaf regret u - min(b, u) over (U, B)
    let ub: Vec<VarId> = [&l.u[..], &b_vars[..]].concat();
    let mut w_rows = Vec::new();
    for u in 0..=budget {
        for (k, &b) in b_codes.iter().enumerate() {
            w_rows.push(((u as u128) << nb | k as u128, Value::Finite(leaf_regret(u, b) as i64)));
        }
    }
    let weight = sg.mgr.from_table(&ub, &w_rows, Value::Infinity)?;
    let leaf_r = sg.mgr.ite(leaves, weight, inf)?;

    let br_cap = cap * b_codes.len() + 2;
    let mut r = leaf_r;
    let mut q;
    let mut vi_rounds = 0;
    loop {
        vi_rounds += 1;
        if vi_rounds > br_cap {
            return Err(SymError::Divergence(br_cap).into());
        }
        q = sg.mgr.infinity();
        for p in &parts {
            let per_action = sg.action_values(r, p, Blocks::Xyu, &eta_b, false)?;
            q = sg.mgr.apply(Op::Min, q, per_action)?;
        }
        let o = l.o.clone();
        let best = sg.mgr.quantify(Quant::MinAbstract, q, &o)?;
        let inner = sg.mgr.ite(sg.accepting, leaf_r, best)?;
        let next = sg.mgr.ite(dead, inf, inner)?;
        if next == r {
            break;
        }
        r = next;
    }

    let init_bits = assignment(
        sg,
        &[(&l.xy(), sg.game.states[v0].code << ny | z0 as u128), (&l.u, 0), (&b_vars, inf_code as u128)],
    );
    let regret = sg.mgr.eval(r, &init_bits)?.finite().map(|v| v as u64);
    let stats = RegretStats {
        utility_states: reach_states.len(),
        ba_values,
        br_size: b_codes.len(),
        iterations: rounds + vi_rounds,
        peak_nodes: sg.mgr.stats().peak_live_nodes,
    };
    let controller = match regret {
        Some(_) => Some(controller(sg, r, q, &table, &cv_of, &b_vars, &b_codes)?),
        None => None,
    };
    Ok(SymbolicRegret {
        result: RegretResult { budget, regret, controller, ba: table, stats },
        reachable: reach,
        cval: c,
        values: r,
        b_vars,
        b_codes,
    })
}

/// Read the strategy off `q(X,Y,U,B,O)`: among action codes matching the
/// value `r`, the one with the least cooperative value, then the least code.
fn controller(
    sg: &SymbolicGame,
    r: NodeRef,
    q: NodeRef,
    table: &BaTable,
    cv_of: &BTreeMap<(usize, usize, u64), BTreeMap<u32, Value>>,
    b_vars: &[VarId],
    b_codes: &[Value],
) -> Result<Controller, RegretError> {
    let l = &sg.layout;
    let (v0, z0) = sg.initial();
    let init = NodeKey { state: v0 as u32, dfa: z0 as u32, utility: Some(0), best_alt: Some(Value::Infinity) };
    let ny = l.y.len();
    let ctrl = Controller::explore(
        &sg.game,
        &sg.dfa,
        init,
        |k| {
            let b = k.best_alt.unwrap_or(Value::Infinity);
            let bcode = b_codes.binary_search(&b).expect("b is a listed value") as u128;
            let xy = sg.game.states[k.state as usize].code << ny | k.dfa as u128;
            let mut bits = assignment(sg, &[(&l.xy(), xy), (&l.u, k.utility.unwrap_or(0) as u128), (b_vars, bcode)]);
            let here = sg.mgr.eval(r, &bits).map_err(SymError::from)?;
            if !here.is_finite() {
                return Ok(None);
            }
            let coop = cv_of.get(&(k.state as usize, k.dfa as usize, k.utility.unwrap_or(0)));
            let mut pick: Option<(Value, u32)> = None;
            for a in 0..sg.game.robot_actions.len() as u32 {
                for (j, v) in l.o.iter().enumerate() {
                    bits[v.index()] = a >> (l.o.len() - 1 - j) & 1 == 1;
                }
                if sg.mgr.eval(q, &bits).map_err(SymError::from)? == here {
                    let cv = coop.and_then(|m| m.get(&a)).copied().unwrap_or(Value::Infinity);
                    if pick.is_none_or(|p| (cv, a) < p) {
                        pick = Some((cv, a));
                    }
                }
            }
            Ok(pick.map(|(_, a)| a))
        },
        |k, a, _, t| {
            let u = k.utility.unwrap_or(0);
            let ba = table.get(&(k.state, k.dfa, u)).and_then(|m| m.get(&a)).copied().unwrap_or(Value::Infinity);
            let mut next = dfa_advance(&sg.game, &sg.dfa, k, t);
            next.utility = Some(u + sg.game.robot_actions[a as usize].cost as u64);
            next.best_alt = Some(k.best_alt.unwrap_or(Value::Infinity).min(ba));
            Ok(next)
        },
    )?;
    Ok(ctrl)
}
