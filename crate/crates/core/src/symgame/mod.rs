//! Boolean encoding of an abstracted game and its task automaton.
//!
//! Variable order: `X` (state), `Y` (DFA), `U` (utility), `O` (robot
//! action), `I` (human action), then the primed copies `X' Y' U'` used only
//! for forward images. Blocks allocated later (the best-response block of
//! the regret pipeline) go after those.

mod image;

pub use image::Blocks;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::dd::{DdError, Manager, NodeRef, VarId};
use crate::domain::AbstractedGame;
use crate::ltlf::{bits_for, encode_symbolic, Dfa, LtlError, SymbolicDfa};
use crate::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymError {
    #[error("variable budget exceeded: {needed} variables needed, limit is {limit}")]
    Bits { needed: u32, limit: u32 },
    #[error("task atom `{0}` is not a proposition of the game")]
    UnknownAtom(String),
    #[error("value iteration did not converge within {0} rounds")]
    Divergence(usize),
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
}

#[derive(Clone, Debug, Default)]
pub struct Layout {
    pub x: Vec<VarId>,
    pub y: Vec<VarId>,
    pub u: Vec<VarId>,
    pub o: Vec<VarId>,
    pub i: Vec<VarId>,
    pub xp: Vec<VarId>,
    pub yp: Vec<VarId>,
    pub up: Vec<VarId>,
}

impl Layout {
    pub fn xy(&self) -> Vec<VarId> {
        [&self.x[..], &self.y[..]].concat()
    }

    pub fn xyu(&self) -> Vec<VarId> {
        [&self.x[..], &self.y[..], &self.u[..]].concat()
    }

    pub fn block_sizes(&self) -> BTreeMap<&'static str, usize> {
        BTreeMap::from([
            ("X", self.x.len()),
            ("Y", self.y.len()),
            ("U", self.u.len()),
            ("O", self.o.len()),
            ("I", self.i.len()),
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrKind {
    /// One functional vector per distinct action cost.
    Monolithic,
    /// One functional vector per robot action.
    Partitioned,
}

/// One slice of the transition function.
#[derive(Clone, Debug)]
pub struct TrPart {
    pub cost: u32,
    pub actions: Vec<u32>,
    /// `eta[k](X,O,I)`: bit `k` of the successor state.
    pub eta: Vec<NodeRef>,
    /// Valid `(state, robot action, human action)` triples of this slice.
    pub guard: NodeRef,
    /// `exists I. guard`.
    pub robot_valid: NodeRef,
    /// DFA step read on the successor: `zeta[j](eta(X,O,I), Y)`.
    pub zeta_next: Vec<NodeRef>,
    /// `eta_u[k](U)`: bit `k` of the saturated utility after paying `cost`.
    pub eta_u: Vec<NodeRef>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Allocate a utility block for payoffs `0..=budget` plus overshoot.
    pub budget: Option<u64>,
    pub max_vars: Option<u32>,
}

/// A game, its task automaton and every derived diagram, in one manager.
pub struct SymbolicGame {
    pub mgr: Manager,
    pub layout: Layout,
    pub game: AbstractedGame,
    pub dfa: Dfa,
    pub sd: SymbolicDfa,
    pub valid_x: NodeRef,
    /// Accepting and valid DFA codes.
    pub accepting: NodeRef,
    pub labels: BTreeMap<String, NodeRef>,
    /// Whole transition function and its guard.
    pub eta: Vec<NodeRef>,
    pub guard: NodeRef,
    pub monolithic: Vec<TrPart>,
    pub partitioned: Vec<TrPart>,
    pub budget: Option<u64>,
    code_index: HashMap<u128, usize>,
    relations: HashMap<(TrKind, usize), NodeRef>,
}

fn alloc(mgr: &mut Manager, n: usize, limit: u32) -> Result<Vec<VarId>, SymError> {
    mgr.new_vars(n).map_err(|e| match e {
        DdError::VariableBudget(_) => SymError::Bits { needed: mgr.num_vars() + n as u32, limit },
        e => SymError::Dd(e),
    })
}

impl SymbolicGame {
    /// Encode `game` and `dfa`. Every DFA atom must be a game proposition.
    pub fn encode(game: &AbstractedGame, dfa: &Dfa, opts: EncodeOptions) -> Result<Self, SymError> {
        let limit = opts.max_vars.unwrap_or(1024);
        let mut mgr = Manager::with_var_limit(limit);
        let width = game.code_width;
        let u_bits = opts.budget.map_or(0, |b| bits_for(b as usize + 2));
        let mut layout = Layout {
            x: alloc(&mut mgr, width, limit)?,
            y: alloc(&mut mgr, bits_for(dfa.num_states()), limit)?,
            u: alloc(&mut mgr, u_bits, limit)?,
            o: alloc(&mut mgr, bits_for(game.robot_actions.len()), limit)?,
            i: alloc(&mut mgr, bits_for(game.human_actions.len()), limit)?,
            ..Layout::default()
        };
        layout.xp = alloc(&mut mgr, width, limit)?;
        layout.yp = alloc(&mut mgr, layout.y.len(), limit)?;
        layout.up = alloc(&mut mgr, u_bits, limit)?;

        let code_index: HashMap<u128, usize> = game.states.iter().enumerate().map(|(s, info)| (info.code, s)).collect();
        let valid_x = mgr.code_set(&layout.x, game.states.iter().map(|s| s.code))?;

        let mut labels = BTreeMap::new();
        for atom in &dfa.atoms {
            let p =
                game.propositions.iter().position(|q| q == atom).ok_or_else(|| SymError::UnknownAtom(atom.clone()))?
                    as u32;
            let codes = game.states.iter().filter(|s| s.labels.binary_search(&p).is_ok()).map(|s| s.code);
            labels.insert(atom.clone(), mgr.code_set(&layout.x, codes)?);
        }
        let sd = encode_symbolic(&mut mgr, dfa, &layout.y, &labels)?;
        let accepting = mgr.and(sd.accepting, sd.valid)?;
        let zero = mgr.zero();

        let mut sg = SymbolicGame {
            mgr,
            layout,
            game: game.clone(),
            dfa: dfa.clone(),
            sd,
            valid_x,
            accepting,
            labels,
            eta: Vec::new(),
            guard: zero,
            monolithic: Vec::new(),
            partitioned: Vec::new(),
            budget: opts.budget,
            code_index,
            relations: HashMap::new(),
        };
        let all: Vec<u32> = (0..game.robot_actions.len() as u32).collect();
        let (eta, guard) = sg.transition_vector(&all)?;
        sg.eta = eta;
        sg.guard = guard;
        sg.monolithic = sg.build_monolithic()?;
        sg.partitioned = sg.build_partitioned()?;
        Ok(sg)
    }

    fn edge_code(&self, x: u128, o: u32, i: u32) -> u128 {
        let (no, ni) = (self.layout.o.len(), self.layout.i.len());
        (x << (no + ni)) | ((o as u128) << ni) | i as u128
    }

    fn xoi(&self) -> Vec<VarId> {
        [&self.layout.x[..], &self.layout.o[..], &self.layout.i[..]].concat()
    }

    /// `eta` and guard restricted to edges whose robot action is in `actions`.
    fn transition_vector(&mut self, actions: &[u32]) -> Result<(Vec<NodeRef>, NodeRef), SymError> {
        let keep: BTreeSet<u32> = actions.iter().copied().collect();
        let width = self.layout.x.len();
        let mut bits: Vec<Vec<(u128, Value)>> = vec![Vec::new(); width];
        let mut valid = Vec::new();
        for (s, row) in self.game.edges.iter().enumerate() {
            let x = self.game.states[s].code;
            for e in row.iter().filter(|e| keep.contains(&e.robot)) {
                let code = self.edge_code(x, e.robot, e.human);
                valid.push((code, Value::ONE));
                let t = self.game.states[e.target as usize].code;
                for (k, rows) in bits.iter_mut().enumerate() {
                    if t >> (width - 1 - k) & 1 == 1 {
                        rows.push((code, Value::ONE));
                    }
                }
            }
        }
        let vars = self.xoi();
        let eta =
            bits.iter().map(|rows| self.mgr.from_table(&vars, rows, Value::ZERO)).collect::<Result<Vec<_>, _>>()?;
        let guard = self.mgr.from_table(&vars, &valid, Value::ZERO)?;
        Ok((eta, guard))
    }

    fn part(&mut self, cost: u32, actions: Vec<u32>) -> Result<TrPart, SymError> {
        let (eta, guard) = self.transition_vector(&actions)?;
        let robot_valid = self.mgr.exists(guard, &self.layout.i.clone())?;
        let subst: Vec<(VarId, NodeRef)> = self.layout.x.iter().copied().zip(eta.iter().copied()).collect();
        let zeta_next = self
            .sd
            .zeta
            .clone()
            .into_iter()
            .map(|z| self.mgr.vector_compose(z, &subst))
            .collect::<Result<Vec<_>, _>>()?;
        let eta_u = self.utility_step(cost)?;
        Ok(TrPart { cost, actions, eta, guard, robot_valid, zeta_next, eta_u })
    }

    /// One slice per distinct robot-action cost, ascending.
    pub fn build_monolithic(&mut self) -> Result<Vec<TrPart>, SymError> {
        let mut classes: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (a, info) in self.game.robot_actions.iter().enumerate() {
            classes.entry(info.cost).or_default().push(a as u32);
        }
        classes.into_iter().map(|(c, acts)| self.part(c, acts)).collect()
    }

    /// One slice per robot action.
    pub fn build_partitioned(&mut self) -> Result<Vec<TrPart>, SymError> {
        let costs: Vec<u32> = self.game.robot_actions.iter().map(|a| a.cost).collect();
        costs.into_iter().enumerate().map(|(a, c)| self.part(c, vec![a as u32])).collect()
    }

    pub fn parts(&self, kind: TrKind) -> &[TrPart] {
        match kind {
            TrKind::Monolithic => &self.monolithic,
            TrKind::Partitioned => &self.partitioned,
        }
    }

    /// Saturating `u + cost` over the utility block; empty without a budget.
    fn utility_step(&mut self, cost: u32) -> Result<Vec<NodeRef>, SymError> {
        let Some(b) = self.budget else { return Ok(Vec::new()) };
        let width = self.layout.u.len();
        let over = b + 1;
        let mut bits: Vec<Vec<(u128, Value)>> = vec![Vec::new(); width];
        for u in 0..(1u64 << width) {
            let next = (u + cost as u64).min(over);
            for (k, rows) in bits.iter_mut().enumerate() {
                if next >> (width - 1 - k) & 1 == 1 {
                    rows.push((u as u128, Value::ONE));
                }
            }
        }
        let vars = self.layout.u.clone();
        Ok(bits.iter().map(|rows| self.mgr.from_table(&vars, rows, Value::ZERO)).collect::<Result<Vec<_>, _>>()?)
    }

    /// Utility codes `0..=budget`.
    pub fn within_budget(&mut self) -> Result<NodeRef, SymError> {
        let b = self.budget.unwrap_or(0);
        let vars = self.layout.u.clone();
        Ok(self.mgr.code_set(&vars, 0..=b as u128)?)
    }

    /// ADD over `U` mapping each in-budget code to its value, else infinity.
    pub fn utility_value(&mut self) -> Result<NodeRef, SymError> {
        let b = self.budget.unwrap_or(0);
        let rows: Vec<(u128, Value)> = (0..=b).map(|u| (u as u128, Value::Finite(u as i64))).collect();
        let vars = self.layout.u.clone();
        Ok(self.mgr.from_table(&vars, &rows, Value::Infinity)?)
    }

    /// Valid product states `(X, Y)`.
    pub fn valid_xy(&mut self) -> Result<NodeRef, SymError> {
        Ok(self.mgr.and(self.valid_x, self.sd.valid)?)
    }

    /// Characteristic function of the product state `(state, z)`.
    pub fn state_cube(&mut self, state: usize, z: usize) -> Result<NodeRef, SymError> {
        let code = self.game.states[state].code << self.layout.y.len() | z as u128;
        let vars = self.layout.xy();
        Ok(self.mgr.cube(&vars, code)?)
    }

    /// Initial product state: the DFA has already read the initial label.
    pub fn initial(&self) -> (usize, usize) {
        let v0 = self.game.initial;
        let mask = self.label_mask(v0);
        (v0, self.dfa.step(self.dfa.initial, mask))
    }

    pub fn label_mask(&self, state: usize) -> usize {
        let labels = &self.game.states[state].labels;
        let names = labels.iter().map(|&p| self.game.propositions[p as usize].as_str());
        self.dfa.mask_of(names)
    }

    pub fn state_of_code(&self, code: u128) -> Option<usize> {
        self.code_index.get(&code).copied()
    }

    /// Split a code over `X ++ Y` into `(state, z)`; `None` for ghost codes.
    pub fn decode_xy(&self, code: u128) -> Option<(usize, usize)> {
        let ny = self.layout.y.len();
        let z = (code & ((1u128 << ny) - 1)) as usize;
        let s = self.state_of_code(code >> ny)?;
        (z < self.dfa.num_states()).then_some((s, z))
    }

    /// Members of a boolean function over `(X, Y)`.
    pub fn decode_set(&self, f: NodeRef) -> Result<BTreeSet<(usize, usize)>, SymError> {
        let vars = self.layout.xy();
        let mut out = BTreeSet::new();
        let mut ghost = false;
        self.mgr.for_each_assignment(f, &vars, Some(Value::ZERO), |code, _| match self.decode_xy(code) {
            Some(sz) => {
                out.insert(sz);
            }
            None => ghost = true,
        })?;
        assert!(!ghost, "state set contains a code that denotes no state");
        Ok(out)
    }

    /// Finite entries of an ADD over `(X, Y)`.
    pub fn decode_values(&self, f: NodeRef) -> Result<BTreeMap<(usize, usize), Value>, SymError> {
        let vars = self.layout.xy();
        let mut out = BTreeMap::new();
        self.mgr.for_each_assignment(f, &vars, Some(Value::Infinity), |code, v| {
            if let Some(sz) = self.decode_xy(code) {
                out.insert(sz, v);
            }
        })?;
        Ok(out)
    }

    /// Decoded joint edges of a function over `(X, O, I)`.
    pub fn decode_edges(&self, f: NodeRef) -> Result<BTreeSet<(usize, u32, u32)>, SymError> {
        let vars = self.xoi();
        let (no, ni) = (self.layout.o.len(), self.layout.i.len());
        let mut out = BTreeSet::new();
        self.mgr.for_each_assignment(f, &vars, Some(Value::ZERO), |code, _| {
            let i = (code & ((1 << ni) - 1)) as u32;
            let o = ((code >> ni) & ((1 << no) - 1)) as u32;
            if let Some(s) = self.state_of_code(code >> (no + ni)) {
                out.insert((s, o, i));
            }
        })?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
