//! Regret-minimizing synthesis: graph of utility, cooperative values, best
//! alternatives, graph of best response and its min-max solution. The
//! explicit and symbolic pipelines share types; `oracle` evaluates the
//! regret definition directly on small games.

mod explicit;
mod oracle;
mod symbolic;

pub use explicit::{best_response_graph, explicit_regret, utility_graph, BrGraph, UEdge, UtilityGraph};
pub use oracle::{brute_force_regret, AlternateMode};
pub use symbolic::{symbolic_regret, SymbolicRegret};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solvers::{Controller, SolveError};
use crate::symgame::SymError;
use crate::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegretError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("regret game has more than {cap} states")]
    TooLarge { cap: usize },
}

impl From<crate::dd::DdError> for RegretError {
    fn from(e: crate::dd::DdError) -> Self {
        RegretError::Sym(SymError::Dd(e))
    }
}

/// Best alternative per enabled robot action, keyed by utility-graph state
/// `(game state, DFA state, utility)`.
pub type BaTable = BTreeMap<(u32, u32, u64), BTreeMap<u32, Value>>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegretStats {
    /// Reachable `(s, u)` states of the graph of utility.
    pub utility_states: usize,
    /// Distinct finite best-alternative values.
    pub ba_values: usize,
    /// States of the graph of best response (explicit) or `B` codes
    /// (symbolic).
    pub br_size: usize,
    pub iterations: usize,
    pub peak_nodes: usize,
}

#[derive(Clone, Debug)]
pub struct RegretResult {
    pub budget: u64,
    /// Optimal regret at the initial state; `None` when no strategy wins
    /// within the budget.
    pub regret: Option<u64>,
    pub controller: Option<Controller>,
    pub ba: BaTable,
    pub stats: RegretStats,
}

/// Leaf regret `u - min(b, u)`.
pub fn leaf_regret(u: u64, b: Value) -> u64 {
    match b {
        Value::Finite(b) if (b.max(0) as u64) < u => u - b.max(0) as u64,
        _ => 0,
    }
}

/// Best alternative for each action: the least value among the other
/// actions, infinity when there is none.
pub fn alternatives(values: &BTreeMap<u32, Value>) -> BTreeMap<u32, Value> {
    values
        .keys()
        .map(|&a| {
            let alt = values.iter().filter(|(&o, _)| o != a).map(|(_, &v)| v).min().unwrap_or(Value::Infinity);
            (a, alt)
        })
        .collect()
}

#[cfg(test)]
mod tests;
