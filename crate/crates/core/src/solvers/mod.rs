//! Min-max reachability on game x DFA products: an explicit oracle and the
//! symbolic layered solver, plus controllers extracted from either.

mod controller;
mod explicit;
mod product;
mod symbolic;

pub use controller::{rollout, Controller, CtrlNode, CtrlState, HumanPolicy, NodeKey, Step, Transcript};
pub use explicit::{explicit_vi, ExplicitSolution};
pub use product::{build_product, letter_masks, ProductGame};
pub use symbolic::{
    accepting_targets, pick_min_action, strategy_action, symbolic_vi_uniform, symbolic_vi_weighted, SymbolicSolution,
    ValueLayers,
};

use thiserror::Error;

use crate::domain::AbstractedGame;
use crate::ltlf::Dfa;
use crate::symgame::{SymError, SymbolicGame};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("task atom `{0}` is not a proposition of the game")]
    UnknownAtom(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("{0}")]
    Contract(String),
}

fn mask(g: &AbstractedGame, dfa: &Dfa, state: u32) -> usize {
    let s = &g.states[state as usize];
    dfa.mask_of(s.labels.iter().map(|&p| g.propositions[p as usize].as_str()))
}

fn initial_key(g: &AbstractedGame, dfa: &Dfa) -> NodeKey {
    let v0 = g.initial as u32;
    NodeKey { state: v0, dfa: dfa.step(dfa.initial, mask(g, dfa, v0)) as u32, utility: None, best_alt: None }
}

/// Step memory `(state, z)` along a joint edge into `target`.
pub fn dfa_advance(g: &AbstractedGame, dfa: &Dfa, key: &NodeKey, target: u32) -> NodeKey {
    NodeKey { state: target, dfa: dfa.step(key.dfa as usize, mask(g, dfa, target)) as u32, ..*key }
}

/// Controller of the explicit min-max strategy. `g` must be the
/// abstraction of the game `p` was built from.
pub fn explicit_controller(
    g: &AbstractedGame,
    dfa: &Dfa,
    p: &ProductGame,
    sol: &ExplicitSolution,
) -> Result<Controller, SolveError> {
    Controller::explore(
        g,
        dfa,
        initial_key(g, dfa),
        |k| Ok(p.robot_index(k.state, k.dfa).and_then(|r| sol.strategy[r])),
        |k, _, _, t| Ok(dfa_advance(g, dfa, k, t)),
    )
}

/// Controller of a symbolic strategy `t(X, Y, O)`.
pub fn symbolic_controller(sg: &SymbolicGame, t: crate::dd::NodeRef) -> Result<Controller, SolveError> {
    let (g, dfa) = (&sg.game, &sg.dfa);
    Controller::explore(
        g,
        dfa,
        initial_key(g, dfa),
        |k| Ok(strategy_action(sg, t, k.state as usize, k.dfa as usize)?),
        |k, _, _, t| Ok(dfa_advance(g, dfa, k, t)),
    )
}
