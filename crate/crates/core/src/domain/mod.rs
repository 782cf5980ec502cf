//! Manipulation domains: instance formats, the explicit two-player game and
//! benchmark generators.

mod game;
mod generate;
mod instance;
mod manip;
mod pddl;

use thiserror::Error;

pub use game::{abstract_game, build_game, AbstractedGame, ActionInfo, Game, JointEdge, StateInfo};
pub use generate::{gen_benchmark, random_game, random_small, two_region, BenchParams, RandomGameParams};
pub use instance::{Costs, GoalSpec, InitSpec, Location, ManipInstance, Object, Region};
pub use manip::{Config, ManipModel};
pub use pddl::{load_pddl, parse_pddl, Caps, StripsInstance};

pub const DEFAULT_MAX_STATES: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("schema error at `{pointer}`: {msg}")]
    Schema { pointer: String, msg: String },
    #[error("{0}")]
    Io(String),
    #[error("PDDL syntax error at line {line}: {msg}")]
    PddlSyntax { line: usize, msg: String },
    #[error("unsupported PDDL construct `{0}`")]
    Unsupported(String),
    #[error("cannot ground `{action}`: {msg}")]
    Grounding { action: String, msg: String },
    #[error("state cap exceeded: more than {cap} states (at least {seen} discovered)")]
    StateCap { cap: usize, seen: usize },
}

/// Anything that can be unfolded into a turn-based game.
///
/// Human action 0 must be the no-op and must be enabled everywhere.
pub trait DomainModel {
    type State: Clone + Eq + std::hash::Hash;

    fn initial(&self) -> Self::State;
    fn propositions(&self) -> Vec<String>;
    /// Indices into [`propositions`](Self::propositions) that hold in `s`, ascending.
    fn labels(&self, s: &Self::State) -> Vec<u32>;
    fn robot_actions(&self) -> Vec<ActionInfo>;
    fn human_actions(&self) -> Vec<String>;
    /// Enabled robot moves, ascending by action id.
    fn robot_successors(&self, s: &Self::State) -> Vec<(u32, Self::State)>;
    /// Enabled human moves including `(0, s)`, ascending by action id.
    fn human_successors(&self, s: &Self::State) -> Vec<(u32, Self::State)>;
    /// Structured binary code of a state and the code width. `None` means
    /// states are numbered densely in discovery order.
    fn state_code(&self, _s: &Self::State) -> Option<(u128, usize)> {
        None
    }
    fn describe(&self, s: &Self::State) -> String;
}
