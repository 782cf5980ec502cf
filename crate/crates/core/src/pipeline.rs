//! End-to-end runs: load a task, solve it with one of the solvers and
//! package the strategy and a report.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::domain::{abstract_game, build_game, DomainError, Game, ManipInstance, ManipModel, StripsInstance};
use crate::ltlf::{parse, to_dfa, Dfa, LtlError};
use crate::regret::{explicit_regret, symbolic_regret, RegretError, RegretStats};
use crate::solvers::{
    accepting_targets, build_product, explicit_controller, explicit_vi, symbolic_controller, symbolic_vi_weighted,
    Controller, SolveError,
};
use crate::symgame::{EncodeOptions, SymError, SymbolicGame, TrKind};
use crate::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Explicit,
    SymbolicMonolithic,
    SymbolicPartitioned,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] =
        [SolverKind::Explicit, SolverKind::SymbolicMonolithic, SolverKind::SymbolicPartitioned];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Explicit => "explicit",
            SolverKind::SymbolicMonolithic => "symbolic-monolithic",
            SolverKind::SymbolicPartitioned => "symbolic-partitioned",
        }
    }

    fn tr(self) -> TrKind {
        match self {
            SolverKind::SymbolicPartitioned => TrKind::Partitioned,
            _ => TrKind::Monolithic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    Minmax,
    Regret,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Regret(#[from] RegretError),
    #[error("explicit product has {seen} states, above the cap of {cap}")]
    ProductCap { cap: usize, seen: usize },
}

impl PipelineError {
    /// Which limit was hit, if this is a cap error.
    pub fn cap_dimension(&self) -> Option<&'static str> {
        match self {
            PipelineError::Domain(DomainError::StateCap { .. }) => Some("game states"),
            PipelineError::ProductCap { .. } => Some("product states"),
            PipelineError::Sym(SymError::Bits { .. })
            | PipelineError::Solve(SolveError::Sym(SymError::Bits { .. }))
            | PipelineError::Regret(RegretError::Sym(SymError::Bits { .. })) => Some("decision-diagram variables"),
            PipelineError::Regret(RegretError::TooLarge { .. }) => Some("regret states"),
            PipelineError::Ltl(LtlError::TooManyAtoms { .. }) => Some("formula atoms"),
            _ => None,
        }
    }
}

/// A game with its task, ready to solve.
#[derive(Clone, Debug)]
pub struct Task {
    pub name: String,
    pub game: Game,
    pub formula: String,
    pub dfa: Dfa,
    /// Hex SHA-256 of the instance source and the formula.
    pub digest: String,
}

fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

impl Task {
    pub fn new(name: &str, game: Game, formula: &str, source: &str) -> Result<Task, PipelineError> {
        let declared: BTreeSet<String> = game.propositions.iter().cloned().collect();
        let phi = parse(formula, Some(&declared))?;
        let dfa = to_dfa(&phi)?;
        Ok(Task { name: name.into(), digest: digest(&[source, formula]), game, formula: formula.into(), dfa })
    }

    /// Manipulation instance; the formula defaults to the instance goal.
    pub fn manip(
        name: &str,
        inst: &ManipInstance,
        formula: Option<&str>,
        max_states: usize,
    ) -> Result<Task, PipelineError> {
        inst.validate()?;
        let formula = formula.map_or_else(|| inst.goal_formula_text(), str::to_string);
        let game = build_game(&ManipModel::new(inst.clone()), max_states)?;
        Task::new(name, game, &formula, &inst.to_json())
    }

    pub fn strips(
        name: &str,
        inst: &StripsInstance,
        formula: Option<&str>,
        max_states: usize,
        source: &str,
    ) -> Result<Task, PipelineError> {
        let formula = formula.map_or_else(|| inst.goal_formula_text(), str::to_string);
        let game = build_game(inst, max_states)?;
        Task::new(name, game, &formula, source)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub solver: SolverKind,
    pub objective: Objective,
    /// `None` picks `ceil(1.25 * W(s0))`.
    pub budget: Option<u64>,
    pub seed: u64,
    pub max_states: usize,
    pub max_vars: Option<u32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            solver: SolverKind::SymbolicMonolithic,
            objective: Objective::Minmax,
            budget: None,
            seed: 0,
            max_states: crate::domain::DEFAULT_MAX_STATES,
            max_vars: None,
        }
    }
}

/// `ceil(1.25 * w)`.
pub fn auto_budget(w: u64) -> u64 {
    (5 * w).div_ceil(4)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub digest: String,
    pub formula: String,
    pub solver: String,
    pub objective: String,
    pub seed: u64,
    pub feasible: bool,
    /// Min-max value at the initial state.
    pub minmax: Option<Value>,
    pub regret: Option<u64>,
    pub budget: Option<u64>,
    pub budget_auto: bool,
    pub robot_states: usize,
    pub human_states: usize,
    pub dfa_states: usize,
    /// States of the explicit product (explicit solver only).
    pub product_states: Option<usize>,
    pub vars: BTreeMap<String, usize>,
    pub peak_nodes: usize,
    pub iterations: usize,
    pub regret_stats: Option<RegretStats>,
    /// Wall time per phase in milliseconds.
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    /// The report without timing fields, for determinism checks.
    pub fn untimed(&self) -> RunReport {
        RunReport { timings_ms: BTreeMap::new(), ..self.clone() }
    }
}

pub struct RunOutput {
    pub report: RunReport,
    pub controller: Option<Controller>,
}

struct Clock(BTreeMap<String, f64>, Instant);

impl Clock {
    fn new() -> Self {
        Clock(BTreeMap::new(), Instant::now())
    }
    fn lap(&mut self, phase: &str) {
        *self.0.entry(phase.into()).or_default() += self.1.elapsed().as_secs_f64() * 1e3;
        self.1 = Instant::now();
    }
}

struct MinMax {
    value: Value,
    controller: Option<Controller>,
    iterations: usize,
    product_states: Option<usize>,
    vars: BTreeMap<String, usize>,
    peak_nodes: usize,
}

fn minmax(task: &Task, cfg: &RunConfig, clock: &mut Clock) -> Result<MinMax, PipelineError> {
    match cfg.solver {
        SolverKind::Explicit => {
            let p = build_product(&task.game, &task.dfa)?;
            if p.num_states() > cfg.max_states {
                return Err(PipelineError::ProductCap { cap: cfg.max_states, seen: p.num_states() });
            }
            clock.lap("build");
            let sol = explicit_vi(&p);
            clock.lap("solve");
            let value = sol.initial_value(&p);
            let controller = if value.is_finite() {
                Some(explicit_controller(&abstract_game(&task.game), &task.dfa, &p, &sol)?)
            } else {
                None
            };
            clock.lap("extract");
            Ok(MinMax {
                value,
                controller,
                iterations: sol.iterations,
                product_states: Some(p.num_states()),
                vars: BTreeMap::new(),
                peak_nodes: 0,
            })
        }
        kind => {
            let ag = abstract_game(&task.game);
            let mut sg = SymbolicGame::encode(&ag, &task.dfa, EncodeOptions { budget: None, max_vars: cfg.max_vars })?;
            clock.lap("encode");
            let t = accepting_targets(&mut sg)?;
            let sol = symbolic_vi_weighted(&mut sg, kind.tr(), t)?;
            clock.lap("solve");
            let (v0, z0) = sg.initial();
            let value = sol.layers.value_of(&sg, v0, z0)?;
            let controller = if value.is_finite() { Some(symbolic_controller(&sg, sol.strategy)?) } else { None };
            clock.lap("extract");
            Ok(MinMax {
                value,
                controller,
                iterations: sol.iterations,
                product_states: None,
                vars: block_sizes(&sg),
                peak_nodes: sg.mgr.stats().peak_live_nodes,
            })
        }
    }
}

fn block_sizes(sg: &SymbolicGame) -> BTreeMap<String, usize> {
    let mut m: BTreeMap<String, usize> = sg.layout.block_sizes().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    m.insert("total".into(), sg.mgr.num_vars() as usize);
    m
}

fn label(c: &mut Controller, task: &Task, objective: &str) {
    c.objective = objective.into();
    c.formula = task.formula.clone();
    c.instance_digest = task.digest.clone();
}

/// Solve `task` as configured. Infeasibility is a normal outcome
/// (`report.feasible == false`, no controller).
pub fn run(task: &Task, cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    let mut clock = Clock::new();
    let mm = minmax(task, cfg, &mut clock)?;
    let mut report = RunReport {
        instance: task.name.clone(),
        digest: task.digest.clone(),
        formula: task.formula.clone(),
        solver: cfg.solver.name().into(),
        objective: match cfg.objective {
            Objective::Minmax => "minmax".into(),
            Objective::Regret => "regret".into(),
        },
        seed: cfg.seed,
        minmax: Some(mm.value),
        budget: cfg.budget,
        robot_states: task.game.robot_states.len(),
        human_states: task.game.human_states.len(),
        dfa_states: task.dfa.num_states(),
        product_states: mm.product_states,
        vars: mm.vars,
        peak_nodes: mm.peak_nodes,
        iterations: mm.iterations,
        ..RunReport::default()
    };
    let mut controller = match cfg.objective {
        Objective::Minmax => {
            report.feasible = match (mm.value, cfg.budget) {
                (Value::Finite(w), Some(b)) => w as u64 <= b,
                (Value::Finite(_), None) => true,
                (Value::Infinity, _) => false,
            };
            if report.feasible {
                mm.controller
            } else {
                None
            }
        }
        Objective::Regret => {
            let budget = match (cfg.budget, mm.value) {
                (Some(b), _) => b,
                (None, Value::Finite(w)) => {
                    report.budget_auto = true;
                    auto_budget(w as u64)
                }
                (None, Value::Infinity) => {
                    report.timings_ms = clock.0;
                    return Ok(RunOutput { report, controller: None });
                }
            };
            report.budget = Some(budget);
            let res = match cfg.solver {
                SolverKind::Explicit => explicit_regret(&task.game, &task.dfa, budget, cfg.max_states)?,
                kind => {
                    let ag = abstract_game(&task.game);
                    let opts = EncodeOptions { budget: Some(budget), max_vars: cfg.max_vars };
                    let mut sg = SymbolicGame::encode(&ag, &task.dfa, opts)?;
                    let out = symbolic_regret(&mut sg, kind.tr())?;
                    report.vars = block_sizes(&sg);
                    report.vars.insert("B".into(), out.b_vars.len());
                    report.peak_nodes = report.peak_nodes.max(out.result.stats.peak_nodes);
                    out.result
                }
            };
            clock.lap("regret");
            report.feasible = res.regret.is_some();
            report.regret = res.regret;
            report.regret_stats = Some(res.stats);
            res.controller
        }
    };
    if let Some(c) = controller.as_mut() {
        label(c, task, &report.objective);
    }
    report.timings_ms = clock.0;
    Ok(RunOutput { report, controller })
}
