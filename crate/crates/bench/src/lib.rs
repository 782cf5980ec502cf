//! Shared fixtures for the criterion benches.

use qsynth::domain::{abstract_game, gen_benchmark, BenchParams, DEFAULT_MAX_STATES};
use qsynth::pipeline::Task;
use qsynth::symgame::{EncodeOptions, SymbolicGame};

/// Default-goal task on the benchmark instance with `l` locations and `o`
/// objects.
pub fn bench_task(l: usize, o: usize, seed: u64) -> Task {
    let inst = gen_benchmark(&BenchParams::new(l, o, seed));
    Task::manip(&format!("bench-l{l}-o{o}-s{seed}"), &inst, None, DEFAULT_MAX_STATES).expect("benchmark instance")
}

pub fn encode(task: &Task, budget: Option<u64>) -> SymbolicGame {
    SymbolicGame::encode(&abstract_game(&task.game), &task.dfa, EncodeOptions { budget, max_vars: None })
        .expect("encoding fits the default variable limit")
}
