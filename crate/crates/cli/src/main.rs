use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qsynth::domain::{gen_benchmark, load_pddl, two_region, BenchParams, ManipInstance, DEFAULT_MAX_STATES};
use qsynth::ltlf::{parse, to_dfa};
use qsynth::pipeline::{run, Objective, PipelineError, RunConfig, SolverKind, Task};
use qsynth::solvers::{rollout, Controller, HumanPolicy, Transcript};

mod bench;

/// Exit codes other than 0 and 1.
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(name = "qsynth", version, about = "Min-max and regret strategy synthesis for human-robot manipulation games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance and write strategy.json and report.json.
    Synth(SynthArgs),
    /// Translate an LTLf formula to a DFA (DOT and JSON).
    Translate(TranslateArgs),
    /// Run a benchmark sweep.
    Bench(bench::BenchArgs),
    /// Execute a strategy against a human policy.
    Rollout(RolloutArgs),
    /// Write a generated instance.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Explicit,
    SymbolicMonolithic,
    SymbolicPartitioned,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Explicit => SolverKind::Explicit,
            SolverArg::SymbolicMonolithic => SolverKind::SymbolicMonolithic,
            SolverArg::SymbolicPartitioned => SolverKind::SymbolicPartitioned,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Minmax,
    Regret,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Minmax => Objective::Minmax,
            ObjectiveArg::Regret => Objective::Regret,
        }
    }
}

#[derive(Args, Clone)]
struct Source {
    /// Instance in the native JSON format.
    #[arg(long, conflicts_with_all = ["pddl_domain", "pddl_problem", "caps"])]
    instance: Option<PathBuf>,
    #[arg(long, requires_all = ["pddl_problem", "caps"])]
    pddl_domain: Option<PathBuf>,
    #[arg(long, requires = "pddl_domain")]
    pddl_problem: Option<PathBuf>,
    /// Sidecar naming the human actions and costs of a PDDL instance.
    #[arg(long, requires = "pddl_domain")]
    caps: Option<PathBuf>,
    /// LTLf task, or `@path` to read it from a file. Defaults to the
    /// instance goal.
    #[arg(long)]
    formula: Option<String>,
    /// Cap on explicitly enumerated states.
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "symbolic-monolithic")]
    solver: SolverArg,
    #[arg(long, value_enum, default_value = "minmax")]
    objective: ObjectiveArg,
    /// Budget; regret runs default to ceil(1.25 * min-max value).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Cap on decision-diagram variables.
    #[arg(long)]
    max_vars: Option<u32>,
}

#[derive(Args)]
struct TranslateArgs {
    /// LTLf formula, or `@path`.
    #[arg(long)]
    formula: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RolloutArgs {
    /// strategy.json written by `synth`.
    #[arg(long)]
    strategy: PathBuf,
    /// adversarial, cooperative, random:SEED or script:PATH.
    #[arg(long, default_value = "adversarial")]
    human: String,
    #[arg(short = 'n', long = "count", default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    /// Check that the strategy was computed for this instance.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 7)]
    locations: usize,
    #[arg(long, default_value_t = 3)]
    objects: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    cost_near: u32,
    #[arg(long, default_value_t = 3)]
    cost_far: u32,
    #[arg(long, default_value_t = 0.3)]
    human_fraction: f64,
    /// Emit a member of the two-region family instead; its task formula is
    /// written to `--formula-out` or printed.
    #[arg(long)]
    two_region: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    formula_out: Option<PathBuf>,
}

fn read_formula(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => Ok(fs::read_to_string(path).with_context(|| format!("reading {path}"))?.trim().to_string()),
        None => Ok(arg.to_string()),
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

pub(crate) enum Failure {
    Pipeline(PipelineError),
    Other(anyhow::Error),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::Pipeline(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn load_task(src: &Source) -> Result<Task, Failure> {
    let formula = src.formula.as_deref().map(read_formula).transpose()?;
    if let Some(path) = &src.instance {
        let inst = ManipInstance::load_json(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        return Ok(Task::manip(&stem(path), &inst, formula.as_deref(), src.max_states)?);
    }
    let (Some(d), Some(p), Some(c)) = (&src.pddl_domain, &src.pddl_problem, &src.caps) else {
        return Err(anyhow::anyhow!("give --instance or --pddl-domain/--pddl-problem/--caps").into());
    };
    let strips = load_pddl(d, p, c).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut source = String::new();
    for f in [d, p, c] {
        source.push_str(&fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?);
    }
    Ok(Task::strips(&stem(p), &strips, formula.as_deref(), src.max_states, &source)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn synth(a: SynthArgs) -> Result<u8, Failure> {
    let task = load_task(&a.source)?;
    let cfg = RunConfig {
        solver: a.solver.into(),
        objective: a.objective.into(),
        budget: a.budget,
        seed: a.seed,
        max_states: a.source.max_states,
        max_vars: a.max_vars,
    };
    let out = run(&task, &cfg)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut line = serde_json::to_string(&out.report).map_err(anyhow::Error::from)?;
    line.push('\n');
    fs::write(a.out.join("report.json"), line).context("writing report.json")?;
    let strategy = a.out.join("strategy.json");
    match &out.controller {
        Some(c) => write_json(&strategy, c)?,
        None => {
            // a stale strategy from an earlier run must not survive
            let _ = fs::remove_file(&strategy);
        }
    }
    let r = &out.report;
    if !r.feasible {
        println!("infeasible: {} ({}, {})", r.instance, r.solver, r.objective);
        return Ok(EXIT_INFEASIBLE);
    }
    let value = r.minmax.map_or_else(|| "-".into(), |v| v.to_string());
    match r.regret {
        Some(reg) => println!("{}: regret {reg} at budget {} (min-max {value})", r.instance, r.budget.unwrap_or(0)),
        None => println!("{}: min-max value {value}", r.instance),
    }
    Ok(0)
}

fn translate(a: TranslateArgs) -> Result<u8, Failure> {
    let text = read_formula(&a.formula)?;
    let phi = parse(&text, None).map_err(|e| anyhow::anyhow!("{e}"))?;
    let dfa = to_dfa(&phi).map_err(|e| anyhow::anyhow!("{e}"))?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    fs::write(a.out.join("dfa.dot"), dfa.to_dot()).context("writing dfa.dot")?;
    write_json(&a.out.join("dfa.json"), &dfa)?;
    println!("{} states, {} atoms", dfa.num_states(), dfa.atoms.len());
    Ok(0)
}

#[derive(Serialize)]
struct RolloutSummary {
    n: usize,
    accepted: usize,
    min_payoff: Option<u64>,
    max_payoff: Option<u64>,
    mean_payoff: Option<f64>,
}

#[derive(Serialize)]
struct RolloutFile {
    policy: String,
    transcripts: Vec<Transcript>,
    summary: RolloutSummary,
}

fn rollout_cmd(a: RolloutArgs) -> Result<u8, Failure> {
    let text = fs::read_to_string(&a.strategy).with_context(|| format!("reading {}", a.strategy.display()))?;
    let c: Controller = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.strategy.display()))?;
    if let Some(path) = &a.instance {
        let src = Source {
            instance: Some(path.clone()),
            pddl_domain: None,
            pddl_problem: None,
            caps: None,
            formula: Some(c.formula.clone()),
            max_states: DEFAULT_MAX_STATES,
        };
        let matches = load_task(&src).is_ok_and(|task| task.digest == c.instance_digest);
        if !matches {
            return Err(anyhow::anyhow!("strategy does not match instance {}", path.display()).into());
        }
    }
    let policy: HumanPolicy = a.human.parse().map_err(|e: String| anyhow::anyhow!(e))?;
    let mut transcripts = Vec::with_capacity(a.n);
    for i in 0..a.n {
        let p = match &policy {
            HumanPolicy::Random(seed) => HumanPolicy::Random(seed.wrapping_add(i as u64)),
            p => p.clone(),
        };
        transcripts.push(rollout(&c, &p, a.max_steps).map_err(|e| anyhow::anyhow!("{e}"))?);
    }
    let payoffs: Vec<u64> = transcripts.iter().map(|t| t.payoff).collect();
    let summary = RolloutSummary {
        n: a.n,
        accepted: transcripts.iter().filter(|t| t.accepted).count(),
        min_payoff: payoffs.iter().min().copied(),
        max_payoff: payoffs.iter().max().copied(),
        mean_payoff: (!payoffs.is_empty()).then(|| payoffs.iter().sum::<u64>() as f64 / payoffs.len() as f64),
    };
    let file = RolloutFile { policy: a.human, transcripts, summary };
    match &a.out {
        Some(path) => write_json(path, &file)?,
        None => println!("{}", serde_json::to_string_pretty(&file).map_err(anyhow::Error::from)?),
    }
    Ok(0)
}

fn gen(a: GenArgs) -> Result<u8, Failure> {
    if a.two_region {
        let (inst, formula) = two_region(a.seed);
        fs::write(&a.out, inst.to_json()).with_context(|| format!("writing {}", a.out.display()))?;
        match &a.formula_out {
            Some(p) => fs::write(p, format!("{formula}\n")).with_context(|| format!("writing {}", p.display()))?,
            None => println!("{formula}"),
        }
        return Ok(0);
    }
    if a.locations < 2 || a.objects == 0 || a.objects > a.locations {
        return Err(anyhow::anyhow!("need 2 <= locations and 1 <= objects <= locations").into());
    }
    let p = BenchParams {
        cost_near: a.cost_near,
        cost_far: a.cost_far,
        human_fraction: a.human_fraction,
        ..BenchParams::new(a.locations, a.objects, a.seed)
    };
    let inst = gen_benchmark(&p);
    fs::write(&a.out, inst.to_json()).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Synth(a) => synth(a),
        Cmd::Translate(a) => translate(a),
        Cmd::Bench(a) => bench::bench(a),
        Cmd::Rollout(a) => rollout_cmd(a),
        Cmd::Gen(a) => gen(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Pipeline(e)) => match e.cap_dimension() {
            Some(dim) => {
                eprintln!("error: cap exceeded ({dim}): {e}");
                ExitCode::from(EXIT_CAP)
            }
            None => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn ensure_dir(p: &Path) -> Result<()> {
    if p.exists() && !p.is_dir() {
        bail!("{} is not a directory", p.display());
    }
    fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))
}
