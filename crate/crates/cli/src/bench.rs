//! Benchmark sweeps over generated instances.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use qsynth::domain::{gen_benchmark, BenchParams, DEFAULT_MAX_STATES};
use qsynth::pipeline::{run, Objective, PipelineError, RunConfig, RunReport, SolverKind, Task};
use qsynth::Value;

use crate::{ensure_dir, Failure, ObjectiveArg, SolverArg, EXIT_MISMATCH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Fixed object count, varying locations.
    VaryL,
    /// Fixed location count, varying objects.
    VaryO,
    /// Fixed instance, varying regret budget.
    VaryB,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    scenario: Scenario,
    /// Values of the varied parameter: `a..b` (inclusive) or a comma list.
    /// Defaults: 3..7 locations, 1..3 objects; vary-b needs it.
    #[arg(long)]
    range: Option<String>,
    /// Object count when it is not the varied axis.
    #[arg(long, default_value_t = 3)]
    objects: usize,
    /// Location count when it is not the varied axis.
    #[arg(long, default_value_t = 7)]
    locations: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SolverArg::Explicit, SolverArg::SymbolicMonolithic, SolverArg::SymbolicPartitioned])]
    solvers: Vec<SolverArg>,
    /// Instance seeds, same syntax as `--range`.
    #[arg(long, default_value = "0")]
    seeds: String,
    /// Ignored for vary-b, which always solves for regret.
    #[arg(long, value_enum, default_value = "minmax")]
    objective: ObjectiveArg,
    /// Product-state cap of the explicit solver; larger instances get a
    /// skip record.
    #[arg(long, default_value_t = 200_000)]
    explicit_cap: usize,
    #[arg(long)]
    max_vars: Option<u32>,
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

#[derive(Serialize)]
struct Record {
    scenario: Scenario,
    param: u64,
    locations: usize,
    objects: usize,
    seed: u64,
    solver: &'static str,
    /// ok, infeasible, skipped or error
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<RunReport>,
}

fn parse_range(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().with_context(|| format!("bad range `{s}`"))?;
        let b: u64 = b.trim().parse().with_context(|| format!("bad range `{s}`"))?;
        if a > b {
            return Err(anyhow!("empty range `{s}`"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().with_context(|| format!("bad value `{x}`"))).collect()
}

/// Outcome used for the cross-solver check.
fn verdict(r: &Record) -> Option<(Option<Value>, Option<u64>)> {
    let rep = r.report.as_ref()?;
    Some((rep.minmax, rep.regret))
}

const PLOT_SCRIPT: &str = r#"# usage: python3 plot.py results.csv
import csv, sys
from collections import defaultdict
import matplotlib.pyplot as plt

rows = [r for r in csv.DictReader(open(sys.argv[1] if len(sys.argv) > 1 else "results.csv")) if r["status"] in ("ok", "infeasible")]
series = defaultdict(list)
for r in rows:
    series[r["solver"]].append((int(r["param"]), float(r["total_ms"])))
fig, ax = plt.subplots(figsize=(5, 3.5))
for solver, pts in sorted(series.items()):
    by = defaultdict(list)
    for x, y in pts:
        by[x].append(y)
    xs = sorted(by)
    ax.plot(xs, [sum(by[x]) / len(by[x]) for x in xs], marker="o", label=solver)
ax.set_yscale("log")
ax.set_xlabel(rows[0]["scenario"] if rows else "param")
ax.set_ylabel("time (ms)")
ax.legend()
fig.tight_layout()
fig.savefig("bench.png", dpi=150)
"#;

pub fn bench(a: BenchArgs) -> Result<u8, Failure> {
    let range = match (&a.range, a.scenario) {
        (Some(r), _) => parse_range(r)?,
        (None, Scenario::VaryL) => (3..=7).collect(),
        (None, Scenario::VaryO) => (1..=3).collect(),
        (None, Scenario::VaryB) => return Err(anyhow!("vary-b needs --range with the budgets").into()),
    };
    let seeds = parse_range(&a.seeds)?;
    ensure_dir(&a.out)?;
    let mut jsonl = BufWriter::new(File::create(a.out.join("results.jsonl")).context("creating results.jsonl")?);
    let mut csv = BufWriter::new(File::create(a.out.join("results.csv")).context("creating results.csv")?);
    writeln!(csv, "scenario,param,locations,objects,seed,solver,status,minmax,regret,budget,total_ms,peak_nodes")
        .map_err(anyhow::Error::from)?;
    fs::write(a.out.join("plot.py"), PLOT_SCRIPT).context("writing plot.py")?;

    let objective = if a.scenario == Scenario::VaryB { Objective::Regret } else { a.objective.into() };
    let mut mismatches = Vec::new();
    for &seed in &seeds {
        for &x in &range {
            let (locations, objects, budget) = match a.scenario {
                Scenario::VaryL => (x as usize, a.objects, None),
                Scenario::VaryO => (a.locations, x as usize, None),
                Scenario::VaryB => (a.locations, a.objects, Some(x)),
            };
            let mut records = Vec::new();
            let base = |solver: &'static str| Record {
                scenario: a.scenario,
                param: x,
                locations,
                objects,
                seed,
                solver,
                status: "error",
                reason: None,
                report: None,
            };
            let task = if locations < 2 || objects == 0 || objects > locations {
                Err(anyhow!("need 2 <= locations and 1 <= objects <= locations"))
            } else {
                let inst = gen_benchmark(&BenchParams::new(locations, objects, seed));
                Task::manip(&format!("bench-l{locations}-o{objects}-s{seed}"), &inst, None, DEFAULT_MAX_STATES)
                    .map_err(anyhow::Error::from)
            };
            for &s in &a.solvers {
                let solver: SolverKind = s.into();
                let mut rec = base(solver.name());
                match &task {
                    Err(e) => rec.reason = Some(e.to_string()),
                    Ok(task) => {
                        let cap = if solver == SolverKind::Explicit { a.explicit_cap } else { DEFAULT_MAX_STATES };
                        let cfg = RunConfig { solver, objective, budget, seed, max_states: cap, max_vars: a.max_vars };
                        match run(task, &cfg) {
                            Ok(out) => {
                                rec.status = if out.report.feasible { "ok" } else { "infeasible" };
                                rec.report = Some(out.report);
                            }
                            Err(e) => {
                                let skip = solver == SolverKind::Explicit
                                    && matches!(e, PipelineError::ProductCap { .. } | PipelineError::Regret(_))
                                    && e.cap_dimension().is_some();
                                rec.status = if skip { "skipped" } else { "error" };
                                rec.reason = Some(e.to_string());
                            }
                        }
                    }
                }
                records.push(rec);
            }
            let verdicts: Vec<_> = records.iter().filter_map(|r| verdict(r).map(|v| (r.solver, v))).collect();
            if verdicts.windows(2).any(|w| w[0].1 != w[1].1) {
                mismatches.push(format!("{:?} param {x} seed {seed}: {verdicts:?}", a.scenario));
            }
            for r in &records {
                let line = serde_json::to_string(r).map_err(anyhow::Error::from)?;
                writeln!(jsonl, "{line}").map_err(anyhow::Error::from)?;
                let rep = r.report.as_ref();
                let total: f64 = rep.map_or(0.0, |p| p.timings_ms.values().sum());
                writeln!(
                    csv,
                    "{:?},{x},{locations},{objects},{seed},{},{},{},{},{},{total:.3},{}",
                    a.scenario,
                    r.solver,
                    r.status,
                    rep.and_then(|p| p.minmax).map_or_else(String::new, |v| v.to_string()),
                    rep.and_then(|p| p.regret).map_or_else(String::new, |v| v.to_string()),
                    rep.and_then(|p| p.budget).map_or_else(String::new, |v| v.to_string()),
                    rep.map_or(0, |p| p.peak_nodes),
                )
                .map_err(anyhow::Error::from)?;
                eprintln!("{:?} {x} seed {seed} {}: {}", a.scenario, r.solver, r.status);
            }
            jsonl.flush().map_err(anyhow::Error::from)?;
        }
    }
    csv.flush().map_err(anyhow::Error::from)?;
    let summary: BTreeMap<&str, usize> = BTreeMap::from([("mismatches", mismatches.len())]);
    if mismatches.is_empty() {
        println!("{}", serde_json::to_string(&summary).map_err(anyhow::Error::from)?);
        Ok(0)
    } else {
        for m in &mismatches {
            eprintln!("cross-solver mismatch: {m}");
        }
        Ok(EXIT_MISMATCH)
    }
}
