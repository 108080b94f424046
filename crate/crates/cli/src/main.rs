//! `tadpole`: run, grade and sweep multi-agent exploration strategies.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tadpole_core::engine::ChoiceStream;
use tadpole_core::harness::{
    cmd_lowerbound, cmd_run, cmd_sweep, cmd_tables, tables_csv, CellStatus, CostReport, Family, InstanceClass,
    InstanceParams, LowerBoundParams, LowerBoundReport, Model, SweepConfig, SweepSummary, TablesConfig,
};
use tadpole_core::offline::{opt_value, opt_with_method, OptMethod, BRUTE_CAP_ENV};
use tadpole_core::strategies::PolicyId;
use tadpole_core::{Rational, WeightedGraph};

#[derive(Parser)]
#[command(name = "tadpole", version, about = "Multi-agent online exploration of cycles and tadpole graphs")]
struct Cli {
    /// Write CSV here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Node cap for the brute-force optimum (overrides the environment)
    #[arg(long, global = true)]
    brute_cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one strategy on a graph file and grade it
    Run(RunArgs),
    /// Offline optimum of a graph file
    Opt(OptArgs),
    /// Grade a strategy over seeded random instances
    Sweep(SweepArgs),
    /// Run a strategy against a lower-bound construction
    Lowerbound(LowerBoundArgs),
    /// Re-check every verifiable bound of the result tables
    Tables(TablesArgs),
}

#[derive(Args)]
struct GraphArg {
    /// Graph file (`cycle`, `tail`, `start` lines); `-` reads stdin
    #[arg(long, conflicts_with = "inline")]
    graph: Option<PathBuf>,
    /// Graph given inline, lines separated by `;`
    #[arg(long)]
    inline: Option<String>,
    /// Override the start node
    #[arg(long)]
    start: Option<String>,
}

impl GraphArg {
    fn load(&self) -> Result<(WeightedGraph, String)> {
        let (text, name) = match (&self.graph, &self.inline) {
            (Some(p), _) if p == Path::new("-") => (std::io::read_to_string(std::io::stdin())?, "stdin".to_string()),
            (Some(p), _) => (
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
                p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            ),
            (None, Some(line)) => (line.clone(), "inline".to_string()),
            (None, None) => bail!("give --graph FILE or --inline TEXT"),
        };
        let mut g = WeightedGraph::parse(&text).context("parsing graph")?;
        if let Some(s) = &self.start {
            g = g.with_start(s)?;
        }
        Ok((g, name))
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long)]
    strategy: PolicyId,
    /// Defaults to the strategy's usual team size
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long, default_value_t = 0, conflicts_with = "choices")]
    seed: u64,
    /// Scripted random choices, e.g. `0,1`
    #[arg(long, value_delimiter = ',')]
    choices: Option<Vec<usize>>,
    #[arg(long, default_value = "time")]
    model: Model,
    /// Also write the event trace as CSV
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct OptArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long, default_value_t = 2)]
    agents: usize,
    /// closed, brute or structured; cheapest applicable when omitted
    #[arg(long)]
    method: Option<OptMethod>,
    /// Print the optimal walks
    #[arg(long)]
    plan: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    class: InstanceClass,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    strategy: PolicyId,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long, default_value = "time")]
    model: Model,
    /// Run from every node of each instance
    #[arg(long)]
    all_starts: bool,
    #[arg(long, default_value_t = 3)]
    min_cycle: usize,
    #[arg(long, default_value_t = 10)]
    max_cycle: usize,
    #[arg(long, default_value_t = 5)]
    max_tail: usize,
    #[arg(long, default_value_t = 20)]
    max_weight: i128,
    #[arg(long, default_value_t = 5)]
    max_denominator: i128,
    /// Tails per n-tadpole
    #[arg(long, default_value_t = 2)]
    tails: usize,
    /// Emit one row per graded run instead of the summary
    #[arg(long)]
    rows: bool,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    epsilon: Rational,
    #[arg(long = "J")]
    j: Option<usize>,
    #[arg(long, default_value_t = 2)]
    tails: usize,
    /// Edges per unit path of the tadpole gadget
    #[arg(long, default_value_t = 10)]
    granularity: usize,
    #[arg(long)]
    strategy: PolicyId,
    #[arg(long)]
    agents: Option<usize>,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    cycle_trials: usize,
    #[arg(long, default_value_t = 300)]
    tadpole_trials: usize,
    #[arg(long, default_value_t = 100)]
    ntadpole_trials: usize,
    #[arg(long, default_value_t = 2)]
    tails: usize,
    #[arg(long = "J", default_value_t = 100)]
    j: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(cap) = cli.brute_cap {
        // Single-threaded at this point; the library reads the cap from the environment.
        std::env::set_var(BRUTE_CAP_ENV, cap.to_string());
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every checked assertion held.
fn execute(cli: &Cli) -> Result<bool> {
    let mut out = String::new();
    let ok = match &cli.command {
        Command::Run(a) => run(a, &mut out)?,
        Command::Opt(a) => opt(a, &mut out)?,
        Command::Sweep(a) => sweep(a, &mut out)?,
        Command::Lowerbound(a) => lowerbound(a, &mut out)?,
        Command::Tables(a) => tables(a, &mut out)?,
    };
    match &cli.out {
        Some(path) => fs::write(path, out).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(out.as_bytes())?,
    }
    Ok(ok)
}

fn run(a: &RunArgs, out: &mut String) -> Result<bool> {
    let (g, name) = a.graph.load()?;
    let k = a.agents.unwrap_or(a.strategy.default_agents());
    let (mut choices, seed) = match &a.choices {
        Some(script) => (ChoiceStream::scripted(script.clone()), None),
        None => (ChoiceStream::seeded(a.seed), Some(a.seed)),
    };
    let (report, graded) = cmd_run(&g, &name, a.strategy, k, &mut choices, seed, a.model)?;
    if let Some(path) = &a.trace {
        fs::write(path, graded.exploration.trace.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    out.push_str(CostReport::CSV_HEADER);
    out.push('\n');
    out.push_str(&report.to_csv_row());
    out.push('\n');
    if !report.satisfied {
        eprintln!("bound violated on: {}", g.to_line());
    }
    Ok(report.satisfied)
}

fn opt(a: &OptArgs, out: &mut String) -> Result<bool> {
    let (g, _) = a.graph.load()?;
    let (value, method, plan) = match a.method {
        Some(m) => {
            let plan = opt_with_method(&g, a.agents, m)?;
            (plan.makespan, m, Some(plan))
        }
        None if a.plan => {
            let (value, method) = opt_value(&g, a.agents)?;
            let plan = match method {
                OptMethod::Brute => opt_with_method(&g, a.agents, OptMethod::Brute)?,
                _ => opt_with_method(&g, a.agents, OptMethod::Structured)?,
            };
            (value, method, Some(plan))
        }
        None => {
            let (value, method) = opt_value(&g, a.agents)?;
            (value, method, None)
        }
    };
    out.push_str("agents,method,makespan\n");
    out.push_str(&format!("{},{},{}\n", a.agents, method, value));
    if a.plan {
        let plan = plan.expect("plan requested");
        out.push_str("agent,length,walk\n");
        for (i, (walk, len)) in plan.walk_labels(&g).iter().zip(&plan.lengths).enumerate() {
            out.push_str(&format!("{},{},{}\n", i, len, walk.join(" ")));
        }
    }
    Ok(true)
}

fn sweep(a: &SweepArgs, out: &mut String) -> Result<bool> {
    let config = SweepConfig {
        class: a.class,
        params: InstanceParams {
            min_cycle: a.min_cycle,
            max_cycle: a.max_cycle,
            max_tail_edges: a.max_tail,
            max_weight: a.max_weight,
            max_denominator: a.max_denominator,
            tails: a.tails,
        },
        trials: a.trials,
        seed: a.seed,
        policy: a.strategy,
        k: a.agents.unwrap_or(a.strategy.default_agents()),
        model: a.model,
        all_starts: a.all_starts,
    };
    let summary = cmd_sweep(&config)?;
    if a.rows {
        out.push_str(CostReport::CSV_HEADER);
        out.push('\n');
        for r in &summary.reports {
            out.push_str(&r.to_csv_row());
            out.push('\n');
        }
    } else {
        out.push_str(SweepSummary::CSV_HEADER);
        out.push('\n');
        out.push_str(&summary.to_csv_row());
        out.push('\n');
    }
    for r in summary.reports.iter().filter(|r| !r.satisfied) {
        eprintln!("bound violated: ratio {} on {}", r.ratio, r.instance);
    }
    Ok(summary.satisfied())
}

fn lowerbound(a: &LowerBoundArgs, out: &mut String) -> Result<bool> {
    let mut params = LowerBoundParams::new(a.family, a.epsilon, a.strategy);
    params.j = a.j;
    params.tails = a.tails;
    params.granularity = a.granularity;
    params.k = a.agents;
    let report = cmd_lowerbound(&params)?;
    out.push_str(LowerBoundReport::CSV_HEADER);
    out.push('\n');
    out.push_str(&report.to_csv_row());
    out.push('\n');
    if !report.holds() {
        eprintln!("expected ratio not realized on: {}", report.graph.to_line());
    }
    Ok(report.holds())
}

fn tables(a: &TablesArgs, out: &mut String) -> Result<bool> {
    let cells = cmd_tables(&TablesConfig {
        seed: a.seed,
        cycle_trials: a.cycle_trials,
        tadpole_trials: a.tadpole_trials,
        ntadpole_trials: a.ntadpole_trials,
        tails: a.tails,
        j: a.j,
    })?;
    out.push_str(&tables_csv(&cells));
    let failed: Vec<_> = cells.iter().filter(|c| c.status == CellStatus::Fail).collect();
    for c in &failed {
        eprintln!(
            "{} / {} / {}: claimed {}, realized {} on {}",
            c.table,
            c.row,
            c.column,
            c.claimed,
            c.realized,
            c.witness.as_deref().unwrap_or("-")
        );
    }
    Ok(failed.is_empty())
}
