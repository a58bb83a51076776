//! Command-line front-end: builds scenarios, runs the optimizer and the
//! baselines, and writes CSV/JSON results.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use moevcs::metrics::objective_ranges;
use moevcs::scenarios::load_base_load_csv;
use moevcs::{
    build_problem_set, decode, evolve_with, run_baseline, scenario_rng, select_extreme,
    BaseLoadSource, Baseline, BuildOptions, Direction, GenomeLayout, MoeaParams, Objective,
    Scenario,
};

pub mod export;

use export::{LabeledSolution, Summary};

#[derive(Debug, Parser)]
#[command(
    name = "moevcs",
    version,
    about = "Multi-objective EV charging station scheduler"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize a scenario and export the front, schedules and summary.
    Run(RunArgs),
    /// Export or check scenario files.
    Scenario {
        #[command(subcommand)]
        action: ScenarioCommand,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in problem set.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4), required_unless_present = "scenario", conflicts_with = "scenario")]
    pub set: Option<u8>,
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Population size (even, at least 4).
    #[arg(long, default_value_t = MoeaParams::default().population_size)]
    pub pop: usize,
    /// Number of generations, counting the initial population.
    #[arg(long, default_value_t = MoeaParams::default().max_generations)]
    pub gens: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated baselines to run, e.g. `b1,b2,b5`.
    #[arg(long, value_delimiter = ',', value_parser = parse_baseline)]
    pub baselines: Vec<Baseline>,
    /// Worker threads for evaluation; all cores by default.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Print per-generation progress to stderr.
    #[arg(long)]
    pub progress: bool,
    /// Base load table (`slot,kw`) replacing the scenario's.
    #[arg(long)]
    pub base_load: Option<PathBuf>,
    /// Skip the demand repair of offspring.
    #[arg(long)]
    pub no_repair: bool,
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCommand {
    /// Write a built-in problem set as JSON.
    Export {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        set: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        base_load: Option<PathBuf>,
    },
    /// Check a scenario file and print its report.
    Validate { file: PathBuf },
}

fn parse_baseline(s: &str) -> Result<Baseline, String> {
    Baseline::parse(s).ok_or_else(|| format!("unknown baseline `{s}` (expected b1..b5)"))
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            let (Failure::Usage(e) | Failure::Runtime(e)) = &f;
            eprintln!("error: {e:#}");
            f.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Scenario { action } => cmd_scenario(action),
    }
}

fn build_options(base_load: Option<&Path>, n_slots: usize) -> anyhow::Result<BuildOptions> {
    let mut options = BuildOptions::default();
    if let Some(path) = base_load {
        let v = load_base_load_csv(path, n_slots)
            .with_context(|| format!("reading {}", path.display()))?;
        options.base_load = BaseLoadSource::Profile(v);
    }
    Ok(options)
}

fn load_scenario(args: &RunArgs) -> anyhow::Result<Scenario> {
    if let Some(set) = args.set {
        let options = build_options(args.base_load.as_deref(), moevcs::scenarios::N_SLOTS)?;
        return Ok(build_problem_set(
            set,
            &mut scenario_rng(args.seed),
            &options,
        )?);
    }
    let path = args
        .scenario
        .as_ref()
        .expect("clap enforces --set or --scenario");
    let mut s = Scenario::load(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(bl) = &args.base_load {
        s.base_load = load_base_load_csv(bl, s.grid.n_slots)
            .with_context(|| format!("reading {}", bl.display()))?;
    }
    Ok(s.validated()?)
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let params = MoeaParams {
        population_size: args.pop,
        max_generations: args.gens,
        seed: args.seed,
        repair: !args.no_repair,
        ..MoeaParams::default()
    };
    params.validate().map_err(|e| Failure::Usage(e.into()))?;
    if args.threads == Some(0) {
        return Err(Failure::Usage(anyhow!("--threads must be at least 1")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .context("starting worker threads")?;
    pool.install(|| run_in_pool(args, &params))
        .map_err(Failure::Runtime)
}

fn run_in_pool(args: &RunArgs, params: &MoeaParams) -> anyhow::Result<()> {
    let started = Instant::now();
    let scenario = load_scenario(args)?;
    let layout = GenomeLayout::of(&scenario)?;
    log::info!(
        "scenario {}: {} EVs, genome dimension {}",
        scenario.name,
        scenario.requests.len(),
        layout.total_dim()
    );

    if args.progress {
        eprintln!("gen,n_feasible,best_f1,best_f2,best_f3,hypervolume");
    }
    let archive = evolve_with(&scenario, params, |s| {
        if args.progress {
            eprintln!("{}", s.progress_line());
        }
    })?;
    if !archive.is_feasible() {
        log::warn!("the final front contains infeasible solutions");
    }

    let feasible: Vec<_> = archive
        .members
        .iter()
        .filter(|m| m.is_feasible())
        .cloned()
        .collect();
    let pool = if feasible.is_empty() {
        &archive.members
    } else {
        &feasible
    };
    let mut solutions = Vec::new();
    for (label, objective) in [
        ("MOMinObj13", Objective::UserCost),
        ("MOMinObj2", Objective::EvcsCost),
    ] {
        let best = select_extreme(pool, objective, Direction::Min).expect("front is non-empty");
        solutions.push(LabeledSolution {
            label: label.to_string(),
            schedule: decode(&best.genome, &layout)?,
            objectives: best.objectives,
            cv: best.cv,
        });
    }
    for &b in &args.baselines {
        let r = run_baseline(&scenario, b, params).with_context(|| format!("baseline {b}"))?;
        if !r.is_feasible() {
            log::warn!("baseline {b} is infeasible (cv = {})", r.cv);
        }
        solutions.push(LabeledSolution {
            label: b.label().to_string(),
            schedule: r.schedule,
            objectives: r.objectives,
            cv: r.cv,
        });
    }

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let write = |name: &str, text: String| -> anyhow::Result<()> {
        let path = args.out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    write(
        "pareto_front.csv",
        export::pareto_front_csv(&archive.members),
    )?;
    for sol in &solutions {
        write(
            &format!("schedule_{}.csv", sol.label),
            export::schedule_csv(&sol.schedule),
        )?;
        write(
            &format!("load_profile_{}.csv", sol.label),
            export::load_profile_csv(&sol.schedule, &scenario),
        )?;
        write(
            &format!("tou_tariff_{}.csv", sol.label),
            export::tariff_csv(&sol.schedule, &scenario),
        )?;
    }

    let objs = archive.objectives();
    let summary = Summary {
        scenario: export::ScenarioInfo {
            name: scenario.name.clone(),
            n_evs: scenario.requests.len(),
            n_slots: scenario.grid.n_slots,
            genome_dim: layout.total_dim(),
        },
        params: params.clone(),
        feasible: archive.is_feasible(),
        front_size: archive.members.len(),
        evaluations: archive.evaluations,
        ranges: objective_ranges(&objs).map(export::Ranges::from),
        solutions: solutions
            .iter()
            .map(export::SolutionSummary::from)
            .collect(),
        reference_point: archive.reference_point.map(|r| r.as_array()),
        hypervolume_history: archive.history.iter().map(|s| s.hypervolume).collect(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    write(
        "summary.json",
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(())
}

fn cmd_scenario(action: &ScenarioCommand) -> Result<(), Failure> {
    match action {
        ScenarioCommand::Export {
            set,
            seed,
            out,
            base_load,
        } => {
            let options = build_options(base_load.as_deref(), moevcs::scenarios::N_SLOTS)?;
            let s = build_problem_set(*set, &mut scenario_rng(*seed), &options)
                .map_err(anyhow::Error::from)?;
            s.save(out)
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
        ScenarioCommand::Validate { file } => {
            let s = Scenario::load(file).with_context(|| format!("reading {}", file.display()))?;
            let report = s.validate();
            println!("valid: {}", report.is_valid());
            println!("evs: {}", s.requests.len());
            println!("slots: {}", s.grid.n_slots);
            println!("genome_dim: {}", report.total_dim);
            println!(
                "occupancy: {}",
                report
                    .occupancy
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            );
            for v in &report.violations {
                println!("violation: {v}");
            }
            if !report.is_valid() {
                return Err(anyhow!(
                    "{} violation(s) in {}",
                    report.violations.len(),
                    file.display()
                )
                .into());
            }
            Ok(())
        }
    }
}
