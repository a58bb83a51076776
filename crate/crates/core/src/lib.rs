//! Multi-objective scheduling of EV charging and discharging at a charging
//! station with load-dependent prices.

pub mod baselines;
pub mod encoding;
pub mod error;
pub mod metrics;
pub mod model;
pub mod moea;
pub mod objectives;
pub mod scenarios;

pub use baselines::{
    baseline_avg, baseline_fcfs, baseline_soga, run_baseline, Baseline, BaselineResult,
};
pub use encoding::{decode, encode, Genome, GenomeLayout, Schedule, SlotDecision, SlotState};
pub use error::{Error, Result};
pub use metrics::{hypervolume, select_extreme, Direction, Objective};
pub use model::{BatteryParams, EvRequest, Scenario, TariffParams, TimeGrid};
pub use moea::{evolve, evolve_with, GenerationStats, MoeaParams, ParetoArchive};
pub use objectives::{evaluate, evaluate_schedule, EvaluatedSolution, ObjectiveVector};
pub use scenarios::{build_problem_set, scenario_rng, BaseLoadSource, BuildOptions};
