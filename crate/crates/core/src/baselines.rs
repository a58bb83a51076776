//! Comparison strategies: average-rate charging (B1), first-come-first-served
//! (B2) and single-objective GAs on network impact (B3), station cost (B4)
//! and user cost (B5).

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{decode, EvSchedule, Schedule, SlotDecision, SlotState};
use crate::error::{Error, Result};
use crate::metrics::Objective;
use crate::model::Scenario;
use crate::moea::{MoeaParams, Problem};
use crate::objectives::{evaluate_schedule, EvaluatedSolution, ObjectiveVector, DEFAULT_EPSILON};

/// Remaining demand below this is treated as met, kWh.
const DEMAND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Baseline {
    B1,
    B2,
    B3,
    B4,
    B5,
}

impl Baseline {
    pub const ALL: [Baseline; 5] = [
        Baseline::B1,
        Baseline::B2,
        Baseline::B3,
        Baseline::B4,
        Baseline::B5,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Baseline::B1 => "B1",
            Baseline::B2 => "B2",
            Baseline::B3 => "B3",
            Baseline::B4 => "B4",
            Baseline::B5 => "B5",
        }
    }

    /// Objective optimized by the single-objective baselines.
    pub fn objective(self) -> Option<Objective> {
        match self {
            Baseline::B3 => Some(Objective::NetworkImpact),
            Baseline::B4 => Some(Objective::EvcsCost),
            Baseline::B5 => Some(Objective::UserCost),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.label().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub label: Baseline,
    pub schedule: Schedule,
    pub objectives: ObjectiveVector,
    pub cv: f64,
}

impl BaselineResult {
    pub fn is_feasible(&self) -> bool {
        self.cv == 0.0
    }

    fn from_schedule(
        label: Baseline,
        schedule: Schedule,
        scenario: &Scenario,
        epsilon: f64,
    ) -> Self {
        let (objectives, cv) = evaluate_schedule(&schedule, scenario, epsilon);
        Self {
            label,
            schedule,
            objectives,
            cv,
        }
    }
}

fn charging(slot: usize, power: f64) -> SlotDecision {
    SlotDecision {
        slot,
        state: if power > 0.0 {
            SlotState::Charging
        } else {
            SlotState::Idle
        },
        charge_power: power,
        discharge_power: 0.0,
    }
}

/// B1: every EV charges at a constant rate spread over its whole stay.
pub fn baseline_avg(scenario: &Scenario) -> Result<BaselineResult> {
    let scenario_ok = scenario.validate();
    if !scenario_ok.is_valid() {
        return Err(Error::InvalidScenario(scenario_ok.violations));
    }
    let dt = scenario.grid.slot_duration;
    let mut evs = Vec::with_capacity(scenario.requests.len());
    for r in &scenario.requests {
        let rate = r.demand() / (r.battery.efficiency_phi * r.stay_len() as f64 * dt);
        if rate > r.battery.max_power {
            return Err(Error::BaselineInfeasible {
                ev_id: r.id,
                reason: format!(
                    "average rate {rate:.3} kW exceeds max power {} kW",
                    r.battery.max_power
                ),
            });
        }
        evs.push(EvSchedule {
            ev_id: r.id,
            slots: r.parking_slots().map(|t| charging(t, rate)).collect(),
        });
    }
    Ok(BaselineResult::from_schedule(
        Baseline::B1,
        Schedule { evs },
        scenario,
        DEFAULT_EPSILON,
    ))
}

/// B2: every EV charges at full power from arrival until its demand is met.
pub fn baseline_fcfs(scenario: &Scenario) -> Result<BaselineResult> {
    let scenario_ok = scenario.validate();
    if !scenario_ok.is_valid() {
        return Err(Error::InvalidScenario(scenario_ok.violations));
    }
    let dt = scenario.grid.slot_duration;
    let mut evs = Vec::with_capacity(scenario.requests.len());
    // without a shared power cap, EVs are independent; rows stay in request order
    for r in &scenario.requests {
        let per_kw = r.battery.efficiency_phi * dt;
        let mut remaining = r.demand();
        let slots = r
            .parking_slots()
            .map(|t| {
                let p = if remaining > DEMAND_TOL {
                    (remaining / per_kw).min(r.battery.max_power)
                } else {
                    0.0
                };
                remaining -= p * per_kw;
                charging(t, p)
            })
            .collect();
        if remaining > DEMAND_TOL {
            return Err(Error::BaselineInfeasible {
                ev_id: r.id,
                reason: format!("{remaining:.3} kWh short at departure at full power"),
            });
        }
        evs.push(EvSchedule { ev_id: r.id, slots });
    }
    Ok(BaselineResult::from_schedule(
        Baseline::B2,
        Schedule { evs },
        scenario,
        DEFAULT_EPSILON,
    ))
}

fn lexicographic(a: &EvaluatedSolution, b: &EvaluatedSolution, objective: Objective) -> Ordering {
    a.cv.partial_cmp(&b.cv)
        .unwrap_or(Ordering::Equal)
        .then_with(|| {
            objective
                .of(&a.objectives)
                .partial_cmp(&objective.of(&b.objectives))
                .unwrap_or(Ordering::Equal)
        })
}

/// B3/B4/B5: single-objective GA over the same genome and operators as the
/// multi-objective search, ranking by violation first and `objective` second.
pub fn baseline_soga(
    scenario: &Scenario,
    objective: Objective,
    params: &MoeaParams,
) -> Result<BaselineResult> {
    let problem = Problem::new(scenario, params)?;
    let ps = params.population_size;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let by_rank = |a: &EvaluatedSolution, b: &EvaluatedSolution| lexicographic(a, b, objective);

    let mut pop = problem.evaluate_all(problem.random_population(ps, &mut rng));
    pop.sort_by(by_rank);

    for _ in 2..=params.max_generations {
        // pop is sorted, so the lower index of two distinct picks wins
        let children = problem.offspring_with(&pop, ps, params, &mut rng, |rng| {
            let a = rng.random_range(0..ps);
            let mut b = rng.random_range(0..ps - 1);
            if b >= a {
                b += 1;
            }
            a.min(b)
        });
        let mut pool = pop;
        pool.extend(problem.evaluate_all(children));
        pool.sort_by(by_rank);
        pool.truncate(ps);
        pop = pool;
    }

    let best = pop.into_iter().next().expect("population is non-empty");
    let schedule = decode(&best.genome, &problem.layout)?;
    Ok(BaselineResult {
        label: match objective {
            Objective::NetworkImpact => Baseline::B3,
            Objective::EvcsCost => Baseline::B4,
            Objective::UserCost => Baseline::B5,
        },
        schedule,
        objectives: best.objectives,
        cv: best.cv,
    })
}

pub fn run_baseline(
    scenario: &Scenario,
    which: Baseline,
    params: &MoeaParams,
) -> Result<BaselineResult> {
    match which {
        Baseline::B1 => baseline_avg(scenario),
        Baseline::B2 => baseline_fcfs(scenario),
        other => baseline_soga(scenario, other.objective().expect("GA baseline"), params),
    }
}
