//! CSV and JSON writers for run results.

use std::fmt::Write;

use moevcs::objectives::{slot_loads, slot_prices};
use moevcs::{EvaluatedSolution, MoeaParams, ObjectiveVector, Scenario, Schedule};
use serde::{Deserialize, Serialize};

/// A schedule exported under `label` (an MOEA extreme or a baseline).
#[derive(Debug, Clone)]
pub struct LabeledSolution {
    pub label: String,
    pub schedule: Schedule,
    pub objectives: ObjectiveVector,
    pub cv: f64,
}

/// `f1,f2,f3,cv`, one row per front member, sorted by objectives.
pub fn pareto_front_csv(front: &[EvaluatedSolution]) -> String {
    let mut rows: Vec<[f64; 4]> = front
        .iter()
        .map(|m| {
            let o = m.objectives;
            [o.f1, o.f2, o.f3, m.cv]
        })
        .collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out = String::from("f1,f2,f3,cv\n");
    for [a, b, c, d] in rows {
        let _ = writeln!(out, "{a},{b},{c},{d}");
    }
    out
}

/// `ev_id,slot,state,charge_kw,discharge_kw` with the effective (state-gated)
/// powers; discharge is non-positive.
pub fn schedule_csv(schedule: &Schedule) -> String {
    let mut out = String::from("ev_id,slot,state,charge_kw,discharge_kw\n");
    for ev in &schedule.evs {
        for d in &ev.slots {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                ev.ev_id,
                d.slot,
                d.state.value(),
                d.effective_charge(),
                d.effective_discharge()
            );
        }
    }
    out
}

/// `slot,base,ev_charge,ev_discharge,total`; `total` is the sum of the
/// other three load columns.
pub fn load_profile_csv(schedule: &Schedule, scenario: &Scenario) -> String {
    let mut out = String::from("slot,base,ev_charge,ev_discharge,total\n");
    let loads = slot_loads(schedule, scenario.grid.n_slots);
    for (i, (&(xc, xd), &base)) in loads.iter().zip(&scenario.base_load).enumerate() {
        let _ = writeln!(out, "{},{base},{xc},{xd},{}", i + 1, base + xc + xd);
    }
    out
}

/// `slot,price`.
pub fn tariff_csv(schedule: &Schedule, scenario: &Scenario) -> String {
    let mut out = String::from("slot,price\n");
    for (i, p) in slot_prices(schedule, scenario).iter().enumerate() {
        let _ = writeln!(out, "{},{p}", i + 1);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub n_evs: usize,
    pub n_slots: usize,
    pub genome_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ranges {
    pub f1: [f64; 2],
    pub f2: [f64; 2],
    pub f3: [f64; 2],
}

impl From<[(f64, f64); 3]> for Ranges {
    fn from(r: [(f64, f64); 3]) -> Self {
        let [a, b, c] = r.map(|(lo, hi)| [lo, hi]);
        Self {
            f1: a,
            f2: b,
            f3: c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub label: String,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub cv: f64,
    pub feasible: bool,
}

impl From<&LabeledSolution> for SolutionSummary {
    fn from(s: &LabeledSolution) -> Self {
        Self {
            label: s.label.clone(),
            f1: s.objectives.f1,
            f2: s.objectives.f2,
            f3: s.objectives.f3,
            cv: s.cv,
            feasible: s.cv == 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: ScenarioInfo,
    pub params: MoeaParams,
    /// Every front member has zero violation.
    pub feasible: bool,
    pub front_size: usize,
    pub evaluations: usize,
    pub ranges: Option<Ranges>,
    /// MOEA extremes first, then baselines in request order.
    pub solutions: Vec<SolutionSummary>,
    pub reference_point: Option<[f64; 3]>,
    pub hypervolume_history: Vec<f64>,
    pub wall_time_s: f64,
}
