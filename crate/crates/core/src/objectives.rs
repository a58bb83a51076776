//! Endogenous pricing, SoC dynamics, the three objectives and constraint
//! violation.
//!
//! All objectives are minimized:
//! - `f1`: total EV user cost (energy bought minus energy sold, plus battery
//!   degradation);
//! - `f2`: charging-station cost (grid purchase minus EV trade; negative is
//!   profit);
//! - `f3`: network impact, the sum of squared net slot loads.
//!
//! Prices are derived from the loads the schedule itself produces, so every
//! evaluation first aggregates EV load per slot and then prices it.

use serde::{Deserialize, Serialize};

use crate::encoding::{decode, Genome, GenomeLayout, Schedule, SlotDecision};
use crate::error::Result;
use crate::model::{EvRequest, Scenario, TariffParams};

/// Default tolerance for the relaxed demand equality, kWh.
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl ObjectiveVector {
    pub fn new(f1: f64, f2: f64, f3: f64) -> Self {
        Self { f1, f2, f3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }

    pub fn get(&self, index: usize) -> f64 {
        self.as_array()[index]
    }

    /// Pareto dominance for minimization.
    pub fn dominates(&self, other: &Self) -> bool {
        let a = self.as_array();
        let b = other.as_array();
        a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedSolution {
    pub genome: Genome,
    pub objectives: ObjectiveVector,
    /// Total constraint violation; zero iff feasible.
    pub cv: f64,
}

impl EvaluatedSolution {
    pub fn is_feasible(&self) -> bool {
        self.cv == 0.0
    }
}

/// EV charging and discharging load in one slot: `(Xc >= 0, Xd <= 0)`.
pub fn aggregate_ev_load(schedule: &Schedule, slot: usize) -> (f64, f64) {
    let mut xc = 0.0;
    let mut xd = 0.0;
    for ev in &schedule.evs {
        if let Some(d) = ev.slots.iter().find(|d| d.slot == slot) {
            xc += d.effective_charge();
            xd += d.effective_discharge();
        }
    }
    (xc, xd)
}

/// `(Xc, Xd)` for every slot at once; index 0 is slot 1.
pub fn slot_loads(schedule: &Schedule, n_slots: usize) -> Vec<(f64, f64)> {
    let mut loads = vec![(0.0, 0.0); n_slots];
    for ev in &schedule.evs {
        for d in &ev.slots {
            let e = &mut loads[d.slot - 1];
            e.0 += d.effective_charge();
            e.1 += d.effective_discharge();
        }
    }
    loads
}

/// Price per kWh at total load `base + xc + xd`.
pub fn price_at(base: f64, xc: f64, xd: f64, tariff: &TariffParams) -> f64 {
    let load = base + xc + xd;
    tariff.spot_price
        + tariff.fixed_coeff
        + tariff.linear_coeff * load
        + tariff.quad_coeff * load * load
}

/// Per-slot prices produced by `schedule` on `scenario`.
pub fn slot_prices(schedule: &Schedule, scenario: &Scenario) -> Vec<f64> {
    slot_loads(schedule, scenario.grid.n_slots)
        .iter()
        .zip(&scenario.base_load)
        .map(|(&(xc, xd), &l)| price_at(l, xc, xd, &scenario.tariff))
        .collect()
}

/// SoC before the first parking slot and after each one, kWh (`row.len() + 1` values).
pub fn soc_trajectory(request: &EvRequest, row: &[SlotDecision], slot_duration: f64) -> Vec<f64> {
    let gain = request.battery.efficiency_phi * slot_duration;
    let mut soc = request.soc_arrival;
    let mut out = Vec::with_capacity(row.len() + 1);
    out.push(soc);
    for d in row {
        soc += gain * d.signed_power();
        out.push(soc);
    }
    out
}

/// Degradation cost of losing `drop` kWh of SoC.
pub fn degradation_cost(request: &EvRequest, drop: f64) -> f64 {
    let b = &request.battery;
    (b.degradation_k / 100.0).abs() * drop.max(0.0) / b.capacity * b.replacement_cost
}

/// `f1`: summed over every EV.
pub fn user_cost(schedule: &Schedule, scenario: &Scenario, prices: &[f64]) -> f64 {
    let dt = scenario.grid.slot_duration;
    let mut total = 0.0;
    for (ev, request) in schedule.evs.iter().zip(&scenario.requests) {
        let gain = request.battery.efficiency_phi * dt;
        for d in &ev.slots {
            let p = d.signed_power();
            total += p * dt * prices[d.slot - 1];
            // SoC falls only while discharging
            total += degradation_cost(request, -gain * p);
        }
    }
    total
}

/// `f2`: grid purchase at the spot price minus EV trade at the slot price.
pub fn evcs_cost(schedule: &Schedule, scenario: &Scenario, prices: &[f64]) -> f64 {
    let dt = scenario.grid.slot_duration;
    let spot = scenario.tariff.spot_price;
    slot_loads(schedule, scenario.grid.n_slots)
        .iter()
        .zip(&scenario.base_load)
        .zip(prices)
        .map(|((&(xc, xd), &l), &price)| {
            let net = (l + xc + xd).max(0.0);
            (net * spot - xd * price - xc * price) * dt
        })
        .sum()
}

/// `f3`: sum of squared net slot loads, kW².
pub fn network_impact(schedule: &Schedule, scenario: &Scenario) -> f64 {
    slot_loads(schedule, scenario.grid.n_slots)
        .iter()
        .zip(&scenario.base_load)
        .map(|(&(xc, xd), &l)| {
            let net = l + xc + xd;
            net * net
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// Delivered energy must match the requested SoC within epsilon.
    Demand {
        ev_id: usize,
    },
    SocLower {
        ev_id: usize,
        slot: usize,
    },
    SocUpper {
        ev_id: usize,
        slot: usize,
    },
    GridLower {
        slot: usize,
    },
    GridUpper {
        slot: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub total: f64,
    /// Only constraints with a positive violation.
    pub violations: Vec<(Constraint, f64)>,
}

/// SoC excess in kWh small enough to be rounding noise.
pub const SOC_TOLERANCE: f64 = 1e-9;

fn beyond(excess: f64) -> f64 {
    if excess > SOC_TOLERANCE {
        excess
    } else {
        0.0
    }
}

fn visit_constraints(
    schedule: &Schedule,
    scenario: &Scenario,
    epsilon: f64,
    loads: &[(f64, f64)],
    mut visit: impl FnMut(Constraint, f64),
) {
    let dt = scenario.grid.slot_duration;
    for (ev, request) in schedule.evs.iter().zip(&scenario.requests) {
        let gain = request.battery.efficiency_phi * dt;
        let cap = request.battery.capacity;
        let mut soc = request.soc_arrival;
        for d in &ev.slots {
            soc += gain * d.signed_power();
            visit(
                Constraint::SocLower {
                    ev_id: ev.ev_id,
                    slot: d.slot,
                },
                beyond(-soc),
            );
            visit(
                Constraint::SocUpper {
                    ev_id: ev.ev_id,
                    slot: d.slot,
                },
                beyond(soc - cap),
            );
        }
        let h = soc - request.soc_required;
        visit(
            Constraint::Demand { ev_id: ev.ev_id },
            (h.abs() - epsilon).max(0.0),
        );
    }
    let t = &scenario.tariff;
    for (i, (&(xc, xd), &l)) in loads.iter().zip(&scenario.base_load).enumerate() {
        let net = (l + xc + xd).max(0.0);
        visit(
            Constraint::GridLower { slot: i + 1 },
            (t.x_min - net).max(0.0),
        );
        visit(
            Constraint::GridUpper { slot: i + 1 },
            (net - t.x_max).max(0.0),
        );
    }
}

/// Itemized violation; `total` is the plain sum.
pub fn constraint_violation(
    schedule: &Schedule,
    scenario: &Scenario,
    epsilon: f64,
) -> ConstraintReport {
    let loads = slot_loads(schedule, scenario.grid.n_slots);
    let mut total = 0.0;
    let mut violations = Vec::new();
    visit_constraints(schedule, scenario, epsilon, &loads, |c, v| {
        if v > 0.0 {
            total += v;
            violations.push((c, v));
        }
    });
    ConstraintReport { total, violations }
}

/// Objectives and total violation of an already decoded schedule.
pub fn evaluate_schedule(
    schedule: &Schedule,
    scenario: &Scenario,
    epsilon: f64,
) -> (ObjectiveVector, f64) {
    let dt = scenario.grid.slot_duration;
    let spot = scenario.tariff.spot_price;
    let loads = slot_loads(schedule, scenario.grid.n_slots);
    let prices: Vec<f64> = loads
        .iter()
        .zip(&scenario.base_load)
        .map(|(&(xc, xd), &l)| price_at(l, xc, xd, &scenario.tariff))
        .collect();

    let f1 = user_cost(schedule, scenario, &prices);
    let mut f2 = 0.0;
    let mut f3 = 0.0;
    for ((&(xc, xd), &l), &price) in loads.iter().zip(&scenario.base_load).zip(&prices) {
        let net = l + xc + xd;
        f2 += (net.max(0.0) * spot - xd * price - xc * price) * dt;
        f3 += net * net;
    }
    let mut cv = 0.0;
    visit_constraints(schedule, scenario, epsilon, &loads, |_, v| cv += v);
    (ObjectiveVector { f1, f2, f3 }, cv)
}

pub fn evaluate(
    genome: &Genome,
    scenario: &Scenario,
    layout: &GenomeLayout,
    epsilon: f64,
) -> Result<EvaluatedSolution> {
    let schedule = decode(genome, layout)?;
    let (objectives, cv) = evaluate_schedule(&schedule, scenario, epsilon);
    Ok(EvaluatedSolution {
        genome: genome.clone(),
        objectives,
        cv,
    })
}
