//! Demand repair for offspring genomes.
//!
//! Each EV's decoded powers are adjusted so its SoC stays inside
//! `[0, capacity]` and its departure SoC equals the requested one. Active
//! slots absorb the residual in proportion to their headroom; whatever is
//! left is placed greedily from the last parking slot backwards, switching
//! slot states when needed. The adjusted values are written back into
//! the genome.

use crate::encoding::{EvGenes, Genome, GenomeLayout, SlotState};
use crate::model::{EvRequest, Scenario};

const RESIDUAL_TOL: f64 = 1e-9;
const PROPORTIONAL_ROUNDS: usize = 3;

pub fn repair_genome(genome: &mut Genome, layout: &GenomeLayout, scenario: &Scenario) {
    let dt = scenario.grid.slot_duration;
    for (ev, request) in layout.ev_genes().iter().zip(&scenario.requests) {
        repair_ev(&mut genome.0, ev, request, dt);
    }
}

struct Row {
    state: Vec<SlotState>,
    /// Signed power per slot, kW.
    power: Vec<f64>,
    gain: f64,
    pmax: f64,
    cap: f64,
    soc0: f64,
}

impl Row {
    fn final_soc(&self) -> f64 {
        self.soc0 + self.gain * self.power.iter().sum::<f64>()
    }

    /// SoC after each slot.
    fn trajectory(&self) -> Vec<f64> {
        let mut soc = self.soc0;
        self.power
            .iter()
            .map(|p| {
                soc += self.gain * p;
                soc
            })
            .collect()
    }

    fn clamp_forward(&mut self) {
        let mut soc = self.soc0;
        for p in &mut self.power {
            let next = soc + self.gain * *p;
            if next > self.cap {
                *p = ((self.cap - soc) / self.gain).max(0.0);
            } else if next < 0.0 {
                *p = (-soc / self.gain).min(0.0);
            }
            soc += self.gain * *p;
        }
    }

    /// How far slot `k` can move its power towards `sign` without changing state.
    fn active_headroom(&self, k: usize, sign: f64) -> f64 {
        let p = self.power[k];
        match (self.state[k], sign > 0.0) {
            (SlotState::Charging, true) => self.pmax - p,
            (SlotState::Charging, false) => p,
            (SlotState::Discharging, true) => -p,
            (SlotState::Discharging, false) => self.pmax + p,
            (SlotState::Idle, _) => 0.0,
        }
        .max(0.0)
    }

    fn proportional(&mut self, residual: f64) {
        let sign = residual.signum();
        let heads: Vec<f64> = (0..self.power.len())
            .map(|k| self.active_headroom(k, sign))
            .collect();
        let total: f64 = heads.iter().sum();
        if total <= 0.0 {
            return;
        }
        let need = residual.abs() / self.gain;
        let frac = (need / total).min(1.0);
        for (p, h) in self.power.iter_mut().zip(&heads) {
            *p += sign * h * frac;
        }
    }

    /// Places `residual` kWh from the last slot backwards, respecting bounds
    /// on every later SoC.
    fn greedy_backward(&mut self, mut residual: f64) {
        let sign = residual.signum();
        let mut traj = self.trajectory();
        for k in (0..self.power.len()).rev() {
            if residual.abs() <= RESIDUAL_TOL {
                break;
            }
            // the slot may cross zero and switch direction
            let power_room = (self.pmax - sign * self.power[k]).max(0.0);
            let bound_room = if sign > 0.0 {
                self.cap - traj[k..].iter().cloned().fold(f64::MIN, f64::max)
            } else {
                traj[k..].iter().cloned().fold(f64::MAX, f64::min)
            };
            let energy = residual
                .abs()
                .min(self.gain * power_room)
                .min(bound_room.max(0.0));
            if energy <= 0.0 {
                continue;
            }
            self.power[k] += sign * energy / self.gain;
            if self.power[k] > 0.0 {
                self.state[k] = SlotState::Charging;
            } else if self.power[k] < 0.0 {
                self.state[k] = SlotState::Discharging;
            }
            for s in &mut traj[k..] {
                *s += sign * energy;
            }
            residual -= sign * energy;
        }
    }
}

fn repair_ev(g: &mut [f64], ev: &EvGenes, request: &EvRequest, dt: f64) {
    let b = &request.battery;
    let state: Vec<SlotState> = ev
        .slots
        .iter()
        .map(|s| SlotState::from_gene(g[s.state]))
        .collect();
    let power = ev
        .slots
        .iter()
        .zip(&state)
        .map(|(s, st)| match st {
            SlotState::Charging => g[s.charge],
            SlotState::Discharging => -g[s.discharge],
            SlotState::Idle => 0.0,
        })
        .collect();
    let mut row = Row {
        state: state.clone(),
        power,
        gain: b.efficiency_phi * dt,
        pmax: b.max_power,
        cap: b.capacity,
        soc0: request.soc_arrival,
    };

    row.clamp_forward();
    for _ in 0..PROPORTIONAL_ROUNDS {
        let residual = request.soc_required - row.final_soc();
        if residual.abs() <= RESIDUAL_TOL {
            break;
        }
        row.proportional(residual);
        row.clamp_forward();
    }
    let residual = request.soc_required - row.final_soc();
    if residual.abs() > RESIDUAL_TOL {
        row.greedy_backward(residual);
    }

    for (k, s) in ev.slots.iter().enumerate() {
        if row.state[k] != state[k] {
            g[s.state] = f64::from(row.state[k].value());
        }
        let p = row.power[k];
        match row.state[k] {
            SlotState::Charging => g[s.charge] = p.clamp(0.0, row.pmax),
            SlotState::Discharging => g[s.discharge] = (-p).clamp(0.0, row.pmax),
            SlotState::Idle => {}
        }
    }
}
