//! Problem-instance types: the time grid, EV requests, battery and tariff
//! parameters, and the [`Scenario`] that bundles them.
//!
//! Slots are numbered from 1. A request occupies the inclusive range
//! `arrival_slot..=departure_slot`. State of charge is stored as energy (kWh).

use std::collections::HashSet;
use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub n_slots: usize,
    /// Hours per slot.
    pub slot_duration: f64,
    /// Clock label of slot 1, e.g. `"01:00"`.
    pub start_label: String,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            n_slots: 29,
            slot_duration: 1.0,
            start_label: "01:00".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    /// Usable capacity, kWh.
    pub capacity: f64,
    /// Battery replacement cost.
    pub replacement_cost: f64,
    /// Degradation slope; only its magnitude enters the cost.
    pub degradation_k: f64,
    /// Charge/discharge efficiency in (0, 1].
    pub efficiency_phi: f64,
    /// Power limit in kW, shared by charging and discharging.
    pub max_power: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        Self {
            capacity: 50.0,
            replacement_cost: 120_000.0,
            degradation_k: -1.0 / 64.0,
            efficiency_phi: 1.0,
            max_power: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvRequest {
    pub id: usize,
    pub arrival_slot: usize,
    /// Last slot the EV is parked (inclusive).
    pub departure_slot: usize,
    pub soc_arrival: f64,
    pub soc_required: f64,
    pub battery: BatteryParams,
}

impl EvRequest {
    /// Slots during which the EV is parked.
    pub fn parking_slots(&self) -> RangeInclusive<usize> {
        self.arrival_slot..=self.departure_slot
    }

    pub fn stay_len(&self) -> usize {
        (self.departure_slot + 1).saturating_sub(self.arrival_slot)
    }

    /// Energy to deliver between arrival and departure, kWh.
    pub fn demand(&self) -> f64 {
        self.soc_required - self.soc_arrival
    }
}

/// Load-dependent price: `spot + fixed + linear * L + quad * L^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffParams {
    pub spot_price: f64,
    pub fixed_coeff: f64,
    pub linear_coeff: f64,
    pub quad_coeff: f64,
    /// Lower bound on the net grid draw, kW.
    pub x_min: f64,
    /// Upper bound on the net grid draw, kW.
    pub x_max: f64,
}

impl Default for TariffParams {
    fn default() -> Self {
        Self {
            spot_price: 0.2084,
            fixed_coeff: 0.0,
            linear_coeff: 5e-5,
            quad_coeff: 5e-5,
            x_min: 0.0,
            x_max: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub grid: TimeGrid,
    /// Base (building) load per slot, kW.
    pub base_load: Vec<f64>,
    pub requests: Vec<EvRequest>,
    pub tariff: TariffParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    /// Number of parked EVs per slot (index 0 is slot 1).
    pub occupancy: Vec<usize>,
    /// Genome length, three genes per parked EV per slot.
    pub total_dim: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Scenario {
    /// Checks every invariant of the instance without failing fast.
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.grid.n_slots;

        if n == 0 {
            violations.push("grid.n_slots must be >= 1".to_string());
        }
        if !(self.grid.slot_duration > 0.0 && self.grid.slot_duration.is_finite()) {
            violations.push(format!(
                "grid.slot_duration must be > 0 (got {})",
                self.grid.slot_duration
            ));
        }
        if self.base_load.len() != n {
            violations.push(format!(
                "base_load has {} entries, grid has {} slots",
                self.base_load.len(),
                n
            ));
        }
        for (i, &l) in self.base_load.iter().enumerate() {
            if !(l >= 0.0 && l.is_finite()) {
                violations.push(format!("base_load[slot {}] = {} must be >= 0", i + 1, l));
            }
        }

        let t = &self.tariff;
        for (name, v) in [
            ("spot_price", t.spot_price),
            ("fixed_coeff", t.fixed_coeff),
            ("linear_coeff", t.linear_coeff),
            ("quad_coeff", t.quad_coeff),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                violations.push(format!("tariff.{name} = {v} must be >= 0"));
            }
        }
        if !(t.x_min <= t.x_max) {
            violations.push(format!(
                "tariff.x_min ({}) must not exceed tariff.x_max ({})",
                t.x_min, t.x_max
            ));
        }

        let mut seen = HashSet::new();
        let mut occupancy = vec![0usize; n];
        for r in &self.requests {
            let before = violations.len();
            if !seen.insert(r.id) {
                violations.push(format!("EV {}: duplicate id", r.id));
            }
            check_request(r, n, &mut violations);
            if violations.len() == before {
                for slot in r.parking_slots() {
                    occupancy[slot - 1] += 1;
                }
            }
        }
        let total_dim = 3 * occupancy.iter().sum::<usize>();

        ValidationReport {
            violations,
            occupancy,
            total_dim,
        }
    }

    /// Returns the scenario back if valid, otherwise the list of violations.
    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidScenario(report.violations))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Requests sorted by id, as positions into `self.requests`.
    pub(crate) fn request_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.requests.len()).collect();
        order.sort_by_key(|&i| self.requests[i].id);
        order
    }
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn check_request(r: &EvRequest, n_slots: usize, out: &mut Vec<String>) {
    let id = r.id;
    if r.arrival_slot < 1 {
        out.push(format!("EV {id}: arrival_slot must be >= 1"));
    }
    if r.arrival_slot > r.departure_slot {
        out.push(format!(
            "EV {id}: arrival_slot ({}) after departure_slot ({})",
            r.arrival_slot, r.departure_slot
        ));
    }
    if r.departure_slot > n_slots {
        out.push(format!(
            "EV {id}: departure_slot ({}) beyond grid ({n_slots} slots)",
            r.departure_slot
        ));
    }
    let b = &r.battery;
    if !(b.capacity > 0.0 && b.capacity.is_finite()) {
        out.push(format!("EV {id}: battery.capacity must be > 0"));
    }
    if !(b.replacement_cost >= 0.0) {
        out.push(format!("EV {id}: battery.replacement_cost must be >= 0"));
    }
    if !b.degradation_k.is_finite() {
        out.push(format!("EV {id}: battery.degradation_k must be finite"));
    }
    if !(b.efficiency_phi > 0.0 && b.efficiency_phi <= 1.0) {
        out.push(format!("EV {id}: battery.efficiency_phi must be in (0, 1]"));
    }
    if !(b.max_power > 0.0 && b.max_power.is_finite()) {
        out.push(format!("EV {id}: battery.max_power must be > 0"));
    }
    if !(r.soc_arrival >= 0.0) {
        out.push(format!("EV {id}: soc_arrival must be >= 0"));
    }
    if !(r.soc_arrival <= r.soc_required) {
        out.push(format!(
            "EV {id}: soc_arrival ({}) exceeds soc_required ({})",
            r.soc_arrival, r.soc_required
        ));
    }
    if !(r.soc_required <= b.capacity) {
        out.push(format!(
            "EV {id}: soc_required ({}) exceeds battery.capacity ({})",
            r.soc_required, b.capacity
        ));
    }
    if !(r.soc_arrival <= b.capacity) {
        out.push(format!(
            "EV {id}: soc_arrival ({}) exceeds battery.capacity ({})",
            r.soc_arrival, b.capacity
        ));
    }
}
