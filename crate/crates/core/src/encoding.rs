//! Flat continuous genome and its mapping onto per-EV, per-slot decisions.
//!
//! Slot `i` with `n_i` parked EVs owns a contiguous block of `3 * n_i` genes:
//! `n_i` state genes, then `n_i` discharge powers, then `n_i` charge powers.
//! Occupants of a slot are ordered by ascending EV id. State genes live in
//! `[-1, 1]` and are rounded to the nearest of {-1, 0, 1} when decoded.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Scenario;

pub const STATE_BOUNDS: (f64, f64) = (-1.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome(pub Vec<f64>);

impl Genome {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Gene positions for one EV in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneSlot {
    pub slot: usize,
    pub state: usize,
    pub discharge: usize,
    pub charge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvGenes {
    pub ev_id: usize,
    pub slots: Vec<GeneSlot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenomeLayout {
    occupants: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    total_dim: usize,
    /// Aligned with `Scenario::requests`.
    ev_genes: Vec<EvGenes>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl GenomeLayout {
    pub fn of(scenario: &Scenario) -> Result<Self> {
        let report = scenario.validate();
        if !report.is_valid() {
            return Err(Error::InvalidScenario(report.violations));
        }
        let n = scenario.grid.n_slots;

        let mut occupants: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &k in &scenario.request_order() {
            let r = &scenario.requests[k];
            for slot in r.parking_slots() {
                occupants[slot - 1].push(k);
            }
        }

        let mut offsets = Vec::with_capacity(n);
        let mut acc = 0;
        for occ in &occupants {
            offsets.push(acc);
            acc += 3 * occ.len();
        }
        let total_dim = acc;

        let mut ev_genes: Vec<EvGenes> = scenario
            .requests
            .iter()
            .map(|r| EvGenes {
                ev_id: r.id,
                slots: Vec::with_capacity(r.stay_len()),
            })
            .collect();
        let mut lower = vec![0.0; total_dim];
        let mut upper = vec![0.0; total_dim];
        for (i, occ) in occupants.iter().enumerate() {
            let base = offsets[i];
            let n_i = occ.len();
            for (j, &k) in occ.iter().enumerate() {
                let g = GeneSlot {
                    slot: i + 1,
                    state: base + j,
                    discharge: base + n_i + j,
                    charge: base + 2 * n_i + j,
                };
                let pmax = scenario.requests[k].battery.max_power;
                (lower[g.state], upper[g.state]) = STATE_BOUNDS;
                (lower[g.discharge], upper[g.discharge]) = (0.0, pmax);
                (lower[g.charge], upper[g.charge]) = (0.0, pmax);
                ev_genes[k].slots.push(g);
            }
        }

        // occupants are stored as EV ids in the public view
        let occupants = occupants
            .into_iter()
            .map(|occ| occ.into_iter().map(|k| scenario.requests[k].id).collect())
            .collect();

        Ok(Self {
            occupants,
            offsets,
            total_dim,
            ev_genes,
            lower,
            upper,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// EV ids parked in `slot` (1-based), ascending.
    pub fn occupants(&self, slot: usize) -> &[usize] {
        &self.occupants[slot - 1]
    }

    /// First gene of `slot`'s block.
    pub fn offset(&self, slot: usize) -> usize {
        self.offsets[slot - 1]
    }

    pub fn ev_genes(&self) -> &[EvGenes] {
        &self.ev_genes
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    /// Uniform sample inside the gene bounds.
    pub fn random_genome<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        Genome(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(&lo, &hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect(),
        )
    }

    pub fn check_dim(&self, genome: &Genome) -> Result<()> {
        if genome.len() != self.total_dim {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim,
                found: genome.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotState {
    Discharging,
    Idle,
    Charging,
}

impl SlotState {
    /// Nearest of {-1, 0, 1}; ties round away from zero.
    pub fn from_gene(v: f64) -> Self {
        let r = v.clamp(-1.0, 1.0).round();
        if r > 0.0 {
            SlotState::Charging
        } else if r < 0.0 {
            SlotState::Discharging
        } else {
            SlotState::Idle
        }
    }

    pub fn value(self) -> i8 {
        match self {
            SlotState::Discharging => -1,
            SlotState::Idle => 0,
            SlotState::Charging => 1,
        }
    }

    /// Charging indicator, 0 or 1.
    pub fn charge_indicator(self) -> f64 {
        if self == SlotState::Charging {
            1.0
        } else {
            0.0
        }
    }

    /// Discharging indicator, 0 or -1.
    pub fn discharge_indicator(self) -> f64 {
        if self == SlotState::Discharging {
            -1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotDecision {
    pub slot: usize,
    pub state: SlotState,
    /// Charging power gene, kW; only active when `state` is `Charging`.
    pub charge_power: f64,
    /// Discharging power magnitude, kW; only active when `state` is `Discharging`.
    pub discharge_power: f64,
}

impl SlotDecision {
    pub fn effective_charge(&self) -> f64 {
        self.charge_power * self.state.charge_indicator()
    }

    /// Non-positive.
    pub fn effective_discharge(&self) -> f64 {
        self.discharge_power * self.state.discharge_indicator()
    }

    /// Net power into the battery, kW (negative while discharging).
    pub fn signed_power(&self) -> f64 {
        self.effective_charge() + self.effective_discharge()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvSchedule {
    pub ev_id: usize,
    /// One decision per parking slot, chronological.
    pub slots: Vec<SlotDecision>,
}

/// Decoded phenotype, one row per request in scenario order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub evs: Vec<EvSchedule>,
}

impl Schedule {
    pub fn idle(scenario: &Scenario) -> Self {
        Self {
            evs: scenario
                .requests
                .iter()
                .map(|r| EvSchedule {
                    ev_id: r.id,
                    slots: r
                        .parking_slots()
                        .map(|slot| SlotDecision {
                            slot,
                            state: SlotState::Idle,
                            charge_power: 0.0,
                            discharge_power: 0.0,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

pub fn decode(genome: &Genome, layout: &GenomeLayout) -> Result<Schedule> {
    layout.check_dim(genome)?;
    let g = genome.values();
    let evs = layout
        .ev_genes
        .iter()
        .map(|ev| EvSchedule {
            ev_id: ev.ev_id,
            slots: ev
                .slots
                .iter()
                .map(|gs| SlotDecision {
                    slot: gs.slot,
                    state: SlotState::from_gene(g[gs.state]),
                    charge_power: g[gs.charge],
                    discharge_power: g[gs.discharge],
                })
                .collect(),
        })
        .collect();
    Ok(Schedule { evs })
}

pub fn encode(schedule: &Schedule, layout: &GenomeLayout) -> Result<Genome> {
    if schedule.evs.len() != layout.ev_genes.len() {
        return Err(Error::ScheduleMismatch(format!(
            "{} EV rows, layout has {}",
            schedule.evs.len(),
            layout.ev_genes.len()
        )));
    }
    let mut g = vec![0.0; layout.total_dim];
    for (row, ev) in schedule.evs.iter().zip(&layout.ev_genes) {
        if row.ev_id != ev.ev_id {
            return Err(Error::ScheduleMismatch(format!(
                "row for EV {} where layout expects EV {}",
                row.ev_id, ev.ev_id
            )));
        }
        if row.slots.len() != ev.slots.len() {
            return Err(Error::ScheduleMismatch(format!(
                "EV {} has {} slots, layout has {}",
                row.ev_id,
                row.slots.len(),
                ev.slots.len()
            )));
        }
        for (d, gs) in row.slots.iter().zip(&ev.slots) {
            if d.slot != gs.slot {
                return Err(Error::ScheduleMismatch(format!(
                    "EV {} not parked in slot {}",
                    row.ev_id, d.slot
                )));
            }
            g[gs.state] = f64::from(d.state.value());
            g[gs.charge] = d.charge_power;
            g[gs.discharge] = d.discharge_power;
        }
    }
    Ok(Genome(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BatteryParams, EvRequest, TariffParams, TimeGrid};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_ev_scenario() -> Scenario {
        let req = |id, a, d| EvRequest {
            id,
            arrival_slot: a,
            departure_slot: d,
            soc_arrival: 20.0,
            soc_required: 40.0,
            battery: BatteryParams::default(),
        };
        Scenario {
            name: "two".into(),
            grid: TimeGrid {
                n_slots: 4,
                ..TimeGrid::default()
            },
            base_load: vec![40.0; 4],
            // deliberately out of id order
            requests: vec![req(5, 2, 4), req(1, 1, 3)],
            tariff: TariffParams::default(),
        }
    }

    #[test]
    fn layout_blocks_tile_the_genome() {
        let s = two_ev_scenario();
        let l = GenomeLayout::of(&s).unwrap();
        assert_eq!(l.total_dim(), 3 * (1 + 2 + 2 + 1));
        assert_eq!(l.occupants(2), &[1, 5]);
        assert_eq!(l.offset(1), 0);
        assert_eq!(l.offset(2), 3);
        assert_eq!(l.offset(3), 9);
        assert_eq!(l.offset(4), 15);

        // slot 2: states [3,4], discharge [5,6], charge [7,8]; EV 1 first
        let ev1 = &l.ev_genes()[1];
        assert_eq!(ev1.ev_id, 1);
        assert_eq!(
            ev1.slots[1],
            GeneSlot {
                slot: 2,
                state: 3,
                discharge: 5,
                charge: 7
            }
        );
        let ev5 = &l.ev_genes()[0];
        assert_eq!(
            ev5.slots[0],
            GeneSlot {
                slot: 2,
                state: 4,
                discharge: 6,
                charge: 8
            }
        );

        let mut used = vec![0; l.total_dim()];
        for ev in l.ev_genes() {
            for g in &ev.slots {
                used[g.state] += 1;
                used[g.charge] += 1;
                used[g.discharge] += 1;
            }
        }
        assert!(used.iter().all(|&c| c == 1));
    }

    #[test]
    fn empty_layout() {
        let mut s = two_ev_scenario();
        s.requests.clear();
        assert_eq!(GenomeLayout::of(&s).unwrap().total_dim(), 0);
    }

    #[test]
    fn state_thresholds() {
        assert_eq!(SlotState::from_gene(0.7), SlotState::Charging);
        assert_eq!(SlotState::from_gene(-0.2), SlotState::Idle);
        assert_eq!(SlotState::from_gene(0.49), SlotState::Idle);
        assert_eq!(SlotState::from_gene(0.5), SlotState::Charging);
        assert_eq!(SlotState::from_gene(-0.6), SlotState::Discharging);
        assert_eq!(SlotState::from_gene(-1.0), SlotState::Discharging);
    }

    #[test]
    fn decode_marks_opposite_power_inactive() {
        let s = two_ev_scenario();
        let l = GenomeLayout::of(&s).unwrap();
        let mut g = vec![0.0; l.total_dim()];
        let gs = l.ev_genes()[1].slots[0];
        g[gs.state] = -0.6;
        g[gs.discharge] = 8.5;
        g[gs.charge] = 3.0;
        let sch = decode(&Genome(g.clone()), &l).unwrap();
        let d = sch.evs[1].slots[0];
        assert_eq!(d.state, SlotState::Discharging);
        assert_eq!(d.discharge_power, 8.5);
        assert_eq!(d.effective_charge(), 0.0);
        assert_eq!(d.signed_power(), -8.5);

        g[gs.state] = -0.2;
        let d = decode(&Genome(g), &l).unwrap().evs[1].slots[0];
        assert_eq!(d.state, SlotState::Idle);
        assert_eq!(d.signed_power(), 0.0);
    }

    #[test]
    fn decode_rejects_wrong_dimension() {
        let l = GenomeLayout::of(&two_ev_scenario()).unwrap();
        assert!(matches!(
            decode(&Genome(vec![0.0; 3]), &l),
            Err(Error::DimensionMismatch {
                expected: 18,
                found: 3
            })
        ));
    }

    #[test]
    fn encode_examples() {
        let s = two_ev_scenario();
        let l = GenomeLayout::of(&s).unwrap();
        let idle = encode(&Schedule::idle(&s), &l).unwrap();
        assert!(idle.values().iter().all(|&v| v == 0.0));

        let mut sch = Schedule::idle(&s);
        sch.evs[0].slots[0].state = SlotState::Charging;
        sch.evs[0].slots[0].charge_power = 10.0;
        let g = encode(&sch, &l).unwrap();
        let gs = l.ev_genes()[0].slots[0];
        assert_eq!((g.0[gs.state], g.0[gs.charge]), (1.0, 10.0));
    }

    #[test]
    fn encode_rejects_foreign_slots() {
        let s = two_ev_scenario();
        let l = GenomeLayout::of(&s).unwrap();
        let mut sch = Schedule::idle(&s);
        sch.evs[0].slots[0].slot = 1;
        assert!(matches!(encode(&sch, &l), Err(Error::ScheduleMismatch(_))));
        let mut sch = Schedule::idle(&s);
        sch.evs[1].ev_id = 9;
        assert!(encode(&sch, &l).is_err());
    }

    #[test]
    fn random_genome_in_bounds() {
        let l = GenomeLayout::of(&two_ev_scenario()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g = l.random_genome(&mut rng);
            for (i, &v) in g.values().iter().enumerate() {
                assert!(v >= l.lower_bounds()[i] && v <= l.upper_bounds()[i]);
            }
        }
    }

    fn arb_state() -> impl Strategy<Value = SlotState> {
        prop_oneof![
            Just(SlotState::Discharging),
            Just(SlotState::Idle),
            Just(SlotState::Charging)
        ]
    }

    proptest! {
        #[test]
        fn decode_encode_round_trip(
            cells in proptest::collection::vec((arb_state(), 0.0..=10.0f64, 0.0..=10.0f64), 6)
        ) {
            let s = two_ev_scenario();
            let l = GenomeLayout::of(&s).unwrap();
            let mut sch = Schedule::idle(&s);
            let mut it = cells.into_iter();
            for ev in &mut sch.evs {
                for d in &mut ev.slots {
                    let (st, c, dis) = it.next().unwrap();
                    d.state = st;
                    d.charge_power = c;
                    d.discharge_power = dis;
                }
            }
            let g = encode(&sch, &l).unwrap();
            prop_assert_eq!(decode(&g, &l).unwrap(), sch);
        }

        #[test]
        fn decoded_states_and_powers_in_range(seed in any::<u64>()) {
            let s = two_ev_scenario();
            let l = GenomeLayout::of(&s).unwrap();
            let g = l.random_genome(&mut ChaCha8Rng::seed_from_u64(seed));
            let sch = decode(&g, &l).unwrap();
            // encode(decode(g)) keeps the state information
            let again = decode(&encode(&sch, &l).unwrap(), &l).unwrap();
            prop_assert_eq!(&again, &sch);
            for ev in &sch.evs {
                for d in &ev.slots {
                    prop_assert!((-1..=1).contains(&d.state.value()));
                    prop_assert!((0.0..=10.0).contains(&d.charge_power));
                    prop_assert!((0.0..=10.0).contains(&d.discharge_power));
                }
            }
        }
    }
}
