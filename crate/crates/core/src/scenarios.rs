//! Built-in problem sets 1 to 4 and the pieces used to assemble them.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BatteryParams, EvRequest, Scenario, TariffParams, TimeGrid};

pub const STAY_LENGTH: usize = 8;
pub const N_SLOTS: usize = 29;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyProfile {
    /// EVs parked in each slot, slot 1 first.
    pub counts: Vec<usize>,
    pub stay_length: usize,
}

impl OccupancyProfile {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Number of EVs implied by the profile, when it divides evenly.
    pub fn n_users(&self) -> Option<usize> {
        let total = self.total();
        (self.stay_length > 0 && total.is_multiple_of(self.stay_length))
            .then(|| total / self.stay_length)
    }
}

fn concat(parts: &[(usize, usize)]) -> Vec<usize> {
    parts
        .iter()
        .flat_map(|&(value, times)| std::iter::repeat_n(value, times))
        .collect()
}

pub fn builtin_profile(set_id: u8) -> Result<OccupancyProfile> {
    let counts = match set_id {
        1 => concat(&[(10, 7), (13, 1), (10, 13), (20, 2), (17, 1), (10, 5)]),
        2 => {
            let mut v = vec![15, 15, 20, 20, 20, 20, 20, 23, 15, 15];
            v.extend(concat(&[(10, 11), (20, 2), (17, 1), (10, 5)]));
            v
        }
        3 => concat(&[
            (10, 7),
            (13, 1),
            (10, 1),
            (15, 12),
            (25, 2),
            (22, 1),
            (15, 1),
            (10, 4),
        ]),
        4 => concat(&[
            (10, 7),
            (20, 1),
            (10, 8),
            (15, 5),
            (30, 2),
            (20, 1),
            (15, 5),
        ]),
        other => return Err(Error::UnknownProblemSet(other)),
    };
    debug_assert_eq!(counts.len(), N_SLOTS);
    Ok(OccupancyProfile {
        counts,
        stay_length: STAY_LENGTH,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrivals {
    /// New EVs per slot, slot 1 first.
    pub counts: Vec<usize>,
    /// Slots whose reconstructed occupancy differs from the profile, with
    /// `reconstructed - profile`.
    pub residuals: Vec<(usize, i64)>,
}

impl Arrivals {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn is_exact(&self) -> bool {
        self.residuals.is_empty()
    }
}

/// Arrival counts that reproduce `profile` with fixed-length stays.
///
/// Negative arrivals are clamped to zero and the resulting mismatch is
/// reported in [`Arrivals::residuals`]. Arrivals that could not complete
/// their stay inside the grid are an error.
pub fn arrivals_from_occupancy(profile: &OccupancyProfile) -> Result<Arrivals> {
    let stay = profile.stay_length;
    let o = &profile.counts;
    let n = o.len();
    if stay == 0 {
        return Err(Error::InfeasibleOccupancy {
            stay,
            slots: vec![],
        });
    }
    let mut a = vec![0i64; n];
    for t in 0..n {
        let prev = if t > 0 { o[t - 1] as i64 } else { 0 };
        let leaving = if t >= stay { a[t - stay] } else { 0 };
        a[t] = (o[t] as i64 - prev + leaving).max(0);
    }
    let late: Vec<usize> = (0..n)
        .filter(|&t| a[t] > 0 && t + stay > n)
        .map(|t| t + 1)
        .collect();
    if !late.is_empty() {
        return Err(Error::InfeasibleOccupancy { stay, slots: late });
    }
    let residuals = (0..n)
        .filter_map(|t| {
            let rebuilt: i64 = a[t.saturating_sub(stay - 1)..=t].iter().sum();
            let diff = rebuilt - o[t] as i64;
            (diff != 0).then_some((t + 1, diff))
        })
        .collect();
    Ok(Arrivals {
        counts: a.into_iter().map(|v| v as usize).collect(),
        residuals,
    })
}

/// Office-style base load in kW: 30 overnight, 100 from 09:00 to 18:00,
/// linear ramps in between. Slot `t` covers clock hour `t mod 24`.
pub fn synthetic_base_load(n_slots: usize) -> Vec<f64> {
    const LOW: f64 = 30.0;
    const HIGH: f64 = 100.0;
    let step = (HIGH - LOW) / 4.0;
    (1..=n_slots)
        .map(|t| match t % 24 {
            h @ 6..=8 => LOW + step * (h - 5) as f64,
            9..=18 => HIGH,
            h @ 19..=21 => HIGH - step * (h - 18) as f64,
            _ => LOW,
        })
        .collect()
}

/// Reads a `slot,kw` table with one row per slot, slots `1..=n_slots` in order.
pub fn parse_base_load_csv(text: &str, n_slots: usize) -> Result<Vec<f64>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::BaseLoadFormat("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["slot", "kw"] {
        return Err(Error::BaseLoadFormat(format!(
            "expected header `slot,kw`, found `{header}`"
        )));
    }
    let mut out = Vec::with_capacity(n_slots);
    for (row, line) in lines.enumerate() {
        let bad = |what: &str| Error::BaseLoadFormat(format!("row {}: {what}: `{line}`", row + 1));
        let (slot, kw) = line
            .split_once(',')
            .ok_or_else(|| bad("expected two columns"))?;
        let slot: usize = slot.trim().parse().map_err(|_| bad("bad slot"))?;
        let kw: f64 = kw.trim().parse().map_err(|_| bad("bad kw"))?;
        if slot != row + 1 {
            return Err(bad("slots must be 1, 2, ... in order"));
        }
        if !kw.is_finite() {
            return Err(bad("kw must be finite"));
        }
        out.push(kw);
    }
    if out.len() != n_slots {
        return Err(Error::BaseLoadFormat(format!(
            "expected {n_slots} rows, found {}",
            out.len()
        )));
    }
    Ok(out)
}

pub fn load_base_load_csv(path: impl AsRef<Path>, n_slots: usize) -> Result<Vec<f64>> {
    parse_base_load_csv(&std::fs::read_to_string(path)?, n_slots)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum BaseLoadSource {
    #[default]
    Synthetic,
    Profile(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub base_load: BaseLoadSource,
    /// Arrival SoC is drawn uniformly from this range, as fractions of capacity.
    pub soc_arrival_range: (f64, f64),
    pub battery: BatteryParams,
    pub tariff: TariffParams,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            base_load: BaseLoadSource::Synthetic,
            soc_arrival_range: (0.2, 0.8),
            battery: BatteryParams::default(),
            tariff: TariffParams::default(),
        }
    }
}

/// Generator for scenario draws; a separate stream from the optimizer's.
pub fn scenario_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Instantiates built-in set `set_id`. EV ids follow arrival order; every EV
/// leaves fully charged.
pub fn build_problem_set<R: Rng + ?Sized>(
    set_id: u8,
    rng: &mut R,
    options: &BuildOptions,
) -> Result<Scenario> {
    let profile = builtin_profile(set_id)?;
    let arrivals = arrivals_from_occupancy(&profile)?;
    if !arrivals.is_exact() {
        log::warn!("set {set_id}: occupancy residuals {:?}", arrivals.residuals);
    }
    let grid = TimeGrid {
        n_slots: profile.counts.len(),
        ..TimeGrid::default()
    };
    let base_load = match &options.base_load {
        BaseLoadSource::Synthetic => synthetic_base_load(grid.n_slots),
        BaseLoadSource::Profile(v) => v.clone(),
    };
    let (lo, hi) = options.soc_arrival_range;
    if !(0.0..=hi).contains(&lo) || hi > 1.0 {
        return Err(Error::InvalidScenario(vec![format!(
            "arrival SoC range ({lo}, {hi}) must satisfy 0 <= lo <= hi <= 1"
        )]));
    }
    let battery = options.battery.clone();
    let cap = battery.capacity;
    let mut requests = Vec::with_capacity(arrivals.total());
    for (t, &count) in arrivals.counts.iter().enumerate() {
        for _ in 0..count {
            let frac = if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            };
            requests.push(EvRequest {
                id: requests.len(),
                arrival_slot: t + 1,
                departure_slot: t + profile.stay_length,
                soc_arrival: frac * cap,
                soc_required: cap,
                battery: battery.clone(),
            });
        }
    }
    Scenario {
        name: format!("set{set_id}"),
        grid,
        base_load,
        requests,
        tariff: options.tariff.clone(),
    }
    .validated()
}

/// Two EVs over four slots; small enough to enumerate.
pub fn toy_scenario() -> Scenario {
    let ev = |id, arrival_slot, soc_arrival| EvRequest {
        id,
        arrival_slot,
        departure_slot: 4,
        soc_arrival,
        soc_required: 50.0,
        battery: BatteryParams::default(),
    };
    Scenario {
        name: "toy".into(),
        grid: TimeGrid {
            n_slots: 4,
            ..TimeGrid::default()
        },
        base_load: vec![40.0, 80.0, 60.0, 20.0],
        requests: vec![ev(0, 1, 25.0), ev(1, 2, 30.0)],
        tariff: TariffParams::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::GenomeLayout;

    #[test]
    fn profiles_match_table() {
        let sums: Vec<usize> = (1..=4)
            .map(|i| builtin_profile(i).unwrap().total())
            .collect();
        assert_eq!(sums, vec![320, 400, 400, 400]);
        assert_eq!(builtin_profile(1).unwrap().counts[21], 20);
        assert_eq!(builtin_profile(4).unwrap().counts[21], 30);
        assert_eq!(builtin_profile(1).unwrap().counts[7], 13);
        for i in 1..=4 {
            assert_eq!(builtin_profile(i).unwrap().counts.len(), N_SLOTS);
        }
        assert!(matches!(
            builtin_profile(5),
            Err(Error::UnknownProblemSet(5))
        ));
    }

    #[test]
    fn constant_occupancy() {
        let p = OccupancyProfile {
            counts: vec![10; 8],
            stay_length: 8,
        };
        let a = arrivals_from_occupancy(&p).unwrap();
        assert_eq!(a.counts, vec![10, 0, 0, 0, 0, 0, 0, 0]);
        assert!(a.is_exact());
    }

    #[test]
    fn late_arrival_is_infeasible() {
        let p = OccupancyProfile {
            counts: vec![0, 5],
            stay_length: 8,
        };
        match arrivals_from_occupancy(&p) {
            Err(Error::InfeasibleOccupancy { slots, .. }) => assert_eq!(slots, vec![2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_arrivals_are_clamped_and_reported() {
        let p = OccupancyProfile {
            counts: vec![5, 3, 3, 0],
            stay_length: 2,
        };
        let a = arrivals_from_occupancy(&p).unwrap();
        assert_eq!(a.counts, vec![5, 0, 5, 0]);
        assert_eq!(a.residuals, vec![(2, 2), (3, 2), (4, 5)]);
    }

    #[test]
    fn builtin_sets_reconstruct_exactly() {
        for (id, users) in [(1, 40), (2, 50), (3, 50), (4, 50)] {
            let a = arrivals_from_occupancy(&builtin_profile(id).unwrap()).unwrap();
            assert!(a.is_exact(), "set {id}: {:?}", a.residuals);
            assert_eq!(a.total(), users);
        }
    }

    #[test]
    fn synthetic_shape() {
        let b = synthetic_base_load(29);
        assert_eq!(b[0], 30.0);
        assert_eq!(&b[5..9], &[47.5, 65.0, 82.5, 100.0]);
        assert_eq!(b[17], 100.0);
        assert_eq!(&b[18..22], &[82.5, 65.0, 47.5, 30.0]);
        assert_eq!(b[23], 30.0);
    }

    #[test]
    fn build_dims_and_determinism() {
        let opts = BuildOptions::default();
        for (id, dim) in [(1, 960), (2, 1200), (3, 1200), (4, 1200)] {
            let s = build_problem_set(id, &mut scenario_rng(7), &opts).unwrap();
            assert_eq!(GenomeLayout::of(&s).unwrap().total_dim(), dim);
            let again = build_problem_set(id, &mut scenario_rng(7), &opts).unwrap();
            assert_eq!(s, again);
            for r in &s.requests {
                assert!((10.0..=40.0).contains(&r.soc_arrival));
                assert_eq!(r.soc_required, 50.0);
                assert_eq!(r.stay_len(), 8);
            }
        }
    }

    #[test]
    fn base_load_csv() {
        let v = parse_base_load_csv("slot,kw\n1,30\n2,45.5\n", 2).unwrap();
        assert_eq!(v, vec![30.0, 45.5]);
        assert!(parse_base_load_csv("slot,kw\n1,30\n", 2).is_err());
        assert!(parse_base_load_csv("slot,kw\n2,30\n1,30\n", 2).is_err());
        assert!(parse_base_load_csv("t,kw\n1,30\n", 1).is_err());
        assert!(parse_base_load_csv("slot,kw\n1,abc\n", 1).is_err());
    }
}
