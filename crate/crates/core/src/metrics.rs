//! Front analytics: hypervolume, extreme members and objective ranges.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::objectives::{EvaluatedSolution, ObjectiveVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    UserCost,
    EvcsCost,
    NetworkImpact,
}

impl Objective {
    pub fn index(self) -> usize {
        match self {
            Objective::UserCost => 0,
            Objective::EvcsCost => 1,
            Objective::NetworkImpact => 2,
        }
    }

    pub fn of(self, v: &ObjectiveVector) -> f64 {
        v.get(self.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Min,
    Max,
}

/// Exact hypervolume dominated by `front` and bounded by `reference`.
///
/// Members that do not strictly dominate `reference` in every objective
/// are dropped (with a warning).
pub fn hypervolume(front: &[ObjectiveVector], reference: &ObjectiveVector) -> f64 {
    let r = reference.as_array();
    let mut pts: Vec<[f64; 3]> = front
        .iter()
        .map(|p| p.as_array())
        .filter(|p| p.iter().zip(&r).all(|(a, b)| a < b))
        .collect();
    if pts.len() < front.len() {
        log::warn!(
            "hypervolume: {} of {} points do not dominate the reference point",
            front.len() - pts.len(),
            front.len()
        );
    }
    hypervolume_3d(&mut pts, r)
}

/// Sweep along the third objective while maintaining the 2-D staircase of
/// the points seen so far.
fn hypervolume_3d(pts: &mut [[f64; 3]], r: [f64; 3]) -> f64 {
    pts.sort_by(|a, b| a[2].partial_cmp(&b[2]).unwrap_or(Ordering::Equal));
    let mut stairs = Staircase::new(r[0], r[1]);
    let mut volume = 0.0;
    for (i, p) in pts.iter().enumerate() {
        stairs.insert(p[0], p[1]);
        let next_z = pts.get(i + 1).map_or(r[2], |q| q[2]);
        volume += stairs.area * (next_z - p[2]);
    }
    volume
}

/// Mutually non-dominated 2-D points sorted by x ascending (so y descending),
/// with their dominated area up to `(rx, ry)`.
struct Staircase {
    pts: Vec<(f64, f64)>,
    rx: f64,
    ry: f64,
    area: f64,
}

impl Staircase {
    fn new(rx: f64, ry: f64) -> Self {
        Self {
            pts: Vec::new(),
            rx,
            ry,
            area: 0.0,
        }
    }

    fn insert(&mut self, x: f64, y: f64) {
        // first index with q.x > x
        let idx = self.pts.partition_point(|q| q.0 <= x);
        let mut ceiling = if idx > 0 {
            self.pts[idx - 1].1
        } else {
            self.ry
        };
        if ceiling <= y {
            return;
        }
        let mut gain = 0.0;
        let mut at = x;
        let mut end = idx;
        let mut bounded = false;
        while end < self.pts.len() {
            let q = self.pts[end];
            gain += (q.0 - at) * (ceiling - y);
            if q.1 < y {
                bounded = true;
                break;
            }
            ceiling = q.1;
            at = q.0;
            end += 1;
        }
        if !bounded {
            gain += (self.rx - at) * (ceiling - y);
        }
        self.area += gain;
        self.pts.splice(idx..end, std::iter::once((x, y)));
    }
}

/// Member minimizing (or maximizing) `objective`; ties go to smaller `f3`,
/// then smaller `f1`.
pub fn select_extreme(
    front: &[EvaluatedSolution],
    objective: Objective,
    direction: Direction,
) -> Option<&EvaluatedSolution> {
    front.iter().min_by(|a, b| {
        let (x, y) = (objective.of(&a.objectives), objective.of(&b.objectives));
        let primary = match direction {
            Direction::Min => x.partial_cmp(&y),
            Direction::Max => y.partial_cmp(&x),
        }
        .unwrap_or(Ordering::Equal);
        primary
            .then(
                a.objectives
                    .f3
                    .partial_cmp(&b.objectives.f3)
                    .unwrap_or(Ordering::Equal),
            )
            .then(
                a.objectives
                    .f1
                    .partial_cmp(&b.objectives.f1)
                    .unwrap_or(Ordering::Equal),
            )
    })
}

/// Componentwise `(min, max)` over the front, `None` when empty.
pub fn objective_ranges(front: &[ObjectiveVector]) -> Option<[(f64, f64); 3]> {
    let first = front.first()?.as_array();
    let mut out = first.map(|v| (v, v));
    for p in &front[1..] {
        for (range, v) in out.iter_mut().zip(p.as_array()) {
            range.0 = range.0.min(v);
            range.1 = range.1.max(v);
        }
    }
    Some(out)
}

/// Nadir pushed outward by a tenth of its magnitude in each objective.
pub fn reference_from_nadir(front: &[ObjectiveVector]) -> Option<ObjectiveVector> {
    let ranges = objective_ranges(front)?;
    let [a, b, c] = ranges.map(|(_, hi)| hi + 0.1 * hi.abs());
    Some(ObjectiveVector::new(a, b, c))
}
