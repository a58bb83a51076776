use std::cmp::Ordering;

use crate::objectives::{EvaluatedSolution, ObjectiveVector};

/// Feasibility-first dominance: lower violation wins outright; at equal
/// violation, ordinary Pareto dominance decides.
pub fn constrained_dominates(a: &EvaluatedSolution, b: &EvaluatedSolution) -> bool {
    if a.cv < b.cv {
        return true;
    }
    a.cv == b.cv && a.objectives.dominates(&b.objectives)
}

/// Deb's fast non-dominated sort under constrained dominance.
///
/// Returns fronts as indices into `pop`, best first. Indices within a front
/// are ascending.
pub fn fast_nondominated_sort(pop: &[EvaluatedSolution]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];

    for i in 0..n {
        for j in (i + 1)..n {
            if constrained_dominates(&pop[i], &pop[j]) {
                dominates[i].push(j);
                dominated_by_count[j] += 1;
            } else if constrained_dominates(&pop[j], &pop[i]) {
                dominates[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// NSGA-II crowding distance of each member of one front.
///
/// Extremes along any objective get `f64::INFINITY`; an objective with zero
/// range over the front adds nothing.
pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut distance = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for m in 0..3 {
        order.sort_by(|&a, &b| {
            front[a]
                .get(m)
                .partial_cmp(&front[b].get(m))
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let lo = front[order[0]].get(m);
        let hi = front[order[n - 1]].get(m);
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            let i = order[k];
            if distance[i].is_finite() {
                distance[i] += (front[order[k + 1]].get(m) - front[order[k - 1]].get(m)) / range;
            }
        }
    }
    distance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::Genome;

    fn sol(f: [f64; 3], cv: f64) -> EvaluatedSolution {
        EvaluatedSolution {
            genome: Genome(vec![]),
            objectives: ObjectiveVector::new(f[0], f[1], f[2]),
            cv,
        }
    }

    #[test]
    fn feasibility_first() {
        assert!(constrained_dominates(
            &sol([9.0, 9.0, 9.0], 0.0),
            &sol([1.0, 1.0, 1.0], 3.0)
        ));
        assert!(!constrained_dominates(
            &sol([1.0, 1.0, 1.0], 3.0),
            &sol([9.0, 9.0, 9.0], 0.0)
        ));
    }

    #[test]
    fn pareto_at_equal_cv() {
        let a = sol([1.0, 1.0, 1.0], 0.0);
        let b = sol([2.0, 2.0, 2.0], 0.0);
        assert!(constrained_dominates(&a, &b));
        assert!(!constrained_dominates(&b, &a));

        let c = sol([1.0, 2.0, 3.0], 0.0);
        assert!(!constrained_dominates(&c, &b));
        assert!(!constrained_dominates(&b, &c));
        assert!(!constrained_dominates(&a, &a));
    }

    #[test]
    fn sort_examples() {
        let pop = vec![
            sol([1.0, 1.0, 1.0], 0.0),
            sol([2.0, 2.0, 2.0], 0.0),
            sol([1.0, 2.0, 3.0], 0.0),
        ];
        assert_eq!(fast_nondominated_sort(&pop), vec![vec![0], vec![1, 2]]);
        assert_eq!(fast_nondominated_sort(&pop[..1]), vec![vec![0]]);

        let incomparable = vec![
            sol([1.0, 3.0, 2.0], 0.0),
            sol([2.0, 1.0, 3.0], 0.0),
            sol([3.0, 2.0, 1.0], 0.0),
        ];
        assert_eq!(fast_nondominated_sort(&incomparable), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn infeasible_layers_follow_cv() {
        let pop = vec![
            sol([1.0, 1.0, 1.0], 2.0),
            sol([5.0, 5.0, 5.0], 0.0),
            sol([0.0, 0.0, 0.0], 1.0),
        ];
        assert_eq!(
            fast_nondominated_sort(&pop),
            vec![vec![1], vec![2], vec![0]]
        );
    }

    #[test]
    fn crowding_examples() {
        let two = [
            ObjectiveVector::new(0.0, 1.0, 0.0),
            ObjectiveVector::new(1.0, 0.0, 0.0),
        ];
        assert!(crowding_distance(&two).iter().all(|d| d.is_infinite()));

        let line = [
            ObjectiveVector::new(0.0, 2.0, 5.0),
            ObjectiveVector::new(1.0, 1.0, 5.0),
            ObjectiveVector::new(2.0, 0.0, 5.0),
        ];
        let d = crowding_distance(&line);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert_eq!(d[1], 2.0);

        let same = [ObjectiveVector::new(1.0, 1.0, 1.0); 4];
        let d = crowding_distance(&same);
        assert_eq!(d.iter().filter(|x| x.is_infinite()).count(), 2);
        assert_eq!(d.iter().filter(|&&x| x == 0.0).count(), 2);
    }
}
