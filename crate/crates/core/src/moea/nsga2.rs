use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dominance::{crowding_distance, fast_nondominated_sort};
use super::operators::{polynomial_mutation, sbx_crossover, tournament_select};
use super::repair::repair_genome;
use crate::encoding::{Genome, GenomeLayout};
use crate::error::{Error, Result};
use crate::metrics::{hypervolume, reference_from_nadir};
use crate::model::Scenario;
use crate::objectives::{evaluate, EvaluatedSolution, ObjectiveVector, DEFAULT_EPSILON};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoeaParams {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_rate: f64,
    pub mutation_probability: f64,
    pub sbx_eta: f64,
    pub pm_eta: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Repair each new genome towards the requested departure SoC before
    /// evaluating it.
    pub repair: bool,
}

impl Default for MoeaParams {
    fn default() -> Self {
        Self {
            population_size: 1000,
            max_generations: 20_000,
            crossover_rate: 0.95,
            mutation_probability: 0.01,
            sbx_eta: 15.0,
            pm_eta: 20.0,
            epsilon: DEFAULT_EPSILON,
            seed: 0,
            repair: true,
        }
    }
}

impl MoeaParams {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidParams(m));
        if self.population_size < 4 || !self.population_size.is_multiple_of(2) {
            return fail(format!(
                "population_size must be even and >= 4 (got {})",
                self.population_size
            ));
        }
        if self.max_generations < 1 {
            return fail("max_generations must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return fail(format!(
                "crossover_rate must be in [0, 1] (got {})",
                self.crossover_rate
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return fail(format!(
                "mutation_probability must be in [0, 1] (got {})",
                self.mutation_probability
            ));
        }
        if !(self.sbx_eta > 0.0 && self.pm_eta > 0.0) {
            return fail("distribution indices must be > 0".into());
        }
        if !(self.epsilon >= 0.0) {
            return fail("epsilon must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// 1-based; generation 1 is the initial population.
    pub generation: usize,
    pub n_feasible: usize,
    /// Componentwise best over feasible members.
    pub best: Option<ObjectiveVector>,
    /// Of the feasible first front, against the run's fixed reference point.
    pub hypervolume: f64,
}

impl GenerationStats {
    /// `gen, n_feasible, best_f1, best_f2, best_f3, hypervolume`
    pub fn progress_line(&self) -> String {
        let (a, b, c) = match self.best {
            Some(v) => (v.f1, v.f2, v.f3),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        format!(
            "{},{},{},{},{},{}",
            self.generation, self.n_feasible, a, b, c, self.hypervolume
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    /// First front of the final population.
    pub members: Vec<EvaluatedSolution>,
    pub history: Vec<GenerationStats>,
    pub reference_point: Option<ObjectiveVector>,
    pub evaluations: usize,
}

impl ParetoArchive {
    pub fn is_feasible(&self) -> bool {
        !self.members.is_empty() && self.members.iter().all(|m| m.is_feasible())
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.members.iter().map(|m| m.objectives).collect()
    }
}

/// Scenario, layout and evaluation settings shared by the optimizers.
pub(crate) struct Problem<'a> {
    pub scenario: &'a Scenario,
    pub layout: GenomeLayout,
    pub epsilon: f64,
    pub repair: bool,
}

impl<'a> Problem<'a> {
    pub fn new(scenario: &'a Scenario, params: &MoeaParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            scenario,
            layout: GenomeLayout::of(scenario)?,
            epsilon: params.epsilon,
            repair: params.repair,
        })
    }

    /// Repairs (when enabled) and evaluates; output order matches input.
    pub fn evaluate_all(&self, genomes: Vec<Genome>) -> Vec<EvaluatedSolution> {
        genomes
            .into_par_iter()
            .map(|mut g| {
                if self.repair {
                    repair_genome(&mut g, &self.layout, self.scenario);
                }
                evaluate(&g, self.scenario, &self.layout, self.epsilon)
                    .expect("genome built from the problem layout")
            })
            .collect()
    }

    pub fn random_population(&self, size: usize, rng: &mut ChaCha8Rng) -> Vec<Genome> {
        (0..size).map(|_| self.layout.random_genome(rng)).collect()
    }

    /// Tournament, SBX and polynomial mutation into `size` offspring.
    pub fn offspring(
        &self,
        pop: &[EvaluatedSolution],
        crowding: &[f64],
        size: usize,
        params: &MoeaParams,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Genome> {
        self.offspring_with(pop, size, params, rng, |rng| {
            tournament_select(pop, crowding, rng)
        })
    }

    /// SBX and polynomial mutation on parents chosen by `pick`.
    pub fn offspring_with(
        &self,
        pop: &[EvaluatedSolution],
        size: usize,
        params: &MoeaParams,
        rng: &mut ChaCha8Rng,
        mut pick: impl FnMut(&mut ChaCha8Rng) -> usize,
    ) -> Vec<Genome> {
        let lower = self.layout.lower_bounds();
        let upper = self.layout.upper_bounds();
        let mut out = Vec::with_capacity(size);
        while out.len() < size {
            let a = pick(rng);
            let b = pick(rng);
            let (mut c1, mut c2) = sbx_crossover(
                &pop[a].genome,
                &pop[b].genome,
                lower,
                upper,
                params.crossover_rate,
                params.sbx_eta,
                rng,
            );
            for c in [&mut c1, &mut c2] {
                polynomial_mutation(
                    c,
                    lower,
                    upper,
                    params.mutation_probability,
                    params.pm_eta,
                    rng,
                );
            }
            out.push(c1);
            if out.len() < size {
                out.push(c2);
            }
        }
        out
    }
}

struct Population {
    members: Vec<EvaluatedSolution>,
    crowding: Vec<f64>,
}

/// Elitist truncation of `pool` to `size` by front, then crowding distance.
fn survive(pool: Vec<EvaluatedSolution>, size: usize) -> Population {
    let fronts = fast_nondominated_sort(&pool);
    let mut chosen: Vec<(usize, f64)> = Vec::with_capacity(size);
    for front in fronts {
        if chosen.len() >= size {
            break;
        }
        let objs: Vec<ObjectiveVector> = front.iter().map(|&i| pool[i].objectives).collect();
        let dist = crowding_distance(&objs);
        let mut ranked: Vec<(usize, f64)> = front.into_iter().zip(dist).collect();
        let room = size - chosen.len();
        if ranked.len() > room {
            // stable: equal distances keep pool order
            ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
            ranked.truncate(room);
        }
        chosen.extend(ranked);
    }
    let mut slots: Vec<Option<EvaluatedSolution>> = pool.into_iter().map(Some).collect();
    let (members, crowding) = chosen
        .into_iter()
        .map(|(i, d)| (slots[i].take().expect("chosen once"), d))
        .unzip();
    Population { members, crowding }
}

fn first_front(members: &[EvaluatedSolution]) -> Vec<usize> {
    fast_nondominated_sort(members)
        .into_iter()
        .next()
        .unwrap_or_default()
}

fn stats(
    generation: usize,
    pop: &Population,
    reference: Option<&ObjectiveVector>,
) -> GenerationStats {
    let feasible: Vec<&EvaluatedSolution> =
        pop.members.iter().filter(|m| m.is_feasible()).collect();
    let best = (!feasible.is_empty()).then(|| {
        let min = |k: usize| {
            feasible
                .iter()
                .map(|m| m.objectives.get(k))
                .fold(f64::INFINITY, f64::min)
        };
        ObjectiveVector::new(min(0), min(1), min(2))
    });
    let hv = reference.map_or(0.0, |r| {
        let front: Vec<ObjectiveVector> = first_front(&pop.members)
            .into_iter()
            .map(|i| &pop.members[i])
            .filter(|m| m.is_feasible())
            .map(|m| m.objectives)
            .filter(|o| o.as_array().iter().zip(r.as_array()).all(|(a, b)| *a < b))
            .collect();
        hypervolume(&front, r)
    });
    GenerationStats {
        generation,
        n_feasible: feasible.len(),
        best,
        hypervolume: hv,
    }
}

/// Reference point from the first front, once that front is entirely feasible.
fn feasible_reference(members: &[EvaluatedSolution]) -> Option<ObjectiveVector> {
    let front = first_front(members);
    if front.iter().any(|&i| !members[i].is_feasible()) {
        return None;
    }
    let objs: Vec<ObjectiveVector> = front.iter().map(|&i| members[i].objectives).collect();
    reference_from_nadir(&objs)
}

pub fn evolve(scenario: &Scenario, params: &MoeaParams) -> Result<ParetoArchive> {
    evolve_with(scenario, params, |_| {})
}

/// As [`evolve`], calling `observer` after every generation.
pub fn evolve_with(
    scenario: &Scenario,
    params: &MoeaParams,
    mut observer: impl FnMut(&GenerationStats),
) -> Result<ParetoArchive> {
    let problem = Problem::new(scenario, params)?;
    let ps = params.population_size;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let initial = problem.evaluate_all(problem.random_population(ps, &mut rng));
    let mut evaluations = ps;
    let mut pop = survive(initial, ps);

    let mut reference = None;
    let mut history = Vec::with_capacity(params.max_generations);
    for generation in 1..=params.max_generations {
        if generation > 1 {
            let children = problem.offspring(&pop.members, &pop.crowding, ps, params, &mut rng);
            let children = problem.evaluate_all(children);
            evaluations += children.len();

            let mut pool = pop.members;
            pool.extend(children);
            pop = survive(pool, ps);
        }
        if reference.is_none() {
            reference = feasible_reference(&pop.members);
        }
        let s = stats(generation, &pop, reference.as_ref());
        observer(&s);
        history.push(s);
    }

    let members = first_front(&pop.members)
        .into_iter()
        .map(|i| pop.members[i].clone())
        .collect();
    Ok(ParetoArchive {
        members,
        history,
        reference_point: reference,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::Genome;
    use crate::moea::constrained_dominates;

    fn sol(f: [f64; 3], cv: f64) -> EvaluatedSolution {
        EvaluatedSolution {
            genome: Genome(vec![]),
            objectives: ObjectiveVector::new(f[0], f[1], f[2]),
            cv,
        }
    }

    #[test]
    fn params_validation() {
        assert!(MoeaParams::default().validate().is_ok());
        for bad in [
            MoeaParams {
                population_size: 5,
                ..Default::default()
            },
            MoeaParams {
                population_size: 2,
                ..Default::default()
            },
            MoeaParams {
                max_generations: 0,
                ..Default::default()
            },
            MoeaParams {
                crossover_rate: 1.5,
                ..Default::default()
            },
            MoeaParams {
                mutation_probability: -0.1,
                ..Default::default()
            },
            MoeaParams {
                sbx_eta: 0.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidParams(_))));
        }
    }

    #[test]
    fn survival_prefers_feasible_and_keeps_size() {
        let pool = vec![
            sol([1.0, 1.0, 1.0], 5.0),
            sol([3.0, 3.0, 3.0], 0.0),
            sol([2.0, 4.0, 3.0], 0.0),
            sol([4.0, 2.0, 3.0], 0.0),
            sol([9.0, 9.0, 9.0], 0.0),
            sol([0.0, 0.0, 0.0], 1.0),
        ];
        let pop = survive(pool, 4);
        assert_eq!(pop.members.len(), 4);
        assert!(pop.members.iter().all(|m| m.cv == 0.0));
        // a dominated feasible point still outranks every infeasible one
        assert!(pop.members.iter().any(|m| m.objectives.f1 == 9.0));
    }

    #[test]
    fn truncation_drops_most_crowded() {
        // 5 non-dominated points on a line; the middle ones compete
        let pool: Vec<_> = [0.0, 1.0, 1.1, 3.0, 4.0]
            .iter()
            .map(|&x| sol([x, 4.0 - x, 0.0], 0.0))
            .collect();
        let pop = survive(pool, 4);
        let xs: Vec<f64> = pop.members.iter().map(|m| m.objectives.f1).collect();
        assert!(xs.contains(&0.0) && xs.contains(&4.0));
        assert_eq!(xs.len(), 4);
        // 1.0 and 1.1 are the most crowded pair; one of them goes
        assert!(!(xs.contains(&1.0) && xs.contains(&1.1)));
        for m in &pop.members {
            assert!(!pop.members.iter().any(|o| constrained_dominates(o, m)));
        }
    }
}
