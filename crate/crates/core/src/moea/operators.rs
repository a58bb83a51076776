//! Real-coded variation operators and binary tournament selection.

use rand::Rng;

use super::dominance::constrained_dominates;
use crate::encoding::Genome;
use crate::objectives::EvaluatedSolution;

/// Probability that SBX touches an individual gene of a mating pair.
const SBX_GENE_PROB: f64 = 0.5;
const SBX_MIN_GAP: f64 = 1e-14;

/// Binary tournament: constrained dominance, then larger crowding
/// distance, then a fair coin.
pub fn tournament_select<R: Rng + ?Sized>(
    pop: &[EvaluatedSolution],
    crowding: &[f64],
    rng: &mut R,
) -> usize {
    debug_assert!(pop.len() >= 2);
    let a = rng.random_range(0..pop.len());
    let mut b = rng.random_range(0..pop.len() - 1);
    if b >= a {
        b += 1;
    }
    tournament_winner(pop, crowding, a, b, rng)
}

pub(crate) fn tournament_winner<R: Rng + ?Sized>(
    pop: &[EvaluatedSolution],
    crowding: &[f64],
    a: usize,
    b: usize,
    rng: &mut R,
) -> usize {
    if constrained_dominates(&pop[a], &pop[b]) {
        a
    } else if constrained_dominates(&pop[b], &pop[a]) {
        b
    } else if crowding[a] > crowding[b] {
        a
    } else if crowding[b] > crowding[a] {
        b
    } else if rng.random_bool(0.5) {
        a
    } else {
        b
    }
}

fn sbx_spread(u: f64, beta: f64, eta: f64) -> f64 {
    let alpha = 2.0 - beta.powf(-(eta + 1.0));
    if u <= 1.0 / alpha {
        (u * alpha).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
    }
}

/// Bounded simulated binary crossover.
///
/// With probability `rate` the pair is recombined gene by gene; otherwise the
/// parents are returned unchanged.
pub fn sbx_crossover<R: Rng + ?Sized>(
    p1: &Genome,
    p2: &Genome,
    lower: &[f64],
    upper: &[f64],
    rate: f64,
    eta: f64,
    rng: &mut R,
) -> (Genome, Genome) {
    let mut c1 = p1.0.clone();
    let mut c2 = p2.0.clone();
    if !rng.random_bool(rate) {
        return (Genome(c1), Genome(c2));
    }
    for i in 0..c1.len() {
        if !rng.random_bool(SBX_GENE_PROB) {
            continue;
        }
        let (x1, x2) = (p1.0[i], p2.0[i]);
        if (x1 - x2).abs() <= SBX_MIN_GAP {
            continue;
        }
        let (y1, y2) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        let (lo, hi) = (lower[i], upper[i]);
        let u: f64 = rng.random();

        let beta_lo = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
        let a = 0.5 * ((y1 + y2) - sbx_spread(u, beta_lo, eta) * (y2 - y1));
        let beta_hi = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
        let b = 0.5 * ((y1 + y2) + sbx_spread(u, beta_hi, eta) * (y2 - y1));
        let (a, b) = (a.clamp(lo, hi), b.clamp(lo, hi));

        if rng.random_bool(0.5) {
            c1[i] = b;
            c2[i] = a;
        } else {
            c1[i] = a;
            c2[i] = b;
        }
    }
    (Genome(c1), Genome(c2))
}

/// Bounded polynomial mutation, each gene independently with `probability`.
pub fn polynomial_mutation<R: Rng + ?Sized>(
    genome: &mut Genome,
    lower: &[f64],
    upper: &[f64],
    probability: f64,
    eta: f64,
    rng: &mut R,
) {
    let power = 1.0 / (eta + 1.0);
    for (i, y) in genome.0.iter_mut().enumerate() {
        if !rng.random_bool(probability) {
            continue;
        }
        let (lo, hi) = (lower[i], upper[i]);
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        let d1 = (*y - lo) / span;
        let d2 = (hi - *y) / span;
        let u: f64 = rng.random();
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(power) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(power)
        };
        *y = (*y + dq * span).clamp(lo, hi);
    }
}
