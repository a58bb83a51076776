//! Constrained mixed-variable NSGA-II.
//!
//! Variation works on the continuous genome; the discrete charge/idle/
//! discharge states appear only when a genome is decoded. Survivors are
//! chosen by feasibility-first non-dominated sorting with crowding distance.

mod dominance;
mod nsga2;
mod operators;
mod repair;

pub use dominance::{constrained_dominates, crowding_distance, fast_nondominated_sort};
pub use nsga2::{evolve, evolve_with, GenerationStats, MoeaParams, ParetoArchive};
pub use operators::{polynomial_mutation, sbx_crossover, tournament_select};
pub use repair::repair_genome;

pub(crate) use nsga2::Problem;
