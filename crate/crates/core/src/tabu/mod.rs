//! Two-layer tabu search.
//!
//! The outer layer changes task sequences and assignments: inner tasks of a
//! critical block are shifted to its head or tail, the first and last task
//! of a block may move to any inner position, and critical tasks may be
//! reinserted anywhere on their own processor or moved to another one.
//! Tabu entries forbid re-creating the task order a shift reversed, or
//! returning a task to the processor it left. Every neighbour is screened with the approximate
//! evaluator; the best `kmax` are reallocated and simulated exactly. The
//! inner layer is the memory reallocation run on each evaluated neighbour;
//! every new best solution additionally gets an allocation descent.

mod neighborhood;
mod search;
mod tabu_list;

pub use neighborhood::{enumerate_neighborhood, insertion_window, Direction, Move, MoveKind};
pub use search::{
    Polish,
    random_perturbation, solve, solve_with, tabu_step, SearchParams, SearchState, SolveResult,
    StepOutcome, TraceRow,
};
pub use tabu_list::{TabuKey, TabuList};
