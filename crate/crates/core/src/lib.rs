//! Data allocation and task scheduling on heterogeneous multiprocessors with
//! capacity-limited fast memories.
//!
//! A problem [`Instance`] is a DAG of tasks that exchange data blocks. A
//! [`Solution`] assigns every task to a processor, orders the tasks of each
//! processor and places every data block in a memory bank. Each task runs in
//! three phases: its input blocks are moved in, it is processed, and its
//! output blocks are moved out. Transfer times depend on the memory type a
//! block lives in, so placing blocks in fast memory shortens the schedule,
//! but fast banks have a capacity that must hold at every instant.
//!
//! The crate provides:
//!  - [`graph`]: topological ordering, head/tail/slack metrics and critical blocks,
//!  - [`eval`]: exact schedule simulation, peak-memory checks and a fast
//!    approximate makespan used to screen neighbours,
//!  - [`greedy`]: the priority-driven constructive heuristic,
//!  - [`realloc`]: critical-usage driven memory reallocation for fixed sequences,
//!  - [`tabu`]: the two-layer tabu search,
//!  - [`lb`]: the load-balancing baseline,
//!  - [`ilp`]: export of a time-indexed integer program and an exhaustive oracle,
//!  - [`generate`]: a seeded random instance generator,
//!  - [`format`]: the versioned text formats for instances and solutions.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod clock;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod format;
pub mod generate;
pub mod graph;
pub mod greedy;
pub mod ilp;
pub mod lb;
pub mod model;
mod partial;
pub mod realloc;
pub mod tabu;

pub use crate::clock::{Clock, StepClock, WorkClock};
pub use crate::error::{CycleError, ModelError};
pub use crate::eval::{is_feasible, simulate, Feasibility, Schedule};
pub use crate::graph::{compute_metrics, GraphMetrics, TaskDurations};
pub use crate::greedy::{greedy_assign, PriorityKind, PriorityStrategy};
pub use crate::lb::load_balance_schedule;
pub use crate::model::{
    AccessFactor, AccessTable, BlockId, Capacity, DataBlock, Instance, MemId, MemType, MemoryBank,
    ProcId, ProcType, Processor, Solution, Task, TaskId, Time, Violation,
};
pub use crate::realloc::reallocate;
pub use crate::tabu::{solve, SearchParams, SolveResult};
