use alloc::vec::Vec;
use core::fmt;

use crate::model::{BlockId, MemId, MemType, ProcId, ProcType, TaskId};

/// A directed cycle in the precedence graph, optionally closed by processor
/// sequence arcs. The listed tasks form the cycle in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleError {
    pub cycle: Vec<TaskId>,
}

impl fmt::Display for CycleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("cycle:")?;
        for t in &self.cycle {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

impl core::error::Error for CycleError {}

/// Semantic errors raised when an [`Instance`](crate::Instance) is built.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("non-dense ids in {section}: expected {expected}, found {found}")]
    NonDenseId {
        section: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("dangling id: {what} {id} does not exist")]
    DanglingId { what: &'static str, id: usize },
    #[error("task {0} has an empty candidate processor set")]
    EmptyCandidates(TaskId),
    #[error("task {task} lists processor {proc} twice")]
    DuplicateCandidate { task: TaskId, proc: ProcId },
    #[error("block {0} has size 0")]
    ZeroSize(BlockId),
    #[error("block {0} is consumed by its own producer")]
    ProducerConsumes(BlockId),
    #[error("edge {0} -> {0} is a self loop")]
    SelfLoop(TaskId),
    #[error("{0}")]
    Cycle(CycleError),
    #[error("memory bank {0} is a high-speed bank with unbounded capacity")]
    UnboundedHighBank(MemId),
    #[error("instance has no low-speed memory bank")]
    NoLowBank,
    #[error("missing access factor for ({0:?}, {1:?})")]
    MissingAccessFactor(ProcType, MemType),
    #[error("access factor for ({0:?}, {1:?}) must be a positive ratio")]
    InvalidAccessFactor(ProcType, MemType),
}
