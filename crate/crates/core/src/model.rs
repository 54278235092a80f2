//! Instance and solution data model.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::ModelError;
use crate::graph;

pub type TaskId = usize;
pub type BlockId = usize;
pub type ProcId = usize;
pub type MemId = usize;

/// Time and size units are plain integers.
pub type Time = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcType {
    HighSpeed,
    General,
}

impl ProcType {
    pub const ALL: [ProcType; 2] = [ProcType::HighSpeed, ProcType::General];

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MemType {
    /// Global high-speed memory, shared by every processor.
    High2,
    /// Local high-speed memory of one processor group.
    High1,
    Low,
}

impl MemType {
    pub const ALL: [MemType; 3] = [MemType::High2, MemType::High1, MemType::Low];

    fn index(self) -> usize {
        self as usize
    }

    pub fn is_high(self) -> bool {
        self != MemType::Low
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Capacity {
    Finite(u64),
    Unbounded,
}

impl Capacity {
    pub fn admits(self, volume: u64) -> bool {
        match self {
            Capacity::Finite(c) => volume <= c,
            Capacity::Unbounded => true,
        }
    }
}

/// Transfer time per size unit, as an exact ratio `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AccessFactor {
    pub num: u64,
    pub den: u64,
}

impl AccessFactor {
    pub const ONE: AccessFactor = AccessFactor { num: 1, den: 1 };

    pub const fn new(num: u64, den: u64) -> Self {
        AccessFactor { num, den }
    }

    /// `ceil(size * num / den)`.
    pub fn apply(self, size: u64) -> Time {
        let prod = size as u128 * self.num as u128;
        prod.div_ceil(self.den as u128) as Time
    }

    fn is_valid(self) -> bool {
        self.num > 0 && self.den > 0
    }
}

impl fmt::Display for AccessFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Access factors keyed by (processor type, memory type).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AccessTable {
    factors: [[Option<AccessFactor>; 3]; 2],
}

impl AccessTable {
    /// The same factor for every processor type.
    pub fn uniform(high2: AccessFactor, high1: AccessFactor, low: AccessFactor) -> Self {
        let mut t = AccessTable::default();
        for p in ProcType::ALL {
            t.set(p, MemType::High2, high2);
            t.set(p, MemType::High1, high1);
            t.set(p, MemType::Low, low);
        }
        t
    }

    pub fn set(&mut self, proc: ProcType, mem: MemType, factor: AccessFactor) {
        self.factors[proc.index()][mem.index()] = Some(factor);
    }

    pub fn get(&self, proc: ProcType, mem: MemType) -> Option<AccessFactor> {
        self.factors[proc.index()][mem.index()]
    }

    pub fn entries(&self) -> impl Iterator<Item = (ProcType, MemType, AccessFactor)> + '_ {
        ProcType::ALL.into_iter().flat_map(move |p| {
            MemType::ALL
                .into_iter()
                .filter_map(move |m| self.get(p, m).map(|f| (p, m, f)))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    /// `(processor, processing time)` for every candidate processor, sorted by processor.
    pub proc_times: Vec<(ProcId, Time)>,
    /// Blocks consumed, sorted. Derived from the block table.
    pub inputs: Vec<BlockId>,
    /// Blocks produced, sorted. Derived from the block table.
    pub outputs: Vec<BlockId>,
}

impl Task {
    pub fn new(id: TaskId, mut proc_times: Vec<(ProcId, Time)>) -> Self {
        proc_times.sort_unstable();
        Task {
            id,
            proc_times,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn candidates(&self) -> impl Iterator<Item = ProcId> + '_ {
        self.proc_times.iter().map(|&(p, _)| p)
    }

    pub fn is_candidate(&self, proc: ProcId) -> bool {
        self.proc_time(proc).is_some()
    }

    pub fn proc_time(&self, proc: ProcId) -> Option<Time> {
        self.proc_times
            .binary_search_by_key(&proc, |&(p, _)| p)
            .ok()
            .map(|i| self.proc_times[i].1)
    }

    pub fn min_proc_time(&self) -> Time {
        self.proc_times.iter().map(|&(_, t)| t).min().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataBlock {
    pub id: BlockId,
    pub size: u64,
    /// `None` marks an initial-input block.
    pub producer: Option<TaskId>,
    /// Consumer tasks, sorted and deduplicated on construction.
    pub consumers: Vec<TaskId>,
}

impl DataBlock {
    /// The task whose processor group decides which local fast bank may
    /// hold the block: the producer, or the lowest-id consumer of an
    /// initial block.
    pub fn home_task(&self) -> Option<TaskId> {
        self.producer.or_else(|| self.consumers.first().copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Processor {
    pub id: ProcId,
    pub ptype: ProcType,
    pub group: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemoryBank {
    pub id: MemId,
    pub mtype: MemType,
    pub capacity: Capacity,
    /// Owning processor group; only meaningful for [`MemType::High1`].
    pub group: u32,
}

/// A validated problem instance. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    tasks: Vec<Task>,
    blocks: Vec<DataBlock>,
    edges: Vec<(TaskId, TaskId)>,
    processors: Vec<Processor>,
    memories: Vec<MemoryBank>,
    access: AccessTable,
    preds: Vec<Vec<TaskId>>,
    succs: Vec<Vec<TaskId>>,
    low_bank: MemId,
}

impl Instance {
    /// Builds and validates an instance. Task inputs/outputs are derived from
    /// the block table; any values already present on `tasks` are replaced.
    pub fn new(
        mut tasks: Vec<Task>,
        mut blocks: Vec<DataBlock>,
        mut edges: Vec<(TaskId, TaskId)>,
        processors: Vec<Processor>,
        memories: Vec<MemoryBank>,
        access: AccessTable,
    ) -> Result<Self, ModelError> {
        check_dense("PROCS", processors.iter().map(|p| p.id))?;
        check_dense("MEMS", memories.iter().map(|m| m.id))?;
        check_dense("TASKS", tasks.iter().map(|t| t.id))?;
        check_dense("BLOCKS", blocks.iter().map(|b| b.id))?;

        let n = tasks.len();
        for m in &memories {
            if m.mtype.is_high() && m.capacity == Capacity::Unbounded {
                return Err(ModelError::UnboundedHighBank(m.id));
            }
        }
        let low_bank = memories
            .iter()
            .find(|m| m.mtype == MemType::Low)
            .map(|m| m.id)
            .ok_or(ModelError::NoLowBank)?;

        for p in &processors {
            for m in &memories {
                match access.get(p.ptype, m.mtype) {
                    None => return Err(ModelError::MissingAccessFactor(p.ptype, m.mtype)),
                    Some(f) if !f.is_valid() => {
                        return Err(ModelError::InvalidAccessFactor(p.ptype, m.mtype))
                    }
                    Some(_) => {}
                }
            }
        }

        for t in &mut tasks {
            t.proc_times.sort_unstable();
            if t.proc_times.is_empty() {
                return Err(ModelError::EmptyCandidates(t.id));
            }
            for w in t.proc_times.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(ModelError::DuplicateCandidate {
                        task: t.id,
                        proc: w[0].0,
                    });
                }
            }
            for &(p, _) in &t.proc_times {
                if p >= processors.len() {
                    return Err(ModelError::DanglingId {
                        what: "processor",
                        id: p,
                    });
                }
            }
            t.inputs.clear();
            t.outputs.clear();
        }

        for b in &mut blocks {
            if b.size == 0 {
                return Err(ModelError::ZeroSize(b.id));
            }
            b.consumers.sort_unstable();
            b.consumers.dedup();
            if let Some(p) = b.producer {
                if p >= n {
                    return Err(ModelError::DanglingId {
                        what: "task",
                        id: p,
                    });
                }
                if b.consumers.binary_search(&p).is_ok() {
                    return Err(ModelError::ProducerConsumes(b.id));
                }
                tasks[p].outputs.push(b.id);
            }
            for &c in &b.consumers {
                if c >= n {
                    return Err(ModelError::DanglingId {
                        what: "task",
                        id: c,
                    });
                }
                tasks[c].inputs.push(b.id);
            }
        }

        for &(u, v) in &edges {
            for x in [u, v] {
                if x >= n {
                    return Err(ModelError::DanglingId {
                        what: "task",
                        id: x,
                    });
                }
            }
            if u == v {
                return Err(ModelError::SelfLoop(u));
            }
        }
        edges.sort_unstable();
        edges.dedup();

        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        let induced = blocks.iter().flat_map(|b| {
            b.producer
                .into_iter()
                .flat_map(move |p| b.consumers.iter().map(move |&c| (p, c)))
        });
        for (u, v) in edges.iter().copied().chain(induced) {
            preds[v].push(u);
            succs[u].push(v);
        }
        for l in preds.iter_mut().chain(succs.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }

        graph::static_topo_order(&preds, &succs).map_err(ModelError::Cycle)?;

        Ok(Instance {
            tasks,
            blocks,
            edges,
            processors,
            memories,
            access,
            preds,
            succs,
            low_bank,
        })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, id: TaskId) -> &Task {
        &self.tasks[id]
    }

    pub fn blocks(&self) -> &[DataBlock] {
        &self.blocks
    }

    pub fn block(&self, id: BlockId) -> &DataBlock {
        &self.blocks[id]
    }

    /// Explicit precedence edges, sorted. Producer/consumer relations are not included.
    pub fn edges(&self) -> &[(TaskId, TaskId)] {
        &self.edges
    }

    pub fn processors(&self) -> &[Processor] {
        &self.processors
    }

    pub fn processor(&self, id: ProcId) -> &Processor {
        &self.processors[id]
    }

    pub fn memories(&self) -> &[MemoryBank] {
        &self.memories
    }

    pub fn memory(&self, id: MemId) -> &MemoryBank {
        &self.memories[id]
    }

    pub fn access(&self) -> &AccessTable {
        &self.access
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_procs(&self) -> usize {
        self.processors.len()
    }

    /// Direct predecessors: explicit edges plus producers of consumed blocks.
    pub fn preds(&self, t: TaskId) -> &[TaskId] {
        &self.preds[t]
    }

    /// Direct successors: explicit edges plus consumers of produced blocks.
    pub fn succs(&self, t: TaskId) -> &[TaskId] {
        &self.succs[t]
    }

    /// The lowest-id low-speed bank.
    pub fn low_bank(&self) -> MemId {
        self.low_bank
    }

    /// Transfer time of block `b` between bank `mem` and a processor of type `ptype`.
    pub fn transfer(&self, b: BlockId, mem: MemId, ptype: ProcType) -> Time {
        let f = self
            .access
            .get(ptype, self.memories[mem].mtype)
            .expect("access factors are validated on construction");
        f.apply(self.blocks[b].size)
    }

    /// Copy of this instance with new memory capacities (one per bank).
    pub fn with_capacities(&self, caps: &[Capacity]) -> Result<Instance, ModelError> {
        let mut mems = self.memories.clone();
        for (m, &c) in mems.iter_mut().zip(caps) {
            m.capacity = c;
        }
        Instance::new(
            self.tasks.clone(),
            self.blocks.clone(),
            self.edges.clone(),
            self.processors.clone(),
            mems,
            self.access.clone(),
        )
    }
}

fn check_dense(section: &'static str, ids: impl Iterator<Item = usize>) -> Result<(), ModelError> {
    for (expected, found) in ids.enumerate() {
        if expected != found {
            return Err(ModelError::NonDenseId {
                section,
                expected,
                found,
            });
        }
    }
    Ok(())
}

/// Task assignment, per-processor sequences and block allocation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Solution {
    pub assignment: Vec<ProcId>,
    pub sequences: Vec<Vec<TaskId>>,
    pub allocation: Vec<MemId>,
}

impl Solution {
    /// Builds the assignment vector from per-processor sequences.
    pub fn from_sequences(num_tasks: usize, sequences: Vec<Vec<TaskId>>, allocation: Vec<MemId>) -> Self {
        let mut assignment = vec![0; num_tasks];
        for (p, seq) in sequences.iter().enumerate() {
            for &t in seq {
                assignment[t] = p;
            }
        }
        Solution {
            assignment,
            sequences,
            allocation,
        }
    }

    /// Position of every task inside its processor sequence.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.assignment.len()];
        for seq in &self.sequences {
            for (i, &t) in seq.iter().enumerate() {
                pos[t] = i;
            }
        }
        pos
    }
}

/// A structural defect of a [`Solution`] relative to an [`Instance`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    AssignmentLength { expected: usize, found: usize },
    UnknownProcessor { task: TaskId, proc: ProcId },
    NotCandidate { task: TaskId, proc: ProcId },
    SequenceCount { expected: usize, found: usize },
    UnknownTaskInSequence { proc: ProcId, task: TaskId },
    DuplicateInSequences(TaskId),
    MissingFromSequences(TaskId),
    WrongSequence { task: TaskId, assigned: ProcId, found: ProcId },
    BlockNotAllocated(BlockId),
    UnknownBank { block: BlockId, mem: MemId },
    ExtraAllocation { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::AssignmentLength { expected, found } => {
                write!(f, "assignment covers {found} tasks, expected {expected}")
            }
            Violation::UnknownProcessor { task, proc } => {
                write!(f, "task {task} assigned to unknown processor {proc}")
            }
            Violation::NotCandidate { task, proc } => {
                write!(f, "task {task} assigned to non-candidate processor {proc}")
            }
            Violation::SequenceCount { expected, found } => {
                write!(f, "{found} sequences, expected {expected}")
            }
            Violation::UnknownTaskInSequence { proc, task } => {
                write!(f, "sequence of processor {proc} names unknown task {task}")
            }
            Violation::DuplicateInSequences(t) => write!(f, "task {t} appears more than once"),
            Violation::MissingFromSequences(t) => write!(f, "task {t} appears in no sequence"),
            Violation::WrongSequence {
                task,
                assigned,
                found,
            } => write!(
                f,
                "task {task} assigned to processor {assigned} but sequenced on {found}"
            ),
            Violation::BlockNotAllocated(b) => write!(f, "block {b} is not allocated"),
            Violation::UnknownBank { block, mem } => {
                write!(f, "block {block} allocated to unknown bank {mem}")
            }
            Violation::ExtraAllocation { expected, found } => {
                write!(f, "allocation has {found} entries, expected {expected}")
            }
        }
    }
}

impl Violation {
    pub fn to_message(&self) -> String {
        alloc::format!("{self}")
    }
}

/// Structural check of a solution: candidate processors, sequence coverage and
/// allocation totality. Capacity and acyclicity are checked by
/// [`is_feasible`](crate::eval::is_feasible).
pub fn validate_solution(inst: &Instance, sol: &Solution) -> Vec<Violation> {
    let n = inst.num_tasks();
    let np = inst.num_procs();
    let mut out = Vec::new();

    if sol.assignment.len() != n {
        out.push(Violation::AssignmentLength {
            expected: n,
            found: sol.assignment.len(),
        });
    }
    for (t, &p) in sol.assignment.iter().enumerate().take(n) {
        if p >= np {
            out.push(Violation::UnknownProcessor { task: t, proc: p });
        } else if !inst.task(t).is_candidate(p) {
            out.push(Violation::NotCandidate { task: t, proc: p });
        }
    }

    if sol.sequences.len() != np {
        out.push(Violation::SequenceCount {
            expected: np,
            found: sol.sequences.len(),
        });
    }
    let mut seen = vec![false; n];
    for (p, seq) in sol.sequences.iter().enumerate() {
        for &t in seq {
            if t >= n {
                out.push(Violation::UnknownTaskInSequence { proc: p, task: t });
                continue;
            }
            if seen[t] {
                out.push(Violation::DuplicateInSequences(t));
                continue;
            }
            seen[t] = true;
            if let Some(&a) = sol.assignment.get(t) {
                if a != p {
                    out.push(Violation::WrongSequence {
                        task: t,
                        assigned: a,
                        found: p,
                    });
                }
            }
        }
    }
    for (t, s) in seen.iter().enumerate() {
        if !s {
            out.push(Violation::MissingFromSequences(t));
        }
    }

    let nb = inst.num_blocks();
    for b in 0..nb {
        match sol.allocation.get(b) {
            None => out.push(Violation::BlockNotAllocated(b)),
            Some(&m) if m >= inst.memories().len() => {
                out.push(Violation::UnknownBank { block: b, mem: m })
            }
            Some(_) => {}
        }
    }
    if sol.allocation.len() > nb {
        out.push(Violation::ExtraAllocation {
            expected: nb,
            found: sol.allocation.len(),
        });
    }
    out
}
