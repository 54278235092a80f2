//! Small hand-built instances shared by tests, examples and the CLI.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::ModelError;
use crate::model::{
    AccessFactor, AccessTable, Capacity, DataBlock, Instance, MemType, MemoryBank, ProcType,
    Processor, Task, TaskId, Time,
};

/// LOW transfers at one time unit per size unit, both high-speed types at half that.
pub fn default_access() -> AccessTable {
    AccessTable::uniform(
        AccessFactor::new(1, 2),
        AccessFactor::new(1, 2),
        AccessFactor::ONE,
    )
}

pub fn general_procs(n: usize) -> Vec<Processor> {
    (0..n)
        .map(|id| Processor {
            id,
            ptype: ProcType::General,
            group: 0,
        })
        .collect()
}

/// One HIGH2 bank with the given capacity (id 0) and one unbounded LOW bank (id 1).
pub fn high2_and_low(high2: u64) -> Vec<MemoryBank> {
    vec![
        MemoryBank {
            id: 0,
            mtype: MemType::High2,
            capacity: Capacity::Finite(high2),
            group: 0,
        },
        MemoryBank {
            id: 1,
            mtype: MemType::Low,
            capacity: Capacity::Unbounded,
            group: 0,
        },
    ]
}

/// Tasks A=0, B=1, C=2 with edges A->B, A->C; block d (size 10) produced by A
/// and consumed by B and C; two general processors; processing time 15
/// everywhere; HIGH2 of capacity 10 and an unbounded LOW bank.
pub fn tiny3() -> Instance {
    let tasks = (0..3).map(|i| Task::new(i, vec![(0, 15), (1, 15)])).collect();
    let blocks = vec![DataBlock {
        id: 0,
        size: 10,
        producer: Some(0),
        consumers: vec![1, 2],
    }];
    Instance::new(
        tasks,
        blocks,
        vec![(0, 1), (0, 2)],
        general_procs(2),
        high2_and_low(10),
        default_access(),
    )
    .expect("tiny3 is valid")
}

/// One task, one processor, no blocks.
pub fn single_task(pt: Time) -> Instance {
    Instance::new(
        vec![Task::new(0, vec![(0, pt)])],
        vec![],
        vec![],
        general_procs(1),
        high2_and_low(10),
        default_access(),
    )
    .expect("single task is valid")
}

/// One task that may only run on processor 0 of two.
pub fn two_procs_one_candidate() -> Instance {
    Instance::new(
        vec![Task::new(0, vec![(0, 27)])],
        vec![],
        vec![],
        general_procs(2),
        high2_and_low(10),
        default_access(),
    )
    .expect("valid")
}

/// `n` unit tasks on one processor with the given explicit edges.
pub fn with_edges(n: usize, edges: &[(TaskId, TaskId)]) -> Result<Instance, ModelError> {
    Instance::new(
        (0..n).map(|i| Task::new(i, vec![(0, 1)])).collect(),
        vec![],
        edges.to_vec(),
        general_procs(1),
        high2_and_low(10),
        default_access(),
    )
}

/// Independent tasks with the given processing times on `procs` general processors.
pub fn independent(times: &[Time], procs: usize) -> Instance {
    Instance::new(
        times
            .iter()
            .enumerate()
            .map(|(i, &t)| Task::new(i, (0..procs).map(|p| (p, t)).collect()))
            .collect(),
        vec![],
        vec![],
        general_procs(procs),
        high2_and_low(10),
        default_access(),
    )
    .expect("valid")
}
