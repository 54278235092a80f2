//! Incremental schedule builder shared by the constructive heuristics.
//!
//! Tasks are appended to the end of processor sequences in a topological
//! order, so the start time of a committed task never changes afterwards.
//! A block whose consumers are not all committed yet is treated as alive
//! until the end of time; its release is fixed when the last consumer
//! commits. Every capacity check therefore runs against an over-estimate of
//! the final occupancy.

use alloc::vec;
use alloc::vec::Vec;

use crate::eval::{bank_preference, window_peak};
use crate::graph::{self, SeqLinks, TaskDurations};
use crate::model::{BlockId, Capacity, Instance, MemId, MemType, ProcId, Solution, TaskId, Time};

const OPEN: Time = Time::MAX;

/// Result of tentatively placing a task on a processor.
#[derive(Clone, Debug)]
pub(crate) struct Trial {
    pub task: TaskId,
    pub proc: ProcId,
    pub start: Time,
    pub durations: TaskDurations,
    /// Blocks allocated by this trial: initial inputs first, then outputs.
    pub allocs: Vec<(BlockId, MemId)>,
}

impl Trial {
    pub fn end(&self) -> Time {
        self.start + self.durations.total()
    }
}

pub(crate) struct Builder<'a> {
    inst: &'a Instance,
    pub assignment: Vec<Option<ProcId>>,
    pub sequences: Vec<Vec<TaskId>>,
    pub allocation: Vec<Option<MemId>>,
    pub start: Vec<Time>,
    pub durations: Vec<TaskDurations>,
    enter: Vec<Time>,
    release: Vec<Time>,
    pending_consumers: Vec<usize>,
    pending_preds: Vec<usize>,
    resident: Vec<Vec<BlockId>>,
    pub busy: Vec<Time>,
    committed: usize,
}

impl<'a> Builder<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let n = inst.num_tasks();
        Builder {
            inst,
            assignment: vec![None; n],
            sequences: vec![Vec::new(); inst.num_procs()],
            allocation: vec![None; inst.num_blocks()],
            start: vec![0; n],
            durations: graph::default_durations(inst),
            enter: vec![0; inst.num_blocks()],
            release: vec![OPEN; inst.num_blocks()],
            pending_consumers: inst.blocks().iter().map(|b| b.consumers.len()).collect(),
            pending_preds: (0..n).map(|t| inst.preds(t).len()).collect(),
            resident: vec![Vec::new(); inst.memories().len()],
            busy: vec![0; inst.num_procs()],
            committed: 0,
        }
    }

    pub fn is_done(&self) -> bool {
        self.committed == self.inst.num_tasks()
    }

    /// Unassigned tasks whose predecessors are all committed, by id.
    pub fn frontier(&self) -> Vec<TaskId> {
        (0..self.inst.num_tasks())
            .filter(|&t| self.assignment[t].is_none() && self.pending_preds[t] == 0)
            .collect()
    }

    pub fn end(&self, t: TaskId) -> Time {
        self.start[t] + self.durations[t].total()
    }

    /// Earliest time `t` may start moving in, from precedence alone.
    pub fn data_ready(&self, t: TaskId) -> Time {
        self.inst
            .preds(t)
            .iter()
            .map(|&p| self.end(p))
            .max()
            .unwrap_or(0)
    }

    pub fn links(&self) -> SeqLinks {
        SeqLinks::from_sequences(self.inst.num_tasks(), &self.sequences)
    }

    fn fits(&self, mem: MemId, size: u64, from: Time, to: Time, extra: &[(MemId, Time, Time, u64)]) -> bool {
        let cap = match self.inst.memory(mem).capacity {
            Capacity::Unbounded => return true,
            Capacity::Finite(c) => c,
        };
        if size > cap {
            return false;
        }
        let mut iv: Vec<(Time, Time, u64)> = self.resident[mem]
            .iter()
            .map(|&b| (self.enter[b], self.release[b], self.inst.block(b).size))
            .collect();
        iv.extend(extra.iter().filter(|e| e.0 == mem).map(|e| (e.1, e.2, e.3)));
        window_peak(&iv, from, to) + size <= cap
    }

    fn pick_bank(&self, prefs: &[MemId], size: u64, from: Time, to: Time, extra: &[(MemId, Time, Time, u64)]) -> MemId {
        prefs
            .iter()
            .copied()
            .find(|&m| self.fits(m, size, from, to, extra))
            .unwrap_or(self.inst.low_bank())
    }

    /// Places `task` on `proc` after the current tail of its sequence.
    /// Outputs are allocated in `output_order`.
    pub fn trial(&self, task: TaskId, proc: ProcId, output_order: &[BlockId]) -> Trial {
        let inst = self.inst;
        let t = inst.task(task);
        let p = inst.processor(proc);
        let prefs = bank_preference(inst, p.group);
        let mut allocs = Vec::new();
        let mut extra: Vec<(MemId, Time, Time, u64)> = Vec::new();

        let mut move_in = 0;
        for &b in &t.inputs {
            let mem = match self.allocation[b] {
                Some(m) => m,
                None => {
                    // Initial input seen for the first time. Only its home
                    // task may put it in a local bank.
                    let blk = inst.block(b);
                    let m = if blk.home_task() == Some(task) {
                        self.pick_bank(&prefs, blk.size, 0, OPEN, &extra)
                    } else {
                        let shared: Vec<MemId> = prefs
                            .iter()
                            .copied()
                            .filter(|&m| inst.memory(m).mtype != MemType::High1)
                            .collect();
                        self.pick_bank(&shared, blk.size, 0, OPEN, &extra)
                    };
                    let size = blk.size;
                    extra.push((m, 0, OPEN, size));
                    allocs.push((b, m));
                    m
                }
            };
            move_in += inst.transfer(b, mem, p.ptype);
        }
        let pt = t.proc_time(proc).expect("trial on a candidate processor");

        let mut start = self.data_ready(task);
        if let Some(&last) = self.sequences[proc].last() {
            let cur = TaskDurations {
                move_in,
                proc: pt,
                move_out: 0,
            };
            start = start.max(self.start[last] + graph::seq_arc_length(&self.durations[last], &cur));
        }

        let mut move_out = 0;
        for &b in output_order {
            let blk = inst.block(b);
            // The release is unknown until every consumer has run.
            let m = self.pick_bank(&prefs, blk.size, start, OPEN, &extra);
            extra.push((m, start, OPEN, blk.size));
            allocs.push((b, m));
            move_out += inst.transfer(b, m, p.ptype);
        }

        Trial {
            task,
            proc,
            start,
            durations: TaskDurations {
                move_in,
                proc: pt,
                move_out,
            },
            allocs,
        }
    }

    pub fn commit(&mut self, trial: Trial) {
        let inst = self.inst;
        let task = trial.task;
        let end = trial.end();
        for &(b, m) in &trial.allocs {
            self.allocation[b] = Some(m);
            self.enter[b] = if inst.block(b).producer.is_some() { trial.start } else { 0 };
            self.release[b] = OPEN;
            self.resident[m].push(b);
        }
        self.assignment[task] = Some(trial.proc);
        self.sequences[trial.proc].push(task);
        self.start[task] = trial.start;
        self.durations[task] = trial.durations;
        self.busy[trial.proc] += trial.durations.total();
        self.committed += 1;

        for &b in &inst.task(task).outputs {
            if inst.block(b).consumers.is_empty() {
                self.release[b] = end;
            }
        }
        for &b in &inst.task(task).inputs {
            self.pending_consumers[b] -= 1;
            if self.pending_consumers[b] == 0 {
                let rel = inst
                    .block(b)
                    .consumers
                    .iter()
                    .map(|&c| self.end(c))
                    .max()
                    .unwrap_or(0);
                self.release[b] = rel;
            }
        }
        for &s in inst.succs(task) {
            self.pending_preds[s] -= 1;
        }
    }

    /// Returns the solution. Blocks never touched by a trial are initial
    /// blocks without consumers; their lifetime is empty and they go to LOW.
    pub fn finish(self) -> Solution {
        let low = self.inst.low_bank();
        let allocation = self.allocation.iter().map(|a| a.unwrap_or(low)).collect();
        Solution {
            assignment: self.assignment.iter().map(|a| a.expect("every task committed")).collect(),
            sequences: self.sequences,
            allocation,
        }
    }
}
