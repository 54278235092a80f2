//! Schedule simulation, memory occupancy and feasibility.
//!
//! A task occupies its processor in three phases. Inputs are moved in from
//! their banks, the task is processed, outputs are moved out to their banks.
//! A task starts moving in once every precedence predecessor has moved out.
//! On a shared processor the next task may move its inputs in while the
//! previous one is still running, but processing waits until the previous
//! task has moved out.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{CycleError, ModelError};
use crate::graph::{self, GraphMetrics, SeqLinks, TaskDurations};
use crate::model::{
    validate_solution, AccessTable, BlockId, Capacity, Instance, MemId, MemType, ProcId, ProcType,
    Solution, TaskId, Time, Violation,
};

/// `ceil(size * factor)` for a block held in `mem` and accessed from `proc`.
pub fn transfer_time(
    size: u64,
    mem: MemType,
    proc: ProcType,
    table: &AccessTable,
) -> Result<Time, ModelError> {
    table
        .get(proc, mem)
        .map(|f| f.apply(size))
        .ok_or(ModelError::MissingAccessFactor(proc, mem))
}

/// Move-in, processing and move-out time of `task` if it ran on `proc` with
/// the blocks placed as in `allocation`.
pub fn durations_on(inst: &Instance, allocation: &[MemId], task: TaskId, proc: ProcId) -> TaskDurations {
    let t = inst.task(task);
    let ptype = inst.processor(proc).ptype;
    let sum = |blocks: &[BlockId]| -> Time {
        blocks
            .iter()
            .map(|&b| inst.transfer(b, allocation[b], ptype))
            .sum()
    };
    TaskDurations {
        move_in: sum(&t.inputs),
        proc: t.proc_time(proc).expect("assigned processor is a candidate"),
        move_out: sum(&t.outputs),
    }
}

pub fn task_durations(inst: &Instance, sol: &Solution) -> Vec<TaskDurations> {
    (0..inst.num_tasks())
        .map(|t| durations_on(inst, &sol.allocation, t, sol.assignment[t]))
        .collect()
}

/// Banks in the order the allocators try them for a processor of `group`:
/// global high-speed banks, then the group's local high-speed banks, then
/// the default low-speed bank. Ids ascend within each type.
pub fn bank_preference(inst: &Instance, group: u32) -> Vec<MemId> {
    let mems = inst.memories();
    let mut out: Vec<MemId> = mems
        .iter()
        .filter(|m| m.mtype == MemType::High2)
        .map(|m| m.id)
        .collect();
    out.extend(
        mems.iter()
            .filter(|m| m.mtype == MemType::High1 && m.group == group)
            .map(|m| m.id),
    );
    out.push(inst.low_bank());
    out
}

/// Interval `[enter, release)` during which a block occupies its bank.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Lifetime {
    pub enter: Time,
    pub release: Time,
}

/// Lifetimes from per-task move-in starts and move-out ends. An initial
/// block enters at time 0. A block without consumers is released when its
/// producer has moved out.
pub fn block_lifetimes(inst: &Instance, move_in_start: &[Time], move_out_end: &[Time]) -> Vec<Lifetime> {
    inst.blocks()
        .iter()
        .map(|b| {
            let enter = b.producer.map_or(0, |p| move_in_start[p]);
            let own_end = b.producer.map_or(0, |p| move_out_end[p]);
            let release = b
                .consumers
                .iter()
                .map(|&c| move_out_end[c])
                .max()
                .unwrap_or(own_end);
            Lifetime { enter, release }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub move_in_start: Vec<Time>,
    pub proc_start: Vec<Time>,
    pub proc_end: Vec<Time>,
    pub move_out_end: Vec<Time>,
    pub lifetimes: Vec<Lifetime>,
    pub makespan: Time,
}

impl Schedule {
    /// Builds the timeline from move-in start times and durations.
    pub fn from_starts(inst: &Instance, starts: Vec<Time>, durations: &[TaskDurations]) -> Self {
        let n = starts.len();
        let mut proc_start = vec![0; n];
        let mut proc_end = vec![0; n];
        let mut move_out_end = vec![0; n];
        for t in 0..n {
            let d = &durations[t];
            proc_start[t] = starts[t] + d.move_in;
            proc_end[t] = proc_start[t] + d.proc;
            move_out_end[t] = proc_end[t] + d.move_out;
        }
        let lifetimes = block_lifetimes(inst, &starts, &move_out_end);
        let makespan = move_out_end.iter().copied().max().unwrap_or(0);
        Schedule {
            move_in_start: starts,
            proc_start,
            proc_end,
            move_out_end,
            lifetimes,
            makespan,
        }
    }
}

/// Earliest-start timeline of a structurally valid solution.
pub fn simulate(inst: &Instance, sol: &Solution) -> Result<Schedule, CycleError> {
    let durations = task_durations(inst, sol);
    let links = SeqLinks::from_sequences(inst.num_tasks(), &sol.sequences);
    simulate_with(inst, &links, &durations)
}

pub fn simulate_with(
    inst: &Instance,
    links: &SeqLinks,
    durations: &[TaskDurations],
) -> Result<Schedule, CycleError> {
    let order = graph::combined_topo_order(inst, links)?;
    let mut start = vec![0; inst.num_tasks()];
    for &v in &order {
        let mut s = 0;
        for &u in inst.preds(v) {
            s = s.max(start[u] + durations[u].total());
        }
        if let Some(p) = links.prev[v] {
            s = s.max(start[p] + graph::seq_arc_length(&durations[p], &durations[v]));
        }
        start[v] = s;
    }
    Ok(Schedule::from_starts(inst, start, durations))
}

/// Occupancy changes of one bank, sorted by time with releases first at
/// equal times, and the resulting peak.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OccupancyProfile {
    pub events: Vec<(Time, i64)>,
    pub peak: u64,
}

/// Per-bank occupancy. Blocks with an empty lifetime never occupy memory.
pub fn peak_occupancy(inst: &Instance, sched: &Schedule, allocation: &[MemId]) -> Vec<OccupancyProfile> {
    let mut profiles = vec![OccupancyProfile::default(); inst.memories().len()];
    for (b, lt) in sched.lifetimes.iter().enumerate() {
        if lt.enter >= lt.release {
            continue;
        }
        let size = inst.block(b).size as i64;
        let p = &mut profiles[allocation[b]];
        p.events.push((lt.enter, size));
        p.events.push((lt.release, -size));
    }
    for p in &mut profiles {
        p.events.sort_unstable();
        let mut cur = 0i64;
        for &(_, d) in &p.events {
            cur += d;
            p.peak = p.peak.max(cur as u64);
        }
    }
    profiles
}

/// Largest total size of the intervals `(enter, release, size)` that are
/// simultaneously alive somewhere inside `[start, end)`.
pub fn window_peak(intervals: &[(Time, Time, u64)], start: Time, end: Time) -> u64 {
    window_peak_with(intervals.iter().copied(), start, end, &mut Vec::new())
}

/// [`window_peak`] over any interval source, reusing `events` as scratch.
pub(crate) fn window_peak_with(
    intervals: impl Iterator<Item = (Time, Time, u64)>,
    start: Time,
    end: Time,
    events: &mut Vec<(Time, i64)>,
) -> u64 {
    if start >= end {
        return 0;
    }
    events.clear();
    for (s, e, size) in intervals {
        let (s, e) = (s.max(start), e.min(end));
        if s < e {
            events.push((s, size as i64));
            events.push((e, -(size as i64)));
        }
    }
    events.sort_unstable();
    let mut cur = 0i64;
    let mut peak = 0i64;
    for &(_, d) in events.iter() {
        cur += d;
        peak = peak.max(cur);
    }
    peak as u64
}

/// Why a solution is not feasible. Structural problems are reported before
/// cycles, cycles before capacity overflows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Infeasibility {
    Structural(Violation),
    Cycle(CycleError),
    Capacity { mem: MemId, peak: u64, capacity: u64 },
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::Structural(v) => write!(f, "{v}"),
            Infeasibility::Cycle(c) => write!(f, "{c}"),
            Infeasibility::Capacity {
                mem,
                peak,
                capacity,
            } => write!(f, "bank {mem} peaks at {peak} above capacity {capacity}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Schedule),
    Infeasible(Infeasibility),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn violation(&self) -> Option<&Infeasibility> {
        match self {
            Feasibility::Feasible(_) => None,
            Feasibility::Infeasible(v) => Some(v),
        }
    }
}

pub fn is_feasible(inst: &Instance, sol: &Solution) -> Feasibility {
    if let Some(v) = validate_solution(inst, sol).into_iter().next() {
        return Feasibility::Infeasible(Infeasibility::Structural(v));
    }
    let sched = match simulate(inst, sol) {
        Ok(s) => s,
        Err(c) => return Feasibility::Infeasible(Infeasibility::Cycle(c)),
    };
    if let Some(v) = first_overflow(inst, &sched, &sol.allocation) {
        return Feasibility::Infeasible(v);
    }
    Feasibility::Feasible(sched)
}

pub(crate) fn first_overflow(inst: &Instance, sched: &Schedule, allocation: &[MemId]) -> Option<Infeasibility> {
    let mut events: Vec<(Time, i64)> = Vec::new();
    for (m, bank) in inst.memories().iter().enumerate() {
        let Capacity::Finite(cap) = bank.capacity else {
            continue;
        };
        events.clear();
        for (b, lt) in sched.lifetimes.iter().enumerate() {
            if allocation[b] == m && lt.enter < lt.release {
                let size = inst.block(b).size as i64;
                events.push((lt.enter, size));
                events.push((lt.release, -size));
            }
        }
        events.sort_unstable();
        let mut cur = 0i64;
        let mut peak = 0i64;
        for &(_, d) in &events {
            cur += d;
            peak = peak.max(cur);
        }
        if peak as u64 > cap {
            return Some(Infeasibility::Capacity {
                mem: m,
                peak: peak as u64,
                capacity: cap,
            });
        }
    }
    None
}

/// Moving one task to position `pos` of processor `proc`'s sequence, where
/// `pos` indexes the sequence with the task already removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relocation {
    pub task: TaskId,
    pub proc: ProcId,
    pub pos: usize,
}

/// Everything the approximate evaluator reads about the current solution.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub sol: Solution,
    pub links: SeqLinks,
    pub positions: Vec<usize>,
    pub durations: Vec<TaskDurations>,
    pub metrics: GraphMetrics,
}

impl Snapshot {
    pub fn new(inst: &Instance, sol: Solution) -> Result<Self, CycleError> {
        let links = SeqLinks::from_sequences(inst.num_tasks(), &sol.sequences);
        let durations = task_durations(inst, &sol);
        let metrics = graph::metrics_with_links(inst, &links, &durations)?;
        let positions = sol.positions();
        Ok(Snapshot {
            sol,
            links,
            positions,
            durations,
            metrics,
        })
    }

    pub fn is_identity(&self, r: &Relocation) -> bool {
        self.sol.assignment[r.task] == r.proc && self.positions[r.task] == r.pos
    }

    /// New sequence neighbours of `r.task` after the relocation.
    pub fn insertion_neighbours(&self, r: &Relocation) -> (Option<TaskId>, Option<TaskId>) {
        let seq = &self.sol.sequences[r.proc];
        let same = self.sol.assignment[r.task] == r.proc;
        let own = self.positions[r.task];
        // Index into the sequence with the task removed.
        let at = |i: usize| -> Option<TaskId> {
            let j = if same && i >= own { i + 1 } else { i };
            seq.get(j).copied()
        };
        let prev = if r.pos == 0 { None } else { at(r.pos - 1) };
        (prev, at(r.pos))
    }
}

/// Fast makespan estimate for a relocation. Heads and tails of tasks whose
/// sequence neighbours change are recomputed from the cached values of
/// everything else; the allocation is left as it is.
pub fn approx_makespan(inst: &Instance, snap: &Snapshot, r: &Relocation) -> Time {
    if snap.is_identity(r) {
        return snap.metrics.cmax;
    }
    let u = r.task;
    let links = &snap.links;
    let (old_prev, old_next) = (links.prev[u], links.next[u]);
    let (new_prev, new_next) = snap.insertion_neighbours(r);

    // (task, prev, next) for every task whose links change.
    let mut affected: Vec<(TaskId, Option<TaskId>, Option<TaskId>)> = Vec::with_capacity(5);
    let touch = |aff: &mut Vec<(TaskId, Option<TaskId>, Option<TaskId>)>, t: TaskId| -> usize {
        match aff.iter().position(|a| a.0 == t) {
            Some(i) => i,
            None => {
                aff.push((t, links.prev[t], links.next[t]));
                aff.len() - 1
            }
        }
    };
    if let Some(p) = old_prev {
        let i = touch(&mut affected, p);
        affected[i].2 = old_next;
    }
    if let Some(nx) = old_next {
        let i = touch(&mut affected, nx);
        affected[i].1 = old_prev;
    }
    if let Some(p) = new_prev {
        let i = touch(&mut affected, p);
        affected[i].2 = Some(u);
    }
    if let Some(nx) = new_next {
        let i = touch(&mut affected, nx);
        affected[i].1 = Some(u);
    }
    let i = touch(&mut affected, u);
    affected[i].1 = new_prev;
    affected[i].2 = new_next;

    let du = durations_on(inst, &snap.sol.allocation, u, r.proc);
    let dur = |t: TaskId| if t == u { du } else { snap.durations[t] };
    let idx = |t: TaskId| affected.iter().position(|a| a.0 == t);

    let k = affected.len();
    let mut head: Vec<Time> = affected.iter().map(|a| snap.metrics.head[a.0]).collect();
    let mut tail: Vec<Time> = affected.iter().map(|a| snap.metrics.tail[a.0]).collect();

    // Longest paths restricted to the affected set converge within k sweeps.
    for _ in 0..=k {
        let mut changed = false;
        for i in 0..k {
            let (v, prev, _) = affected[i];
            let mut h = 0;
            for &p in inst.preds(v) {
                let hp = idx(p).map_or(snap.metrics.head[p], |j| head[j]);
                h = h.max(hp + dur(p).total());
            }
            if let Some(p) = prev {
                let hp = idx(p).map_or(snap.metrics.head[p], |j| head[j]);
                h = h.max(hp + graph::seq_arc_length(&dur(p), &dur(v)));
            }
            if h != head[i] {
                head[i] = h;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for _ in 0..=k {
        let mut changed = false;
        for i in 0..k {
            let (v, _, next) = affected[i];
            let own = dur(v).total();
            let mut q = own;
            for &s in inst.succs(v) {
                let qs = idx(s).map_or(snap.metrics.tail[s], |j| tail[j]);
                q = q.max(own + qs);
            }
            if let Some(s) = next {
                let qs = idx(s).map_or(snap.metrics.tail[s], |j| tail[j]);
                q = q.max(graph::seq_arc_length(&dur(v), &dur(s)) + qs);
            }
            if q != tail[i] {
                tail[i] = q;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..k).map(|i| head[i] + tail[i]).max().unwrap_or(0)
}

/// Applies a relocation to a copy of the solution.
pub fn apply_relocation(sol: &Solution, r: &Relocation) -> Solution {
    let mut out = sol.clone();
    let from = out.assignment[r.task];
    out.sequences[from].retain(|&t| t != r.task);
    out.sequences[r.proc].insert(r.pos, r.task);
    out.assignment[r.task] = r.proc;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::AccessFactor;

    fn tiny3_serial(mem: MemId) -> Solution {
        Solution::from_sequences(3, vec![vec![0, 1, 2], vec![]], vec![mem])
    }

    #[test]
    fn transfer_time_examples() {
        let table = AccessTable::uniform(
            AccessFactor::ONE,
            AccessFactor::ONE,
            AccessFactor::new(6, 5),
        );
        let g = ProcType::General;
        assert_eq!(transfer_time(0, MemType::Low, g, &table), Ok(0));
        assert_eq!(transfer_time(10, MemType::High2, g, &table), Ok(10));
        assert_eq!(transfer_time(10, MemType::Low, g, &table), Ok(12));
    }

    #[test]
    fn transfer_time_reports_missing_factor() {
        let mut table = AccessTable::default();
        table.set(ProcType::General, MemType::Low, AccessFactor::ONE);
        assert_eq!(
            transfer_time(3, MemType::High1, ProcType::General, &table),
            Err(ModelError::MissingAccessFactor(ProcType::General, MemType::High1))
        );
    }

    #[test]
    fn single_task_makespan_is_its_processing_time() {
        let inst = fixtures::single_task(27);
        let sol = Solution::from_sequences(1, vec![vec![0]], vec![]);
        assert_eq!(simulate(&inst, &sol).unwrap().makespan, 27);
    }

    #[test]
    fn tiny3_parallel_low_timeline() {
        let inst = fixtures::tiny3();
        let sol = Solution::from_sequences(3, vec![vec![0, 1], vec![2]], vec![1]);
        let s = simulate(&inst, &sol).unwrap();
        // A: 0..15 processing, 15..25 move-out. B and C: 25..35 in, 35..50, no outputs.
        assert_eq!(s.move_in_start, vec![0, 25, 25]);
        assert_eq!(s.move_out_end, vec![25, 50, 50]);
        assert_eq!(s.makespan, 50);
        assert_eq!(s.lifetimes, vec![Lifetime { enter: 0, release: 50 }]);
    }

    #[test]
    fn faster_bank_does_not_hurt() {
        let inst = fixtures::tiny3();
        let low = simulate(&inst, &tiny3_serial(1)).unwrap().makespan;
        let high = simulate(&inst, &tiny3_serial(0)).unwrap().makespan;
        assert!(high <= low);
    }

    #[test]
    fn serial_move_in_overlaps_previous_processing() {
        let inst = fixtures::tiny3();
        let s = simulate(&inst, &tiny3_serial(1)).unwrap();
        // B moves in 25..35 and runs 35..50; C moves in while B runs and starts at 50.
        assert_eq!(s.proc_start, vec![0, 35, 50]);
        assert_eq!(s.move_in_start[2], 40);
        assert_eq!(s.makespan, 65);
    }

    #[test]
    fn simulate_agrees_with_metrics_cmax() {
        let inst = fixtures::tiny3();
        for sol in [tiny3_serial(0), tiny3_serial(1)] {
            let d = task_durations(&inst, &sol);
            let m = graph::compute_metrics(&inst, Some(&sol), &d).unwrap();
            assert_eq!(simulate(&inst, &sol).unwrap().makespan, m.cmax);
        }
    }

    #[test]
    fn occupancy_examples() {
        let inst = fixtures::tiny3();
        let sched = simulate(&inst, &tiny3_serial(0)).unwrap();
        let prof = peak_occupancy(&inst, &sched, &[0]);
        assert_eq!(prof[0].peak, 10);
        assert_eq!(prof[1].peak, 0);

        let empty = fixtures::single_task(3);
        let s = simulate(&empty, &Solution::from_sequences(1, vec![vec![0]], vec![])).unwrap();
        assert!(peak_occupancy(&empty, &s, &[]).iter().all(|p| p.peak == 0));
    }

    #[test]
    fn window_peak_counts_overlaps_only() {
        let iv = [(0, 10, 6), (5, 20, 6), (20, 30, 6)];
        assert_eq!(window_peak(&iv, 0, 100), 12);
        assert_eq!(window_peak(&iv, 10, 30), 6);
        assert_eq!(window_peak(&iv, 7, 8), 12);
        assert_eq!(window_peak(&iv, 4, 4), 0);
    }

    #[test]
    fn feasibility_reports_structure_first() {
        let inst = fixtures::tiny3();
        assert!(is_feasible(&inst, &tiny3_serial(1)).is_feasible());
        let mut bad = tiny3_serial(0);
        bad.assignment[0] = 7;
        assert!(matches!(
            is_feasible(&inst, &bad).violation(),
            Some(Infeasibility::Structural(_))
        ));
    }

    #[test]
    fn identity_relocation_estimates_cmax() {
        let inst = fixtures::tiny3();
        let snap = Snapshot::new(&inst, tiny3_serial(1)).unwrap();
        let r = Relocation { task: 1, proc: 0, pos: 1 };
        assert_eq!(approx_makespan(&inst, &snap, &r), snap.metrics.cmax);
    }

    #[test]
    fn relocation_to_empty_processor_matches_simulation_here() {
        let inst = fixtures::tiny3();
        let snap = Snapshot::new(&inst, tiny3_serial(1)).unwrap();
        let r = Relocation { task: 2, proc: 1, pos: 0 };
        let moved = apply_relocation(&snap.sol, &r);
        assert_eq!(moved.sequences, vec![vec![0, 1], vec![2]]);
        let exact = simulate(&inst, &moved).unwrap().makespan;
        assert_eq!(approx_makespan(&inst, &snap, &r), exact);
    }

    #[test]
    fn insertion_neighbours_skip_the_moved_task() {
        let inst = fixtures::tiny3();
        let snap = Snapshot::new(&inst, tiny3_serial(1)).unwrap();
        let r = Relocation { task: 1, proc: 0, pos: 2 };
        assert_eq!(snap.insertion_neighbours(&r), (Some(2), None));
        assert_eq!(apply_relocation(&snap.sol, &r).sequences[0], vec![0, 2, 1]);
    }
}
