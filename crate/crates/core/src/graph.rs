//! Topological ordering and head/tail/slack metrics.
//!
//! The graph has one node per task. Arcs come from precedence (explicit edges
//! and producer/consumer relations) and, when sequences are given, from
//! consecutive tasks on the same processor. Arc lengths:
//!
//!  - precedence `u -> v`: the full duration of `u` (move-in, processing,
//!    move-out), so `v` starts moving in once `u` has moved out;
//!  - sequence `prev -> cur`: `max(T(prev) - moveIn(cur), moveIn(prev))`, so
//!    `cur` may move its inputs in while `prev` is still running, but it only
//!    starts processing after `prev` has moved out and never starts its
//!    move-in before `prev` finished its own.
//!
//! `head[i]` (often written R) is the longest path to the start of `i`;
//! `tail[i]` (Q) is the longest path from the start of `i` to the end,
//! including `i` itself.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::CycleError;
use crate::model::{Instance, ProcId, Solution, TaskId, Time};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TaskDurations {
    pub move_in: Time,
    pub proc: Time,
    pub move_out: Time,
}

impl TaskDurations {
    pub fn total(&self) -> Time {
        self.move_in + self.proc + self.move_out
    }
}

/// Length of the sequence arc between consecutive tasks on one processor.
pub fn seq_arc_length(prev: &TaskDurations, cur: &TaskDurations) -> Time {
    prev.total().saturating_sub(cur.move_in).max(prev.move_in)
}

/// Minimum processing time and no transfers, used before any assignment exists.
pub fn default_durations(inst: &Instance) -> Vec<TaskDurations> {
    inst.tasks()
        .iter()
        .map(|t| TaskDurations {
            move_in: 0,
            proc: t.min_proc_time(),
            move_out: 0,
        })
        .collect()
}

/// Predecessor/successor links induced by processor sequences.
/// Tasks that are not sequenced have no links.
#[derive(Clone, Debug)]
pub struct SeqLinks {
    pub prev: Vec<Option<TaskId>>,
    pub next: Vec<Option<TaskId>>,
}

impl SeqLinks {
    pub fn empty(n: usize) -> Self {
        SeqLinks {
            prev: vec![None; n],
            next: vec![None; n],
        }
    }

    pub fn from_sequences(n: usize, sequences: &[Vec<TaskId>]) -> Self {
        let mut links = SeqLinks::empty(n);
        for seq in sequences {
            for w in seq.windows(2) {
                links.next[w[0]] = Some(w[1]);
                links.prev[w[1]] = Some(w[0]);
            }
        }
        links
    }
}

/// Kahn's algorithm, smallest ready id first.
fn kahn(
    n: usize,
    mut indeg: Vec<usize>,
    mut for_each_succ: impl FnMut(TaskId, &mut dyn FnMut(TaskId)),
) -> Result<Vec<TaskId>, Vec<usize>> {
    let mut heap: BinaryHeap<Reverse<TaskId>> = (0..n)
        .filter(|&t| indeg[t] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = heap.pop() {
        order.push(u);
        for_each_succ(u, &mut |v| {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                heap.push(Reverse(v));
            }
        });
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(indeg)
    }
}

/// Walks backwards through nodes that still have unresolved in-arcs until a
/// node repeats, then returns the cycle in forward order.
fn extract_cycle(
    indeg: &[usize],
    mut for_each_pred: impl FnMut(TaskId, &mut dyn FnMut(TaskId)),
) -> CycleError {
    let n = indeg.len();
    let start = (0..n).find(|&t| indeg[t] > 0).expect("a blocked node exists");
    let mut visit_pos = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut cur = start;
    loop {
        if visit_pos[cur] != usize::MAX {
            let mut cycle: Vec<TaskId> = walk[visit_pos[cur]..].to_vec();
            cycle.reverse();
            return CycleError { cycle };
        }
        visit_pos[cur] = walk.len();
        walk.push(cur);
        let mut next = None;
        for_each_pred(cur, &mut |p| {
            if next.is_none() && indeg[p] > 0 {
                next = Some(p);
            }
        });
        cur = next.expect("a blocked node has a blocked predecessor");
    }
}

/// Topological order over precedence lists only.
pub(crate) fn static_topo_order(
    preds: &[Vec<TaskId>],
    succs: &[Vec<TaskId>],
) -> Result<Vec<TaskId>, CycleError> {
    let n = preds.len();
    let indeg = preds.iter().map(Vec::len).collect();
    kahn(n, indeg, |u, f| succs[u].iter().for_each(|&v| f(v))).map_err(|indeg| {
        extract_cycle(&indeg, |v, f| preds[v].iter().for_each(|&u| f(u)))
    })
}

/// Topological order over precedence arcs plus sequence links.
pub fn combined_topo_order(inst: &Instance, links: &SeqLinks) -> Result<Vec<TaskId>, CycleError> {
    let n = inst.num_tasks();
    let indeg = (0..n)
        .map(|t| {
            inst.preds(t).len() + usize::from(links.prev[t].is_some())
        })
        .collect();
    kahn(n, indeg, |u, f| {
        inst.succs(u).iter().for_each(|&v| f(v));
        if let Some(v) = links.next[u] {
            f(v);
        }
    })
    .map_err(|indeg| {
        extract_cycle(&indeg, |v, f| {
            inst.preds(v).iter().for_each(|&u| f(u));
            if let Some(u) = links.prev[v] {
                f(u);
            }
        })
    })
}

/// Topological order of the tasks, honouring processor sequences when a
/// solution is given. Ties go to the smaller task id.
pub fn topo_sort(inst: &Instance, sol: Option<&Solution>) -> Result<Vec<TaskId>, CycleError> {
    let links = match sol {
        Some(s) => SeqLinks::from_sequences(inst.num_tasks(), &s.sequences),
        None => SeqLinks::empty(inst.num_tasks()),
    };
    combined_topo_order(inst, &links)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMetrics {
    pub topo_order: Vec<TaskId>,
    /// Longest path to the start of each task (R).
    pub head: Vec<Time>,
    /// Longest path from the start of each task to the end, inclusive (Q).
    pub tail: Vec<Time>,
    pub slack: Vec<Time>,
    pub cmax: Time,
    pub critical: Vec<bool>,
}

impl GraphMetrics {
    pub fn critical_tasks(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.critical
            .iter()
            .enumerate()
            .filter_map(|(t, &c)| c.then_some(t))
    }
}

/// Head, tail and slack of every task. `durations` gives each task's
/// effective move-in, processing and move-out times.
pub fn compute_metrics(
    inst: &Instance,
    sol: Option<&Solution>,
    durations: &[TaskDurations],
) -> Result<GraphMetrics, CycleError> {
    let links = match sol {
        Some(s) => SeqLinks::from_sequences(inst.num_tasks(), &s.sequences),
        None => SeqLinks::empty(inst.num_tasks()),
    };
    metrics_with_links(inst, &links, durations)
}

pub fn metrics_with_links(
    inst: &Instance,
    links: &SeqLinks,
    durations: &[TaskDurations],
) -> Result<GraphMetrics, CycleError> {
    let topo_order = combined_topo_order(inst, links)?;
    Ok(metrics_in_order(inst, links, topo_order, durations))
}

/// Metrics for a known topological order of the combined graph.
pub(crate) fn metrics_in_order(
    inst: &Instance,
    links: &SeqLinks,
    topo_order: Vec<TaskId>,
    durations: &[TaskDurations],
) -> GraphMetrics {
    let n = inst.num_tasks();
    let mut head = vec![0; n];
    for &v in &topo_order {
        let mut r = 0;
        for &u in inst.preds(v) {
            r = r.max(head[u] + durations[u].total());
        }
        if let Some(p) = links.prev[v] {
            r = r.max(head[p] + seq_arc_length(&durations[p], &durations[v]));
        }
        head[v] = r;
    }

    let mut tail = vec![0; n];
    for &v in topo_order.iter().rev() {
        let own = durations[v].total();
        let mut q = own;
        for &s in inst.succs(v) {
            q = q.max(own + tail[s]);
        }
        if let Some(s) = links.next[v] {
            q = q.max(seq_arc_length(&durations[v], &durations[s]) + tail[s]);
        }
        tail[v] = q;
    }

    let cmax = (0..n).map(|t| head[t] + tail[t]).max().unwrap_or(0);
    let slack: Vec<Time> = (0..n).map(|t| cmax - head[t] - tail[t]).collect();
    let critical = slack.iter().map(|&s| s == 0).collect();
    GraphMetrics {
        topo_order,
        head,
        tail,
        slack,
        cmax,
        critical,
    }
}

/// A maximal run of consecutive critical tasks on one processor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalBlock {
    pub proc: ProcId,
    /// Index of the first task inside the processor sequence.
    pub start: usize,
    pub tasks: Vec<TaskId>,
}

pub fn critical_blocks(metrics: &GraphMetrics, sol: &Solution) -> Vec<CriticalBlock> {
    let mut out = Vec::new();
    for (proc, seq) in sol.sequences.iter().enumerate() {
        let mut i = 0;
        while i < seq.len() {
            if !metrics.critical[seq[i]] {
                i += 1;
                continue;
            }
            let start = i;
            while i < seq.len() && metrics.critical[seq[i]] {
                i += 1;
            }
            out.push(CriticalBlock {
                proc,
                start,
                tasks: seq[start..i].to_vec(),
            });
        }
    }
    out
}
