use alloc::vec;
use alloc::vec::Vec;

use crate::eval::{peak_occupancy, simulate_with, task_durations};
use crate::graph::{SeqLinks, TaskDurations};
use crate::model::{Capacity, Instance, MemId, MemType, ProcId, Solution, TaskId, Time};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteLimits {
    pub max_tasks: usize,
    pub max_procs: usize,
    pub max_blocks: usize,
}

impl Default for BruteLimits {
    fn default() -> Self {
        BruteLimits {
            max_tasks: 10,
            max_procs: 3,
            max_blocks: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BruteError {
    #[error("instance exceeds the exhaustive search limits ({tasks} tasks, {procs} processors, {blocks} blocks)")]
    TooLarge {
        tasks: usize,
        procs: usize,
        blocks: usize,
    },
}

struct Search<'a> {
    inst: &'a Instance,
    /// `before[u]` has bit v set when u must precede v.
    before: Vec<u32>,
    best: Option<(Time, Solution)>,
}

/// Exhaustive search over assignments, per-processor orders and bank
/// placements, with earliest-start timing. A local fast bank may hold a
/// block only when the block's home processor (its producer's, or its first
/// consumer's for initial blocks) belongs to the bank's group. Returns an optimal solution and
/// its makespan; among equal makespans the first one enumerated wins.
pub fn brute_force_optimum(inst: &Instance, limits: &BruteLimits) -> Result<(Solution, Time), BruteError> {
    let n = inst.num_tasks();
    if n > limits.max_tasks
        || inst.num_procs() > limits.max_procs
        || inst.num_blocks() > limits.max_blocks
        || n > 31
    {
        return Err(BruteError::TooLarge {
            tasks: n,
            procs: inst.num_procs(),
            blocks: inst.num_blocks(),
        });
    }

    // Transitive closure of the precedence relation, in reverse topological order.
    let order = crate::graph::topo_sort(inst, None).expect("instances are acyclic");
    let mut before = vec![0u32; n];
    for &u in order.iter().rev() {
        for &s in inst.succs(u) {
            before[u] |= (1 << s) | before[s];
        }
    }

    let mut search = Search {
        inst,
        before,
        best: None,
    };
    let mut assignment = vec![0; n];
    search.assign(0, &mut assignment);
    Ok(search
        .best
        .map(|(ms, sol)| (sol, ms))
        .expect("every instance has at least one schedule"))
}

impl Search<'_> {
    fn assign(&mut self, t: TaskId, assignment: &mut Vec<ProcId>) {
        if t == assignment.len() {
            let np = self.inst.num_procs();
            let mut groups = vec![Vec::new(); np];
            for (task, &p) in assignment.iter().enumerate() {
                groups[p].push(task);
            }
            let mut seqs = vec![Vec::new(); np];
            self.orders(0, &groups, &mut seqs);
            return;
        }
        let cands: Vec<ProcId> = self.inst.task(t).candidates().collect();
        for p in cands {
            assignment[t] = p;
            self.assign(t + 1, assignment);
        }
    }

    fn orders(&mut self, p: usize, groups: &[Vec<TaskId>], seqs: &mut Vec<Vec<TaskId>>) {
        if p == groups.len() {
            self.evaluate(seqs);
            return;
        }
        let mut remaining: u32 = groups[p].iter().fold(0, |m, &t| m | (1 << t));
        self.extend_order(p, &mut remaining, groups, seqs);
    }

    /// Enumerates linear extensions of processor `p`'s tasks.
    fn extend_order(&mut self, p: usize, remaining: &mut u32, groups: &[Vec<TaskId>], seqs: &mut Vec<Vec<TaskId>>) {
        if *remaining == 0 {
            self.orders(p + 1, groups, seqs);
            return;
        }
        for &t in &groups[p] {
            if *remaining & (1 << t) == 0 {
                continue;
            }
            // t may go next only if no remaining task must precede it.
            let blocked = groups[p]
                .iter()
                .any(|&o| o != t && *remaining & (1 << o) != 0 && self.before[o] & (1 << t) != 0);
            if blocked {
                continue;
            }
            *remaining &= !(1 << t);
            seqs[p].push(t);
            self.extend_order(p, remaining, groups, seqs);
            seqs[p].pop();
            *remaining |= 1 << t;
        }
    }

    fn evaluate(&mut self, seqs: &[Vec<TaskId>]) {
        let inst = self.inst;
        let n = inst.num_tasks();
        let links = SeqLinks::from_sequences(n, seqs);
        let base = Solution::from_sequences(n, seqs.to_vec(), vec![inst.low_bank(); inst.num_blocks()]);

        // Lower bound: every transfer at its cheapest bank, capacity ignored.
        let nm = inst.memories().len();
        let cheap: Vec<TaskDurations> = (0..n)
            .map(|t| {
                let tk = inst.task(t);
                let pt = inst.processor(base.assignment[t]).ptype;
                let c = |bs: &[usize]| -> Time {
                    bs.iter()
                        .map(|&b| (0..nm).map(|m| inst.transfer(b, m, pt)).min().unwrap_or(0))
                        .sum()
                };
                TaskDurations {
                    move_in: c(&tk.inputs),
                    proc: tk.proc_time(base.assignment[t]).expect("candidate"),
                    move_out: c(&tk.outputs),
                }
            })
            .collect();
        let Ok(bound) = simulate_with(inst, &links, &cheap) else {
            return; // Sequences contradict precedence across processors.
        };
        if self.best.as_ref().is_some_and(|(b, _)| bound.makespan >= *b) {
            return;
        }

        let nb = inst.num_blocks();
        // Local banks serve the group of the block's home processor only.
        let banks_for: Vec<Vec<MemId>> = (0..nb)
            .map(|b| {
                let blk = inst.block(b);
                let home = blk
                    .home_task()
                    .map_or(0, |t| inst.processor(base.assignment[t]).group);
                (0..nm)
                    .filter(|&m| {
                        let mem = inst.memory(m);
                        mem.capacity.admits(blk.size) && (mem.mtype != MemType::High1 || mem.group == home)
                    })
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; nb];
        let mut sol = base;
        loop {
            for b in 0..nb {
                sol.allocation[b] = banks_for[b][idx[b]];
            }
            let d = task_durations(inst, &sol);
            let sched = simulate_with(inst, &links, &d).expect("acyclic");
            if self.best.as_ref().is_none_or(|(b, _)| sched.makespan < *b) {
                let fits = peak_occupancy(inst, &sched, &sol.allocation)
                    .iter()
                    .enumerate()
                    .all(|(m, p)| match inst.memory(m).capacity {
                        Capacity::Finite(c) => p.peak <= c,
                        Capacity::Unbounded => true,
                    });
                if fits {
                    self.best = Some((sched.makespan, sol.clone()));
                    if sched.makespan == bound.makespan {
                        return;
                    }
                }
            }
            // Next allocation in odometer order.
            let mut b = 0;
            loop {
                if b == nb {
                    return;
                }
                idx[b] += 1;
                if idx[b] < banks_for[b].len() {
                    break;
                }
                idx[b] = 0;
                b += 1;
            }
        }
    }
}
