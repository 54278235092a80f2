use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::eval::{Relocation, Snapshot};
use crate::graph::{critical_blocks, SeqLinks};
use crate::model::{Instance, ProcId, Solution, TaskId};

/// Whether a shift moves a task earlier or later in its sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    ToHead,
    ToTail,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::ToHead => Direction::ToTail,
            Direction::ToTail => Direction::ToHead,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveKind {
    /// Reposition inside a critical block.
    Shift(Direction),
    /// Reassign to another processor.
    ChangeCore,
}

/// A neighbourhood move. `target_pos` indexes the target sequence with the
/// task already removed. The derived order is the tie-break between moves
/// of equal makespan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move {
    pub kind: MoveKind,
    pub task: TaskId,
    pub target_proc: ProcId,
    pub target_pos: usize,
}

impl Move {
    pub fn relocation(&self) -> Relocation {
        Relocation {
            task: self.task,
            proc: self.target_proc,
            pos: self.target_pos,
        }
    }
}

/// Ancestors and descendants of `u` once it is taken out of its sequence
/// (its sequence neighbours become adjacent).
fn reach_without(inst: &Instance, links: &SeqLinks, u: TaskId) -> (Vec<bool>, Vec<bool>) {
    let n = inst.num_tasks();
    let prev_of = |w: TaskId| match links.prev[w] {
        Some(p) if p == u => links.prev[u],
        p => p,
    };
    let next_of = |w: TaskId| match links.next[w] {
        Some(s) if s == u => links.next[u],
        s => s,
    };

    let mut anc = vec![false; n];
    let mut stack: Vec<TaskId> = inst.preds(u).to_vec();
    while let Some(w) = stack.pop() {
        if w == u || anc[w] {
            continue;
        }
        anc[w] = true;
        stack.extend(inst.preds(w).iter().copied());
        stack.extend(prev_of(w));
    }

    let mut desc = vec![false; n];
    let mut stack: Vec<TaskId> = inst.succs(u).to_vec();
    while let Some(w) = stack.pop() {
        if w == u || desc[w] {
            continue;
        }
        desc[w] = true;
        stack.extend(inst.succs(w).iter().copied());
        stack.extend(next_of(w));
    }
    (anc, desc)
}

/// Inclusive range of insertion positions for `u` in `proc`'s sequence that
/// keep the schedule graph acyclic: after every ancestor, before every
/// descendant. `None` when no such position exists.
fn window_in(
    sol: &Solution,
    u: TaskId,
    proc: ProcId,
    anc: &[bool],
    desc: &[bool],
) -> Option<(usize, usize)> {
    let mut lo = 0;
    let mut hi = None;
    let mut idx = 0;
    for &t in &sol.sequences[proc] {
        if t == u {
            continue;
        }
        if anc[t] {
            lo = idx + 1;
        }
        if desc[t] && hi.is_none() {
            hi = Some(idx);
        }
        idx += 1;
    }
    let hi = hi.unwrap_or(idx);
    (lo <= hi).then_some((lo, hi))
}

/// Feasible insertion positions of `u` on `proc`, as an inclusive range.
pub fn insertion_window(
    inst: &Instance,
    sol: &Solution,
    links: &SeqLinks,
    u: TaskId,
    proc: ProcId,
) -> Option<(usize, usize)> {
    let (anc, desc) = reach_without(inst, links, u);
    window_in(sol, u, proc, &anc, &desc)
}

/// Shifts within critical blocks, reinsertion of critical tasks at any
/// feasible position of their own processor, and processor changes of
/// critical tasks.
/// Every returned move keeps the schedule graph acyclic and changes the
/// solution. The result is sorted.
pub fn enumerate_neighborhood(inst: &Instance, snap: &Snapshot) -> Vec<Move> {
    let sol = &snap.sol;
    let mut moves = Vec::new();
    let mut reach: Vec<Option<(Vec<bool>, Vec<bool>)>> = vec![None; inst.num_tasks()];
    let mut reach_of = |u: TaskId| -> (Vec<bool>, Vec<bool>) {
        reach[u]
            .get_or_insert_with(|| reach_without(inst, &snap.links, u))
            .clone()
    };

    // Same-processor moves are kept once per resulting sequence.
    let mut seen: BTreeSet<(ProcId, Vec<TaskId>)> = BTreeSet::new();
    let reordered = |u: TaskId, proc: ProcId, pos: usize| {
        let mut seq = sol.sequences[proc].clone();
        seq.retain(|&t| t != u);
        seq.insert(pos, u);
        (proc, seq)
    };
    for block in critical_blocks(&snap.metrics, sol) {
        let len = block.tasks.len();
        if len < 2 {
            continue;
        }
        for (i, &u) in block.tasks.iter().enumerate() {
            let (anc, desc) = reach_of(u);
            let Some((lo, hi)) = window_in(sol, u, block.proc, &anc, &desc) else {
                continue;
            };
            // Inner tasks go to either end; the first and last task may also
            // move to any inner position.
            let mut targets = Vec::new();
            if i == 0 {
                targets.extend((1..len).map(|q| (Direction::ToTail, block.start + q)));
            } else if i + 1 == len {
                targets.extend((0..len - 1).map(|q| (Direction::ToHead, block.start + q)));
            } else {
                targets.push((Direction::ToHead, block.start));
                targets.push((Direction::ToTail, block.start + len - 1));
            }
            for (dir, pos) in targets {
                if pos < lo || pos > hi {
                    continue;
                }
                let mv = Move {
                    kind: MoveKind::Shift(dir),
                    task: u,
                    target_proc: block.proc,
                    target_pos: pos,
                };
                if seen.insert(reordered(u, block.proc, pos)) {
                    moves.push(mv);
                }
            }
        }
    }

    let pos = sol.positions();
    for u in snap.metrics.critical_tasks() {
        let from = sol.assignment[u];
        let (anc, desc) = reach_of(u);
        for p in inst.task(u).candidates() {
            let Some((lo, hi)) = window_in(sol, u, p, &anc, &desc) else {
                continue;
            };
            for target_pos in lo..=hi {
                let kind = if p != from {
                    MoveKind::ChangeCore
                } else if target_pos == pos[u] || !seen.insert(reordered(u, p, target_pos)) {
                    continue;
                } else if target_pos < pos[u] {
                    MoveKind::Shift(Direction::ToHead)
                } else {
                    MoveKind::Shift(Direction::ToTail)
                };
                moves.push(Move {
                    kind,
                    task: u,
                    target_proc: p,
                    target_pos,
                });
            }
        }
    }
    moves.sort_unstable();
    moves
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::apply_relocation;
    use crate::fixtures;
    use crate::graph::topo_sort;
    use crate::model::Task;

    fn snap(sol: Solution) -> Snapshot {
        Snapshot::new(&fixtures::tiny3(), sol).unwrap()
    }

    #[test]
    fn singleton_blocks_without_alternatives_have_no_moves() {
        // Each task can only run where it already is.
        let inst_one = Instance::new(
            vec![Task::new(0, vec![(0, 5)]), Task::new(1, vec![(1, 5)])],
            vec![],
            vec![],
            fixtures::general_procs(2),
            fixtures::high2_and_low(10),
            fixtures::default_access(),
        )
        .unwrap();
        let sol = Solution::from_sequences(2, vec![vec![0], vec![1]], vec![]);
        let s = Snapshot::new(&inst_one, sol).unwrap();
        assert!(enumerate_neighborhood(&inst_one, &s).is_empty());
    }

    #[test]
    fn block_of_two_yields_one_shift() {
        let inst = fixtures::independent(&[5, 5], 1);
        let sol = Solution::from_sequences(2, vec![vec![0, 1]], vec![]);
        let s = Snapshot::new(&inst, sol).unwrap();
        let moves = enumerate_neighborhood(&inst, &s);
        assert_eq!(moves.len(), 1);
        let moved = apply_relocation(&s.sol, &moves[0].relocation());
        assert_eq!(moved.sequences[0], vec![1, 0]);
    }

    #[test]
    fn tiny3_serial_offers_change_core_to_idle_processor() {
        let inst = fixtures::tiny3();
        let s = snap(Solution::from_sequences(3, vec![vec![0, 1, 2], vec![]], vec![1]));
        let moves = enumerate_neighborhood(&inst, &s);
        assert!(moves.contains(&Move {
            kind: MoveKind::ChangeCore,
            task: 2,
            target_proc: 1,
            target_pos: 0,
        }));
        for m in &moves {
            let next = apply_relocation(&s.sol, &m.relocation());
            assert!(topo_sort(&inst, Some(&next)).is_ok(), "{m:?}");
            assert!(!s.is_identity(&m.relocation()));
        }
    }

    #[test]
    fn window_respects_precedence() {
        let inst = fixtures::tiny3();
        let s = snap(Solution::from_sequences(3, vec![vec![0, 1], vec![2]], vec![1]));
        // C must follow A on processor 0.
        assert_eq!(insertion_window(&inst, &s.sol, &s.links, 2, 0), Some((1, 2)));
        // A must precede B and C.
        assert_eq!(insertion_window(&inst, &s.sol, &s.links, 0, 1), Some((0, 0)));
    }
}
