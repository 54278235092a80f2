use alloc::collections::BTreeMap;

use alloc::vec;
use alloc::vec::Vec;

use super::neighborhood::{Move, MoveKind};
use crate::model::{ProcId, Solution, TaskId};

/// Solution attribute that a tabu entry forbids re-creating.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TabuKey {
    /// `before` sequenced ahead of `after` on the same processor.
    Order { before: TaskId, after: TaskId },
    /// `task` assigned to `proc`.
    ChangeCore { task: TaskId, proc: ProcId },
}

/// Tasks a shift jumps over, and whether the shifted task ends up ahead
/// of them.
fn jumped<'a>(sol: &'a Solution, mv: &Move) -> (&'a [TaskId], bool) {
    let seq = &sol.sequences[mv.target_proc];
    let from = seq.iter().position(|&t| t == mv.task).expect("shifted task is on its processor");
    if mv.target_pos < from {
        (&seq[mv.target_pos..from], true)
    } else {
        (&seq[from + 1..=mv.target_pos], false)
    }
}

impl TabuKey {
    /// Attributes that applying `mv` to `sol` establishes.
    pub fn created_by(sol: &Solution, mv: &Move) -> Vec<TabuKey> {
        match mv.kind {
            MoveKind::Shift(_) => {
                let (over, ahead) = jumped(sol, mv);
                over.iter()
                    .map(|&v| order_key(mv.task, v, ahead))
                    .collect()
            }
            MoveKind::ChangeCore => vec![TabuKey::ChangeCore {
                task: mv.task,
                proc: mv.target_proc,
            }],
        }
    }

    /// Attributes that would undo `mv` applied to `sol`.
    pub fn reversals(sol: &Solution, mv: &Move) -> Vec<TabuKey> {
        match mv.kind {
            MoveKind::Shift(_) => {
                let (over, ahead) = jumped(sol, mv);
                over.iter()
                    .map(|&v| order_key(mv.task, v, !ahead))
                    .collect()
            }
            MoveKind::ChangeCore => vec![TabuKey::ChangeCore {
                task: mv.task,
                proc: sol.assignment[mv.task],
            }],
        }
    }
}

fn order_key(u: TaskId, v: TaskId, u_first: bool) -> TabuKey {
    if u_first {
        TabuKey::Order { before: u, after: v }
    } else {
        TabuKey::Order { before: v, after: u }
    }
}

/// Keys with the iteration at which they stop being tabu.
#[derive(Clone, Debug, Default)]
pub struct TabuList {
    expiry: BTreeMap<TabuKey, u64>,
}

impl TabuList {
    pub fn new() -> Self {
        TabuList::default()
    }

    pub fn insert(&mut self, key: TabuKey, now: u64, tenure: u64) {
        self.expiry.insert(key, now + tenure);
    }

    pub fn is_tabu(&self, key: &TabuKey, now: u64) -> bool {
        self.expiry.get(key).is_some_and(|&e| e > now)
    }

    /// Whether applying `mv` to `sol` would re-create a tabu attribute.
    pub fn is_move_tabu(&self, sol: &Solution, mv: &Move, now: u64) -> bool {
        TabuKey::created_by(sol, mv).iter().any(|k| self.is_tabu(k, now))
    }

    /// Drops expired entries.
    pub fn purge(&mut self, now: u64) {
        self.expiry.retain(|_, &mut e| e > now);
    }

    pub fn len(&self) -> usize {
        self.expiry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expiry.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_expires_after_tenure() {
        let mut l = TabuList::new();
        let k = TabuKey::ChangeCore { task: 1, proc: 0 };
        l.insert(k, 10, 3);
        assert!(l.is_tabu(&k, 10));
        assert!(l.is_tabu(&k, 12));
        assert!(!l.is_tabu(&k, 13));
        l.purge(13);
        assert!(l.is_empty());
    }

    #[test]
    fn undoing_a_swap_through_the_other_task_is_tabu() {
        use super::super::neighborhood::Direction;
        let sol = Solution::from_sequences(3, vec![vec![0, 1, 2]], vec![]);
        let first = Move {
            kind: MoveKind::Shift(Direction::ToHead),
            task: 1,
            target_proc: 0,
            target_pos: 0,
        };
        let mut l = TabuList::new();
        for k in TabuKey::reversals(&sol, &first) {
            l.insert(k, 0, 5);
        }
        let after = Solution::from_sequences(3, vec![vec![1, 0, 2]], vec![]);
        let back = Move {
            kind: MoveKind::Shift(Direction::ToHead),
            task: 0,
            target_proc: 0,
            target_pos: 0,
        };
        assert!(l.is_move_tabu(&after, &back, 1));
        let onward = Move {
            kind: MoveKind::Shift(Direction::ToTail),
            task: 0,
            target_proc: 0,
            target_pos: 2,
        };
        assert!(!l.is_move_tabu(&after, &onward, 1));
    }
}
