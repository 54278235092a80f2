//! Priority-driven constructive heuristic.
//!
//! Ready tasks are picked one at a time by a priority rule over the current
//! head/slack metrics. The picked task is tried on every candidate processor
//! with tentative output allocation and placed where it completes first.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{self, GraphMetrics};
use crate::model::{BlockId, Instance, Solution, TaskId, Time};
use crate::partial::{Builder, Trial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PriorityKind {
    SlackFirst,
    RFirst,
    Random,
    RelaxR,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PriorityStrategy {
    pub kind: PriorityKind,
    /// Head tolerance for [`PriorityKind::RelaxR`]; `None` means 5% of the
    /// current makespan estimate.
    pub epsilon: Option<Time>,
    pub seed: u64,
}

impl PriorityStrategy {
    pub fn new(kind: PriorityKind) -> Self {
        PriorityStrategy {
            kind,
            epsilon: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn min_succ_slack(inst: &Instance, m: &GraphMetrics, t: TaskId) -> Time {
    inst.succs(t)
        .iter()
        .map(|&s| m.slack[s])
        .min()
        .unwrap_or(Time::MAX)
}

/// Picks the next task from a non-empty frontier. Returns `None` when the
/// frontier is empty.
pub fn select_next_task(
    inst: &Instance,
    frontier: &[TaskId],
    m: &GraphMetrics,
    strat: &PriorityStrategy,
    rng: &mut impl Rng,
) -> Option<TaskId> {
    if frontier.is_empty() {
        return None;
    }
    let key = |t: TaskId| (m.head[t], m.slack[t], min_succ_slack(inst, m, t), t);
    let pick = match strat.kind {
        PriorityKind::RFirst => frontier.iter().copied().min_by_key(|&t| key(t)),
        PriorityKind::SlackFirst => frontier.iter().copied().min_by_key(|&t| {
            let (r, s, ss, id) = key(t);
            (s, r, ss, id)
        }),
        PriorityKind::Random => Some(frontier[rng.gen_range(0..frontier.len())]),
        PriorityKind::RelaxR => {
            let eps = strat.epsilon.unwrap_or(m.cmax / 20);
            let min_r = frontier.iter().map(|&t| m.head[t]).min().unwrap_or(0);
            frontier
                .iter()
                .copied()
                .filter(|&t| m.head[t] <= min_r.saturating_add(eps))
                .min_by_key(|&t| (m.slack[t], m.head[t], t))
        }
    };
    pick
}

/// Outputs of `t` ordered by the smallest slack among their consumers.
fn outputs_by_urgency(inst: &Instance, m: &GraphMetrics, t: TaskId) -> Vec<BlockId> {
    let mut outs = inst.task(t).outputs.clone();
    outs.sort_by_key(|&b| {
        let s = inst
            .block(b)
            .consumers
            .iter()
            .map(|&c| m.slack[c])
            .min()
            .unwrap_or(Time::MAX);
        (s, b)
    });
    outs
}

fn partial_metrics(inst: &Instance, b: &Builder<'_>) -> GraphMetrics {
    graph::metrics_with_links(inst, &b.links(), &b.durations)
        .expect("appending in topological order keeps the graph acyclic")
}

/// Builds a feasible solution with the given priority rule.
pub fn greedy_assign(inst: &Instance, strat: &PriorityStrategy) -> Solution {
    let mut rng = ChaCha8Rng::seed_from_u64(strat.seed);
    let mut b = Builder::new(inst);
    let mut metrics = partial_metrics(inst, &b);
    while !b.is_done() {
        let frontier = b.frontier();
        let t = select_next_task(inst, &frontier, &metrics, strat, &mut rng)
            .expect("an acyclic instance always has a ready task");
        let outs = outputs_by_urgency(inst, &metrics, t);
        let best: Trial = inst
            .task(t)
            .candidates()
            .map(|p| b.trial(t, p, &outs))
            .min_by_key(|tr| (tr.end(), tr.proc))
            .expect("candidate sets are non-empty");
        b.commit(best);
        metrics = partial_metrics(inst, &b);
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{is_feasible, simulate};
    use crate::fixtures;
    use alloc::vec;

    fn frontier_metrics() -> GraphMetrics {
        // t0: R=0, slack 5; t1: R=3, slack 0.
        GraphMetrics {
            topo_order: vec![0, 1],
            head: vec![0, 3],
            tail: vec![5, 10],
            slack: vec![5, 0],
            cmax: 10,
            critical: vec![false, true],
        }
    }

    fn pick(kind: PriorityKind, eps: Option<Time>) -> TaskId {
        let inst = fixtures::independent(&[1, 1], 1);
        let strat = PriorityStrategy {
            kind,
            epsilon: eps,
            seed: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        select_next_task(&inst, &[0, 1], &frontier_metrics(), &strat, &mut rng).unwrap()
    }

    #[test]
    fn priority_rules_on_two_task_frontier() {
        assert_eq!(pick(PriorityKind::RFirst, None), 0);
        assert_eq!(pick(PriorityKind::SlackFirst, None), 1);
        assert_eq!(pick(PriorityKind::RelaxR, Some(3)), 1);
        assert_eq!(pick(PriorityKind::RelaxR, Some(2)), 0);
    }

    #[test]
    fn empty_frontier_has_no_pick() {
        let inst = fixtures::single_task(1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = PriorityStrategy::new(PriorityKind::RFirst);
        assert_eq!(select_next_task(&inst, &[], &frontier_metrics(), &s, &mut rng), None);
    }

    #[test]
    fn tiny3_spreads_consumers_and_uses_fast_memory() {
        let inst = fixtures::tiny3();
        let sol = greedy_assign(&inst, &PriorityStrategy::new(PriorityKind::SlackFirst));
        assert_ne!(sol.assignment[1], sol.assignment[2]);
        assert_eq!(sol.allocation, vec![0]);
        assert!(is_feasible(&inst, &sol).is_feasible());
        // A: 15 + 5 out; B and C: 5 in + 15.
        assert_eq!(simulate(&inst, &sol).unwrap().makespan, 40);
    }

    #[test]
    fn one_processor_serializes_in_topological_order() {
        let inst = fixtures::with_edges(4, &[(0, 2), (1, 3)]).unwrap();
        let sol = greedy_assign(&inst, &PriorityStrategy::new(PriorityKind::RFirst));
        assert_eq!(sol.sequences[0].len(), 4);
        assert_eq!(simulate(&inst, &sol).unwrap().makespan, 4);
    }

    #[test]
    fn every_strategy_is_feasible_and_deterministic() {
        let inst = fixtures::tiny3();
        for kind in [
            PriorityKind::SlackFirst,
            PriorityKind::RFirst,
            PriorityKind::Random,
            PriorityKind::RelaxR,
        ] {
            let s = PriorityStrategy::new(kind).with_seed(7);
            let a = greedy_assign(&inst, &s);
            assert!(is_feasible(&inst, &a).is_feasible());
            assert_eq!(a, greedy_assign(&inst, &s));
        }
    }
}
