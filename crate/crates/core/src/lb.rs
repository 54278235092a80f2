//! Load-balancing list scheduler used as the comparison baseline.
//!
//! The ready task that can start moving in earliest goes to the candidate
//! processor with the least accumulated busy time. Outputs are placed in
//! block id order with the same fast-memory-first rule as the greedy
//! constructor.

use crate::model::{Instance, Solution};
use crate::partial::Builder;

pub fn load_balance_schedule(inst: &Instance) -> Solution {
    let mut b = Builder::new(inst);
    while !b.is_done() {
        let t = b
            .frontier()
            .into_iter()
            .min_by_key(|&t| (b.data_ready(t), t))
            .expect("an acyclic instance always has a ready task");
        let p = inst
            .task(t)
            .candidates()
            .min_by_key(|&p| (b.busy[p], p))
            .expect("candidate sets are non-empty");
        let outs = inst.task(t).outputs.clone();
        let trial = b.trial(t, p, &outs);
        b.commit(trial);
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{is_feasible, simulate};
    use crate::fixtures;
    use crate::greedy::{greedy_assign, PriorityKind, PriorityStrategy};

    #[test]
    fn single_task_matches_greedy() {
        let inst = fixtures::single_task(27);
        let g = greedy_assign(&inst, &PriorityStrategy::new(PriorityKind::SlackFirst));
        assert_eq!(load_balance_schedule(&inst), g);
    }

    #[test]
    fn equal_independent_tasks_spread_out() {
        let inst = fixtures::independent(&[10, 10], 2);
        let sol = load_balance_schedule(&inst);
        assert_ne!(sol.assignment[0], sol.assignment[1]);
        assert_eq!(simulate(&inst, &sol).unwrap().makespan, 10);
    }

    #[test]
    fn tiny3_is_feasible() {
        let inst = fixtures::tiny3();
        assert!(is_feasible(&inst, &load_balance_schedule(&inst)).is_feasible());
    }
}
