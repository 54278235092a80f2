mod common;

use common::{dfs_has_cycle, random_solution, rng, tiny_instance, ORACLE_SHAPE};
use hdats_core::model::validate_solution;
use hdats_core::{fixtures, Instance, ModelError, Solution};
use proptest::prelude::*;
use rand::Rng;

/// Direct restatement of the three solution rules.
fn rules_hold(inst: &Instance, sol: &Solution) -> bool {
    let n = inst.num_tasks();
    let np = inst.num_procs();
    let assignment_ok = sol.assignment.len() == n
        && sol
            .assignment
            .iter()
            .enumerate()
            .all(|(t, &p)| p < np && inst.task(t).proc_time(p).is_some());
    let sequences_ok = sol.sequences.len() == np && {
        let mut count = vec![0; n];
        let mut ok = true;
        for (p, seq) in sol.sequences.iter().enumerate() {
            for &t in seq {
                if t >= n || sol.assignment.get(t) != Some(&p) {
                    ok = false;
                } else {
                    count[t] += 1;
                }
            }
        }
        ok && count.iter().all(|&c| c == 1)
    };
    let allocation_ok = sol.allocation.len() == inst.num_blocks()
        && sol.allocation.iter().all(|&m| m < inst.memories().len());
    assignment_ok && sequences_ok && allocation_ok
}

fn mutate(inst: &Instance, sol: &mut Solution, seed: u64) {
    let mut r = rng(seed);
    let n = inst.num_tasks();
    match r.gen_range(0..8) {
        0 => {
            let t = r.gen_range(0..n);
            sol.assignment[t] = r.gen_range(0..inst.num_procs() + 1);
        }
        1 => {
            let p = r.gen_range(0..sol.sequences.len());
            if let Some(&t) = sol.sequences[p].first() {
                sol.sequences[p].push(t);
            }
        }
        2 => {
            let p = r.gen_range(0..sol.sequences.len());
            sol.sequences[p].pop();
        }
        3 => {
            if !sol.allocation.is_empty() {
                let b = r.gen_range(0..sol.allocation.len());
                sol.allocation[b] = r.gen_range(0..inst.memories().len() + 2);
            }
        }
        4 => {
            sol.allocation.pop();
        }
        5 => sol.allocation.push(0),
        6 => sol.sequences.push(Vec::new()),
        _ => {
            let p = r.gen_range(0..sol.sequences.len());
            sol.sequences[p].push(n + r.gen_range(0..3));
        }
    }
}

#[test]
fn validation_agrees_with_rule_check() {
    for seed in 0..500 {
        let inst = tiny_instance(seed, &ORACLE_SHAPE);
        let mut sol = random_solution(&inst, seed);
        assert!(validate_solution(&inst, &sol).is_empty());
        assert!(rules_hold(&inst, &sol));
        for k in 0..3 {
            mutate(&inst, &mut sol, seed * 7 + k);
            assert_eq!(
                validate_solution(&inst, &sol).is_empty(),
                rules_hold(&inst, &sol),
                "seed {seed} step {k}: {sol:?}"
            );
        }
    }
}

#[test]
fn non_candidate_assignment_is_named() {
    let inst = fixtures::two_procs_one_candidate();
    let sol = Solution::from_sequences(1, vec![vec![], vec![0]], vec![]);
    let v = validate_solution(&inst, &sol);
    assert_eq!(v.len(), 1);
    assert!(v[0].to_message().contains("task 0"));
}

#[test]
fn missing_allocation_is_reported() {
    let inst = fixtures::tiny3();
    let sol = Solution::from_sequences(3, vec![vec![0, 1, 2], vec![]], vec![]);
    assert_eq!(validate_solution(&inst, &sol).len(), 1);
}

#[test]
fn cycle_detection_agrees_with_dfs_up_to_50_nodes() {
    for seed in 0..400 {
        let mut r = rng(seed);
        let n = r.gen_range(1..=50);
        let density = r.gen_range(0.0..0.08);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && r.gen_bool(density) {
                    edges.push((u, v));
                }
            }
        }
        let cyclic = dfs_has_cycle(n, &edges);
        match fixtures::with_edges(n, &edges) {
            Ok(_) => assert!(!cyclic, "seed {seed}: cycle missed"),
            Err(ModelError::Cycle(_)) => assert!(cyclic, "seed {seed}: false cycle"),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

proptest! {
    #[test]
    fn acyclicity_matches_dfs(n in 1usize..20, raw in proptest::collection::vec((0usize..20, 0usize..20), 0..40)) {
        let edges: Vec<_> = raw.into_iter().map(|(u, v)| (u % n, v % n)).filter(|(u, v)| u != v).collect();
        let built = fixtures::with_edges(n, &edges);
        prop_assert_eq!(built.is_ok(), !dfs_has_cycle(n, &edges));
    }
}
