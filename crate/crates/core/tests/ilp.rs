mod common;

use common::{oracle_feasible, random_solution, respects_locality, tiny_instance, TinyShape};
use hdats_core::ilp::{brute_force_optimum, emit_ilp, parse_lp, point_of_solution, BruteLimits, IlpOptions};
use hdats_core::{fixtures, load_balance_schedule, simulate};

const SMALL: TinyShape = TinyShape {
    max_tasks: 5,
    max_procs: 2,
    max_blocks: 3,
};

#[test]
fn emitted_models_round_trip_through_the_parser() {
    for seed in 0..30 {
        let inst = tiny_instance(seed, &SMALL);
        let horizon = simulate(&inst, &load_balance_schedule(&inst)).unwrap().makespan;
        let ex = emit_ilp(&inst, &IlpOptions::new(horizon)).unwrap();
        assert!(ex.warnings.is_empty(), "seed {seed}: {:?}", ex.warnings);
        let lp = parse_lp(&ex.text).unwrap_or_else(|e| panic!("seed {seed}: {e:?}"));
        let again = parse_lp(&lp.to_text()).unwrap();
        assert_eq!(lp, again, "seed {seed}");
    }
}

#[test]
fn optimal_and_random_schedules_are_model_points() {
    for seed in 0..30 {
        let inst = tiny_instance(seed, &SMALL);
        let (opt, ms) = brute_force_optimum(&inst, &BruteLimits::default()).unwrap();
        let horizon = simulate(&inst, &load_balance_schedule(&inst)).unwrap().makespan;
        let lp = parse_lp(&emit_ilp(&inst, &IlpOptions::new(horizon)).unwrap().text).unwrap();

        let point = point_of_solution(&inst, &opt);
        assert_eq!(lp.violated(&point), None, "seed {seed}");
        assert_eq!(lp.objective_value(&point), ms as i64, "seed {seed}");

        for k in 0..5 {
            let sol = random_solution(&inst, seed * 10 + k);
            let sched = simulate(&inst, &sol).unwrap();
            if !oracle_feasible(&inst, &sol) || !respects_locality(&inst, &sol) || sched.makespan > horizon {
                continue;
            }
            let point = point_of_solution(&inst, &sol);
            assert_eq!(lp.violated(&point), None, "seed {seed} sample {k}");
        }
    }
}

#[test]
fn brute_force_is_a_lower_bound_for_baseline() {
    for seed in 0..60 {
        let inst = tiny_instance(seed, &common::ORACLE_SHAPE);
        let (opt, ms) = brute_force_optimum(&inst, &BruteLimits::default()).unwrap();
        assert!(oracle_feasible(&inst, &opt));
        assert!(respects_locality(&inst, &opt));
        assert_eq!(simulate(&inst, &opt).unwrap().makespan, ms);
        let lb = simulate(&inst, &load_balance_schedule(&inst)).unwrap().makespan;
        assert!(ms <= lb, "seed {seed}");
    }
}

#[test]
fn tiny3_model_keeps_its_optimum_feasible() {
    let inst = fixtures::tiny3();
    let (opt, ms) = brute_force_optimum(&inst, &BruteLimits::default()).unwrap();
    assert_eq!(ms, 40);
    let lp = parse_lp(&emit_ilp(&inst, &IlpOptions::new(60)).unwrap().text).unwrap();
    let p = point_of_solution(&inst, &opt);
    assert_eq!(lp.violated(&p), None);
    assert_eq!(lp.objective_value(&p), 40);
}
