//! One solver run over an instance, shared by `solve` and `bench`.

use std::time::Instant;

use clap::ValueEnum;
use hdats_core::eval::simulate;
use hdats_core::tabu::{solve_with, TraceRow};
use hdats_core::{
    greedy_assign, load_balance_schedule, Clock, Instance, PriorityKind, PriorityStrategy,
    SearchParams, Solution, StepClock, Time, WorkClock,
};

use crate::io::WallClock;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Tabu search from a greedy start.
    Ts,
    /// Load-balancing baseline.
    Lb,
    /// The constructive heuristic alone.
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Init {
    Slack,
    R,
    Rand,
    Relaxr,
}

impl From<Init> for PriorityKind {
    fn from(i: Init) -> Self {
        match i {
            Init::Slack => PriorityKind::SlackFirst,
            Init::R => PriorityKind::RFirst,
            Init::Rand => PriorityKind::Random,
            Init::Relaxr => PriorityKind::RelaxR,
        }
    }
}

/// What `tmax` is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClockKind {
    /// Real elapsed time. Results depend on machine speed.
    Wall,
    /// Charged evaluation work; runs are reproducible.
    Work,
    /// One millisecond per iteration.
    Step,
}

/// Microseconds charged per exact and per approximate evaluation by the
/// work clock, roughly their cost on a 300-task instance.
pub const WORK_EXACT_US: u64 = 4000;
pub const WORK_APPROX_US: u64 = 2;

#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub alg: Algorithm,
    pub init: Init,
    pub clock: ClockKind,
    pub params: SearchParams,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub solution: Solution,
    pub makespan: Time,
    pub trace: Vec<TraceRow>,
    pub wall_ms: f64,
}

pub fn run(inst: &Instance, cfg: &RunConfig) -> RunOutcome {
    let started = Instant::now();
    let strategy = PriorityStrategy::new(cfg.init.into()).with_seed(cfg.params.seed);
    let (solution, trace) = match cfg.alg {
        Algorithm::Lb => (load_balance_schedule(inst), Vec::new()),
        Algorithm::Greedy => (greedy_assign(inst, &strategy), Vec::new()),
        Algorithm::Ts => {
            let clock: Box<dyn Clock> = match cfg.clock {
                ClockKind::Wall => Box::new(WallClock::start()),
                ClockKind::Work => Box::new(WorkClock::new(WORK_EXACT_US, WORK_APPROX_US)),
                ClockKind::Step => Box::new(StepClock::new(1)),
            };
            let r = solve_with(inst, &cfg.params, &strategy, clock.as_ref(), &mut |_| {});
            (r.best, r.trace)
        }
    };
    let makespan = simulate(inst, &solution).expect("solvers return acyclic solutions").makespan;
    RunOutcome {
        solution,
        makespan,
        trace,
        wall_ms: started.elapsed().as_secs_f64() * 1000.0,
    }
}
