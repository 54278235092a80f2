use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::neighborhood::{enumerate_neighborhood, insertion_window, Move, MoveKind};
use super::tabu_list::{TabuKey, TabuList};
use crate::clock::{Clock, StepClock};
use crate::eval::{apply_relocation, first_overflow, approx_makespan, simulate, Relocation, Snapshot};
use crate::greedy::{greedy_assign, PriorityStrategy};
use crate::model::{Instance, Solution, TaskId, Time};
use crate::realloc::{improve_allocation, respects_locality, reallocate, reallocate_with};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchParams {
    /// Neighbours evaluated exactly per iteration.
    pub kmax: usize,
    /// Stop after this many consecutive iterations without improvement.
    pub lambda: u64,
    /// Time budget in milliseconds of the supplied clock.
    pub tmax_ms: u64,
    /// Every this many adoptions the full reallocation runs instead of the fast one.
    pub realloc_round: u64,
    /// Never run the full reallocation during the search.
    pub fast_realloc: bool,
    /// Metric refresh interval of the fast reallocation.
    pub fast_refresh: usize,
    pub seed: u64,
    pub max_iters: Option<u64>,
    /// Replaces the random tenure draws when set.
    pub fixed_tenure: Option<u64>,
    /// When the allocation descent runs.
    pub polish: Polish,
    /// Candidate allocations one descent may evaluate.
    pub polish_evals: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            kmax: 100,
            lambda: 100_000,
            tmax_ms: 600_000,
            realloc_round: 100,
            fast_realloc: false,
            fast_refresh: 10,
            seed: 0,
            max_iters: None,
            fixed_tenure: None,
            polish: Polish::Ends,
            polish_evals: 400,
        }
    }
}

/// Points of the search at which the allocation descent is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polish {
    Off,
    /// The initial solution and the final best.
    Ends,
    /// The initial solution and every new best.
    EveryBest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub iteration: u64,
    pub elapsed_ms: u64,
    pub current: Time,
    pub best: Time,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub best: Solution,
    pub best_makespan: Time,
    pub initial_makespan: Time,
    pub iterations: u64,
    pub trace: Vec<TraceRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Adopted(Move),
    Perturbed,
    /// No move and no perturbation is possible.
    Stalled,
}

/// Mutable state of one search run.
#[derive(Clone, Debug)]
pub struct SearchState {
    pub current: Snapshot,
    pub best: Solution,
    pub best_makespan: Time,
    pub tabu: TabuList,
    pub iteration: u64,
    pub unimproved: u64,
    pub adoptions: u64,
    /// Neighbours reallocated and simulated so far.
    pub exact_evals: u64,
    /// Neighbours screened with the approximate evaluator so far.
    pub approx_evals: u64,
    rng: ChaCha8Rng,
}

impl SearchState {
    pub fn new(inst: &Instance, initial: Solution, seed: u64) -> Self {
        let current = Snapshot::new(inst, initial).expect("initial solution is acyclic");
        SearchState {
            best: current.sol.clone(),
            best_makespan: current.metrics.cmax,
            current,
            tabu: TabuList::new(),
            iteration: 0,
            unimproved: 0,
            adoptions: 0,
            exact_evals: 0,
            approx_evals: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn current_makespan(&self) -> Time {
        self.current.metrics.cmax
    }

    fn tenure(&mut self, inst: &Instance, kind: MoveKind, params: &SearchParams) -> u64 {
        if let Some(t) = params.fixed_tenure {
            return t;
        }
        match kind {
            MoveKind::Shift(_) => {
                let n = inst.num_tasks() as u64;
                n + self.rng.gen_range(0..n.max(1))
            }
            MoveKind::ChangeCore => {
                let m = inst.num_procs() as u64;
                m + self.rng.gen_range(0..(2 * m).max(1))
            }
        }
    }

    fn accept(&mut self, inst: &Instance, sol: Solution, params: &SearchParams) {
        self.iteration += 1;
        let mut sol = sol;
        let mut ms = simulate(inst, &sol).expect("adopted moves keep the graph acyclic").makespan;
        if ms < self.best_makespan && params.polish == Polish::EveryBest {
            (ms, sol) = polish(inst, sol, ms, params.polish_evals);
        }
        self.current = Snapshot::new(inst, sol).expect("adopted moves keep the graph acyclic");
        if ms < self.best_makespan {
            self.best_makespan = ms;
            self.best = self.current.sol.clone();
            self.unimproved = 0;
        } else {
            self.unimproved += 1;
        }
        if self.iteration.is_multiple_of(1024) {
            self.tabu.purge(self.iteration);
        }
    }
}

/// Allocation descent from the given allocation and from a fresh full
/// reallocation; returns the better result, or the input if neither helps.
fn polish(inst: &Instance, sol: Solution, ms: Time, evals: usize) -> (Time, Solution) {
    let mut best = (ms, sol);
    for start in [best.1.clone(), reallocate(inst, &best.1)] {
        let cand = improve_allocation(inst, &start, evals / 2);
        let cms = simulate(inst, &cand).expect("acyclic").makespan;
        if cms < best.0 {
            best = (cms, cand);
        }
    }
    best
}

/// Applies a move and reallocates memory with the fast variant.
pub(crate) fn evaluate_move(inst: &Instance, sol: &Solution, mv: &Move, refresh: usize) -> (Time, Solution) {
    let moved = apply_relocation(sol, &mv.relocation());
    let realloc = reallocate_with(inst, &moved, refresh);
    let ms = simulate(inst, &realloc).expect("moves keep the graph acyclic").makespan;
    let kept = simulate(inst, &moved).expect("moves keep the graph acyclic");
    if kept.makespan < ms && first_overflow(inst, &kept, &moved.allocation).is_none() && respects_locality(inst, &moved) {
        return (kept.makespan, moved);
    }
    (ms, realloc)
}

/// One iteration: screen all neighbours approximately, evaluate the best
/// `kmax` non-tabu ones (and tabu ones ranked within the first `kmax`)
/// exactly, and adopt the best admissible one. A tabu move is admissible
/// when its exact makespan beats the best so far. Without an admissible
/// move the current solution is perturbed.
pub fn tabu_step(inst: &Instance, state: &mut SearchState, params: &SearchParams) -> StepOutcome {
    let now = state.iteration;
    let moves = enumerate_neighborhood(inst, &state.current);
    let mut scored: Vec<(Time, Move)> = moves
        .into_iter()
        .map(|m| (approx_makespan(inst, &state.current, &m.relocation()), m))
        .collect();
    scored.sort_unstable();
    state.approx_evals += scored.len() as u64;

    let kmax = params.kmax.max(1);
    let mut free_taken = 0;
    let mut best: Option<(Time, Move, Solution)> = None;
    for (rank, &(_, mv)) in scored.iter().enumerate() {
        let tabu = state.tabu.is_move_tabu(&state.current.sol, &mv, now);
        if tabu && rank >= kmax {
            continue;
        }
        if !tabu {
            if free_taken == kmax {
                continue;
            }
            free_taken += 1;
        }
        let (ms, sol) = evaluate_move(inst, &state.current.sol, &mv, params.fast_refresh);
        state.exact_evals += 1;
        if tabu && ms >= state.best_makespan {
            continue;
        }
        if best.as_ref().is_none_or(|b| (ms, mv) < (b.0, b.1)) {
            best = Some((ms, mv, sol));
        }
    }

    let Some((ms, mv, mut sol)) = best else {
        let perturbed = random_perturbation(inst, &state.current.sol, &mut state.rng);
        if perturbed == state.current.sol {
            return StepOutcome::Stalled;
        }
        state.accept(inst, perturbed, params);
        return StepOutcome::Perturbed;
    };

    let undo = TabuKey::reversals(&state.current.sol, &mv);
    state.adoptions += 1;
    if !params.fast_realloc && params.realloc_round > 0 && state.adoptions.is_multiple_of(params.realloc_round) {
        let full = reallocate(inst, &sol);
        let full_ms = simulate(inst, &full).expect("acyclic").makespan;
        if full_ms <= ms {
            sol = full;
        }
    }
    let tenure = state.tenure(inst, mv.kind, params);
    for key in undo {
        state.tabu.insert(key, now, tenure);
    }
    state.accept(inst, sol, params);
    StepOutcome::Adopted(mv)
}

/// Moves two to four critical tasks to random processors and positions,
/// then reallocates memory. Returns the input unchanged when no task can
/// be moved.
pub fn random_perturbation(inst: &Instance, sol: &Solution, rng: &mut impl Rng) -> Solution {
    let Ok(snap) = Snapshot::new(inst, sol.clone()) else {
        return sol.clone();
    };
    let mut critical: Vec<TaskId> = snap.metrics.critical_tasks().collect();
    critical.shuffle(rng);
    let count = rng.gen_range(2..=4).min(critical.len());

    let mut cur = snap;
    let mut moved = false;
    for &u in &critical[..count] {
        let cands: Vec<_> = inst.task(u).candidates().collect();
        for _ in 0..20 {
            let p = cands[rng.gen_range(0..cands.len())];
            let Some((lo, hi)) = insertion_window(inst, &cur.sol, &cur.links, u, p) else {
                continue;
            };
            let r = Relocation {
                task: u,
                proc: p,
                pos: rng.gen_range(lo..=hi),
            };
            if cur.is_identity(&r) {
                continue;
            }
            let next = apply_relocation(&cur.sol, &r);
            cur = Snapshot::new(inst, next).expect("windowed insertions stay acyclic");
            moved = true;
            break;
        }
    }
    if !moved {
        return sol.clone();
    }
    reallocate(inst, &cur.sol)
}

/// Search from a greedy start with a logical clock that advances one
/// millisecond per iteration, so `tmax_ms` acts as an iteration budget.
pub fn solve(inst: &Instance, params: &SearchParams, init: &PriorityStrategy) -> SolveResult {
    solve_with(inst, params, init, &StepClock::new(1), &mut |_| {})
}

/// Search with an explicit clock. `observer` sees the initial solution and
/// every solution adopted afterwards.
pub fn solve_with(
    inst: &Instance,
    params: &SearchParams,
    init: &PriorityStrategy,
    clock: &dyn Clock,
    observer: &mut dyn FnMut(&Solution),
) -> SolveResult {
    let initial = greedy_assign(inst, init);
    observer(&initial);
    let mut state = SearchState::new(inst, initial, params.seed);
    let initial_makespan = state.current_makespan();
    let mut trace = Vec::new();
    let mut elapsed = clock.elapsed_ms();
    trace.push(TraceRow {
        iteration: 0,
        elapsed_ms: elapsed,
        current: initial_makespan,
        best: initial_makespan,
    });

    // The constructive allocation is only a starting point: reallocate it
    // once and keep the result when it is strictly better.
    let polished = if params.polish != Polish::Off {
        polish(inst, state.current.sol.clone(), initial_makespan, params.polish_evals).1
    } else {
        reallocate(inst, &state.current.sol)
    };
    if simulate(inst, &polished).expect("acyclic").makespan < initial_makespan {
        state.accept(inst, polished, params);
        observer(&state.current.sol);
        elapsed = clock.elapsed_ms();
        trace.push(TraceRow {
            iteration: state.iteration,
            elapsed_ms: elapsed,
            current: state.current_makespan(),
            best: state.best_makespan,
        });
    }

    while state.unimproved < params.lambda
        && elapsed < params.tmax_ms
        && params.max_iters.is_none_or(|m| state.iteration < m)
    {
        let work = (state.exact_evals, state.approx_evals);
        let outcome = tabu_step(inst, &mut state, params);
        clock.charge(state.exact_evals - work.0, state.approx_evals - work.1);
        if outcome == StepOutcome::Stalled {
            break;
        }
        observer(&state.current.sol);
        elapsed = clock.elapsed_ms();
        trace.push(TraceRow {
            iteration: state.iteration,
            elapsed_ms: elapsed,
            current: state.current_makespan(),
            best: state.best_makespan,
        });
    }

    if params.polish == Polish::Ends {
        let (ms, sol) = polish(inst, state.best.clone(), state.best_makespan, params.polish_evals);
        if ms < state.best_makespan {
            state.accept(inst, sol, params);
            observer(&state.current.sol);
            trace.push(TraceRow {
                iteration: state.iteration,
                elapsed_ms: clock.elapsed_ms(),
                current: state.current_makespan(),
                best: state.best_makespan,
            });
        }
    }

    SolveResult {
        best: state.best,
        best_makespan: state.best_makespan,
        initial_makespan,
        iterations: state.iteration,
        trace,
    }
}
