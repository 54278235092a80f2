//! Memory reallocation for fixed task sequences.
//!
//! Every block starts in the low-speed bank. Blocks are then promoted one by
//! one, most critical first: a block goes to the first fast bank (global,
//! then the local bank of its home group) that stays within capacity over
//! the block's lifetime. Metrics and lifetimes are refreshed as promotions
//! shorten transfers. A final simulation demotes blocks until every bank
//! fits, which covers lifetimes that shifted after a block was placed.

use alloc::vec;
use alloc::vec::Vec;

use crate::eval::{self, bank_preference, window_peak_with, Infeasibility, Lifetime};
use crate::graph::{self, GraphMetrics, SeqLinks};
use crate::model::{BlockId, Capacity, Instance, MemId, MemType, Solution};

/// Number of critical tasks among a block's producer and consumers.
pub fn critical_usage_counts(inst: &Instance, metrics: &GraphMetrics) -> Vec<usize> {
    inst.blocks()
        .iter()
        .map(|b| {
            let prod = b.producer.map_or(0, |p| usize::from(metrics.critical[p]));
            prod + b.consumers.iter().filter(|&&c| metrics.critical[c]).count()
        })
        .collect()
}

/// Processor group whose local fast memory a block may use: the group of
/// the producer's processor, or of the first consumer's for initial blocks.
fn home_group(inst: &Instance, sol: &Solution, b: BlockId) -> u32 {
    inst.block(b)
        .home_task()
        .map_or(0, |t| inst.processor(sol.assignment[t]).group)
}

/// Whether every block in a local fast bank belongs to that bank's group.
pub fn respects_locality(inst: &Instance, sol: &Solution) -> bool {
    (0..inst.num_blocks()).all(|b| {
        let bank = inst.memory(sol.allocation[b]);
        bank.mtype != MemType::High1 || bank.group == home_group(inst, sol, b)
    })
}

/// Full reallocation, refreshing metrics after every placed block.
pub fn reallocate(inst: &Instance, sol: &Solution) -> Solution {
    reallocate_with(inst, sol, 1)
}

/// Reallocation that refreshes metrics and lifetimes every `refresh_every`
/// placed blocks.
pub fn reallocate_with(inst: &Instance, sol: &Solution, refresh_every: usize) -> Solution {
    let refresh_every = refresh_every.max(1);
    let nb = inst.num_blocks();
    let low = inst.low_bank();
    let links = SeqLinks::from_sequences(inst.num_tasks(), &sol.sequences);
    let order = graph::combined_topo_order(inst, &links).expect("sequences of a valid solution are acyclic");
    let mut out = sol.clone();
    out.allocation = vec![low; nb];

    let mut remaining: Vec<bool> = vec![true; nb];
    let mut commit_rank: Vec<usize> = vec![0; nb];
    let mut resident: Vec<Vec<BlockId>> = vec![Vec::new(); inst.memories().len()];
    let mut lifetimes: Vec<Lifetime> = Vec::new();
    // Remaining blocks by descending priority; usage only changes on refresh.
    let mut queue: Vec<BlockId> = Vec::new();
    let mut prefs_by_group: Vec<(u32, Vec<MemId>)> = Vec::new();
    let mut events: Vec<(u64, i64)> = Vec::new();
    let mut d = eval::task_durations(inst, &out);

    for step in 0..nb {
        if step % refresh_every == 0 {
            let m = graph::metrics_in_order(inst, &links, order.clone(), &d);
            let usage = critical_usage_counts(inst, &m);
            let ends: Vec<_> = (0..inst.num_tasks()).map(|t| m.head[t] + d[t].total()).collect();
            lifetimes = eval::block_lifetimes(inst, &m.head, &ends);
            queue = (0..nb).filter(|&b| remaining[b]).collect();
            queue.sort_unstable_by_key(|&b| {
                core::cmp::Reverse((usage[b], inst.block(b).size, core::cmp::Reverse(b)))
            });
            queue.reverse();
        }
        let b = queue.pop().expect("a block remains");
        remaining[b] = false;
        commit_rank[b] = step;

        let size = inst.block(b).size;
        let lt = lifetimes[b];
        let group = home_group(inst, sol, b);
        let idx = match prefs_by_group.iter().position(|(g, _)| *g == group) {
            Some(i) => i,
            None => {
                prefs_by_group.push((group, bank_preference(inst, group)));
                prefs_by_group.len() - 1
            }
        };
        let mem = prefs_by_group[idx]
            .1
            .iter()
            .copied()
            .find(|&mem| match inst.memory(mem).capacity {
                Capacity::Unbounded => true,
                Capacity::Finite(cap) => {
                    size <= cap && {
                        let iv = resident[mem]
                            .iter()
                            .map(|&o| (lifetimes[o].enter, lifetimes[o].release, inst.block(o).size));
                        window_peak_with(iv, lt.enter, lt.release, &mut events) + size <= cap
                    }
                }
            })
            .unwrap_or(low);
        out.allocation[b] = mem;
        if mem != low {
            resident[mem].push(b);
            let blk = inst.block(b);
            let ptype = |t: usize| inst.processor(sol.assignment[t]).ptype;
            if let Some(p) = blk.producer {
                d[p].move_out = d[p].move_out - inst.transfer(b, low, ptype(p)) + inst.transfer(b, mem, ptype(p));
            }
            for &c in &blk.consumers {
                d[c].move_in = d[c].move_in - inst.transfer(b, low, ptype(c)) + inst.transfer(b, mem, ptype(c));
            }
        }
    }

    repair(inst, &mut out, &commit_rank);
    out
}

/// Demotes blocks to the low-speed bank until no bank overflows. The
/// demoted block is the most recently placed one alive at the first
/// overflow instant.
fn repair(inst: &Instance, sol: &mut Solution, commit_rank: &[usize]) {
    let low = inst.low_bank();
    loop {
        let sched = eval::simulate(inst, sol).expect("sequences of a valid solution are acyclic");
        let Some(Infeasibility::Capacity { mem, capacity, .. }) =
            eval::first_overflow(inst, &sched, &sol.allocation)
        else {
            return;
        };
        let at = overflow_time(inst, &sched.lifetimes, &sol.allocation, mem, capacity);
        let victim = (0..inst.num_blocks())
            .filter(|&b| sol.allocation[b] == mem)
            .filter(|&b| sched.lifetimes[b].enter <= at && at < sched.lifetimes[b].release)
            .max_by_key(|&b| commit_rank[b])
            .expect("an overflow has resident blocks");
        sol.allocation[victim] = low;
    }
}

fn overflow_time(inst: &Instance, lifetimes: &[Lifetime], alloc: &[MemId], mem: MemId, cap: u64) -> u64 {
    let mut events: Vec<(u64, i64)> = Vec::new();
    for (b, lt) in lifetimes.iter().enumerate() {
        if alloc[b] == mem && lt.enter < lt.release {
            let s = inst.block(b).size as i64;
            events.push((lt.enter, s));
            events.push((lt.release, -s));
        }
    }
    events.sort_unstable();
    let mut cur = 0i64;
    for (t, d) in events {
        cur += d;
        if cur > cap as i64 {
            return t;
        }
    }
    unreachable!("overflow reported by the occupancy profile")
}

/// Banks a block may live in: any bank that fits it, with local fast
/// memory limited to the block's home group.
fn admissible_banks(inst: &Instance, sol: &Solution, b: BlockId) -> Vec<MemId> {
    let group = home_group(inst, sol, b);
    let size = inst.block(b).size;
    (0..inst.memories().len())
        .filter(|&m| {
            let bank = inst.memory(m);
            bank.capacity.admits(size) && (bank.mtype != MemType::High1 || bank.group == group)
        })
        .collect()
}

/// Allocation descent for fixed sequences. Each round tries, for every
/// block used by a critical task and every other admissible bank, two
/// moves: putting the block
/// there directly, and putting it there while evicting the smallest
/// co-resident blocks until the bank fits and then refilling fast banks
/// with low-speed blocks that still fit. The best move that shortens the
/// makespan and keeps every bank within capacity is applied; the descent
/// stops when no move helps or after `max_evals` tried moves.
pub fn improve_allocation(inst: &Instance, sol: &Solution, max_evals: usize) -> Solution {
    let nb = inst.num_blocks();
    let mut cur = sol.clone();
    let Some(mut best) = checked_makespan(inst, &cur) else {
        return cur;
    };
    let banks: Vec<Vec<MemId>> = (0..nb).map(|b| admissible_banks(inst, sol, b)).collect();
    let mut evals = 0;
    loop {
        let d = eval::task_durations(inst, &cur);
        let Ok(metrics) = graph::compute_metrics(inst, Some(&cur), &d) else {
            return cur;
        };
        let usage = critical_usage_counts(inst, &metrics);
        let mut found: Option<(u64, Vec<MemId>)> = None;
        'scan: for b in (0..nb).filter(|&b| usage[b] > 0) {
            for &m in &banks[b] {
                if m == cur.allocation[b] {
                    continue;
                }
                if evals == max_evals {
                    break 'scan;
                }
                evals += 1;
                let mut trial = cur.clone();
                trial.allocation[b] = m;
                let mut candidates = vec![trial.allocation.clone()];
                if eject_and_refill(inst, &mut trial, b, &banks) {
                    candidates.push(trial.allocation);
                }
                for alloc in candidates {
                    let probe = Solution { allocation: alloc, ..cur.clone() };
                    if let Some(ms) = checked_makespan(inst, &probe) {
                        if ms < found.as_ref().map_or(best, |f| f.0) {
                            found = Some((ms, probe.allocation));
                        }
                    }
                }
            }
        }
        match found {
            Some((ms, alloc)) => {
                best = ms;
                cur.allocation = alloc;
            }
            None => return cur,
        }
    }
}

/// Makespan of a capacity-feasible solution.
fn checked_makespan(inst: &Instance, sol: &Solution) -> Option<u64> {
    let sched = eval::simulate(inst, sol).ok()?;
    eval::first_overflow(inst, &sched, &sol.allocation).is_none().then_some(sched.makespan)
}

/// Evicts the smallest blocks other than `keep` from overflowing banks,
/// then moves low-speed blocks into fast banks where they fit under the
/// resulting lifetimes, largest first. Returns false if nothing changed
/// beyond the placement of `keep`.
fn eject_and_refill(inst: &Instance, sol: &mut Solution, keep: BlockId, banks: &[Vec<MemId>]) -> bool {
    let low = inst.low_bank();
    let mut evicted = Vec::new();
    loop {
        let Ok(sched) = eval::simulate(inst, sol) else {
            return false;
        };
        if eval::first_overflow(inst, &sched, &sol.allocation).is_none() {
            break;
        }
        // Resolve every overflow under the current lifetimes, then
        // re-simulate since demotions lengthen transfers.
        while let Some(Infeasibility::Capacity { mem, capacity, .. }) =
            eval::first_overflow(inst, &sched, &sol.allocation)
        {
            let at = overflow_time(inst, &sched.lifetimes, &sol.allocation, mem, capacity);
            let Some(victim) = (0..inst.num_blocks())
                .filter(|&o| o != keep && sol.allocation[o] == mem)
                .filter(|&o| sched.lifetimes[o].enter <= at && at < sched.lifetimes[o].release)
                .min_by_key(|&o| (inst.block(o).size, o))
            else {
                return false;
            };
            sol.allocation[victim] = low;
            evicted.push(victim);
        }
    }
    let Ok(sched) = eval::simulate(inst, sol) else {
        return false;
    };
    let lifetimes = &sched.lifetimes;
    let mut resident: Vec<Vec<BlockId>> = vec![Vec::new(); inst.memories().len()];
    let mut idle = Vec::new();
    for o in 0..inst.num_blocks() {
        if sol.allocation[o] != low {
            resident[sol.allocation[o]].push(o);
        } else if !evicted.contains(&o) {
            idle.push(o);
        }
    }
    idle.sort_unstable_by_key(|&o| (core::cmp::Reverse(inst.block(o).size), o));
    let mut events = Vec::new();
    let mut changed = !evicted.is_empty();
    for o in idle {
        let size = inst.block(o).size;
        let lt = lifetimes[o];
        let target = banks[o].iter().copied().filter(|&m| m != low).find(|&m| match inst.memory(m).capacity {
            Capacity::Unbounded => true,
            Capacity::Finite(cap) => {
                let iv = resident[m]
                    .iter()
                    .map(|&x| (lifetimes[x].enter, lifetimes[x].release, inst.block(x).size));
                window_peak_with(iv, lt.enter, lt.release, &mut events) + size <= cap
            }
        });
        if let Some(m) = target {
            sol.allocation[o] = m;
            resident[m].push(o);
            changed = true;
        }
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{is_feasible, simulate};
    use crate::fixtures;
    use crate::model::{DataBlock, Task};

    fn serial() -> Solution {
        Solution::from_sequences(3, vec![vec![0, 1, 2], vec![]], vec![1])
    }

    #[test]
    fn tiny3_block_goes_to_fast_memory() {
        let inst = fixtures::tiny3();
        let low = simulate(&inst, &serial()).unwrap().makespan;
        let out = reallocate(&inst, &serial());
        assert_eq!(out.allocation, vec![0]);
        assert!(simulate(&inst, &out).unwrap().makespan < low);
    }

    #[test]
    fn zero_capacity_keeps_everything_low() {
        let inst = fixtures::tiny3()
            .with_capacities(&[Capacity::Finite(0), Capacity::Unbounded])
            .unwrap();
        assert_eq!(reallocate(&inst, &serial()).allocation, vec![1]);
    }

    #[test]
    fn tiny3_critical_usage_is_three() {
        let inst = fixtures::tiny3();
        let sol = Solution::from_sequences(3, vec![vec![0, 1], vec![2]], vec![1]);
        let d = eval::task_durations(&inst, &sol);
        let m = graph::compute_metrics(&inst, Some(&sol), &d).unwrap();
        assert_eq!(critical_usage_counts(&inst, &m), vec![3]);
    }

    #[test]
    fn critical_block_wins_the_only_slot() {
        // Chain 0 -> 1 carries block x (size 10); task 2 is short and
        // independent and produces y (size 10) for task 3.
        let tasks = vec![
            Task::new(0, vec![(0, 20)]),
            Task::new(1, vec![(0, 20)]),
            Task::new(2, vec![(1, 1)]),
            Task::new(3, vec![(1, 1)]),
        ];
        let blocks = vec![
            DataBlock { id: 0, size: 10, producer: Some(0), consumers: vec![1] },
            DataBlock { id: 1, size: 10, producer: Some(2), consumers: vec![3] },
        ];
        let inst = Instance::new(
            tasks,
            blocks,
            vec![],
            fixtures::general_procs(2),
            fixtures::high2_and_low(10),
            fixtures::default_access(),
        )
        .unwrap();
        let sol = Solution::from_sequences(4, vec![vec![0, 1], vec![2, 3]], vec![1, 1]);
        let out = reallocate(&inst, &sol);
        assert_eq!(out.allocation, vec![0, 1]);
        assert!(is_feasible(&inst, &out).is_feasible());
    }

    #[test]
    fn idempotent_on_fixed_sequences() {
        let inst = fixtures::tiny3();
        let once = reallocate(&inst, &serial());
        assert_eq!(reallocate(&inst, &once), once);
    }
}
