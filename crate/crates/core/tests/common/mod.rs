//! Independent reference implementations and random builders shared by the
//! integration tests. Nothing here calls the evaluators under test.

#![allow(dead_code, clippy::needless_range_loop)]

use hdats_core::model::{
    AccessFactor, AccessTable, Capacity, DataBlock, Instance, MemType, MemoryBank, ProcType,
    Processor, Solution, Task, TaskId, Time,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct TinyShape {
    pub max_tasks: usize,
    pub max_procs: usize,
    pub max_blocks: usize,
}

pub const ORACLE_SHAPE: TinyShape = TinyShape {
    max_tasks: 8,
    max_procs: 2,
    max_blocks: 6,
};

/// Random small instance. Edges and data relations go from lower to higher
/// ids, processing times and sizes are small, fast banks are tight.
pub fn tiny_instance(seed: u64, shape: &TinyShape) -> Instance {
    let mut r = rng(seed);
    let n = r.gen_range(1..=shape.max_tasks);
    let np = r.gen_range(1..=shape.max_procs);
    let nb = r.gen_range(0..=shape.max_blocks);

    let procs: Vec<Processor> = (0..np)
        .map(|id| Processor {
            id,
            ptype: if r.gen_bool(0.3) { ProcType::HighSpeed } else { ProcType::General },
            group: r.gen_range(0..2),
        })
        .collect();

    let tasks: Vec<Task> = (0..n)
        .map(|id| {
            let mut times: Vec<(usize, Time)> = Vec::new();
            for p in 0..np {
                if r.gen_bool(0.75) {
                    times.push((p, r.gen_range(1..=20)));
                }
            }
            if times.is_empty() {
                times.push((r.gen_range(0..np), r.gen_range(1..=20)));
            }
            Task::new(id, times)
        })
        .collect();

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(0.25) {
                edges.push((u, v));
            }
        }
    }

    let blocks: Vec<DataBlock> = (0..nb)
        .map(|id| {
            let producer = if n > 1 && r.gen_bool(0.8) {
                Some(r.gen_range(0..n - 1))
            } else {
                None
            };
            let lo = producer.map_or(0, |p| p + 1);
            let mut consumers: Vec<usize> = (lo..n).filter(|_| r.gen_bool(0.4)).collect();
            if consumers.is_empty() && lo < n && r.gen_bool(0.8) {
                consumers.push(r.gen_range(lo..n));
            }
            DataBlock {
                id,
                size: r.gen_range(1..=10),
                producer,
                consumers,
            }
        })
        .collect();

    let mut mems = vec![MemoryBank {
        id: 0,
        mtype: MemType::High2,
        capacity: Capacity::Finite(r.gen_range(0..=20)),
        group: 0,
    }];
    if r.gen_bool(0.5) {
        mems.push(MemoryBank {
            id: 1,
            mtype: MemType::High1,
            capacity: Capacity::Finite(r.gen_range(0..=15)),
            group: r.gen_range(0..2),
        });
    }
    mems.push(MemoryBank {
        id: mems.len(),
        mtype: MemType::Low,
        capacity: Capacity::Unbounded,
        group: 0,
    });

    let mut access = AccessTable::default();
    for p in [ProcType::HighSpeed, ProcType::General] {
        let low = AccessFactor::new(r.gen_range(4..=8), 4);
        access.set(p, MemType::Low, low);
        for m in [MemType::High2, MemType::High1] {
            let num = r.gen_range(1..=low.num);
            access.set(p, m, AccessFactor::new(num, 4));
        }
    }
    Instance::new(tasks, blocks, edges, procs, mems, access).expect("tiny instances are valid")
}

/// Random structurally valid solution: a random topological order is split
/// over randomly chosen candidate processors; banks are random.
pub fn random_solution(inst: &Instance, seed: u64) -> Solution {
    let mut r = rng(seed);
    let n = inst.num_tasks();
    let mut indeg: Vec<usize> = (0..n).map(|t| inst.preds(t).len()).collect();
    let mut ready: Vec<TaskId> = (0..n).filter(|&t| indeg[t] == 0).collect();
    let mut seqs = vec![Vec::new(); inst.num_procs()];
    while !ready.is_empty() {
        let t = ready.swap_remove(r.gen_range(0..ready.len()));
        let cands: Vec<_> = inst.task(t).candidates().collect();
        seqs[cands[r.gen_range(0..cands.len())]].push(t);
        for &s in inst.succs(t) {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                ready.push(s);
            }
        }
    }
    let nm = inst.memories().len();
    let alloc = (0..inst.num_blocks()).map(|_| r.gen_range(0..nm)).collect();
    Solution::from_sequences(n, seqs, alloc)
}

/// Own transfer computation: ceil(size * num / den).
pub fn transfer(inst: &Instance, b: usize, mem: usize, proc: usize) -> Time {
    let f = inst
        .access()
        .get(inst.processor(proc).ptype, inst.memory(mem).mtype)
        .unwrap();
    let x = inst.block(b).size * f.num;
    x.div_ceil(f.den)
}

pub fn durations(inst: &Instance, sol: &Solution) -> Vec<(Time, Time, Time)> {
    (0..inst.num_tasks())
        .map(|t| {
            let p = sol.assignment[t];
            let tk = inst.task(t);
            let mi = tk.inputs.iter().map(|&b| transfer(inst, b, sol.allocation[b], p)).sum();
            let mo = tk.outputs.iter().map(|&b| transfer(inst, b, sol.allocation[b], p)).sum();
            (mi, tk.proc_time(p).unwrap(), mo)
        })
        .collect()
}

/// Timeline of one task as (move-in start, processing start, processing end, move-out end).
pub type Timeline = (Time, Time, Time, Time);

/// Time-stepped simulation. At every tick each processor repeatedly looks at
/// the next task of its sequence and starts it when every predecessor has finished
/// moving out, the previous task on the processor has started processing,
/// and the task's move-in would not end before the previous task moved out.
/// Returns `None` when the sequences deadlock.
pub fn event_oracle(inst: &Instance, sol: &Solution) -> Option<Vec<Timeline>> {
    let n = inst.num_tasks();
    let dur = durations(inst, sol);
    let mut timeline: Vec<Option<Timeline>> = vec![None; n];
    let mut next_idx = vec![0usize; sol.sequences.len()];
    let horizon: Time = dur.iter().map(|d| d.0 + d.1 + d.2).sum::<Time>() + 1;
    let mut placed = 0;
    let mut t: Time = 0;
    while placed < n {
        if t > horizon {
            return None;
        }
        // Several tasks may start in the same tick, so sweep until nothing changes.
        let mut progress = true;
        while progress {
            progress = false;
            for (p, seq) in sol.sequences.iter().enumerate() {
                let Some(&task) = seq.get(next_idx[p]) else { continue };
                let preds_done = inst
                    .preds(task)
                    .iter()
                    .all(|&u| timeline[u].is_some_and(|tl| tl.3 <= t));
                if !preds_done {
                    continue;
                }
                let (mi, pt, mo) = dur[task];
                if next_idx[p] > 0 {
                    let prev = seq[next_idx[p] - 1];
                    let tl = timeline[prev].expect("previous task placed");
                    if tl.1 > t || t + mi < tl.3 {
                        continue;
                    }
                }
                timeline[task] = Some((t, t + mi, t + mi + pt, t + mi + pt + mo));
                next_idx[p] += 1;
                placed += 1;
                progress = true;
            }
        }
        t += 1;
    }
    Some(timeline.into_iter().map(Option::unwrap).collect())
}

/// Occupancy by summing resident sizes at every integer time.
pub fn per_tick_peaks(inst: &Instance, timeline: &[Timeline], alloc: &[usize]) -> Vec<u64> {
    let life: Vec<(Time, Time)> = inst
        .blocks()
        .iter()
        .map(|b| {
            let enter = b.producer.map_or(0, |p| timeline[p].0);
            let own = b.producer.map_or(0, |p| timeline[p].3);
            let release = b.consumers.iter().map(|&c| timeline[c].3).max().unwrap_or(own);
            (enter, release)
        })
        .collect();
    let end = life.iter().map(|l| l.1).max().unwrap_or(0);
    let mut peaks = vec![0u64; inst.memories().len()];
    for t in 0..=end {
        let mut occ = vec![0u64; inst.memories().len()];
        for (b, &(s, e)) in life.iter().enumerate() {
            if s <= t && t < e {
                occ[alloc[b]] += inst.block(b).size;
            }
        }
        for m in 0..occ.len() {
            peaks[m] = peaks[m].max(occ[m]);
        }
    }
    peaks
}

/// Arcs of the schedule graph with their lengths.
pub fn schedule_arcs(inst: &Instance, sol: &Solution) -> Vec<(usize, usize, Time)> {
    let d = durations(inst, sol);
    let total = |t: usize| d[t].0 + d[t].1 + d[t].2;
    let mut arcs = Vec::new();
    for v in 0..inst.num_tasks() {
        for &u in inst.preds(v) {
            arcs.push((u, v, total(u)));
        }
    }
    for seq in &sol.sequences {
        for w in seq.windows(2) {
            let (p, c) = (w[0], w[1]);
            arcs.push((p, c, total(p).saturating_sub(d[c].0).max(d[p].0)));
        }
    }
    arcs
}

/// Longest path values by enumerating every path explicitly.
/// Returns (head, tail, cmax).
pub fn all_paths_oracle(inst: &Instance, sol: &Solution) -> (Vec<Time>, Vec<Time>, Time) {
    let n = inst.num_tasks();
    let d = durations(inst, sol);
    let total: Vec<Time> = d.iter().map(|x| x.0 + x.1 + x.2).collect();
    let arcs = schedule_arcs(inst, sol);

    fn forward(v: usize, acc: Time, arcs: &[(usize, usize, Time)], head: &mut [Time]) {
        head[v] = head[v].max(acc);
        for &(a, b, w) in arcs {
            if a == v {
                forward(b, acc + w, arcs, head);
            }
        }
    }
    // `acc` already includes the duration of the sink the walk started from.
    fn backward(v: usize, acc: Time, arcs: &[(usize, usize, Time)], tail: &mut [Time]) {
        tail[v] = tail[v].max(acc);
        for &(a, b, w) in arcs {
            if b == v {
                backward(a, acc + w, arcs, tail);
            }
        }
    }
    let mut head = vec![0; n];
    let mut tail = vec![0; n];
    for s in 0..n {
        if !arcs.iter().any(|a| a.1 == s) {
            forward(s, 0, &arcs, &mut head);
        }
        if !arcs.iter().any(|a| a.0 == s) {
            backward(s, total[s], &arcs, &mut tail);
        }
    }
    let cmax = (0..n).map(|v| head[v] + tail[v]).max().unwrap_or(0);
    (head, tail, cmax)
}

/// Plain recursive DFS with colours.
pub fn dfs_has_cycle(n: usize, edges: &[(usize, usize)]) -> bool {
    fn visit(v: usize, adj: &[Vec<usize>], colour: &mut [u8]) -> bool {
        colour[v] = 1;
        for &w in &adj[v] {
            if colour[w] == 1 || (colour[w] == 0 && visit(w, adj, colour)) {
                return true;
            }
        }
        colour[v] = 2;
        false
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
    }
    let mut colour = vec![0u8; n];
    (0..n).any(|v| colour[v] == 0 && visit(v, &adj, &mut colour))
}

/// Whether every bank stays within capacity, by the per-tick oracle.
pub fn oracle_feasible(inst: &Instance, sol: &Solution) -> bool {
    let Some(tl) = event_oracle(inst, sol) else { return false };
    per_tick_peaks(inst, &tl, &sol.allocation)
        .iter()
        .enumerate()
        .all(|(m, &p)| inst.memory(m).capacity.admits(p))
}

/// Whether every block in a local fast bank has its home task in the bank's group.
pub fn respects_locality(inst: &Instance, sol: &Solution) -> bool {
    inst.blocks().iter().all(|b| {
        let mem = inst.memory(sol.allocation[b.id]);
        if mem.mtype != MemType::High1 {
            return true;
        }
        let home = b.producer.or_else(|| b.consumers.iter().min().copied());
        home.map_or(0, |t| inst.processor(sol.assignment[t]).group) == mem.group
    })
}
