//! Seeded random instance generator.
//!
//! Tasks are spread over roughly `sqrt(n)` layers with ids ascending by
//! layer. Explicit edges always go from a lower to a higher layer, and
//! every block is consumed only by tasks in layers after its producer's,
//! so the result is acyclic by construction.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{peak_occupancy, simulate};
use crate::lb::load_balance_schedule;
use crate::model::{
    AccessFactor, AccessTable, Capacity, DataBlock, Instance, MemType, MemoryBank, ProcType,
    Processor, Task, Time,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorConfig {
    /// Inclusive range of the task count.
    pub tasks: (usize, usize),
    /// Inclusive range of the block count.
    pub blocks: (usize, usize),
    /// Explicit edges per task.
    pub edges_per_task: usize,
    pub high_speed_procs: usize,
    pub general_procs: usize,
    /// General processors per group; high-speed processors share group 0.
    pub group_size: usize,
    /// Target mean move-in : processing : move-out.
    pub time_ratio: (u64, u64, u64),
    /// Transfer factor of low-speed memory.
    pub low_factor: AccessFactor,
    /// Transfer factor of both high-speed memory types.
    pub high_factor: AccessFactor,
    /// Processing time on a high-speed processor relative to a general one.
    pub high_speed_factor: AccessFactor,
    /// Inclusive block size range.
    pub block_size: (u64, u64),
    /// Total fast capacity as a share (per mille) of the peak live volume of
    /// the all-low load-balancing schedule.
    pub high_mem_permille: u64,
    /// Share (per mille) of blocks that are initial inputs.
    pub initial_permille: u64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            tasks: (200, 300),
            blocks: (500, 700),
            edges_per_task: 8,
            high_speed_procs: 2,
            general_procs: 8,
            group_size: 4,
            time_ratio: (7, 15, 5),
            low_factor: AccessFactor::new(6, 5),
            high_factor: AccessFactor::ONE,
            high_speed_factor: AccessFactor::new(2, 3),
            block_size: (1, 15_000),
            high_mem_permille: 200,
            initial_permille: 50,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    /// Smaller instances for quick experiments.
    pub fn desk() -> Self {
        GeneratorConfig {
            tasks: (50, 100),
            blocks: (120, 240),
            ..GeneratorConfig::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn draw_range<R: Rng>(rng: &mut R, (lo, hi): (usize, usize)) -> usize {
    if hi <= lo {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

pub fn generate(cfg: &GeneratorConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = draw_range(&mut rng, cfg.tasks).max(1);
    let nb = draw_range(&mut rng, cfg.blocks);

    let layers = (sqrt_floor(n as u64) as usize).max(1);
    let layer = |t: usize| t * layers / n;
    // First task of each layer, plus a sentinel.
    let first: Vec<usize> = (0..=layers).map(|l| (l * n).div_ceil(layers)).collect();

    // Explicit edges between layers.
    let mut edges = BTreeSet::new();
    if layers > 1 {
        let target = cfg.edges_per_task * n;
        let mut attempts = 0;
        while edges.len() < target && attempts < 20 * target {
            attempts += 1;
            let u = rng.gen_range(0..first[layers - 1]);
            let v = rng.gen_range(first[layer(u) + 1]..n);
            edges.insert((u, v));
        }
    }

    // Blocks: producers outside the last layer, consumers in later layers.
    let mut blocks = Vec::with_capacity(nb);
    let producible = first[layers - 1];
    for id in 0..nb {
        let size = rng.gen_range(cfg.block_size.0..=cfg.block_size.1.max(cfg.block_size.0));
        let initial = producible == 0 || rng.gen_range(0..1000) < cfg.initial_permille;
        let producer = if initial { None } else { Some(rng.gen_range(0..producible)) };
        let lo = producer.map_or(0, |p| first[layer(p) + 1]);
        let pool: Vec<usize> = (lo..n).collect();
        let want = match rng.gen_range(0..10) {
            0..=6 => 1,
            7..=8 => 2,
            _ => 3,
        };
        let mut consumers: Vec<usize> = pool
            .choose_multiple(&mut rng, want.min(pool.len()))
            .copied()
            .collect();
        consumers.sort_unstable();
        blocks.push(DataBlock {
            id,
            size,
            producer,
            consumers,
        });
    }

    // Processing times from the target move-in ratio at the low-speed factor.
    let in_volume: u64 = blocks
        .iter()
        .map(|b| cfg.low_factor.apply(b.size) * b.consumers.len() as u64)
        .sum();
    let (r_in, r_proc, _) = cfg.time_ratio;
    let mean_pt = (in_volume * r_proc / (r_in.max(1) * n as u64)).max(2);

    let nh = cfg.high_speed_procs;
    let ng = cfg.general_procs;
    let group_size = cfg.group_size.max(1);
    let mut processors = Vec::new();
    for id in 0..nh {
        processors.push(Processor {
            id,
            ptype: ProcType::HighSpeed,
            group: 0,
        });
    }
    for g in 0..ng {
        processors.push(Processor {
            id: nh + g,
            ptype: ProcType::General,
            group: (1 + g / group_size) as u32,
        });
    }
    let general: Vec<usize> = (nh..nh + ng).collect();
    let fast: Vec<usize> = (0..nh).collect();

    let tasks: Vec<Task> = (0..n)
        .map(|id| {
            let base: Time = rng.gen_range(mean_pt / 2..=mean_pt + mean_pt / 2);
            let roll = rng.gen_range(0..10);
            let procs: Vec<usize> = if roll < 6 || fast.is_empty() || general.is_empty() {
                (0..nh + ng).collect()
            } else if roll < 9 {
                general.clone()
            } else {
                fast.clone()
            };
            let times = procs
                .into_iter()
                .map(|p| {
                    let t = match processors[p].ptype {
                        ProcType::HighSpeed => cfg.high_speed_factor.apply(base),
                        ProcType::General => base,
                    };
                    (p, t.max(1))
                })
                .collect();
            Task::new(id, times)
        })
        .collect();

    let groups: Vec<u32> = {
        let mut g: Vec<u32> = processors.iter().map(|p| p.group).collect();
        g.sort_unstable();
        g.dedup();
        g
    };
    let mut memories = vec![MemoryBank {
        id: 0,
        mtype: MemType::High2,
        capacity: Capacity::Finite(0),
        group: 0,
    }];
    for &g in &groups {
        memories.push(MemoryBank {
            id: memories.len(),
            mtype: MemType::High1,
            capacity: Capacity::Finite(0),
            group: g,
        });
    }
    memories.push(MemoryBank {
        id: memories.len(),
        mtype: MemType::Low,
        capacity: Capacity::Unbounded,
        group: 0,
    });

    let access = AccessTable::uniform(cfg.high_factor, cfg.high_factor, cfg.low_factor);
    let inst = Instance::new(
        tasks,
        blocks,
        edges.into_iter().collect(),
        processors,
        memories,
        access,
    )
    .expect("generated instances are valid by construction");

    // Calibrate fast capacities against the all-low baseline schedule.
    let lb = load_balance_schedule(&inst);
    let sched = simulate(&inst, &lb).expect("baseline is acyclic");
    let low = inst.low_bank();
    let peak = peak_occupancy(&inst, &sched, &lb.allocation)[low].peak;
    let total = peak * cfg.high_mem_permille / 1000;
    let high2 = total / 2;
    let high1 = (total - high2) / groups.len().max(1) as u64;
    let caps: Vec<Capacity> = inst
        .memories()
        .iter()
        .map(|m| match m.mtype {
            MemType::High2 => Capacity::Finite(high2),
            MemType::High1 => Capacity::Finite(high1),
            MemType::Low => Capacity::Unbounded,
        })
        .collect();
    inst.with_capacities(&caps).expect("capacity change keeps validity")
}

fn sqrt_floor(x: u64) -> u64 {
    let (mut lo, mut hi) = (0u64, x.min(u32::MAX as u64) + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if mid * mid <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            tasks: (20, 30),
            blocks: (40, 60),
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let a = generate(&small().with_seed(5));
        let b = generate(&small().with_seed(5));
        assert_eq!(a, b);
        assert_ne!(a, generate(&small().with_seed(6)));
    }

    #[test]
    fn degenerate_config_gives_single_task() {
        let cfg = GeneratorConfig {
            tasks: (1, 1),
            blocks: (0, 0),
            ..GeneratorConfig::default()
        };
        let inst = generate(&cfg);
        assert_eq!(inst.num_tasks(), 1);
        assert_eq!(inst.num_blocks(), 0);
    }

    #[test]
    fn consumers_follow_producers() {
        let inst = generate(&small().with_seed(1));
        for b in inst.blocks() {
            assert!(!b.consumers.is_empty());
            if let Some(p) = b.producer {
                assert!(b.consumers.iter().all(|&c| c > p));
            }
        }
    }

    #[test]
    fn fast_banks_have_capacity() {
        let inst = generate(&small().with_seed(2));
        assert!(inst
            .memories()
            .iter()
            .filter(|m| m.mtype.is_high())
            .all(|m| matches!(m.capacity, Capacity::Finite(c) if c > 0)));
    }

    #[test]
    fn integer_sqrt() {
        assert_eq!(sqrt_floor(0), 0);
        assert_eq!(sqrt_floor(99), 9);
        assert_eq!(sqrt_floor(100), 10);
    }
}
