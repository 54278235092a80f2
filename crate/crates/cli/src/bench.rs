//! Batch experiments: generated instances swept over fast-memory share,
//! general processor count and neighbours per iteration, each solved by the
//! baseline and by tabu search.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hdats_core::generate::{generate, GeneratorConfig};
use hdats_core::Time;
use rayon::prelude::*;

use crate::run::{run, Algorithm, RunConfig};

#[derive(Clone, Debug)]
pub struct BenchPlan {
    pub base: GeneratorConfig,
    /// Generator seeds, one instance per seed and grid point.
    pub seeds: Vec<u64>,
    pub high_mem_permilles: Vec<u64>,
    pub general_procs: Vec<usize>,
    pub kmax: Vec<usize>,
    /// Search settings; `kmax` is overridden per cell.
    pub run: RunConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub seed: u64,
    pub tasks: usize,
    pub blocks: usize,
    pub high_mem_permille: u64,
    pub general_procs: usize,
    pub kmax: usize,
    pub lb: Time,
    pub ts: Time,
    pub lb_ms: f64,
    pub ts_ms: f64,
}

impl Cell {
    /// Relative gain of tabu search over the baseline, `(lb - ts) / lb`.
    pub fn improvement(&self) -> f64 {
        (self.lb as f64 - self.ts as f64) / self.lb as f64
    }
}

pub fn run_plan(plan: &BenchPlan) -> Vec<Cell> {
    let mut points = Vec::new();
    for &seed in &plan.seeds {
        for &mem in &plan.high_mem_permilles {
            for &procs in &plan.general_procs {
                points.push((seed, mem, procs));
            }
        }
    }
    points
        .par_iter()
        .flat_map_iter(|&(seed, mem, procs)| {
            let cfg = GeneratorConfig {
                high_mem_permille: mem,
                general_procs: procs,
                ..plan.base
            }
            .with_seed(seed);
            let inst = generate(&cfg);
            let lb = run(
                &inst,
                &RunConfig {
                    alg: Algorithm::Lb,
                    ..plan.run
                },
            );
            plan.kmax
                .iter()
                .map(|&k| {
                    let mut rc = plan.run;
                    rc.alg = Algorithm::Ts;
                    rc.params.kmax = k;
                    let ts = run(&inst, &rc);
                    Cell {
                        seed,
                        tasks: inst.num_tasks(),
                        blocks: inst.num_blocks(),
                        high_mem_permille: mem,
                        general_procs: procs,
                        kmax: k,
                        lb: lb.makespan,
                        ts: ts.makespan,
                        lb_ms: lb.wall_ms,
                        ts_ms: ts.wall_ms,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

pub const CELLS_HEADER: &str =
    "seed,tasks,blocks,high_mem_permille,general_procs,kmax,lb_makespan,ts_makespan,improvement,lb_ms,ts_ms";

pub fn cells_csv(cells: &[Cell]) -> String {
    let mut s = format!("{CELLS_HEADER}\n");
    for c in cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{:.6},{:.3},{:.3}",
            c.seed,
            c.tasks,
            c.blocks,
            c.high_mem_permille,
            c.general_procs,
            c.kmax,
            c.lb,
            c.ts,
            c.improvement(),
            c.lb_ms,
            c.ts_ms
        );
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub high_mem_permille: u64,
    pub general_procs: usize,
    pub kmax: usize,
    pub runs: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub mean_ts_ms: f64,
}

/// Improvement statistics per grid point, across seeds.
pub fn summarize(cells: &[Cell]) -> Vec<Summary> {
    let mut groups: BTreeMap<(u64, usize, usize), Vec<&Cell>> = BTreeMap::new();
    for c in cells {
        groups.entry((c.high_mem_permille, c.general_procs, c.kmax)).or_default().push(c);
    }
    groups
        .into_iter()
        .map(|((mem, procs, k), cs)| {
            let imp: Vec<f64> = cs.iter().map(|c| c.improvement()).collect();
            let n = imp.len() as f64;
            Summary {
                high_mem_permille: mem,
                general_procs: procs,
                kmax: k,
                runs: imp.len(),
                mean: imp.iter().sum::<f64>() / n,
                min: imp.iter().copied().fold(f64::INFINITY, f64::min),
                max: imp.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_ts_ms: cs.iter().map(|c| c.ts_ms).sum::<f64>() / n,
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[Summary]) -> String {
    let mut s = String::from(
        "high_mem_permille,general_procs,kmax,runs,mean_improvement,min_improvement,max_improvement,mean_ts_ms\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.3}",
            r.high_mem_permille, r.general_procs, r.kmax, r.runs, r.mean, r.min, r.max, r.mean_ts_ms
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(seed: u64, kmax: usize, lb: Time, ts: Time) -> Cell {
        Cell {
            seed,
            tasks: 1,
            blocks: 0,
            high_mem_permille: 200,
            general_procs: 8,
            kmax,
            lb,
            ts,
            lb_ms: 1.0,
            ts_ms: 2.0,
        }
    }

    #[test]
    fn summary_groups_by_grid_point() {
        let cells = [cell(0, 1, 100, 90), cell(1, 1, 200, 150), cell(0, 5, 100, 100)];
        let s = summarize(&cells);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].kmax, s[0].runs), (1, 2));
        assert!((s[0].mean - 0.175).abs() < 1e-12);
        assert!((s[0].min - 0.1).abs() < 1e-12 && (s[0].max - 0.25).abs() < 1e-12);
        assert_eq!((s[1].kmax, s[1].mean), (5, 0.0));
    }

    #[test]
    fn csv_has_header_and_one_line_per_cell() {
        let text = cells_csv(&[cell(3, 1, 100, 95)]);
        assert_eq!(text, format!("{CELLS_HEADER}\n3,1,0,200,8,1,100,95,0.050000,1.000,2.000\n"));
    }
}
