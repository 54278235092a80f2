//! Time-indexed integer program in CPLEX LP text format, plus an exhaustive
//! optimum search for tiny instances.
//!
//! One stage is one time unit. Binary `x_i_j_k` starts task `i` on
//! processor `j` at stage `k`; `d_h_m` places block `h` in bank `m`.
//! Transfer durations depend on the product of assignment and placement,
//! which is linearized with one binary per (task, block, processor, bank).
//! Consecutive tasks on a processor follow the same overlap rule as the
//! simulator, enforced pairwise through order binaries and big-M terms.
//! Capacity is checked at every block entry time, which is where occupancy
//! peaks.
//!
//! Two things are simplified. There is no bound on concurrent bank
//! accesses, and capacity is not tracked per stage but at entry events.
//! Start times are free, so the program may delay a task where the
//! simulator would start it as early as possible.

mod brute;
mod lp;

pub use brute::{brute_force_optimum, BruteError, BruteLimits};
pub use lp::{parse_lp, LpConstraint, LpModel, LpParseError, Sense};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::eval::simulate;
use crate::lb::load_balance_schedule;
use crate::model::{BlockId, Capacity, Instance, MemId, MemType, ProcId, Solution, TaskId, Time};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IlpError {
    #[error("horizon {horizon} is shorter than the minimum duration {need} of task {task}")]
    HorizonTooSmall { task: TaskId, need: Time, horizon: Time },
    #[error("model would need {vars} stage variables, above the limit {limit}")]
    TooLarge { vars: u64, limit: u64 },
}

#[derive(Clone, Debug)]
pub struct IlpOptions {
    pub horizon: Time,
    /// Upper bound on `tasks * processors * horizon`.
    pub max_stage_vars: u64,
}

impl IlpOptions {
    pub fn new(horizon: Time) -> Self {
        IlpOptions {
            horizon,
            max_stage_vars: 2_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IlpExport {
    pub text: String,
    pub warnings: Vec<String>,
}

/// Collects constraint rows and wraps long expressions.
struct Emitter {
    out: String,
    rows: usize,
}

impl Emitter {
    fn comment(&mut self, s: &str) {
        let _ = writeln!(self.out, "\\ {s}");
    }

    fn row(&mut self, terms: &[(i64, String)], sense: &str, rhs: i64) {
        self.rows += 1;
        let _ = write!(self.out, " r{}:", self.rows);
        write_terms(&mut self.out, terms);
        let _ = writeln!(self.out, " {sense} {rhs}");
    }
}

fn write_terms(out: &mut String, terms: &[(i64, String)]) {
    for (i, (c, v)) in terms.iter().enumerate() {
        if i > 0 && i % 8 == 0 {
            out.push_str("\n   ");
        }
        let sign = if *c < 0 { '-' } else { '+' };
        let a = c.unsigned_abs();
        if a == 1 {
            let _ = write!(out, " {sign} {v}");
        } else {
            let _ = write!(out, " {sign} {a} {v}");
        }
    }
}

fn t(c: i64, name: String) -> (i64, String) {
    (c, name)
}

fn x(i: TaskId, j: ProcId, k: Time) -> String {
    format!("x_{i}_{j}_{k}")
}
fn a(i: TaskId, j: ProcId) -> String {
    format!("a_{i}_{j}")
}
fn d(h: BlockId, m: MemId) -> String {
    format!("d_{h}_{m}")
}
fn z(i: TaskId, h: BlockId, j: ProcId, m: MemId) -> String {
    format!("z_{i}_{h}_{j}_{m}")
}
fn v(prefix: &str, i: usize) -> String {
    format!("{prefix}_{i}")
}
fn pair(prefix: &str, i: usize, l: usize) -> String {
    format!("{prefix}_{i}_{l}")
}

/// Blocks whose lifetime is never empty: every block except initial inputs
/// without consumers.
fn occupying(inst: &Instance) -> Vec<BlockId> {
    inst.blocks()
        .iter()
        .filter(|b| b.producer.is_some() || !b.consumers.is_empty())
        .map(|b| b.id)
        .collect()
}

fn min_duration(inst: &Instance, task: TaskId) -> Time {
    let tk = inst.task(task);
    tk.candidates()
        .map(|p| {
            let pt = inst.processor(p).ptype;
            let cheapest = |b: BlockId| {
                (0..inst.memories().len())
                    .map(|m| inst.transfer(b, m, pt))
                    .min()
                    .unwrap_or(0)
            };
            tk.proc_time(p).unwrap_or(0)
                + tk.inputs.iter().map(|&b| cheapest(b)).sum::<Time>()
                + tk.outputs.iter().map(|&b| cheapest(b)).sum::<Time>()
        })
        .min()
        .unwrap_or(0)
}

pub fn emit_ilp(inst: &Instance, opts: &IlpOptions) -> Result<IlpExport, IlpError> {
    let s_hor = opts.horizon;
    let n = inst.num_tasks();
    let nm = inst.memories().len();
    for task in 0..n {
        let need = min_duration(inst, task);
        if need > s_hor {
            return Err(IlpError::HorizonTooSmall {
                task,
                need,
                horizon: s_hor,
            });
        }
    }
    let vars = n as u64 * inst.num_procs() as u64 * s_hor;
    if vars > opts.max_stage_vars {
        return Err(IlpError::TooLarge {
            vars,
            limit: opts.max_stage_vars,
        });
    }

    let mut warnings = Vec::new();
    let lb = load_balance_schedule(inst);
    if let Ok(sched) = simulate(inst, &lb) {
        if s_hor < sched.makespan {
            warnings.push(format!(
                "horizon {s_hor} is below the load-balancing makespan {}; the model may be infeasible",
                sched.makespan
            ));
        }
    }

    let big = 2 * s_hor as i64 + 2;
    let total_size: i64 = inst.blocks().iter().map(|b| b.size as i64).sum();
    let occ = occupying(inst);

    let mut e = Emitter {
        out: String::new(),
        rows: 0,
    };
    e.comment("hdats time-indexed model");
    e.comment(&format!(
        "tasks {n}, processors {}, blocks {}, banks {nm}, horizon {s_hor}",
        inst.num_procs(),
        inst.num_blocks()
    ));
    e.comment("simplified: no bound on concurrent accesses per bank");
    e.comment("simplified: capacity is checked at block entry times instead of per stage");
    for w in &warnings {
        e.comment(&format!("warning: {w}"));
    }
    e.out.push_str("Minimize\n obj: cmax\nSubject To\n");

    e.comment("each task starts in exactly one stage on one candidate processor");
    for i in 0..n {
        let mut terms = Vec::new();
        for j in inst.task(i).candidates() {
            for k in 0..s_hor {
                terms.push(t(1, x(i, j, k)));
            }
        }
        e.row(&terms, "=", 1);
    }

    e.comment("processor assignment indicators");
    for i in 0..n {
        for j in inst.task(i).candidates() {
            let mut terms = alloc::vec![t(1, a(i, j))];
            terms.extend((0..s_hor).map(|k| t(-1, x(i, j, k))));
            e.row(&terms, "=", 0);
        }
    }

    e.comment("move-in start time");
    for i in 0..n {
        let mut terms = alloc::vec![t(1, v("s", i))];
        for j in inst.task(i).candidates() {
            terms.extend((1..s_hor).map(|k| t(-(k as i64), x(i, j, k))));
        }
        e.row(&terms, "=", 0);
    }

    e.comment("each block is placed in exactly one bank");
    for h in 0..inst.num_blocks() {
        let terms: Vec<_> = (0..nm).map(|m| t(1, d(h, m))).collect();
        e.row(&terms, "=", 1);
    }

    e.comment("a local bank holds a block only when the block's home task runs in the bank's group");
    for (h, blk) in inst.blocks().iter().enumerate() {
        let home = blk.home_task();
        for (m, mem) in inst.memories().iter().enumerate() {
            if mem.mtype != MemType::High1 {
                continue;
            }
            let mut terms = alloc::vec![t(1, d(h, m))];
            match home {
                Some(i) => terms.extend(
                    inst.task(i)
                        .candidates()
                        .filter(|&j| inst.processor(j).group == mem.group)
                        .map(|j| t(-1, a(i, j))),
                ),
                None if mem.group == 0 => continue,
                None => {}
            }
            e.row(&terms, "<=", 0);
        }
    }

    e.comment("transfer products: z = assignment and placement");
    let touches = |i: TaskId| -> Vec<BlockId> {
        let tk = inst.task(i);
        let mut b = tk.inputs.clone();
        b.extend(tk.outputs.iter().copied());
        b
    };
    for i in 0..n {
        for h in touches(i) {
            for j in inst.task(i).candidates() {
                for m in 0..nm {
                    e.row(&[t(1, z(i, h, j, m)), t(-1, a(i, j))], "<=", 0);
                    e.row(&[t(1, z(i, h, j, m)), t(-1, d(h, m))], "<=", 0);
                    e.row(&[t(1, z(i, h, j, m)), t(-1, a(i, j)), t(-1, d(h, m))], ">=", -1);
                }
            }
        }
    }

    e.comment("move-in, processing and move-out durations");
    for i in 0..n {
        let tk = inst.task(i);
        for (name, blocks) in [("mi", &tk.inputs), ("mo", &tk.outputs)] {
            let mut terms = alloc::vec![t(1, v(name, i))];
            for &h in blocks.iter() {
                for j in tk.candidates() {
                    let pt = inst.processor(j).ptype;
                    for m in 0..nm {
                        let c = inst.transfer(h, m, pt) as i64;
                        terms.push(t(-c, z(i, h, j, m)));
                    }
                }
            }
            e.row(&terms, "=", 0);
        }
        let mut terms = alloc::vec![t(1, v("pt", i))];
        for (j, pt) in tk.proc_times.iter() {
            terms.push(t(-(*pt as i64), a(i, *j)));
        }
        e.row(&terms, "=", 0);
    }

    e.comment("processing start and move-out end; processing is never interrupted");
    for i in 0..n {
        e.row(&[t(1, v("p", i)), t(-1, v("s", i)), t(-1, v("mi", i))], "=", 0);
        e.row(
            &[
                t(1, v("f", i)),
                t(-1, v("p", i)),
                t(-1, v("pt", i)),
                t(-1, v("mo", i)),
            ],
            "=",
            0,
        );
    }

    e.comment("precedence: a successor moves in after its predecessor moved out");
    for vtx in 0..n {
        for &u in inst.preds(vtx) {
            e.row(&[t(1, v("s", vtx)), t(-1, v("f", u))], ">=", 0);
        }
    }

    e.comment("same-processor order: o_i_l = 1 puts i before l");
    let mut order_vars = Vec::new();
    for i in 0..n {
        for l in i + 1..n {
            let common: Vec<ProcId> = inst
                .task(i)
                .candidates()
                .filter(|&j| inst.task(l).is_candidate(j))
                .collect();
            if common.is_empty() {
                continue;
            }
            let o = pair("o", i, l);
            order_vars.push(o.clone());
            for j in common {
                let both = [t(-big, a(i, j)), t(-big, a(l, j))];
                // i before l: l processes after i moved out, and moves in
                // after i started processing.
                let mut r = alloc::vec![t(1, v("p", l)), t(-1, v("f", i)), t(-big, o.clone())];
                r.extend(both.iter().cloned());
                e.row(&r, ">=", -3 * big);
                let mut r = alloc::vec![t(1, v("s", l)), t(-1, v("p", i)), t(-big, o.clone())];
                r.extend(both.iter().cloned());
                e.row(&r, ">=", -3 * big);
                // l before i.
                let mut r = alloc::vec![t(1, v("p", i)), t(-1, v("f", l)), t(big, o.clone())];
                r.extend(both.iter().cloned());
                e.row(&r, ">=", -2 * big);
                let mut r = alloc::vec![t(1, v("s", i)), t(-1, v("p", l)), t(big, o.clone())];
                r.extend(both.iter().cloned());
                e.row(&r, ">=", -2 * big);
            }
        }
    }

    e.comment("makespan");
    for i in 0..n {
        e.row(&[t(1, String::from("cmax")), t(-1, v("f", i))], ">=", 0);
    }

    e.comment("block lifetimes: tin = producer move-in start, tout >= consumer move-out ends");
    for &h in &occ {
        let b = inst.block(h);
        match b.producer {
            Some(p) => e.row(&[t(1, v("tin", h)), t(-1, v("s", p))], "=", 0),
            None => e.row(&[t(1, v("tin", h))], "=", 0),
        }
        if b.consumers.is_empty() {
            let p = b.producer.expect("occupying blocks have a producer or consumers");
            e.row(&[t(1, v("tout", h)), t(-1, v("f", p))], ">=", 0);
        }
        for &c in &b.consumers {
            e.row(&[t(1, v("tout", h)), t(-1, v("f", c))], ">=", 0);
        }
    }

    e.comment("occupancy at entry times: g alive when h enters");
    let finite: Vec<(MemId, u64)> = inst
        .memories()
        .iter()
        .filter_map(|m| match m.capacity {
            Capacity::Finite(c) => Some((m.id, c)),
            Capacity::Unbounded => None,
        })
        .collect();
    let mut alive_vars = Vec::new();
    if !finite.is_empty() {
        for &h in &occ {
            for &g in &occ {
                if g == h {
                    continue;
                }
                // b1 = 1 when g entered no later than h.
                e.row(
                    &[t(1, v("tin", g)), t(-1, v("tin", h)), t(big, pair("b1", g, h))],
                    ">=",
                    1,
                );
                // b2 = 1 when g is released after h enters.
                e.row(
                    &[t(1, v("tout", g)), t(-1, v("tin", h)), t(-big, pair("b2", g, h))],
                    "<=",
                    0,
                );
                e.row(
                    &[t(1, pair("al", g, h)), t(-1, pair("b1", g, h)), t(-1, pair("b2", g, h))],
                    ">=",
                    -1,
                );
                alive_vars.push((g, h));
                for &(m, _) in &finite {
                    e.row(
                        &[
                            t(1, format!("u_{g}_{h}_{m}")),
                            t(-1, pair("al", g, h)),
                            t(-1, d(g, m)),
                        ],
                        ">=",
                        -1,
                    );
                }
            }
            for &(m, cap) in &finite {
                let mut terms: Vec<_> = occ
                    .iter()
                    .filter(|&&g| g != h)
                    .map(|&g| t(inst.block(g).size as i64, format!("u_{g}_{h}_{m}")))
                    .collect();
                terms.push(t(total_size, d(h, m)));
                e.row(&terms, "<=", cap as i64 - inst.block(h).size as i64 + total_size);
            }
        }
    }

    e.out.push_str("Bounds\n");
    let _ = writeln!(e.out, " 0 <= cmax <= {s_hor}");
    for i in 0..n {
        for name in ["s", "mi", "mo", "pt", "p", "f"] {
            let _ = writeln!(e.out, " 0 <= {} <= {s_hor}", v(name, i));
        }
    }
    for &h in &occ {
        let _ = writeln!(e.out, " 0 <= {} <= {s_hor}", v("tin", h));
        let _ = writeln!(e.out, " 0 <= {} <= {s_hor}", v("tout", h));
    }

    e.out.push_str("General\n");
    let mut generals = Vec::new();
    for i in 0..n {
        for name in ["s", "mi", "mo", "pt", "p", "f"] {
            generals.push(v(name, i));
        }
    }
    for &h in &occ {
        generals.push(v("tin", h));
        generals.push(v("tout", h));
    }
    write_names(&mut e.out, &generals);

    e.out.push_str("Binary\n");
    let mut binaries = Vec::new();
    for i in 0..n {
        for j in inst.task(i).candidates() {
            binaries.extend((0..s_hor).map(|k| x(i, j, k)));
            binaries.push(a(i, j));
        }
    }
    for h in 0..inst.num_blocks() {
        binaries.extend((0..nm).map(|m| d(h, m)));
    }
    for i in 0..n {
        for h in touches(i) {
            for j in inst.task(i).candidates() {
                binaries.extend((0..nm).map(|m| z(i, h, j, m)));
            }
        }
    }
    binaries.extend(order_vars);
    for (g, h) in alive_vars {
        binaries.push(pair("b1", g, h));
        binaries.push(pair("b2", g, h));
        binaries.push(pair("al", g, h));
        binaries.extend(finite.iter().map(|&(m, _)| format!("u_{g}_{h}_{m}")));
    }
    write_names(&mut e.out, &binaries);
    e.out.push_str("End\n");

    Ok(IlpExport {
        text: e.out,
        warnings,
    })
}

fn write_names(out: &mut String, names: &[String]) {
    for chunk in names.chunks(10) {
        out.push(' ');
        out.push_str(&chunk.join(" "));
        out.push('\n');
    }
}

/// Variable values describing `sol` with earliest start times. Used to
/// check that every simulated schedule is a feasible point of the model.
pub fn point_of_solution(inst: &Instance, sol: &Solution) -> BTreeMap<String, i64> {
    let sched = simulate(inst, sol).expect("solution is acyclic");
    let n = inst.num_tasks();
    let nm = inst.memories().len();
    let mut val = BTreeMap::new();
    let durations = crate::eval::task_durations(inst, sol);
    let pos = sol.positions();
    for (i, dur) in durations.iter().enumerate() {
        let j = sol.assignment[i];
        let s = sched.move_in_start[i];
        val.insert(x(i, j, s), 1);
        for p in inst.task(i).candidates() {
            val.insert(a(i, p), i64::from(p == j));
        }
        val.insert(v("s", i), s as i64);
        val.insert(v("mi", i), dur.move_in as i64);
        val.insert(v("pt", i), dur.proc as i64);
        val.insert(v("mo", i), dur.move_out as i64);
        val.insert(v("p", i), sched.proc_start[i] as i64);
        val.insert(v("f", i), sched.move_out_end[i] as i64);
        let tk = inst.task(i);
        for &h in tk.inputs.iter().chain(tk.outputs.iter()) {
            for p in tk.candidates() {
                for m in 0..nm {
                    val.insert(z(i, h, p, m), i64::from(p == j && sol.allocation[h] == m));
                }
            }
        }
    }
    for h in 0..inst.num_blocks() {
        for m in 0..nm {
            val.insert(d(h, m), i64::from(sol.allocation[h] == m));
        }
    }
    for i in 0..n {
        for l in i + 1..n {
            let before = if sol.assignment[i] == sol.assignment[l] {
                pos[i] < pos[l]
            } else {
                true
            };
            val.insert(pair("o", i, l), i64::from(before));
        }
    }
    val.insert(String::from("cmax"), sched.makespan as i64);
    let occ = occupying(inst);
    for &h in &occ {
        val.insert(v("tin", h), sched.lifetimes[h].enter as i64);
        val.insert(v("tout", h), sched.lifetimes[h].release as i64);
    }
    for &h in &occ {
        for &g in &occ {
            if g == h {
                continue;
            }
            let (lg, lh) = (sched.lifetimes[g], sched.lifetimes[h]);
            let b1 = lg.enter <= lh.enter;
            let b2 = lh.enter < lg.release;
            val.insert(pair("b1", g, h), i64::from(b1));
            val.insert(pair("b2", g, h), i64::from(b2));
            val.insert(pair("al", g, h), i64::from(b1 && b2));
            for m in 0..nm {
                val.insert(format!("u_{g}_{h}_{m}"), i64::from(b1 && b2 && sol.allocation[g] == m));
            }
        }
    }
    val
}
