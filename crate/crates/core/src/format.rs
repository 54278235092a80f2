//! Text formats for instances and solutions.
//!
//! Both formats are line oriented. `#` starts a comment, blank lines are
//! ignored and tokens are separated by whitespace. The first line is a
//! header naming the format version and the document kind. Every section
//! starts with its name and the number of record lines that follow.
//!
//! Instance:
//!
//! ```text
//! hdats-v1 instance
//! PROCS <n>
//! <id> <high-speed|general> <group>
//! MEMS <n>
//! <id> <high2|high1|low> <capacity|inf> <group>
//! ACCESS <n>
//! <high-speed|general> <high2|high1|low> <num>/<den>
//! TASKS <n>
//! <id> <proc>:<time> ...
//! BLOCKS <n>
//! <id> <size> <producer|init> <consumer> ...
//! EDGES <n>
//! <from> <to>
//! ```
//!
//! Solution:
//!
//! ```text
//! hdats-v1 solution
//! ASSIGN <n>
//! <task> <proc>
//! SEQ <n>
//! <proc> <task> ...
//! ALLOC <n>
//! <block> <bank>
//! ```
//!
//! Sections appear in the order shown. Serialization is canonical, so equal
//! values always produce identical text.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;
use core::str::FromStr;

use crate::error::ModelError;
use crate::model::{
    AccessFactor, AccessTable, Capacity, DataBlock, Instance, MemType, MemoryBank, ProcType,
    Processor, Solution, Task,
};

pub const VERSION: &str = "hdats-v1";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn proc_type_name(p: ProcType) -> &'static str {
    match p {
        ProcType::HighSpeed => "high-speed",
        ProcType::General => "general",
    }
}

fn mem_type_name(m: MemType) -> &'static str {
    match m {
        MemType::High2 => "high2",
        MemType::High1 => "high1",
        MemType::Low => "low",
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{VERSION} instance");
    let _ = writeln!(s, "PROCS {}", inst.num_procs());
    for p in inst.processors() {
        let _ = writeln!(s, "{} {} {}", p.id, proc_type_name(p.ptype), p.group);
    }
    let _ = writeln!(s, "MEMS {}", inst.memories().len());
    for m in inst.memories() {
        let cap = match m.capacity {
            Capacity::Finite(c) => c.to_string(),
            Capacity::Unbounded => "inf".to_string(),
        };
        let _ = writeln!(s, "{} {} {} {}", m.id, mem_type_name(m.mtype), cap, m.group);
    }
    let entries: Vec<_> = inst.access().entries().collect();
    let _ = writeln!(s, "ACCESS {}", entries.len());
    for (p, m, f) in entries {
        let _ = writeln!(s, "{} {} {}", proc_type_name(p), mem_type_name(m), f);
    }
    let _ = writeln!(s, "TASKS {}", inst.num_tasks());
    for t in inst.tasks() {
        let _ = write!(s, "{}", t.id);
        for &(p, time) in &t.proc_times {
            let _ = write!(s, " {p}:{time}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "BLOCKS {}", inst.num_blocks());
    for b in inst.blocks() {
        let _ = write!(s, "{} {} ", b.id, b.size);
        match b.producer {
            Some(p) => {
                let _ = write!(s, "{p}");
            }
            None => s.push_str("init"),
        }
        for c in &b.consumers {
            let _ = write!(s, " {c}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "EDGES {}", inst.edges().len());
    for (u, v) in inst.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}

pub fn serialize_solution(sol: &Solution) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{VERSION} solution");
    let _ = writeln!(s, "ASSIGN {}", sol.assignment.len());
    for (t, p) in sol.assignment.iter().enumerate() {
        let _ = writeln!(s, "{t} {p}");
    }
    let _ = writeln!(s, "SEQ {}", sol.sequences.len());
    for (p, seq) in sol.sequences.iter().enumerate() {
        let _ = write!(s, "{p}");
        for t in seq {
            let _ = write!(s, " {t}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "ALLOC {}", sol.allocation.len());
    for (b, m) in sol.allocation.iter().enumerate() {
        let _ = writeln!(s, "{b} {m}");
    }
    s
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
struct Lines<'a> {
    inner: core::iter::Enumerate<core::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }

    fn expect_tokens(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), FormatError> {
        let last = self.last;
        self.next_tokens()
            .ok_or_else(|| syntax(last + 1, format!("unexpected end of input, expected {what}")))
    }

    fn header(&mut self, kind: &str) -> Result<(), FormatError> {
        let (line, toks) = self.expect_tokens("header")?;
        if toks != [VERSION, kind] {
            return Err(syntax(line, format!("expected header `{VERSION} {kind}`")));
        }
        Ok(())
    }

    /// Reads `<NAME> <count>` and returns the count.
    fn section(&mut self, name: &str) -> Result<usize, FormatError> {
        let (line, toks) = self.expect_tokens(name)?;
        if toks.len() != 2 || toks[0] != name {
            return Err(syntax(line, format!("expected section `{name} <count>`")));
        }
        num(toks[1], line)
    }

    fn finish(&mut self) -> Result<(), FormatError> {
        match self.next_tokens() {
            None => Ok(()),
            Some((line, _)) => Err(syntax(line, "unexpected content after the last section")),
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

fn num<T: FromStr>(tok: &str, line: usize) -> Result<T, FormatError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("invalid number `{tok}`")))
}

fn arity(toks: &[&str], n: usize, line: usize) -> Result<(), FormatError> {
    if toks.len() != n {
        return Err(syntax(line, format!("expected {n} fields, found {}", toks.len())));
    }
    Ok(())
}

fn parse_proc_type(tok: &str, line: usize) -> Result<ProcType, FormatError> {
    match tok {
        "high-speed" => Ok(ProcType::HighSpeed),
        "general" => Ok(ProcType::General),
        _ => Err(syntax(line, format!("unknown processor type `{tok}`"))),
    }
}

fn parse_mem_type(tok: &str, line: usize) -> Result<MemType, FormatError> {
    match tok {
        "high2" => Ok(MemType::High2),
        "high1" => Ok(MemType::High1),
        "low" => Ok(MemType::Low),
        _ => Err(syntax(line, format!("unknown memory type `{tok}`"))),
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let mut lines = Lines::new(text);
    lines.header("instance")?;

    let n = lines.section("PROCS")?;
    let mut procs = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, t) = lines.expect_tokens("processor record")?;
        arity(&t, 3, line)?;
        procs.push(Processor {
            id: num(t[0], line)?,
            ptype: parse_proc_type(t[1], line)?,
            group: num(t[2], line)?,
        });
    }

    let n = lines.section("MEMS")?;
    let mut mems = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, t) = lines.expect_tokens("memory record")?;
        arity(&t, 4, line)?;
        let capacity = match t[2] {
            "inf" => Capacity::Unbounded,
            c => Capacity::Finite(num(c, line)?),
        };
        mems.push(MemoryBank {
            id: num(t[0], line)?,
            mtype: parse_mem_type(t[1], line)?,
            capacity,
            group: num(t[3], line)?,
        });
    }

    let n = lines.section("ACCESS")?;
    let mut access = AccessTable::default();
    for _ in 0..n {
        let (line, t) = lines.expect_tokens("access record")?;
        arity(&t, 3, line)?;
        let (a, b) = t[2]
            .split_once('/')
            .ok_or_else(|| syntax(line, format!("expected a ratio `num/den`, found `{}`", t[2])))?;
        access.set(
            parse_proc_type(t[0], line)?,
            parse_mem_type(t[1], line)?,
            AccessFactor::new(num(a, line)?, num(b, line)?),
        );
    }

    let n = lines.section("TASKS")?;
    let mut tasks = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, t) = lines.expect_tokens("task record")?;
        let id = num(t[0], line)?;
        let mut times = Vec::with_capacity(t.len() - 1);
        for tok in &t[1..] {
            let (p, time) = tok
                .split_once(':')
                .ok_or_else(|| syntax(line, format!("expected `proc:time`, found `{tok}`")))?;
            times.push((num(p, line)?, num(time, line)?));
        }
        tasks.push(Task::new(id, times));
    }

    let n = lines.section("BLOCKS")?;
    let mut blocks = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, t) = lines.expect_tokens("block record")?;
        if t.len() < 3 {
            return Err(syntax(line, "expected `<id> <size> <producer|init> <consumer>...`"));
        }
        let producer = match t[2] {
            "init" => None,
            p => Some(num(p, line)?),
        };
        let consumers = t[3..].iter().map(|c| num(c, line)).collect::<Result<_, _>>()?;
        blocks.push(DataBlock {
            id: num(t[0], line)?,
            size: num(t[1], line)?,
            producer,
            consumers,
        });
    }

    let n = lines.section("EDGES")?;
    let mut edges = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, t) = lines.expect_tokens("edge record")?;
        arity(&t, 2, line)?;
        edges.push((num(t[0], line)?, num(t[1], line)?));
    }
    lines.finish()?;

    Ok(Instance::new(tasks, blocks, edges, procs, mems, access)?)
}

/// Parses a solution document. Ids are checked for density but not against
/// any instance; use [`validate_solution`](crate::model::validate_solution)
/// for that.
pub fn parse_solution(text: &str) -> Result<Solution, FormatError> {
    let mut lines = Lines::new(text);
    lines.header("solution")?;

    let n = lines.section("ASSIGN")?;
    let mut assignment = Vec::with_capacity(n);
    for i in 0..n {
        let (line, t) = lines.expect_tokens("assignment record")?;
        arity(&t, 2, line)?;
        if num::<usize>(t[0], line)? != i {
            return Err(syntax(line, format!("expected task {i}")));
        }
        assignment.push(num(t[1], line)?);
    }

    let n = lines.section("SEQ")?;
    let mut sequences = Vec::with_capacity(n);
    for i in 0..n {
        let (line, t) = lines.expect_tokens("sequence record")?;
        if num::<usize>(t[0], line)? != i {
            return Err(syntax(line, format!("expected processor {i}")));
        }
        sequences.push(t[1..].iter().map(|x| num(x, line)).collect::<Result<_, _>>()?);
    }

    let n = lines.section("ALLOC")?;
    let mut allocation = Vec::with_capacity(n);
    for i in 0..n {
        let (line, t) = lines.expect_tokens("allocation record")?;
        arity(&t, 2, line)?;
        if num::<usize>(t[0], line)? != i {
            return Err(syntax(line, format!("expected block {i}")));
        }
        allocation.push(num(t[1], line)?);
    }
    lines.finish()?;

    Ok(Solution {
        assignment,
        sequences,
        allocation,
    })
}
