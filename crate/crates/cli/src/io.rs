//! Reading and writing instance, solution and trace files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use hdats_core::format::{parse_instance, parse_solution, serialize_instance, serialize_solution};
use hdats_core::tabu::TraceRow;
use hdats_core::{Clock, Instance, Solution};

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing instance {}", path.display()))
}

pub fn read_solution(path: &Path) -> Result<Solution> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_solution(&text).with_context(|| format!("parsing solution {}", path.display()))
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_instance(path: Option<&Path>, inst: &Instance) -> Result<()> {
    write_output(path, &serialize_instance(inst))
}

pub fn write_solution(path: Option<&Path>, sol: &Solution) -> Result<()> {
    write_output(path, &serialize_solution(sol))
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut s = String::from("iteration,elapsed_ms,current,best\n");
    for r in trace {
        let _ = writeln!(s, "{},{},{},{}", r.iteration, r.elapsed_ms, r.current, r.best);
    }
    s
}

/// Real elapsed time since construction.
#[derive(Debug)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed_ms(&self) -> u64 {
        self.0.elapsed().as_millis() as u64
    }
}
