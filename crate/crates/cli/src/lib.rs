//! File handling, solver runs and the benchmark harness behind the `hdats`
//! command-line tool.

pub mod bench;
pub mod io;
pub mod run;
