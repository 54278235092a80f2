use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hdats_core::format::{parse_instance, parse_solution, serialize_solution};
use hdats_core::ilp::parse_lp;
use hdats_core::{is_feasible, simulate};
use tempfile::TempDir;

fn hdats(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdats"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// A small generated instance written into a fresh directory.
fn small_instance(dir: &TempDir) -> PathBuf {
    let inst = dir.path().join("small.inst");
    let out = hdats(&[
        "generate",
        "--seed",
        "4",
        "--tasks",
        "12-15",
        "--blocks",
        "20-30",
        "-o",
        path_str(&inst),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    inst
}

#[test]
fn generate_honours_size_ranges() {
    let dir = TempDir::new().unwrap();
    let inst = parse_instance(&fs::read_to_string(small_instance(&dir)).unwrap()).unwrap();
    assert!((12..=15).contains(&inst.num_tasks()));
    assert!((20..=30).contains(&inst.num_blocks()));
}

#[test]
fn every_algorithm_writes_a_feasible_solution() {
    let dir = TempDir::new().unwrap();
    let inst_path = small_instance(&dir);
    let inst = parse_instance(&fs::read_to_string(&inst_path).unwrap()).unwrap();
    for alg in ["ts", "lb", "greedy"] {
        let sol_path = dir.path().join(format!("{alg}.sol"));
        let out = hdats(&[
            "solve",
            path_str(&inst_path),
            "--alg",
            alg,
            "--tmax-s",
            "1",
            "-o",
            path_str(&sol_path),
        ]);
        assert!(out.status.success(), "{alg}: {}", String::from_utf8_lossy(&out.stderr));
        let sol = parse_solution(&fs::read_to_string(&sol_path).unwrap()).unwrap();
        assert!(is_feasible(&inst, &sol).is_feasible(), "{alg}");
        let reported = format!("makespan {}", simulate(&inst, &sol).unwrap().makespan);
        assert!(String::from_utf8_lossy(&out.stderr).contains(&reported), "{alg}");

        let check = hdats(&["validate", path_str(&inst_path), path_str(&sol_path)]);
        assert_eq!(check.status.code(), Some(0), "{alg}");
        let report = String::from_utf8(check.stdout).unwrap();
        assert!(report.ends_with("status\tfeasible\n"));
        assert_eq!(report.lines().filter(|l| l.starts_with("peak\t")).count(), inst.memories().len());
    }
}

#[test]
fn trace_is_lf_csv_with_monotone_best() {
    let dir = TempDir::new().unwrap();
    let inst = small_instance(&dir);
    let trace = dir.path().join("trace.csv");
    let out = hdats(&[
        "solve",
        path_str(&inst),
        "--kmax",
        "5",
        "--lambda",
        "50",
        "--tmax-s",
        "2",
        "--realloc-round",
        "3",
        "--trace",
        path_str(&trace),
        "-o",
        path_str(&dir.path().join("s")),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&trace).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,elapsed_ms,current,best"));
    let rows: Vec<Vec<u64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    for w in rows.windows(2) {
        assert!(w[1][0] >= w[0][0] && w[1][1] >= w[0][1] && w[1][3] <= w[0][3]);
    }
    for r in &rows {
        assert_eq!(r.len(), 4);
        assert!(r[3] <= r[2]);
    }
}

#[test]
fn infeasible_solutions_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let inst_path = small_instance(&dir);
    let inst = parse_instance(&fs::read_to_string(&inst_path).unwrap()).unwrap();
    let sol_path = dir.path().join("lb.sol");
    assert!(hdats(&["solve", path_str(&inst_path), "--alg", "lb", "-o", path_str(&sol_path)]).status.success());
    let mut sol = parse_solution(&fs::read_to_string(&sol_path).unwrap()).unwrap();

    // Swapping two dependent tasks on one processor creates a cycle.
    let (u, v) = inst.edges()[0];
    let p = sol.assignment[u];
    sol.assignment[v] = p;
    for seq in &mut sol.sequences {
        seq.retain(|&t| t != v);
    }
    let at = sol.sequences[p].iter().position(|&t| t == u).unwrap();
    sol.sequences[p].insert(at, v);
    let bad = dir.path().join("bad.sol");
    fs::write(&bad, serialize_solution(&sol)).unwrap();
    let out = hdats(&["validate", path_str(&inst_path), path_str(&bad)]);
    let report = String::from_utf8(out.stdout).unwrap();
    if inst.task(v).is_candidate(p) {
        assert_eq!(out.status.code(), Some(2), "{report}");
        assert!(report.contains("violation\tcycle"), "{report}");
    } else {
        assert_eq!(out.status.code(), Some(2), "{report}");
        assert!(report.contains("violation\tstructure"), "{report}");
    }
    assert!(report.ends_with("status\tinfeasible\n"));
}

#[test]
fn usage_and_input_errors_exit_with_one() {
    assert_eq!(hdats(&["solve"]).status.code(), Some(1));
    assert_eq!(hdats(&["generate", "--tasks", "9-3"]).status.code(), Some(1));
    assert_eq!(hdats(&["solve", "/nonexistent/file"]).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let junk = dir.path().join("junk");
    fs::write(&junk, "hdats-v1 instance\nPROCS x\n").unwrap();
    let out = hdats(&["solve", path_str(&junk)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(hdats(&["--help"]).status.code(), Some(0));
}

#[test]
fn bench_reports_consistent_ratios() {
    let dir = TempDir::new().unwrap();
    let cells = dir.path().join("cells.csv");
    let summary = dir.path().join("summary.csv");
    let out = hdats(&[
        "bench",
        "--instances",
        "2",
        "--tasks",
        "10-12",
        "--blocks",
        "15-20",
        "--high-mem-permille",
        "100,300",
        "--kmax-list",
        "1,5",
        "--tmax-s",
        "0.5",
        "-o",
        path_str(&cells),
        "--summary",
        path_str(&summary),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&cells).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    let mut imps: Vec<(String, f64)> = Vec::new();
    for r in &rows {
        let lb: f64 = r[col("lb_makespan")].parse().unwrap();
        let ts: f64 = r[col("ts_makespan")].parse().unwrap();
        let imp: f64 = r[col("improvement")].parse().unwrap();
        assert!((imp - (lb - ts) / lb).abs() < 1e-6);
        assert!(r[col("ts_ms")].parse::<f64>().unwrap() >= 0.0);
        imps.push((format!("{},{}", r[col("high_mem_permille")], r[col("kmax")]), imp));
    }

    let text = fs::read_to_string(&summary).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("high_mem_permille,general_procs,kmax,runs,mean_improvement"));
    let mut groups = 0;
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        let key = format!("{},{}", f[0], f[2]);
        let mine: Vec<f64> = imps.iter().filter(|(k, _)| *k == key).map(|(_, v)| *v).collect();
        assert_eq!(f[3].parse::<usize>().unwrap(), mine.len());
        let mean = mine.iter().sum::<f64>() / mine.len() as f64;
        let min = mine.iter().copied().fold(f64::INFINITY, f64::min);
        let max = mine.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (got, want) in [(f[4], mean), (f[5], min), (f[6], max)] {
            assert!((got.parse::<f64>().unwrap() - want).abs() < 2e-6, "{l}");
        }
        groups += 1;
    }
    assert_eq!(groups, 4);
}

#[test]
fn exported_model_parses() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("t.inst");
    assert!(hdats(&["generate", "--seed", "2", "--tasks", "3", "--blocks", "2", "-o", path_str(&inst)])
        .status
        .success());
    let lp = dir.path().join("t.lp");
    let out = hdats(&["export-ilp", path_str(&inst), "--horizon", "40", "-o", path_str(&lp)]);
    // Generated times are far above 40, so the horizon is rejected.
    assert_eq!(out.status.code(), Some(1));
    let out = hdats(&["export-ilp", path_str(&inst), "-o", path_str(&lp)]);
    if out.status.success() {
        parse_lp(&fs::read_to_string(&lp).unwrap()).unwrap();
    } else {
        assert!(String::from_utf8_lossy(&out.stderr).contains("stage variables"));
    }
}
