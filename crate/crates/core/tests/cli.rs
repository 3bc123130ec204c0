use std::path::Path;
use std::process::{Command, Output};

use subsens::distributions::OutputDistribution;
use subsens::harness::RunRow;
use subsens::SubsetMask;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subsens"))
        .args(args)
        .env("SENS_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const MINIMAL: &str = "[function]
family = modular
weights = 6, 5, 4, 3, 2, 1

[algorithm]
name = greedy

[experiment]
k = 2
";

#[test]
fn run_minimal_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "min.cfg", MINIMAL);
    let out = bin(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let row = RunRow::parse_csv_line(lines[1]).unwrap();
    assert_eq!((row.function.as_str(), row.n, row.k), ("modular", 6, 2));
    // non-chosen deletions leave the output unchanged; chosen ones swap one element
    assert_eq!(row.worst_case, 2.0);
    assert_eq!(row.average, 4.0 / 6.0);
    assert_eq!(row.mode, "exact");
}

#[test]
fn run_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let cfg = write(
        dir.path(),
        "sweep.cfg",
        &format!(
            "[function]\nfamily = curvature_det_lb\nc = 0.5\n[algorithm]\nname = greedy\n[experiment]\nk = 2, 3\noutput = {}\n",
            csv.display()
        ),
    );
    assert_eq!(bin(&["run", &cfg]).status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<RunRow> = text.lines().skip(1).map(|l| RunRow::parse_csv_line(l).unwrap()).collect();
    assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), vec![2, 3]);
    assert_eq!(rows[1].worst_case, 6.0);
    assert_eq!(rows[1].bound_lb, Some(3.0));
}

#[test]
fn bad_family_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", &MINIMAL.replace("modular", "no_such_family"));
    let out = bin(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_family"));
}

#[test]
fn budget_exhaustion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "big.cfg",
        "[function]\nfamily = coverage\nn = 14\nuniverse = 20\ndensity = 0.3\nmodular_scale = 0.5\nseed = 3\n[algorithm]\nname = proportional\n[experiment]\nk = 5\nnode_budget = 1000\n",
    );
    assert_eq!(bin(&["run", &cfg]).status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_one() {
    assert_eq!(bin(&["reproduce", "nope"]).status.code(), Some(1));
}

#[test]
fn reproduce_writes_csv_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["reproduce", "det-greedy-lb", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    let csv = std::fs::read_to_string(dir.path().join("det-greedy-lb.csv")).unwrap();
    assert!(csv.starts_with("k,c,worst_case"));
}

#[test]
fn list_suites_names_all() {
    let out = String::from_utf8(bin(&["list-suites"]).stdout).unwrap();
    for id in ["curvature", "prop-ub", "greedi-lb", "avg-sens"] {
        assert!(out.contains(id));
    }
}

fn dist_file(dir: &Path, name: &str, sets: &[(u64, f64)]) -> String {
    let d = OutputDistribution::from_probs(sets.iter().map(|&(b, p)| (SubsetMask::from_u64(b), p)).collect());
    write(dir, name, &d.to_csv())
}

fn emd_value(stdout: &[u8]) -> f64 {
    String::from_utf8_lossy(stdout)
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn emd_identical_and_point_masses() {
    let dir = tempfile::tempdir().unwrap();
    let a = dist_file(dir.path(), "a.csv", &[(0b0011, 0.25), (0b0101, 0.75)]);
    let out = bin(&["emd", &a, &a]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(emd_value(&out.stdout), 0.0);

    let p = dist_file(dir.path(), "p.csv", &[(0b1011_0110, 1.0)]);
    let q = dist_file(dir.path(), "q.csv", &[(0b0110_0011, 1.0)]);
    let plan = dir.path().join("plan.csv");
    let out = bin(&["emd", &p, &q, "--plan", plan.to_str().unwrap()]);
    assert_eq!(emd_value(&out.stdout), (0b1011_0110u64 ^ 0b0110_0011).count_ones() as f64);
    let plan_text = std::fs::read_to_string(plan).unwrap();
    assert!(plan_text.starts_with("source_hex,target_hex,mass,cost_contrib"));
}

#[test]
fn emd_ground_mismatch_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = dist_file(dir.path(), "a.csv", &[(0b11, 1.0)]);
    let b = dist_file(dir.path(), "b.csv", &[(0b1_0000_0001, 1.0)]);
    assert_eq!(bin(&["emd", &a, &b, "--n", "4", "--n", "9"]).status.code(), Some(1));
    assert_eq!(bin(&["emd", &a, &b, "--n", "4"]).status.code(), Some(1));
    assert_eq!(bin(&["emd", &a, &b, "--n", "9"]).status.code(), Some(0));
}

#[test]
fn emd_rejects_malformed_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "set_bitmask_hex,probability\nzz,1\n");
    assert_eq!(bin(&["emd", &a, &a]).status.code(), Some(1));
}

#[test]
fn check_function_reports_structure() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "f.cfg", "family = greedi_lb\nn = 10\nc = 0.5\n");
    let out = bin(&["check-function", &good]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("curvature: 0.5"), "{text}");
    assert!(text.contains("violations: 0"));
    let full = write(dir.path(), "e.cfg", MINIMAL);
    assert_eq!(bin(&["check-function", &full]).status.code(), Some(0));
}
