//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 7 is known not to hold as stated (see README, "Known failures").
//! It is still run and reported as FAIL; the process only fails if that
//! criterion also breaks the doubled bound, or if any other criterion fails.

use std::process::ExitCode;

use subsens::harness::suites::{run_suite, SuiteOutcome, DEFAULT_SEED, SUITES};

const KNOWN_FAILING: &[usize] = &[7];

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let i = header.iter().position(|h| *h == name).expect("column present");
    lines.map(|l| l.split(',').nth(i).unwrap_or_default().to_string()).collect()
}

/// The upper bound with the per-step transport term doubled must still hold.
fn doubled_bound_holds(out: &SuiteOutcome) -> bool {
    let worst = column(&out.csv, "worst_case");
    let doubled = column(&out.csv, "doubled_bound");
    worst.iter().zip(&doubled).all(|(w, d)| {
        let (w, d): (f64, f64) = (w.parse().unwrap(), d.parse().unwrap());
        w <= d + 1e-6
    })
}

fn extra_expectations(out: &SuiteOutcome) -> Result<(), String> {
    match out.id {
        // hand derivation: greedy keeps the heavy element plus k-1 elements
        // of the low block; without it, the k unit elements. Distance 2k.
        "det-greedy-lb" => {
            let ks = column(&out.csv, "k");
            let w = column(&out.csv, "worst_case");
            for (k, w) in ks.iter().zip(&w) {
                let (k, w): (f64, f64) = (k.parse().unwrap(), w.parse().unwrap());
                if w != 2.0 * k {
                    return Err(format!("k={k}: worst case {w}, expected {}", 2.0 * k));
                }
            }
            Ok(())
        }
        // with c = 1 every GreeDi output with the heavy element is disjoint
        // from every output without it
        "greedi-lb" => {
            let v = column(&out.csv, "value");
            if v[..3].iter().all(|x| x == "8") {
                Ok(())
            } else {
                Err(format!("GreeDi distances {:?}, expected 8", &v[..3]))
            }
        }
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let mut ok = true;
    let mut first = Vec::new();
    for s in SUITES {
        let out = match run_suite(s.id, DEFAULT_SEED) {
            Ok(o) => o,
            Err(e) => {
                println!("criterion {:>2} FAIL  {}: error {e}", s.criterion, s.id);
                ok = false;
                continue;
            }
        };
        let passed = out.pass();
        let n_fail = out.failures().len();
        println!(
            "criterion {:>2} {}  {} ({}/{} checks)",
            s.criterion,
            if passed { "PASS" } else { "FAIL" },
            s.id,
            out.checks.len() - n_fail,
            out.checks.len()
        );
        for c in out.failures() {
            println!("      {}", c.line());
        }
        if let Err(msg) = extra_expectations(&out) {
            println!("      unexpected: {msg}");
            ok = false;
        }
        if !passed {
            if KNOWN_FAILING.contains(&s.criterion) {
                let held = doubled_bound_holds(&out);
                println!(
                    "      known failure; doubled bound {}",
                    if held { "holds on every instance" } else { "ALSO VIOLATED" }
                );
                ok &= held;
            } else {
                ok = false;
            }
        } else if KNOWN_FAILING.contains(&s.criterion) {
            println!("      note: expected this criterion to fail");
        }
        first.push((s.id, out.csv));
    }

    let mut identical = 0;
    let mut differing = Vec::new();
    for (id, csv) in &first {
        match run_suite(id, DEFAULT_SEED) {
            Ok(again) if &again.csv == csv => identical += 1,
            _ => differing.push(*id),
        }
    }
    let repro = differing.is_empty() && identical == SUITES.len();
    println!(
        "criterion 12 {}  reproducibility ({identical}/{} suites byte-identical on rerun)",
        if repro { "PASS" } else { "FAIL" },
        SUITES.len()
    );
    for id in &differing {
        println!("      differs: {id}");
    }
    ok &= repro;

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
