use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use subsens::distributions::OutputDistribution;
use subsens::harness::{self, config::ExperimentConfig, suites};
use subsens::oracle::{build_function, check_monotone_submodular, curvature, CheckMode, FunctionSpec, EXHAUSTIVE_LIMIT};
use subsens::transport::emd;
use subsens::{Error, Result, SubsetMask};

#[derive(Parser)]
#[command(name = "subsens", version, about = "Sensitivity of submodular maximization algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file and emit one CSV row per point.
    Run {
        config: PathBuf,
        /// Output path; overrides `output` in the config. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a reproduction suite (or `all`) and print PASS/FAIL per check.
    Reproduce {
        suite: String,
        /// Directory for the suite CSV files.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = suites::DEFAULT_SEED)]
        seed: u64,
        /// Print every check, not just the failing ones.
        #[arg(long)]
        verbose: bool,
    },
    /// Earth mover's distance between two distribution CSV files.
    Emd {
        file1: PathBuf,
        file2: PathBuf,
        /// Write the optimal transport plan here.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Ground-set size of each file (give once for both, or twice).
        #[arg(long = "n", num_args = 1)]
        n: Vec<usize>,
    },
    /// List the reproduction suites.
    ListSuites,
    /// Structural checks (monotonicity, submodularity, curvature) for a function config.
    CheckFunction { config: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn cmd_run(config: &Path, out: Option<PathBuf>) -> Result<()> {
    let cfg = ExperimentConfig::parse(&read(config)?)?;
    if let Some(id) = &cfg.suite {
        suites::find_suite(id)?;
    }
    let (csv, _) = harness::run_config(&cfg)?;
    match out.or(cfg.output.clone()) {
        Some(p) => write(&p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_reproduce(suite: &str, out: Option<PathBuf>, seed: u64, verbose: bool) -> Result<()> {
    let ids: Vec<&str> = if suite == "all" {
        suites::SUITES.iter().map(|s| s.id).collect()
    } else {
        vec![suites::find_suite(suite)?.id]
    };
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    for id in ids {
        let outcome = suites::run_suite(id, seed)?;
        print!("{}", outcome.report(verbose));
        if let Some(dir) = &out {
            write(&dir.join(format!("{id}.csv")), &outcome.csv)?;
        }
    }
    Ok(())
}

fn load_dist(path: &Path, n: Option<usize>) -> Result<OutputDistribution> {
    let d = OutputDistribution::from_csv(&read(path)?)?;
    if let Some(n) = n {
        let ground = SubsetMask::full(n);
        if let Some((s, _)) = d.iter().find(|(s, _)| !s.is_subset(&ground)) {
            return Err(Error::Format(format!(
                "{}: set {} lies outside a ground set of size {n}",
                path.display(),
                s.to_hex()
            )));
        }
    }
    Ok(d)
}

fn cmd_emd(f1: &Path, f2: &Path, plan_path: Option<PathBuf>, n: &[usize]) -> Result<()> {
    let (n1, n2) = match n {
        [] => (None, None),
        [a] => (Some(*a), Some(*a)),
        [a, b] => (Some(*a), Some(*b)),
        _ => return Err(Error::InvalidParameter("give --n at most twice".into())),
    };
    if n1 != n2 {
        return Err(Error::InconsistentDimensions(format!(
            "ground sizes differ: {} vs {}",
            n1.unwrap_or(0),
            n2.unwrap_or(0)
        )));
    }
    let (d1, d2) = (load_dist(f1, n1)?, load_dist(f2, n2)?);
    let (v, plan) = emd(&d1, &d2)?;
    match plan.exact_cost {
        Some((p, q)) => println!("{v} ({p}/{q})"),
        None => println!("{v}"),
    }
    if let Some(p) = plan_path {
        write(&p, &plan.to_csv())?;
    }
    Ok(())
}

fn cmd_check(config: &Path) -> Result<bool> {
    let text = read(config)?;
    // accept a bare function config or a full experiment config
    let spec = if text.lines().any(|l| l.trim() == "[function]") {
        let body: String = text
            .lines()
            .skip_while(|l| l.trim() != "[function]")
            .skip(1)
            .take_while(|l| !l.trim().starts_with('['))
            .collect::<Vec<_>>()
            .join("\n");
        FunctionSpec::from_config(&body)?
    } else {
        FunctionSpec::from_config(&text)?
    };
    let f = build_function(&spec)?;
    let mode = if f.n() <= EXHAUSTIVE_LIMIT {
        CheckMode::Exhaustive
    } else {
        CheckMode::Sampled {
            pairs: 100_000,
            seed: 0,
        }
    };
    let r = check_monotone_submodular(&f, mode)?;
    println!("family: {}", spec.family());
    println!("ground set: {}", f.n());
    match curvature(&f) {
        Ok(c) => println!("curvature: {c}"),
        Err(e) => println!("curvature: undefined ({e})"),
    }
    println!("checked: {} ({:?})", r.checked, mode);
    println!("violations: {}", r.violation_count);
    for v in r.violations.iter().take(5) {
        println!("  {v:?}");
    }
    Ok(r.ok())
}

fn init_threads() {
    if let Some(t) = std::env::var("SENS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out),
        Command::Reproduce {
            suite,
            out,
            seed,
            verbose,
        } => cmd_reproduce(&suite, out, seed, verbose),
        Command::Emd { file1, file2, plan, n } => cmd_emd(&file1, &file2, plan, &n),
        Command::ListSuites => {
            for s in suites::SUITES {
                println!("{:<14} criterion {:>2}  {} [{}]", s.id, s.criterion, s.title, s.caps);
            }
            Ok(())
        }
        Command::CheckFunction { config } => match cmd_check(&config) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code(&e) as u8)
        }
    }
}
