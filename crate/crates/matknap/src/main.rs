//! Command-line harness for the greedy-swap solver.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 guarantee violation or
//! failed contract check, 3 resource refusal.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use matknap::harness::{
    generate_instance, load_instance, prior_best_ratio, run_experiment, serialize_instance,
    worker_pool, AlgorithmSpec, EpsilonMode, ExperimentConfig, GeneratorSpec, InstanceSource,
    MatroidFamily, OracleFamily,
};
use matknap::matroids::{check_matroid_axioms, check_matroid_axioms_sampled};
use matknap::oracles::{check_submodular_monotone, check_submodular_monotone_exhaustive};
use matknap::solver::{
    brute_force, default_epsilon, guaranteed_ratio, solve, SolverConfig, SwapEngine,
};
use matknap::{Error, Solution};

#[derive(Parser)]
#[command(
    name = "matknap",
    about = "Monotone submodular maximization under a knapsack plus matroid constraints",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the greedy-swap solver on an instance file.
    Solve(SolveArgs),
    /// Exhaustive search for the exact optimum (small instances).
    Exact {
        file: PathBuf,
        /// Bound the solution cardinality so larger ground sets stay tractable.
        #[arg(long)]
        size_cap: Option<usize>,
    },
    /// Run solver and baseline over instance files and print a CSV report.
    Compare {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Compute exact optima and flag any ratio-guarantee violation.
        #[arg(long)]
        brute_force: bool,
        /// Also write the CSV report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-guess details as JSON to this path.
        #[arg(long)]
        detail: Option<PathBuf>,
    },
    /// Generate a random instance file.
    Gen(GenArgs),
    /// Run oracle and matroid contract checks on an instance file.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Print the guaranteed ratio and the best prior ratio for k matroids.
    Ratios {
        #[arg(long)]
        k: usize,
    },
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// Threshold parameter ε (accept real swaps only at a 1 + ε/n² factor).
    #[arg(long, conflicts_with_all = ["epsilon_default", "exact"])]
    epsilon: Option<f64>,
    /// Use the largest ε that keeps the ratio guarantee (the default mode).
    #[arg(long, conflicts_with = "exact")]
    epsilon_default: bool,
    /// Disable thresholding (ε = 0).
    #[arg(long)]
    exact: bool,
    /// On single-matroid instances, also run the k-swap engine and verify
    /// both engines return the same solution.
    #[arg(long)]
    k_check: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Number of matroid constraints.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Oracle family: coverage, modular, or facility_location.
    #[arg(long)]
    oracle: OracleFamily,
    /// Matroid family (repeatable; cycled when fewer than k are given):
    /// uniform, partition, or graphic.
    #[arg(long = "matroid", required = true)]
    matroids: Vec<MatroidFamily>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    cost_min: f64,
    #[arg(long, default_value_t = 9.0)]
    cost_max: f64,
    #[arg(long, default_value_t = 0.5)]
    budget_fraction: f64,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Resource(_) => 3,
                _ => 1,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<i32, Error> {
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Exact { file, size_cap } => cmd_exact(&file, size_cap),
        Command::Compare { files, brute_force, out, detail } => {
            cmd_compare(files, brute_force, out, detail)
        }
        Command::Gen(args) => cmd_gen(args),
        Command::Check { file, trials, seed } => cmd_check(&file, trials, seed),
        Command::Ratios { k } => cmd_ratios(k),
    }
}

fn print_solution(label: &str, solution: &Solution) {
    let elements: Vec<String> = solution.elements.iter().map(|e| e.to_string()).collect();
    println!(
        "{label}: value = {}, cost = {}, feasible = {}, elements = [{}]",
        solution.value,
        solution.cost,
        solution.feasible,
        elements.join(", ")
    );
}

fn cmd_solve(args: SolveArgs) -> Result<i32, Error> {
    let instance = load_instance(&args.file)?;
    let k = instance.matroid_count();
    let epsilon = if args.exact {
        0.0
    } else if let Some(eps) = args.epsilon {
        eps
    } else {
        default_epsilon(k)?
    };
    let config = SolverConfig::with_epsilon(epsilon);
    let pool = worker_pool(None)?;
    let (solution, report) = pool.install(|| solve(&instance, &config))?;
    println!("instance: {} (n = {}, k = {k})", args.file.display(), instance.n());
    println!("epsilon: {epsilon}");
    print_solution("solution", &solution);
    let guess: Vec<String> = report.best_guess.iter().map(|e| e.to_string()).collect();
    println!(
        "best guess = [{}]; totals over all guesses: accepted = {} (pure additions {}), rejected = {}, oracle calls = {}",
        guess.join(", "),
        report.accepted_swaps,
        report.phi_swaps,
        report.rejected_swaps,
        report.oracle_calls
    );
    if report.cap_hit {
        println!("note: pass cap reached on at least one guess");
    }

    if args.k_check {
        if k != 1 {
            println!("k-check: skipped (instance has {k} matroids; applies to k = 1)");
        } else {
            let single = SolverConfig { engine: SwapEngine::SingleMatroid, ..config.clone() };
            let kswap = SolverConfig { engine: SwapEngine::KSwap, ..config };
            let (a, _) = pool.install(|| solve(&instance, &single))?;
            let (b, _) = pool.install(|| solve(&instance, &kswap))?;
            if a == b {
                println!("k-check: engines agree");
            } else {
                println!("k-check: MISMATCH");
                print_solution("  single-matroid engine", &a);
                print_solution("  k-swap engine", &b);
                return Ok(2);
            }
        }
    }
    Ok(0)
}

fn cmd_exact(file: &Path, size_cap: Option<usize>) -> Result<i32, Error> {
    let instance = load_instance(file)?;
    let solution = brute_force(&instance, size_cap)?;
    println!("instance: {} (n = {})", file.display(), instance.n());
    print_solution("optimum", &solution);
    Ok(0)
}

fn cmd_compare(
    files: Vec<PathBuf>,
    with_brute_force: bool,
    out: Option<PathBuf>,
    detail: Option<PathBuf>,
) -> Result<i32, Error> {
    let mut config = ExperimentConfig::new(
        files.into_iter().map(InstanceSource::File).collect(),
        vec![
            AlgorithmSpec::GreedySwap(EpsilonMode::Zero),
            AlgorithmSpec::GreedySwap(EpsilonMode::Default),
            AlgorithmSpec::Baseline,
        ],
    );
    config.brute_force = with_brute_force;
    config.output = out;
    config.detail_output = detail;
    let report = run_experiment(&config)?;
    print!("{}", report.to_csv(true));
    let failures = report.failures();
    if failures > 0 {
        eprintln!("{failures} guarantee violation(s) detected");
        return Ok(2);
    }
    Ok(0)
}

fn cmd_gen(args: GenArgs) -> Result<i32, Error> {
    let spec = GeneratorSpec {
        cost_range: (args.cost_min, args.cost_max),
        budget_fraction: args.budget_fraction,
        ..GeneratorSpec::new(args.n, args.k, args.oracle, args.matroids, args.seed)
    };
    let instance = generate_instance(&spec)?;
    std::fs::write(&args.out, serialize_instance(&instance))?;
    println!(
        "wrote {} (n = {}, k = {}, budget = {})",
        args.out.display(),
        instance.n(),
        instance.matroid_count(),
        instance.budget()
    );
    Ok(0)
}

fn cmd_check(file: &Path, trials: u64, seed: u64) -> Result<i32, Error> {
    let instance = load_instance(file)?;
    let n = instance.n();
    let mut failed = false;

    let sampled = check_submodular_monotone(instance.oracle(), n, trials, seed)?;
    report_check("oracle contract (sampled)", sampled.map(|v| v.to_string()), &mut failed);
    if n <= 8 {
        let exhaustive = check_submodular_monotone_exhaustive(instance.oracle(), n)?;
        report_check("oracle contract (exhaustive)", exhaustive.map(|v| v.to_string()), &mut failed);
    }

    for (j, matroid) in instance.matroids().iter().enumerate() {
        let label = format!("matroid {j} ({})", matroid.kind());
        let witness = if n <= 16 {
            check_matroid_axioms(matroid.as_matroid(), n)?
        } else {
            check_matroid_axioms_sampled(matroid.as_matroid(), n, trials, seed)?
        };
        report_check(&label, witness.map(|v| v.to_string()), &mut failed);
    }

    Ok(if failed { 2 } else { 0 })
}

fn report_check(label: &str, violation: Option<String>, failed: &mut bool) {
    match violation {
        None => println!("[PASS] {label}"),
        Some(witness) => {
            println!("[FAIL] {label}: {witness}");
            *failed = true;
        }
    }
}

fn cmd_ratios(k: usize) -> Result<i32, Error> {
    let ours = guaranteed_ratio(k)?;
    let prior = prior_best_ratio(k, 1e-9)?;
    println!("k = {k}");
    println!("guaranteed ratio (1 - e^-(k+1))/(k+1) = {ours:.6}");
    println!("prior best ratio (eps -> 0)           = {prior:.6}");
    println!("default epsilon                       = {:.6}", default_epsilon(k)?);
    Ok(0)
}
