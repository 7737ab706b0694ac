//! Command-line front end: solve, generate, evaluate, and compare.
//!
//! Exit codes: 0 success, 1 general error, 2 usage error, 3 size or
//! budget limit exceeded, 4 numerical failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use inkspan::constant::{solve_constant_factor, ConstantError};
use inkspan::exact::{brute_force, OracleError};
use inkspan::gen::{gen_3partition, gen_gap_family, gen_random, GenError, RandomParams};
use inkspan::io::{instance_from_json, instance_to_json, result_to_json, schedule_from_json};
use inkspan::lp::{solve_lp, LpError, LpSolution};
use inkspan::model::{check_feasible, evaluate, AlgoResult, Instance};
use inkspan::num::{rat, rat_display, rat_from_decimal, rat_int, rat_to_f64, Rat};
use inkspan::ptas::{solve_ptas, PtasError, DEFAULT_LP_BUDGET};
use inkspan::relaxation::build_relaxation;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_GENERAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn classify_oracle(err: OracleError) -> CliError {
    let code = match &err {
        OracleError::SizeLimit(_) => EXIT_LIMIT,
        OracleError::NumericRange => EXIT_NUMERICAL,
    };
    CliError::new(code, err.to_string())
}

fn classify_lp(err: LpError) -> CliError {
    let code = match &err {
        LpError::Numerical(_) => EXIT_NUMERICAL,
        LpError::Malformed(_) => EXIT_GENERAL,
    };
    CliError::new(code, err.to_string())
}

fn classify_constant(err: ConstantError) -> CliError {
    match err {
        ConstantError::Oracle(e) => classify_oracle(e),
        ConstantError::Lp(e) => classify_lp(e),
        ConstantError::Model(e) => CliError::new(EXIT_GENERAL, e.to_string()),
    }
}

fn classify_ptas(err: PtasError) -> CliError {
    match err {
        PtasError::BudgetExceeded { .. } => CliError::new(EXIT_LIMIT, err.to_string()),
        PtasError::Lp(e) => classify_lp(e),
        _ => CliError::new(EXIT_GENERAL, err.to_string()),
    }
}

fn classify_gen(err: GenError) -> CliError {
    let code = match &err {
        GenError::Overflow(_, _) => EXIT_LIMIT,
        _ => EXIT_GENERAL,
    };
    CliError::new(code, err.to_string())
}

#[derive(Parser)]
#[command(
    name = "inkspan",
    version,
    about = "Solvers, relaxations, and generators for the incremental knapsack problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Alg {
    /// Exact optimum by enumeration
    Exact,
    /// Constant-factor approximation (replicated + disjunct LP rounding)
    Constant,
    /// Approximation scheme for undiscounted instances
    Ptas,
    /// Strengthened LP relaxation value only
    LpStrong,
    /// Plain LP relaxation value only
    LpWeak,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print the result as JSON
    Solve(SolveArgs),
    /// Generate instance files
    #[command(subcommand)]
    Gen(GenCommand),
    /// Evaluate a schedule against an instance
    Eval(EvalArgs),
    /// Run algorithms across instances and print a CSV ratio table
    Compare(CompareArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Algorithm to run
    #[arg(long, value_enum)]
    alg: Alg,
    /// Instance JSON file
    #[arg(long)]
    input: PathBuf,
    /// Accuracy parameter for the scheme, e.g. 0.3 (parsed exactly)
    #[arg(long)]
    eps: Option<String>,
    /// Worker threads for the candidate scans
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Worst-case relaxation-gap family member
    Gap {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 3-partition reduction from a file of whitespace-separated integers
    #[command(name = "3partition")]
    ThreePartition {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random instance
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        seed: u64,
        /// Final capacity as a fraction of total weight, e.g. 0.7
        #[arg(long, default_value = "0.7")]
        fill: String,
        #[arg(long, default_value_t = 1)]
        vmin: u64,
        #[arg(long, default_value_t = 100)]
        vmax: u64,
        #[arg(long, default_value_t = 1)]
        wmin: u64,
        #[arg(long, default_value_t = 100)]
        wmax: u64,
        /// Discount rate r giving exp(-r t) per period, rounded to 1e-6
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EvalArgs {
    /// Instance JSON file
    #[arg(long)]
    input: PathBuf,
    /// Schedule JSON file
    #[arg(long)]
    schedule: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Algorithms to compare (default: constant and ptas)
    #[arg(long = "alg", value_enum)]
    algs: Vec<Alg>,
    /// Accuracy parameter for the scheme
    #[arg(long)]
    eps: Option<String>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Instance files
    #[arg(required = false)]
    inputs: Vec<PathBuf>,
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| {
        let code = if e.kind() == std::io::ErrorKind::NotFound {
            EXIT_USAGE
        } else {
            EXIT_GENERAL
        };
        CliError::new(code, format!("{}: {e}", path.display()))
    })
}

fn load_instance(path: &Path) -> CliResult<Instance> {
    let text = read_file(path)?;
    instance_from_json(&text)
        .map_err(|e| CliError::new(EXIT_GENERAL, format!("{}: {e}", path.display())))
}

fn parse_eps(eps: &Option<String>) -> CliResult<Rat> {
    let text = eps.as_deref().unwrap_or("0.5");
    let value = rat_from_decimal(text)
        .ok_or_else(|| CliError::new(EXIT_USAGE, format!("--eps {text}: not a decimal number")))?;
    if value <= rat_int(0) || value >= rat_int(1) {
        return Err(CliError::new(
            EXIT_USAGE,
            "--eps must lie strictly between 0 and 1",
        ));
    }
    Ok(value)
}

fn lp_budget() -> CliResult<u128> {
    match std::env::var("INKSPAN_LP_BUDGET") {
        Ok(text) => text.parse::<u128>().map_err(|_| {
            CliError::new(
                EXIT_USAGE,
                format!("INKSPAN_LP_BUDGET={text}: not a nonnegative integer"),
            )
        }),
        Err(_) => Ok(DEFAULT_LP_BUDGET),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::new(EXIT_GENERAL, format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn lp_relaxation_value(inst: &Instance, strengthened: bool) -> CliResult<f64> {
    let lp = build_relaxation(inst, strengthened);
    match solve_lp(&lp).map_err(classify_lp)? {
        LpSolution::Optimal { value, .. } => Ok(value),
        LpSolution::Infeasible => Err(CliError::new(
            EXIT_GENERAL,
            "relaxation unexpectedly infeasible",
        )),
    }
}

fn run_algorithm(
    inst: &Instance,
    alg: Alg,
    eps: &Option<String>,
    threads: usize,
) -> CliResult<AlgoResult> {
    match alg {
        Alg::Exact => brute_force(inst).map_err(classify_oracle),
        Alg::Constant => solve_constant_factor(inst, threads).map_err(classify_constant),
        Alg::Ptas => {
            let eps = parse_eps(eps)?;
            let budget = lp_budget()?;
            solve_ptas(inst, &eps, budget, threads).map_err(classify_ptas)
        }
        Alg::LpStrong | Alg::LpWeak => unreachable!("handled by the caller"),
    }
}

fn cmd_solve(args: SolveArgs) -> CliResult<()> {
    let inst = load_instance(&args.input)?;
    let text = match args.alg {
        Alg::LpStrong | Alg::LpWeak => {
            let value = lp_relaxation_value(&inst, args.alg == Alg::LpStrong)?;
            let tag = if args.alg == Alg::LpStrong {
                "lp-strong"
            } else {
                "lp-weak"
            };
            format!("{{\n  \"algorithm\": \"{tag}\",\n  \"lp_value\": {value}\n}}\n")
        }
        alg => {
            let result = run_algorithm(&inst, alg, &args.eps, args.threads)?;
            result_to_json(&inst, &result)
        }
    };
    write_output(&args.out, &text)
}

fn cmd_gen(command: GenCommand) -> CliResult<()> {
    match command {
        GenCommand::Gap { k, m, out } => {
            let inst = gen_gap_family(k, m).map_err(classify_gen)?;
            write_output(&out, &instance_to_json(&inst))
        }
        GenCommand::ThreePartition { file, out } => {
            let text = read_file(&file)?;
            let numbers: Vec<u64> = text
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<u64>().map_err(|_| {
                        CliError::new(
                            EXIT_GENERAL,
                            format!("{}: bad integer {tok:?}", file.display()),
                        )
                    })
                })
                .collect::<CliResult<_>>()?;
            let tp = gen_3partition(&numbers).map_err(classify_gen)?;
            for warning in &tp.warnings {
                eprintln!("warning: {warning}");
            }
            eprintln!("target value: {}", rat_display(&tp.target));
            write_output(&out, &instance_to_json(&tp.instance))
        }
        GenCommand::Random {
            n,
            t,
            seed,
            fill,
            vmin,
            vmax,
            wmin,
            wmax,
            rate,
            out,
        } => {
            let fill_factor = rat_from_decimal(&fill).ok_or_else(|| {
                CliError::new(EXIT_USAGE, format!("--fill {fill}: not a decimal number"))
            })?;
            let inst = gen_random(&RandomParams {
                items: n,
                horizon: t,
                seed,
                value_range: (vmin, vmax),
                weight_range: (wmin, wmax),
                fill_factor,
                discount_rate: rate,
            })
            .map_err(classify_gen)?;
            write_output(&out, &instance_to_json(&inst))
        }
    }
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let inst = load_instance(&args.input)?;
    let sched_text = read_file(&args.schedule)?;
    let schedule = schedule_from_json(&inst, &sched_text)
        .map_err(|e| CliError::new(EXIT_GENERAL, format!("{}: {e}", args.schedule.display())))?;
    let value =
        evaluate(&inst, &schedule).map_err(|e| CliError::new(EXIT_GENERAL, e.to_string()))?;
    let report =
        check_feasible(&inst, &schedule).map_err(|e| CliError::new(EXIT_GENERAL, e.to_string()))?;
    let violations: Vec<String> = report
        .violations
        .iter()
        .map(|v| {
            format!(
                "{{\"period\": {}, \"load\": {}, \"capacity\": {}}}",
                v.period,
                rat_to_f64(&v.load),
                rat_to_f64(&v.capacity)
            )
        })
        .collect();
    println!(
        "{{\n  \"value\": {},\n  \"value_exact\": \"{}\",\n  \"feasible\": {},\n  \"violations\": [{}]\n}}",
        rat_to_f64(&value),
        rat_display(&value),
        report.feasible(),
        violations.join(", ")
    );
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> CliResult<()> {
    let algs = if args.algs.is_empty() {
        vec![Alg::Constant, Alg::Ptas]
    } else {
        args.algs.clone()
    };
    if algs
        .iter()
        .any(|a| matches!(a, Alg::LpStrong | Alg::LpWeak))
    {
        return Err(CliError::new(
            EXIT_USAGE,
            "compare supports exact, constant, and ptas",
        ));
    }
    let mut rows =
        vec!["instance,algorithm,value,opt,ratio,claimed_factor,wall_ms,violation".to_string()];
    let mut violations = 0usize;
    for input in &args.inputs {
        let inst = load_instance(input)?;
        let opt = brute_force(&inst).map_err(classify_oracle)?;
        for &alg in &algs {
            let started = Instant::now();
            let result = run_algorithm(&inst, alg, &args.eps, args.threads)?;
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let ratio = if opt.value > rat_int(0) {
                Some(&result.value / &opt.value)
            } else {
                None
            };
            // a claimed factor with a zero optimum demands nothing
            let violated = matches!((&result.claimed_factor, &ratio), (Some(factor), Some(ratio))
                if *ratio < factor * (rat_int(1) - rat(1, 1_000_000_000)));
            if violated {
                violations += 1;
            }
            rows.push(format!(
                "{},{},{},{},{},{},{:.3},{}",
                input.display(),
                result.algorithm.tag(),
                rat_to_f64(&result.value),
                rat_to_f64(&opt.value),
                ratio
                    .map(|r| rat_to_f64(&r).to_string())
                    .unwrap_or_default(),
                result
                    .claimed_factor
                    .as_ref()
                    .map(rat_display)
                    .unwrap_or_default(),
                wall_ms,
                if violated { "yes" } else { "no" }
            ));
        }
    }
    let mut text = rows.join("\n");
    text.push('\n');
    write_output(&args.out, &text)?;
    if violations > 0 {
        return Err(CliError::new(
            EXIT_GENERAL,
            format!("{violations} guarantee violation(s) flagged"),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Gen(command) => cmd_gen(command),
        Command::Eval(args) => cmd_eval(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
