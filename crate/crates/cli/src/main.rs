//! `lcasp`: command-line front end for answer set programming with linear
//! constraint atoms.

mod bench;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lcasp::ground::{ground_base, GroundError, GroundProgram};
use lcasp::lcsem::props::{check_propositions, fixed_counterexamples, PropOptions};
use lcasp::lcsem::{self, LcError, Mode, Preset, SolveOptions, StrictPolicy, TheoryChoice};
use lcasp::multishot::{incremental, SessionError};
use lcasp::rational::{parse_rational, Rational};
use lcasp::syntax::{parse_program, Program, Statement, BASE_PART};

use output::Format;

/// Exit statuses, following the usual solver and sysexits conventions.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const SATISFIABLE: u8 = 10;
    pub const UNSATISFIABLE: u8 = 20;
    pub const DATA: u8 = 65;
    pub const NO_INPUT: u8 = 66;
    pub const SOFTWARE: u8 = 70;
}

#[derive(Parser, Debug)]
#[command(name = "lcasp", version, about = "ASP with linear constraint atoms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the lc-stable models of a program.
    Solve(SolveArgs),
    /// Run the base/step/check loop until the first horizon with a model.
    Incremental(IncrementalArgs),
    /// Check the semantic properties on random programs.
    CheckProps(CheckPropsArgs),
    /// Time a directory of instances.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Enumeration algorithm.
    #[arg(long, default_value = "lazy")]
    mode: Mode,
    /// Theory backend: dl, lp, or auto (dl when every lc-atom is a difference constraint).
    #[arg(long, default_value = "auto")]
    theory: TheoryChoice,
    /// Homogeneous semantic setting the program must fit, e.g. defined-nonstrict.
    #[arg(long, conflicts_with_all = ["strictness", "strict_file"])]
    setting: Option<Preset>,
    /// Strictness of every lc-atom.
    #[arg(long, value_enum, conflicts_with = "strict_file")]
    strictness: Option<Strictness>,
    /// File with one `strict <atom>` or `nonstrict <atom>` line per lc-atom.
    #[arg(long)]
    strict_file: Option<PathBuf>,
    /// Tightening for strict relations over real variables (overrides LCASP_EPSILON).
    #[arg(long)]
    epsilon: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strictness {
    Strict,
    Nonstrict,
    Recommended,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Program files (`-` for standard input); each starts in the base part.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Stop after this many models (0 = all).
    #[arg(long, default_value_t = 0)]
    models: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct IncrementalArgs {
    /// Program files containing the base, step(n) and check(n) parts.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Largest horizon tried.
    #[arg(long, default_value_t = lcasp::multishot::HORIZON_CAP)]
    max_horizon: i64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct CheckPropsArgs {
    /// Random programs per setting.
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Only this setting (default: all four).
    #[arg(long)]
    setting: Option<Preset>,
    /// Also compare lazy against reference enumeration.
    #[arg(long)]
    compare_modes: bool,
    #[arg(long, default_value = "auto")]
    theory: TheoryChoice,
    /// Run a fixed example set instead of random programs.
    #[arg(long, value_enum)]
    fixed: Option<Fixed>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Fixed {
    /// The two programs separating SM and SM_lc.
    Prop2,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Directory of `.lp` instances.
    suite: PathBuf,
    /// Encoding prepended to every instance (skipped if it lives in the suite).
    #[arg(long)]
    encoding: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Per-instance time limit in seconds.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: bench::TableFormat,
}

/// A failure with its exit status.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<LcError> for Failure {
    fn from(e: LcError) -> Self {
        let code = if e.is_resource_limit() {
            exit::SOFTWARE
        } else {
            exit::DATA
        };
        Failure::new(code, e.to_string())
    }
}

impl From<GroundError> for Failure {
    fn from(e: GroundError) -> Self {
        Failure::new(exit::DATA, e.to_string())
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Solve(e) => e.into(),
            other => Failure::new(exit::DATA, other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::DATA } else { exit::OK });
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Incremental(args) => cmd_incremental(args),
        Command::CheckProps(args) => cmd_check_props(args),
        Command::Bench(args) => bench::cmd_bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("lcasp: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin())
            .map_err(|e| Failure::new(exit::NO_INPUT, format!("<stdin>: {e}")))
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::new(exit::NO_INPUT, format!("{}: {e}", path.display())))
    }
}

/// Parses each file on its own and joins them, each starting in the base
/// part.
pub fn load_program(files: &[PathBuf]) -> Result<Program, Failure> {
    let mut program = Program::new();
    for path in files {
        let text = read_source(path)?;
        let parsed = parse_program(&text)
            .map_err(|e| Failure::new(exit::DATA, format!("{}:{e}", path.display())))?;
        program.statements.push(Statement::Part {
            name: BASE_PART.to_owned(),
            params: Vec::new(),
        });
        program.statements.extend(parsed.statements);
    }
    Ok(program)
}

fn epsilon_override(flag: &Option<String>) -> Result<Option<Rational>, Failure> {
    let text = match flag {
        Some(t) => t.clone(),
        None => match std::env::var("LCASP_EPSILON") {
            Ok(t) => t,
            Err(_) => return Ok(None),
        },
    };
    match parse_rational(&text) {
        Some(e) if e > Rational::from_integer(0.into()) => Ok(Some(e)),
        _ => Err(Failure::new(
            exit::DATA,
            format!("epsilon must be a positive number, got `{text}`"),
        )),
    }
}

impl SolverArgs {
    pub fn options(&self) -> Result<SolveOptions, Failure> {
        let mut options = match self.setting {
            Some(preset) => SolveOptions::with_preset(preset),
            None => SolveOptions::default(),
        };
        options.mode = self.mode;
        options.theory = self.theory;
        if let Some(s) = self.strictness {
            options.policy = match s {
                Strictness::Strict => StrictPolicy::AllStrict,
                Strictness::Nonstrict => StrictPolicy::AllNonStrict,
                Strictness::Recommended => StrictPolicy::Recommended,
            };
        }
        if let Some(path) = &self.strict_file {
            let text = read_source(path)?;
            options.policy = StrictPolicy::parse_file(&text)
                .map_err(|e| Failure::new(exit::DATA, format!("{}: {e}", path.display())))?;
        }
        if let Some(epsilon) = epsilon_override(&self.epsilon)? {
            options.epsilon = epsilon;
            options.allow_epsilon = true;
        }
        Ok(options)
    }
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let program = load_program(&args.files)?;
    let g: GroundProgram = ground_base(&program)?;
    let mut options = args.solver.options()?;
    if args.models > 0 {
        options.limit = Some(args.models);
    }
    let solution = lcsem::solve(&g, &options)?;
    print!("{}", output::render(&g, &solution, args.format));
    Ok(status(solution.models.len(), args.models))
}

fn status(found: usize, limit: usize) -> u8 {
    if limit > 0 && found >= limit {
        exit::OK
    } else if found > 0 {
        exit::SATISFIABLE
    } else {
        exit::UNSATISFIABLE
    }
}

fn cmd_incremental(args: IncrementalArgs) -> Result<u8, Failure> {
    let program = load_program(&args.files)?;
    let options = args.solver.options()?;
    let run = incremental(program, options, args.max_horizon)?;
    if args.format == Format::Text {
        for (n, count) in &run.counts {
            println!("Horizon {n}: {count} model(s)");
        }
    }
    match &run.solution {
        Some(solution) => {
            print!("{}", output::render(&run.program, solution, args.format));
            Ok(exit::SATISFIABLE)
        }
        None => {
            if args.format == Format::Json {
                println!("[]");
            } else {
                println!("UNSATISFIABLE up to horizon {}", args.max_horizon);
            }
            Ok(exit::UNSATISFIABLE)
        }
    }
}

fn cmd_check_props(args: CheckPropsArgs) -> Result<u8, Failure> {
    if let Some(Fixed::Prop2) = args.fixed {
        let cases = fixed_counterexamples()?;
        let mut ok = true;
        for case in &cases {
            println!(
                "{} {}",
                if case.passed() { "PASS" } else { "FAIL" },
                case.name
            );
            for line in case.program.lines() {
                println!("%   {line}");
            }
            println!(
                "  SM     expected {:?} actual {:?}",
                case.expected_sm, case.sm
            );
            println!(
                "  SM_lc  expected {:?} actual {:?}",
                case.expected_sm_lc, case.sm_lc
            );
            ok &= case.passed();
        }
        return Ok(if ok { exit::OK } else { exit::FAILED });
    }
    let options = PropOptions {
        count: args.count,
        seed: args.seed,
        presets: match args.setting {
            Some(p) => vec![p],
            None => Preset::ALL.to_vec(),
        },
        compare_modes: args.compare_modes,
        theory: args.theory,
    };
    let report = check_propositions(&options);
    for v in &report.violations {
        print!("{v}");
    }
    println!(
        "programs: {} violations: {}",
        report.programs,
        report.violations.len()
    );
    Ok(if report.ok() { exit::OK } else { exit::FAILED })
}
