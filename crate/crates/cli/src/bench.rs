//! Timing a directory of instances: per-instance verdicts plus per-class
//! average time (t) and timeout count (to).

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::ValueEnum;

use lcasp::ground::ground_base;
use lcasp::lcsem::{self, LcError, SolveOptions};
use lcasp::stable::SolveError;

use crate::{exit, load_program, BenchArgs, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Text,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Timeout,
    Error(String),
}

impl Verdict {
    fn label(&self) -> &str {
        match self {
            Verdict::Sat => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::Timeout => "TIMEOUT",
            Verdict::Error(_) => "ERROR",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Run {
    pub name: String,
    pub class: String,
    pub verdict: Verdict,
    pub time: Duration,
}

/// `flowshop_3x3.lp` belongs to class `flowshop`.
fn class_of(name: &str) -> String {
    name.split(['_', '.']).next().unwrap_or(name).to_owned()
}

fn run_instance(
    encoding: &Option<PathBuf>,
    instance: &Path,
    options: &SolveOptions,
    timeout: Duration,
) -> Verdict {
    let files: Vec<PathBuf> = encoding
        .iter()
        .cloned()
        .chain([instance.to_path_buf()])
        .collect();
    let program = match load_program(&files) {
        Ok(p) => p,
        Err(f) => return Verdict::Error(f.message),
    };
    let g = match ground_base(&program) {
        Ok(g) => g,
        Err(e) => return Verdict::Error(e.to_string()),
    };
    let mut options = options.clone();
    options.limit = Some(1);
    options.deadline = Some(Instant::now() + timeout);
    match lcsem::solve(&g, &options) {
        Ok(s) if s.models.is_empty() => Verdict::Unsat,
        Ok(_) => Verdict::Sat,
        Err(LcError::Solve(SolveError::Timeout)) => Verdict::Timeout,
        Err(e) => Verdict::Error(e.to_string()),
    }
}

fn instances(args: &BenchArgs) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(&args.suite)
        .map_err(|e| Failure::new(exit::NO_INPUT, format!("{}: {e}", args.suite.display())))?;
    let encoding = args
        .encoding
        .as_ref()
        .and_then(|e| std::fs::canonicalize(e).ok());
    let mut out: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lp"))
        .filter(|p| std::fs::canonicalize(p).ok() != encoding)
        .collect();
    out.sort();
    Ok(out)
}

pub fn cmd_bench(args: BenchArgs) -> Result<u8, Failure> {
    let options = args.solver.options()?;
    let files = instances(&args)?;
    let timeout = Duration::from_secs_f64(args.timeout.max(0.0));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Run>>> = Mutex::new(vec![None; files.len()]);
    std::thread::scope(|scope| {
        for _ in 0..args.jobs.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = files.get(i) else { break };
                let start = Instant::now();
                let verdict = run_instance(&args.encoding, path, &options, timeout);
                let name = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let run = Run {
                    class: class_of(&name),
                    name,
                    verdict,
                    time: start.elapsed(),
                };
                results.lock().expect("result lock")[i] = Some(run);
            });
        }
    });
    let runs: Vec<Run> = results
        .into_inner()
        .expect("result lock")
        .into_iter()
        .flatten()
        .collect();
    print!("{}", table(&runs, args.format));
    for run in &runs {
        if let Verdict::Error(message) = &run.verdict {
            eprintln!("lcasp: {}: {message}", run.name);
        }
    }
    let failed = runs.iter().any(|r| matches!(r.verdict, Verdict::Error(_)));
    Ok(if failed { exit::FAILED } else { exit::OK })
}

pub fn table(runs: &[Run], format: TableFormat) -> String {
    let mut classes: BTreeMap<&str, (usize, Duration, usize)> = BTreeMap::new();
    for run in runs {
        let entry = classes.entry(&run.class).or_default();
        entry.0 += 1;
        entry.1 += run.time;
        if run.verdict == Verdict::Timeout {
            entry.2 += 1;
        }
    }
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str("instance,class,verdict,seconds\n");
            for r in runs {
                let _ = writeln!(
                    out,
                    "{},{},{},{:.6}",
                    r.name,
                    r.class,
                    r.verdict.label(),
                    r.time.as_secs_f64()
                );
            }
        }
        TableFormat::Text => {
            let _ = writeln!(out, "{:<28} {:<8} {:>10}", "instance", "verdict", "t (s)");
            for r in runs {
                let _ = writeln!(
                    out,
                    "{:<28} {:<8} {:>10.4}",
                    r.name,
                    r.verdict.label(),
                    r.time.as_secs_f64()
                );
            }
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "{:<28} {:>4} {:>10} {:>4}",
                "class", "n", "t (s)", "to"
            );
            for (class, (n, total, timeouts)) in &classes {
                let _ = writeln!(
                    out,
                    "{:<28} {:>4} {:>10.4} {:>4}",
                    class,
                    n,
                    total.as_secs_f64() / *n as f64,
                    timeouts
                );
            }
        }
    }
    out
}
