use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use distill_core::analytics::{aggregate_to_file, AnalyticsError, Level};
use distill_core::dataset::{read_multi, ExecMode};
use distill_core::diff::ChangeType;
use distill_core::miner::{mine_repos, read_repo_list, MinerError};
use distill_core::synth::{SynthConfig, DEFAULT_SEED};

const JOBS_ENV: &str = "DISTILL_JOBS";

#[derive(Parser)]
#[command(
    name = "distill",
    version,
    about = "Mine fine-grained source changes from Git history and aggregate them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine repositories into one raw dataset file per project
    Mine {
        /// Repository directories, or files listing one repository per line
        #[arg(long, required = true, num_args = 1..)]
        repos: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Repositories mined concurrently [default: $DISTILL_JOBS or the core count]
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
    },
    /// Aggregate raw dataset files at commit, author, project or global level
    Aggregate {
        #[arg(long, required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = LevelArg::Commit)]
        level: LevelArg,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
        /// Skip undecodable lines instead of failing
        #[arg(long)]
        skip_malformed: bool,
        #[arg(long, hide = true, value_parser = clap::value_parser!(u32).range(1..))]
        partitions: Option<u32>,
    },
    /// Print the change types in column order
    Taxonomy,
    /// Time sequential and parallel aggregation of a synthetic dataset
    Bench {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        rows: u64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..))]
        projects: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Commit,
    Author,
    Project,
    Global,
}

impl From<LevelArg> for Level {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Commit => Level::Commit,
            LevelArg::Author => Level::Author,
            LevelArg::Project => Level::Project,
            LevelArg::Global => Level::Global,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Io(m) => m,
        }
    }
}

impl From<AnalyticsError> for Failure {
    fn from(e: AnalyticsError) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else {
            Failure::Io(e.to_string())
        }
    }
}

fn miner_failure(e: &MinerError) -> Failure {
    match e {
        MinerError::RepoNotFound(_) | MinerError::Io { .. } | MinerError::GitUnavailable(_) => {
            Failure::Io(e.to_string())
        }
        _ => Failure::Data(e.to_string()),
    }
}

/// Flag, then environment, then the number of logical cores.
fn resolve_jobs(flag: Option<u32>) -> Result<usize, Failure> {
    if let Some(j) = flag {
        return Ok(j as usize);
    }
    if let Ok(v) = std::env::var(JOBS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(j) if j >= 1 => Ok(j),
            _ => Err(Failure::Usage(format!(
                "{JOBS_ENV} must be a positive integer, got `{v}`"
            ))),
        };
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn expand_repos(args: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut repos = Vec::new();
    for arg in args {
        if arg.is_file() {
            repos.extend(read_repo_list(arg).map_err(|e| miner_failure(&e))?);
        } else {
            repos.push(arg.clone());
        }
    }
    Ok(repos)
}

fn mine(repos: &[PathBuf], out: &Path, jobs: Option<u32>) -> Result<(), Failure> {
    let jobs = resolve_jobs(jobs)?;
    let repos = expand_repos(repos)?;
    if repos.is_empty() {
        return Err(Failure::Usage("no repositories given".into()));
    }
    // Every repository error is printed as it comes; the exit code is the
    // most severe one.
    let mut worst = 0;
    for (repo, result) in repos.iter().zip(mine_repos(&repos, out, jobs)) {
        match result {
            Ok(r) => {
                for e in &r.parse_errors {
                    eprintln!("warning: {}: skipped unparsable file: {e}", r.project);
                }
                if r.replaced_chars > 0 {
                    eprintln!(
                        "warning: {}: replaced {} invalid UTF-8 sequences",
                        r.project, r.replaced_chars
                    );
                }
                println!(
                    "{}: {} commits, {} files diffed, {} files skipped, {} rows -> {}",
                    r.project,
                    r.commits,
                    r.files_diffed,
                    r.files_skipped,
                    r.rows_written,
                    r.output.display()
                );
            }
            Err(e) => {
                eprintln!("error: {}: {e}", repo.display());
                worst = worst.max(miner_failure(&e).code());
            }
        }
    }
    match worst {
        0 => Ok(()),
        2 => Err(Failure::Data(String::new())),
        _ => Err(Failure::Io(String::new())),
    }
}

fn aggregate(
    inputs: &[PathBuf],
    out: &Path,
    level: Level,
    jobs: Option<u32>,
    skip_malformed: bool,
    partitions: Option<u32>,
) -> Result<(), Failure> {
    let workers = resolve_jobs(jobs)?;
    let mode = if workers == 1 && partitions.is_none() {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel {
            workers,
            partitions: partitions.map(|p| p as usize),
        }
    };
    let plan = read_multi(inputs).skip_malformed(skip_malformed);
    let report = aggregate_to_file(plan, level, out, mode)?;
    if report.rows_skipped > 0 {
        eprintln!("warning: skipped {} malformed lines", report.rows_skipped);
    }
    eprintln!(
        "{} rows, {} commits -> {} ({:.3}s)",
        report.rows_read,
        report.groups,
        out.display(),
        report.wall_time.as_secs_f64()
    );
    Ok(())
}

fn bench(rows: u64, jobs: Option<u32>, seed: u64, projects: u32) -> Result<(), Failure> {
    let workers = resolve_jobs(jobs)?;
    let dir = std::env::temp_dir().join(format!("distill-bench-{}", std::process::id()));
    let cfg = SynthConfig::new(rows as usize, projects as usize).seed(seed);
    let result = distill_core::bench::run(&dir, cfg, workers);
    let _ = std::fs::remove_dir_all(&dir);
    let r = result?;
    println!("rows: {}", r.rows);
    println!("commits: {}", r.commits);
    println!("sequential: {:.3}s", r.sequential.as_secs_f64());
    println!("parallel ({} workers): {:.3}s", r.workers, r.parallel.as_secs_f64());
    println!("speedup: {:.2}x", r.speedup());
    println!("results identical: {}", r.identical);
    if !r.identical {
        return Err(Failure::Data("sequential and parallel results differ".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Mine { repos, out, jobs } => mine(&repos, &out, jobs),
        Command::Aggregate {
            inputs,
            out,
            level,
            jobs,
            skip_malformed,
            partitions,
        } => aggregate(&inputs, &out, level.into(), jobs, skip_malformed, partitions),
        Command::Taxonomy => {
            for t in ChangeType::ALL {
                println!("{t}");
            }
            Ok(())
        }
        Command::Bench {
            rows,
            jobs,
            seed,
            projects,
        } => bench(rows, jobs, seed, projects),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message().is_empty() {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
