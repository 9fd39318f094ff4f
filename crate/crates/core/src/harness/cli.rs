//! `rcbo` command line.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 I/O error. Divergent
//! runs are results, not errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{CboError, Result};

use super::config::ExperimentConfig;
use super::experiment::{param_report, run_experiment};
use super::output::{runs_csv, series_csv, sweep_csv, write_file};
use super::probe::run_probe;
use super::sweep::{run_sweep, SweepSpec};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "RCBO_THREADS";

#[derive(Parser, Debug)]
#[command(name = "rcbo", version, about = "Rescaled consensus-based optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment: `runs` independent simulations.
    Run(Common),
    /// Success-rate grid over the `[sweep]` axes.
    Sweep(Common),
    /// Report the sufficient parameter conditions.
    CheckParams(Common),
    /// Run the `[probe]` diagnostic.
    Probe(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML experiment config.
    config: PathBuf,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Runs per experiment or sweep cell; seeds for probes.
    #[arg(long)]
    runs: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: RCBO_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(runs) = self.runs {
            cfg.runs = runs;
            if let Some(axes) = cfg.sweep.as_mut() {
                axes.runs = Some(runs);
            }
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        Ok(cfg)
    }

    fn threads(&self) -> Result<Option<usize>> {
        if let Some(t) = self.threads {
            return match t {
                0 => Err(CboError::config("--threads", "must be at least 1")),
                t => Ok(Some(t)),
            };
        }
        match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(t) if t > 0 => Ok(Some(t)),
                _ => Err(CboError::config(THREADS_ENV, format!("expected a positive integer, got '{v}'"))),
            },
            Err(_) => Ok(None),
        }
    }
}

fn exit_code(e: &CboError) -> i32 {
    match e {
        CboError::Io { .. } => 2,
        _ => 1,
    }
}

/// Writes `contents` to `path`, or to stdout when no path is configured.
fn deliver(path: Option<&Path>, contents: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            let _ = out.write_all(contents.as_bytes());
            Ok(())
        }
    }
}

/// `runs.csv` -> `runs_run0_consensus.csv`
fn series_path(base: &Path, run: usize, label: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    base.with_file_name(format!("{stem}_run{run}_{label}.csv"))
}

fn cmd_run(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let outcome = run_experiment(cfg)?;
    let dim = cfg.objective.build()?.dim();
    let s = &outcome.summary;
    let _ = writeln!(
        out,
        "runs {} successes {} divergences {} success_rate {} mean_final_distance {}",
        s.runs,
        s.successes,
        s.divergences,
        s.success_rate,
        s.mean_final_distance.map(|d| d.to_string()).unwrap_or_else(|| "n/a".into())
    );
    if let Some(report) = &outcome.check {
        let _ = writeln!(out, "parameter check: {}", report.overall);
    }
    match &cfg.output {
        Some(path) => {
            write_file(path, &runs_csv(&outcome.records, dim))?;
            for r in &outcome.records {
                for series in &r.series {
                    write_file(&series_path(path, r.run, &series.label), &series_csv(series))?;
                }
            }
        }
        None => {
            let _ = out.write_all(runs_csv(&outcome.records, dim).as_bytes());
        }
    }
    Ok(())
}

fn cmd_sweep(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let spec = SweepSpec::from_config(cfg)?;
    let table = run_sweep(&spec)?;
    let csv = sweep_csv(&table);
    if cfg.output.is_some() {
        let _ = out.write_all(table.grid_text().as_bytes());
    }
    deliver(cfg.output.as_deref(), &csv, out)
}

fn cmd_check(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let obj = cfg.validate()?;
    let report = param_report(cfg, &obj).ok_or_else(|| {
        CboError::config(
            "check.growth",
            format!("objective '{}' has no known growth constants; supply [check.growth]", obj.name()),
        )
    })?;
    let json = serde_json::to_string(&report).expect("report serializes");
    let _ = writeln!(out, "{report}");
    let _ = writeln!(out, "{json}");
    if let Some(path) = &cfg.output {
        write_file(path, &format!("{json}\n"))?;
    }
    Ok(())
}

fn cmd_probe(cfg: &ExperimentConfig, seeds: Option<usize>, out: &mut dyn Write) -> Result<()> {
    let result = run_probe(cfg, seeds)?;
    let _ = writeln!(out, "{}", result.summary());
    if let Some(path) = &cfg.output {
        write_file(path, &result.csv())?;
    }
    Ok(())
}

type Handler = fn(&ExperimentConfig, Option<usize>, &mut dyn Write) -> Result<()>;

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<()> {
    let (common, run): (&Common, Handler) = match command {
        Command::Run(c) => (c, |cfg, _, out| cmd_run(cfg, out)),
        Command::Sweep(c) => (c, |cfg, _, out| cmd_sweep(cfg, out)),
        Command::CheckParams(c) => (c, |cfg, _, out| cmd_check(cfg, out)),
        Command::Probe(c) => (c, cmd_probe),
    };
    let cfg = common.load()?;
    let threads = common.threads()?;
    let mut buf: Vec<u8> = Vec::new();
    let result = with_threads(threads, || run(&cfg, common.runs, &mut buf));
    let _ = out.write_all(&buf);
    result
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CboError::config("--threads", e.to_string()))?;
            pool.install(f)
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T>(_threads: Option<usize>, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f()
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to stderr. Returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rcbo: {e}");
            exit_code(&e)
        }
    }
}
