use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qg_cli::experiments::{probe_picard, spans, sqg_run, stability_sweep};
use qg_cli::run::{resume, run_simulation, CHECKPOINT};
use qg_cli::{check, parse_config, CliError, Manifest};

#[derive(Parser)]
#[command(name = "qghs", version, about = "Quasi-geostrophic half-space simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate to T writing diagnostics, snapshots and checkpoints.
    Run(Common),
    /// Continue a run from its checkpoint.
    Resume {
        #[command(flatten)]
        common: Common,
        /// Defaults to checkpoint.qgck in the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// 2D SQG run from the surface buoyancy of the configured data.
    SqgRun(Common),
    /// Contraction factors of the frozen-velocity Picard map.
    ProbePicard {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        pairs: usize,
        #[arg(long, default_value_t = 1e-3)]
        span_min: f64,
        #[arg(long, default_value_t = 14)]
        span_count: usize,
    },
    /// Vanishing-hyperviscosity sweep and initial-data perturbations.
    StabilitySweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1)]
        eps0: f64,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3")]
        amplitudes: Vec<f64>,
    },
    /// Property checks on the configured grid.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

fn out_dir(c: &Common, m: &Manifest) -> PathBuf {
    c.out.clone().or_else(|| m.config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(cmd: Command) -> Result<bool, CliError> {
    let common = match &cmd {
        Command::Run(c) | Command::SqgRun(c) => c,
        Command::Resume { common, .. }
        | Command::ProbePicard { common, .. }
        | Command::StabilitySweep { common, .. }
        | Command::Check { common, .. } => common,
    };
    let manifest = parse_config(&common.config, common.seed)?;
    let out = out_dir(common, &manifest);
    let work = || -> Result<bool, CliError> {
        match &cmd {
            Command::Run(_) => {
                let s = run_simulation(&manifest, &out)?;
                println!("{} steps to t = {}, {} diagnostics rows in {}", s.steps, s.t, s.rows, s.diagnostics.display());
            }
            Command::Resume { checkpoint, .. } => {
                let ck = checkpoint.clone().unwrap_or_else(|| out.join(CHECKPOINT));
                let s = resume(&manifest, &out, &ck)?;
                println!("resumed to step {} (t = {}), {} diagnostics rows", s.steps, s.t, s.rows);
            }
            Command::SqgRun(_) => {
                let n = sqg_run(&manifest, &out)?;
                println!("{n} SQG diagnostics rows in {}", out.display());
            }
            Command::ProbePicard { pairs, span_min, span_count, .. } => {
                let r = probe_picard(&manifest, &out, *pairs, &spans(*span_min, *span_count))?;
                for (s, c) in r.spans.iter().zip(&r.contraction) {
                    println!("span {s:.4e}  c = {c:.4e}");
                }
                println!("t0 = {:?}, crossing = {:?}, C = {:?}", r.t0, r.t_cross, r.constant);
            }
            Command::StabilitySweep { eps0, levels, amplitudes, .. } => {
                let r = stability_sweep(&manifest, &out, *eps0, *levels, amplitudes)?;
                for (e, g) in r.eps.iter().zip(&r.gaps) {
                    println!("eps {e:.4e}  gap to next {g:.6e}");
                }
                println!("strictly decreasing: {}", r.strictly_decreasing);
                for (a, g) in r.amplitudes.iter().zip(&r.perturbation_gaps) {
                    println!("perturbation {a:.1e}  gap {g:.6e}");
                }
            }
            Command::Check { samples, .. } => {
                let lines = check::run_checks(&manifest, *samples)?;
                for l in &lines {
                    println!("{l}");
                }
                return Ok(lines.iter().all(|l| l.passed));
            }
        }
        Ok(true)
    };
    match common.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Range(format!("--threads: {e}")))?
            .install(work),
        None => work(),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("qghs: {e}");
            ExitCode::from(2)
        }
    }
}
