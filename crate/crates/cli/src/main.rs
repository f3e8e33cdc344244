use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use equibif::config::ProblemConfig;
use equibif::pipeline::{self, Artifact, LambdaSelection};
use equibif::verify::{self, Level};
use equibif::{Error, Result};

/// Equivariant global-bifurcation analysis for symmetric Neumann problems on boxes.
#[derive(Parser)]
#[command(name = "equibif", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "equibif-out")]
    out: PathBuf,
}

#[derive(Args)]
struct WithLambda {
    #[command(flatten)]
    common: Common,
    /// Candidate to act on, as a rational, or `all`.
    #[arg(long, default_value = "all", allow_hyphen_values = true)]
    lambda0: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Neumann Laplacian spectrum of the domain.
    Spectrum(Common),
    /// Candidate set, kernel dimensions and verdicts.
    Analyze(Common),
    /// Candidate table only.
    Candidates(Common),
    /// Euler-ring degrees on both sides of λ0 (finite groups; `all` lists every candidate).
    Euler(WithLambda),
    /// Continue the branches leaving certified candidates.
    Continue(WithLambda),
    /// Redraw diagram.svg from the branch CSVs in the output directory.
    Diagram {
        #[arg(long, default_value = "equibif-out")]
        out: PathBuf,
    },
    /// Run the self-check battery.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("EQUIBIF_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Contract(format!("EQUIBIF_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::Contract("EQUIBIF_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Contract(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn emit(out: &Path, artifacts: &[Artifact]) -> Result<()> {
    pipeline::write_artifacts(out, artifacts)?;
    for a in artifacts {
        eprintln!("wrote {}", out.join(&a.name).display());
    }
    Ok(())
}

fn run(command: &Command) -> Result<i32> {
    match command {
        Command::Spectrum(c) => emit(&c.out, &pipeline::spectrum(&ProblemConfig::load(&c.config)?)?)?,
        Command::Analyze(c) => {
            let (report, artifacts) = pipeline::analyze(&ProblemConfig::load(&c.config)?)?;
            emit(&c.out, &artifacts)?;
            for (cand, v) in &report.candidates {
                println!("λ0 = {:<10} dim V = {:<3} dim V^H = {:<3} {:?}", cand.lambda.label(), v.dim_v, v.criterion_sum, v.verdict);
            }
        }
        Command::Candidates(c) => {
            let artifacts = pipeline::candidates(&ProblemConfig::load(&c.config)?)?;
            emit(&c.out, &artifacts)?;
            print!("{}", artifacts[0].contents);
        }
        Command::Euler(w) => {
            let sel = LambdaSelection::parse(&w.lambda0)?;
            emit(&w.common.out, &pipeline::euler(&ProblemConfig::load(&w.common.config)?, &sel)?)?;
        }
        Command::Continue(w) => {
            let sel = LambdaSelection::parse(&w.lambda0)?;
            let run = pipeline::run_continuation(&ProblemConfig::load(&w.common.config)?, &sel)?;
            emit(&w.common.out, &run.artifacts)?;
            for (i, b) in run.branches.iter().enumerate() {
                let c = equibif::continuation::classify_branch(b);
                println!(
                    "branch {i:03}: λ0 = {} ({}), {} points, {:?} → {:?}",
                    b.origin.lambda0.label(),
                    b.origin.label,
                    b.points.len(),
                    c.termination,
                    c.alternative
                );
            }
        }
        Command::Diagram { out } => emit(out, &pipeline::diagram_from_dir(out)?)?,
        Command::Verify { level, out } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let results = verify::run(level);
            for r in &results {
                println!("{} {:<18} {:>8.2}s  {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.seconds, r.detail);
            }
            if let Some(out) = out {
                let json = serde_json::to_string_pretty(&verify::summary_json(level, &results)).expect("serializable");
                emit(out, &[Artifact { name: "verify.json".into(), contents: json + "\n" }])?;
            }
            return Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn out_dir(command: &Command) -> Option<&Path> {
    match command {
        Command::Spectrum(c) | Command::Analyze(c) | Command::Candidates(c) => Some(&c.out),
        Command::Euler(w) | Command::Continue(w) => Some(&w.common.out),
        Command::Diagram { .. } | Command::Verify { .. } => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli.command));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            let detail = pipeline::error_json(&e);
            let text = serde_json::to_string_pretty(&detail).expect("serializable");
            eprintln!("{text}");
            if let Some(dir) = out_dir(&cli.command) {
                let _ = pipeline::write_artifacts(dir, &[Artifact { name: "error.json".into(), contents: text + "\n" }]);
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
