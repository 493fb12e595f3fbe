use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reslab::experiment::{self, ExperimentConfig};
use reslab::Error;

#[derive(Parser)]
#[command(name = "reslab", version, about = "Train, certify and analyze deep residual networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for depth sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train every depth of the sweep and write run logs and weights.
    Train(Common),
    /// Check assumptions and certify every bound, optionally on a saved run.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        run: Option<PathBuf>,
    },
    /// Scaling fits, steps-to-epsilon tables and path diagnostics of a saved run.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        run: PathBuf,
    },
    /// Compare analytic gradients with central finite differences.
    Gradcheck(Common),
    /// Generate and save the dataset.
    Dataset(Common),
}

fn load(c: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.threads == Some(0) {
        return Err(Error::InvalidInput("--threads must be at least 1".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Train(c) => {
            let cfg = load(&c)?;
            let s = experiment::cmd_train(&cfg, c.threads)?;
            for (l, loss) in s.depths.iter().zip(&s.final_loss) {
                println!("L={l} final_loss={loss:.6e}");
            }
            Ok(0)
        }
        Command::Certify { common, run } => {
            let cfg = load(&common)?;
            let out = experiment::cmd_certify(&cfg, run.as_deref(), common.threads)?;
            for r in out.reports.iter().filter(|r| r.is_failure()) {
                println!("FAIL {} observed={:e} bound={:e}", r.name, r.observed, r.bound);
            }
            println!("{} reports, {} failures", out.reports.len(), out.failures);
            Ok(if out.failures > 0 { 1 } else { 0 })
        }
        Command::Analyze { common, run } => {
            let cfg = load(&common)?;
            let s = experiment::cmd_analyze(&cfg, &run)?;
            for (name, fit) in &s.fits {
                match fit {
                    Some(f) => println!("{name}: exponent={:.4} r2={:.4}", f.exponent, f.r_squared),
                    None => println!("{name}: no fit"),
                }
            }
            if let Some(t) = s.total_scaling {
                println!("total_scaling={t:.4}");
            }
            Ok(0)
        }
        Command::Gradcheck(c) => {
            let cfg = load(&c)?;
            let rows = experiment::cmd_gradcheck(&cfg, c.threads)?;
            for r in &rows {
                println!("L={} max_rel={:.3e} max_abs={:.3e} pass={}", r.depth, r.max_rel_error, r.max_abs_error, r.pass);
            }
            Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
        }
        Command::Dataset(c) => {
            let cfg = load(&c)?;
            for p in experiment::cmd_dataset(&cfg)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Overflow { .. } => 3,
                _ => 2,
            })
        }
    }
}
