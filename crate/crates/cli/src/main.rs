use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;
use sketchls_cli::check::{check, CheckRequest};
use sketchls_cli::config::{DRule, ExperimentConfig};
use sketchls_cli::{emit_figure_data, exit, run_experiment, sweep_d, CliError, MatrixSource};
use sketchls_core::{Band, SketchKind, StopMode};

#[derive(Parser)]
#[command(name = "sketchls", version, about = "Sketch-and-solve least-squares experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (matrix, kind, d, seed) in a config.
    Run {
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Quartiles of distortion and plateau ratio across sketch sizes.
    SweepD {
        #[command(flatten)]
        batch: BatchArgs,
        /// Comma-separated sizes, e.g. `1.2n,2.4n`.
        #[arg(long, value_delimiter = ',', required = true)]
        d_list: Vec<String>,
    },
    /// Bound reports for one sketched instance, as CSV on stdout.
    Check {
        /// Matrix Market file or `synthetic:MxN[:cond=C][:seed=S]`.
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value = "gaussian")]
        kind: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "2n")]
        d: String,
        #[arg(long, default_value_t = sketchls_core::matio::DEFAULT_RESIDUAL_SCALE)]
        rho: f64,
    },
    /// Rebuild figure bundles from a trace directory.
    Figures {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated seeds, replacing those in the config.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Evaluate unsketched metrics every k iterations.
    #[arg(long)]
    stride: Option<usize>,
    /// Skip Gaussian payloads above 2e8 entries (the default).
    #[arg(long, conflicts_with = "no_skip_large")]
    skip_large: bool,
    #[arg(long)]
    no_skip_large: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    rho: Option<f64>,
    /// traditional, eps, stab-ne or stab-res.
    #[arg(long)]
    stop: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    band_lo: Option<f64>,
    #[arg(long)]
    band_hi: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

impl BatchArgs {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = ExperimentConfig::load(&self.config)?;
        if let Some(s) = &self.seeds {
            c.seeds = s.clone();
        }
        if let Some(s) = self.stride {
            c.stride = s;
        }
        if self.skip_large {
            c.skip_large = true;
        }
        if self.no_skip_large {
            c.skip_large = false;
        }
        if let Some(d) = &self.output_dir {
            c.output_dir = d.clone();
        }
        if let Some(r) = self.rho {
            c.rho = r;
        }
        if let Some(s) = &self.stop {
            c.stop.mode = Some(s.parse::<StopMode>().map_err(|e| CliError::config(e.to_string()))?);
        }
        if let Some(t) = self.tol {
            c.stop.tol = Some(t);
        }
        if let Some(w) = self.window {
            c.stop.window = w;
        }
        let Band { lo, hi } = c.stop.band;
        c.stop.band = Band {
            lo: self.band_lo.unwrap_or(lo),
            hi: self.band_hi.unwrap_or(hi),
        };
        if let Some(k) = self.max_iter {
            c.stop.max_iter = Some(k);
        }
        c.validate()?;
        Ok(c)
    }
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn fail(e: CliError) -> ExitCode {
    error!("{e}");
    eprintln!("error: {e}");
    match e {
        CliError::Config(_) => code(exit::CONFIG),
        _ => code(exit::RUN_ERROR),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { code(exit::CONFIG) } else { code(exit::OK) };
        }
    };
    match cli.command {
        Command::Run { batch } => {
            let cfg = match batch.config() {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match run_experiment(&cfg) {
                Ok(o) => {
                    println!(
                        "{} runs, {} errors, {} bound violations, {} skipped; output in {}",
                        o.cases,
                        o.errors,
                        o.violations,
                        o.skipped,
                        cfg.output_dir.display()
                    );
                    code(o.exit_code())
                }
                Err(e) => fail(e),
            }
        }
        Command::SweepD { batch, d_list } => {
            let mut cfg = match batch.config() {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let rules: Result<Vec<DRule>, _> = d_list.iter().map(|s| s.parse()).collect();
            cfg.d_rules = match rules {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            if let Err(e) = cfg.validate() {
                return fail(e);
            }
            match sweep_d(&cfg) {
                Ok(o) => {
                    println!(
                        "{} runs, {} errors; wrote {}",
                        o.cases,
                        o.errors,
                        cfg.output_dir.join("sweep.csv").display()
                    );
                    code(o.exit_code())
                }
                Err(e) => fail(e),
            }
        }
        Command::Check {
            matrix,
            kind,
            seed,
            d,
            rho,
        } => {
            let req = (|| {
                Ok::<_, CliError>(CheckRequest {
                    matrix: matrix.parse::<MatrixSource>()?,
                    kind: kind.parse::<SketchKind>().map_err(|e| CliError::config(e.to_string()))?,
                    seed,
                    d: d.parse()?,
                    rho,
                })
            })();
            let req = match req {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            match check(&req, std::io::stdout().lock()) {
                Ok(reports) if reports.iter().any(|r| r.violated()) => code(exit::BOUND_FAILED),
                Ok(_) => code(exit::OK),
                Err(e) => fail(e),
            }
        }
        Command::Figures { traces, out } => match emit_figure_data(&traces, &out) {
            Ok(paths) => {
                println!("wrote {} bundles to {}", paths.len(), out.display());
                code(exit::OK)
            }
            Err(e) => fail(e),
        },
    }
}
