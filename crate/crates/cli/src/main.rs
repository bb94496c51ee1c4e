//! `hermitana` command-line tool.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hermitana::Frame;

use crate::config::{merge_file, Flags};

#[derive(Parser, Debug)]
#[command(name = "hermitana", version, about = "Gauge geometry and holonomy of quasi-Hermitian systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// Built-in model: example1, example2, example3 or random.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Field strength of example1.
    #[arg(long = "B", global = true)]
    b: Option<f64>,
    /// Gain/loss rate of example1.
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Metric mixing angle of example2.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Seed for randomized sweeps and the random model.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file whose top-level keys override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the per-step or per-point series here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Finite-difference step.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Path resolution.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Record wall time in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Args, Debug, Default)]
struct LoopArgs {
    #[arg(long = "loop", value_enum)]
    loop_kind: Option<LoopKind>,
    /// Radius coordinate `R` held fixed on the loop.
    #[arg(long = "R")]
    big_r: Option<f64>,
    /// Radius coordinate `r` held fixed on the loop.
    #[arg(long = "r")]
    small_r: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum LoopKind {
    CircleTheta,
    CirclePhi,
    Rect,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FrameArg {
    Quasi,
    Hermitian,
}

#[derive(Args, Debug)]
struct AxesArgs {
    #[arg(long, default_value_t = 0)]
    mu: usize,
    #[arg(long, default_value_t = 1)]
    nu: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grid curvature scan plus loop holonomy, with an obstruction verdict.
    Analyze {
        #[command(flatten)]
        lp: LoopArgs,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Wilson loop of the metric connection.
    Wilson {
        #[command(flatten)]
        lp: LoopArgs,
    },
    /// Berry phase of one band around a loop.
    Berry {
        #[command(flatten)]
        lp: LoopArgs,
        #[arg(long, value_enum, default_value = "quasi")]
        frame: FrameArg,
        #[arg(long, default_value_t = 0)]
        band: usize,
    },
    /// Grid sweep of F^G, F^K and the curvature difference.
    Curvature {
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 0)]
        band: usize,
        #[command(flatten)]
        axes: AxesArgs,
    },
    /// Proper-frame diagnostics along a path, with the mapped Hamiltonian.
    Frame {
        #[command(flatten)]
        lp: LoopArgs,
    },
    /// Modified Schrödinger evolution along a schedule.
    Evolve {
        #[command(flatten)]
        lp: LoopArgs,
        /// Total time.
        #[arg(long = "T")]
        total_time: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Drop the metric correction (non-physical comparison run).
        #[arg(long)]
        naive: bool,
    },
    /// Curvature identity residuals at random points.
    Identities {
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        axes: AxesArgs,
    },
    /// Runs every acceptance check and prints a pass/fail table.
    ReproducePaper,
}

impl Cli {
    fn flags(&self) -> Flags {
        let g = &self.global;
        let mut f = Flags {
            model: g.model.clone(),
            b: g.b,
            gamma: g.gamma,
            alpha: g.alpha,
            seed: g.seed,
            steps: g.steps,
            h: g.h,
            tol: g.tol,
            ..Default::default()
        };
        let set_loop = |f: &mut Flags, lp: &LoopArgs| {
            f.loop_kind = lp.loop_kind.map(|k| {
                match k {
                    LoopKind::CircleTheta => "circle_theta",
                    LoopKind::CirclePhi => "circle_phi",
                    LoopKind::Rect => "rect",
                }
                .to_string()
            });
            f.big_r = lp.big_r;
            f.small_r = lp.small_r;
        };
        match &self.command {
            Command::Analyze { lp, grid } => {
                set_loop(&mut f, lp);
                f.grid = *grid;
            }
            Command::Wilson { lp } | Command::Frame { lp } => set_loop(&mut f, lp),
            Command::Berry { lp, frame, band } => {
                set_loop(&mut f, lp);
                f.frame = Some(match frame {
                    FrameArg::Quasi => Frame::Quasi,
                    FrameArg::Hermitian => Frame::Hermitian,
                });
                f.band = Some(*band);
            }
            Command::Curvature { grid, band, axes } => {
                f.grid = *grid;
                f.band = Some(*band);
                f.axes = Some([axes.mu, axes.nu]);
            }
            Command::Evolve { lp, total_time, dt, naive } => {
                set_loop(&mut f, lp);
                f.total_time = *total_time;
                f.dt = *dt;
                f.naive = *naive;
            }
            Command::Identities { points, axes } => {
                f.points = *points;
                f.axes = Some([axes.mu, axes.nu]);
            }
            Command::ReproducePaper => {}
        }
        f
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("HERMITANA_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("HERMITANA_THREADS must be a positive integer, got {v:?}"))?;
        anyhow::ensure!(n > 0, "HERMITANA_THREADS must be a positive integer, got 0");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    init_threads()?;
    let mut cfg = cli.flags().to_config()?;
    if let Some(file) = &cli.global.config {
        cfg = merge_file(&cfg, file)?;
    }
    cfg.validate()?;
    // The echo keeps only the sections the command reads.
    match cli.command {
        Command::Evolve { .. } => cfg.path = None,
        Command::Curvature { .. } | Command::Identities { .. } | Command::ReproducePaper => {
            cfg.path = None;
            cfg.schedule = None;
        }
        _ => cfg.schedule = None,
    }
    let started = Instant::now();
    let mut out = match cli.command {
        Command::Analyze { .. } => commands::analyze(&cfg)?,
        Command::Wilson { .. } => commands::wilson(&cfg)?,
        Command::Berry { .. } => commands::berry(&cfg)?,
        Command::Curvature { .. } => commands::curvature(&cfg)?,
        Command::Frame { .. } => commands::frame(&cfg)?,
        Command::Evolve { .. } => commands::evolve(&cfg)?,
        Command::Identities { .. } => commands::identities(&cfg)?,
        Command::ReproducePaper => commands::reproduce(&cfg)?,
    };
    if cli.global.timing {
        out.report.wall_time_s = Some(started.elapsed().as_secs_f64());
    }
    out.report.write(cli.global.out.as_deref())?;
    if let Some(path) = &cli.global.csv {
        match &out.series {
            Some(s) => s.write(path)?,
            None => eprintln!("note: {} produces no series; --csv ignored", out.report.command),
        }
    }
    Ok(out.finding)
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 is reserved for findings.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
