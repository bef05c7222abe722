use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nrswarm::analysis::{classify, ClassifierThresholds};
use nrswarm::io::config::{apply_override, config_from_table, parse_table};
use nrswarm::io::{execute_run, read_trajectory, render_svg, run_sweep, Config, RenderMode, RenderOptions, Report};
use nrswarm::{Error, Result};

// Write errors (a closed pipe, say) are not worth a panic.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "nrswarm", version, about = "Non-reciprocal swarm simulator and regime classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Override any config key, e.g. `--set integrator.dt=0.005`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    sample_every: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderArg {
    Snapshot,
    Filmstrip,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured simulation and write trajectory, report and renders.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a parameter sweep and write the summary table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Classify an existing trajectory file and print the report.
    Classify {
        #[arg(long)]
        traj: PathBuf,
        /// Config whose [analysis] section supplies the thresholds.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render a trajectory file as SVG.
    Render {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long, value_enum)]
        mode: RenderArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 6)]
        panels: usize,
        /// Snapshot time (defaults to the last sample).
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        no_trails: bool,
    },
}

fn load_config(path: &Path, overrides: &Overrides, extra: &[(&str, String)]) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table = parse_table(&text)?;
    let quoted = |s: &str| format!("\"{s}\"");
    let named = [
        ("scenario", overrides.scenario.as_deref().map(quoted)),
        ("mode", overrides.mode.as_deref().map(quoted)),
        ("duration", overrides.duration.map(|v| format!("{v:?}"))),
        ("seed", overrides.seed.map(|v| v.to_string())),
        ("integrator.dt", overrides.dt.map(|v| format!("{v:?}"))),
        ("integrator.method", overrides.method.as_deref().map(quoted)),
        ("sample_every", overrides.sample_every.map(|v| v.to_string())),
    ];
    for (key, value) in named.iter().filter_map(|(k, v)| v.as_ref().map(|v| (*k, v.as_str()))) {
        apply_override(&mut table, key, value)?;
    }
    for (key, value) in extra {
        apply_override(&mut table, key, value)?;
    }
    for kv in &overrides.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        apply_override(&mut table, k.trim(), v.trim())?;
    }
    config_from_table(table, &text)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, overrides } => {
            let Config::Run(cfg) = load_config(&config, &overrides, &[])? else {
                return Err(Error::config("config contains [sweep]; use the `sweep` subcommand"));
            };
            let art = execute_run(&cfg, out.as_deref())?;
            say!("{}: {}", art.trajectory.meta.scenario, art.label.kind);
            say!("trajectory: {}", art.trajectory_path.display());
            say!("report: {}", art.report_path.display());
            if let Some(p) = art.render_path {
                say!("render: {}", p.display());
            }
        }
        Command::Sweep {
            config,
            out,
            jobs,
            overrides,
        } => {
            let extra: Vec<(&str, String)> = jobs.map(|j| ("sweep.jobs", j.to_string())).into_iter().collect();
            let Config::Sweep(cfg) = load_config(&config, &overrides, &extra)? else {
                return Err(Error::config("config has no [sweep] section; use the `simulate` subcommand"));
            };
            let (rows, path) = run_sweep(&cfg, &out)?;
            say!("{} cells -> {}", rows.len(), path.display());
        }
        Command::Classify { traj, config } => {
            let thresholds = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    match nrswarm::io::parse_config(&text)? {
                        Config::Run(c) => c.analysis,
                        Config::Sweep(s) => s.base.analysis,
                    }
                }
                None => ClassifierThresholds::default(),
            };
            let t = read_trajectory(&traj)?;
            let label = classify(&t, &thresholds)?;
            say!("{}", Report::new(&t, &label).to_toml().trim_end());
        }
        Command::Render {
            traj,
            mode,
            out,
            panels,
            time,
            no_trails,
        } => {
            let t = read_trajectory(&traj)?;
            let mode = match mode {
                RenderArg::Snapshot => RenderMode::Snapshot { time },
                RenderArg::Filmstrip => RenderMode::Filmstrip { panels },
            };
            let opts = RenderOptions {
                mode,
                trails: !no_trails,
                ..RenderOptions::default()
            };
            render_svg(&t, &opts, &out)?;
            say!("render: {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
