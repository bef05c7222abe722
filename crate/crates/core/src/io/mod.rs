//! Configuration, execution and file outputs.

pub mod config;
pub mod svg;
pub mod trajfile;

use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{classify, ClassifierThresholds, Diagnostics, PatternKind, PatternLabel};
use crate::dynamics;
use crate::error::{Error, Result};
use crate::hardware::{run_hardware, HardwareConfig};
use crate::scenario::RoleParams;
use crate::trajectory::{Mode, TrajectoryRecord};

pub use config::{parse_config, Config, RunConfig, SweepConfig};
pub use svg::{render_svg, render_svg_string, RenderMode, RenderOptions};
pub use trajfile::{read_trajectory, write_trajectory};

/// Classification report written next to each trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub params: Option<RoleParams>,
    pub samples: usize,
    pub span: f64,
    pub label: PatternKind,
    pub diagnostics: Diagnostics,
}

impl Report {
    pub fn new(traj: &TrajectoryRecord, label: &PatternLabel) -> Self {
        Self {
            scenario: traj.meta.scenario.clone(),
            mode: traj.meta.mode,
            seed: traj.meta.seed,
            params: traj.meta.params,
            samples: traj.samples().len(),
            span: traj.span(),
            label: label.kind,
            diagnostics: label.diagnostics,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

/// Integrates the configured run in memory.
pub fn simulate(cfg: &RunConfig) -> Result<TrajectoryRecord> {
    let spec = cfg.scenario_spec()?;
    let mut traj = match cfg.mode {
        Mode::Ideal => dynamics::run(&spec.initial, &spec.matrix, &cfg.integrator, cfg.duration, cfg.sample_every)?,
        Mode::Hardware => {
            let hw = HardwareConfig {
                seed: cfg.seed,
                ..cfg.hardware
            };
            run_hardware(&spec, &hw, &cfg.integrator, cfg.duration, cfg.sample_every)?
        }
    };
    traj.meta.scenario = spec.name;
    traj.meta.params = spec.params;
    traj.meta.seed = Some(cfg.seed);
    traj.meta.red_index = spec.red_index;
    Ok(traj)
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub trajectory: TrajectoryRecord,
    pub label: PatternLabel,
    pub trajectory_path: PathBuf,
    pub report_path: PathBuf,
    pub render_path: Option<PathBuf>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs, classifies and writes the trajectory, report and optional render
/// into `out_dir` (the configured output directory when `None`).
pub fn execute_run(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<RunArtifacts> {
    let dir = out_dir.map_or_else(|| cfg.output.dir.clone(), Path::to_path_buf);
    let trajectory = simulate(cfg)?;
    let label = classify(&trajectory, &cfg.analysis)?;
    ensure_dir(&dir)?;
    let trajectory_path = dir.join(&cfg.output.trajectory);
    write_trajectory(&trajectory, &trajectory_path)?;
    let report_path = dir.join(&cfg.output.report);
    let report = Report::new(&trajectory, &label).to_toml();
    std::fs::write(&report_path, report).map_err(|e| Error::io(&report_path, e))?;
    let mode = match cfg.output.render {
        config::RenderKind::None => None,
        config::RenderKind::Snapshot => Some(RenderMode::Snapshot { time: None }),
        config::RenderKind::Filmstrip => Some(RenderMode::Filmstrip {
            panels: cfg.output.panels,
        }),
    };
    let render_path = match mode {
        Some(mode) => {
            let path = dir.join(&cfg.output.render_file);
            let opts = RenderOptions {
                mode,
                trails: cfg.output.trails,
                ..RenderOptions::default()
            };
            render_svg(&trajectory, &opts, &path)?;
            Some(path)
        }
        None => None,
    };
    Ok(RunArtifacts {
        trajectory,
        label,
        trajectory_path,
        report_path,
        render_path,
    })
}

/// Seed of sweep cell `index`, derived from the master seed only. Kept to
/// 63 bits so any cell can be replayed from a config file.
pub fn cell_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64 + 1);
    rng.next_u64() >> 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: usize,
    pub params: RoleParams,
    pub seed: u64,
    pub label: PatternLabel,
    pub note: Option<String>,
}

/// Grid cells in lexicographic order, the last axis varying fastest.
pub fn sweep_cells(cfg: &SweepConfig) -> Vec<RoleParams> {
    let base = cfg.base.role_params().expect("sweep base has role parameters");
    let mut cells = vec![base];
    for axis in &cfg.axes {
        cells = cells
            .iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = *p;
                    axis.param.set(&mut q, v);
                    q
                })
            })
            .collect();
    }
    cells
}

fn run_cell(cfg: &SweepConfig, cell: usize, params: RoleParams) -> SweepRow {
    let mut run = cfg.base.with_params(params);
    run.seed = cell_seed(cfg.base.seed, cell);
    let result = simulate(&run).and_then(|t| classify(&t, &ClassifierThresholds { ..run.analysis }));
    let (label, note) = match result {
        Ok(label) => (label, None),
        Err(e) => (
            PatternLabel {
                kind: PatternKind::Unresolved,
                diagnostics: Diagnostics::default(),
            },
            Some(e.to_string()),
        ),
    };
    SweepRow {
        cell,
        params,
        seed: run.seed,
        label,
        note,
    }
}

/// Classifies every grid cell. Row order does not depend on `cfg.jobs`.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let cells = sweep_cells(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::invalid("sweep.jobs", e.to_string()))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, p)| run_cell(cfg, i, *p))
            .collect()
    }))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn write_summary(rows: &[SweepRow], path: &Path) -> Result<()> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record([
        "cell",
        "k_p",
        "k_m",
        "k_a",
        "seed",
        "label",
        "terminal_speed",
        "com_speed",
        "shape_drift",
        "period",
        "period_cv",
        "note",
    ])
    .map_err(io)?;
    for r in rows {
        let d = &r.label.diagnostics;
        w.write_record([
            r.cell.to_string(),
            format!("{:?}", r.params.k_p),
            format!("{:?}", r.params.k_m),
            format!("{:?}", r.params.k_a),
            r.seed.to_string(),
            r.label.kind.to_string(),
            format!("{:?}", d.terminal_speed),
            format!("{:?}", d.com_speed),
            format!("{:?}", d.shape_drift),
            opt(d.period),
            opt(d.period_cv),
            r.note.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize)]
struct CellLabel<'a> {
    cell: usize,
    seed: u64,
    params: RoleParams,
    label: PatternKind,
    diagnostics: &'a Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

/// Runs the sweep and writes the summary table plus one label file per cell
/// under `out_dir/cells/`. Returns the summary path.
pub fn run_sweep(cfg: &SweepConfig, out_dir: &Path) -> Result<(Vec<SweepRow>, PathBuf)> {
    let rows = sweep_rows(cfg)?;
    let cells_dir = out_dir.join("cells");
    ensure_dir(&cells_dir)?;
    for r in &rows {
        let label = CellLabel {
            cell: r.cell,
            seed: r.seed,
            params: r.params,
            label: r.label.kind,
            diagnostics: &r.label.diagnostics,
            note: r.note.as_deref(),
        };
        let path = cells_dir.join(format!("cell_{:04}.toml", r.cell));
        let text = toml::to_string(&label).expect("cell label serializes");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    let path = out_dir.join(&cfg.summary);
    write_summary(&rows, &path)?;
    Ok((rows, path))
}
