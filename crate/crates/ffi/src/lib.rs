//! C interface to the `nrswarm` simulator.
//!
//! Every fallible function returns an [`NrsStatus`]. On failure a message is
//! kept per thread and can be read with [`nrs_last_error`]. Configs and
//! trajectories are opaque handles owned by the caller, released with the
//! matching `_free` function. Panics never cross the boundary; they surface
//! as [`NrsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use nrswarm::analysis::{classify, ClassifierThresholds, PatternKind, PatternLabel};
use nrswarm::dynamics::{net_velocity, SwarmState};
use nrswarm::hardware::{motor_outputs, motor_to_velocity};
use nrswarm::io::{self, Config, RenderMode, RenderOptions, RunConfig};
use nrswarm::scenario::build_general_matrix;
use nrswarm::trajectory::TrajectoryRecord;
use nrswarm::{Error, ErrorKind, Vec2};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NrsStatus {
    Ok = 0,
    /// Bad input: malformed config, out-of-range parameter, wrong dimensions.
    Validation = 1,
    /// The simulation itself failed, e.g. two agents collapsed.
    Runtime = 2,
    Io = 3,
    NullPointer = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NrsPatternKind {
    Stationary = 0,
    Translational = 1,
    Oscillatory = 2,
    Irregular = 3,
    Unresolved = 4,
}

impl From<PatternKind> for NrsPatternKind {
    fn from(k: PatternKind) -> Self {
        match k {
            PatternKind::Stationary => Self::Stationary,
            PatternKind::Translational => Self::Translational,
            PatternKind::Oscillatory => Self::Oscillatory,
            PatternKind::Irregular => Self::Irregular,
            PatternKind::Unresolved => Self::Unresolved,
        }
    }
}

/// Classification result. `period` and `period_cv` are NaN when absent.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NrsLabel {
    pub kind: NrsPatternKind,
    pub terminal_speed: f64,
    pub com_speed: f64,
    pub shape_drift: f64,
    pub period: f64,
    pub period_cv: f64,
}

impl From<&PatternLabel> for NrsLabel {
    fn from(l: &PatternLabel) -> Self {
        let d = &l.diagnostics;
        Self {
            kind: l.kind.into(),
            terminal_speed: d.terminal_speed,
            com_speed: d.com_speed,
            shape_drift: d.shape_drift,
            period: d.period.unwrap_or(f64::NAN),
            period_cv: d.period_cv.unwrap_or(f64::NAN),
        }
    }
}

/// Classifier thresholds; fill with [`nrs_thresholds_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NrsThresholds {
    pub transient_fraction: f64,
    pub v_eps: f64,
    pub v_com_min: f64,
    pub s_eps: f64,
    pub cv_max: f64,
}

impl From<ClassifierThresholds> for NrsThresholds {
    fn from(t: ClassifierThresholds) -> Self {
        Self {
            transient_fraction: t.transient_fraction,
            v_eps: t.v_eps,
            v_com_min: t.v_com_min,
            s_eps: t.s_eps,
            cv_max: t.cv_max,
        }
    }
}

impl From<NrsThresholds> for ClassifierThresholds {
    fn from(t: NrsThresholds) -> Self {
        Self {
            transient_fraction: t.transient_fraction,
            v_eps: t.v_eps,
            v_com_min: t.v_com_min,
            s_eps: t.s_eps,
            cv_max: t.cv_max,
        }
    }
}

/// Parsed run configuration.
pub struct NrsConfig(RunConfig);

/// Recorded trajectory.
pub struct NrsTrajectory(TrajectoryRecord);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NrsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NrsStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            match e.kind() {
                ErrorKind::Validation => NrsStatus::Validation,
                ErrorKind::Runtime => NrsStatus::Runtime,
                ErrorKind::Io => NrsStatus::Io,
            }
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("`{name}` is null"));
            NrsStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            NrsStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn as_str<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::invalid(name, "not valid UTF-8").into())
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nrs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nrs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a TOML run configuration. Sweep documents are rejected; use
/// [`nrs_sweep_execute`] for those.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nrs_config_parse(text: *const c_char, out_cfg: *mut *mut NrsConfig) -> NrsStatus {
    guard(|| {
        let text = as_str(text, "text")?;
        let slot = out(out_cfg, "out")?;
        *slot = ptr::null_mut();
        match io::parse_config(text)? {
            Config::Run(cfg) => {
                *slot = Box::into_raw(Box::new(NrsConfig(cfg)));
                Ok(())
            }
            Config::Sweep(_) => Err(Error::config("document has a [sweep] section; use nrs_sweep_execute").into()),
        }
    })
}

/// # Safety
/// `cfg` must come from [`nrs_config_parse`] and not be freed twice. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn nrs_config_free(cfg: *mut NrsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the configured simulation in memory.
///
/// # Safety
/// `cfg` must be a live config handle and `out_traj` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nrs_simulate(cfg: *const NrsConfig, out_traj: *mut *mut NrsTrajectory) -> NrsStatus {
    guard(|| {
        let cfg = as_ref(cfg, "cfg")?;
        let slot = out(out_traj, "out")?;
        *slot = ptr::null_mut();
        let traj = io::simulate(&cfg.0)?;
        *slot = Box::into_raw(Box::new(NrsTrajectory(traj)));
        Ok(())
    })
}

/// Runs, classifies and writes the trajectory, report and optional render
/// into `out_dir`, or the config's own output directory when null.
///
/// # Safety
/// `cfg` must be a live handle; `out_dir` null or NUL-terminated; `label`
/// null or valid.
#[no_mangle]
pub unsafe extern "C" fn nrs_execute(cfg: *const NrsConfig, out_dir: *const c_char, label: *mut NrsLabel) -> NrsStatus {
    guard(|| {
        let cfg = as_ref(cfg, "cfg")?;
        let dir = if out_dir.is_null() {
            None
        } else {
            Some(PathBuf::from(as_str(out_dir, "out_dir")?))
        };
        let art = io::execute_run(&cfg.0, dir.as_deref())?;
        if let Some(l) = label.as_mut() {
            *l = (&art.label).into();
        }
        Ok(())
    })
}

/// Runs a sweep document and writes its summary table under `out_dir`.
///
/// # Safety
/// `text` and `out_dir` must be NUL-terminated; `n_cells` null or valid.
#[no_mangle]
pub unsafe extern "C" fn nrs_sweep_execute(text: *const c_char, out_dir: *const c_char, n_cells: *mut usize) -> NrsStatus {
    guard(|| {
        let text = as_str(text, "text")?;
        let dir = PathBuf::from(as_str(out_dir, "out_dir")?);
        let Config::Sweep(cfg) = io::parse_config(text)? else {
            return Err(Error::config("document has no [sweep] section").into());
        };
        let (rows, _) = io::run_sweep(&cfg, &dir)?;
        if let Some(n) = n_cells.as_mut() {
            *n = rows.len();
        }
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated and `out_traj` valid.
#[no_mangle]
pub unsafe extern "C" fn nrs_trajectory_read(path: *const c_char, out_traj: *mut *mut NrsTrajectory) -> NrsStatus {
    guard(|| {
        let path = as_str(path, "path")?;
        let slot = out(out_traj, "out")?;
        *slot = ptr::null_mut();
        let traj = io::read_trajectory(path.as_ref())?;
        *slot = Box::into_raw(Box::new(NrsTrajectory(traj)));
        Ok(())
    })
}

/// # Safety
/// `traj` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn nrs_trajectory_write(traj: *const NrsTrajectory, path: *const c_char) -> NrsStatus {
    guard(|| {
        let traj = as_ref(traj, "traj")?;
        let path = as_str(path, "path")?;
        io::write_trajectory(&traj.0, path.as_ref())?;
        Ok(())
    })
}

/// # Safety
/// `traj` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nrs_trajectory_free(traj: *mut NrsTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nrs_trajectory_len(traj: *const NrsTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.samples().len())
}

/// Number of agents, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nrs_trajectory_agents(traj: *const NrsTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.n_agents())
}

/// Index of the distinguished agent.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nrs_trajectory_red_index(traj: *const NrsTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.meta.red_index)
}

/// Copies sample `index` into `time` and `xy` (interleaved x, y; `xy_len`
/// must be at least twice the agent count).
///
/// # Safety
/// `traj` must be live; `time` valid; `xy` must point to `xy_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nrs_trajectory_sample(
    traj: *const NrsTrajectory,
    index: usize,
    time: *mut f64,
    xy: *mut f64,
    xy_len: usize,
) -> NrsStatus {
    guard(|| {
        let traj = as_ref(traj, "traj")?;
        let t = out(time, "time")?;
        if xy.is_null() {
            return Err(Fail::Null("xy"));
        }
        let sample = traj.0.samples().get(index).ok_or_else(|| {
            Error::invalid("index", format!("{index} out of range ({} samples)", traj.0.samples().len()))
        })?;
        let need = 2 * sample.positions.len();
        if xy_len < need {
            return Err(Error::Dimension {
                expected: need,
                found: xy_len,
            }
            .into());
        }
        let buf = std::slice::from_raw_parts_mut(xy, need);
        for (chunk, p) in buf.chunks_exact_mut(2).zip(&sample.positions) {
            chunk[0] = p.x;
            chunk[1] = p.y;
        }
        *t = sample.time;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn nrs_thresholds_default() -> NrsThresholds {
    ClassifierThresholds::default().into()
}

/// Classifies a trajectory. `thresholds` may be null for the defaults.
///
/// # Safety
/// `traj` must be live, `thresholds` null or valid, `label` valid.
#[no_mangle]
pub unsafe extern "C" fn nrs_classify(
    traj: *const NrsTrajectory,
    thresholds: *const NrsThresholds,
    label: *mut NrsLabel,
) -> NrsStatus {
    guard(|| {
        let traj = as_ref(traj, "traj")?;
        let slot = out(label, "label")?;
        let th = thresholds.as_ref().map_or_else(ClassifierThresholds::default, |t| (*t).into());
        *slot = (&classify(&traj.0, &th)?).into();
        Ok(())
    })
}

/// Writes an SVG render. `panels == 0` renders a snapshot of the last
/// sample, otherwise a filmstrip with that many panels.
///
/// # Safety
/// `traj` must be live and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn nrs_render_svg(
    traj: *const NrsTrajectory,
    path: *const c_char,
    panels: usize,
    trails: bool,
) -> NrsStatus {
    guard(|| {
        let traj = as_ref(traj, "traj")?;
        let path = as_str(path, "path")?;
        let mode = match panels {
            0 => RenderMode::Snapshot { time: None },
            n => RenderMode::Filmstrip { panels: n },
        };
        let opts = RenderOptions {
            mode,
            trails,
            ..RenderOptions::default()
        };
        io::render_svg(&traj.0, &opts, path.as_ref())?;
        Ok(())
    })
}

/// Wheel outputs for speed `v` along heading `theta`.
///
/// # Safety
/// `p` must point to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nrs_motor_outputs(v: f64, theta: f64, c: f64, p: *mut f64) -> NrsStatus {
    guard(|| {
        if p.is_null() {
            return Err(Fail::Null("p"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("c", format!("must be positive and finite, got {c}")).into());
        }
        let cmd = motor_outputs(v, theta, c);
        std::slice::from_raw_parts_mut(p, 3).copy_from_slice(&cmd.p);
        Ok(())
    })
}

/// Inverse of [`nrs_motor_outputs`].
///
/// # Safety
/// `p` must point to 3 doubles; `v` and `theta` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nrs_motor_to_velocity(p: *const f64, c: f64, v: *mut f64, theta: *mut f64) -> NrsStatus {
    guard(|| {
        if p.is_null() {
            return Err(Fail::Null("p"));
        }
        let v = out(v, "v")?;
        let theta = out(theta, "theta")?;
        let mut cmd = nrswarm::hardware::MotorCommand::default();
        cmd.p.copy_from_slice(std::slice::from_raw_parts(p, 3));
        (*v, *theta) = motor_to_velocity(&cmd, c)?;
        Ok(())
    })
}

/// Velocity of every agent under preference matrix `k` (row-major `n × n`).
/// `xy` holds `n` interleaved positions; `out_xy` receives `n` velocities.
///
/// # Safety
/// `xy` and `out_xy` must hold `2n` doubles, `k` must hold `n²`.
#[no_mangle]
pub unsafe extern "C" fn nrs_net_velocity(
    xy: *const f64,
    n: usize,
    k: *const f64,
    min_separation: f64,
    out_xy: *mut f64,
) -> NrsStatus {
    guard(|| {
        if xy.is_null() {
            return Err(Fail::Null("xy"));
        }
        if k.is_null() {
            return Err(Fail::Null("k"));
        }
        if out_xy.is_null() {
            return Err(Fail::Null("out_xy"));
        }
        let pos: Vec<Vec2> = std::slice::from_raw_parts(xy, 2 * n)
            .chunks_exact(2)
            .map(|c| Vec2::new(c[0], c[1]))
            .collect();
        let rows: Vec<Vec<f64>> = std::slice::from_raw_parts(k, n * n).chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let matrix = build_general_matrix(&rows)?;
        let state = SwarmState::new(pos, 0.0)?;
        let vel = net_velocity(&state, &matrix, min_separation)?;
        let dst = std::slice::from_raw_parts_mut(out_xy, 2 * n);
        for (chunk, v) in dst.chunks_exact_mut(2).zip(vel) {
            chunk[0] = v.x;
            chunk[1] = v.y;
        }
        Ok(())
    })
}
