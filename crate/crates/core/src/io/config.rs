//! Run and sweep configuration documents (TOML).
//!
//! Unknown keys are errors. Everything a run would reject is rejected here,
//! so a config that parses will execute.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::ClassifierThresholds;
use crate::dynamics::{IntegratorConfig, SwarmState};
use crate::error::{Error, Result};
use crate::hardware::{role_params_of, HardwareConfig};
use crate::scenario::{
    build_general_matrix, lookup, perturb, InitialKind, PreferenceMatrix, RoleParams, ScenarioSpec, DEFAULT_PERTURBATION,
    DEFAULT_RADIUS,
};
use crate::trajectory::Mode;
use crate::vec2::Vec2;

pub const DEFAULT_DURATION: f64 = 200.0;
pub const DEFAULT_SAMPLE_EVERY: usize = 10;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: Option<String>,
    radius: Option<f64>,
    perturbation: Option<f64>,
    positions: Option<Vec<[f64; 2]>>,
    red_index: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    name: String,
    min: Option<f64>,
    max: Option<f64>,
    steps: Option<usize>,
    values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(default)]
    axes: Vec<RawAxis>,
    jobs: Option<usize>,
    summary: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    params: Option<RoleParams>,
    matrix: Option<Vec<Vec<f64>>>,
    initial: Option<RawInitial>,
    mode: Option<Mode>,
    duration: Option<f64>,
    sample_every: Option<usize>,
    seed: Option<u64>,
    integrator: Option<IntegratorConfig>,
    hardware: Option<HardwareConfig>,
    analysis: Option<ClassifierThresholds>,
    output: Option<OutputConfig>,
    sweep: Option<RawSweep>,
}

/// Where the run's couplings come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Named(String),
    Params(RoleParams),
    Matrix(PreferenceMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialLayout {
    Builder(InitialKind),
    Explicit(Vec<Vec2>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub layout: InitialLayout,
    pub radius: f64,
    pub perturbation: f64,
    pub red_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderKind {
    #[default]
    None,
    Snapshot,
    Filmstrip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub trajectory: String,
    pub report: String,
    pub render: RenderKind,
    pub render_file: String,
    pub panels: usize,
    pub trails: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            trajectory: "trajectory.csv".into(),
            report: "report.toml".into(),
            render: RenderKind::None,
            render_file: "render.svg".into(),
            panels: 6,
            trails: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioSource,
    pub initial: InitialSpec,
    pub mode: Mode,
    pub integrator: IntegratorConfig,
    pub hardware: HardwareConfig,
    pub analysis: ClassifierThresholds,
    pub duration: f64,
    pub sample_every: usize,
    pub seed: u64,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    KP,
    KM,
    KA,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::KP => "k_p",
            SweepParam::KM => "k_m",
            SweepParam::KA => "k_a",
        }
    }

    pub fn set(self, p: &mut RoleParams, v: f64) {
        match self {
            SweepParam::KP => p.k_p = v,
            SweepParam::KM => p.k_m = v,
            SweepParam::KA => p.k_a = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Per-cell template; its parameters supply the non-swept values.
    pub base: RunConfig,
    pub axes: Vec<SweepAxis>,
    pub jobs: usize,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Run(RunConfig),
    Sweep(SweepConfig),
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn de_error(text: &str, e: toml::de::Error) -> Error {
    Error::Config {
        message: e.message().to_string(),
        line: e.span().map(|s| line_of(text, s.start)),
    }
}

/// Parses a TOML document into a table.
pub fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| de_error(text, e))
}

/// Sets a dotted `key` in `doc`, creating intermediate tables. `value` is
/// read as a TOML value, falling back to a bare string.
pub fn apply_override(doc: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::config(format!("bad override key `{key}`")))?;
    let mut table = doc;
    for part in parts {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("override `{key}`: `{part}` is not a table")))?;
    }
    table.insert(last.to_string(), parsed);
    Ok(())
}

pub fn parse_config(text: &str) -> Result<Config> {
    let table = parse_table(text)?;
    config_from_table(table, text)
}

/// Validates an already-parsed (and possibly overridden) document.
pub fn config_from_table(table: toml::Table, text: &str) -> Result<Config> {
    // Spans are lost once the document is a `Value`; re-reading the source
    // text recovers the line when the fault is in the file itself.
    let raw: RawConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| {
        match toml::from_str::<RawConfig>(text) {
            Err(spanned) if spanned.span().is_some() => de_error(text, spanned),
            _ => de_error(text, e),
        }
    })?;
    let sweep = raw.sweep.clone();
    let run = build_run(raw)?;
    match sweep {
        None => Ok(Config::Run(run)),
        Some(s) => build_sweep(run, s).map(Config::Sweep),
    }
}

fn build_run(raw: RawConfig) -> Result<RunConfig> {
    let sources = [raw.scenario.is_some(), raw.params.is_some(), raw.matrix.is_some()];
    match sources.iter().filter(|&&b| b).count() {
        0 => return Err(Error::config("scenario required: set `scenario`, `[params]` or `matrix`")),
        1 => {}
        _ => return Err(Error::config("exactly one of `scenario`, `[params]`, `matrix` may be given")),
    }
    let scenario = if let Some(name) = raw.scenario {
        if lookup(&name).is_none() {
            return Err(Error::invalid("scenario", format!("unknown scenario `{name}` (known: fig6, fig7, fig8)")));
        }
        ScenarioSource::Named(name)
    } else if let Some(p) = raw.params {
        p.validate().map_err(|e| prefix(e, "params"))?;
        ScenarioSource::Params(p)
    } else {
        let rows = raw.matrix.unwrap_or_default();
        ScenarioSource::Matrix(build_general_matrix(&rows)?)
    };

    let ri = raw.initial.unwrap_or_default();
    let default_kind = match &scenario {
        ScenarioSource::Named(n) => lookup(n).map_or(InitialKind::Polygon, |s| s.initial),
        _ => InitialKind::Polygon,
    };
    let layout = match (ri.kind.as_deref(), ri.positions) {
        (Some("explicit") | None, Some(p)) => InitialLayout::Explicit(p.into_iter().map(|[x, y]| Vec2::new(x, y)).collect()),
        (Some("explicit"), None) => return Err(Error::invalid("initial.positions", "required when kind = \"explicit\"")),
        (None, None) => InitialLayout::Builder(default_kind),
        (Some("polygon"), None) => InitialLayout::Builder(InitialKind::Polygon),
        (Some("surrounded"), None) => InitialLayout::Builder(InitialKind::Surrounded),
        (Some(k @ ("polygon" | "surrounded")), Some(_)) => {
            return Err(Error::invalid("initial.positions", format!("not allowed with kind = \"{k}\"")))
        }
        (Some(other), _) => {
            return Err(Error::invalid("initial.kind", format!("`{other}` is not one of polygon, surrounded, explicit")))
        }
    };
    // explicit positions are taken as given unless jitter is asked for
    let default_jitter = match layout {
        InitialLayout::Explicit(_) => 0.0,
        InitialLayout::Builder(_) => DEFAULT_PERTURBATION,
    };
    let initial = InitialSpec {
        layout,
        radius: ri.radius.unwrap_or(DEFAULT_RADIUS),
        perturbation: ri.perturbation.unwrap_or(default_jitter),
        red_index: ri.red_index.unwrap_or(0),
    };

    let integrator = raw.integrator.unwrap_or_default();
    integrator.validate()?;
    let hardware = raw.hardware.unwrap_or_default();
    hardware.validate()?;
    let analysis = raw.analysis.unwrap_or_default();
    analysis.validate()?;
    let duration = raw.duration.unwrap_or(DEFAULT_DURATION);
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", format!("must be positive, got {duration}")));
    }
    let sample_every = raw.sample_every.unwrap_or(DEFAULT_SAMPLE_EVERY);
    if sample_every == 0 {
        return Err(Error::invalid("sample_every", "must be >= 1"));
    }
    let output = raw.output.unwrap_or_default();
    if output.panels == 0 {
        return Err(Error::invalid("output.panels", "must be >= 1"));
    }
    for (key, name) in [
        ("output.trajectory", &output.trajectory),
        ("output.report", &output.report),
        ("output.render_file", &output.render_file),
    ] {
        if name.is_empty() {
            return Err(Error::invalid(key, "file name must not be empty"));
        }
    }

    let cfg = RunConfig {
        scenario,
        initial,
        mode: raw.mode.unwrap_or_default(),
        integrator,
        hardware,
        analysis,
        duration,
        sample_every,
        seed: raw.seed.unwrap_or(0),
        output,
    };
    // build once so construction errors surface now
    let spec = cfg.scenario_spec()?;
    if cfg.mode == Mode::Hardware && spec.params.is_none() {
        role_params_of(&spec.matrix, spec.red_index)?;
    }
    Ok(cfg)
}

fn prefix(e: Error, section: &str) -> Error {
    match e {
        Error::Invalid { name, reason } => Error::Invalid {
            name: format!("{section}.{name}"),
            reason,
        },
        other => other,
    }
}

fn build_sweep(base: RunConfig, raw: RawSweep) -> Result<SweepConfig> {
    if matches!(base.scenario, ScenarioSource::Matrix(_)) {
        return Err(Error::invalid("sweep", "sweeps need `scenario` or `[params]`, not a raw matrix"));
    }
    if raw.axes.is_empty() || raw.axes.len() > 3 {
        return Err(Error::invalid("sweep.axes", format!("need 1 to 3 axes, got {}", raw.axes.len())));
    }
    let mut axes: Vec<SweepAxis> = Vec::new();
    for (i, a) in raw.axes.into_iter().enumerate() {
        let key = format!("sweep.axes[{i}]");
        let param = match a.name.as_str() {
            "k_p" => SweepParam::KP,
            "k_m" => SweepParam::KM,
            "k_a" => SweepParam::KA,
            other => return Err(Error::invalid(format!("{key}.name"), format!("`{other}` is not one of k_p, k_m, k_a"))),
        };
        if axes.iter().any(|x| x.param == param) {
            return Err(Error::invalid(format!("{key}.name"), format!("`{}` swept twice", a.name)));
        }
        let values = match (a.values, a.min, a.max, a.steps) {
            (Some(v), None, None, None) => {
                if v.is_empty() {
                    return Err(Error::invalid(format!("{key}.values"), "must not be empty"));
                }
                v
            }
            (None, Some(min), Some(max), Some(steps)) => linspace(min, max, steps, &key)?,
            _ => {
                return Err(Error::invalid(
                    key,
                    "give either `values` or all of `min`, `max`, `steps`",
                ))
            }
        };
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("{key}.values"), format!("{v} is not finite")));
        }
        axes.push(SweepAxis { param, values });
    }
    let jobs = raw.jobs.unwrap_or(1);
    if jobs == 0 {
        return Err(Error::invalid("sweep.jobs", "must be >= 1"));
    }
    let summary = raw.summary.unwrap_or_else(|| "summary.csv".into());
    if summary.is_empty() {
        return Err(Error::invalid("sweep.summary", "file name must not be empty"));
    }
    Ok(SweepConfig { base, axes, jobs, summary })
}

fn linspace(min: f64, max: f64, steps: usize, key: &str) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::invalid(key, "range must be finite"));
    }
    match steps {
        0 => Err(Error::invalid(format!("{key}.steps"), "must be >= 1")),
        1 if min == max => Ok(vec![min]),
        1 => Err(Error::invalid(format!("{key}.steps"), "a single step needs min == max")),
        _ => {
            if max < min {
                return Err(Error::invalid(key, "max must be >= min"));
            }
            Ok((0..steps)
                .map(|i| {
                    if i == steps - 1 {
                        max
                    } else {
                        min + (max - min) * i as f64 / (steps - 1) as f64
                    }
                })
                .collect())
        }
    }
}

impl RunConfig {
    /// Config for a named scenario with every default.
    pub fn named(name: &str) -> Result<Self> {
        match parse_config(&format!("scenario = \"{name}\""))? {
            Config::Run(r) => Ok(r),
            Config::Sweep(_) => unreachable!(),
        }
    }

    pub fn role_params(&self) -> Option<RoleParams> {
        match &self.scenario {
            ScenarioSource::Named(n) => lookup(n).map(|s| s.params),
            ScenarioSource::Params(p) => Some(*p),
            ScenarioSource::Matrix(_) => None,
        }
    }

    pub fn scenario_name(&self) -> String {
        match &self.scenario {
            ScenarioSource::Named(n) => n.clone(),
            ScenarioSource::Params(_) => "params".into(),
            ScenarioSource::Matrix(_) => "matrix".into(),
        }
    }

    /// Same run with the couplings replaced by `params`; the layout is kept.
    pub fn with_params(&self, params: RoleParams) -> Self {
        let mut out = self.clone();
        out.scenario = ScenarioSource::Params(params);
        out
    }

    pub fn scenario_spec(&self) -> Result<ScenarioSpec> {
        let (matrix, params) = match &self.scenario {
            ScenarioSource::Matrix(m) => (m.clone(), None),
            _ => {
                let p = self.role_params().expect("named or parametric scenario");
                let n = match &self.initial.layout {
                    InitialLayout::Explicit(pos) => pos.len(),
                    InitialLayout::Builder(_) => 5,
                };
                (p.matrix(n, self.initial.red_index).map_err(|e| prefix(e, "initial"))?, Some(p))
            }
        };
        let n = matrix.n();
        let base = match &self.initial.layout {
            InitialLayout::Builder(kind) => kind
                .build(n, self.initial.radius, self.initial.red_index)
                .map_err(|e| prefix(e, "initial"))?,
            InitialLayout::Explicit(p) => SwarmState::new(p.clone(), 0.0).map_err(|e| prefix(e, "initial"))?,
        };
        let state = perturb(&base, self.initial.perturbation, self.seed).map_err(|e| prefix(e, "initial"))?;
        ScenarioSpec::new(self.scenario_name(), matrix, params, state, self.initial.red_index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> RunConfig {
        match parse_config(text).unwrap() {
            Config::Run(r) => r,
            Config::Sweep(_) => panic!("expected run config"),
        }
    }

    #[test]
    fn named_scenario_defaults() {
        let r = run("scenario = \"fig6\"\nduration = 200");
        assert_eq!(r.role_params(), Some(RoleParams::new(2.0, 0.5, 2.0)));
        assert_eq!(r.duration, 200.0);
        assert_eq!(r.mode, Mode::Ideal);
        assert_eq!(r.integrator, IntegratorConfig::default());
        assert_eq!(r.initial.layout, InitialLayout::Builder(InitialKind::Polygon));
        let r = run("scenario = \"fig8\"");
        assert_eq!(r.initial.layout, InitialLayout::Builder(InitialKind::Surrounded));
    }

    #[test]
    fn scenario_is_required() {
        let e = parse_config("").unwrap_err();
        assert!(e.to_string().contains("scenario required"), "{e}");
        assert!(parse_config("scenario = \"fig6\"\n[params]\nk_p = 1\nk_m = 0\nk_a = 1").is_err());
    }

    #[test]
    fn negative_dt_names_the_key() {
        let e = parse_config("scenario = \"fig6\"\n[integrator]\ndt = -0.1").unwrap_err();
        assert!(e.to_string().contains("integrator.dt"), "{e}");
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn unknown_keys_rejected_with_line() {
        let e = parse_config("scenario = \"fig6\"\n\n[integrator]\nstep = 0.1").unwrap_err();
        match e {
            Error::Config { line, message } => {
                assert!(message.contains("step"), "{message}");
                assert!(line.is_some());
            }
            other => panic!("{other}"),
        }
        let e = parse_config("scenario = \"fig6\"\ncolour = 1").unwrap_err();
        assert!(e.to_string().contains("colour"));
        let e = parse_config("scenario = \"fig6\"\nduration = = 2").unwrap_err();
        assert!(matches!(e, Error::Config { line: Some(2), .. }), "{e}");
    }

    #[test]
    fn downstream_rejections_are_front_loaded() {
        for bad in [
            "scenario = \"fig9\"",
            "scenario = \"fig6\"\nduration = 0",
            "scenario = \"fig6\"\nsample_every = 0",
            "scenario = \"fig6\"\n[initial]\nradius = -1",
            "scenario = \"fig6\"\n[initial]\nkind = \"surrounded\"\nred_index = 7",
            "scenario = \"fig6\"\n[hardware]\nc = 0",
            "scenario = \"fig6\"\n[hardware.sensors]\nhalf_angle = 1.0",
            "scenario = \"fig6\"\n[analysis]\ncv_max = 0",
            "matrix = [[0, 1], [1, 0], [1, 1]]",
            "matrix = [[0, 1, 2], [1, 0, 3], [1, 1, 0]]\nmode = \"hardware\"",
            "matrix = [[0, 1], [1, 0]]\n[initial]\nkind = \"explicit\"\npositions = [[0, 0], [0, 0]]",
            "[params]\nk_p = 1\nk_m = nan\nk_a = 1",
        ] {
            assert!(parse_config(bad).is_err(), "accepted: {bad}");
        }
    }

    #[test]
    fn matrix_and_explicit_positions() {
        let r = run("matrix = [[0, 3], [1, 0]]\n[initial]\npositions = [[0, 0], [1, 0]]\nperturbation = 0");
        let s = r.scenario_spec().unwrap();
        assert_eq!(s.initial.positions()[1], Vec2::new(1.0, 0.0));
        assert_eq!(s.matrix.get(0, 1), 3.0);
    }

    #[test]
    fn hardware_section() {
        let r = run("scenario = \"fig8\"\nmode = \"hardware\"\n[hardware]\nnoise_sigma = 0.01\n[hardware.sensors]\nrange = inf");
        assert_eq!(r.hardware.noise_sigma, 0.01);
        assert!(r.hardware.sensors.range.is_infinite());
        assert_eq!(r.hardware.sensors.n_sensors, 8);
    }

    #[test]
    fn sweep_axes() {
        let c = parse_config(
            "scenario = \"fig6\"\n[sweep]\njobs = 4\n[[sweep.axes]]\nname = \"k_m\"\nmin = -1.0\nmax = 2.4\nsteps = 5",
        )
        .unwrap();
        let Config::Sweep(s) = c else { panic!() };
        assert_eq!(s.jobs, 4);
        assert_eq!(s.axes[0].param, SweepParam::KM);
        assert_eq!(s.axes[0].values.len(), 5);
        assert_eq!(s.axes[0].values[4], 2.4);
        assert!((s.axes[0].values[1] - (-0.15)).abs() < 1e-12);

        for bad in [
            "scenario = \"fig6\"\n[sweep]\n",
            "scenario = \"fig6\"\n[[sweep.axes]]\nname = \"k_z\"\nvalues = [1]",
            "scenario = \"fig6\"\n[[sweep.axes]]\nname = \"k_m\"\nmin = 0\nmax = 1\nsteps = 1",
            "scenario = \"fig6\"\n[[sweep.axes]]\nname = \"k_m\"\nmin = 0\nmax = 1",
            "scenario = \"fig6\"\n[sweep]\njobs = 0\n[[sweep.axes]]\nname = \"k_m\"\nvalues = [1]",
            "matrix = [[0, 1], [1, 0]]\n[[sweep.axes]]\nname = \"k_m\"\nvalues = [1]",
        ] {
            assert!(parse_config(bad).is_err(), "accepted: {bad}");
        }
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut t = parse_table("scenario = \"fig6\"\nduration = 10\n[integrator]\ndt = 0.01").unwrap();
        apply_override(&mut t, "duration", "25").unwrap();
        apply_override(&mut t, "integrator.method", "euler").unwrap();
        apply_override(&mut t, "hardware.sensors.range", "2.5").unwrap();
        let Config::Run(r) = config_from_table(t, "").unwrap() else { panic!() };
        assert_eq!(r.duration, 25.0);
        assert_eq!(r.integrator.method, crate::dynamics::Method::Euler);
        assert_eq!(r.hardware.sensors.range, 2.5);
    }
}
