//! Trajectory metrics and regime classification.

mod period;
mod procrustes;

pub use period::{estimate_period, PeriodEstimate};
pub use procrustes::aligned_rms;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{Sample, TrajectoryRecord};
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternKind {
    Stationary,
    Translational,
    Oscillatory,
    Irregular,
    Unresolved,
}

impl std::fmt::Display for PatternKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for PatternKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Stationary" => Self::Stationary,
            "Translational" => Self::Translational,
            "Oscillatory" => Self::Oscillatory,
            "Irregular" => Self::Irregular,
            "Unresolved" => Self::Unresolved,
            _ => return Err(Error::invalid("label", format!("unknown pattern `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest agent speed seen in the analysis window.
    pub terminal_speed: f64,
    /// Net centroid displacement over the window divided by its duration.
    pub com_speed: f64,
    pub shape_drift: f64,
    pub period: Option<f64>,
    pub period_cv: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternLabel {
    pub kind: PatternKind,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierThresholds {
    /// Leading fraction of the run discarded as transient.
    pub transient_fraction: f64,
    pub v_eps: f64,
    pub v_com_min: f64,
    pub s_eps: f64,
    pub cv_max: f64,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        Self {
            transient_fraction: 0.5,
            v_eps: 1e-3,
            v_com_min: 1e-2,
            s_eps: 1e-2,
            cv_max: 0.2,
        }
    }
}

impl ClassifierThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(Error::invalid("analysis.transient_fraction", "must lie in [0, 1)"));
        }
        for (name, v) in [
            ("analysis.v_eps", self.v_eps),
            ("analysis.v_com_min", self.v_com_min),
            ("analysis.s_eps", self.s_eps),
            ("analysis.cv_max", self.cv_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Centroid of every sample.
pub fn center_of_mass_series(traj: &TrajectoryRecord) -> Result<Vec<(f64, Vec2)>> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(traj.samples().iter().map(|s| (s.time, s.centroid())).collect())
}

fn window_shape_drift(window: &[Sample]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in window.iter().enumerate() {
        for b in &window[i + 1..] {
            worst = worst.max(aligned_rms(&a.positions, &b.positions));
        }
    }
    worst
}

/// Largest aligned RMS discrepancy between any two samples in the final
/// `window` time units. Zero for a rigid formation.
pub fn shape_drift(traj: &TrajectoryRecord, window: f64) -> Result<f64> {
    let w = traj.final_window(window);
    if w.len() < 2 {
        return Err(Error::TooShort(format!("shape drift needs 2 samples in the final {window} time units")));
    }
    Ok(window_shape_drift(w))
}

fn max_speed(window: &[Sample]) -> f64 {
    window
        .windows(2)
        .flat_map(|w| {
            let dt = w[1].time - w[0].time;
            w[0].positions.iter().zip(&w[1].positions).map(move |(a, b)| a.distance(*b) / dt)
        })
        .fold(0.0, f64::max)
}

fn com_speed(window: &[Sample]) -> f64 {
    let (a, b) = (&window[0], &window[window.len() - 1]);
    a.centroid().distance(b.centroid()) / (b.time - a.time)
}

/// Red agent's offset from the centroid, projected on its principal axis.
fn oscillation_signal(window: &[Sample], red: usize) -> Vec<(f64, f64)> {
    let disp: Vec<(f64, Vec2)> = window.iter().map(|s| (s.time, s.positions[red] - s.centroid())).collect();
    let mean = disp.iter().map(|d| d.1).sum::<Vec2>() / disp.len() as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (_, d) in &disp {
        let d = *d - mean;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    let mut axis = Vec2::from_angle(0.5 * (2.0 * sxy).atan2(sxx - syy));
    if (disp[0].1 - mean).dot(axis) < 0.0 {
        axis = -axis;
    }
    disp.into_iter().map(|(t, d)| (t, d.dot(axis))).collect()
}

/// Period of the red agent's motion relative to the swarm centroid over the
/// final `window` time units.
pub fn red_period(traj: &TrajectoryRecord, window: f64) -> PeriodEstimate {
    let w = traj.final_window(window);
    if w.len() < 2 {
        return PeriodEstimate::default();
    }
    estimate_period(&oscillation_signal(w, traj.meta.red_index))
}

/// Labels the late-time behavior of a trajectory. Checks run in a fixed
/// order: stationary, rigid translation, periodic, otherwise irregular.
pub fn classify(traj: &TrajectoryRecord, th: &ClassifierThresholds) -> Result<PatternLabel> {
    th.validate()?;
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if traj.samples().len() < 2 || traj.span() <= 0.0 {
        return Err(Error::TooShort("classification needs at least two samples".into()));
    }
    let window = traj.final_window(traj.span() * (1.0 - th.transient_fraction));
    if window.len() < 2 {
        return Ok(PatternLabel {
            kind: PatternKind::Unresolved,
            diagnostics: Diagnostics::default(),
        });
    }
    let est = estimate_period(&oscillation_signal(window, traj.meta.red_index));
    let mut diagnostics = Diagnostics {
        terminal_speed: max_speed(window),
        com_speed: com_speed(window),
        shape_drift: window_shape_drift(window),
        period: None,
        period_cv: est.cv,
    };
    let kind = if window.len() < 4 {
        PatternKind::Unresolved
    } else if diagnostics.terminal_speed < th.v_eps {
        PatternKind::Stationary
    } else if diagnostics.com_speed >= th.v_com_min && diagnostics.shape_drift < th.s_eps {
        PatternKind::Translational
    } else if matches!(est.cv, Some(cv) if cv < th.cv_max) {
        diagnostics.period = est.period;
        PatternKind::Oscillatory
    } else {
        PatternKind::Irregular
    };
    Ok(PatternLabel { kind, diagnostics })
}

/// True when `p` lies strictly inside the convex hull of `pts`.
pub fn strictly_inside_hull(p: Vec2, pts: &[Vec2]) -> bool {
    let hull = convex_hull(pts);
    if hull.len() < 3 {
        return false;
    }
    (0..hull.len()).all(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        (b - a).cross(p - a) > 0.0
    })
}

/// Counter-clockwise convex hull (monotone chain), collinear points dropped.
pub fn convex_hull(pts: &[Vec2]) -> Vec<Vec2> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vec2>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if (b - a).cross(q - a) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Agents ordered by their projection onto the direction of centroid drift
/// over the final `window` (leader first), with the drift direction.
pub fn drift_order(traj: &TrajectoryRecord, window: f64) -> Option<(Vec<usize>, Vec2)> {
    let w = traj.final_window(window);
    if w.len() < 2 {
        return None;
    }
    let (a, b) = (&w[0], &w[w.len() - 1]);
    let drift = b.centroid() - a.centroid();
    if drift.norm() == 0.0 {
        return None;
    }
    let dir = drift / drift.norm();
    let c = b.centroid();
    let proj: Vec<f64> = b.positions.iter().map(|p| (*p - c).dot(dir)).collect();
    let mut order: Vec<usize> = (0..proj.len()).collect();
    order.sort_by(|&i, &j| proj[j].total_cmp(&proj[i]));
    Some((order, dir))
}
