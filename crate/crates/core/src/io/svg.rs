//! Deterministic SVG snapshots and filmstrips.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::trajectory::{Sample, TrajectoryRecord};
use crate::vec2::Vec2;

const RED: &str = "#d62728";
const BLUE: &str = "#1f77b4";
const PANEL: f64 = 320.0;
const GAP: f64 = 10.0;
/// Fraction of the fitted extent added on every side.
const MARGIN: f64 = 0.12;
const TRAIL_SEGMENTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenderMode {
    /// Single frame nearest `time` (the last frame when `None`).
    Snapshot { time: Option<f64> },
    /// `panels` frames evenly spaced over the run.
    Filmstrip { panels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub mode: RenderMode,
    pub trails: bool,
    /// Trail length in samples.
    pub trail_samples: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            mode: RenderMode::Snapshot { time: None },
            trails: true,
            trail_samples: 200,
        }
    }
}

fn nearest_index(samples: &[Sample], t: f64) -> usize {
    let i = samples.partition_point(|s| s.time < t);
    if i == 0 {
        0
    } else if i == samples.len() || (t - samples[i - 1].time) <= (samples[i].time - t) {
        i - 1
    } else {
        i
    }
}

fn frame_indices(samples: &[Sample], mode: RenderMode) -> Result<Vec<usize>> {
    let last = samples.len() - 1;
    Ok(match mode {
        RenderMode::Snapshot { time: None } => vec![last],
        RenderMode::Snapshot { time: Some(t) } => vec![nearest_index(samples, t)],
        RenderMode::Filmstrip { panels: 0 } => return Err(Error::invalid("panels", "must be >= 1")),
        RenderMode::Filmstrip { panels: 1 } => vec![last],
        RenderMode::Filmstrip { panels } => (0..panels).map(|k| k * last / (panels - 1)).collect(),
    })
}

fn render_panel(svg: &mut String, traj: &TrajectoryRecord, idx: usize, x0: f64, y0: f64, opts: &RenderOptions) {
    let samples = traj.samples();
    let frame = &samples[idx];
    let from = if opts.trails { idx.saturating_sub(opts.trail_samples) } else { idx };
    let history = &samples[from..=idx];

    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in history.iter().flat_map(|s| &s.positions) {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1e-6);
    let side = extent * (1.0 + 2.0 * MARGIN);
    let mid = (lo + hi) * 0.5;
    let (vx, vy) = (mid.x - side / 2.0, -mid.y - side / 2.0);
    let radius = 0.025 * side;
    let stroke = 0.004 * side;

    let _ = writeln!(
        svg,
        r#"<svg class="panel" x="{x0:.1}" y="{y0:.1}" width="{PANEL:.1}" height="{PANEL:.1}" viewBox="{vx:.6} {vy:.6} {side:.6} {side:.6}">"#
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{vx:.6}" y="{vy:.6}" width="{side:.6}" height="{side:.6}" fill="#ffffff" stroke="#999999" stroke-width="{stroke:.6}"/>"##
    );
    let red = traj.meta.red_index;
    if opts.trails && history.len() > 1 {
        let chunk = (history.len() - 1).div_ceil(TRAIL_SEGMENTS).max(1);
        for agent in 0..frame.positions.len() {
            let color = if agent == red { RED } else { BLUE };
            for (seg, start) in (0..history.len() - 1).step_by(chunk).enumerate() {
                let end = (start + chunk).min(history.len() - 1);
                let opacity = 0.15 + 0.6 * (seg + 1) as f64 / TRAIL_SEGMENTS as f64;
                let mut pts = String::new();
                for s in &history[start..=end] {
                    let p = s.positions[agent];
                    let _ = write!(pts, "{:.5},{:.5} ", p.x, -p.y);
                }
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-opacity="{opacity:.3}" stroke-width="{stroke:.6}"/>"#,
                    pts.trim_end()
                );
            }
        }
    }
    for (agent, p) in frame.positions.iter().enumerate() {
        let color = if agent == red { RED } else { BLUE };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.5}" cy="{:.5}" r="{radius:.5}" fill="{color}"/>"#,
            p.x, -p.y
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.6}" y="{:.6}" font-size="{:.6}" fill="#333333">t = {:.2}</text>"##,
        vx + 0.03 * side,
        vy + 0.08 * side,
        0.06 * side,
        frame.time
    );
    svg.push_str("</svg>\n");
}

/// Renders agents as circles (red agent in red) with optional fading trails.
pub fn render_svg_string(traj: &TrajectoryRecord, opts: &RenderOptions) -> Result<String> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let frames = frame_indices(traj.samples(), opts.mode)?;
    let cols = (frames.len() as f64).sqrt().ceil() as usize;
    let rows = frames.len().div_ceil(cols);
    let width = cols as f64 * (PANEL + GAP) + GAP;
    let height = rows as f64 * (PANEL + GAP) + GAP;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    for (k, &idx) in frames.iter().enumerate() {
        let (r, c) = (k / cols, k % cols);
        render_panel(
            &mut svg,
            traj,
            idx,
            GAP + c as f64 * (PANEL + GAP),
            GAP + r as f64 * (PANEL + GAP),
            opts,
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_svg(traj: &TrajectoryRecord, opts: &RenderOptions, path: &Path) -> Result<()> {
    let svg = render_svg_string(traj, opts)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
