//! Fully observed integration of the preference-driven pair dynamics.
//!
//! Each agent moves with velocity
//! `sum_j (k_ij / |R_ij| - 1 / |R_ij|^2) * R_ij / |R_ij|`, `R_ij = r_j - r_i`.
//! The model is dimensionless and first order in position.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::PreferenceMatrix;
use crate::trajectory::{Sample, TrajectoryMeta, TrajectoryRecord};
use crate::vec2::Vec2;

/// Positions of all agents at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    positions: Vec<Vec2>,
    time: f64,
}

impl SwarmState {
    /// Rejects fewer than two agents, non-finite values and coincident agents.
    pub fn new(positions: Vec<Vec2>, time: f64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::invalid("positions", format!("need at least 2 agents, got {}", positions.len())));
        }
        if !time.is_finite() {
            return Err(Error::invalid("time", "must be finite"));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("positions[{i}]"), "not finite"));
        }
        let state = Self { positions, time };
        let (d, i, j) = state.closest_pair();
        if d <= 0.0 {
            return Err(Error::Degenerate {
                i,
                j,
                distance: d,
                min_separation: 0.0,
            });
        }
        Ok(state)
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn into_positions(self) -> Vec<Vec2> {
        self.positions
    }

    /// Smallest pairwise distance and the pair realizing it.
    pub fn min_pair_distance(&self) -> (f64, usize, usize) {
        self.closest_pair()
    }

    fn closest_pair(&self) -> (f64, usize, usize) {
        let mut best = (f64::INFINITY, 0, 1);
        for i in 0..self.positions.len() {
            for j in i + 1..self.positions.len() {
                let d = self.positions[i].distance(self.positions[j]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        best
    }

    pub fn translated(&self, offset: Vec2) -> Result<Self> {
        Self::new(self.positions.iter().map(|p| *p + offset).collect(), self.time)
    }

    pub fn rotated(&self, angle: f64) -> Result<Self> {
        Self::new(self.positions.iter().map(|p| p.rotated(angle)).collect(), self.time)
    }

    /// Agent `perm[i]` of the result is agent `i` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        crate::scenario::check_permutation(perm, self.len())?;
        let mut positions = vec![Vec2::ZERO; self.len()];
        for (i, &p) in perm.iter().enumerate() {
            positions[p] = self.positions[i];
        }
        Self::new(positions, self.time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Rk4,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt: f64,
    /// Floor applied to pair distances inside the velocity field, and the
    /// smallest separation a state may reach at a step boundary.
    pub min_separation: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            dt: 0.01,
            min_separation: 1e-6,
        }
    }
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64) -> Self {
        Self {
            method,
            dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("integrator.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.min_separation > 0.0 && self.min_separation.is_finite()) {
            return Err(Error::invalid(
                "integrator.min_separation",
                format!("must be positive, got {}", self.min_separation),
            ));
        }
        Ok(())
    }

    /// Number of steps needed to cover `duration`, i.e. ceil(duration / dt)
    /// with a little slack so exact multiples are not rounded up.
    pub fn steps_for(&self, duration: f64) -> usize {
        let q = duration / self.dt;
        let r = q.round();
        if (q - r).abs() <= 1e-9 * r.max(1.0) {
            r as usize
        } else {
            q.ceil() as usize
        }
    }
}

/// Velocity contribution on an agent at `r_i` from one at `r_j`.
pub fn pairwise_term(k_ij: f64, r_i: Vec2, r_j: Vec2, min_separation: f64) -> Result<Vec2> {
    let rel = r_j - r_i;
    let dist = rel.norm();
    if dist == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(term(k_ij, rel, dist, min_separation))
}

#[inline]
fn term(k: f64, rel: Vec2, dist: f64, min_separation: f64) -> Vec2 {
    let d = dist.max(min_separation);
    rel * ((k / d - 1.0 / (d * d)) / dist)
}

fn check_dims(positions: &[Vec2], k: &PreferenceMatrix) -> Result<()> {
    if k.n() != positions.len() {
        return Err(Error::Dimension {
            expected: positions.len(),
            found: k.n(),
        });
    }
    Ok(())
}

fn velocity_field(positions: &[Vec2], k: &PreferenceMatrix, min_separation: f64, out: &mut [Vec2]) -> Result<()> {
    for (i, (ri, vi)) in positions.iter().zip(out.iter_mut()).enumerate() {
        let mut acc = Vec2::ZERO;
        for (j, rj) in positions.iter().enumerate() {
            if i == j {
                continue;
            }
            let rel = *rj - *ri;
            let dist = rel.norm();
            if dist == 0.0 {
                return Err(Error::Degenerate {
                    i,
                    j,
                    distance: 0.0,
                    min_separation,
                });
            }
            acc += term(k.get(i, j), rel, dist, min_separation);
        }
        *vi = acc;
    }
    Ok(())
}

/// Velocity of every agent in `state`.
pub fn net_velocity(state: &SwarmState, k: &PreferenceMatrix, min_separation: f64) -> Result<Vec<Vec2>> {
    check_dims(state.positions(), k)?;
    let mut out = vec![Vec2::ZERO; state.len()];
    velocity_field(state.positions(), k, min_separation, &mut out)?;
    Ok(out)
}

fn axpy(base: &[Vec2], h: f64, dir: &[Vec2], out: &mut [Vec2]) {
    for ((o, b), d) in out.iter_mut().zip(base).zip(dir) {
        *o = *b + *d * h;
    }
}

/// Advances `state` by one step of `cfg.dt`. Separation is checked against
/// `cfg.min_separation` only on the resulting state.
pub fn step(state: &SwarmState, k: &PreferenceMatrix, cfg: &IntegratorConfig) -> Result<SwarmState> {
    cfg.validate()?;
    check_dims(state.positions(), k)?;
    let mut stepper = Stepper::new(state.len());
    let mut next = state.positions().to_vec();
    stepper.advance(state.positions(), k, cfg, &mut next)?;
    finish_step(next, state.time() + cfg.dt, cfg.min_separation)
}

fn finish_step(positions: Vec<Vec2>, time: f64, min_separation: f64) -> Result<SwarmState> {
    if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
        return Err(Error::invalid(format!("positions[{i}]"), "became non-finite"));
    }
    let state = SwarmState { positions, time };
    let (d, i, j) = state.closest_pair();
    if d < min_separation {
        return Err(Error::Degenerate {
            i,
            j,
            distance: d,
            min_separation,
        });
    }
    Ok(state)
}

/// Scratch buffers for repeated steps.
struct Stepper {
    k1: Vec<Vec2>,
    k2: Vec<Vec2>,
    k3: Vec<Vec2>,
    k4: Vec<Vec2>,
    tmp: Vec<Vec2>,
}

impl Stepper {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![Vec2::ZERO; n],
            k2: vec![Vec2::ZERO; n],
            k3: vec![Vec2::ZERO; n],
            k4: vec![Vec2::ZERO; n],
            tmp: vec![Vec2::ZERO; n],
        }
    }

    fn advance(&mut self, x: &[Vec2], k: &PreferenceMatrix, cfg: &IntegratorConfig, out: &mut [Vec2]) -> Result<()> {
        let (h, ms) = (cfg.dt, cfg.min_separation);
        match cfg.method {
            Method::Euler => {
                velocity_field(x, k, ms, &mut self.k1)?;
                axpy(x, h, &self.k1, out);
            }
            Method::Rk4 => {
                velocity_field(x, k, ms, &mut self.k1)?;
                axpy(x, 0.5 * h, &self.k1, &mut self.tmp);
                velocity_field(&self.tmp, k, ms, &mut self.k2)?;
                axpy(x, 0.5 * h, &self.k2, &mut self.tmp);
                velocity_field(&self.tmp, k, ms, &mut self.k3)?;
                axpy(x, h, &self.k3, &mut self.tmp);
                velocity_field(&self.tmp, k, ms, &mut self.k4)?;
                for i in 0..x.len() {
                    let incr = self.k1[i] + self.k2[i] * 2.0 + self.k3[i] * 2.0 + self.k4[i];
                    out[i] = x[i] + incr * (h / 6.0);
                }
            }
        }
        Ok(())
    }
}

/// Integrates for `duration` and records every `sample_every`-th step plus the
/// final state. A zero duration yields the initial state alone.
pub fn run(
    initial: &SwarmState,
    k: &PreferenceMatrix,
    cfg: &IntegratorConfig,
    duration: f64,
    sample_every: usize,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    check_dims(initial.positions(), k)?;
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", format!("must be >= 0, got {duration}")));
    }
    if sample_every == 0 {
        return Err(Error::invalid("sample_every", "must be >= 1"));
    }
    let n_steps = cfg.steps_for(duration);
    let t0 = initial.time();
    let mut samples = Vec::with_capacity(n_steps / sample_every + 2);
    samples.push(Sample::new(0, t0, initial.positions().to_vec()));

    let mut stepper = Stepper::new(initial.len());
    let mut current = initial.positions().to_vec();
    let mut next = current.clone();
    for s in 1..=n_steps {
        let wrap = |e: Error| Error::Step {
            step: s,
            source: Box::new(e),
        };
        stepper.advance(&current, k, cfg, &mut next).map_err(wrap)?;
        let t = t0 + s as f64 * cfg.dt;
        let state = finish_step(std::mem::take(&mut next), t, cfg.min_separation).map_err(wrap)?;
        next = std::mem::replace(&mut current, state.into_positions());
        if s % sample_every == 0 || s == n_steps {
            samples.push(Sample::new(s as u64, t, current.clone()));
        }
    }
    let meta = TrajectoryMeta {
        matrix: Some(k.clone()),
        integrator: *cfg,
        sample_every,
        ..TrajectoryMeta::default()
    };
    TrajectoryRecord::new(samples, meta)
}
