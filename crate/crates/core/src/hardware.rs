//! Emulation of the robot perception and actuation pipeline.
//!
//! Each robot carries `n_sensors` range sensors on equally spaced axes in its
//! own frame (robots never rotate, so the frame is aligned with the world).
//! A sensor reports the nearest robot inside its cone and range; the bearing
//! of the estimate is snapped to the sensor axis. Readings refresh every
//! `update_interval` seconds and are held in between. Commands pass through
//! the three-wheel omni drive mapping and back, with the speed capped at
//! `v_max`.
//!
//! One model length unit is `scale` meters and one model time unit is one
//! second. Recorded trajectories are in model units.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::{pairwise_term, IntegratorConfig, Method, SwarmState};
use crate::error::{Error, Result};
use crate::scenario::{PreferenceMatrix, RoleParams, ScenarioSpec};
use crate::trajectory::{Mode, Sample, TrajectoryMeta, TrajectoryRecord};
use crate::vec2::Vec2;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Smallest distance a noisy reading is clamped to, in meters.
const MIN_READING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorLayout {
    pub n_sensors: usize,
    /// Half-width of each sensor cone, radians.
    pub half_angle: f64,
    /// Detection range, meters. May be infinite.
    pub range: f64,
    /// Seconds between sensor refreshes.
    pub update_interval: f64,
    /// Report every in-range robot at its true bearing instead of one
    /// axis-snapped echo per sensor.
    pub exact_bearing: bool,
    /// Keep the last estimate of a robot that drops out of view.
    pub hold_last: bool,
}

impl Default for SensorLayout {
    fn default() -> Self {
        Self {
            n_sensors: 8,
            half_angle: PI / 12.0,
            range: 1.7,
            update_interval: 0.1,
            exact_bearing: false,
            hold_last: false,
        }
    }
}

impl SensorLayout {
    /// Cones that tile the full circle, infinite range.
    pub fn full_coverage(n_sensors: usize, update_interval: f64) -> Self {
        Self {
            n_sensors,
            half_angle: PI / n_sensors as f64,
            range: f64::INFINITY,
            update_interval,
            exact_bearing: true,
            hold_last: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sensors == 0 {
            return Err(Error::invalid("hardware.sensors.n_sensors", "must be >= 1"));
        }
        let max_half = PI / self.n_sensors as f64;
        if !(self.half_angle > 0.0 && self.half_angle <= max_half * (1.0 + 1e-12)) {
            return Err(Error::invalid(
                "hardware.sensors.half_angle",
                format!("must lie in (0, pi/{}], got {}", self.n_sensors, self.half_angle),
            ));
        }
        if self.range.is_nan() || self.range <= 0.0 {
            return Err(Error::invalid("hardware.sensors.range", format!("must be positive, got {}", self.range)));
        }
        if !(self.update_interval > 0.0 && self.update_interval.is_finite()) {
            return Err(Error::invalid(
                "hardware.sensors.update_interval",
                format!("must be positive, got {}", self.update_interval),
            ));
        }
        Ok(())
    }

    pub fn axis_angle(&self, m: usize) -> f64 {
        TAU * m as f64 / self.n_sensors as f64
    }

    /// Index of the sensor whose cone contains `bearing`, if any.
    pub fn sector_of(&self, bearing: f64) -> Option<usize> {
        let spacing = TAU / self.n_sensors as f64;
        let m = (bearing / spacing).round().rem_euclid(self.n_sensors as f64) as usize % self.n_sensors;
        let off = wrap_angle(bearing - self.axis_angle(m));
        (off.abs() <= self.half_angle + 1e-12).then_some(m)
    }
}

/// Maps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEstimate {
    /// Position relative to the observer, meters.
    pub relative: Vec2,
    pub is_red: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionSnapshot {
    pub neighbors: Vec<NeighborEstimate>,
    /// Seconds.
    pub timestamp: f64,
    /// True while the snapshot is being held between refreshes.
    pub stale: bool,
}

impl PerceptionSnapshot {
    pub fn empty(timestamp: f64) -> Self {
        Self {
            neighbors: Vec::new(),
            timestamp,
            stale: false,
        }
    }
}

/// Motor outputs (P1, P2, P3) of the three omni wheels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorCommand {
    pub p: [f64; 3],
}

impl MotorCommand {
    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareConfig {
    pub sensors: SensorLayout,
    /// Standard deviation of distance readings, meters.
    pub noise_sigma: f64,
    /// Probability that a detection is lost on a given refresh.
    pub dropout_prob: f64,
    /// Meters per model length unit.
    pub scale: f64,
    /// Speed cap, m/s. May be infinite.
    pub v_max: f64,
    /// Motor gain.
    pub c: f64,
    /// Body diameter, meters; only used for overlap warnings.
    pub robot_diameter: f64,
    /// Sensor noise seed; set from the run seed, not from config files.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for HardwareConfig {
    fn default() -> Self {
        Self {
            sensors: SensorLayout::default(),
            noise_sigma: 0.0,
            dropout_prob: 0.0,
            scale: 1.0,
            v_max: 0.3,
            c: 1.0,
            robot_diameter: 0.19,
            seed: 0,
        }
    }
}

impl HardwareConfig {
    pub fn validate(&self) -> Result<()> {
        self.sensors.validate()?;
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("hardware.noise_sigma", format!("must be >= 0, got {}", self.noise_sigma)));
        }
        if !(0.0..=1.0).contains(&self.dropout_prob) {
            return Err(Error::invalid("hardware.dropout_prob", format!("must lie in [0, 1], got {}", self.dropout_prob)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::invalid("hardware.scale", format!("must be positive, got {}", self.scale)));
        }
        if self.v_max.is_nan() || self.v_max <= 0.0 {
            return Err(Error::invalid("hardware.v_max", format!("must be positive, got {}", self.v_max)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid("hardware.c", format!("must be positive, got {}", self.c)));
        }
        if !(self.robot_diameter >= 0.0 && self.robot_diameter.is_finite()) {
            return Err(Error::invalid("hardware.robot_diameter", "must be >= 0"));
        }
        Ok(())
    }
}

/// Sensor-derived view of the other robots from `self_index`.
///
/// Every call consumes the same number of random draws regardless of the
/// geometry, so runs that differ only in noise level share their random stream.
pub fn perceive(
    world: &SwarmState,
    self_index: usize,
    red_index: usize,
    hw: &HardwareConfig,
    rng: &mut impl Rng,
    timestamp: f64,
) -> PerceptionSnapshot {
    let layout = &hw.sensors;
    let me = world.positions()[self_index];
    // (distance, unit direction, is_red), one slot per sensor or per robot
    let slots = if layout.exact_bearing { world.len() } else { layout.n_sensors };
    let mut found: Vec<Option<(f64, Vec2, bool)>> = vec![None; slots];
    for (j, p) in world.positions().iter().enumerate() {
        if j == self_index {
            continue;
        }
        let rel = (*p - me) * hw.scale;
        let dist = rel.norm();
        if dist > layout.range {
            continue;
        }
        let bearing = rel.angle();
        let (slot, dir) = if layout.exact_bearing {
            (j, rel / dist)
        } else {
            match layout.sector_of(bearing) {
                Some(m) => (m, Vec2::from_angle(layout.axis_angle(m))),
                None => continue,
            }
        };
        // first echo wins
        if found[slot].is_none_or(|(d, _, _)| dist < d) {
            found[slot] = Some((dist, dir, j == red_index));
        }
    }

    let mut neighbors = Vec::new();
    for slot in found {
        let z: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.random();
        let Some((dist, dir, is_red)) = slot else {
            continue;
        };
        if u < hw.dropout_prob {
            continue;
        }
        let reading = (dist + hw.noise_sigma * z).clamp(MIN_READING, layout.range.max(MIN_READING));
        neighbors.push(NeighborEstimate {
            relative: dir * reading,
            is_red,
        });
    }
    PerceptionSnapshot {
        neighbors,
        timestamp,
        stale: false,
    }
}

/// Wheel outputs for travel at speed `v` in direction `theta`.
pub fn motor_outputs(v: f64, theta: f64, c: f64) -> MotorCommand {
    let vx = v * theta.cos();
    let vy = v * theta.sin();
    MotorCommand {
        p: [
            c * -vy,
            c * (-SQRT3_2 * vx + 0.5 * vy),
            c * (SQRT3_2 * vx + 0.5 * vy),
        ],
    }
}

/// Inverts [`motor_outputs`] through the pseudo-inverse of the drive matrix.
/// Returns (speed, direction); direction is 0 for a stopped robot.
pub fn motor_to_velocity(cmd: &MotorCommand, c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", format!("must be positive, got {c}")));
    }
    let [p1, p2, p3] = cmd.p;
    let scale = p1.abs().max(p2.abs()).max(p3.abs()).max(1.0);
    let sum = cmd.sum();
    if sum.abs() > 1e-9 * scale {
        return Err(Error::InconsistentCommand { sum });
    }
    // M^T M = (3/2) I, so pinv(M) = (2/3) M^T
    let vx = (2.0 / (3.0 * c)) * SQRT3_2 * (p3 - p2);
    let vy = (2.0 / (3.0 * c)) * (-p1 + 0.5 * (p2 + p3));
    let v = vx.hypot(vy);
    let theta = if v == 0.0 { 0.0 } else { vy.atan2(vx) };
    Ok((v, theta))
}

/// Velocity in m/s that `cmd` drives the robot at.
pub fn command_velocity(cmd: &MotorCommand, c: f64) -> Result<Vec2> {
    let (v, theta) = motor_to_velocity(cmd, c)?;
    Ok(Vec2::from_polar(v, theta))
}

/// Recovers the role parameters of a red/blue block-structured matrix.
pub fn role_params_of(k: &PreferenceMatrix, red_index: usize) -> Result<RoleParams> {
    let n = k.n();
    if red_index >= n {
        return Err(Error::invalid("red_index", format!("{red_index} out of range for {n} agents")));
    }
    let blue = (0..n).find(|&j| j != red_index).unwrap_or(0);
    let rb = k.get(red_index, blue);
    let br = k.get(blue, red_index);
    let bb = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| i != j && i != red_index && j != red_index)
        .map_or(0.0, |(i, j)| k.get(i, j));
    let params = RoleParams::new(0.5 * (rb + br), 0.5 * (rb - br), bb);
    let rebuilt = params.matrix(n, red_index)?;
    let tol = 1e-12 * (1.0 + rb.abs().max(br.abs()).max(bb.abs()));
    for i in 0..n {
        for j in 0..n {
            if (rebuilt.get(i, j) - k.get(i, j)).abs() > tol {
                return Err(Error::invalid(
                    "matrix",
                    "hardware mode needs a red/blue matrix: robots only tell red from blue",
                ));
            }
        }
    }
    Ok(params)
}

/// Evaluates the pair law over perceived neighbors and converts the result
/// into a motor command.
pub fn controller_step(
    snapshot: &PerceptionSnapshot,
    own_is_red: bool,
    params: &RoleParams,
    hw: &HardwareConfig,
) -> MotorCommand {
    let mut v = Vec2::ZERO;
    for nb in &snapshot.neighbors {
        let k = if own_is_red {
            params.red_to_blue()
        } else if nb.is_red {
            params.blue_to_red()
        } else {
            params.blue_to_blue()
        };
        if let Ok(t) = pairwise_term(k, Vec2::ZERO, nb.relative / hw.scale, 1e-6) {
            v += t;
        }
    }
    let mut v = v * hw.scale;
    let speed = v.norm();
    if speed > hw.v_max {
        v = v * (hw.v_max / speed);
    }
    let speed = v.norm();
    let theta = if speed == 0.0 { 0.0 } else { v.angle() };
    motor_outputs(speed, theta, hw.c)
}

/// Closed-loop run: sensors refresh every `update_interval`, commands are held
/// in between, and each robot moves at its commanded velocity. Positions
/// advance by exact zero-order hold, so `cfg.method` is ignored and the
/// recorded integrator is Euler.
pub fn run_hardware(
    scenario: &ScenarioSpec,
    hw: &HardwareConfig,
    cfg: &IntegratorConfig,
    duration: f64,
    sample_every: usize,
) -> Result<TrajectoryRecord> {
    hw.validate()?;
    cfg.validate()?;
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", format!("must be >= 0, got {duration}")));
    }
    if sample_every == 0 {
        return Err(Error::invalid("sample_every", "must be >= 1"));
    }
    let params = match scenario.params {
        Some(p) => p,
        None => role_params_of(&scenario.matrix, scenario.red_index)?,
    };
    let n = scenario.initial.len();
    let red = scenario.red_index;
    let ratio = hw.sensors.update_interval / cfg.dt;
    let ticks = (ratio.round() as usize).max(1);
    if (ratio - ratio.round()).abs() > 1e-6 * ratio.max(1.0) {
        log::warn!(
            "update interval {} is not a multiple of dt {}; refreshing every {ticks} steps",
            hw.sensors.update_interval,
            cfg.dt
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hw.seed);
    // keep clear of the stream used for initial perturbations
    rng.set_stream(1);
    let n_steps = cfg.steps_for(duration);
    let t0 = scenario.initial.time();
    let mut state = scenario.initial.clone();
    let mut samples = vec![Sample::new(0, t0, state.positions().to_vec())];
    let mut snapshots: Vec<PerceptionSnapshot> = (0..n).map(|_| PerceptionSnapshot::empty(t0)).collect();
    let mut velocities = vec![Vec2::ZERO; n];
    let mut overlap_warned = false;

    for s in 0..n_steps {
        let t = t0 + s as f64 * cfg.dt;
        if s % ticks == 0 {
            for i in 0..n {
                let mut snap = perceive(&state, i, red, hw, &mut rng, t);
                if hw.sensors.hold_last {
                    hold_missing(&mut snap, &snapshots[i]);
                }
                let cmd = controller_step(&snap, i == red, &params, hw);
                velocities[i] = command_velocity(&cmd, hw.c)? / hw.scale;
                snapshots[i] = snap;
            }
        } else {
            for snap in &mut snapshots {
                snap.stale = true;
            }
        }
        let positions: Vec<Vec2> = state
            .positions()
            .iter()
            .zip(&velocities)
            .map(|(p, v)| *p + *v * cfg.dt)
            .collect();
        let step_no = s + 1;
        let time = t0 + step_no as f64 * cfg.dt;
        state = SwarmState::new(positions, time).map_err(|e| Error::Step {
            step: step_no,
            source: Box::new(e),
        })?;
        let (d, i, j) = state.min_pair_distance();
        if d < cfg.min_separation {
            return Err(Error::Step {
                step: step_no,
                source: Box::new(Error::Degenerate {
                    i,
                    j,
                    distance: d,
                    min_separation: cfg.min_separation,
                }),
            });
        }
        if !overlap_warned && d * hw.scale < hw.robot_diameter {
            log::warn!("robots {i} and {j} overlap at t = {time:.3} ({:.3} m apart)", d * hw.scale);
            overlap_warned = true;
        }
        if step_no % sample_every == 0 || step_no == n_steps {
            samples.push(Sample::new(step_no as u64, time, state.positions().to_vec()));
        }
    }

    let meta = TrajectoryMeta {
        scenario: scenario.name.clone(),
        mode: Mode::Hardware,
        params: Some(params),
        matrix: Some(scenario.matrix.clone()),
        integrator: IntegratorConfig {
            method: Method::Euler,
            ..*cfg
        },
        sample_every,
        seed: Some(hw.seed),
        red_index: red,
        ..TrajectoryMeta::default()
    };
    TrajectoryRecord::new(samples, meta)
}

/// Re-adds estimates from `previous` whose direction is no longer covered.
fn hold_missing(snap: &mut PerceptionSnapshot, previous: &PerceptionSnapshot) {
    for old in &previous.neighbors {
        let dir = old.relative.angle();
        let covered = snap
            .neighbors
            .iter()
            .any(|nb| wrap_angle(nb.relative.angle() - dir).abs() < 1e-9 || nb.is_red && old.is_red);
        if !covered {
            snap.neighbors.push(*old);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world(p: &[(f64, f64)]) -> SwarmState {
        SwarmState::new(p.iter().map(|&(x, y)| Vec2::new(x, y)).collect(), 0.0).unwrap()
    }

    fn quiet() -> HardwareConfig {
        HardwareConfig::default()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn out_of_range_neighbor_is_absent() {
        for a in [0.0, 0.3, 1.0, 2.5, -2.0] {
            let w = world(&[(0.0, 0.0), (2.0 * f64::cos(a), 2.0 * f64::sin(a))]);
            assert!(perceive(&w, 0, 1, &quiet(), &mut rng(), 0.0).neighbors.is_empty());
        }
    }

    #[test]
    fn on_axis_neighbor_is_exact() {
        let w = world(&[(0.0, 0.0), (1.0, 0.0)]);
        let s = perceive(&w, 0, 1, &quiet(), &mut rng(), 0.0);
        assert_eq!(s.neighbors.len(), 1);
        assert!((s.neighbors[0].relative - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        assert!(s.neighbors[0].is_red);
    }

    // oracle: brute-force interval membership over all sector cones
    fn in_some_cone(bearing: f64, n: usize, half: f64) -> bool {
        (0..n).any(|m| {
            let axis = TAU * m as f64 / n as f64;
            (-1..=1).any(|w| {
                let b = bearing + TAU * w as f64;
                b >= axis - half && b <= axis + half
            })
        })
    }

    #[test]
    fn blind_wedge_hides_neighbor() {
        let b = PI / 8.0;
        assert!(!in_some_cone(b, 8, PI / 12.0));
        let w = world(&[(0.0, 0.0), (b.cos(), b.sin())]);
        assert!(perceive(&w, 0, 1, &quiet(), &mut rng(), 0.0).neighbors.is_empty());
    }

    #[test]
    fn sector_lookup_agrees_with_interval_oracle() {
        let layout = SensorLayout::default();
        for k in 0..3600 {
            let b = -PI + TAU * k as f64 / 3600.0 + 1e-7;
            assert_eq!(layout.sector_of(b).is_some(), in_some_cone(b, 8, PI / 12.0), "bearing {b}");
        }
        let full = SensorLayout::full_coverage(8, 0.1);
        assert!((0..1000).all(|k| full.sector_of(TAU * k as f64 / 1000.0).is_some()));
    }

    #[test]
    fn detection_is_axis_snapped_and_nearest_wins() {
        let a: f64 = 0.2; // inside the 0-axis cone
        let w = world(&[(0.0, 0.0), (1.5 * a.cos(), 1.5 * a.sin()), (0.8 * a.cos(), -0.8 * a.sin())]);
        let s = perceive(&w, 0, 1, &quiet(), &mut rng(), 0.0);
        assert_eq!(s.neighbors.len(), 1);
        assert!((s.neighbors[0].relative - Vec2::new(0.8, 0.0)).norm() < 1e-12);
        assert!(!s.neighbors[0].is_red);
    }

    #[test]
    fn noiseless_distance_is_true_distance() {
        let w = world(&[(0.3, -0.2), (0.3, 1.1), (-0.9, -0.2)]);
        let s = perceive(&w, 0, 1, &quiet(), &mut rng(), 0.0);
        let mut d: Vec<f64> = s.neighbors.iter().map(|n| n.relative.norm()).collect();
        d.sort_by(f64::total_cmp);
        assert!((d[0] - 1.2).abs() < 1e-12 && (d[1] - 1.3).abs() < 1e-12);
    }

    #[test]
    fn noisy_readings_stay_within_range() {
        let hw = HardwareConfig {
            noise_sigma: 0.5,
            ..quiet()
        };
        let w = world(&[(0.0, 0.0), (1.6, 0.0), (0.0, 0.05)]);
        let mut r = rng();
        for _ in 0..200 {
            for n in perceive(&w, 0, 1, &hw, &mut r, 0.0).neighbors {
                let d = n.relative.norm();
                assert!(d <= 1.7 && d > 0.0);
            }
        }
    }

    #[test]
    fn dropout_one_hides_everything() {
        let hw = HardwareConfig {
            dropout_prob: 1.0,
            ..quiet()
        };
        let w = world(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(perceive(&w, 0, 1, &hw, &mut rng(), 0.0).neighbors.is_empty());
    }

    #[test]
    fn motor_examples() {
        assert_eq!(motor_outputs(0.0, 1.3, 2.0).p, [0.0, 0.0, 0.0]);
        let m = motor_outputs(1.0, 0.0, 1.0).p;
        let want = [0.0, -3f64.sqrt() / 2.0, 3f64.sqrt() / 2.0];
        for (a, b) in m.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let m = motor_outputs(1.0, PI / 2.0, 1.0).p;
        for (a, b) in m.iter().zip([-1.0, 0.5, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn motor_inverse_examples() {
        assert_eq!(motor_to_velocity(&MotorCommand::default(), 1.0).unwrap(), (0.0, 0.0));
        let (v, th) = motor_to_velocity(&MotorCommand { p: [0.0, -SQRT3_2, SQRT3_2] }, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15 && th.abs() < 1e-15);
        assert!(matches!(
            motor_to_velocity(&MotorCommand { p: [1.0, 1.0, 1.0] }, 1.0),
            Err(Error::InconsistentCommand { .. })
        ));
    }

    #[test]
    fn controller_examples() {
        let hw = HardwareConfig {
            v_max: f64::INFINITY,
            ..quiet()
        };
        let empty = PerceptionSnapshot::empty(0.0);
        assert_eq!(controller_step(&empty, false, &RoleParams::new(2.0, -1.0, 2.0), &hw).p, [0.0; 3]);

        let snap = PerceptionSnapshot {
            neighbors: vec![NeighborEstimate {
                relative: Vec2::new(0.5, 0.0),
                is_red: true,
            }],
            timestamp: 0.0,
            stale: false,
        };
        // k = k_p - k_m = 3: 3/0.5 - 1/0.25 = 2
        let cmd = controller_step(&snap, false, &RoleParams::new(2.0, -1.0, 2.0), &hw);
        let want = motor_outputs(2.0, 0.0, hw.c);
        for (a, b) in cmd.p.iter().zip(want.p) {
            assert!((a - b).abs() < 1e-14);
        }
        // k = 1.5: 1.5/0.5 - 4 = -1, away from red
        let cmd = controller_step(&snap, false, &RoleParams::new(2.0, 0.5, 2.0), &hw);
        let v = command_velocity(&cmd, hw.c).unwrap();
        assert!((v - Vec2::new(-1.0, 0.0)).norm() < 1e-14);
        // red uses k_p + k_m for everyone: 2.5/0.5 - 4 = 1
        let cmd = controller_step(&snap, true, &RoleParams::new(2.0, 0.5, 2.0), &hw);
        let v = command_velocity(&cmd, hw.c).unwrap();
        assert!((v - Vec2::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn controller_caps_speed() {
        let snap = PerceptionSnapshot {
            neighbors: vec![NeighborEstimate {
                relative: Vec2::new(0.0, 0.5),
                is_red: true,
            }],
            timestamp: 0.0,
            stale: false,
        };
        let cmd = controller_step(&snap, false, &RoleParams::new(2.0, -1.0, 2.0), &quiet());
        let v = command_velocity(&cmd, 1.0).unwrap();
        assert!((v - Vec2::new(0.0, 0.3)).norm() < 1e-14);
    }

    #[test]
    fn role_params_recovered_from_matrix() {
        let k = RoleParams::new(1.6, 2.4, 1.6).matrix(5, 2).unwrap();
        let p = role_params_of(&k, 2).unwrap();
        assert!((p.k_p - 1.6).abs() < 1e-12 && (p.k_m - 2.4).abs() < 1e-12 && (p.k_a - 1.6).abs() < 1e-12);
        let general = crate::scenario::build_general_matrix(&[
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 3.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(role_params_of(&general, 0).is_err());
    }

    #[test]
    fn layout_validation() {
        assert!(SensorLayout::default().validate().is_ok());
        let bad = SensorLayout {
            half_angle: PI / 4.0,
            ..SensorLayout::default()
        };
        assert!(bad.validate().is_err());
        assert!(HardwareConfig {
            c: 0.0,
            ..quiet()
        }
        .validate()
        .is_err());
    }
}
