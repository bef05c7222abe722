use serde::{Deserialize, Serialize};

use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::scenario::{PreferenceMatrix, RoleParams};
use crate::vec2::{centroid, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Integration step index this sample was taken at.
    pub step: u64,
    pub time: f64,
    pub positions: Vec<Vec2>,
}

impl Sample {
    pub fn new(step: u64, time: f64, positions: Vec<Vec2>) -> Self {
        Self { step, time, positions }
    }

    pub fn centroid(&self) -> Vec2 {
        centroid(&self.positions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Ideal,
    Hardware,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Ideal => "ideal",
            Mode::Hardware => "hardware",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryMeta {
    pub version: String,
    pub scenario: String,
    pub mode: Mode,
    pub params: Option<RoleParams>,
    pub matrix: Option<PreferenceMatrix>,
    pub integrator: IntegratorConfig,
    pub sample_every: usize,
    pub seed: Option<u64>,
    pub red_index: usize,
}

impl Default for TrajectoryMeta {
    fn default() -> Self {
        Self {
            version: crate::VERSION.to_string(),
            scenario: String::new(),
            mode: Mode::Ideal,
            params: None,
            matrix: None,
            integrator: IntegratorConfig::default(),
            sample_every: 1,
            seed: None,
            red_index: 0,
        }
    }
}

/// Sampled time series of swarm configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    samples: Vec<Sample>,
    pub meta: TrajectoryMeta,
}

impl TrajectoryRecord {
    /// Requires strictly increasing times and a constant agent count.
    pub fn new(samples: Vec<Sample>, meta: TrajectoryMeta) -> Result<Self> {
        if let Some(first) = samples.first() {
            let n = first.positions.len();
            if meta.red_index >= n {
                return Err(Error::invalid("red_index", format!("{} out of range for {n} agents", meta.red_index)));
            }
            for (idx, w) in samples.windows(2).enumerate() {
                if w[1].time.partial_cmp(&w[0].time) != Some(std::cmp::Ordering::Greater) {
                    return Err(Error::invalid("samples", format!("time not increasing at sample {}", idx + 1)));
                }
            }
            if let Some(idx) = samples.iter().position(|s| s.positions.len() != n) {
                return Err(Error::invalid(
                    "samples",
                    format!("sample {idx} has {} agents, expected {n}", samples[idx].positions.len()),
                ));
            }
        }
        Ok(Self { samples, meta })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_agents(&self) -> usize {
        self.samples.first().map_or(0, |s| s.positions.len())
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Time between first and last sample.
    pub fn span(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.time - a.time,
            _ => 0.0,
        }
    }

    /// Samples with time >= `t_end - window`.
    pub fn final_window(&self, window: f64) -> &[Sample] {
        let Some(end) = self.samples.last().map(|s| s.time) else {
            return &[];
        };
        let start = end - window;
        let idx = self.samples.partition_point(|s| s.time < start - 1e-9 * window.abs().max(1.0));
        &self.samples[idx..]
    }

    /// Applies `f` to every position, keeping times and metadata.
    pub fn map_positions(&self, mut f: impl FnMut(usize, Vec2) -> Vec2) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                step: s.step,
                time: s.time,
                positions: s.positions.iter().enumerate().map(|(i, p)| f(i, *p)).collect(),
            })
            .collect();
        Self {
            samples,
            meta: self.meta.clone(),
        }
    }

    /// Relabels agents so agent `perm[i]` of the result is agent `i` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        crate::scenario::check_permutation(perm, self.n_agents())?;
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let mut positions = vec![Vec2::ZERO; s.positions.len()];
                for (i, &p) in perm.iter().enumerate() {
                    positions[p] = s.positions[i];
                }
                Sample {
                    step: s.step,
                    time: s.time,
                    positions,
                }
            })
            .collect();
        let mut meta = self.meta.clone();
        meta.red_index = perm[self.meta.red_index];
        meta.matrix = match &meta.matrix {
            Some(m) => Some(m.permuted(perm)?),
            None => None,
        };
        Ok(Self { samples, meta })
    }
}
