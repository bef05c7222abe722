//! Preference matrices, initial conditions and the named experimental scenarios.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::SwarmState;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Square matrix of preference coefficients; entry (i, j) is how strongly
/// agent i is drawn toward agent j. The diagonal is held at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    n: usize,
    k: Vec<f64>,
}

impl PreferenceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.k.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Relabels agents: agent `perm[i]` of the result is agent `i` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        let mut k = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                k[perm[i] * self.n + perm[j]] = self.get(i, j);
            }
        }
        Ok(Self { n: self.n, k })
    }
}

impl Serialize for PreferenceMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PreferenceMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        build_general_matrix(&rows).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::invalid("permutation", format!("{perm:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// Validates an arbitrary square coefficient table. Nonzero diagonal
/// entries are zeroed with a warning.
pub fn build_general_matrix(entries: &[Vec<f64>]) -> Result<PreferenceMatrix> {
    let n = entries.len();
    if n < 2 {
        return Err(Error::invalid("matrix", format!("need at least 2 agents, got {n}")));
    }
    let mut k = Vec::with_capacity(n * n);
    for (i, row) in entries.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: row.len(),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::invalid(format!("matrix[{i}][{j}]"), "entry is not finite"));
            }
            if i == j && v != 0.0 {
                log::warn!("preference matrix diagonal entry [{i}][{i}] = {v} ignored");
                k.push(0.0);
            } else {
                k.push(v);
            }
        }
    }
    Ok(PreferenceMatrix { n, k })
}

/// The three-parameter red/blue family used by the robot experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoleParams {
    pub k_p: f64,
    pub k_m: f64,
    pub k_a: f64,
}

impl RoleParams {
    pub const fn new(k_p: f64, k_m: f64, k_a: f64) -> Self {
        Self { k_p, k_m, k_a }
    }

    /// Red agent's preference for every blue agent.
    pub fn red_to_blue(&self) -> f64 {
        self.k_p + self.k_m
    }

    /// A blue agent's preference for the red agent.
    pub fn blue_to_red(&self) -> f64 {
        self.k_p - self.k_m
    }

    pub fn blue_to_blue(&self) -> f64 {
        self.k_a
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k_p", self.k_p), ("k_m", self.k_m), ("k_a", self.k_a)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Expands the parameters into an `n`-agent matrix with the red agent at `red_index`.
    pub fn matrix(&self, n: usize, red_index: usize) -> Result<PreferenceMatrix> {
        self.validate()?;
        if n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 agents, got {n}")));
        }
        if red_index >= n {
            return Err(Error::invalid("red_index", format!("{red_index} out of range for {n} agents")));
        }
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = if i == j {
                    0.0
                } else if i == red_index {
                    self.red_to_blue()
                } else if j == red_index {
                    self.blue_to_red()
                } else {
                    self.blue_to_blue()
                };
            }
        }
        Ok(PreferenceMatrix { n, k })
    }
}

/// Five agents, agent 0 red.
pub fn build_five_robot_matrix(k_p: f64, k_m: f64, k_a: f64) -> Result<PreferenceMatrix> {
    RoleParams::new(k_p, k_m, k_a).matrix(5, 0)
}

/// Preferred separation 1/k of a reciprocal pair.
pub fn equilibrium_distance(k: f64) -> Result<f64> {
    if k > 0.0 && k.is_finite() {
        Ok(1.0 / k)
    } else {
        Err(Error::NoEquilibrium { k })
    }
}

fn check_layout(n: usize, radius: f64, red_index: usize, min_n: usize) -> Result<()> {
    if n < min_n {
        return Err(Error::invalid("n", format!("need at least {min_n} agents, got {n}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", format!("must be positive and finite, got {radius}")));
    }
    if red_index >= n {
        return Err(Error::invalid("red_index", format!("{red_index} out of range for {n} agents")));
    }
    Ok(())
}

/// Regular n-gon of circumradius `radius`; the red agent sits at angle 0 and
/// the others follow counter-clockwise in index order.
pub fn initial_polygon(n: usize, radius: f64, red_index: usize) -> Result<SwarmState> {
    check_layout(n, radius, red_index, 2)?;
    let mut positions = vec![Vec2::ZERO; n];
    for m in 0..n {
        positions[(red_index + m) % n] = Vec2::from_polar(radius, TAU * m as f64 / n as f64);
    }
    SwarmState::new(positions, 0.0)
}

/// Red agent at the origin, the rest on a regular (n-1)-gon around it.
pub fn initial_surrounded(n: usize, radius: f64, red_index: usize) -> Result<SwarmState> {
    check_layout(n, radius, red_index, 3)?;
    let ring = n - 1;
    let positions = (0..n)
        .scan(0usize, |m, i| {
            Some(if i == red_index {
                Vec2::ZERO
            } else {
                let p = Vec2::from_polar(radius, TAU * *m as f64 / ring as f64);
                *m += 1;
                p
            })
        })
        .collect();
    SwarmState::new(positions, 0.0)
}

/// Displaces every coordinate by an independent uniform draw in
/// [-magnitude, magnitude].
pub fn perturb(state: &SwarmState, magnitude: f64, seed: u64) -> Result<SwarmState> {
    if !(magnitude >= 0.0 && magnitude.is_finite()) {
        return Err(Error::invalid("perturbation", format!("must be >= 0, got {magnitude}")));
    }
    if magnitude == 0.0 {
        return Ok(state.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = state
        .positions()
        .iter()
        .map(|p| {
            let dx = rng.random_range(-magnitude..=magnitude);
            let dy = rng.random_range(-magnitude..=magnitude);
            *p + Vec2::new(dx, dy)
        })
        .collect();
    SwarmState::new(positions, state.time())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    Polygon,
    Surrounded,
}

impl InitialKind {
    pub fn build(self, n: usize, radius: f64, red_index: usize) -> Result<SwarmState> {
        match self {
            InitialKind::Polygon => initial_polygon(n, radius, red_index),
            InitialKind::Surrounded => initial_surrounded(n, radius, red_index),
        }
    }
}

pub const DEFAULT_RADIUS: f64 = 1.0;
pub const DEFAULT_PERTURBATION: f64 = 1e-3;

/// A named experimental setup: parameters plus the layout they start from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NamedScenario {
    pub name: &'static str,
    pub params: RoleParams,
    pub initial: InitialKind,
}

pub const NAMED_SCENARIOS: [NamedScenario; 3] = [
    NamedScenario {
        name: "fig6",
        params: RoleParams::new(2.0, 0.5, 2.0),
        initial: InitialKind::Polygon,
    },
    NamedScenario {
        name: "fig7",
        params: RoleParams::new(2.0, -1.0, 2.0),
        initial: InitialKind::Surrounded,
    },
    NamedScenario {
        name: "fig8",
        params: RoleParams::new(1.6, 2.4, 1.6),
        initial: InitialKind::Surrounded,
    },
];

pub fn lookup(name: &str) -> Option<&'static NamedScenario> {
    NAMED_SCENARIOS.iter().find(|s| s.name == name)
}

/// Everything needed to start a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub matrix: PreferenceMatrix,
    pub params: Option<RoleParams>,
    pub initial: SwarmState,
    pub red_index: usize,
}

impl ScenarioSpec {
    pub fn new(
        name: impl Into<String>,
        matrix: PreferenceMatrix,
        params: Option<RoleParams>,
        initial: SwarmState,
        red_index: usize,
    ) -> Result<Self> {
        if matrix.n() != initial.len() {
            return Err(Error::Dimension {
                expected: matrix.n(),
                found: initial.len(),
            });
        }
        if red_index >= initial.len() {
            return Err(Error::invalid("red_index", format!("{red_index} out of range for {} agents", initial.len())));
        }
        Ok(Self {
            name: name.into(),
            matrix,
            params,
            initial,
            red_index,
        })
    }

    /// Five-agent red/blue scenario from parameters and a layout.
    pub fn from_params(
        name: impl Into<String>,
        params: RoleParams,
        initial: InitialKind,
        radius: f64,
        perturbation: f64,
        seed: u64,
    ) -> Result<Self> {
        let matrix = params.matrix(5, 0)?;
        let state = perturb(&initial.build(5, radius, 0)?, perturbation, seed)?;
        Self::new(name, matrix, Some(params), state, 0)
    }

    /// One of the registered scenarios with the default radius and perturbation.
    pub fn named(name: &str, seed: u64) -> Result<Self> {
        Self::named_with(name, DEFAULT_RADIUS, DEFAULT_PERTURBATION, seed)
    }

    pub fn named_with(name: &str, radius: f64, perturbation: f64, seed: u64) -> Result<Self> {
        let s = lookup(name).ok_or_else(|| {
            let known: Vec<_> = NAMED_SCENARIOS.iter().map(|s| s.name).collect();
            Error::invalid("scenario", format!("unknown scenario `{name}` (known: {})", known.join(", ")))
        })?;
        Self::from_params(s.name, s.params, s.initial, radius, perturbation, seed)
    }
}
