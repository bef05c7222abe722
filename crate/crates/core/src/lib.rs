//! Simulation and analysis of swarms whose agents attract and repel each
//! other through non-reciprocal pairwise preferences.
//!
//! * [`dynamics`]: fully observed integration of the pair law.
//! * [`scenario`]: preference matrices, initial layouts, named scenarios.
//! * [`hardware`]: sector sensors, omni-wheel actuation, closed-loop runs.
//! * [`analysis`]: drift, shape, period metrics and regime labels.
//! * [`io`]: config files, trajectory files, SVG renders and sweeps.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod hardware;
pub mod io;
pub mod scenario;
pub mod trajectory;
pub mod vec2;

pub use error::{Error, ErrorKind, Result};
pub use vec2::Vec2;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
