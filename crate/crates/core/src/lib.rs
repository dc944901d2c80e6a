//! Deterministic grid-based crowd egress microsimulation.
//!
//! Agents on a cell lattice head for the nearest exit, scan a sector-shaped
//! field of vision for the best free cell, and pace one cell per tick;
//! conflicts are settled by sequential occupancy claims in a seeded random
//! order, so every run replays bit-identically from its scenario. On top of
//! the engine sit the analysis passes: exit-region density and burstiness,
//! clogging and calm detection, and arch geometry (major/minor axes, depth
//! histograms, double-arch and onset detection).
//!
//! The crate is `no_std` (with `alloc`); all floating-point math goes
//! through `libm` so results do not depend on the host's libm.

#![no_std]

extern crate alloc;

pub mod agent;
pub mod arch;
pub mod behavior;
pub mod engine;
mod error;
pub mod grid;
pub mod metrics;
pub mod rng;
pub mod scenario;

pub use agent::{Agent, AgentState};
pub use arch::{arch_onset, crowd_component, ArchMeasurement};
pub use behavior::{decide, has_exited, Decision};
pub use engine::{run, run_with, spawn, SimState};
pub use error::Error;
pub use grid::{
    euclidean_distance, nearest_exit, AgentId, CellKind, Coord, GridWorld, Vec2,
};
pub use metrics::{burstiness_index, detect_calm, detect_clogging, MetricsLog, MetricsRow};
pub use scenario::{BehaviorParams, Rect, Scenario, TargetRule, UpdateRule};
