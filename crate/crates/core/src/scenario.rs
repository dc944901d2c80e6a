//! Scenario description: world geometry, spawn region, crowd, and the
//! behavior parameters of a run.

use alloc::vec::Vec;

use crate::error::Error;
use crate::grid::{CellKind, Coord, GridWorld};

/// Which reading of "closest free space" the agents use when picking a
/// target inside their field of vision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetRule {
    /// Prefer the free cell closest to the agent's nearest exit,
    /// tie-broken by closeness to the agent.
    #[default]
    NearestToExit,
    /// Prefer the free cell closest to the agent itself, tie-broken by
    /// closeness to the exit.
    NearestToAgent,
}

/// How simultaneous claims on the same cell are settled within a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// All agents decide against the tick-start occupancy; a cell claimed
    /// by two or more agents goes to none of them. Competition can stall
    /// the flow outright, which is where clogs and exit bursts come from.
    #[default]
    Parallel,
    /// Agents act one at a time in the shuffled order, each seeing the
    /// world as already mutated this tick; the earlier agent wins every
    /// contested cell, so flow never deadlocks.
    Sequential,
}

impl UpdateRule {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateRule::Parallel => "parallel",
            UpdateRule::Sequential => "sequential",
        }
    }

    pub fn parse(s: &str) -> Option<UpdateRule> {
        match s {
            "parallel" => Some(UpdateRule::Parallel),
            "sequential" => Some(UpdateRule::Sequential),
            _ => None,
        }
    }
}

impl TargetRule {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetRule::NearestToExit => "nearest_to_exit",
            TargetRule::NearestToAgent => "nearest_to_agent",
        }
    }

    pub fn parse(s: &str) -> Option<TargetRule> {
        match s {
            "nearest_to_exit" => Some(TargetRule::NearestToExit),
            "nearest_to_agent" => Some(TargetRule::NearestToAgent),
            _ => None,
        }
    }
}

/// Tunable perception and instrumentation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BehaviorParams {
    /// Field-of-vision radius in cell units.
    pub fov_radius: f64,
    /// Half-angle of the vision sector around the heading, in degrees.
    /// 90 gives the forward half-plane, 180 the full disc.
    pub fov_half_angle_deg: f64,
    /// Depth, in cells inward from the exit, of the instrumented exit
    /// region used for the density series.
    pub exit_region_depth: u32,
    pub target_rule: TargetRule,
    pub update_rule: UpdateRule,
    /// Under the parallel rule, the probability that a cell claimed by
    /// two or more agents goes to none of them this tick (otherwise the
    /// shuffle-order winner takes it). Ignored by the sequential rule.
    pub friction: f64,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        BehaviorParams {
            fov_radius: 3.0,
            fov_half_angle_deg: 90.0,
            exit_region_depth: 3,
            target_rule: TargetRule::NearestToExit,
            update_rule: UpdateRule::Parallel,
            friction: 0.92,
        }
    }
}

impl BehaviorParams {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.fov_radius > 0.0) {
            return Err(Error::InvalidScenario("fov_radius must be positive"));
        }
        if !(self.fov_half_angle_deg > 0.0 && self.fov_half_angle_deg <= 180.0) {
            return Err(Error::InvalidScenario(
                "fov_half_angle_deg must be in (0, 180]",
            ));
        }
        if self.exit_region_depth < 1 {
            return Err(Error::InvalidScenario("exit_region_depth must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.friction) {
            return Err(Error::InvalidScenario("friction must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Axis-aligned inclusive cell rectangle. `Rect::empty()` contains nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Rect {
    pub const fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub const fn empty() -> Self {
        Rect { x0: 0, y0: 0, x1: -1, y1: -1 }
    }

    pub fn is_empty(&self) -> bool {
        self.x1 < self.x0 || self.y1 < self.y0
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.x >= self.x0 && c.x <= self.x1 && c.y >= self.y0 && c.y <= self.y1
    }

    pub fn cell_count(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            ((self.x1 - self.x0 + 1) as usize) * ((self.y1 - self.y0 + 1) as usize)
        }
    }

    /// Row-major iteration, i.e. `(y, x)` order.
    pub fn iter(&self) -> impl Iterator<Item = Coord> + '_ {
        let (x0, x1, y0, y1) = (self.x0, self.x1, self.y0, self.y1);
        (y0..=y1).flat_map(move |y| (x0..=x1).map(move |x| Coord::new(x, y)))
    }
}

/// Everything a run needs: geometry, goal set, spawn region, crowd size,
/// behavior parameters, seed, and the tick bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// World template with no occupants; the engine clones it at spawn.
    pub world: GridWorld,
    /// Exactly the `Exit`-kind cells of the world, sorted by `(y, x)`.
    pub exits: Vec<Coord>,
    pub spawn_region: Rect,
    pub crowd_size: u32,
    pub params: BehaviorParams,
    pub seed: u64,
    pub max_ticks: u32,
}

impl Scenario {
    /// Free cells in the spawn region, in `(y, x)` order.
    pub fn spawn_cells(&self) -> Vec<Coord> {
        self.spawn_region
            .iter()
            .filter(|&c| self.world.is_free(c))
            .collect()
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.params.validate()?;
        if self.max_ticks < 1 {
            return Err(Error::InvalidScenario("max_ticks must be >= 1"));
        }
        if self.world.occupied_count() != 0 {
            return Err(Error::InvalidScenario(
                "scenario world must have no occupants",
            ));
        }
        if self.exits != self.world.cells_of_kind(CellKind::Exit) {
            return Err(Error::InvalidScenario(
                "exits must be exactly the Exit-kind cells, sorted by (y, x)",
            ));
        }
        if self.crowd_size > 0 && self.exits.is_empty() {
            return Err(Error::NoExits);
        }
        for c in self.spawn_region.iter() {
            if self.world.kind(c) != Some(CellKind::Free) {
                return Err(Error::InvalidScenario(
                    "spawn region must lie on Free cells inside the world",
                ));
            }
        }
        let capacity = self.spawn_cells().len();
        if (self.crowd_size as usize) > capacity {
            return Err(Error::SpawnOverflow {
                capacity,
                crowd: self.crowd_size,
            });
        }
        Ok(())
    }
}
