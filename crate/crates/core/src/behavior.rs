//! Per-agent decision rules: heading, field of vision, target selection,
//! single-pace movement, and the exit condition.

use alloc::vec::Vec;

use crate::error::Error;
use crate::grid::{euclidean_distance, nearest_exit, Coord, GridWorld, Vec2};
use crate::scenario::{BehaviorParams, TargetRule};

/// Slack applied to the vision-sector boundary tests so that cells lying
/// exactly on the radius or on the angular edge are included.
const EDGE_EPS: f64 = 1e-9;

/// Outcome of one agent's turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// Step onto the given cell; always at Chebyshev distance 1 (one pace).
    MoveTo(Coord),
    /// No reachable free space this turn.
    Stop,
    /// The agent is within distance 1 of an exit and leaves the world.
    Exit,
}

/// Unit direction from `pos` toward its nearest exit.
///
/// Undefined (and an error) when the agent stands on the exit itself;
/// callers test the exit condition first.
pub fn compute_heading(pos: Coord, exits: &[Coord]) -> Result<Vec2, Error> {
    let e = nearest_exit(pos, exits)?;
    let dx = (e.x - pos.x) as f64;
    let dy = (e.y - pos.y) as f64;
    let len = libm::sqrt(dx * dx + dy * dy);
    if len == 0.0 {
        return Err(Error::AlreadyAtExit);
    }
    Ok(Vec2::new(dx / len, dy / len))
}

/// All in-bounds cells the agent perceives: a circular sector of radius
/// `fov_radius` and half-angle `fov_half_angle_deg` centered on `heading`.
///
/// Wall and occupied cells are included (filtering is the target rule's
/// job); the agent's own cell is not. Sorted by `(y, x)`.
pub fn field_of_vision(
    pos: Coord,
    heading: Vec2,
    params: &BehaviorParams,
    world: &GridWorld,
) -> Vec<Coord> {
    let r = params.fov_radius;
    let r2 = r * r + EDGE_EPS;
    let cos_half = libm::cos(params.fov_half_angle_deg.to_radians());
    let reach = libm::ceil(r) as i32;

    let mut out = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            if dx == 0 && dy == 0 {
                continue;
            }
            let c = Coord::new(pos.x + dx, pos.y + dy);
            if !world.in_bounds(c) {
                continue;
            }
            let d2 = (dx as i64 * dx as i64 + dy as i64 * dy as i64) as f64;
            if d2 > r2 {
                continue;
            }
            // angle(heading, c - pos) <= half_angle, tested without acos:
            // dot >= |c - pos| * cos(half_angle).
            let dist = libm::sqrt(d2);
            let dot = heading.x * dx as f64 + heading.y * dy as f64;
            if dot + EDGE_EPS >= cos_half * dist {
                out.push(c);
            }
        }
    }
    out
}

/// The free cell in the field of vision the agent moves toward, or `None`
/// when every visible cell is blocked (the stop-on-block rule).
///
/// Under `NearestToExit` the winner minimizes distance to the agent's
/// nearest exit, tie-broken by distance to the agent, then `(y, x)`;
/// `NearestToAgent` swaps the first two keys.
pub fn choose_target(
    pos: Coord,
    fov: &[Coord],
    world: &GridWorld,
    exits: &[Coord],
    rule: TargetRule,
) -> Option<Coord> {
    let goal = nearest_exit(pos, exits).ok()?;
    fov.iter()
        .copied()
        .filter(|&c| world.is_free(c))
        .min_by_key(|&c| {
            let to_goal = c.dist2(goal);
            let to_agent = c.dist2(pos);
            match rule {
                TargetRule::NearestToExit => (to_goal, to_agent, c.y, c.x),
                TargetRule::NearestToAgent => (to_agent, to_goal, c.y, c.x),
            }
        })
}

/// One pace toward `target`: the free 8-neighbor of `pos` closest to
/// `target`, tie-broken by `(y, x)`. `None` when all neighbors are blocked.
pub fn step_toward(pos: Coord, target: Coord, world: &GridWorld) -> Option<Coord> {
    debug_assert!(target != pos);
    let mut best: Option<(i64, Coord)> = None;
    for dy in -1..=1 {
        for dx in -1..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let n = Coord::new(pos.x + dx, pos.y + dy);
            if !world.is_free(n) {
                continue;
            }
            let key = n.dist2(target);
            match best {
                Some((bk, bc)) if (bk, bc.y, bc.x) <= (key, n.y, n.x) => {}
                _ => best = Some((key, n)),
            }
        }
    }
    best.map(|(_, c)| c)
}

/// The exit condition: distance to the nearest exit strictly below 1,
/// which on the integer lattice means standing on an exit cell.
pub fn has_exited(pos: Coord, exits: &[Coord]) -> bool {
    match nearest_exit(pos, exits) {
        Ok(e) => euclidean_distance(pos, e) < 1.0,
        Err(_) => false,
    }
}

/// One full decision: exit test, heading, vision scan, target choice, pace.
pub fn decide(
    pos: Coord,
    world: &GridWorld,
    exits: &[Coord],
    params: &BehaviorParams,
) -> Decision {
    if has_exited(pos, exits) {
        return Decision::Exit;
    }
    let heading = match compute_heading(pos, exits) {
        Ok(h) => h,
        Err(_) => return Decision::Stop,
    };
    let fov = field_of_vision(pos, heading, params, world);
    match choose_target(pos, &fov, world, exits, params.target_rule)
        .and_then(|target| step_toward(pos, target, world))
    {
        Some(cell) => Decision::MoveTo(cell),
        None => Decision::Stop,
    }
}
