//! The world lattice and the geometric primitives everything else builds on.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::Error;

/// Index of an agent in the engine's agent table.
pub type AgentId = u32;

/// An integer cell coordinate. `x` grows rightward, `y` grows downward,
/// matching the row order of the text map format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32) -> Self {
        Coord { x, y }
    }

    /// Squared Euclidean distance. Exact, so it is the comparison key used
    /// by every ordering in the crate.
    pub fn dist2(self, other: Coord) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }

    /// Chebyshev (king-move) distance; a single pace covers exactly 1.
    pub fn chebyshev(self, other: Coord) -> i32 {
        let dx = (self.x - other.x).abs();
        let dy = (self.y - other.y).abs();
        dx.max(dy)
    }
}

/// Coordinates order by `(y, x)`; this is the tie-break order used
/// throughout the crate, so results never depend on input ordering.
impl Ord for Coord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Coord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A direction or offset in the plane. Headings are kept at unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.x * self.x + self.y * self.y)
    }

    /// Counter-clockwise perpendicular (in screen coordinates).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

pub fn euclidean_distance(a: Coord, b: Coord) -> f64 {
    libm::sqrt(a.dist2(b) as f64)
}

/// What a cell is made of. Exit cells are walkable and form the goal set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Wall,
    Free,
    Exit,
}

/// Rectangular cell lattice with per-cell kind and agent occupancy.
///
/// Invariants: an occupied cell is never a wall, and at most one agent
/// occupies any cell at any instant.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld {
    width: i32,
    height: i32,
    kinds: Vec<CellKind>,
    occupancy: Vec<Option<AgentId>>,
}

impl GridWorld {
    /// A world with every cell of the given kind and no occupants.
    pub fn new(width: i32, height: i32, kind: CellKind) -> Self {
        assert!(width >= 1 && height >= 1, "world must be at least 1x1");
        let n = (width as usize) * (height as usize);
        GridWorld {
            width,
            height,
            kinds: vec![kind; n],
            occupancy: vec![None; n],
        }
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, c: Coord) -> bool {
        c.x >= 0 && c.x < self.width && c.y >= 0 && c.y < self.height
    }

    fn idx(&self, c: Coord) -> usize {
        debug_assert!(self.in_bounds(c));
        (c.y as usize) * (self.width as usize) + (c.x as usize)
    }

    /// Cell kind, or `None` out of bounds.
    pub fn kind(&self, c: Coord) -> Option<CellKind> {
        self.in_bounds(c).then(|| self.kinds[self.idx(c)])
    }

    pub fn set_kind(&mut self, c: Coord, kind: CellKind) {
        assert!(self.in_bounds(c), "set_kind out of bounds: {c}");
        if kind == CellKind::Wall {
            assert!(
                self.occupancy[self.idx(c)].is_none(),
                "cannot turn occupied cell {c} into a wall"
            );
        }
        let i = self.idx(c);
        self.kinds[i] = kind;
    }

    pub fn occupant(&self, c: Coord) -> Option<AgentId> {
        if self.in_bounds(c) {
            self.occupancy[self.idx(c)]
        } else {
            None
        }
    }

    /// A free space: inside the world, not a wall, and not taken by
    /// another agent. Exit cells count as walkable.
    pub fn is_free(&self, c: Coord) -> bool {
        match self.kind(c) {
            Some(CellKind::Free) | Some(CellKind::Exit) => self.occupant(c).is_none(),
            _ => false,
        }
    }

    pub fn place(&mut self, c: Coord, id: AgentId) {
        assert!(self.is_free(c), "place on non-free cell {c}");
        let i = self.idx(c);
        self.occupancy[i] = Some(id);
    }

    pub fn vacate(&mut self, c: Coord) -> AgentId {
        let i = self.idx(c);
        self.occupancy[i].take().expect("vacate of empty cell")
    }

    pub fn move_occupant(&mut self, from: Coord, to: Coord) {
        let id = self.vacate(from);
        self.place(to, id);
    }

    /// All cells of the given kind, sorted by `(y, x)`.
    pub fn cells_of_kind(&self, kind: CellKind) -> Vec<Coord> {
        self.iter_coords()
            .filter(|&c| self.kinds[self.idx(c)] == kind)
            .collect()
    }

    /// All occupied cells, sorted by `(y, x)`.
    pub fn occupied_cells(&self) -> Vec<Coord> {
        self.iter_coords()
            .filter(|&c| self.occupancy[self.idx(c)].is_some())
            .collect()
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|o| o.is_some()).count()
    }

    /// Row-major coordinate iterator, i.e. already in `(y, x)` order.
    pub fn iter_coords(&self) -> impl Iterator<Item = Coord> + '_ {
        let (w, h) = (self.width, self.height);
        (0..h).flat_map(move |y| (0..w).map(move |x| Coord::new(x, y)))
    }
}

/// The exit coordinate closest to `pos`, ties broken by smallest `y`
/// then smallest `x`. The result is independent of the order of `exits`.
pub fn nearest_exit(pos: Coord, exits: &[Coord]) -> Result<Coord, Error> {
    exits
        .iter()
        .copied()
        .min_by_key(|e| (pos.dist2(*e), e.y, e.x))
        .ok_or(Error::NoExits)
}

/// Arithmetic mean of the exit coordinates; the reference point for
/// flow-axis projections.
pub fn exit_centroid(exits: &[Coord]) -> Vec2 {
    if exits.is_empty() {
        return Vec2::new(0.0, 0.0);
    }
    let n = exits.len() as f64;
    let sx: i64 = exits.iter().map(|e| e.x as i64).sum();
    let sy: i64 = exits.iter().map(|e| e.y as i64).sum();
    Vec2::new(sx as f64 / n, sy as f64 / n)
}

/// Unit direction pointing from the exit line into the room, derived from
/// the walkable non-exit neighbors of the exit cells. Falls back to
/// `(0, 1)` when the geometry gives no usable direction.
pub fn flow_axis(world: &GridWorld, exits: &[Coord]) -> Vec2 {
    let mut sum = Vec2::new(0.0, 0.0);
    for &e in exits {
        for (dx, dy) in [(0, -1), (-1, 0), (1, 0), (0, 1)] {
            let n = Coord::new(e.x + dx, e.y + dy);
            match world.kind(n) {
                Some(CellKind::Free) => {
                    sum.x += dx as f64;
                    sum.y += dy as f64;
                }
                _ => {}
            }
        }
    }
    let len = sum.norm();
    if len < 1e-9 {
        Vec2::new(0.0, 1.0)
    } else {
        Vec2::new(sum.x / len, sum.y / len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_identity_and_triples() {
        assert_eq!(euclidean_distance(Coord::new(0, 0), Coord::new(0, 0)), 0.0);
        assert_eq!(euclidean_distance(Coord::new(0, 0), Coord::new(3, 4)), 5.0);
        let d = euclidean_distance(Coord::new(2, 1), Coord::new(0, 0));
        assert!((d - 2.23606797749979).abs() < 1e-12);
    }

    #[test]
    fn distance_is_symmetric() {
        let a = Coord::new(7, -2);
        let b = Coord::new(-3, 5);
        assert_eq!(euclidean_distance(a, b), euclidean_distance(b, a));
    }

    #[test]
    fn nearest_exit_basics() {
        let pos = Coord::new(5, 5);
        assert_eq!(nearest_exit(pos, &[Coord::new(5, 0)]).unwrap(), Coord::new(5, 0));

        let exits = [Coord::new(0, 0), Coord::new(4, 4)];
        assert_eq!(nearest_exit(Coord::new(2, 1), &exits).unwrap(), Coord::new(0, 0));
    }

    #[test]
    fn nearest_exit_tie_breaks_on_y_then_x() {
        // Both exits at distance 3; (3, 0) wins on smaller y.
        let exits = [Coord::new(0, 3), Coord::new(3, 0)];
        assert_eq!(nearest_exit(Coord::new(0, 0), &exits).unwrap(), Coord::new(3, 0));
    }

    #[test]
    fn nearest_exit_rejects_empty_set() {
        assert_eq!(nearest_exit(Coord::new(0, 0), &[]), Err(Error::NoExits));
    }

    #[test]
    fn nearest_exit_is_permutation_invariant() {
        let exits = [
            Coord::new(9, 2),
            Coord::new(1, 4),
            Coord::new(4, 4),
            Coord::new(2, 0),
        ];
        let baseline = nearest_exit(Coord::new(3, 3), &exits).unwrap();
        let mut rotated = exits.to_vec();
        for _ in 0..exits.len() {
            rotated.rotate_left(1);
            assert_eq!(nearest_exit(Coord::new(3, 3), &rotated).unwrap(), baseline);
        }
    }

    #[test]
    fn is_free_definition() {
        let mut world = GridWorld::new(4, 4, CellKind::Free);
        world.set_kind(Coord::new(0, 0), CellKind::Wall);
        world.set_kind(Coord::new(1, 0), CellKind::Exit);
        world.place(Coord::new(2, 2), 7);

        assert!(!world.is_free(Coord::new(0, 0))); // wall
        assert!(world.is_free(Coord::new(1, 0))); // unoccupied exit is walkable
        assert!(!world.is_free(Coord::new(2, 2))); // another agent blocks
        assert!(!world.is_free(Coord::new(-1, 2))); // out of bounds
        assert!(!world.is_free(Coord::new(4, 0)));
    }

    #[test]
    fn occupancy_moves_preserve_single_occupancy() {
        let mut world = GridWorld::new(3, 3, CellKind::Free);
        world.place(Coord::new(0, 0), 1);
        world.move_occupant(Coord::new(0, 0), Coord::new(1, 1));
        assert_eq!(world.occupant(Coord::new(0, 0)), None);
        assert_eq!(world.occupant(Coord::new(1, 1)), Some(1));
        assert_eq!(world.occupied_count(), 1);
    }

    #[test]
    fn flow_axis_points_inward_from_a_top_wall_exit() {
        let mut world = GridWorld::new(5, 5, CellKind::Free);
        for x in 0..5 {
            world.set_kind(Coord::new(x, 0), CellKind::Wall);
        }
        world.set_kind(Coord::new(2, 0), CellKind::Exit);
        let axis = flow_axis(&world, &[Coord::new(2, 0)]);
        assert!((axis.x - 0.0).abs() < 1e-12);
        assert!((axis.y - 1.0).abs() < 1e-12);
    }
}
