//! Arch measurement: the exit-attached crowd component, its major/minor
//! axes, the depth histogram, and double-arch and onset detection.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{exit_centroid, Coord, GridWorld, Vec2};

/// Default valley depth, as a fraction of the smaller neighboring peak,
/// below which two histogram peaks count as a double arch.
pub const DEFAULT_VALLEY_FRACTION: f64 = 0.5;
/// Default crowd-component size that counts as a formed arch.
pub const DEFAULT_ONSET_MIN_COMPONENT: u32 = 50;
/// Default number of consecutive ticks the component must persist.
pub const DEFAULT_ONSET_PERSIST: u32 = 20;

/// Per-tick snapshot of the crowd shape in front of the exit.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchMeasurement {
    pub tick: u32,
    /// Extent of the crowd component along the flow direction, in cells.
    pub major_axis_len: f64,
    /// Lateral extent at the door line, in cells.
    pub minor_axis_len: f64,
    /// Agents in the exit-attached crowd component.
    pub component_size: u32,
    /// Lateral offset (relative to the exit center, rounded) of the first
    /// entry of `depth_profile`.
    pub lateral_min: i32,
    /// Boundary profile: per lateral offset, the component's extent along
    /// the flow axis (0 where the offset holds no component cell).
    pub depth_profile: Vec<f64>,
    /// Per flow-axis depth, the number of component agents at that depth.
    pub depth_histogram: Vec<u32>,
    pub double_arch: bool,
}

impl ArchMeasurement {
    fn empty(tick: u32) -> Self {
        ArchMeasurement {
            tick,
            major_axis_len: 0.0,
            minor_axis_len: 0.0,
            component_size: 0,
            lateral_min: 0,
            depth_profile: Vec::new(),
            depth_histogram: Vec::new(),
            double_arch: false,
        }
    }
}

/// The crowd component: positions of agents 8-connected (through occupied
/// cells) to some agent within Chebyshev distance 1 of an exit cell.
/// Sorted by `(y, x)`; empty when nobody stands next to the exit.
pub fn crowd_component(world: &GridWorld, exits: &[Coord]) -> Vec<Coord> {
    let mut visited = vec![false; (world.width() as usize) * (world.height() as usize)];
    let index =
        |c: Coord| (c.y as usize) * (world.width() as usize) + (c.x as usize);

    let mut stack: Vec<Coord> = Vec::new();
    for &e in exits {
        for dy in -1..=1 {
            for dx in -1..=1 {
                let c = Coord::new(e.x + dx, e.y + dy);
                if world.occupant(c).is_some() && !visited[index(c)] {
                    visited[index(c)] = true;
                    stack.push(c);
                }
            }
        }
    }

    let mut component = Vec::new();
    while let Some(c) = stack.pop() {
        component.push(c);
        for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let n = Coord::new(c.x + dx, c.y + dy);
                if world.in_bounds(n) && world.occupant(n).is_some() && !visited[index(n)] {
                    visited[index(n)] = true;
                    stack.push(n);
                }
            }
        }
    }
    component.sort_unstable();
    component
}

/// Major and minor extents of the component, in cells.
///
/// Major: largest flow-axis projection from the exit center, plus one cell
/// of extent. Minor: lateral spread of the cells at the door line (flow
/// projection below 1). Both zero for an empty component.
pub fn arch_axes(component: &[Coord], exit_center: Vec2, flow_axis: Vec2) -> (f64, f64) {
    if component.is_empty() {
        return (0.0, 0.0);
    }
    let lat_axis = flow_axis.perp();
    let mut max_proj = f64::NEG_INFINITY;
    let mut band_lat_min = f64::INFINITY;
    let mut band_lat_max = f64::NEG_INFINITY;
    for &c in component {
        let rel_x = c.x as f64 - exit_center.x;
        let rel_y = c.y as f64 - exit_center.y;
        let proj = rel_x * flow_axis.x + rel_y * flow_axis.y;
        max_proj = max_proj.max(proj);
        if proj < 1.0 {
            let l = rel_x * lat_axis.x + rel_y * lat_axis.y;
            band_lat_min = band_lat_min.min(l);
            band_lat_max = band_lat_max.max(l);
        }
    }
    let major = max_proj + 1.0;
    let minor = if band_lat_min.is_finite() {
        band_lat_max - band_lat_min + 1.0
    } else {
        0.0
    };
    (major, minor)
}

/// Occupancy histogram of the component by flow-axis depth; negative
/// projections (behind the door line) fold into depth 0.
pub fn depth_histogram(component: &[Coord], exit_center: Vec2, flow_axis: Vec2) -> Vec<u32> {
    let mut hist: Vec<u32> = Vec::new();
    for &c in component {
        let proj = (c.x as f64 - exit_center.x) * flow_axis.x
            + (c.y as f64 - exit_center.y) * flow_axis.y;
        let d = libm::round(proj).max(0.0) as usize;
        if d >= hist.len() {
            hist.resize(d + 1, 0);
        }
        hist[d] += 1;
    }
    hist
}

/// Peak plateaus of a histogram: maximal runs of equal positive values
/// strictly higher than both neighbors (array ends count as drops).
/// Returns `(start, end, value)` per peak.
fn peaks(hist: &[u32]) -> Vec<(usize, usize, u32)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < hist.len() {
        let v = hist[i];
        let mut j = i;
        while j + 1 < hist.len() && hist[j + 1] == v {
            j += 1;
        }
        let left_drop = i == 0 || hist[i - 1] < v;
        let right_drop = j == hist.len() - 1 || hist[j + 1] < v;
        if v > 0 && left_drop && right_drop {
            out.push((i, j, v));
        }
        i = j + 1;
    }
    out
}

/// Number of local maxima of the depth histogram.
pub fn peak_count(hist: &[u32]) -> usize {
    peaks(hist).len()
}

/// Number of modes once noise peaks are merged away: scanning left to
/// right, a new mode starts only where the valley drops to at most
/// `valley_fraction` of the smaller of the two peaks it separates.
pub fn significant_mode_count(hist: &[u32], valley_fraction: f64) -> usize {
    let peaks = peaks(hist);
    let Some(&(_, first_end, first_v)) = peaks.first() else {
        return 0;
    };
    let mut modes = 1;
    let mut mode_value = first_v;
    let mut prev_end = first_end;
    for &(start, end, v) in &peaks[1..] {
        let valley = hist[prev_end + 1..start].iter().copied().min().unwrap_or(0);
        if (valley as f64) <= valley_fraction * (mode_value.min(v) as f64) {
            modes += 1;
            mode_value = v;
        } else {
            mode_value = mode_value.max(v);
        }
        prev_end = end;
    }
    modes
}

/// True when the histogram has two peaks separated by a valley no deeper
/// than `valley_fraction` of the smaller peak.
pub fn double_arch_from_histogram(hist: &[u32], valley_fraction: f64) -> bool {
    assert!(
        valley_fraction > 0.0 && valley_fraction < 1.0,
        "valley_fraction must be in (0, 1)"
    );
    let peaks = peaks(hist);
    for pair in peaks.windows(2) {
        let (_, end_a, va) = pair[0];
        let (start_b, _, vb) = pair[1];
        let valley = hist[end_a + 1..start_b].iter().copied().min();
        if let Some(v) = valley {
            if (v as f64) <= valley_fraction * (va.min(vb) as f64) {
                return true;
            }
        }
    }
    false
}

/// Double-arch test straight from a world snapshot.
pub fn detect_double_arch(
    world: &GridWorld,
    exits: &[Coord],
    flow_axis: Vec2,
    valley_fraction: f64,
) -> bool {
    let component = crowd_component(world, exits);
    let hist = depth_histogram(&component, exit_centroid(exits), flow_axis);
    double_arch_from_histogram(&hist, valley_fraction)
}

/// First tick from which `component_size >= min_component` holds for
/// `persist` consecutive measurements; `None` if that never happens.
pub fn arch_onset(
    measurements: &[ArchMeasurement],
    min_component: u32,
    persist: u32,
) -> Option<u32> {
    assert!(persist >= 1, "persist must be >= 1");
    let mut run_start: Option<(u32, u32)> = None; // (tick, length)
    for m in measurements {
        if m.component_size >= min_component {
            let (tick, len) = match run_start {
                Some((t, l)) => (t, l + 1),
                None => (m.tick, 1),
            };
            if len >= persist {
                return Some(tick);
            }
            run_start = Some((tick, len));
        } else {
            run_start = None;
        }
    }
    None
}

/// Full per-tick measurement used by the engine's run loop.
pub fn measure(
    world: &GridWorld,
    exits: &[Coord],
    exit_center: Vec2,
    flow_axis: Vec2,
    tick: u32,
    valley_fraction: f64,
) -> ArchMeasurement {
    let component = crowd_component(world, exits);
    if component.is_empty() {
        return ArchMeasurement::empty(tick);
    }
    let (major, minor) = arch_axes(&component, exit_center, flow_axis);
    let hist = depth_histogram(&component, exit_center, flow_axis);
    let double_arch = double_arch_from_histogram(&hist, valley_fraction);

    let lat_axis = flow_axis.perp();
    let mut lat_lo = i32::MAX;
    let mut lat_hi = i32::MIN;
    for &c in &component {
        let l = (c.x as f64 - exit_center.x) * lat_axis.x
            + (c.y as f64 - exit_center.y) * lat_axis.y;
        let l = libm::round(l) as i32;
        lat_lo = lat_lo.min(l);
        lat_hi = lat_hi.max(l);
    }
    let mut profile = vec![0.0f64; (lat_hi - lat_lo + 1) as usize];
    for &c in &component {
        let rel_x = c.x as f64 - exit_center.x;
        let rel_y = c.y as f64 - exit_center.y;
        let l = libm::round(rel_x * lat_axis.x + rel_y * lat_axis.y) as i32;
        let extent = rel_x * flow_axis.x + rel_y * flow_axis.y + 1.0;
        let slot = &mut profile[(l - lat_lo) as usize];
        if extent > *slot {
            *slot = extent;
        }
    }

    ArchMeasurement {
        tick,
        major_axis_len: major,
        minor_axis_len: minor,
        component_size: component.len() as u32,
        lateral_min: lat_lo,
        depth_profile: profile,
        depth_histogram: hist,
        double_arch,
    }
}
