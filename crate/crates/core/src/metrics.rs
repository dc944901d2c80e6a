//! Exit-door instrumentation: the density series plus the burstiness,
//! clogging, and calm detectors that run over tick logs.

use alloc::vec::Vec;

use crate::error::Error;
use crate::grid::{exit_centroid, flow_axis, CellKind, Coord, GridWorld};

/// Default clogging window length, in ticks.
pub const DEFAULT_CLOG_MIN_WINDOW: u32 = 20;
/// Default calm window length, in ticks.
pub const DEFAULT_CALM_WINDOW: u32 = 20;
/// Default maximum density spread within a calm interval.
pub const DEFAULT_CALM_MAX_RANGE: u32 = 2;

/// Default clogging density floor: half the exit-region cell count,
/// never below one.
pub fn default_clog_min_density(region_cells: usize) -> u32 {
    ((region_cells / 2) as u32).max(1)
}

/// One row of the per-tick log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricsRow {
    pub tick: u32,
    /// Agents standing inside the exit region.
    pub exit_region_density: u32,
    pub exits_this_tick: u32,
    pub cumulative_exits: u32,
    pub active_count: u32,
}

/// Per-tick log of a whole run; ticks are consecutive starting at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsLog {
    pub rows: Vec<MetricsRow>,
    pub crowd_size: u32,
}

impl MetricsLog {
    pub fn exits_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.exits_this_tick as f64).collect()
    }
}

/// The instrumented band of cells just inside the exit: the exit cells
/// themselves plus every non-wall cell at most `depth` rows inward, within
/// the exit's lateral span widened by one cell on each side.
///
/// Pure geometry; agent positions never change the region.
pub fn exit_region(world: &GridWorld, exits: &[Coord], depth: u32) -> Vec<Coord> {
    assert!(depth >= 1, "exit region depth must be >= 1");
    if exits.is_empty() {
        return Vec::new();
    }
    let center = exit_centroid(exits);
    let flow = flow_axis(world, exits);
    let lat = flow.perp();

    let lat_of = |c: Coord| (c.x as f64 - center.x) * lat.x + (c.y as f64 - center.y) * lat.y;
    let proj_of = |c: Coord| (c.x as f64 - center.x) * flow.x + (c.y as f64 - center.y) * flow.y;

    let mut lat_min = f64::INFINITY;
    let mut lat_max = f64::NEG_INFINITY;
    for &e in exits {
        let v = lat_of(e);
        lat_min = lat_min.min(v);
        lat_max = lat_max.max(v);
    }

    let mut out = Vec::new();
    for c in world.iter_coords() {
        if world.kind(c) == Some(CellKind::Exit) {
            out.push(c);
            continue;
        }
        if world.kind(c) != Some(CellKind::Free) {
            continue;
        }
        let p = proj_of(c);
        if p < 0.5 || p > depth as f64 + 0.5 {
            continue;
        }
        let l = lat_of(c);
        if l >= lat_min - 1.0 - 1e-9 && l <= lat_max + 1.0 + 1e-9 {
            out.push(c);
        }
    }
    out.sort_unstable();
    out
}

/// Burstiness coefficient `B = (sigma - mu) / (sigma + mu)` of a series,
/// with population standard deviation. `B` lies in `[-1, 1]`; `-1` for a
/// constant positive series, positive for burstier-than-Poisson.
pub fn burstiness_index(series: &[f64]) -> Result<f64, Error> {
    if series.is_empty() || series.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateSeries);
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sigma = libm::sqrt(var);
    Ok((sigma - mean) / (sigma + mean))
}

/// Maximal runs of ticks with zero exits and density at least
/// `min_density`, kept when at least `min_window` ticks long. Returned as
/// inclusive `(start_tick, end_tick)` pairs, disjoint and sorted.
pub fn detect_clogging(
    log: &MetricsLog,
    min_window: u32,
    min_density: u32,
) -> Vec<(u32, u32)> {
    assert!(min_window >= 1, "min_window must be >= 1");
    let clogged = |r: &MetricsRow| r.exits_this_tick == 0 && r.exit_region_density >= min_density;

    let mut out = Vec::new();
    let mut run_start: Option<u32> = None;
    for row in &log.rows {
        match (clogged(row), run_start) {
            (true, None) => run_start = Some(row.tick),
            (false, Some(start)) => {
                let end = row.tick - 1;
                if end - start + 1 >= min_window {
                    out.push((start, end));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let (Some(start), Some(last)) = (run_start, log.rows.last()) {
        if last.tick - start + 1 >= min_window {
            out.push((start, last.tick));
        }
    }
    out
}

/// Stretches where the exit-region density stays within `max_range` of
/// itself for at least `window` ticks while agents remain active.
/// Greedy left-to-right: each reported interval is extended as far right
/// as the spread bound allows, and intervals never overlap.
pub fn detect_calm(log: &MetricsLog, window: u32, max_range: u32) -> Vec<(u32, u32)> {
    assert!(window >= 2, "calm window must be >= 2");
    let rows = &log.rows;
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < rows.len() {
        if rows[i].active_count == 0 {
            i += 1;
            continue;
        }
        let mut lo = rows[i].exit_region_density;
        let mut hi = lo;
        let mut j = i;
        while j + 1 < rows.len() && rows[j + 1].active_count > 0 {
            let d = rows[j + 1].exit_region_density;
            let (nlo, nhi) = (lo.min(d), hi.max(d));
            if nhi - nlo > max_range {
                break;
            }
            lo = nlo;
            hi = nhi;
            j += 1;
        }
        let len = (j - i + 1) as u32;
        if len >= window {
            out.push((rows[i].tick, rows[j].tick));
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn log_from(densities: &[u32], exits: &[u32], crowd: u32) -> MetricsLog {
        assert_eq!(densities.len(), exits.len());
        let mut cumulative = 0;
        let rows = densities
            .iter()
            .zip(exits)
            .enumerate()
            .map(|(i, (&d, &e))| {
                cumulative += e;
                MetricsRow {
                    tick: i as u32 + 1,
                    exit_region_density: d,
                    exits_this_tick: e,
                    cumulative_exits: cumulative,
                    active_count: crowd - cumulative,
                }
            })
            .collect();
        MetricsLog { rows, crowd_size: crowd }
    }

    fn top_wall_room(width: i32, height: i32, exit_xs: &[i32]) -> (GridWorld, Vec<Coord>) {
        let mut world = GridWorld::new(width, height, CellKind::Free);
        for x in 0..width {
            world.set_kind(Coord::new(x, 0), CellKind::Wall);
        }
        let mut exits = Vec::new();
        for &x in exit_xs {
            world.set_kind(Coord::new(x, 0), CellKind::Exit);
            exits.push(Coord::new(x, 0));
        }
        exits.sort_unstable();
        (world, exits)
    }

    #[test]
    fn exit_region_depth_one_single_exit() {
        let (world, exits) = top_wall_room(7, 5, &[3]);
        let got = exit_region(&world, &exits, 1);
        // Exit cell plus the inside row within one lateral cell.
        assert_eq!(
            got,
            vec![
                Coord::new(3, 0),
                Coord::new(2, 1),
                Coord::new(3, 1),
                Coord::new(4, 1)
            ]
        );
    }

    #[test]
    fn exit_region_depth_one_width_three() {
        let (world, exits) = top_wall_room(9, 5, &[3, 4, 5]);
        let got = exit_region(&world, &exits, 1);
        assert_eq!(got.len(), 8); // 3 exit cells + 5-wide inside row
        for x in 3..=5 {
            assert!(got.contains(&Coord::new(x, 0)));
        }
        for x in 2..=6 {
            assert!(got.contains(&Coord::new(x, 1)));
        }
    }

    #[test]
    fn exit_region_saturates_to_the_lateral_band() {
        let (world, exits) = top_wall_room(9, 5, &[3, 4, 5]);
        let got = exit_region(&world, &exits, 10);
        // Depth exceeds the room: every free cell in the widened lateral
        // band, plus the exits.
        assert_eq!(got.len(), 3 + 4 * 5);
    }

    #[test]
    fn exit_region_ignores_agents() {
        let (mut world, exits) = top_wall_room(7, 5, &[3]);
        let before = exit_region(&world, &exits, 2);
        world.place(Coord::new(3, 1), 5);
        world.place(Coord::new(1, 3), 6);
        assert_eq!(exit_region(&world, &exits, 2), before);
    }

    #[test]
    fn burstiness_constant_series_is_minus_one() {
        assert_eq!(burstiness_index(&[2.0, 2.0, 2.0, 2.0]).unwrap(), -1.0);
    }

    #[test]
    fn burstiness_sigma_equals_mu_is_zero() {
        assert_eq!(burstiness_index(&[0.0, 4.0, 0.0, 4.0]).unwrap(), 0.0);
    }

    #[test]
    fn burstiness_single_spike() {
        // mu = 2, population sigma = 2*sqrt(3).
        let b = burstiness_index(&[0.0, 0.0, 0.0, 8.0]).unwrap();
        assert!((b - 0.2679491924311227).abs() < 1e-12);
    }

    #[test]
    fn burstiness_rejects_degenerate_series() {
        assert_eq!(burstiness_index(&[]), Err(Error::DegenerateSeries));
        assert_eq!(burstiness_index(&[0.0, 0.0]), Err(Error::DegenerateSeries));
    }

    #[test]
    fn burstiness_is_scale_invariant() {
        let series = [0.0, 3.0, 1.0, 0.0, 5.0, 2.0];
        let scaled: Vec<f64> = series.iter().map(|x| x * 7.5).collect();
        let a = burstiness_index(&series).unwrap();
        let b = burstiness_index(&scaled).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn clogging_whole_log() {
        let log = log_from(&[9; 50], &[0; 50], 10);
        assert_eq!(detect_clogging(&log, 10, 5), vec![(1, 50)]);
    }

    #[test]
    fn clogging_never_fires_when_exits_flow() {
        let log = log_from(&[9; 50], &[1; 50], 60);
        assert_eq!(detect_clogging(&log, 10, 5), vec![]);
    }

    #[test]
    fn clogging_interval_bounds_are_exact() {
        // Zero-exit, high-density stretch on ticks 5..=20 only.
        let mut exits = vec![1u32; 30];
        for t in 5..=20 {
            exits[t - 1] = 0;
        }
        let log = log_from(&[9; 30], &exits, 40);
        assert_eq!(detect_clogging(&log, 10, 5), vec![(5, 20)]);
        // A 16-tick run is shorter than a 17-tick window.
        assert_eq!(detect_clogging(&log, 17, 5), vec![]);
    }

    #[test]
    fn clogging_requires_density() {
        let log = log_from(&[2; 50], &[0; 50], 10);
        assert_eq!(detect_clogging(&log, 10, 5), vec![]);
    }

    #[test]
    fn calm_constant_density_segment() {
        let log = log_from(&[4; 25], &[0; 25], 10);
        assert_eq!(detect_calm(&log, 20, 2), vec![(1, 25)]);
    }

    #[test]
    fn calm_rejects_saw_tooth() {
        let densities: Vec<u32> = (0..40).map(|i| if i % 2 == 0 { 0 } else { 6 }).collect();
        let log = log_from(&densities, &vec![0; 40], 10);
        assert_eq!(detect_calm(&log, 20, 2), vec![]);
    }

    #[test]
    fn calm_plateau_is_found_with_exact_bounds() {
        // Noisy until tick 99, plateau on ticks 100..=140, noisy after.
        let mut densities = Vec::new();
        for i in 0..150u32 {
            densities.push(match i {
                0..=98 => if i % 2 == 0 { 0 } else { 8 },
                99..=139 => 5 + (i % 2), // range 1
                _ => if i % 2 == 0 { 0 } else { 8 },
            });
        }
        let log = log_from(&densities, &vec![0; 150], 10);
        let calm = detect_calm(&log, 20, 1);
        assert_eq!(calm.len(), 1);
        let (start, end) = calm[0];
        assert_eq!((start, end), (100, 140));
    }

    #[test]
    fn calm_requires_active_agents() {
        let mut log = log_from(&[4; 30], &[0; 30], 10);
        for row in &mut log.rows {
            row.active_count = 0;
        }
        assert_eq!(detect_calm(&log, 20, 2), vec![]);
    }
}
