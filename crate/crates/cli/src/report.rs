//! Run artifacts: metrics/arch CSVs, the key=value summary, ASCII frames,
//! and the reader used by `analyze`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crowdsim_core::arch::{arch_onset, ArchMeasurement};
use crowdsim_core::arch::{DEFAULT_ONSET_MIN_COMPONENT, DEFAULT_ONSET_PERSIST};
use crowdsim_core::grid::{CellKind, Coord, GridWorld};
use crowdsim_core::metrics::{
    burstiness_index, detect_calm, detect_clogging, MetricsLog, MetricsRow,
};
use crowdsim_core::SimState;
use thiserror::Error;

pub const METRICS_HEADER: &str =
    "tick,exit_region_density,exits_this_tick,cumulative_exits,active_count";
pub const ARCH_HEADER: &str = "tick,major_axis_len,minor_axis_len,component_size,double_arch";

/// Ticks to let the spawn column march in and pack against the door
/// before the reported arch peaks are sampled; runs shorter than twice
/// this sample from their second half instead.
pub const SETTLE_TICKS: u32 = 100;

#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    pub clog_min_window: u32,
    pub clog_min_density: u32,
    pub calm_window: u32,
    pub calm_max_range: u32,
}

/// Everything summary.txt reports for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub total_egress_ticks: u32,
    pub burstiness_index: Option<f64>,
    pub clog_intervals: Vec<(u32, u32)>,
    pub calm_intervals: Vec<(u32, u32)>,
    pub arch_onset_tick: Option<u32>,
    pub peak_major: f64,
    pub peak_minor: f64,
}

/// Peak of `f` over the settled part of the run: ticks from
/// `min(SETTLE_TICKS, last_tick / 2)` (at least 1) onward.
pub fn settled_peak(arches: &[ArchMeasurement], f: impl Fn(&ArchMeasurement) -> f64) -> f64 {
    let last = arches.last().map(|a| a.tick).unwrap_or(0);
    let start = SETTLE_TICKS.min(last / 2).max(1);
    arches
        .iter()
        .filter(|a| a.tick >= start)
        .map(f)
        .fold(0.0, f64::max)
}

pub fn compute_summary(
    log: &MetricsLog,
    arches: &[ArchMeasurement],
    thresholds: &Thresholds,
) -> Summary {
    Summary {
        total_egress_ticks: log.rows.last().map(|r| r.tick).unwrap_or(0),
        burstiness_index: burstiness_index(&log.exits_series()).ok(),
        clog_intervals: detect_clogging(log, thresholds.clog_min_window, thresholds.clog_min_density),
        calm_intervals: detect_calm(log, thresholds.calm_window, thresholds.calm_max_range),
        arch_onset_tick: arch_onset(arches, DEFAULT_ONSET_MIN_COMPONENT, DEFAULT_ONSET_PERSIST),
        peak_major: settled_peak(arches, |a| a.major_axis_len),
        peak_minor: settled_peak(arches, |a| a.minor_axis_len),
    }
}

pub fn format_intervals(intervals: &[(u32, u32)]) -> String {
    if intervals.is_empty() {
        return "none".to_string();
    }
    intervals
        .iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn format_burstiness(b: Option<f64>) -> String {
    match b {
        Some(v) => format!("{v:.6}"),
        None => "degenerate".to_string(),
    }
}

pub fn render_summary(s: &Summary) -> String {
    let mut out = String::new();
    writeln!(out, "total_egress_ticks = {}", s.total_egress_ticks).unwrap();
    writeln!(out, "burstiness_index = {}", format_burstiness(s.burstiness_index)).unwrap();
    writeln!(out, "clog_intervals = {}", format_intervals(&s.clog_intervals)).unwrap();
    writeln!(out, "calm_intervals = {}", format_intervals(&s.calm_intervals)).unwrap();
    writeln!(
        out,
        "arch_onset_tick = {}",
        s.arch_onset_tick.map_or("none".to_string(), |t| t.to_string())
    )
    .unwrap();
    writeln!(out, "peak_major = {:.3}", s.peak_major).unwrap();
    writeln!(out, "peak_minor = {:.3}", s.peak_minor).unwrap();
    out
}

pub fn render_metrics_csv(log: &MetricsLog) -> String {
    let mut out = String::with_capacity(32 * log.rows.len() + 64);
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in &log.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.tick, r.exit_region_density, r.exits_this_tick, r.cumulative_exits, r.active_count
        )
        .unwrap();
    }
    out
}

pub fn render_arch_csv(arches: &[ArchMeasurement]) -> String {
    let mut out = String::with_capacity(32 * arches.len() + 64);
    out.push_str(ARCH_HEADER);
    out.push('\n');
    for a in arches {
        writeln!(
            out,
            "{},{:.3},{:.3},{},{}",
            a.tick,
            a.major_axis_len,
            a.minor_axis_len,
            a.component_size,
            a.double_arch as u8
        )
        .unwrap();
    }
    out
}

/// ASCII snapshot: `#` wall, `.` free, `E` exit, `o` agent.
pub fn render_frame(state: &SimState) -> String {
    let world = &state.world;
    let mut out = String::with_capacity((world.width() as usize + 1) * world.height() as usize);
    for y in 0..world.height() {
        for x in 0..world.width() {
            let c = Coord::new(x, y);
            let symbol = if world.occupant(c).is_some() {
                'o'
            } else {
                match world.kind(c).unwrap() {
                    CellKind::Wall => '#',
                    CellKind::Free => '.',
                    CellKind::Exit => 'E',
                }
            };
            out.push(symbol);
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum MetricsReadError {
    #[error("unrecognized metrics schema: expected header `{METRICS_HEADER}`")]
    BadHeader,

    #[error("unrecognized metrics schema: line {line}: {reason}")]
    BadRow { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Read back a metrics.csv produced by `render_metrics_csv`.
pub fn read_metrics_csv(path: &Path) -> Result<MetricsLog, MetricsReadError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == METRICS_HEADER => {}
        _ => return Err(MetricsReadError::BadHeader),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next_u32 = |name: &str| -> Result<u32, MetricsReadError> {
            fields
                .next()
                .ok_or_else(|| MetricsReadError::BadRow {
                    line: idx + 1,
                    reason: format!("missing column `{name}`"),
                })?
                .trim()
                .parse()
                .map_err(|_| MetricsReadError::BadRow {
                    line: idx + 1,
                    reason: format!("invalid `{name}`"),
                })
        };
        let row = MetricsRow {
            tick: next_u32("tick")?,
            exit_region_density: next_u32("exit_region_density")?,
            exits_this_tick: next_u32("exits_this_tick")?,
            cumulative_exits: next_u32("cumulative_exits")?,
            active_count: next_u32("active_count")?,
        };
        if fields.next().is_some() {
            return Err(MetricsReadError::BadRow {
                line: idx + 1,
                reason: "too many columns".to_string(),
            });
        }
        rows.push(row);
    }
    let crowd_size = rows
        .first()
        .map(|r| r.cumulative_exits + r.active_count)
        .unwrap_or(0);
    Ok(MetricsLog { rows, crowd_size })
}

/// One row of sweep.csv.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub width: i32,
    pub seed: u64,
    pub total_egress_ticks: u32,
    pub burstiness_index: Option<f64>,
    pub peak_major: f64,
    pub peak_minor: f64,
    pub arch_onset_tick: Option<u32>,
    pub clog_total_ticks: u32,
}

pub const SWEEP_HEADER: &str =
    "width,seed,total_egress_ticks,burstiness_index,peak_major,peak_minor,arch_onset_tick,clog_total_ticks";

pub fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.3},{:.3},{},{}",
            r.width,
            r.seed,
            r.total_egress_ticks,
            format_burstiness(r.burstiness_index),
            r.peak_major,
            r.peak_minor,
            r.arch_onset_tick.map_or("none".to_string(), |t| t.to_string()),
            r.clog_total_ticks
        )
        .unwrap();
    }
    out
}

pub const SWEEP_SUMMARY_HEADER: &str = "width,runs,mean_total_egress_ticks,mean_burstiness_index,mean_peak_major,mean_peak_minor,mean_arch_onset_tick,mean_clog_total_ticks";

/// Per-width means; burstiness and onset average over the runs where they
/// are defined.
pub fn render_sweep_summary_csv(rows: &[SweepRow]) -> String {
    let mut widths: Vec<i32> = rows.iter().map(|r| r.width).collect();
    widths.sort_unstable();
    widths.dedup();

    let mut out = String::new();
    out.push_str(SWEEP_SUMMARY_HEADER);
    out.push('\n');
    for width in widths {
        let group: Vec<&SweepRow> = rows.iter().filter(|r| r.width == width).collect();
        let n = group.len() as f64;
        let mean = |f: &dyn Fn(&SweepRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
        let bursts: Vec<f64> = group.iter().filter_map(|r| r.burstiness_index).collect();
        let onsets: Vec<f64> = group
            .iter()
            .filter_map(|r| r.arch_onset_tick.map(|t| t as f64))
            .collect();
        let mean_opt = |v: &[f64]| {
            if v.is_empty() {
                "none".to_string()
            } else {
                format!("{:.6}", v.iter().sum::<f64>() / v.len() as f64)
            }
        };
        writeln!(
            out,
            "{},{},{:.3},{},{:.3},{:.3},{},{:.3}",
            width,
            group.len(),
            mean(&|r| r.total_egress_ticks as f64),
            mean_opt(&bursts),
            mean(&|r| r.peak_major),
            mean(&|r| r.peak_minor),
            mean_opt(&onsets),
            mean(&|r| r.clog_total_ticks as f64),
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crowdsim_core::metrics::MetricsRow;

    fn tiny_log() -> MetricsLog {
        MetricsLog {
            rows: vec![
                MetricsRow {
                    tick: 1,
                    exit_region_density: 3,
                    exits_this_tick: 0,
                    cumulative_exits: 0,
                    active_count: 5,
                },
                MetricsRow {
                    tick: 2,
                    exit_region_density: 2,
                    exits_this_tick: 2,
                    cumulative_exits: 2,
                    active_count: 3,
                },
            ],
            crowd_size: 5,
        }
    }

    #[test]
    fn metrics_csv_round_trips() {
        let log = tiny_log();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        fs::write(&path, render_metrics_csv(&log)).unwrap();
        let back = read_metrics_csv(&path).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn foreign_csv_is_rejected_as_unrecognized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("other.csv");
        fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        let err = read_metrics_csv(&path).unwrap_err();
        assert!(err.to_string().contains("unrecognized metrics schema"));

        fs::write(&path, format!("{METRICS_HEADER}\n1,2,3\n")).unwrap();
        let err = read_metrics_csv(&path).unwrap_err();
        assert!(err.to_string().contains("unrecognized metrics schema"));
    }

    #[test]
    fn interval_formatting() {
        assert_eq!(format_intervals(&[]), "none");
        assert_eq!(format_intervals(&[(5, 20), (30, 41)]), "(5,20);(30,41)");
    }

    #[test]
    fn summary_renders_every_key() {
        let s = Summary {
            total_egress_ticks: 137,
            burstiness_index: Some(0.25),
            clog_intervals: vec![(5, 30)],
            calm_intervals: vec![],
            arch_onset_tick: Some(12),
            peak_major: 14.0,
            peak_minor: 3.0,
        };
        let text = render_summary(&s);
        for key in [
            "total_egress_ticks = 137",
            "burstiness_index = 0.250000",
            "clog_intervals = (5,30)",
            "calm_intervals = none",
            "arch_onset_tick = 12",
            "peak_major = 14.000",
            "peak_minor = 3.000",
        ] {
            assert!(text.contains(key), "missing {key:?} in {text:?}");
        }
    }
}
