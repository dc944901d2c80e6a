//! The three commands behind the binary: run one scenario, sweep exit
//! widths, and analyze a stored metrics log.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crowdsim_core::engine;
use crowdsim_core::metrics::{
    burstiness_index, default_clog_min_density, detect_calm, detect_clogging, exit_region,
    MetricsLog, DEFAULT_CALM_MAX_RANGE, DEFAULT_CALM_WINDOW, DEFAULT_CLOG_MIN_WINDOW,
};
use crowdsim_core::scenario::Scenario;

use crate::report::{
    self, compute_summary, render_arch_csv, render_frame, render_metrics_csv, render_summary,
    render_sweep_csv, render_sweep_summary_csv, settled_peak, SweepRow, Thresholds,
};
use crate::scenario_file::{make_corridor_scenario, parse_scenario};

/// Input errors exit with status 1, I/O errors with status 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    fn input(err: impl std::fmt::Display) -> Self {
        CliError::Input(err.to_string())
    }
}

/// Default detector thresholds for a scenario: clogging density floor at
/// half the exit-region cell count.
pub fn default_thresholds(scenario: &Scenario) -> Thresholds {
    let region = exit_region(
        &scenario.world,
        &scenario.exits,
        scenario.params.exit_region_depth,
    );
    Thresholds {
        clog_min_window: DEFAULT_CLOG_MIN_WINDOW,
        clog_min_density: default_clog_min_density(region.len()),
        calm_window: DEFAULT_CALM_WINDOW,
        calm_max_range: DEFAULT_CALM_MAX_RANGE,
    }
}

/// Run one scenario file and write metrics.csv, arch.csv, summary.txt and
/// (when `snapshot_every > 0`) ASCII frames into `out_dir`.
pub fn cmd_run(scenario_path: &Path, out_dir: &Path, snapshot_every: u32) -> Result<(), CliError> {
    let text = fs::read_to_string(scenario_path)?;
    let scenario = parse_scenario(&text).map_err(CliError::input)?;
    fs::create_dir_all(out_dir)?;

    let mut frame_io: Option<std::io::Error> = None;
    let (_, log, arches) = engine::run_with(&scenario, |state| {
        if snapshot_every > 0 && state.tick % snapshot_every == 0 && frame_io.is_none() {
            let path = out_dir.join(format!("frame_{:06}.txt", state.tick));
            if let Err(err) = fs::write(path, render_frame(state)) {
                frame_io = Some(err);
            }
        }
    })
    .map_err(CliError::input)?;
    if let Some(err) = frame_io {
        return Err(err.into());
    }

    fs::write(out_dir.join("metrics.csv"), render_metrics_csv(&log))?;
    fs::write(out_dir.join("arch.csv"), render_arch_csv(&arches))?;
    let summary = compute_summary(&log, &arches, &default_thresholds(&scenario));
    fs::write(out_dir.join("summary.txt"), render_summary(&summary))?;
    Ok(())
}

/// Corridor parameters shared by every run of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub corridor_width: i32,
    pub corridor_length: i32,
    pub crowd_size: u32,
    pub max_ticks: u32,
    pub fov_radius: Option<f64>,
    pub fov_half_angle_deg: Option<f64>,
    pub friction: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            corridor_width: 19,
            corridor_length: 30,
            crowd_size: 400,
            max_ticks: 10_000,
            fov_radius: None,
            fov_half_angle_deg: None,
            friction: None,
        }
    }
}

pub fn sweep_scenario(config: &SweepConfig, width: i32, seed: u64) -> Result<Scenario, CliError> {
    let mut scenario = make_corridor_scenario(
        config.corridor_width,
        config.corridor_length,
        width,
        config.crowd_size,
        seed,
    )
    .map_err(CliError::input)?;
    scenario.max_ticks = config.max_ticks;
    if let Some(r) = config.fov_radius {
        scenario.params.fov_radius = r;
    }
    if let Some(a) = config.fov_half_angle_deg {
        scenario.params.fov_half_angle_deg = a;
    }
    if let Some(f) = config.friction {
        scenario.params.friction = f;
    }
    scenario.validate().map_err(CliError::input)?;
    Ok(scenario)
}

/// Run one (width, seed) cell of the sweep and reduce it to a row.
pub fn sweep_run(config: &SweepConfig, width: i32, seed: u64) -> Result<SweepRow, CliError> {
    let scenario = sweep_scenario(config, width, seed)?;
    let thresholds = default_thresholds(&scenario);
    let (_, log, arches) = engine::run(&scenario).map_err(CliError::input)?;
    let summary = compute_summary(&log, &arches, &thresholds);
    Ok(SweepRow {
        width,
        seed,
        total_egress_ticks: summary.total_egress_ticks,
        burstiness_index: summary.burstiness_index,
        peak_major: settled_peak(&arches, |a| a.major_axis_len),
        peak_minor: settled_peak(&arches, |a| a.minor_axis_len),
        arch_onset_tick: summary.arch_onset_tick,
        clog_total_ticks: summary
            .clog_intervals
            .iter()
            .map(|(a, b)| b - a + 1)
            .sum(),
    })
}

/// Run every (width, seed) pair, in parallel, and write sweep.csv plus
/// sweep_summary.csv. Rows are sorted by (width, seed) regardless of
/// execution order.
pub fn cmd_sweep(
    widths: &[i32],
    seeds: &[u64],
    config: &SweepConfig,
    out_dir: &Path,
) -> Result<(), CliError> {
    if widths.is_empty() || seeds.is_empty() {
        return Err(CliError::Input("widths and seeds must be non-empty".into()));
    }
    for &w in widths {
        // Validate up front so a bad width fails before any run starts.
        sweep_scenario(config, w, seeds[0])?;
    }
    fs::create_dir_all(out_dir)?;

    let pairs: Vec<(i32, u64)> = widths
        .iter()
        .flat_map(|&w| seeds.iter().map(move |&s| (w, s)))
        .collect();
    let mut rows = pairs
        .par_iter()
        .map(|&(width, seed)| sweep_run(config, width, seed))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by_key(|r| (r.width, r.seed));

    fs::write(out_dir.join("sweep.csv"), render_sweep_csv(&rows))?;
    fs::write(
        out_dir.join("sweep_summary.csv"),
        render_sweep_summary_csv(&rows),
    )?;
    Ok(())
}

/// What `analyze` prints for a stored log.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub burstiness_index: Option<f64>,
    pub clog_intervals: Vec<(u32, u32)>,
    pub calm_intervals: Vec<(u32, u32)>,
}

pub fn analyze_log(log: &MetricsLog, thresholds: &Thresholds) -> Analysis {
    Analysis {
        burstiness_index: burstiness_index(&log.exits_series()).ok(),
        clog_intervals: detect_clogging(
            log,
            thresholds.clog_min_window,
            thresholds.clog_min_density,
        ),
        calm_intervals: detect_calm(log, thresholds.calm_window, thresholds.calm_max_range),
    }
}

pub fn render_analysis(a: &Analysis) -> String {
    format!(
        "burstiness_index = {}\nclog_intervals = {}\ncalm_intervals = {}\n",
        report::format_burstiness(a.burstiness_index),
        report::format_intervals(&a.clog_intervals),
        report::format_intervals(&a.calm_intervals),
    )
}

/// Re-run the detectors over a stored metrics.csv and print the results.
pub fn cmd_analyze(metrics_path: &Path, thresholds: &Thresholds) -> Result<(), CliError> {
    let log = read_metrics(metrics_path)?;
    print!("{}", render_analysis(&analyze_log(&log, thresholds)));
    Ok(())
}

fn read_metrics(path: &Path) -> Result<MetricsLog, CliError> {
    report::read_metrics_csv(path).map_err(|err| match err {
        report::MetricsReadError::Io(io) => CliError::Io(io),
        other => CliError::Input(other.to_string()),
    })
}

/// Seed lists accept `a..b` (inclusive) or comma-separated values.
pub fn parse_seed_spec(spec: &str) -> Result<Vec<u64>, CliError> {
    let spec = spec.trim();
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("invalid seed range `{spec}`")))?;
        let hi: u64 = hi
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("invalid seed range `{spec}`")))?;
        if hi < lo {
            return Err(CliError::Input(format!("empty seed range `{spec}`")));
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Input(format!("invalid seed `{s}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs_parse_ranges_and_lists() {
        assert_eq!(parse_seed_spec("1..10").unwrap(), (1..=10).collect::<Vec<_>>());
        assert_eq!(parse_seed_spec("3").unwrap(), vec![3]);
        assert_eq!(parse_seed_spec("5,2,9").unwrap(), vec![5, 2, 9]);
        assert!(parse_seed_spec("9..2").is_err());
        assert!(parse_seed_spec("a..b").is_err());
        assert!(parse_seed_spec("1,x").is_err());
    }

    #[test]
    fn exit_codes_distinguish_input_from_io() {
        assert_eq!(CliError::Input("bad".into()).exit_code(), 1);
        let io = CliError::Io(std::io::Error::new(std::io::ErrorKind::Other, "disk"));
        assert_eq!(io.exit_code(), 2);
    }
}
