//! The plain-text scenario format: a `key = value` header, a `---`
//! separator, and an ASCII map.
//!
//! Map symbols: `#` wall, `.` free, `E` exit, `s` free cell inside the
//! spawn region. Blank lines and lines starting with `;` are ignored
//! before the separator; after it, every line is a map row. All header
//! keys are optional and default to the standard corridor experiment
//! values.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crowdsim_core::grid::{CellKind, Coord, GridWorld};
use crowdsim_core::scenario::{BehaviorParams, Rect, Scenario, TargetRule, UpdateRule};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("missing `---` separator between header and map")]
    MissingSeparator,

    #[error("line {line}: malformed header line (expected `key = value`)")]
    MalformedHeader { line: usize },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },

    #[error("line {line}: invalid value `{value}` for key `{key}`")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
    },

    #[error("inconsistent map width: the map section is empty")]
    EmptyMap,

    #[error("inconsistent map width: line {line} has {got} cells, expected {expected}")]
    InconsistentWidth {
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("illegal map symbol `{symbol}` at ({x},{y})")]
    IllegalSymbol { x: i32, y: i32, symbol: char },

    #[error("non-rectangular spawn region: cell ({x},{y}) inside the spawn bounding box is not `s`")]
    NonRectangularSpawn { x: i32, y: i32 },

    #[error("spawn overflow: region holds {capacity} cells but crowd_size is {crowd}")]
    SpawnOverflow { capacity: usize, crowd: u32 },

    #[error("no exits defined but crowd_size is {crowd}")]
    NoExits { crowd: u32 },
}

const KEYS: &[&str] = &[
    "seed",
    "crowd_size",
    "max_ticks",
    "fov_radius",
    "fov_half_angle_deg",
    "exit_region_depth",
    "target_rule",
    "update_rule",
    "friction",
];

#[derive(Default)]
struct Header {
    seed: Option<u64>,
    crowd_size: Option<u32>,
    max_ticks: Option<u32>,
    fov_radius: Option<f64>,
    fov_half_angle_deg: Option<f64>,
    exit_region_depth: Option<u32>,
    target_rule: Option<TargetRule>,
    update_rule: Option<UpdateRule>,
    friction: Option<f64>,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let mut header = Header::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut lines = text.lines().enumerate();
    let mut found_separator = false;

    for (idx, raw) in lines.by_ref() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim() == "---" {
            found_separator = true;
            break;
        }
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(';') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or(ParseError::MalformedHeader { line: line_no })?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(ParseError::UnknownKey {
                line: line_no,
                key: key.to_string(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ParseError::DuplicateKey {
                line: line_no,
                key: key.to_string(),
            });
        }
        let invalid = || ParseError::InvalidValue {
            line: line_no,
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "seed" => header.seed = Some(value.parse().map_err(|_| invalid())?),
            "crowd_size" => header.crowd_size = Some(value.parse().map_err(|_| invalid())?),
            "max_ticks" => {
                let v: u32 = value.parse().map_err(|_| invalid())?;
                if v < 1 {
                    return Err(invalid());
                }
                header.max_ticks = Some(v);
            }
            "fov_radius" => {
                let v: f64 = value.parse().map_err(|_| invalid())?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(invalid());
                }
                header.fov_radius = Some(v);
            }
            "fov_half_angle_deg" => {
                let v: f64 = value.parse().map_err(|_| invalid())?;
                if !(v > 0.0 && v <= 180.0) {
                    return Err(invalid());
                }
                header.fov_half_angle_deg = Some(v);
            }
            "exit_region_depth" => {
                let v: u32 = value.parse().map_err(|_| invalid())?;
                if v < 1 {
                    return Err(invalid());
                }
                header.exit_region_depth = Some(v);
            }
            "target_rule" => {
                header.target_rule = Some(TargetRule::parse(value).ok_or_else(invalid)?)
            }
            "update_rule" => {
                header.update_rule = Some(UpdateRule::parse(value).ok_or_else(invalid)?)
            }
            "friction" => {
                let v: f64 = value.parse().map_err(|_| invalid())?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid());
                }
                header.friction = Some(v);
            }
            _ => unreachable!("key list checked above"),
        }
    }
    if !found_separator {
        return Err(ParseError::MissingSeparator);
    }

    // Map section: every remaining line is a row.
    let mut rows: Vec<(usize, &str)> = Vec::new();
    for (idx, raw) in lines {
        rows.push((idx + 1, raw.strip_suffix('\r').unwrap_or(raw)));
    }
    if rows.is_empty() {
        return Err(ParseError::EmptyMap);
    }
    let width = rows[0].1.chars().count();
    if width == 0 {
        return Err(ParseError::EmptyMap);
    }
    for &(line, row) in &rows[1..] {
        let got = row.chars().count();
        if got != width {
            return Err(ParseError::InconsistentWidth {
                line,
                expected: width,
                got,
            });
        }
    }

    let height = rows.len();
    let mut world = GridWorld::new(width as i32, height as i32, CellKind::Free);
    let mut spawn_cells: Vec<Coord> = Vec::new();
    for (y, &(_, row)) in rows.iter().enumerate() {
        for (x, symbol) in row.chars().enumerate() {
            let c = Coord::new(x as i32, y as i32);
            match symbol {
                '#' => world.set_kind(c, CellKind::Wall),
                '.' => {}
                'E' => world.set_kind(c, CellKind::Exit),
                's' => spawn_cells.push(c),
                _ => {
                    return Err(ParseError::IllegalSymbol {
                        x: c.x,
                        y: c.y,
                        symbol,
                    })
                }
            }
        }
    }

    let spawn_region = if spawn_cells.is_empty() {
        Rect::empty()
    } else {
        let rect = Rect::new(
            spawn_cells.iter().map(|c| c.x).min().unwrap(),
            spawn_cells.iter().map(|c| c.y).min().unwrap(),
            spawn_cells.iter().map(|c| c.x).max().unwrap(),
            spawn_cells.iter().map(|c| c.y).max().unwrap(),
        );
        let set: BTreeSet<Coord> = spawn_cells.iter().copied().collect();
        for c in rect.iter() {
            if !set.contains(&c) {
                return Err(ParseError::NonRectangularSpawn { x: c.x, y: c.y });
            }
        }
        rect
    };

    let defaults = BehaviorParams::default();
    let crowd_size = header.crowd_size.unwrap_or(400);
    let scenario = Scenario {
        exits: world.cells_of_kind(CellKind::Exit),
        world,
        spawn_region,
        crowd_size,
        params: BehaviorParams {
            fov_radius: header.fov_radius.unwrap_or(defaults.fov_radius),
            fov_half_angle_deg: header
                .fov_half_angle_deg
                .unwrap_or(defaults.fov_half_angle_deg),
            exit_region_depth: header
                .exit_region_depth
                .unwrap_or(defaults.exit_region_depth),
            target_rule: header.target_rule.unwrap_or(defaults.target_rule),
            update_rule: header.update_rule.unwrap_or(defaults.update_rule),
            friction: header.friction.unwrap_or(defaults.friction),
        },
        seed: header.seed.unwrap_or(0),
        max_ticks: header.max_ticks.unwrap_or(10_000),
    };

    if crowd_size > 0 && scenario.exits.is_empty() {
        return Err(ParseError::NoExits { crowd: crowd_size });
    }
    let capacity = scenario.spawn_cells().len();
    if crowd_size as usize > capacity {
        return Err(ParseError::SpawnOverflow {
            capacity,
            crowd: crowd_size,
        });
    }
    debug_assert!(scenario.validate().is_ok());
    Ok(scenario)
}

/// Serialize with every key explicit space-padded `key = value`, sorted by
/// key name. `parse_scenario(serialize_scenario(s))` reproduces `s`
/// exactly, and serializing again yields the identical string.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let p = &s.params;
    writeln!(out, "crowd_size = {}", s.crowd_size).unwrap();
    writeln!(out, "exit_region_depth = {}", p.exit_region_depth).unwrap();
    writeln!(out, "fov_half_angle_deg = {}", p.fov_half_angle_deg).unwrap();
    writeln!(out, "fov_radius = {}", p.fov_radius).unwrap();
    writeln!(out, "friction = {}", p.friction).unwrap();
    writeln!(out, "max_ticks = {}", s.max_ticks).unwrap();
    writeln!(out, "seed = {}", s.seed).unwrap();
    writeln!(out, "target_rule = {}", p.target_rule.as_str()).unwrap();
    writeln!(out, "update_rule = {}", p.update_rule.as_str()).unwrap();
    writeln!(out, "---").unwrap();
    for y in 0..s.world.height() {
        for x in 0..s.world.width() {
            let c = Coord::new(x, y);
            let symbol = match s.world.kind(c).unwrap() {
                CellKind::Wall => '#',
                CellKind::Exit => 'E',
                CellKind::Free => {
                    if s.spawn_region.contains(c) {
                        's'
                    } else {
                        '.'
                    }
                }
            };
            out.push(symbol);
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum CorridorError {
    #[error("exit width must be odd (got {0})")]
    EvenExitWidth(i32),

    #[error("exit exceeds corridor: exit width {exit} > corridor width {corridor}")]
    ExitExceedsCorridor { exit: i32, corridor: i32 },

    #[error("corridor length must be at least 3 (got {0})")]
    CorridorTooShort(i32),

    #[error("corridor width must be at least 1 (got {0})")]
    CorridorTooNarrow(i32),

    #[error("spawn overflow: corridor holds {capacity} spawn cells but crowd_size is {crowd}")]
    SpawnOverflow { capacity: usize, crowd: u32 },
}

/// Build the standard corridor scenario: a walled `corridor_width` x
/// `corridor_length` rectangle with a centered exit of odd width on one
/// short wall. The spawn region fills the far half of the corridor,
/// widened toward the exit whenever the far half alone cannot seat the
/// crowd.
pub fn make_corridor_scenario(
    corridor_width: i32,
    corridor_length: i32,
    exit_width: i32,
    crowd_size: u32,
    seed: u64,
) -> Result<Scenario, CorridorError> {
    if corridor_width < 1 {
        return Err(CorridorError::CorridorTooNarrow(corridor_width));
    }
    if corridor_length < 3 {
        return Err(CorridorError::CorridorTooShort(corridor_length));
    }
    if exit_width % 2 == 0 || exit_width < 1 {
        return Err(CorridorError::EvenExitWidth(exit_width));
    }
    if exit_width > corridor_width {
        return Err(CorridorError::ExitExceedsCorridor {
            exit: exit_width,
            corridor: corridor_width,
        });
    }

    let w = corridor_width + 2;
    let h = corridor_length + 2;
    let mut world = GridWorld::new(w, h, CellKind::Free);
    for x in 0..w {
        world.set_kind(Coord::new(x, 0), CellKind::Wall);
        world.set_kind(Coord::new(x, h - 1), CellKind::Wall);
    }
    for y in 0..h {
        world.set_kind(Coord::new(0, y), CellKind::Wall);
        world.set_kind(Coord::new(w - 1, y), CellKind::Wall);
    }
    let exit_x0 = 1 + (corridor_width - exit_width) / 2;
    for x in exit_x0..exit_x0 + exit_width {
        world.set_kind(Coord::new(x, 0), CellKind::Exit);
    }

    let needed_rows = (crowd_size as i32 + corridor_width - 1) / corridor_width;
    if needed_rows > corridor_length {
        return Err(CorridorError::SpawnOverflow {
            capacity: (corridor_width * corridor_length) as usize,
            crowd: crowd_size,
        });
    }
    let far_half_start = corridor_length / 2 + 1;
    let start_row = far_half_start
        .min(corridor_length - needed_rows + 1)
        .max(1);
    let spawn_region = if crowd_size == 0 {
        Rect::new(1, far_half_start, corridor_width, corridor_length)
    } else {
        Rect::new(1, start_row, corridor_width, corridor_length)
    };

    Ok(Scenario {
        exits: world.cells_of_kind(CellKind::Exit),
        world,
        spawn_region,
        crowd_size,
        params: BehaviorParams::default(),
        seed,
        max_ticks: 10_000,
    })
}
