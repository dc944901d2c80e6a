use core::fmt;

/// Errors surfaced by the simulation core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An operation that needs a goal was given an empty exit set.
    NoExits,
    /// Heading is undefined for an agent standing on its nearest exit.
    AlreadyAtExit,
    /// The spawn region has fewer free cells than the requested crowd.
    SpawnOverflow { capacity: usize, crowd: u32 },
    /// A statistic is undefined for an empty or all-zero series.
    DegenerateSeries,
    /// A scenario violated one of its structural invariants.
    InvalidScenario(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NoExits => write!(f, "no exits defined"),
            Error::AlreadyAtExit => write!(f, "agent already at exit"),
            Error::SpawnOverflow { capacity, crowd } => write!(
                f,
                "spawn overflow: region holds {capacity} free cells but crowd_size is {crowd}"
            ),
            Error::DegenerateSeries => write!(f, "degenerate series"),
            Error::InvalidScenario(msg) => write!(f, "invalid scenario: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
