//! Agent identity and lifecycle state.

use crate::grid::{AgentId, Coord, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentState {
    Active,
    /// Terminal; `tick` is the tick at whose start the agent left the world.
    Exited { tick: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: AgentId,
    pub pos: Coord,
    /// Unit direction toward the agent's nearest exit. Left at its last
    /// defined value while the agent stands on an exit cell (where the
    /// direction is undefined) and after it has exited.
    pub heading: Vec2,
    pub state: AgentState,
}

impl Agent {
    pub fn is_active(&self) -> bool {
        matches!(self.state, AgentState::Active)
    }

    pub fn exit_tick(&self) -> Option<u32> {
        match self.state {
            AgentState::Exited { tick } => Some(tick),
            AgentState::Active => None,
        }
    }
}
