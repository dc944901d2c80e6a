//! The simulation loop: spawning, per-tick agent updates, exit
//! bookkeeping, and per-tick instrumentation.
//!
//! Two conflict disciplines exist behind [`SimState::tick`]:
//!
//! * [`UpdateRule::Parallel`] (the default): every agent decides against
//!   the tick-start occupancy, and a cell claimed by several agents goes
//!   to none of them. Contention can therefore stall the flow, and the
//!   stall-and-release cycle at the door is what produces clogging and
//!   bursty exit rates.
//! * [`UpdateRule::Sequential`]: agents act one at a time in the shuffled
//!   order, each seeing the world as already mutated this tick, so the
//!   earlier agent wins every contested cell and a cell freed mid-tick is
//!   immediately available to later agents.

use alloc::vec::Vec;

use crate::agent::{Agent, AgentState};
use crate::arch::{self, ArchMeasurement};
use crate::behavior::{
    choose_target, compute_heading, field_of_vision, has_exited, step_toward,
};
use crate::error::Error;
use crate::grid::{exit_centroid, flow_axis, AgentId, Coord, GridWorld, Vec2};
use crate::metrics::{exit_region, MetricsLog, MetricsRow};
use crate::scenario::{BehaviorParams, Scenario, UpdateRule};
use crate::rng::SplitMix64;

/// Full live state of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub world: GridWorld,
    pub agents: Vec<Agent>,
    pub exits: Vec<Coord>,
    pub params: BehaviorParams,
    pub tick: u32,
    pub exited_total: u32,
    rng: SplitMix64,
}

impl SimState {
    /// Build a state from explicit parts; occupancy must already match
    /// the active agents one-to-one.
    pub fn new(
        world: GridWorld,
        agents: Vec<Agent>,
        exits: Vec<Coord>,
        params: BehaviorParams,
        seed: u64,
    ) -> Self {
        debug_assert_eq!(
            world.occupied_count(),
            agents.iter().filter(|a| a.is_active()).count()
        );
        let exited_total = agents.iter().filter(|a| !a.is_active()).count() as u32;
        SimState {
            world,
            agents,
            exits,
            params,
            tick: 0,
            exited_total,
            rng: SplitMix64::new(seed),
        }
    }

    pub fn crowd_size(&self) -> u32 {
        self.agents.len() as u32
    }

    pub fn active_count(&self) -> u32 {
        self.crowd_size() - self.exited_total
    }

    pub fn all_exited(&self) -> bool {
        self.exited_total == self.crowd_size()
    }

    /// Ids of the active agents in id order (the pre-shuffle order).
    pub fn active_ids(&self) -> Vec<AgentId> {
        self.agents
            .iter()
            .filter(|a| a.is_active())
            .map(|a| a.id)
            .collect()
    }

    /// Advance one tick: shuffle the active agents with the run's
    /// generator, then update them under the scenario's conflict rule.
    pub fn tick(&mut self) {
        let mut order = self.active_ids();
        self.rng.shuffle(&mut order);
        self.tick_with_order(&order);
    }

    /// Advance one tick updating agents in the given order, which must
    /// list each currently active agent exactly once. Exposed so tests
    /// can pin the order and compare against reference implementations.
    /// (Under the parallel rule the order carries no weight; the outcome
    /// is a function of the tick-start state alone.)
    pub fn tick_with_order(&mut self, order: &[AgentId]) {
        debug_assert_eq!(order.len(), self.active_count() as usize);
        match self.params.update_rule {
            UpdateRule::Sequential => self.tick_sequential(order),
            UpdateRule::Parallel => self.tick_parallel(order),
        }
    }

    fn tick_sequential(&mut self, order: &[AgentId]) {
        let t = self.tick + 1;
        for &id in order {
            let agent = &self.agents[id as usize];
            debug_assert!(agent.is_active(), "agent {id} in order is not active");
            let pos = agent.pos;

            if has_exited(pos, &self.exits) {
                self.world.vacate(pos);
                let agent = &mut self.agents[id as usize];
                agent.state = AgentState::Exited { tick: t };
                self.exited_total += 1;
                continue;
            }

            let heading = compute_heading(pos, &self.exits)
                .expect("active agent off the exit always has a heading");
            let fov = field_of_vision(pos, heading, &self.params, &self.world);
            let target = choose_target(pos, &fov, &self.world, &self.exits, self.params.target_rule);
            let mut new_pos = pos;
            if let Some(target) = target {
                if let Some(step) = step_toward(pos, target, &self.world) {
                    self.world.move_occupant(pos, step);
                    new_pos = step;
                }
            }

            let agent = &mut self.agents[id as usize];
            agent.pos = new_pos;
            // Re-head toward the (possibly new) nearest exit; on an exit
            // cell the direction is undefined and the old heading stays.
            agent.heading = compute_heading(new_pos, &self.exits).unwrap_or(heading);
        }
        self.tick = t;
    }

    fn tick_parallel(&mut self, order: &[AgentId]) {
        let t = self.tick + 1;

        // Intent phase, all against the tick-start occupancy. Per target
        // cell, count the claims and remember the claimant earliest in
        // the shuffled order (the winner if the conflict resolves).
        let cell_count = (self.world.width() as usize) * (self.world.height() as usize);
        let mut claims = alloc::vec![0u8; cell_count];
        let mut first_claimant = alloc::vec![u32::MAX; cell_count];
        let claim_idx = |c: Coord, w: i32| (c.y as usize) * (w as usize) + (c.x as usize);
        let width = self.world.width();

        enum Intent {
            Leave,
            Step(Coord),
            Stay,
        }
        let mut intents: Vec<(AgentId, Intent)> = Vec::with_capacity(order.len());
        for &id in order {
            let agent = &self.agents[id as usize];
            debug_assert!(agent.is_active(), "agent {id} in order is not active");
            let pos = agent.pos;
            if has_exited(pos, &self.exits) {
                intents.push((id, Intent::Leave));
                continue;
            }
            let heading = compute_heading(pos, &self.exits)
                .expect("active agent off the exit always has a heading");
            let fov = field_of_vision(pos, heading, &self.params, &self.world);
            let target = choose_target(pos, &fov, &self.world, &self.exits, self.params.target_rule);
            match target.and_then(|target| step_toward(pos, target, &self.world)) {
                Some(step) => {
                    let i = claim_idx(step, width);
                    claims[i] = claims[i].saturating_add(1);
                    if first_claimant[i] == u32::MAX {
                        first_claimant[i] = id;
                    }
                    intents.push((id, Intent::Step(step)));
                }
                None => intents.push((id, Intent::Stay)),
            }
        }

        // One pressure draw per tick: with probability `friction` the
        // crowd pushes and every contested cell stays contested ("not
        // able to resolve their conflict"); otherwise it yields and each
        // contested cell goes to the claimant earliest in the shuffled
        // order. Unobstructed movers walk either way.
        let yields = self.rng.next_f64() >= self.params.friction;

        // Commit phase: exits always happen; sole claimants take their
        // cells; contested cells resolve only on a yielding tick.
        for (id, intent) in intents {
            match intent {
                Intent::Leave => {
                    let agent = &mut self.agents[id as usize];
                    self.world.vacate(agent.pos);
                    agent.state = AgentState::Exited { tick: t };
                    self.exited_total += 1;
                }
                Intent::Step(step) => {
                    let i = claim_idx(step, width);
                    let moves = if claims[i] == 1 {
                        true
                    } else {
                        yields && first_claimant[i] == id
                    };
                    let agent_pos = self.agents[id as usize].pos;
                    if moves {
                        self.world.move_occupant(agent_pos, step);
                    }
                    let agent = &mut self.agents[id as usize];
                    if moves {
                        agent.pos = step;
                    }
                    let old_heading = agent.heading;
                    agent.heading =
                        compute_heading(agent.pos, &self.exits).unwrap_or(old_heading);
                }
                Intent::Stay => {
                    let agent = &mut self.agents[id as usize];
                    let old_heading = agent.heading;
                    agent.heading =
                        compute_heading(agent.pos, &self.exits).unwrap_or(old_heading);
                }
            }
        }
        self.tick = t;
    }
}

/// Place the crowd on distinct free spawn cells drawn uniformly without
/// replacement using the scenario seed, headings toward the nearest exit.
pub fn spawn(scenario: &Scenario) -> Result<SimState, Error> {
    scenario.validate()?;
    let mut world = scenario.world.clone();
    let mut rng = SplitMix64::new(scenario.seed);

    let mut cells = scenario.spawn_cells();
    if cells.len() < scenario.crowd_size as usize {
        return Err(Error::SpawnOverflow {
            capacity: cells.len(),
            crowd: scenario.crowd_size,
        });
    }
    rng.shuffle(&mut cells);

    let mut agents = Vec::with_capacity(scenario.crowd_size as usize);
    for (id, &pos) in cells.iter().take(scenario.crowd_size as usize).enumerate() {
        let id = id as AgentId;
        let heading = compute_heading(pos, &scenario.exits)?;
        world.place(pos, id);
        agents.push(Agent {
            id,
            pos,
            heading,
            state: AgentState::Active,
        });
    }

    Ok(SimState {
        world,
        agents,
        exits: scenario.exits.clone(),
        params: scenario.params,
        tick: 0,
        exited_total: 0,
        rng,
    })
}

/// Run a scenario to completion (all agents exited) or to `max_ticks`,
/// recording one metrics row and one arch measurement after every tick.
///
/// Identical scenarios, including the seed, produce identical outputs.
pub fn run(scenario: &Scenario) -> Result<(SimState, MetricsLog, Vec<ArchMeasurement>), Error> {
    run_with(scenario, |_| {})
}

/// Like [`run`], with an observer invoked on the freshly spawned state
/// (tick 0) and again after every tick.
pub fn run_with<F>(
    scenario: &Scenario,
    mut observer: F,
) -> Result<(SimState, MetricsLog, Vec<ArchMeasurement>), Error>
where
    F: FnMut(&SimState),
{
    let mut state = spawn(scenario)?;
    let region = exit_region(
        &scenario.world,
        &scenario.exits,
        scenario.params.exit_region_depth,
    );
    let center = exit_centroid(&scenario.exits);
    let flow = flow_axis(&scenario.world, &scenario.exits);

    observer(&state);

    let mut rows = Vec::new();
    let mut arches = Vec::new();
    while !state.all_exited() && state.tick < scenario.max_ticks {
        let before = state.exited_total;
        state.tick();
        observer(&state);

        let density = region
            .iter()
            .filter(|&&c| state.world.occupant(c).is_some())
            .count() as u32;
        rows.push(MetricsRow {
            tick: state.tick,
            exit_region_density: density,
            exits_this_tick: state.exited_total - before,
            cumulative_exits: state.exited_total,
            active_count: state.active_count(),
        });
        arches.push(arch::measure(
            &state.world,
            &state.exits,
            center,
            flow,
            state.tick,
            arch::DEFAULT_VALLEY_FRACTION,
        ));
    }

    let log = MetricsLog {
        rows,
        crowd_size: scenario.crowd_size,
    };
    Ok((state, log, arches))
}

/// Flow direction of a scenario, for measurement post-processing.
pub fn scenario_flow_axis(scenario: &Scenario) -> Vec2 {
    flow_axis(&scenario.world, &scenario.exits)
}
