//! Property tests for the engine's structural invariants: conservation,
//! single occupancy, the one-pace rule, monotone egress, re-heading, and
//! bit-exact replay.

use proptest::prelude::*;

use crowdsim_core::agent::{Agent, AgentState};
use crowdsim_core::behavior::compute_heading;
use crowdsim_core::engine::SimState;
use crowdsim_core::grid::{nearest_exit, CellKind, Coord, GridWorld};
use crowdsim_core::scenario::{BehaviorParams, Rect, Scenario, TargetRule, UpdateRule};

#[derive(Debug, Clone)]
struct WorldSpec {
    width: i32,
    height: i32,
    walls: Vec<(i32, i32)>,
    exits: Vec<(i32, i32)>,
    agent_picks: Vec<usize>,
    seed: u64,
    update_rule: UpdateRule,
    friction: f64,
}

fn world_spec() -> impl Strategy<Value = WorldSpec> {
    (4i32..9, 4i32..9)
        .prop_flat_map(|(width, height)| {
            let cells = (width * height) as usize;
            (
                Just(width),
                Just(height),
                proptest::collection::vec((0..width, 0..height), 0..cells / 4),
                proptest::collection::vec((0..width, 0..height), 1..4),
                proptest::collection::vec(0..cells, 0..6),
                any::<u64>(),
                prop_oneof![
                    Just(UpdateRule::Sequential),
                    Just(UpdateRule::Parallel)
                ],
                prop_oneof![Just(0.0f64), Just(0.5), Just(0.92), Just(1.0)],
            )
        })
        .prop_map(
            |(width, height, walls, exits, agent_picks, seed, update_rule, friction)| WorldSpec {
                width,
                height,
                walls,
                exits,
                agent_picks,
                seed,
                update_rule,
                friction,
            },
        )
}

/// Build a runnable state from the raw spec: exits override walls, agents
/// land on distinct free non-exit cells.
fn build_state(spec: &WorldSpec) -> SimState {
    let mut world = GridWorld::new(spec.width, spec.height, CellKind::Free);
    for &(x, y) in &spec.walls {
        world.set_kind(Coord::new(x, y), CellKind::Wall);
    }
    let mut exits = Vec::new();
    for &(x, y) in &spec.exits {
        let c = Coord::new(x, y);
        world.set_kind(c, CellKind::Exit);
        if !exits.contains(&c) {
            exits.push(c);
        }
    }
    exits.sort_unstable();

    let mut agents = Vec::new();
    for &pick in &spec.agent_picks {
        let c = Coord::new(pick as i32 % spec.width, pick as i32 / spec.width);
        if world.is_free(c) && world.kind(c) != Some(CellKind::Exit) {
            let id = agents.len() as u32;
            world.place(c, id);
            agents.push(Agent {
                id,
                pos: c,
                heading: compute_heading(c, &exits).expect("off-exit agent has a heading"),
                state: AgentState::Active,
            });
        }
    }
    let params = BehaviorParams {
        update_rule: spec.update_rule,
        friction: spec.friction,
        ..BehaviorParams::default()
    };
    SimState::new(world, agents, exits, params, spec.seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn engine_invariants_hold_every_tick(spec in world_spec()) {
        let mut state = build_state(&spec);
        let crowd = state.crowd_size();

        for _ in 0..40 {
            let before: Vec<(u32, Coord, bool)> = state
                .agents
                .iter()
                .map(|a| (a.id, a.pos, a.is_active()))
                .collect();
            state.tick();

            // Conservation.
            let active = state.agents.iter().filter(|a| a.is_active()).count() as u32;
            prop_assert_eq!(active + state.exited_total, crowd);

            // Occupancy bijection: active agents on distinct non-wall
            // cells, occupancy pointing back at them.
            let mut seen = std::collections::BTreeSet::new();
            for a in &state.agents {
                match a.state {
                    AgentState::Active => {
                        prop_assert!(seen.insert(a.pos), "two agents share {}", a.pos);
                        prop_assert_ne!(state.world.kind(a.pos), Some(CellKind::Wall));
                        prop_assert_eq!(state.world.occupant(a.pos), Some(a.id));
                    }
                    AgentState::Exited { tick } => {
                        prop_assert!(tick >= 1 && tick <= state.tick);
                    }
                }
            }
            prop_assert_eq!(state.world.occupied_count(), seen.len());

            // One pace per tick, and re-heading toward the nearest exit.
            for (id, old_pos, was_active) in before {
                let a = &state.agents[id as usize];
                if !was_active {
                    continue;
                }
                prop_assert!(a.pos.chebyshev(old_pos) <= 1, "teleport by {}", a.id);
                if a.is_active() {
                    let e = nearest_exit(a.pos, &state.exits).unwrap();
                    if e != a.pos {
                        let want = compute_heading(a.pos, &state.exits).unwrap();
                        prop_assert!(
                            (a.heading.x - want.x).abs() < 1e-9
                                && (a.heading.y - want.y).abs() < 1e-9,
                            "stale heading on agent {}",
                            a.id
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn ticks_replay_bit_identically(spec in world_spec()) {
        let mut a = build_state(&spec);
        let mut b = build_state(&spec);
        for _ in 0..30 {
            a.tick();
            b.tick();
            prop_assert_eq!(&a, &b);
        }
    }

    #[test]
    fn egress_is_monotone(spec in world_spec()) {
        let mut state = build_state(&spec);
        let mut last = 0;
        for _ in 0..40 {
            state.tick();
            prop_assert!(state.exited_total >= last);
            last = state.exited_total;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Spawn determinism and validity over random crowd sizes and seeds.
    #[test]
    fn spawn_places_crowds_reproducibly(crowd in 0u32..24, seed in any::<u64>()) {
        let mut world = GridWorld::new(8, 8, CellKind::Free);
        for x in 0..8 {
            world.set_kind(Coord::new(x, 0), CellKind::Wall);
        }
        world.set_kind(Coord::new(4, 0), CellKind::Exit);
        let scenario = Scenario {
            exits: world.cells_of_kind(CellKind::Exit),
            world,
            spawn_region: Rect::new(1, 4, 6, 7),
            crowd_size: crowd,
            params: BehaviorParams { target_rule: TargetRule::NearestToExit, ..BehaviorParams::default() },
            seed,
            max_ticks: 50,
        };
        let a = crowdsim_core::spawn(&scenario).unwrap();
        let b = crowdsim_core::spawn(&scenario).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.agents.len() as u32, crowd);
        for agent in &a.agents {
            prop_assert!(scenario.spawn_region.contains(agent.pos));
        }
    }
}
