"""
Tests for the arena: formations, Adapting The Edge, bookkeeping, outcome.
"""
import math
import numpy as np
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.adversary import AdversaryClass
from core.world import (
    AgentState,
    Command,
    CostTable,
    FormationShape,
    Obstacle,
    Outcome,
    Policies,
    Side,
    WorldParams,
    WorldState,
    adapt_the_edge,
    build_world,
    corridor,
    distance,
    formation_targets,
    half_width,
    outcome,
    step,
    take_snapshot,
)


class Scripted:
    """Policy returning fixed commands."""

    def __init__(self, commands=None, talkers=()):
        self.commands = dict(commands or {})
        self.talkers = set(talkers)

    def communicating(self, world, snapshot):
        return {i for i in self.talkers if world.agent(i).alive}

    def decide(self, world, snapshot, rng):
        return {i: c for i, c in self.commands.items() if world.agent(i).alive}

    def edge_peers(self, world, snapshot, index):
        return []


def scripted(explorers=None, monsters=None, talkers=()):
    return Policies(Scripted(explorers, talkers), Scripted(monsters))


def explorer(agent_id, position):
    return AgentState(agent_id, Side.EXPLORER, position)


def monster(agent_id, position):
    return AgentState(agent_id, Side.MONSTER, position, attack_power=3.0, home=position)


def expected_energy(world, agent):
    entry = world.ledger[agent.id]
    costs = world.cost_table
    if agent.side == Side.EXPLORER:
        spent = costs.move_cost * entry.moves + costs.explorer_attack_energy * entry.attacks \
            + costs.comm_cost * entry.comm_rounds
    else:
        spent = costs.move_cost * entry.moves + costs.monster_attack_energy * entry.attacks \
            + costs.comm_cost * entry.comm_rounds
    return max(100.0 - spent, 0.0)


def expected_hp(world, agent):
    entry = world.ledger[agent.id]
    per_hit = world.cost_table.explorer_attacked_hp if agent.side == Side.EXPLORER else world.cost_table.monster_attacked_hp
    return max(100.0 - per_hit * entry.hits_received, 0.0)


RNG = np.random.default_rng(0)


# formations

def test_polygon_of_four_is_a_square():
    slots = formation_targets(FormationShape.REGULAR_POLYGON, 4, (10.0, 10.0), 2.0)
    gaps = sorted(distance(a, b) for i, a in enumerate(slots) for b in slots[i + 1:])
    assert gaps[:4] == pytest.approx([2.0] * 4)
    assert gaps[4:] == pytest.approx([2.0 * math.sqrt(2)] * 2)
    centroid = np.mean(slots, axis=0)
    assert centroid == pytest.approx([10.0, 10.0])


def test_circle_points_are_evenly_spaced():
    k = 7
    anchor = (3.0, -2.0)
    slots = formation_targets(FormationShape.CIRCLE, k, anchor, 1.5)
    angles = sorted(math.atan2(y - anchor[1], x - anchor[0]) % (2 * math.pi) for x, y in slots)
    steps = np.diff(angles + [angles[0] + 2 * math.pi])
    assert steps == pytest.approx([2 * math.pi / k] * k)
    radii = [distance(s, anchor) for s in slots]
    assert radii == pytest.approx([radii[0]] * k)


def test_patrol_single_member_is_anchor():
    assert formation_targets(FormationShape.PATROL, 1, (4.0, 5.0), 2.0) == [(4.0, 5.0)]


def test_patrol_line_is_perpendicular_to_heading():
    slots = formation_targets(FormationShape.PATROL, 3, (0.0, 0.0), 2.0, heading=(1.0, 0.0))
    assert [s[0] for s in slots] == pytest.approx([0.0, 0.0, 0.0])
    assert [s[1] for s in slots] == pytest.approx([-2.0, 0.0, 2.0])


def test_triangle_apex_at_anchor_and_rows_behind():
    slots = formation_targets(FormationShape.TRIANGLE, 6, (0.0, 0.0), 1.0, heading=(1.0, 0.0))
    assert slots[0] == pytest.approx((0.0, 0.0))
    assert [s[0] for s in slots] == pytest.approx([0.0, -1.0, -1.0, -2.0, -2.0, -2.0])
    assert len(set(slots)) == 6


def test_file_runs_along_the_heading_around_the_anchor():
    slots = formation_targets(FormationShape.FILE, 3, (0.0, 0.0), 2.0, heading=(0.0, 1.0))
    assert [s[0] for s in slots] == pytest.approx([0.0, 0.0, 0.0])
    assert [s[1] for s in slots] == pytest.approx([2.0, 0.0, -2.0])


def test_half_width_by_shape():
    assert half_width(FormationShape.PATROL, 25, 2.0) == pytest.approx(24.0)
    assert half_width(FormationShape.TRIANGLE, 6, 1.0) == pytest.approx(1.0)
    assert half_width(FormationShape.REGULAR_POLYGON, 4, 2.0) == pytest.approx(math.sqrt(2))
    assert half_width(FormationShape.FILE, 25, 2.0) == 0.0
    assert half_width(FormationShape.PATROL, 1, 2.0) == 0.0


def test_corridor_measures_the_gap_between_two_rocks():
    rocks = (Obstacle((44.0, 56.0), 7.0), Obstacle((56.0, 44.0), 7.0))
    world = WorldState([], rocks, (85.0, 85.0))
    width, detour = corridor(world, (20.0, 20.0), (85.0, 85.0), 39.0, 24.0)
    assert width == pytest.approx(12.0 / math.sqrt(2) - 7.0)
    assert detour is None
    # both rocks lie beyond the look-ahead
    assert corridor(world, (20.0, 20.0), (85.0, 85.0), 10.0, 0.0) == (math.inf, None)


def test_corridor_detours_around_a_rock_on_the_route():
    rock = Obstacle((50.0, 50.0), 5.0)
    world = WorldState([], (rock,), (85.0, 85.0))
    width, detour = corridor(world, (20.0, 20.0), (85.0, 85.0), 60.0, 0.0)
    assert width == pytest.approx(-5.0)
    assert distance(detour, rock.center) == pytest.approx(rock.radius + world.params.formation_spacing)
    assert detour[0] + detour[1] == pytest.approx(100.0)

    passed = corridor(world, (60.0, 60.0), (85.0, 85.0), 60.0, 0.0)
    assert passed == (math.inf, None)


def test_formation_rejects_empty():
    with pytest.raises(ValueError):
        formation_targets(FormationShape.PATROL, 0, (0.0, 0.0), 1.0)


# Adapting The Edge

def edge_setup(upper, lower, colliding_upper=0):
    agent = explorer(0, (0.0, 0.0))
    peers = []
    next_id = 1
    for i in range(upper):
        peers.append((explorer(next_id, (1.0 + i, 2.0)), i < colliding_upper))
        next_id += 1
    for i in range(lower):
        peers.append((explorer(next_id, (1.0 + i, -2.0)), False))
        next_id += 1
    return agent, peers


def test_edge_follows_the_larger_side():
    agent, peers = edge_setup(upper=4, lower=3)
    direction, travel = adapt_the_edge(agent, (1.0, 0.0), peers, (5.0, 0.0), 1.0)
    assert direction == pytest.approx((0.0, 1.0))
    assert travel == 1.0

    agent, peers = edge_setup(upper=3, lower=4)
    direction, travel = adapt_the_edge(agent, (1.0, 0.0), peers, (5.0, 0.0), 1.0)
    assert direction == pytest.approx((0.0, -1.0))


def test_edge_equal_counts_stop():
    agent, peers = edge_setup(upper=3, lower=3)
    _, travel = adapt_the_edge(agent, (1.0, 0.0), peers, (5.0, 0.0), 1.0)
    assert travel == 0.0


def test_edge_ignores_colliding_peers():
    agent, peers = edge_setup(upper=4, lower=3, colliding_upper=2)
    direction, travel = adapt_the_edge(agent, (1.0, 0.0), peers, (5.0, 0.0), 1.0)
    assert direction == pytest.approx((0.0, -1.0))
    assert travel == 1.0


def test_edge_without_collision_heads_to_goal():
    agent = explorer(0, (1.0, 1.0))
    direction, travel = adapt_the_edge(agent, None, [], (4.0, 5.0), 1.0)
    assert direction == pytest.approx((0.6, 0.8))
    assert travel == 1.0


# step and bookkeeping

def test_moving_explorers_pay_exactly_the_move_cost():
    world = WorldState([explorer(0, (10.0, 10.0)), explorer(1, (10.0, 20.0))], (), (90.0, 90.0))
    policies = scripted({0: Command(goal=(50.0, 10.0)), 1: Command(goal=(50.0, 20.0))})
    step(world, policies, RNG)
    for agent in world.agents:
        assert agent.energy == 100.0 - 0.015
        assert agent.hp == 100.0
    assert world.agent(0).position == pytest.approx((11.0, 10.0))


def test_single_hits_cost_exact_points():
    params = WorldParams(attack_rounds_per_tick=1)
    world = WorldState([explorer(0, (10.0, 10.0)), monster(1, (11.0, 10.0))], (), (90.0, 90.0), params=params)
    step(world, scripted({0: Command(goal=None)}, {1: Command(goal=None, target=0)}), RNG)

    e, m = world.agent(0), world.agent(1)
    assert e.hp == 100.0 - 0.15
    assert m.hp == 100.0 - 0.05
    assert e.energy == 100.0 - 0.01
    assert m.energy == 100.0 - 0.03


def test_communication_is_charged_per_round():
    world = WorldState([explorer(0, (10.0, 10.0)), explorer(1, (12.0, 10.0))], (), (90.0, 90.0))
    for _ in range(3):
        step(world, scripted(talkers=(0, 1)), RNG)
    for agent in world.agents:
        assert world.ledger[agent.id].comm_rounds == 3
        assert agent.energy == 100.0 - 0.006 * 3


def test_empty_world_is_a_fixed_point():
    world = WorldState([], (), (50.0, 50.0))
    step(world, scripted(), RNG)
    assert world.tick == 1
    assert world.agents == []


def test_scripted_ledger_is_exact_over_100_ticks():
    agents = [
        explorer(0, (20.0, 20.0)),
        explorer(1, (22.0, 20.0)),
        explorer(2, (24.0, 20.0)),
        monster(3, (30.0, 30.0)),
        monster(4, (40.0, 20.0)),
    ]
    world = WorldState(agents, (), (95.0, 95.0))
    policies = scripted(
        {0: Command(goal=(35.0, 30.0)), 1: Command(goal=(22.0, 20.0)), 2: Command(goal=(40.0, 25.0), target=4)},
        {3: Command(goal=(21.0, 21.0), target=0), 4: Command(goal=None)},
        talkers=(0, 1, 2),
    )

    previous = {a.id: (a.hp, a.energy) for a in world.agents}
    for _ in range(100):
        step(world, policies, RNG)
        for agent in world.agents:
            assert agent.energy == expected_energy(world, agent)
            assert agent.hp == expected_hp(world, agent)
            hp, energy = previous[agent.id]
            assert agent.hp <= hp
            assert agent.energy <= energy
            previous[agent.id] = (agent.hp, agent.energy)

    assert world.ledger[0].attacks > 0
    assert world.ledger[0].hits_received > 0
    assert world.ledger[3].attacks == world.ledger[0].hits_received + world.ledger[1].hits_received \
        + world.ledger[2].hits_received


def test_dead_agents_are_removed_and_stop_acting():
    params = WorldParams(attack_rounds_per_tick=1000)
    world = WorldState([explorer(0, (10.0, 10.0)), monster(1, (11.0, 10.0))], (), (90.0, 90.0), params=params)
    step(world, scripted({0: Command(goal=None)}, {1: Command(goal=None, target=0)}), RNG)
    assert not world.agent(0).alive
    assert world.agent(0).hp == 0.0
    hits = world.ledger[1].hits_received
    step(world, scripted({0: Command(goal=None)}, {1: Command(goal=None, target=0)}), RNG)
    assert world.ledger[1].hits_received == hits


def test_exhausted_agent_dies_when_configured():
    cost = CostTable(move_cost=60.0)
    for kills, alive in ((True, False), (False, True)):
        world = WorldState(
            [explorer(0, (10.0, 10.0))], (), (90.0, 90.0),
            cost_table=cost, params=WorldParams(exhaustion_kills=kills),
        )
        policies = scripted({0: Command(goal=(50.0, 10.0))})
        step(world, policies, RNG)
        step(world, policies, RNG)
        assert world.agent(0).energy == 0.0
        assert world.agent(0).alive is alive
        position = world.agent(0).position
        step(world, policies, RNG)
        assert world.agent(0).position == position


def test_agents_go_around_obstacles_and_never_enter():
    rock = Obstacle((50.0, 50.0), 5.0)
    world = WorldState([explorer(0, (40.0, 50.0))], (rock,), (95.0, 95.0))
    policies = scripted({0: Command(goal=(60.0, 50.0))})
    for _ in range(300):
        step(world, policies, RNG)
        assert distance(world.agent(0).position, rock.center) >= rock.radius - 1e-9
        if distance(world.agent(0).position, (60.0, 50.0)) < 1e-6:
            break
    assert distance(world.agent(0).position, (60.0, 50.0)) < 1e-6


def test_positions_stay_inside_the_arena():
    world = WorldState([explorer(0, (1.0, 1.0))], (), (90.0, 90.0))
    step(world, scripted({0: Command(goal=(-10.0, -10.0))}), RNG)
    x, y = world.agent(0).position
    assert 0.0 <= x <= 100.0 and 0.0 <= y <= 100.0


# outcome

def test_outcome_examples():
    treasure = (50.0, 50.0)
    assert outcome(WorldState([explorer(0, treasure)], (), treasure)) == Outcome.EXPLORERS_WIN

    dead = explorer(0, (10.0, 10.0))
    dead.hp, dead.alive = 0.0, False
    assert outcome(WorldState([dead, monster(1, (20.0, 20.0))], (), treasure)) == Outcome.MONSTERS_WIN

    assert outcome(WorldState([explorer(0, (10.0, 10.0))], (), treasure)) == Outcome.ONGOING

    capped = WorldState([explorer(0, (10.0, 10.0))], (), treasure, tick=5, params=WorldParams(tick_cap=5))
    assert outcome(capped) == Outcome.MONSTERS_WIN


# world building

def test_build_world_places_and_classifies():
    rocks = (Obstacle((44.0, 56.0), 7.0), Obstacle((56.0, 44.0), 7.0))
    world = build_world(25, 25, (85.0, 85.0), (20.0, 20.0), np.random.default_rng(3), obstacles=rocks)

    explorers = world.side_of(Side.EXPLORER)
    monsters = world.side_of(Side.MONSTER)
    assert len(explorers) == 25 and len(monsters) == 25
    assert outcome(world) == Outcome.ONGOING
    for m in monsters:
        assert distance(m.position, (85.0, 85.0)) <= world.params.guard_radius + 1e-9
        assert 0.0 <= m.position[0] <= 100.0 and 0.0 <= m.position[1] <= 100.0
        assert m.attack_power == 3 * explorers[0].attack_power
        assert m.home == m.position
        assert m.adversary == AdversaryClass.INTENTIONAL
    assert all(o.adversary == AdversaryClass.UNINTENTIONAL for o in world.obstacles)
    assert all(e.adversary is None for e in explorers)


def test_build_world_is_deterministic():
    a = build_world(5, 8, (85.0, 85.0), (20.0, 20.0), np.random.default_rng(11))
    b = build_world(5, 8, (85.0, 85.0), (20.0, 20.0), np.random.default_rng(11))
    assert [x.position for x in a.agents] == [y.position for y in b.agents]


def test_snapshot_queries():
    world = WorldState(
        [explorer(0, (0.0, 0.0)), explorer(1, (3.0, 4.0)), monster(2, (0.0, 10.0)), monster(3, (40.0, 40.0))],
        (), (90.0, 90.0),
    )
    snap = take_snapshot(world)
    assert snap.distances[0, 1] == pytest.approx(5.0)
    assert snap.within(0, 6.0, Side.EXPLORER) == [1]
    assert snap.within(0, 15.0, Side.MONSTER) == [2]
    assert snap.seen_by([0, 1], 15.0, Side.MONSTER) == [2]
    assert snap.indices(Side.MONSTER) == [2, 3]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
