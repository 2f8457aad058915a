"""
Tests for the team and baseline policies.
"""
import numpy as np
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.adversary import AdversaryClass, InfoMode, PredictedState, RegressionCoeffs
from core.gut import GutMode, node_count
from core.matgame import solve
from core.policies import (
    EnemyView,
    GutDecision,
    GutTeamPolicy,
    LocalObs,
    MonsterMode,
    NearestMonsterPolicy,
    OpponentEstimator,
    PolicyMode,
    QmixAction,
    QmixGutPolicy,
    QmixMonsterPolicy,
    QmixPolicy,
    agent_views,
    build_game_spec,
    column_order,
    gut_policy,
    make_policies,
    observe,
    qmix_policy,
    rank_monsters,
)
from core.util_model import EngagementObs, payoff_level1, payoff_level2, payoff_level3
from core.world import (
    AgentState,
    FormationShape,
    Obstacle,
    Policies,
    Side,
    WorldState,
    distance,
    formation_targets,
    settle,
    step,
    take_snapshot,
)

SPEC = build_game_spec()
RNG = np.random.default_rng(0)

VIEWS = (
    EnemyView(id=7, distance=12.0, hp=40.0, energy=100.0, attack=150.0),
    EnemyView(id=5, distance=4.0, hp=90.0, energy=100.0, attack=150.0),
    EnemyView(id=9, distance=8.0, hp=60.0, energy=100.0, attack=225.0),
)


def explorer(agent_id, position):
    return AgentState(agent_id, Side.EXPLORER, position)


def monster(agent_id, position, hp=100.0):
    return AgentState(agent_id, Side.MONSTER, position, hp=hp, attack_power=3.0, home=position,
                      adversary=AdversaryClass.INTENTIONAL)


def test_game_spec_shape():
    assert node_count(SPEC) == 41
    assert [level.shape for level in SPEC.levels] == [(2, 2), (3, 3), (3, 2)]


def test_rank_monsters_labels():
    assert rank_monsters("Nearest", VIEWS) == [5, 9, 7]
    assert rank_monsters("A-Lowest", VIEWS) == [7, 9, 5]
    assert rank_monsters("A-Highest", VIEWS) == [9, 7, 5]
    with pytest.raises(ValueError):
        rank_monsters("Random", VIEWS)


def test_gut_policy_without_monsters():
    decision = gut_policy(EngagementObs(), SPEC, ())
    assert (decision.shape, decision.target, decision.groups) == (FormationShape.PATROL, None, 1)
    assert gut_policy(EngagementObs(), SPEC, (), treasure_sensed=True).shape == FormationShape.CIRCLE


def test_gut_policy_attack_nearest_one_group():
    obs = EngagementObs(n=5, m=2)
    # the first two levels have a pure saddle with the expected row action
    assert solve(payoff_level1(obs)).row_strategy.tolist() == [1.0, 0.0]
    assert solve(payoff_level2(obs)).row_strategy.tolist() == [1.0, 0.0, 0.0]
    # grouping is mixed; one group still carries the most weight
    np.testing.assert_allclose(solve(payoff_level3(obs)).row_strategy, [2 / 3, 1 / 3, 0.0], atol=1e-6)

    decision = gut_policy(obs, SPEC, VIEWS)
    assert (decision.shape, decision.target, decision.groups) == (FormationShape.TRIANGLE, 5, 1)
    assert decision.path.row_actions == ("Attack", "Nearest", "OneGroup")
    assert gut_policy(obs, SPEC, VIEWS, GutMode.MAP).target == 5


def test_gut_policy_weak_team_targets_lowest_hp():
    # 2n < m makes spreading out cheaper than closing in
    obs = EngagementObs(n=1, m=3)
    decision = gut_policy(obs, SPEC, VIEWS)
    assert decision.path.row_actions[1] == "A-Lowest"
    assert decision.target == 7


def test_gut_decisions_follow_the_engagement():
    paths = set()
    for n, m in ((25, 1), (25, 25)):
        for r_ev in (40.0, 60.0):
            obs = EngagementObs(
                n=n, m=m, d=10.0, f=0.01, q=0.03, phi_e=10.0, phi_m=10.0,
                t_ev=50.0, r_ev=r_ev, t_mv=150.0, r_mv=50.0,
            )
            paths.add(gut_policy(obs, SPEC, VIEWS).path.row_actions)
    # fresh teams outlast in defence, bloodied ones strike; crowds split the team
    assert {p[0] for p in paths} == {"Attack", "Defend"}
    assert {"OneGroup", "ThreeGroups"} <= {p[2] for p in paths}
    assert len(paths) >= 4


def test_column_order_leads_with_the_centre():
    line = formation_targets(FormationShape.PATROL, 5, (20.0, 20.0), 2.0, (1.0, 0.0))
    world = WorldState([explorer(i, slot) for i, slot in enumerate(line)], (), (85.0, 20.0))
    snap = take_snapshot(world)
    assert column_order(snap, [0, 1, 2, 3, 4], (20.0, 20.0), (1.0, 0.0)) == [2, 1, 3, 0, 4]


def test_gut_team_files_into_a_narrow_pass():
    line = formation_targets(FormationShape.PATROL, 25, (20.0, 20.0), 2.0, (1.0, 1.0))
    rocks = (Obstacle((44.0, 56.0), 7.0), Obstacle((56.0, 44.0), 7.0))
    world = WorldState([explorer(i, slot) for i, slot in enumerate(line)], rocks, (85.0, 85.0))
    commands = GutTeamPolicy(SPEC).decide(world, take_snapshot(world), RNG)
    assert len(commands) == 25
    for command in commands.values():
        # every slot sits on the diagonal through the pass
        assert command.goal[0] == pytest.approx(command.goal[1], abs=1e-6)
    assert len({c.goal for c in commands.values()}) == 25
    assert distance(commands[12].goal, world.treasure) < distance(commands[0].goal, world.treasure)


def test_gut_team_closes_in_and_kills_its_target():
    line = formation_targets(FormationShape.PATROL, 10, (40.0, 40.0), 2.0, (1.0, 1.0))
    world = WorldState([explorer(i, slot) for i, slot in enumerate(line)] + [monster(10, (46.0, 46.0))], (), (85.0, 85.0))
    for i in range(10):
        # wounded to HP 85 with full energy, so the team strikes
        world.ledger[i].hits_received = 100
        settle(world, world.agent(i))
    policies = Policies(explorers=GutTeamPolicy(SPEC), monsters=NearestMonsterPolicy())
    for _ in range(100):
        step(world, policies, RNG)
        if not world.agent(10).alive:
            break
    assert not world.agent(10).alive
    assert world.agent(10).hp == 0.0
    assert sum(e.alive for e in world.side_of(Side.EXPLORER)) == 10


def test_gut_groups_fire_on_their_own_targets():
    world = small_world()
    policy = GutTeamPolicy(SPEC)
    policy.plan = lambda world, snapshot: GutDecision(FormationShape.TRIANGLE, 4, 2, (4, 3))
    commands = policy.decide(world, take_snapshot(world), RNG)
    assert [commands[i].target for i in (0, 1, 2)] == [4, 4, 3]
    # one shared wedge, packed inside attack range
    goals = [commands[i].goal for i in (0, 1, 2)]
    assert max(distance(a, b) for a in goals for b in goals) < world.attack_range


def test_qmix_policy_examples():
    weak = EnemyView(id=4, distance=2.0, hp=20.0, energy=100.0, attack=50.0)
    strong = EnemyView(id=3, distance=1.0, hp=80.0, energy=100.0, attack=50.0)
    local = LocalObs((0, 1, 2), (strong, weak), EngagementObs(n=3, m=1))
    assert qmix_policy(local) == (QmixAction.ATTACK, 4)

    assert qmix_policy(LocalObs((0,), (), EngagementObs(n=1, m=0))) == (QmixAction.ADVANCE, None)

    outnumbered = EngagementObs(n=1, m=10, t_ev=0.5, r_ev=0.5, t_mv=1.0, r_mv=1.0)
    assert qmix_policy(LocalObs((0,), (strong,), outnumbered)) == (QmixAction.DEFEND, None)


def small_world():
    agents = [
        explorer(0, (20.0, 20.0)),
        explorer(1, (22.0, 20.0)),
        explorer(2, (24.0, 20.0)),
        monster(3, (30.0, 25.0), hp=50.0),
        monster(4, (26.0, 28.0)),
        monster(5, (80.0, 80.0)),
    ]
    return WorldState(agents, (), (85.0, 85.0))


def test_observe_counts_and_abilities():
    world = small_world()
    snap = take_snapshot(world)
    obs = observe(world, snap, [0, 1, 2], [3, 4])
    assert (obs.n, obs.m) == (3, 2)
    # t = gamma * energy * power, r = delta * HP
    assert obs.t_ev == pytest.approx(50.0)
    assert obs.r_ev == pytest.approx(50.0)
    assert obs.t_mv == pytest.approx(3 * obs.t_ev)
    assert obs.r_mv == pytest.approx(0.5 * 75.0)
    assert obs.phi_e == obs.phi_m == world.params.attack_rounds_per_tick
    assert obs.f == world.cost_table.explorer_attack_energy
    assert obs.q == world.cost_table.monster_attack_energy
    assert obs.d > 0
    # monster 3 is the wounded one
    assert obs.em_low == pytest.approx(50.0 / 75.0)
    assert obs.em_high == pytest.approx(1.0)
    centroid = (22.0, 20.0)
    assert obs.dm_low == pytest.approx(distance(centroid, (30.0, 25.0)) / obs.d)

    guessed = observe(world, snap, [0, 1, 2], [3, 4], predicted=PredictedState(e_uc=0.2, e_el=40.0))
    assert guessed.e_m == 40.0
    assert guessed.q == 0.2
    assert guessed.t_mv == pytest.approx(0.5 * 40.0 * 3.0)
    # hidden monsters all look unhurt
    assert guessed.r_mv == pytest.approx(50.0)
    assert guessed.em_low == 1.0


def test_hidden_monsters_fall_back_to_distance():
    world = small_world()
    snap = take_snapshot(world)
    hidden = agent_views(snap, (22.0, 20.0), [3, 4], 0.5, PredictedState(e_uc=0.2, e_el=40.0))
    assert rank_monsters("A-Lowest", hidden) == [4, 3]
    assert rank_monsters("A-Highest", hidden) == [4, 3]
    seen = agent_views(snap, (22.0, 20.0), [3, 4], 0.5)
    assert rank_monsters("A-Lowest", seen) == [3, 4]


def test_estimator_modes():
    world = small_world()
    world.agent(0).hp = 70.0
    assert OpponentEstimator().estimate(world) is None

    quiet = RegressionCoeffs(noise_std=0.0)
    state = OpponentEstimator(InfoMode.LINEAR, quiet).estimate(world)
    # only explorer 0 was hit; the system loss spreads over all three
    assert state.e_uc == pytest.approx(30.0 * 0.08)
    assert state.e_el == pytest.approx(100.0 - 10.0 * 0.03)

    a = OpponentEstimator(InfoMode.POLY, RegressionCoeffs(), np.random.default_rng(5)).estimate(world)
    b = OpponentEstimator(InfoMode.POLY, RegressionCoeffs(), np.random.default_rng(5)).estimate(world)
    assert a == b


def test_gut_team_policy_caches_on_monster_count():
    world = small_world()
    policy = GutTeamPolicy(SPEC)
    snap = take_snapshot(world)
    first = policy.plan(world, snap)
    second = policy.plan(world, snap)
    assert first is second
    assert policy.recomputations == 1
    assert first.shape == FormationShape.TRIANGLE

    commands = policy.decide(world, snap, RNG)
    assert set(commands) == {0, 1, 2}
    assert all(c.target == first.target for c in commands.values())
    assert policy.recomputations == 1

    world.agent(4).alive = False
    policy.plan(world, take_snapshot(world))
    assert policy.recomputations == 2


def test_gut_team_policy_patrols_then_circles():
    world = WorldState([explorer(0, (20.0, 20.0)), explorer(1, (22.0, 20.0))], (), (85.0, 85.0))
    policy = GutTeamPolicy(SPEC)
    commands = policy.decide(world, take_snapshot(world), RNG)
    assert policy.plan(world, take_snapshot(world)).shape == FormationShape.PATROL
    assert all(c.target is None for c in commands.values())

    for agent in world.agents:
        agent.position = (80.0, 80.0)
    commands = policy.decide(world, take_snapshot(world), RNG)
    assert policy.plan(world, take_snapshot(world)).shape == FormationShape.CIRCLE
    for c in commands.values():
        assert distance(c.goal, world.treasure) <= world.treasure_radius


def test_gut_team_communication_and_peers():
    world = small_world()
    snap = take_snapshot(world)
    policy = GutTeamPolicy(SPEC)
    assert policy.communicating(world, snap) == {0, 1, 2}
    assert policy.edge_peers(world, snap, 0) == [1, 2]

    lone = WorldState([explorer(0, (20.0, 20.0))], (), (85.0, 85.0))
    assert policy.communicating(lone, take_snapshot(lone)) == set()


def test_unintentional_monsters_are_not_targeted():
    world = small_world()
    for agent in world.agents:
        if agent.side == Side.MONSTER:
            agent.adversary = AdversaryClass.NOT_ADVERSARY
    decision = GutTeamPolicy(SPEC).plan(world, take_snapshot(world))
    assert decision.target is None


def test_qmix_policy_attacks_weakest_visible_monster():
    world = small_world()
    commands = QmixPolicy().decide(world, take_snapshot(world), RNG)
    assert {c.target for c in commands.values()} == {3}
    for command in commands.values():
        assert distance(command.goal, world.agent(3).position) <= world.attack_range


def test_qmix_policy_advances_without_contacts():
    world = WorldState([explorer(0, (20.0, 20.0)), explorer(1, (60.0, 20.0))], (), (85.0, 85.0))
    policy = QmixPolicy()
    snap = take_snapshot(world)
    commands = policy.decide(world, snap, RNG)
    assert all(c.goal == world.treasure for c in commands.values())
    # too far apart to talk
    assert policy.communicating(world, snap) == set()


def test_qmix_gut_policy_targets_per_explorer():
    world = small_world()
    policy = QmixGutPolicy(SPEC)
    snap = take_snapshot(world)
    commands = policy.decide(world, snap, RNG)
    assert set(commands) == {0, 1, 2}
    for command in commands.values():
        assert command.target in (3, 4)
    again = policy.decide(world, snap, RNG)
    assert again == commands


def test_nearest_monster_policy():
    world = small_world()
    commands = NearestMonsterPolicy().decide(world, take_snapshot(world), RNG)
    assert commands[3].target == 2
    assert commands[4].target in (1, 2)
    assert commands[5].goal == world.agent(5).home
    assert commands[5].target is None


def test_qmix_monster_policy():
    world = small_world()
    commands = QmixMonsterPolicy().decide(world, take_snapshot(world), RNG)
    assert commands[5].goal == world.agent(5).home
    # monsters outclass explorers one for one and attack the weakest
    assert commands[3].target in (0, 1, 2)
    assert commands[4].target in (0, 1, 2)


def test_make_policies_dispatch():
    assert isinstance(make_policies(PolicyMode.GUT, MonsterMode.NEAREST).explorers, GutTeamPolicy)
    assert isinstance(make_policies(PolicyMode.QMIX, MonsterMode.NEAREST).explorers, QmixPolicy)
    built = make_policies(PolicyMode.QMIX_GUT, MonsterMode.QMIX)
    assert isinstance(built.explorers, QmixGutPolicy)
    assert isinstance(built.monsters, QmixMonsterPolicy)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
