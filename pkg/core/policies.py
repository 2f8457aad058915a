"""
Decision policies for the arena.

The GUT team policy fuses every explorer's perception into one engagement
observation and reads formation, target and grouping off the game tree.
The QMIX-style baselines decide per explorer on a partial-communication
view. Monsters either chase their nearest explorer or run the same greedy
winning-rate heuristic from their own side.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from core.adversary import AdversaryClass, InfoMode, PredictedState, RegressionCoeffs, predict
from core.gut import GutMode, GutSpec, LevelSpec, StrategyPath, select
from core.logging_utils import get_logger
from core.matgame import DEFAULT_TOL
from core.util_model import (
    LEVEL1_ACTIONS,
    LEVEL2_ACTIONS,
    LEVEL3_COL_ACTIONS,
    LEVEL3_ROW_ACTIONS,
    EnergyCoeffs,
    EngagementObs,
    HpCoeffs,
    LevelModifiers,
    WinCoeffs,
    level_fractions,
    level1_cell,
    level2_cell,
    payoff_level1,
    payoff_level2,
    payoff_level3,
    winning_probability,
)
from core.world import (
    FULL_LEVEL,
    Command,
    FormationShape,
    Policies,
    Side,
    Snapshot,
    Vec,
    WorldState,
    corridor,
    distance,
    formation_targets,
    half_width,
    triangle_rows,
)

logger = get_logger(__name__)

QMIX_THRESHOLD = 0.5
# attackers close to this fraction of attack_range
STANDOFF_FRACTION = 0.8


class PolicyMode(str, Enum):
    GUT = "gut"
    QMIX = "qmix"
    QMIX_GUT = "qmix-gut"


class MonsterMode(str, Enum):
    NEAREST = "nearest"
    QMIX = "qmix"


class QmixAction(str, Enum):
    ATTACK = "Attack"
    DEFEND = "Defend"
    ADVANCE = "Advance"


@dataclass(frozen=True)
class GameCoeffs:
    """Coefficient bundles shared by the three level tables."""
    win: WinCoeffs = field(default_factory=WinCoeffs)
    energy: EnergyCoeffs = field(default_factory=EnergyCoeffs)
    hp: HpCoeffs = field(default_factory=HpCoeffs)
    mods: LevelModifiers = field(default_factory=LevelModifiers)


@dataclass(frozen=True)
class EnemyView:
    """What an agent knows about one perceived agent of the other side."""
    id: int
    distance: float
    hp: float
    energy: float
    attack: float


@dataclass(frozen=True)
class GutDecision:
    shape: FormationShape
    target: Optional[int]
    groups: int
    targets: Tuple[int, ...] = ()
    path: Optional[StrategyPath] = None


@dataclass(frozen=True)
class LocalObs:
    """One agent's partial-communication view."""
    allies: Tuple[int, ...]
    enemies: Tuple[EnemyView, ...]
    obs: EngagementObs


def build_game_spec(coeffs: GameCoeffs = GameCoeffs(), tol: float = DEFAULT_TOL) -> GutSpec:
    """
    Three-level tree of the Explorers game.

    Level 1 weighs Attack against Defend on winning probability, level 2
    picks the targeting rule on (negated) energy cost and level 3 the
    group count on HP exchange. Each level hands the cell-adjusted
    observation down to the next.

    Args:
        coeffs: Coefficient bundles
        tol: Solver tolerance

    Returns:
        GutSpec
    """
    return GutSpec((
        LevelSpec(
            1, LEVEL1_ACTIONS, LEVEL1_ACTIONS,
            lambda obs: payoff_level1(obs, coeffs.win, coeffs.mods),
            condition=lambda obs, g, k: level1_cell(obs, g, k, coeffs.mods),
        ),
        LevelSpec(
            2, LEVEL2_ACTIONS, LEVEL2_ACTIONS,
            lambda obs: payoff_level2(obs, coeffs.energy, coeffs.mods),
            condition=lambda obs, g, k: level2_cell(obs, g, k, coeffs.mods),
        ),
        LevelSpec(
            3, LEVEL3_ROW_ACTIONS, LEVEL3_COL_ACTIONS,
            lambda obs: payoff_level3(obs, coeffs.hp),
        ),
    ), tol=tol)


def _ranked(label: str, views: Sequence[EnemyView]) -> List[EnemyView]:
    if label == "Nearest":
        key = lambda mv: (mv.distance, mv.id)
    elif label == "A-Lowest":
        key = lambda mv: (mv.hp, mv.distance, mv.id)
    elif label == "A-Highest":
        key = lambda mv: (-mv.attack, mv.hp, mv.distance, mv.id)
    else:
        raise ValueError(f"unknown targeting label: {label}")
    return sorted(views, key=key)


def rank_monsters(label: str, monsters: Sequence[EnemyView]) -> List[int]:
    """
    Order perceived monsters by a level-2 targeting label.

    Args:
        label: "Nearest", "A-Lowest" (lowest HP) or "A-Highest" (highest attack ability)
        monsters: Perceived monsters

    Returns:
        Monster ids, best target first
    """
    return [mv.id for mv in _ranked(label, monsters)]


def gut_policy(
    team_obs: EngagementObs,
    spec: GutSpec,
    monsters: Sequence[EnemyView],
    mode: GutMode = GutMode.GREEDY,
    treasure_sensed: bool = False
) -> GutDecision:
    """
    Formation shape, target and group count for the team.

    Args:
        team_obs: Fused engagement observation
        spec: Game tree
        monsters: Perceived intentional adversaries
        mode: Greedy per-level or MAP path selection
        treasure_sensed: Whether any explorer senses the treasure

    Returns:
        GutDecision
    """
    if not monsters:
        shape = FormationShape.CIRCLE if treasure_sensed else FormationShape.PATROL
        return GutDecision(shape, None, 1)

    path = select(spec, team_obs, mode)
    stance, label, grouping = path.row_actions
    shape = FormationShape.TRIANGLE if stance == "Attack" else FormationShape.REGULAR_POLYGON
    ranked = rank_monsters(label, monsters)
    groups = max(1, min(LEVEL3_ROW_ACTIONS.index(grouping) + 1, team_obs.n))
    targets = tuple(ranked[j % len(ranked)] for j in range(groups))
    return GutDecision(shape, targets[0], groups, targets, path)


class OpponentEstimator:
    """
    Supplies the monsters' energy state under the configured information mode.

    Under incomplete information the unit attack cost and energy level come
    from the regression predictors fed with the explorers' own HP losses:
    the mean loss of the explorers that have been hit, and the system loss
    spread over the whole team.
    """

    def __init__(
        self,
        mode: InfoMode = InfoMode.COMPLETE,
        regression: RegressionCoeffs = RegressionCoeffs(),
        rng: Optional[np.random.Generator] = None
    ):
        self.mode = mode
        self.regression = regression
        self.rng = rng

    def estimate(self, world: WorldState) -> Optional[PredictedState]:
        if self.mode == InfoMode.COMPLETE:
            return None
        losses = [FULL_LEVEL - e.hp for e in world.side_of(Side.EXPLORER)]
        hit = [loss for loss in losses if loss > 0]
        unit_hp = float(np.mean(hit)) if hit else 0.0
        average_hp = float(sum(losses)) / len(losses) if losses else 0.0
        return predict(self.mode, unit_hp, average_hp, self.regression, self.rng)


def agent_views(
    snapshot: Snapshot,
    origin: Vec,
    indices: Sequence[int],
    gamma: float,
    hidden: Optional[PredictedState] = None
) -> List[EnemyView]:
    """
    Views of some agents as seen from a point.

    Attack ability is gamma * energy * attack power. When the agents' state
    is hidden every one of them shows the predicted energy and full HP.

    Args:
        snapshot: Frozen view of the tick
        origin: Observer position
        indices: Snapshot indices of the viewed agents
        gamma: Attack ability coefficient of the viewed side
        hidden: Prediction standing in for the true state

    Returns:
        One view per index
    """
    views = []
    for j in indices:
        if hidden is None:
            hp, energy = float(snapshot.hp[j]), float(snapshot.energy[j])
        else:
            hp, energy = FULL_LEVEL, hidden.e_el
        views.append(EnemyView(
            id=snapshot.ids[j],
            distance=distance(origin, snapshot.position(j)),
            hp=hp,
            energy=energy,
            attack=gamma * energy * float(snapshot.attack_power[j]),
        ))
    return views


def _fractions(views: Sequence[EnemyView], d: float) -> Tuple[float, float, float, float]:
    """(low, high, low distance, high distance) for the A-Lowest and A-Highest picks."""
    if not views:
        return 1.0, 1.0, 1.0, 1.0
    low, _ = level_fractions([v.hp for v in views])
    _, high = level_fractions([v.attack for v in views])
    low_pick = _ranked("A-Lowest", views)[0]
    high_pick = _ranked("A-Highest", views)[0]
    return low, high, low_pick.distance / d, high_pick.distance / d


def observe(
    world: WorldState,
    snapshot: Snapshot,
    allies: Sequence[int],
    enemies: Sequence[int],
    ally_side: Side = Side.EXPLORER,
    predicted: Optional[PredictedState] = None,
    hp_coeffs: HpCoeffs = HpCoeffs()
) -> EngagementObs:
    """
    Engagement observation from one side's point of view.

    Abilities are side averages of t = gamma * energy * attack power and
    r = delta * HP. Both sides make ``attack_rounds_per_tick`` attacks a tick.
    A prediction hides the opponents' own state: each shows the predicted
    energy and full HP, and the opponents' attack cost becomes the predicted
    unit cost.

    Args:
        world: Current world
        snapshot: Frozen view of the tick
        allies: Snapshot indices of the observing side
        enemies: Snapshot indices of the perceived opponents
        ally_side: Which side is observing
        predicted: Opponent state estimate replacing the true state
        hp_coeffs: Ability coefficients

    Returns:
        EngagementObs with n = len(allies), m = len(enemies)
    """
    costs = world.cost_table
    if ally_side == Side.EXPLORER:
        f, q = costs.explorer_attack_energy, costs.monster_attack_energy
        gamma_a, delta_a, gamma_o, delta_o = hp_coeffs.gamma_e, hp_coeffs.delta_e, hp_coeffs.gamma_m, hp_coeffs.delta_m
    else:
        f, q = costs.monster_attack_energy, costs.explorer_attack_energy
        gamma_a, delta_a, gamma_o, delta_o = hp_coeffs.gamma_m, hp_coeffs.delta_m, hp_coeffs.gamma_e, hp_coeffs.delta_e
    if predicted is not None:
        q = max(predicted.e_uc, 0.0)

    ally_center = _centroid(snapshot, allies) if allies else (0.0, 0.0)
    enemy_center = _centroid(snapshot, enemies) if enemies else ally_center
    own = agent_views(snapshot, enemy_center, allies, gamma_a)
    foes = agent_views(snapshot, ally_center, enemies, gamma_o, predicted)
    d = max(float(np.mean([v.distance for v in foes])), 1e-6) if own and foes else 1.0

    e_a = float(np.mean([v.energy for v in own])) if own else FULL_LEVEL
    e_o = float(np.mean([v.energy for v in foes])) if foes else FULL_LEVEL
    t_ev = float(np.mean([v.attack for v in own])) if own else gamma_a * FULL_LEVEL
    r_ev = float(np.mean([delta_a * v.hp for v in own])) if own else delta_a * FULL_LEVEL
    # a spent opponent still has to be beaten; keep its ability term positive
    t_mv = max(float(np.mean([v.attack for v in foes])) if foes else gamma_o * FULL_LEVEL, 1e-6)
    r_mv = max(float(np.mean([delta_o * v.hp for v in foes])) if foes else delta_o * FULL_LEVEL, 1e-6)

    em_low, em_high, dm_low, dm_high = _fractions(foes, d)
    ee_low, ee_high, _, _ = _fractions(own, d)
    rounds = float(world.params.attack_rounds_per_tick)
    return EngagementObs(
        n=len(allies), m=len(enemies), d=d, v=world.params.speed, f=f, q=q,
        t_ev=t_ev, t_mv=t_mv, r_ev=r_ev, r_mv=r_mv, t_e=t_ev, t_m=t_mv, r_e=r_ev, r_m=r_mv,
        phi_e=rounds, phi_m=rounds,
        e_e=min(max(e_a, 0.0), FULL_LEVEL), e_m=min(max(e_o, 0.0), FULL_LEVEL),
        ee_low=ee_low, ee_high=ee_high, em_low=em_low, em_high=em_high, dm_low=dm_low, dm_high=dm_high,
    )


def _towards(origin: Vec, goal: Vec, length: float) -> Vec:
    gap = distance(origin, goal)
    if gap < 1e-9:
        return origin
    step = min(length, gap)
    return origin[0] + (goal[0] - origin[0]) / gap * step, origin[1] + (goal[1] - origin[1]) / gap * step


def standoff(position: Vec, target: Vec, gap: float) -> Vec:
    """Point at the given gap from target on the side facing position."""
    between = distance(position, target)
    if between <= gap or between < 1e-9:
        return position
    return target[0] + (position[0] - target[0]) / between * gap, target[1] + (position[1] - target[1]) / between * gap


def _intentional(world: WorldState, snapshot: Snapshot, indices: Sequence[int]) -> List[int]:
    return [j for j in indices if world.agent(snapshot.ids[j]).adversary == AdversaryClass.INTENTIONAL]


def _centroid(snapshot: Snapshot, indices: Sequence[int]) -> Vec:
    point = snapshot.positions[list(indices)].mean(axis=0)
    return float(point[0]), float(point[1])


def local_view(world: WorldState, snapshot: Snapshot, index: int, side: Side) -> Tuple[List[int], List[int]]:
    """
    Allies within sensing range plus enemies seen by the agent or by those allies.

    Returns:
        (ally indices including the agent, enemy indices)
    """
    enemy_side = Side.MONSTER if side == Side.EXPLORER else Side.EXPLORER
    radius = world.sensing_radius
    allies = [index] + snapshot.within(index, radius, side)
    return sorted(allies), snapshot.seen_by(allies, radius, enemy_side)


def column_order(snapshot: Snapshot, members: Sequence[int], centroid: Vec, heading: Vec) -> List[int]:
    """
    Members in file order: furthest ahead of the centroid and nearest the
    route line first.
    """
    forward = np.asarray(heading, dtype=np.float64)
    length = float(np.linalg.norm(forward))
    forward = forward / length if length > 1e-9 else np.array([1.0, 0.0])
    lateral = np.array([-forward[1], forward[0]])

    def key(i: int):
        offset = snapshot.positions[i] - np.asarray(centroid)
        return -(float(offset @ forward) - abs(float(offset @ lateral))), snapshot.ids[i]

    return sorted(members, key=key)


class GutTeamPolicy:
    """
    Full-communication team policy driven by the game tree.

    The tree is re-solved only when the number of perceived monsters
    changes; in between the cached decision is reused.
    """

    def __init__(
        self,
        spec: GutSpec,
        mode: GutMode = GutMode.GREEDY,
        estimator: Optional[OpponentEstimator] = None,
        hp_coeffs: HpCoeffs = HpCoeffs()
    ):
        self.spec = spec
        self.mode = mode
        self.estimator = estimator or OpponentEstimator()
        self.hp_coeffs = hp_coeffs
        self._cached_count: Optional[int] = None
        self._cached: Optional[GutDecision] = None
        self._predicted: Optional[PredictedState] = None
        self.recomputations = 0

    def communicating(self, world: WorldState, snapshot: Snapshot) -> Set[int]:
        explorers = snapshot.indices(Side.EXPLORER)
        if len(explorers) < 2:
            return set()
        return {snapshot.ids[i] for i in explorers}

    def edge_peers(self, world: WorldState, snapshot: Snapshot, index: int) -> List[int]:
        return [i for i in snapshot.indices(Side.EXPLORER) if i != index]

    def perceived(self, world: WorldState, snapshot: Snapshot) -> List[int]:
        """Intentional adversaries sensed by any living explorer."""
        seen = snapshot.seen_by(snapshot.indices(Side.EXPLORER), world.sensing_radius, Side.MONSTER)
        return _intentional(world, snapshot, seen)

    def plan(self, world: WorldState, snapshot: Snapshot) -> GutDecision:
        explorers = snapshot.indices(Side.EXPLORER)
        monsters = self.perceived(world, snapshot)
        treasure_sensed = any(
            distance(snapshot.position(i), world.treasure) <= world.sensing_radius for i in explorers
        )

        if not monsters:
            self._cached_count = 0
            self._cached = gut_policy(EngagementObs(), self.spec, (), self.mode, treasure_sensed)
            return self._cached

        centroid = _centroid(snapshot, explorers)
        if self._cached_count == len(monsters) and self._cached is not None:
            live = {snapshot.ids[j] for j in monsters}
            if all(t in live for t in self._cached.targets):
                return self._cached
            # same count, different monsters: keep the strategy, re-rank targets
            views = agent_views(snapshot, centroid, monsters, self.hp_coeffs.gamma_m, self._predicted)
            ranked = rank_monsters(self._cached.path.row_actions[1], views)
            targets = tuple(ranked[j % len(ranked)] for j in range(self._cached.groups))
            self._cached = GutDecision(self._cached.shape, targets[0], self._cached.groups, targets, self._cached.path)
            return self._cached

        self._predicted = self.estimator.estimate(world)
        views = agent_views(snapshot, centroid, monsters, self.hp_coeffs.gamma_m, self._predicted)
        team_obs = observe(world, snapshot, explorers, monsters, Side.EXPLORER, self._predicted, self.hp_coeffs)
        decision = gut_policy(team_obs, self.spec, views, self.mode, treasure_sensed)
        self._cached_count = len(monsters)
        self._cached = decision
        self.recomputations += 1
        logger.debug(
            f"Tick {world.tick}: {len(monsters)} monsters perceived, "
            f"{decision.shape.value} x{decision.groups} on {decision.targets}"
        )
        return decision

    def decide(self, world: WorldState, snapshot: Snapshot, rng: np.random.Generator) -> Dict[int, Command]:
        """
        Slot commands for one shared formation.

        Marching formations anchor one step ahead of the centroid. An
        attacking wedge packs tight enough to fit inside attack range and
        closes on a target lying ahead; otherwise the team keeps its course
        for the treasure. Where obstacles leave less room than the formation
        needs the team files through, and a blocked route bends around the
        blocking obstacle. Groups split the slots in order and each fires on
        its own target.
        """
        explorers = snapshot.indices(Side.EXPLORER)
        if not explorers:
            return {}
        decision = self.plan(world, snapshot)
        params = world.params
        k = len(explorers)

        if decision.shape == FormationShape.CIRCLE:
            spacing = min(params.formation_spacing, params.treasure_radius * 0.5, np.pi * params.treasure_radius / k)
            slots = formation_targets(FormationShape.CIRCLE, k, world.treasure, spacing)
            return {snapshot.ids[i]: Command(goal=slot) for i, slot in zip(explorers, slots)}

        centroid = _centroid(snapshot, explorers)
        course = (world.treasure[0] - centroid[0], world.treasure[1] - centroid[1])
        shape, spacing, destination = decision.shape, params.formation_spacing, world.treasure
        charging = False
        if shape == FormationShape.TRIANGLE:
            rows = triangle_rows(k)
            spacing = min(spacing, 0.5 * (1.0 - STANDOFF_FRACTION) * params.attack_range / max(rows - 1, 1))
            target = snapshot.position(snapshot.index[decision.target])
            toward = (target[0] - centroid[0], target[1] - centroid[1])
            if toward[0] * course[0] + toward[1] * course[1] > 0:
                destination = standoff(centroid, target, STANDOFF_FRACTION * params.attack_range)
                charging = True

        shape, spacing, destination = self._fit_route(world, shape, k, spacing, centroid, destination)
        if charging:
            heading = (target[0] - centroid[0], target[1] - centroid[1])
        else:
            heading = (destination[0] - centroid[0], destination[1] - centroid[1])
        anchor = _towards(centroid, destination, params.speed)
        members = column_order(snapshot, explorers, centroid, heading) if shape == FormationShape.FILE else explorers
        slots = formation_targets(shape, k, anchor, spacing, heading)

        if decision.target is None:
            return {snapshot.ids[i]: Command(goal=slot) for i, slot in zip(members, slots)}
        commands: Dict[int, Command] = {}
        for j, group in enumerate(np.array_split(np.arange(k), decision.groups)):
            for slot_index in group:
                i = members[int(slot_index)]
                commands[snapshot.ids[i]] = Command(goal=slots[int(slot_index)], target=decision.targets[j])
        return commands

    @staticmethod
    def _fit_route(
        world: WorldState,
        shape: FormationShape,
        members: int,
        spacing: float,
        centroid: Vec,
        destination: Vec
    ) -> Tuple[FormationShape, float, Vec]:
        params = world.params
        reach = (members - 1) / 2 * params.formation_spacing
        width, detour = corridor(world, centroid, destination, params.sensing_radius + reach, reach)
        if detour is not None:
            logger.debug(f"Route from {centroid} blocked; detouring via {detour}")
            destination = detour
        if half_width(shape, members, spacing) > width:
            return FormationShape.FILE, params.formation_spacing, destination
        return shape, spacing, destination


def qmix_policy(local: LocalObs, win_coeffs: WinCoeffs = WinCoeffs(), threshold: float = QMIX_THRESHOLD) -> Tuple[QmixAction, Optional[int]]:
    """
    Greedy attack-or-defend choice on the local winning rate.

    Args:
        local: The agent's partial view
        win_coeffs: Winning-rate coefficients
        threshold: Attack when the local winning rate reaches this

    Returns:
        (action, target id) where only Attack carries a target
    """
    if not local.enemies:
        return QmixAction.ADVANCE, None
    if winning_probability(local.obs, win_coeffs) >= threshold:
        weakest = min(local.enemies, key=lambda mv: (mv.hp, mv.distance, mv.id))
        return QmixAction.ATTACK, weakest.id
    return QmixAction.DEFEND, None


class _PartialCommunication:
    """Shared plumbing of the per-agent explorer baselines."""

    def __init__(self, estimator: Optional[OpponentEstimator] = None, hp_coeffs: HpCoeffs = HpCoeffs()):
        self.estimator = estimator or OpponentEstimator()
        self.hp_coeffs = hp_coeffs

    def communicating(self, world: WorldState, snapshot: Snapshot) -> Set[int]:
        return {
            snapshot.ids[i] for i in snapshot.indices(Side.EXPLORER)
            if snapshot.within(i, world.sensing_radius, Side.EXPLORER)
        }

    def edge_peers(self, world: WorldState, snapshot: Snapshot, index: int) -> List[int]:
        return snapshot.within(index, world.comm_radius, Side.EXPLORER)

    def local(self, world: WorldState, snapshot: Snapshot, index: int, predicted: Optional[PredictedState]) -> LocalObs:
        allies, seen = local_view(world, snapshot, index, Side.EXPLORER)
        monsters = _intentional(world, snapshot, seen)
        obs = observe(world, snapshot, allies, monsters, Side.EXPLORER, predicted, self.hp_coeffs)
        views = agent_views(snapshot, snapshot.position(index), monsters, self.hp_coeffs.gamma_m, predicted)
        return LocalObs(tuple(snapshot.ids[i] for i in allies), tuple(views), obs)


class QmixPolicy(_PartialCommunication):
    """Each explorer attacks the weakest visible monster when it expects to win, else holds."""

    def __init__(
        self,
        estimator: Optional[OpponentEstimator] = None,
        hp_coeffs: HpCoeffs = HpCoeffs(),
        win_coeffs: WinCoeffs = WinCoeffs(),
        threshold: float = QMIX_THRESHOLD
    ):
        super().__init__(estimator, hp_coeffs)
        self.win_coeffs = win_coeffs
        self.threshold = threshold

    def decide(self, world: WorldState, snapshot: Snapshot, rng: np.random.Generator) -> Dict[int, Command]:
        predicted = self.estimator.estimate(world)
        gap = STANDOFF_FRACTION * world.attack_range
        commands: Dict[int, Command] = {}
        for i in snapshot.indices(Side.EXPLORER):
            position = snapshot.position(i)
            action, target = qmix_policy(self.local(world, snapshot, i, predicted), self.win_coeffs, self.threshold)
            if action == QmixAction.ADVANCE:
                commands[snapshot.ids[i]] = Command(goal=world.treasure)
            elif action == QmixAction.ATTACK:
                goal = standoff(position, snapshot.position(snapshot.index[target]), gap)
                commands[snapshot.ids[i]] = Command(goal=goal, target=target)
            else:
                commands[snapshot.ids[i]] = Command(goal=None)
        return commands


class QmixGutPolicy(_PartialCommunication):
    """Every explorer solves the game tree alone on its partial view; no shared target."""

    def __init__(
        self,
        spec: GutSpec,
        mode: GutMode = GutMode.GREEDY,
        estimator: Optional[OpponentEstimator] = None,
        hp_coeffs: HpCoeffs = HpCoeffs()
    ):
        super().__init__(estimator, hp_coeffs)
        self.spec = spec
        self.mode = mode
        self._cache: Dict[int, Tuple[int, GutDecision]] = {}

    def decide(self, world: WorldState, snapshot: Snapshot, rng: np.random.Generator) -> Dict[int, Command]:
        predicted = self.estimator.estimate(world)
        gap = STANDOFF_FRACTION * world.attack_range
        commands: Dict[int, Command] = {}
        for i in snapshot.indices(Side.EXPLORER):
            agent_id = snapshot.ids[i]
            position = snapshot.position(i)
            local = self.local(world, snapshot, i, predicted)
            if not local.enemies:
                self._cache.pop(agent_id, None)
                commands[agent_id] = Command(goal=world.treasure)
                continue

            cached = self._cache.get(agent_id)
            if cached is not None and cached[0] == len(local.enemies):
                decision = cached[1]
            else:
                decision = gut_policy(local.obs, self.spec, local.enemies, self.mode)
                self._cache[agent_id] = (len(local.enemies), decision)

            ranked = rank_monsters(decision.path.row_actions[1], local.enemies)
            target = ranked[agent_id % decision.groups % len(ranked)]
            # attacking closes in, defending keeps the target at arm's length
            reach = gap if decision.shape == FormationShape.TRIANGLE else world.attack_range
            goal = standoff(position, snapshot.position(snapshot.index[target]), reach)
            commands[agent_id] = Command(goal=goal, target=target)
        return commands


class NearestMonsterPolicy:
    """Each monster chases its nearest sensed explorer and returns to its post otherwise."""

    def communicating(self, world: WorldState, snapshot: Snapshot) -> Set[int]:
        return set()

    def edge_peers(self, world: WorldState, snapshot: Snapshot, index: int) -> List[int]:
        return []

    def decide(self, world: WorldState, snapshot: Snapshot, rng: np.random.Generator) -> Dict[int, Command]:
        gap = STANDOFF_FRACTION * world.attack_range
        commands: Dict[int, Command] = {}
        for j in snapshot.indices(Side.MONSTER):
            monster_id = snapshot.ids[j]
            sensed = snapshot.within(j, world.sensing_radius, Side.EXPLORER)
            if not sensed:
                commands[monster_id] = Command(goal=world.agent(monster_id).home)
                continue
            nearest = min(sensed, key=lambda i: (snapshot.distances[j, i], snapshot.ids[i]))
            goal = standoff(snapshot.position(j), snapshot.position(nearest), gap)
            commands[monster_id] = Command(goal=goal, target=snapshot.ids[nearest])
        return commands


class QmixMonsterPolicy(NearestMonsterPolicy):
    """Monsters attack the weakest sensed explorer when their local winning rate allows, else hold."""

    def __init__(self, hp_coeffs: HpCoeffs = HpCoeffs(), win_coeffs: WinCoeffs = WinCoeffs(), threshold: float = QMIX_THRESHOLD):
        self.hp_coeffs = hp_coeffs
        self.win_coeffs = win_coeffs
        self.threshold = threshold

    def decide(self, world: WorldState, snapshot: Snapshot, rng: np.random.Generator) -> Dict[int, Command]:
        gap = STANDOFF_FRACTION * world.attack_range
        commands: Dict[int, Command] = {}
        for j in snapshot.indices(Side.MONSTER):
            monster_id = snapshot.ids[j]
            allies, explorers = local_view(world, snapshot, j, Side.MONSTER)
            if not explorers:
                commands[monster_id] = Command(goal=world.agent(monster_id).home)
                continue
            obs = observe(world, snapshot, allies, explorers, Side.MONSTER, None, self.hp_coeffs)
            local = LocalObs(
                tuple(snapshot.ids[i] for i in allies),
                tuple(agent_views(snapshot, snapshot.position(j), explorers, self.hp_coeffs.gamma_e)),
                obs,
            )
            action, target = qmix_policy(local, self.win_coeffs, self.threshold)
            if action == QmixAction.ATTACK:
                goal = standoff(snapshot.position(j), snapshot.position(snapshot.index[target]), gap)
                commands[monster_id] = Command(goal=goal, target=target)
            else:
                commands[monster_id] = Command(goal=None)
        return commands


def make_policies(
    explorer_mode: PolicyMode,
    monster_mode: MonsterMode,
    coeffs: GameCoeffs = GameCoeffs(),
    gut_mode: GutMode = GutMode.GREEDY,
    estimator: Optional[OpponentEstimator] = None,
    tol: float = DEFAULT_TOL,
    threshold: float = QMIX_THRESHOLD
) -> Policies:
    """
    Instantiate fresh (stateful) policies for one trial.

    Args:
        explorer_mode: gut, qmix or qmix-gut
        monster_mode: nearest or qmix
        coeffs: Coefficient bundles
        gut_mode: Path selection rule
        estimator: Opponent-state estimator
        tol: Solver tolerance
        threshold: QMIX attack threshold

    Returns:
        Policies
    """
    estimator = estimator or OpponentEstimator()
    if explorer_mode == PolicyMode.GUT:
        explorers = GutTeamPolicy(build_game_spec(coeffs, tol), gut_mode, estimator, coeffs.hp)
    elif explorer_mode == PolicyMode.QMIX:
        explorers = QmixPolicy(estimator, coeffs.hp, coeffs.win, threshold)
    else:
        explorers = QmixGutPolicy(build_game_spec(coeffs, tol), gut_mode, estimator, coeffs.hp)

    if monster_mode == MonsterMode.QMIX:
        monsters = QmixMonsterPolicy(coeffs.hp, coeffs.win, threshold)
    else:
        monsters = NearestMonsterPolicy()
    return Policies(explorers=explorers, monsters=monsters)
