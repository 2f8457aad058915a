"""
Discrete-time Explorers-and-Monsters arena.

Holds agent and obstacle state, the per-agent cost ledger, formation
geometry, the Adapting-The-Edge obstacle rule and the tick loop. Decision
making lives in core.policies; this module only consumes the commands.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Protocol, Sequence, Set, Tuple

import numpy as np

from core.adversary import AdversaryClass, classify
from core.logging_utils import get_logger
from core.util_model import EngagementObs, NeedKind, NeedSpec, WinCoeffs, need_expectation, winning_probability

logger = get_logger(__name__)

Vec = Tuple[float, float]
FULL_LEVEL = 100.0
_EPS = 1e-9


class Side(str, Enum):
    EXPLORER = "Explorer"
    MONSTER = "Monster"


class FormationShape(str, Enum):
    PATROL = "Patrol"
    TRIANGLE = "Triangle"
    REGULAR_POLYGON = "RegularPolygon"
    CIRCLE = "Circle"
    FILE = "File"


class Outcome(str, Enum):
    ONGOING = "Ongoing"
    EXPLORERS_WIN = "ExplorersWin"
    MONSTERS_WIN = "MonstersWin"


@dataclass(frozen=True)
class CostTable:
    """Points on the 0-100 scale charged per step, round or hit."""
    move_cost: float = 0.015
    comm_cost: float = 0.006
    explorer_attack_energy: float = 0.01
    explorer_attacked_hp: float = 0.15
    monster_attack_energy: float = 0.03
    monster_attacked_hp: float = 0.05


@dataclass(frozen=True)
class WorldParams:
    width: float = 100.0
    height: float = 100.0
    speed: float = 1.0
    sensing_radius: float = 15.0
    comm_radius: float = 25.0
    attack_range: float = 3.0
    treasure_radius: float = 2.0
    tick_cap: int = 5000
    attack_rounds_per_tick: int = 10
    formation_spacing: float = 2.0
    edge_patience: int = 5
    exhaustion_kills: bool = True
    guard_radius: float = 25.0


@dataclass
class AgentState:
    id: int
    side: Side
    position: Vec
    hp: float = FULL_LEVEL
    energy: float = FULL_LEVEL
    attack_power: float = 1.0
    alive: bool = True
    home: Optional[Vec] = None
    adversary: Optional[AdversaryClass] = None


@dataclass(frozen=True)
class Obstacle:
    center: Vec
    radius: float
    adversary: Optional[AdversaryClass] = None

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"obstacle radius must be > 0, got {self.radius}")


@dataclass
class AgentLedger:
    """Event counts from which an agent's HP and energy are derived."""
    moves: int = 0
    attacks: int = 0
    comm_rounds: int = 0
    hits_received: int = 0


@dataclass
class EdgeMemory:
    obstacle: int
    side: int
    stalled: int = 0


@dataclass
class WorldState:
    agents: List[AgentState]
    obstacles: Tuple[Obstacle, ...]
    treasure: Vec
    tick: int = 0
    cost_table: CostTable = field(default_factory=CostTable)
    params: WorldParams = field(default_factory=WorldParams)
    ledger: Dict[int, AgentLedger] = field(default_factory=dict)
    edge_memory: Dict[int, EdgeMemory] = field(default_factory=dict)
    _by_id: Dict[int, AgentState] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        for agent in self.agents:
            self.ledger.setdefault(agent.id, AgentLedger())

    @property
    def sensing_radius(self) -> float:
        return self.params.sensing_radius

    @property
    def comm_radius(self) -> float:
        return self.params.comm_radius

    @property
    def attack_range(self) -> float:
        return self.params.attack_range

    @property
    def treasure_radius(self) -> float:
        return self.params.treasure_radius

    def agent(self, agent_id: int) -> AgentState:
        if len(self._by_id) != len(self.agents):
            self._by_id = {a.id: a for a in self.agents}
        return self._by_id[agent_id]

    def living(self, side: Side) -> List[AgentState]:
        return [a for a in self.agents if a.alive and a.side == side]

    def side_of(self, side: Side) -> List[AgentState]:
        return [a for a in self.agents if a.side == side]


@dataclass(frozen=True)
class Command:
    """Where an agent wants to go this tick and whom it wants to hit."""
    goal: Optional[Vec]
    target: Optional[int] = None
    speed_scale: float = 1.0


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Frozen per-tick view that every policy reads."""
    ids: Tuple[int, ...]
    sides: Tuple[Side, ...]
    positions: np.ndarray
    hp: np.ndarray
    energy: np.ndarray
    attack_power: np.ndarray
    alive: np.ndarray
    distances: np.ndarray
    index: Dict[int, int]
    explorer: np.ndarray

    def mask(self, side: Side) -> np.ndarray:
        """Boolean mask of living agents of a side."""
        if side == Side.EXPLORER:
            return self.alive & self.explorer
        return self.alive & ~self.explorer

    def indices(self, side: Side) -> List[int]:
        """Living agents of a side, in id order."""
        return [int(i) for i in np.flatnonzero(self.mask(side))]

    def within(self, i: int, radius: float, side: Side) -> List[int]:
        """Living agents of a side within radius of agent i (excluding i)."""
        hits = self.mask(side) & (self.distances[i] <= radius)
        hits[i] = False
        return [int(j) for j in np.flatnonzero(hits)]

    def seen_by(self, observers: Sequence[int], radius: float, side: Side) -> List[int]:
        """Living agents of a side within radius of any observer."""
        if not observers:
            return []
        near = (self.distances[list(observers)] <= radius).any(axis=0)
        hits = self.mask(side) & near
        hits[list(observers)] = False
        return [int(j) for j in np.flatnonzero(hits)]

    def position(self, i: int) -> Vec:
        return float(self.positions[i, 0]), float(self.positions[i, 1])


class Policy(Protocol):
    def communicating(self, world: WorldState, snapshot: Snapshot) -> Set[int]:
        ...

    def decide(self, world: WorldState, snapshot: Snapshot, rng: np.random.Generator) -> Dict[int, Command]:
        ...

    def edge_peers(self, world: WorldState, snapshot: Snapshot, index: int) -> List[int]:
        ...


@dataclass(frozen=True)
class Policies:
    explorers: Policy
    monsters: Policy


def _sub(a: Vec, b: Vec) -> Vec:
    return a[0] - b[0], a[1] - b[1]


def _norm(a: Vec) -> float:
    return math.hypot(a[0], a[1])


def _unit(a: Vec) -> Vec:
    length = _norm(a)
    if length < _EPS:
        return 0.0, 0.0
    return a[0] / length, a[1] / length


def _dot(a: Vec, b: Vec) -> float:
    return a[0] * b[0] + a[1] * b[1]


def distance(a: Vec, b: Vec) -> float:
    return _norm(_sub(a, b))


def take_snapshot(world: WorldState) -> Snapshot:
    """
    Freeze positions and resources, with the pairwise distance matrix.

    Args:
        world: Current world

    Returns:
        Snapshot indexed in agent-id order
    """
    agents = sorted(world.agents, key=lambda a: a.id)
    positions = np.array([a.position for a in agents], dtype=np.float64).reshape(-1, 2)
    p2p = positions[:, np.newaxis] - positions
    return Snapshot(
        ids=tuple(a.id for a in agents),
        sides=tuple(a.side for a in agents),
        positions=positions,
        hp=np.array([a.hp for a in agents], dtype=np.float64),
        energy=np.array([a.energy for a in agents], dtype=np.float64),
        attack_power=np.array([a.attack_power for a in agents], dtype=np.float64),
        alive=np.array([a.alive for a in agents], dtype=bool),
        distances=np.linalg.norm(p2p, axis=-1),
        index={a.id: i for i, a in enumerate(agents)},
        explorer=np.array([a.side == Side.EXPLORER for a in agents], dtype=bool),
    )


def formation_targets(
    shape: FormationShape,
    members: int,
    anchor: Vec,
    spacing: float,
    heading: Vec = (1.0, 0.0)
) -> List[Vec]:
    """
    Slot positions of a formation.

    Slot i goes to the i-th member handed in. File slots run from the head
    of the column back.

    Args:
        shape: Formation shape
        members: Number of slots
        anchor: Formation center (wedge apex for Triangle, column middle for File)
        spacing: Distance between neighbouring slots
        heading: Direction the formation faces

    Returns:
        List of slot positions
    """
    if members < 1:
        raise ValueError(f"formation needs at least one member, got {members}")
    forward = _unit(heading)
    if forward == (0.0, 0.0):
        forward = (1.0, 0.0)
    lateral = (-forward[1], forward[0])
    ax, ay = anchor

    if shape == FormationShape.PATROL:
        return [
            (ax + (i - (members - 1) / 2) * spacing * lateral[0],
             ay + (i - (members - 1) / 2) * spacing * lateral[1])
            for i in range(members)
        ]

    if shape == FormationShape.FILE:
        return [
            (ax + ((members - 1) / 2 - i) * spacing * forward[0],
             ay + ((members - 1) / 2 - i) * spacing * forward[1])
            for i in range(members)
        ]

    if shape == FormationShape.TRIANGLE:
        slots: List[Vec] = []
        row = 0
        while len(slots) < members:
            in_row = min(row + 1, members - len(slots))
            for j in range(in_row):
                back = row * spacing
                side = (j - (in_row - 1) / 2) * spacing
                slots.append((
                    ax - back * forward[0] + side * lateral[0],
                    ay - back * forward[1] + side * lateral[1],
                ))
            row += 1
        return slots

    if members == 1:
        return [anchor]

    base = math.atan2(forward[1], forward[0])
    if shape == FormationShape.REGULAR_POLYGON:
        radius = spacing / (2 * math.sin(math.pi / members))
    else:
        radius = max(spacing, members * spacing / (2 * math.pi))
    return [
        (ax + radius * math.cos(base + 2 * math.pi * i / members),
         ay + radius * math.sin(base + 2 * math.pi * i / members))
        for i in range(members)
    ]


def triangle_rows(members: int) -> int:
    """Rows a wedge of the given size occupies."""
    rows = 0
    placed = 0
    while placed < members:
        placed += rows + 1
        rows += 1
    return rows


def half_width(shape: FormationShape, members: int, spacing: float) -> float:
    """Lateral reach of a formation from its center line."""
    if members <= 1 or shape == FormationShape.FILE:
        return 0.0
    if shape == FormationShape.PATROL:
        return (members - 1) / 2 * spacing
    if shape == FormationShape.TRIANGLE:
        return (triangle_rows(members) - 1) / 2 * spacing
    if shape == FormationShape.REGULAR_POLYGON:
        return spacing / (2 * math.sin(math.pi / members))
    return max(spacing, members * spacing / (2 * math.pi))


def corridor(world: WorldState, origin: Vec, goal: Vec, ahead: float, behind: float) -> Tuple[float, Optional[Vec]]:
    """
    Free half-width of the route from origin toward goal.

    Obstacles whose projection on the route lies between ``behind`` units back
    and ``ahead`` units forward (padded by their radius) narrow the corridor.
    An obstacle ahead that covers the route line blocks it; the detour point
    then sits beside that obstacle on the side nearer the route.

    Args:
        world: Current world
        origin: Start of the route (usually the team centroid)
        goal: Where the route leads
        ahead: How far forward to look
        behind: How far back the team still trails

    Returns:
        (half_width, detour) with half_width inf on an open route and detour
        None unless the route is blocked
    """
    forward = _unit(_sub(goal, origin))
    if forward == (0.0, 0.0):
        return math.inf, None
    lateral = (-forward[1], forward[0])
    ahead = min(ahead, distance(origin, goal))
    width = math.inf
    blocking = None
    for _, obstacle in _edge_obstacles(world):
        offset = _sub(obstacle.center, origin)
        along = _dot(offset, forward)
        if along < -behind - obstacle.radius or along > ahead + obstacle.radius:
            continue
        side = _dot(offset, lateral)
        clearance = abs(side) - obstacle.radius
        width = min(width, clearance)
        if clearance <= 0 and along >= obstacle.radius and (blocking is None or along < blocking[0]):
            blocking = (along, side, obstacle)
    if blocking is None:
        return width, None
    _, side, obstacle = blocking
    away = -1.0 if side >= 0 else 1.0
    clear = obstacle.radius + world.params.formation_spacing
    return width, (obstacle.center[0] + away * clear * lateral[0], obstacle.center[1] + away * clear * lateral[1])


def adapt_the_edge(
    agent: AgentState,
    nearest_collision: Optional[Vec],
    peers: Sequence[Tuple[AgentState, bool]],
    goal: Vec,
    step: float = 1.0
) -> Tuple[Vec, float]:
    """
    Choose a heading around an obstacle by following the better-populated tangent side.

    The tangent at the collision point is perpendicular to the line from the
    agent to that point. Peers that are not themselves colliding are counted
    on each side of that line; the agent moves along the tangent toward the
    larger count and stops when the counts are equal.

    Args:
        agent: Moving agent
        nearest_collision: Closest collision point on the route, if any
        peers: Communicating teammates with their own collision flags
        goal: Destination
        step: Step length

    Returns:
        (unit direction, distance)
    """
    heading = _unit(_sub(goal, agent.position))
    if nearest_collision is None:
        if heading == (0.0, 0.0):
            return heading, 0.0
        return heading, step

    normal = _unit(_sub(nearest_collision, agent.position))
    if normal == (0.0, 0.0):
        normal = heading if heading != (0.0, 0.0) else (1.0, 0.0)
    tangent = (-normal[1], normal[0])

    positive = negative = 0
    for peer, colliding in peers:
        if colliding or peer.id == agent.id:
            continue
        offset = _dot(_sub(peer.position, nearest_collision), tangent)
        if offset > 0:
            positive += 1
        elif offset < 0:
            negative += 1

    if positive > negative:
        return tangent, step
    if negative > positive:
        return (-tangent[0], -tangent[1]), step
    return heading, 0.0


def outcome(world: WorldState) -> Outcome:
    """
    Decide whether the trial is over.

    Args:
        world: Current world

    Returns:
        ExplorersWin when a living explorer holds the treasure, MonstersWin
        when none is alive or the tick cap is reached, else Ongoing
    """
    explorers = world.living(Side.EXPLORER)
    if any(distance(e.position, world.treasure) <= world.treasure_radius for e in explorers):
        return Outcome.EXPLORERS_WIN
    if not explorers or world.tick >= world.params.tick_cap:
        return Outcome.MONSTERS_WIN
    return Outcome.ONGOING


def settle(world: WorldState, agent: AgentState):
    """Derive an agent's HP and energy from its ledger."""
    entry = world.ledger[agent.id]
    costs = world.cost_table
    if agent.side == Side.EXPLORER:
        spent = costs.move_cost * entry.moves + costs.explorer_attack_energy * entry.attacks \
            + costs.comm_cost * entry.comm_rounds
        lost = costs.explorer_attacked_hp * entry.hits_received
    else:
        spent = costs.move_cost * entry.moves + costs.monster_attack_energy * entry.attacks \
            + costs.comm_cost * entry.comm_rounds
        lost = costs.monster_attacked_hp * entry.hits_received
    agent.energy = max(FULL_LEVEL - spent, 0.0)
    agent.hp = max(FULL_LEVEL - lost, 0.0)


def _edge_obstacles(world: WorldState) -> List[Tuple[int, Obstacle]]:
    return [
        (i, o) for i, o in enumerate(world.obstacles)
        if o.adversary != AdversaryClass.NOT_ADVERSARY
    ]


def _push_out(world: WorldState, point: Vec) -> Vec:
    """Move a point out of any obstacle interior onto its boundary."""
    x, y = point
    for _ in range(2):
        for obstacle in world.obstacles:
            offset = _sub((x, y), obstacle.center)
            gap = _norm(offset)
            if gap < obstacle.radius:
                direction = _unit(offset) if gap > _EPS else (1.0, 0.0)
                x = obstacle.center[0] + direction[0] * obstacle.radius
                y = obstacle.center[1] + direction[1] * obstacle.radius
    return x, y


def _clamp(world: WorldState, point: Vec) -> Vec:
    return (
        min(max(point[0], 0.0), world.params.width),
        min(max(point[1], 0.0), world.params.height),
    )


def _nearest_collision(world: WorldState, position: Vec, heading: Vec, length: float) -> Optional[Tuple[int, Vec]]:
    """First obstacle the straight step would enter, with the boundary point nearest the agent."""
    best = None
    for index, obstacle in _edge_obstacles(world):
        to_center = _sub(obstacle.center, position)
        along = min(max(_dot(to_center, heading), 0.0), length)
        closest = (position[0] + heading[0] * along, position[1] + heading[1] * along)
        if distance(closest, obstacle.center) >= obstacle.radius - _EPS:
            continue
        outward = _unit(_sub(position, obstacle.center)) if distance(position, obstacle.center) > _EPS else (1.0, 0.0)
        point = (
            obstacle.center[0] + outward[0] * obstacle.radius,
            obstacle.center[1] + outward[1] * obstacle.radius,
        )
        gap = distance(position, point)
        if best is None or gap < best[0]:
            best = (gap, index, point)
    if best is None:
        return None
    return best[1], best[2]


def _touching(world: WorldState, position: Vec, obstacle: Obstacle) -> bool:
    return distance(position, obstacle.center) <= obstacle.radius + world.params.speed


def _move(world: WorldState, snapshot: Snapshot, policy: Policy, agent: AgentState, command: Command) -> Vec:
    goal = _push_out(world, command.goal)
    position = agent.position
    gap = distance(position, goal)
    step = world.params.speed * command.speed_scale
    if gap < _EPS or step <= 0:
        return position
    heading = _unit(_sub(goal, position))
    length = min(step, gap)

    collision = _nearest_collision(world, position, heading, length)
    if collision is None:
        world.edge_memory.pop(agent.id, None)
        return _clamp(world, _push_out(world, (position[0] + heading[0] * length, position[1] + heading[1] * length)))

    obstacle_index, point = collision
    normal = _unit(_sub(point, position))
    if normal == (0.0, 0.0):
        normal = heading
    tangent = (-normal[1], normal[0])
    memory = world.edge_memory.get(agent.id)
    if memory is not None and memory.obstacle != obstacle_index:
        memory = None

    if memory is not None and memory.side != 0:
        side = memory.side
    else:
        index = snapshot.index[agent.id]
        obstacle = world.obstacles[obstacle_index]
        peers = []
        for j in policy.edge_peers(world, snapshot, index):
            peer = world.agent(snapshot.ids[j])
            peers.append((peer, _touching(world, peer.position, obstacle)))
        direction, travel = adapt_the_edge(agent, point, peers, goal, step)
        if travel > 0:
            side = 1 if _dot(direction, tangent) > 0 else -1
            world.edge_memory[agent.id] = EdgeMemory(obstacle_index, side)
        else:
            stalled = (memory.stalled if memory is not None else 0) + 1
            if stalled <= world.params.edge_patience:
                world.edge_memory[agent.id] = EdgeMemory(obstacle_index, 0, stalled)
                return position
            side = 1 if _dot(tangent, heading) >= 0 else -1
            logger.warning(
                f"Agent {agent.id} stalled {stalled} ticks at obstacle {obstacle_index}; "
                f"taking the goal-aligned edge"
            )
            world.edge_memory[agent.id] = EdgeMemory(obstacle_index, side, stalled)

    moved = (position[0] + side * tangent[0] * step, position[1] + side * tangent[1] * step)
    return _clamp(world, _push_out(world, moved))


def _nearest_enemy_in_range(world: WorldState, agent: AgentState, candidates: Sequence[AgentState]) -> Optional[AgentState]:
    best = None
    for enemy in candidates:
        gap = distance(agent.position, enemy.position)
        if gap <= world.attack_range and (best is None or gap < best[0]):
            best = (gap, enemy)
    return best[1] if best else None


def step(world: WorldState, policies: Policies, rng: np.random.Generator) -> WorldState:
    """
    Advance the world by one tick.

    Perception and communication, decisions on a frozen snapshot, movement,
    attacks, death removal, then the tick counter.

    Args:
        world: World to advance (mutated in place)
        policies: Explorer and monster policies
        rng: Trial random stream

    Returns:
        The same world, one tick later
    """
    snapshot = take_snapshot(world)

    # perception and communication
    for agent_id in sorted(policies.explorers.communicating(world, snapshot)):
        world.ledger[agent_id].comm_rounds += 1
        settle(world, world.agent(agent_id))

    # decisions
    commands: Dict[int, Command] = {}
    commands.update(policies.explorers.decide(world, snapshot, rng))
    commands.update(policies.monsters.decide(world, snapshot, rng))

    # movement
    for agent in sorted(world.agents, key=lambda a: a.id):
        command = commands.get(agent.id)
        if not agent.alive or agent.energy <= 0 or command is None or command.goal is None:
            continue
        policy = policies.explorers if agent.side == Side.EXPLORER else policies.monsters
        new_position = _move(world, snapshot, policy, agent, command)
        if distance(new_position, agent.position) > _EPS:
            agent.position = new_position
            world.ledger[agent.id].moves += 1
            settle(world, agent)

    # attacks resolve simultaneously on post-movement positions
    hits: Dict[int, int] = {}
    rounds = world.params.attack_rounds_per_tick
    living = {side: world.living(side) for side in Side}
    for agent in sorted(world.agents, key=lambda a: a.id):
        if not agent.alive or agent.energy <= 0:
            continue
        enemies = living[Side.MONSTER if agent.side == Side.EXPLORER else Side.EXPLORER]
        command = commands.get(agent.id)
        victim = None
        if command is not None and command.target is not None:
            chosen = next((e for e in enemies if e.id == command.target), None)
            if chosen is not None and distance(agent.position, chosen.position) <= world.attack_range:
                victim = chosen
        if victim is None:
            victim = _nearest_enemy_in_range(world, agent, enemies)
        if victim is None:
            continue
        world.ledger[agent.id].attacks += rounds
        hits[victim.id] = hits.get(victim.id, 0) + rounds
    for agent in world.agents:
        if agent.id in hits:
            world.ledger[agent.id].hits_received += hits[agent.id]
        settle(world, agent)

    # death removal
    for agent in world.agents:
        if not agent.alive:
            continue
        exhausted = world.params.exhaustion_kills and agent.energy <= 0
        if agent.hp <= 0 or exhausted:
            agent.alive = False
            world.edge_memory.pop(agent.id, None)
            logger.debug(f"Tick {world.tick}: {agent.side.value} {agent.id} removed")

    world.tick += 1
    return world


def classify_adversaries(world: WorldState, win_coeffs: WinCoeffs = WinCoeffs(), eq_tol: float = 1e-9) -> WorldState:
    """
    Label monsters and obstacles by how they affect an explorer's safety needs.

    A monster lowers an explorer's survival chance and has its own stake in
    the encounter; an obstacle only costs a detour and wants nothing.

    Args:
        world: Freshly built world
        win_coeffs: Coefficients for the duel winning rate
        eq_tol: Tolerance for the unchanged-need test

    Returns:
        The same world with adversary labels filled in
    """
    alone = need_expectation(NeedSpec((1.0, 1.0), (1.0, 1.0), NeedKind.SAFETY))
    explorers = world.side_of(Side.EXPLORER)
    explorer_power = float(np.mean([e.attack_power for e in explorers])) if explorers else 1.0

    for monster in world.side_of(Side.MONSTER):
        duel = winning_probability(
            EngagementObs(n=1, m=1, t_ev=0.5 * explorer_power, r_ev=0.5, t_mv=0.5 * monster.attack_power, r_mv=0.5),
            win_coeffs,
        )
        with_monster = need_expectation(NeedSpec((1.0, 1.0), (duel, 1.0), NeedKind.SAFETY))
        monster_facing = need_expectation(NeedSpec((1.0, 1.0), (1.0 - 0.5 * duel, 1.0), NeedKind.SAFETY))
        monster.adversary = classify(alone, with_monster, monster_facing, alone, eq_tol)

    if explorers:
        start = tuple(np.mean([e.position for e in explorers], axis=0))
    else:
        start = (world.params.width / 2, world.params.height / 2)
    route = max(distance(start, world.treasure), _EPS)
    labelled = []
    for obstacle in world.obstacles:
        detour = min(obstacle.radius / route, 1.0)
        with_obstacle = need_expectation(NeedSpec((1.0, 1.0), (1.0, 1.0 - detour), NeedKind.BASIC))
        labelled.append(replace(obstacle, adversary=classify(alone, with_obstacle, 0.0, 0.0, eq_tol)))
    world.obstacles = tuple(labelled)
    return world


def build_world(
    explorer_count: int,
    monster_count: int,
    treasure: Vec,
    explorer_spawn: Vec,
    rng: np.random.Generator,
    obstacles: Sequence[Obstacle] = (),
    params: WorldParams = WorldParams(),
    cost_table: CostTable = CostTable(),
    explorer_attack_power: float = 1.0,
    monster_power_ratio: float = 3.0,
    win_coeffs: WinCoeffs = WinCoeffs(),
) -> WorldState:
    """
    Place the explorers in line abreast at their spawn and scatter the monsters around the treasure.

    Args:
        explorer_count: Number of explorers
        monster_count: Number of monsters
        treasure: Treasure position
        explorer_spawn: Center of the explorers' starting line
        rng: Trial random stream (monster placement)
        obstacles: Static obstacles
        params: Geometry and timing
        cost_table: Per-event costs
        explorer_attack_power: Explorer attack capability
        monster_power_ratio: Monster capability relative to explorers
        win_coeffs: Coefficients used for adversary classification

    Returns:
        Classified WorldState at tick 0
    """
    world = WorldState(agents=[], obstacles=tuple(obstacles), treasure=treasure, params=params, cost_table=cost_table)

    heading = _sub(treasure, explorer_spawn)
    slots = formation_targets(FormationShape.PATROL, max(explorer_count, 1), explorer_spawn, params.formation_spacing, heading)
    agents: List[AgentState] = []
    for i in range(explorer_count):
        position = _clamp(world, _push_out(world, slots[i]))
        agents.append(AgentState(i, Side.EXPLORER, position, attack_power=explorer_attack_power, home=position))

    monster_power = explorer_attack_power * monster_power_ratio
    for j in range(monster_count):
        position = _spawn_monster(world, rng)
        agents.append(AgentState(explorer_count + j, Side.MONSTER, position, attack_power=monster_power, home=position))

    world.agents = agents
    world.ledger = {a.id: AgentLedger() for a in agents}
    classify_adversaries(world, win_coeffs)
    logger.debug(f"Built world: {explorer_count} explorers, {monster_count} monsters, {len(world.obstacles)} obstacles")
    return world


def _spawn_monster(world: WorldState, rng: np.random.Generator) -> Vec:
    radius = world.params.guard_radius
    cx, cy = world.treasure
    for _ in range(1000):
        r = radius * math.sqrt(rng.random())
        theta = 2 * math.pi * rng.random()
        point = (cx + r * math.cos(theta), cy + r * math.sin(theta))
        inside_arena = 0.0 <= point[0] <= world.params.width and 0.0 <= point[1] <= world.params.height
        blocked = any(distance(point, o.center) < o.radius for o in world.obstacles)
        if inside_arena and not blocked:
            return point
    return _clamp(world, _push_out(world, (cx, cy)))
