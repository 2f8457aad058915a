"""
Game-theoretic utility tree.

Each level hosts a zero-sum game between the team and its adversaries. A
computation unit solves one level's game under the context inherited from
the outcomes chosen above it, and spreads its prior over the outcome cells
with the equilibrium marginals. Strategies are read off the tree either
greedily level by level or as the most probable full path (max-product
elimination followed by a trace-back).
"""
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import InvalidInputError
from core.logging_utils import get_logger
from core.matgame import DEFAULT_TOL, GameSolution, PayoffMatrix, solve

logger = get_logger(__name__)

# Probabilities closer than this are treated as equal when picking a cell.
TIE_TOL = 1e-9

Cell = Tuple[int, int]
Prefix = Tuple[Cell, ...]


class GutMode(str, Enum):
    GREEDY = "greedy"
    MAP = "map"


@dataclass(frozen=True)
class LevelSpec:
    """
    One level of the tree.

    ``utility_builder`` maps the level's context to its payoff matrix;
    ``condition`` maps (context, row, col) to the context of the child level.
    """
    level_index: int
    row_actions: Tuple[str, ...]
    col_actions: Tuple[str, ...]
    utility_builder: Callable[[Any], PayoffMatrix]
    condition: Optional[Callable[[Any, int, int], Any]] = None

    def __post_init__(self):
        object.__setattr__(self, 'row_actions', tuple(self.row_actions))
        object.__setattr__(self, 'col_actions', tuple(self.col_actions))
        if not self.row_actions or not self.col_actions:
            raise InvalidInputError(f"level {self.level_index} needs at least one action per side")
        for side in (self.row_actions, self.col_actions):
            if len(set(side)) != len(side):
                raise InvalidInputError(f"level {self.level_index} has duplicate action labels: {side}")

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.row_actions), len(self.col_actions)

    def child_context(self, context: Any, row: int, col: int) -> Any:
        if self.condition is None:
            return context
        return self.condition(context, row, col)


@dataclass(frozen=True)
class GutSpec:
    levels: Tuple[LevelSpec, ...]
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, 'levels', tuple(self.levels))
        if not self.levels:
            raise InvalidInputError("a tree needs at least one level")
        indices = [level.level_index for level in self.levels]
        if indices != list(range(1, len(indices) + 1)):
            raise InvalidInputError(f"level indices must run 1..n, got {indices}")


@dataclass(frozen=True, eq=False)
class ComputationUnit:
    """A solved level game with its prior spread over the outcome cells."""
    prior_prob: float
    payoff: PayoffMatrix
    solution: GameSolution
    outcome_probs: np.ndarray
    context: Any = None

    def conditional(self, row: int, col: int) -> float:
        """Probability of a cell given this unit was reached."""
        return float(self.solution.row_strategy[row] * self.solution.col_strategy[col])

    def conditionals(self) -> np.ndarray:
        """All cell probabilities given this unit was reached, unscaled by the prior."""
        return np.outer(self.solution.row_strategy, self.solution.col_strategy)


@dataclass(frozen=True)
class StrategyPath:
    """Chosen (row action, believed column action) per level and the path probability."""
    choices: Tuple[Tuple[str, str], ...]
    joint_prob: float
    cells: Tuple[Cell, ...] = ()

    @property
    def row_actions(self) -> Tuple[str, ...]:
        return tuple(row for row, _ in self.choices)


def node_count(spec: GutSpec) -> int:
    """
    Number of computation units: the root plus one unit per outcome prefix.

    Args:
        spec: Tree specification

    Returns:
        1 + sum over i < n of prod_{j <= i} l_j * m_j
    """
    total = 1
    width = 1
    for level in spec.levels[:-1]:
        rows, cols = level.shape
        width *= rows * cols
        total += width
    return total


def evaluate_unit(level: LevelSpec, context: Any, prior: float, tol: float = DEFAULT_TOL) -> ComputationUnit:
    """
    Build and solve one level's game.

    Args:
        level: Level specification
        context: Observation the level's utilities are computed from
        prior: Probability of reaching this unit
        tol: Solver tolerance

    Returns:
        ComputationUnit with outcome_probs[g][k] = X[g] * Y[k] * prior
    """
    if not 0.0 <= prior <= 1.0:
        raise InvalidInputError(f"prior must lie in [0, 1], got {prior}")
    payoff = level.utility_builder(context)
    if (payoff.rows, payoff.cols) != level.shape:
        raise InvalidInputError(
            f"level {level.level_index} builder returned {payoff.rows}x{payoff.cols}, expected {level.shape}"
        )
    solution = solve(payoff, tol)
    outcome = np.outer(solution.row_strategy, solution.col_strategy) * prior
    return ComputationUnit(prior, payoff, solution, outcome, context)


def _first_best(probs: np.ndarray) -> Cell:
    """First row-major cell within a relative TIE_TOL of the maximum."""
    best = probs.max()
    candidates = np.argwhere(probs >= best * (1.0 - TIE_TOL))
    g, k = candidates[0]
    return int(g), int(k)


def _path_from_cells(spec: GutSpec, cells: Sequence[Cell], joint: float) -> StrategyPath:
    choices = tuple(
        (level.row_actions[g], level.col_actions[k])
        for level, (g, k) in zip(spec.levels, cells)
    )
    return StrategyPath(choices, joint, tuple(cells))


def decide(spec: GutSpec, context: Any) -> StrategyPath:
    """
    Greedy selection: the most probable cell at each level, descending with its probability.

    Args:
        spec: Tree specification
        context: Root observation

    Returns:
        StrategyPath
    """
    prior = 1.0
    joint = 1.0
    cells: List[Cell] = []
    for level in spec.levels:
        unit = evaluate_unit(level, context, prior, spec.tol)
        g, k = _first_best(unit.conditionals())
        cells.append((g, k))
        joint *= unit.conditional(g, k)
        prior = float(unit.outcome_probs[g, k])
        context = level.child_context(context, g, k)

    path = _path_from_cells(spec, cells, joint)
    logger.debug(f"Greedy path {path.choices} with probability {joint:.6f}")
    return path


def expand_tree(spec: GutSpec, context: Any) -> Dict[Prefix, ComputationUnit]:
    """
    Materialise every computation unit of the tree.

    Args:
        spec: Tree specification
        context: Root observation

    Returns:
        Mapping from outcome prefix (one cell per level above) to its unit,
        in breadth-first, row-major order
    """
    units: Dict[Prefix, ComputationUnit] = {}
    frontier: List[Tuple[Prefix, Any, float]] = [((), context, 1.0)]
    for depth, level in enumerate(spec.levels):
        next_frontier = []
        for prefix, ctx, prior in frontier:
            unit = evaluate_unit(level, ctx, prior, spec.tol)
            units[prefix] = unit
            if depth + 1 < len(spec.levels):
                rows, cols = level.shape
                for g in range(rows):
                    for k in range(cols):
                        next_frontier.append(
                            (prefix + ((g, k),), level.child_context(ctx, g, k), float(unit.outcome_probs[g, k]))
                        )
        frontier = next_frontier
    return units


def enumerate_paths(spec: GutSpec, context: Any) -> List[StrategyPath]:
    """
    Every full path with its joint probability, in lexicographic order.

    Args:
        spec: Tree specification
        context: Root observation

    Returns:
        List of StrategyPath
    """
    units = expand_tree(spec, context)
    paths: List[StrategyPath] = []

    def walk(prefix: Prefix, joint: float):
        depth = len(prefix)
        level = spec.levels[depth]
        unit = units[prefix]
        rows, cols = level.shape
        for g in range(rows):
            for k in range(cols):
                value = joint * unit.conditional(g, k)
                cells = prefix + ((g, k),)
                if depth + 1 == len(spec.levels):
                    paths.append(_path_from_cells(spec, cells, value))
                else:
                    walk(cells, value)

    walk((), 1.0)
    return paths


def map_assignment(spec: GutSpec, context: Any) -> StrategyPath:
    """
    Most probable full path.

    Eliminates levels bottom-up, keeping for each prefix the best achievable
    product of conditionals below it, then traces back from the root taking
    at each level the first cell whose best completion reaches the optimum.

    Args:
        spec: Tree specification
        context: Root observation

    Returns:
        StrategyPath whose joint_prob is the maximal path probability
    """
    units = expand_tree(spec, context)
    depth_of_leaf = len(spec.levels) - 1

    # best completion below each prefix, filled deepest first
    best_below: Dict[Prefix, float] = {}
    for prefix in sorted(units, key=len, reverse=True):
        unit = units[prefix]
        level = spec.levels[len(prefix)]
        rows, cols = level.shape
        scores = np.empty((rows, cols))
        for g in range(rows):
            for k in range(cols):
                below = 1.0 if len(prefix) == depth_of_leaf else best_below[prefix + ((g, k),)]
                scores[g, k] = unit.conditional(g, k) * below
        best_below[prefix] = float(scores.max())

    threshold = best_below[()] * (1.0 - TIE_TOL)
    prefix: Prefix = ()
    running = 1.0
    for depth, level in enumerate(spec.levels):
        unit = units[prefix]
        rows, cols = level.shape
        reach = np.empty((rows, cols))
        for g in range(rows):
            for k in range(cols):
                below = 1.0 if depth == depth_of_leaf else best_below[prefix + ((g, k),)]
                reach[g, k] = running * unit.conditional(g, k) * below
        qualifying = np.argwhere(reach >= threshold)
        # rounding can leave the optimum a few ulps short of the threshold
        g, k = (int(i) for i in qualifying[0]) if len(qualifying) else _first_best(reach)
        running *= unit.conditional(g, k)
        prefix = prefix + ((g, k),)

    path = _path_from_cells(spec, prefix, running)
    logger.debug(f"MAP path {path.choices} with probability {running:.6f}")
    return path


def joint_probability(spec: GutSpec, context: Any, path: StrategyPath) -> float:
    """
    Product of the chosen cells' conditionals along a path.

    Args:
        spec: Tree specification
        context: Root observation
        path: Path whose choices name one cell per level

    Returns:
        Joint probability
    """
    if len(path.choices) != len(spec.levels):
        raise InvalidInputError(f"path has {len(path.choices)} levels, tree has {len(spec.levels)}")

    joint = 1.0
    for level, (row_action, col_action) in zip(spec.levels, path.choices):
        if row_action not in level.row_actions or col_action not in level.col_actions:
            raise InvalidInputError(
                f"({row_action}, {col_action}) is not a cell of level {level.level_index}"
            )
        g = level.row_actions.index(row_action)
        k = level.col_actions.index(col_action)
        unit = evaluate_unit(level, context, 1.0, spec.tol)
        joint *= unit.conditional(g, k)
        context = level.child_context(context, g, k)
    return joint


def select(spec: GutSpec, context: Any, mode: GutMode = GutMode.GREEDY) -> StrategyPath:
    """Run the configured selection rule."""
    if mode == GutMode.MAP:
        return map_assignment(spec, context)
    return decide(spec, context)
