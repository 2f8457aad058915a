"""
Two-player zero-sum matrix games.

Finds pure saddle points by row-min/column-max enumeration and mixed
equilibria through the linear-programming reduction solved with HiGHS.
Every mixed answer is certified by its exploitability before it is returned.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from core.errors import InvalidInputError, SolverError
from core.logging_utils import get_logger

logger = get_logger(__name__)

DEFAULT_TOL = 1e-6
_SUM_TOL = 1e-6
_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


class SolutionKind(str, Enum):
    """Whether an equilibrium is a saddle point or a mixed profile."""
    PURE = "Pure"
    MIXED = "Mixed"


@dataclass(frozen=True, eq=False)
class PayoffMatrix:
    """Utilities to the row player; the column player receives the negation."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise InvalidInputError(f"payoff must be a non-empty 2D matrix, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise InvalidInputError("payoff entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "PayoffMatrix":
        """
        Build a matrix from nested row lists.

        Args:
            rows: Row-major utilities

        Returns:
            PayoffMatrix
        """
        try:
            return cls(np.asarray(rows, dtype=np.float64))
        except (TypeError, ValueError) as e:
            if isinstance(e, InvalidInputError):
                raise
            raise InvalidInputError(f"payoff rows are not a numeric matrix: {e}") from e

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def maxmin(self) -> float:
        """Row player's pure security level."""
        return float(self.entries.min(axis=1).max())

    def minmax(self) -> float:
        """Column player's pure security level (as a row-player utility)."""
        return float(self.entries.max(axis=0).min())


@dataclass(frozen=True, eq=False)
class GameSolution:
    """An equilibrium profile and its value to the row player."""

    kind: SolutionKind
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    value: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "row_strategy": [float(p) for p in self.row_strategy],
            "col_strategy": [float(p) for p in self.col_strategy],
            "value": float(self.value),
        }


def _one_hot(size: int, index: int) -> np.ndarray:
    vector = np.zeros(size)
    vector[index] = 1.0
    return vector


def _as_distribution(vector: Sequence[float], size: int, name: str) -> np.ndarray:
    dist = np.asarray(vector, dtype=np.float64)
    if dist.ndim != 1 or dist.shape[0] != size:
        raise InvalidInputError(f"{name} must have length {size}, got shape {dist.shape}")
    if np.any(dist < 0) or abs(dist.sum() - 1.0) > _SUM_TOL:
        raise InvalidInputError(f"{name} is not a probability vector")
    return dist


def solve_pure(payoff: PayoffMatrix) -> Optional[Tuple[int, int, float]]:
    """
    Find a saddle point: an entry that is both its row minimum and column maximum.

    Args:
        payoff: Game matrix

    Returns:
        (row, col, value) of the first saddle in row-major order, or None
    """
    a = payoff.entries
    saddle = (a == a.min(axis=1, keepdims=True)) & (a == a.max(axis=0, keepdims=True))
    cells = np.argwhere(saddle)
    if len(cells) == 0:
        return None
    g, k = (int(i) for i in cells[0])
    return g, k, float(a[g, k])


def exploitability(payoff: PayoffMatrix, row_strategy: Sequence[float], col_strategy: Sequence[float]) -> float:
    """
    Sum of both players' best-response gains against a profile.

    Args:
        payoff: Game matrix
        row_strategy: Row player's mixed strategy X
        col_strategy: Column player's mixed strategy Y

    Returns:
        Non-negative gap; zero exactly at an equilibrium
    """
    x = _as_distribution(row_strategy, payoff.rows, "row_strategy")
    y = _as_distribution(col_strategy, payoff.cols, "col_strategy")
    a = payoff.entries
    value = float(x @ a @ y)
    col_gain = value - float((x @ a).min())
    row_gain = float((a @ y).max()) - value
    # LP round-off can leave either gain a hair below zero
    return max(col_gain, 0.0) + max(row_gain, 0.0)


def _solve_side(matrix: np.ndarray, maximize: bool) -> np.ndarray:
    """
    Solve one player's LP: max v s.t. matrix.T @ x >= v (or min u s.t. matrix @ y <= u).

    Returns:
        The strategy part of the optimal point
    """
    size = matrix.shape[0] if maximize else matrix.shape[1]
    c = np.zeros(size + 1)
    if maximize:
        c[-1] = -1.0
        a_ub = np.hstack([-matrix.T, np.ones((matrix.shape[1], 1))])
        b_ub = np.zeros(matrix.shape[1])
    else:
        c[-1] = 1.0
        a_ub = np.hstack([matrix, -np.ones((matrix.shape[0], 1))])
        b_ub = np.zeros(matrix.shape[0])
    a_eq = np.ones((1, size + 1))
    a_eq[0, -1] = 0.0
    bounds = [(0.0, None)] * size + [(None, None)]

    result = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=bounds,
        method="highs",
        options=_HIGHS_OPTIONS,
    )
    if not result.success:
        raise SolverError(f"linear program failed: {result.message}")

    strategy = np.clip(result.x[:size], 0.0, None)
    total = strategy.sum()
    if total <= 0:
        raise SolverError("linear program returned an empty strategy")
    return strategy / total


def solve_mixed(payoff: PayoffMatrix, tol: float = DEFAULT_TOL) -> GameSolution:
    """
    Compute a mixed equilibrium via the zero-sum LP reduction.

    Args:
        payoff: Game matrix
        tol: Exploitability bound the answer must meet

    Returns:
        GameSolution of kind Mixed

    Raises:
        SolverError: If the LP fails or the profile cannot be certified
    """
    if tol <= 0:
        raise InvalidInputError(f"tol must be > 0, got {tol}")

    a = payoff.entries
    x = _solve_side(a, maximize=True)
    y = _solve_side(a, maximize=False)
    value = float(x @ a @ y)

    gap = exploitability(payoff, x, y)
    if gap > tol:
        raise SolverError(f"equilibrium not certified: exploitability {gap:.3e} > tol {tol:.3e}")

    logger.debug(f"Mixed equilibrium on {payoff.rows}x{payoff.cols} game, value {value:.6f}")
    return GameSolution(SolutionKind.MIXED, x, y, value)


def solve(payoff: PayoffMatrix, tol: float = DEFAULT_TOL) -> GameSolution:
    """
    Solve a zero-sum game: saddle point when one exists, else a mixed equilibrium.

    Args:
        payoff: Game matrix
        tol: Exploitability bound for the mixed fallback

    Returns:
        GameSolution
    """
    saddle = solve_pure(payoff)
    if saddle is not None:
        g, k, value = saddle
        return GameSolution(
            SolutionKind.PURE,
            _one_hot(payoff.rows, g),
            _one_hot(payoff.cols, k),
            value,
        )
    return solve_mixed(payoff, tol)
