"""
Adversary classification and opponent-state prediction under incomplete information.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from core.errors import InvalidInputError


class AdversaryClass(str, Enum):
    NOT_ADVERSARY = "NotAdversary"
    INTENTIONAL = "Intentional"
    UNINTENTIONAL = "Unintentional"


class InfoMode(str, Enum):
    """How the explorers learn the monsters' energy state."""
    COMPLETE = "complete"
    LINEAR = "linear"
    POLY = "poly"


@dataclass(frozen=True)
class RegressionCoeffs:
    beta_uc0: float = 0.08
    beta_uc1: float = 0.03
    beta_uc2: float = 0.0001
    beta_asc0: float = 0.03
    beta_asc1: float = 0.0003
    beta_asc2: float = 0.00001
    noise_std: float = 1.0

    def __post_init__(self):
        if self.noise_std < 0:
            raise InvalidInputError(f"noise_std must be >= 0, got {self.noise_std}")


@dataclass(frozen=True)
class PredictedState:
    """Estimated opponent unit attacking energy cost and energy level."""
    e_uc: float
    e_el: float


def classify(
    max_need_alone: float,
    max_need_with: float,
    expected_opponent_need: float,
    opponent_current_need: float,
    eq_tol: float = 1e-9
) -> AdversaryClass:
    """
    Decide whether an entity is an adversary and of which kind.

    An entity is an adversary when the agent's best achievable need is
    strictly lower in its presence. It is intentional when its own need
    shifts under the encounter, unintentional when it does not.

    Args:
        max_need_alone: Agent's maximal need without the entity
        max_need_with: Agent's maximal need with the entity present
        expected_opponent_need: Entity's expected need when facing the agent
        opponent_current_need: Entity's current standalone need
        eq_tol: Tolerance for the equality test

    Returns:
        AdversaryClass
    """
    if eq_tol < 0:
        raise InvalidInputError(f"eq_tol must be >= 0, got {eq_tol}")
    if not max_need_alone > max_need_with:
        return AdversaryClass.NOT_ADVERSARY
    if abs(expected_opponent_need - opponent_current_need) > eq_tol:
        return AdversaryClass.INTENTIONAL
    return AdversaryClass.UNINTENTIONAL


def _noise(c: RegressionCoeffs, rng: Optional[np.random.Generator]) -> float:
    if c.noise_std == 0:
        return 0.0
    if rng is None:
        raise InvalidInputError("a random generator is required when noise_std > 0")
    return float(rng.normal(0.0, c.noise_std))


def _check_hp(hp_uc: float, hp_asc: float):
    if hp_uc < 0 or hp_asc < 0:
        raise InvalidInputError(f"HP costs must be >= 0, got {hp_uc}, {hp_asc}")


def predict_linear(
    hp_uc: float,
    hp_asc: float,
    c: RegressionCoeffs = RegressionCoeffs(),
    rng: Optional[np.random.Generator] = None
) -> PredictedState:
    """
    Linear regression estimate of the opponent state.

    Args:
        hp_uc: Mean HP cost per explorer so far
        hp_asc: Explorer system HP cost so far
        c: Regression coefficients
        rng: Generator for the noise terms (optional when noise_std is 0)

    Returns:
        PredictedState with e_el clamped to [0, 100]
    """
    _check_hp(hp_uc, hp_asc)
    e_uc = hp_uc * c.beta_uc0 + _noise(c, rng)
    e_el = 100.0 - hp_asc * c.beta_asc0 + _noise(c, rng)
    return PredictedState(e_uc=e_uc, e_el=min(max(e_el, 0.0), 100.0))


def predict_poly(
    hp_uc: float,
    hp_asc: float,
    c: RegressionCoeffs = RegressionCoeffs(),
    rng: Optional[np.random.Generator] = None
) -> PredictedState:
    """Quadratic regression estimate of the opponent state."""
    _check_hp(hp_uc, hp_asc)
    e_uc = hp_uc ** 2 * c.beta_uc2 + hp_uc * c.beta_uc1 + _noise(c, rng)
    e_el = 100.0 - hp_asc ** 2 * c.beta_asc2 - hp_asc * c.beta_asc1 + _noise(c, rng)
    return PredictedState(e_uc=e_uc, e_el=min(max(e_el, 0.0), 100.0))


def predict(
    mode: InfoMode,
    hp_uc: float,
    hp_asc: float,
    c: RegressionCoeffs = RegressionCoeffs(),
    rng: Optional[np.random.Generator] = None
) -> Optional[PredictedState]:
    """
    Dispatch on the information mode.

    Returns:
        None under complete information, otherwise the model's prediction
    """
    if mode == InfoMode.LINEAR:
        return predict_linear(hp_uc, hp_asc, c, rng)
    if mode == InfoMode.POLY:
        return predict_poly(hp_uc, hp_asc, c, rng)
    return None
