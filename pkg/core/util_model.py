"""
Utility formulas feeding the game tree.

Needs-hierarchy expectations, the winning / energy / HP expectations of an
engagement between explorers and monsters, their Monte-Carlo counterparts,
and the builders of the three per-level payoff matrices.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from core.errors import InvalidInputError
from core.matgame import PayoffMatrix

LEVEL1_ACTIONS = ("Attack", "Defend")
LEVEL2_ACTIONS = ("Nearest", "A-Lowest", "A-Highest")
LEVEL3_ROW_ACTIONS = ("OneGroup", "TwoGroups", "ThreeGroups")
LEVEL3_COL_ACTIONS = ("Independent", "Dependent")


class NeedKind(str, Enum):
    """Layers of the needs hierarchy that carry a formula."""
    SAFETY = "Safety"
    BASIC = "Basic"
    CAPABILITY = "Capability"
    TEAMING = "Teaming"


@dataclass(frozen=True)
class NeedSpec:
    """Weighted needs with their conditional probabilities."""
    weights: Tuple[float, ...] = ()
    probabilities: Tuple[float, ...] = ()
    kind: NeedKind = NeedKind.SAFETY


@dataclass(frozen=True)
class WinCoeffs:
    a1: float = 1.0
    a2: float = 1.0
    a3: float = 1.0
    a4: float = 1.0
    a5: float = 1.0


@dataclass(frozen=True)
class EnergyCoeffs:
    b0: float = 0.0
    b1: float = 1.0
    b2: float = 1.0
    b3: float = 1.0
    b11: float = 1.0
    b12: float = 1.0
    b13: float = 1.0


@dataclass(frozen=True)
class HpCoeffs:
    c0: float = 0.0
    c1: float = 1.0
    rho: float = 1.0
    gamma_e: float = 0.5
    gamma_m: float = 0.5
    delta_e: float = 0.5
    delta_m: float = 0.5


@dataclass(frozen=True)
class LevelModifiers:
    """Per-cell scaling that gives each table label its meaning."""
    attack_t: float = 1.25
    attack_r: float = 0.75
    defend_t: float = 0.75
    defend_r: float = 1.25
    nearest_distance: float = 0.5


@dataclass(frozen=True)
class EngagementObs:
    """
    Everything the expectations read about one explorers-vs-monsters engagement.

    Ability fields with a ``v`` suffix are side averages; the others belong to
    the focal agent. The targeting fractions describe the opponent each
    targeting rule would pick: ``em_low`` is the weakest monster's HP over the
    mean, ``em_high`` the strongest monster's attack ability over the mean and
    ``dm_low``/``dm_high`` their distances over ``d``. ``ee_*`` are the same
    fractions of the explorers as seen from the monsters.
    """
    n: int = 1
    m: int = 1
    d: float = 1.0
    v: float = 1.0
    f: float = 0.0
    q: float = 0.0
    t_ev: float = 1.0
    t_mv: float = 1.0
    r_ev: float = 1.0
    r_mv: float = 1.0
    t_e: float = 1.0
    t_m: float = 1.0
    r_e: float = 1.0
    r_m: float = 1.0
    phi_e: float = 1.0
    phi_m: float = 1.0
    k: int = 1
    g: int = 1
    e_e: float = 100.0
    e_m: float = 100.0
    lam_e_override: Optional[float] = field(default=None)
    lam_m_override: Optional[float] = field(default=None)
    ee_low: float = 1.0
    ee_high: float = 1.0
    em_low: float = 1.0
    em_high: float = 1.0
    dm_low: float = 1.0
    dm_high: float = 1.0

    @property
    def lam_e(self) -> float:
        """Poisson rate of explorer attacks."""
        if self.lam_e_override is not None:
            return self.lam_e_override
        return self.n * self.phi_e

    @property
    def lam_m(self) -> float:
        """Poisson rate of monster attacks."""
        if self.lam_m_override is not None:
            return self.lam_m_override
        return self.m * self.phi_m


def _check_obs(obs: EngagementObs):
    if obs.n < 0 or obs.m < 0 or obs.k < 0 or obs.g < 0:
        raise InvalidInputError("agent counts must be >= 0")
    if not (0.0 <= obs.e_e <= 100.0 and 0.0 <= obs.e_m <= 100.0):
        raise InvalidInputError(f"energies must lie in [0, 100], got {obs.e_e}, {obs.e_m}")


def need_expectation(spec: NeedSpec) -> float:
    """
    Expected need: sum of weights times their probabilities.

    Args:
        spec: Weights and probabilities of equal length

    Returns:
        Expected need
    """
    if len(spec.weights) != len(spec.probabilities):
        raise InvalidInputError(
            f"weights and probabilities differ in length: {len(spec.weights)} != {len(spec.probabilities)}"
        )
    if any(p < 0.0 or p > 1.0 for p in spec.probabilities):
        raise InvalidInputError("need probabilities must lie in [0, 1]")
    return float(sum(w * p for w, p in zip(spec.weights, spec.probabilities)))


def winning_probability(obs: EngagementObs, c: WinCoeffs = WinCoeffs(), clamp: bool = True) -> float:
    """
    Bernoulli winning rate of the explorers.

    W = (a1 (a2 t_ev + a3 r_ev) / (a4 t_mv + a5 r_mv)) ** (m / n)

    Args:
        obs: Engagement observation
        c: Coefficients
        clamp: Limit the result to [0, 1]

    Returns:
        Winning probability (raw when clamp is False)
    """
    _check_obs(obs)
    if obs.n <= 0:
        raise InvalidInputError("winning probability needs n > 0")
    denominator = c.a4 * obs.t_mv + c.a5 * obs.r_mv
    if denominator <= 0:
        raise InvalidInputError(f"monster ability term must be > 0, got {denominator}")
    base = c.a1 * (c.a2 * obs.t_ev + c.a3 * obs.r_ev) / denominator
    if base < 0:
        raise InvalidInputError(f"explorer ability term must be >= 0, got {base}")

    value = base ** (obs.m / obs.n)
    if clamp:
        return min(max(value, 0.0), 1.0)
    return float(value)


def expected_energy(obs: EngagementObs, c: EnergyCoeffs = EnergyCoeffs()) -> float:
    """
    Closed-form expected energy cost of the explorers.

    E = b0 + b1 b11 (n - m) d + b2 b12 (n f lam_m - m q lam_e) + b3 b13 n d / v,
    which with the default rates is the n m (f phi_m - q phi_e) attack term.

    Args:
        obs: Engagement observation
        c: Coefficients

    Returns:
        Expected energy cost
    """
    _check_obs(obs)
    if obs.v <= 0:
        raise InvalidInputError(f"speed v must be > 0, got {obs.v}")
    walking = c.b1 * c.b11 * (obs.n - obs.m) * obs.d
    attacking = c.b2 * c.b12 * (obs.n * obs.f * obs.lam_m - obs.m * obs.q * obs.lam_e)
    communicating = c.b3 * c.b13 * obs.n * obs.d / obs.v
    return float(c.b0 + walking + attacking + communicating)


def _mean_and_stderr(draws: np.ndarray) -> Tuple[float, float]:
    mean = float(draws.mean())
    if draws.size < 2:
        return mean, 0.0
    return mean, float(draws.std(ddof=1) / math.sqrt(draws.size))


def monte_carlo_energy(
    obs: EngagementObs,
    c: EnergyCoeffs = EnergyCoeffs(),
    samples: int = 100_000,
    rng_seed: int = 0
) -> Tuple[float, float]:
    """
    Sample the full energy expectation.

    Walking distance x ~ Normal(d, 1); attacks received i ~ Poisson(lam_m) and
    delivered j ~ Poisson(lam_e); communication rounds w ~ Poisson(d / v).

    Args:
        obs: Engagement observation
        c: Coefficients
        samples: Number of draws
        rng_seed: Seed of the generator

    Returns:
        (mean, standard error)
    """
    _check_obs(obs)
    if samples < 1:
        raise InvalidInputError(f"samples must be >= 1, got {samples}")
    if obs.v <= 0:
        raise InvalidInputError(f"speed v must be > 0, got {obs.v}")

    rng = np.random.default_rng(rng_seed)
    x = rng.normal(obs.d, 1.0, size=samples)
    i = rng.poisson(obs.lam_m, size=samples)
    j = rng.poisson(obs.lam_e, size=samples)
    w = rng.poisson(obs.d / obs.v, size=samples)

    draws = (
        c.b0
        + c.b1 * c.b11 * (obs.n - obs.m) * x
        + c.b2 * c.b12 * (obs.n * obs.f * i - obs.m * obs.q * j)
        + c.b3 * c.b13 * obs.n * w
    )
    return _mean_and_stderr(draws)


def expected_energy_distributional(
    obs: EngagementObs,
    c: EnergyCoeffs = EnergyCoeffs(),
    samples: int = 100_000,
    rng_seed: int = 0
) -> float:
    """Monte-Carlo estimate of the expected energy cost."""
    return monte_carlo_energy(obs, c, samples, rng_seed)[0]


def expected_hp(obs: EngagementObs, c: HpCoeffs = HpCoeffs()) -> float:
    """
    Closed-form expected HP exchange.

    H = c0 + c1 rho (k phi_m e_e (gamma_e + delta_e) - g phi_e e_m (gamma_m + delta_m))

    Args:
        obs: Engagement observation
        c: Coefficients

    Returns:
        Expected HP exchange in the explorers' favour
    """
    _check_obs(obs)
    dealt = obs.k * obs.phi_m * obs.e_e * (c.gamma_e + c.delta_e)
    taken = obs.g * obs.phi_e * obs.e_m * (c.gamma_m + c.delta_m)
    return float(c.c0 + c.c1 * c.rho * (dealt - taken))


def monte_carlo_hp(
    obs: EngagementObs,
    c: HpCoeffs = HpCoeffs(),
    samples: int = 100_000,
    rng_seed: int = 0
) -> Tuple[float, float]:
    """
    Sample the HP exchange with Poisson hit counts.

    Each hit costs h = rho * z * (t + r) with abilities t = gamma * e and
    r = delta * e.

    Returns:
        (mean, standard error)
    """
    _check_obs(obs)
    if samples < 1:
        raise InvalidInputError(f"samples must be >= 1, got {samples}")

    rng = np.random.default_rng(rng_seed)
    i = rng.poisson(obs.phi_m, size=samples)
    j = rng.poisson(obs.phi_e, size=samples)
    explorer_ability = c.gamma_e * obs.e_e + c.delta_e * obs.e_e
    monster_ability = c.gamma_m * obs.e_m + c.delta_m * obs.e_m

    draws = c.c0 + c.c1 * (
        obs.k * c.rho * i * explorer_ability - obs.g * c.rho * j * monster_ability
    )
    return _mean_and_stderr(draws)


def expected_hp_distributional(
    obs: EngagementObs,
    c: HpCoeffs = HpCoeffs(),
    samples: int = 100_000,
    rng_seed: int = 0
) -> float:
    """Monte-Carlo estimate of the expected HP exchange."""
    return monte_carlo_hp(obs, c, samples, rng_seed)[0]


def level1_cell(obs: EngagementObs, row: int, col: int, mods: LevelModifiers = LevelModifiers()) -> EngagementObs:
    """Observation seen by cell (row, col) of the Attack/Defend table."""
    e_t, e_r = (mods.attack_t, mods.attack_r) if row == 0 else (mods.defend_t, mods.defend_r)
    m_t, m_r = (mods.attack_t, mods.attack_r) if col == 0 else (mods.defend_t, mods.defend_r)
    return replace(
        obs,
        t_ev=obs.t_ev * e_t, r_ev=obs.r_ev * e_r, t_e=obs.t_e * e_t, r_e=obs.r_e * e_r,
        t_mv=obs.t_mv * m_t, r_mv=obs.r_mv * m_r, t_m=obs.t_m * m_t, r_m=obs.r_m * m_r,
    )


def level2_cell(obs: EngagementObs, row: int, col: int, mods: LevelModifiers = LevelModifiers()) -> EngagementObs:
    """
    Observation seen by cell (row, col) of the targeting table.

    A targeting rule sets how far a side walks to its target and how much of
    the opponents' attack rate falls away first. Nearest shortens the walk.
    A-Lowest walks to the weakest opponent and cuts the rate by how weak it
    is; A-Highest walks to the strongest and cuts what it adds above the mean.
    """
    d = obs.d
    phi_m = obs.phi_m
    phi_e = obs.phi_e
    if row == 0:
        d *= mods.nearest_distance
    elif row == 1:
        d *= obs.dm_low
        phi_m *= obs.em_low
    else:
        d *= obs.dm_high
        phi_m *= max(2.0 - obs.em_high, 0.0)
    if col == 0:
        d *= mods.nearest_distance
    elif col == 1:
        phi_e *= obs.ee_low
    else:
        phi_e *= max(2.0 - obs.ee_high, 0.0)
    return replace(obs, d=d, phi_m=phi_m, phi_e=phi_e)


def _share(count: int, groups: int) -> int:
    return math.ceil(count / groups) if count > 0 else 0


def level3_cell(obs: EngagementObs, row: int, col: int) -> EngagementObs:
    """
    Observation seen by cell (row, col) of the grouping table.

    One group brings the whole team to every fight: independent monsters meet
    it one at a time, dependent monsters all together. Split groups each meet
    their own share of independent monsters; dependent monsters bunched on one
    group are flanked by the whole team while only their share reaches back.
    """
    groups = row + 1
    if groups == 1:
        k, g = obs.n, (obs.m if col == 1 else min(obs.m, 1))
    elif col == 1:
        k, g = obs.n, _share(obs.m, groups)
    else:
        k, g = _share(obs.n, groups), _share(obs.m, groups)
    return replace(obs, k=k, g=g)


def payoff_level1(
    obs: EngagementObs,
    win_coeffs: WinCoeffs = WinCoeffs(),
    mods: LevelModifiers = LevelModifiers()
) -> PayoffMatrix:
    """Attack/Defend table of winning probabilities (2x2)."""
    return PayoffMatrix(np.array([
        [winning_probability(level1_cell(obs, g, k, mods), win_coeffs) for k in range(2)]
        for g in range(2)
    ]))


def payoff_level2(
    obs: EngagementObs,
    energy_coeffs: EnergyCoeffs = EnergyCoeffs(),
    mods: LevelModifiers = LevelModifiers()
) -> PayoffMatrix:
    """Targeting table (3x3); energy is a cost, so entries are -E."""
    return PayoffMatrix(np.array([
        [-expected_energy(level2_cell(obs, g, k, mods), energy_coeffs) for k in range(3)]
        for g in range(3)
    ]))


def payoff_level3(obs: EngagementObs, hp_coeffs: HpCoeffs = HpCoeffs()) -> PayoffMatrix:
    """Grouping table (3x2) of HP exchange: explorer group count vs monster cooperation."""
    return PayoffMatrix(np.array([
        [expected_hp(level3_cell(obs, g, k), hp_coeffs) for k in range(2)]
        for g in range(3)
    ]))


def level_fractions(levels: Sequence[float]) -> Tuple[float, float]:
    """
    Min and max of a side's levels relative to their mean.

    Args:
        levels: HP, energy or ability of the observed agents

    Returns:
        (low, high) fractions, (1, 1) when nothing is observed
    """
    if not levels:
        return 1.0, 1.0
    mean = float(np.mean(levels))
    if mean <= 0:
        return 1.0, 1.0
    return float(min(levels)) / mean, float(max(levels)) / mean
