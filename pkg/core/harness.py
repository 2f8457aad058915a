"""
Seeded trial execution, batch aggregation and CSV output.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.errors import InvalidInputError, SolverError, TrialError
from core.logging_utils import get_logger
from core.matgame import DEFAULT_TOL
from core.policies import OpponentEstimator, make_policies
from core.scenario import ScenarioConfig
from core.world import Outcome, Side, WorldState, build_world, outcome, step

logger = get_logger(__name__)

_MASK64 = (1 << 64) - 1

METRIC_COLUMNS = [
    "explorer_avg_hp_cost",
    "explorers_lost_per_kill",
    "hp_cost_per_kill",
    "system_energy_cost",
    "system_hp_cost",
]
CSV_COLUMNS = ["trial", "seed", "winner", "ticks"] + METRIC_COLUMNS
SUMMARY_LABEL = "summary"


def splitmix64(master_seed: int, index: int) -> int:
    """
    Derive an independent 64-bit seed for one trial.

    Args:
        master_seed: Batch seed
        index: Trial index

    Returns:
        Seed depending only on (master_seed, index)
    """
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class TrialMetrics:
    seed: int
    winner: Outcome
    ticks: int
    explorer_avg_hp_cost: float
    explorers_lost_per_kill: float
    hp_cost_per_kill: float
    system_energy_cost: float
    system_hp_cost: float
    explorers_lost: int = 0
    monsters_killed: int = 0

    def to_dict(self) -> Dict:
        return {
            "seed": self.seed,
            "winner": self.winner.value,
            "ticks": self.ticks,
            "explorer_avg_hp_cost": self.explorer_avg_hp_cost,
            "explorers_lost_per_kill": self.explorers_lost_per_kill,
            "hp_cost_per_kill": self.hp_cost_per_kill,
            "system_energy_cost": self.system_energy_cost,
            "system_hp_cost": self.system_hp_cost,
        }


@dataclass(frozen=True)
class BatchMetrics:
    """Trials in index order plus the win rate and the per-win means."""
    trials: Tuple[TrialMetrics, ...]
    master_seed: int
    win_rate: float
    means: Dict[str, float]

    @property
    def wins(self) -> int:
        return sum(1 for t in self.trials if t.winner == Outcome.EXPLORERS_WIN)

    def frame(self) -> pd.DataFrame:
        """One row per trial."""
        rows = [dict(trial=i, **t.to_dict()) for i, t in enumerate(self.trials)]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)


def trial_metrics(world: WorldState, seed: int) -> TrialMetrics:
    """
    Metrics of a finished world, read off the resource ledger.

    Args:
        world: World after the final tick
        seed: Trial seed

    Returns:
        TrialMetrics (per-kill ratios are 0 when no monster died)
    """
    explorers = world.side_of(Side.EXPLORER)
    monsters = world.side_of(Side.MONSTER)
    system_hp = float(sum(100.0 - e.hp for e in explorers))
    system_energy = float(sum(100.0 - e.energy for e in explorers))
    lost = sum(1 for e in explorers if not e.alive)
    killed = sum(1 for m in monsters if not m.alive)
    return TrialMetrics(
        seed=seed,
        winner=outcome(world),
        ticks=world.tick,
        explorer_avg_hp_cost=system_hp / len(explorers) if explorers else 0.0,
        explorers_lost_per_kill=lost / killed if killed else 0.0,
        hp_cost_per_kill=system_hp / killed if killed else 0.0,
        system_energy_cost=system_energy,
        system_hp_cost=system_hp,
        explorers_lost=lost,
        monsters_killed=killed,
    )


def prepare_trial(config: ScenarioConfig, seed: int, tol: float = DEFAULT_TOL):
    """
    Build the world and fresh policies of one trial.

    The opponent-state predictor draws from its own stream so that the
    information mode never perturbs the world's random sequence.

    Returns:
        (world, policies, world rng)
    """
    rng = np.random.default_rng(seed)
    world = build_world(
        config.explorer_count,
        config.monster_count,
        config.treasure,
        config.explorer_spawn,
        rng,
        obstacles=config.obstacles,
        params=config.world,
        cost_table=config.costs,
        explorer_attack_power=config.explorer_attack_power,
        monster_power_ratio=config.monster_power_ratio,
        win_coeffs=config.coeffs.win,
    )
    estimator = OpponentEstimator(config.info_mode, config.regression, np.random.default_rng([seed, 1]))
    policies = make_policies(
        config.policy, config.monster_policy, config.coeffs, config.gut_mode, estimator, tol=tol
    )
    return world, policies, rng


def run_trial(config: ScenarioConfig, seed: int, tol: float = DEFAULT_TOL) -> TrialMetrics:
    """
    Run one trial to its outcome or the tick cap.

    Args:
        config: Scenario
        seed: Trial seed
        tol: Solver tolerance of every level game

    Returns:
        TrialMetrics

    Raises:
        TrialError: when a game could not be solved
    """
    world, policies, rng = prepare_trial(config, seed, tol)
    try:
        while outcome(world) == Outcome.ONGOING:
            step(world, policies, rng)
    except SolverError as exc:
        logger.error(f"Trial with seed {seed} aborted at tick {world.tick}: {exc}")
        raise TrialError(f"trial seed {seed}: {exc}") from exc

    metrics = trial_metrics(world, seed)
    logger.debug(f"Trial seed {seed}: {metrics.winner.value} after {metrics.ticks} ticks")
    return metrics


def aggregate(trials: Sequence[TrialMetrics], master_seed: int) -> BatchMetrics:
    """
    Fold trials (in index order) into batch metrics.

    Means are over winning trials only and are 0 when there is none.
    """
    if not trials:
        raise InvalidInputError("a batch needs at least one trial")
    frame = pd.DataFrame([t.to_dict() for t in trials])
    won = frame[frame["winner"] == Outcome.EXPLORERS_WIN.value]
    means = {column: float(won[column].mean()) if len(won) else 0.0 for column in ["ticks"] + METRIC_COLUMNS}
    return BatchMetrics(tuple(trials), master_seed, len(won) / len(trials), means)


def run_batch(
    config: ScenarioConfig,
    trials: int,
    master_seed: int,
    workers: int = 1,
    order: Optional[Sequence[int]] = None,
    tol: float = DEFAULT_TOL
) -> BatchMetrics:
    """
    Run a seeded batch of trials.

    Args:
        config: Scenario
        trials: Number of trials
        master_seed: Batch seed; trial i uses splitmix64(master_seed, i)
        workers: Process count (1 runs in-process)
        order: Execution order of trial indices (default ascending)
        tol: Solver tolerance passed to the policies

    Returns:
        BatchMetrics folded in trial-index order
    """
    if trials < 1:
        raise InvalidInputError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise InvalidInputError(f"workers must be >= 1, got {workers}")
    order = list(range(trials)) if order is None else list(order)
    if sorted(order) != list(range(trials)):
        raise InvalidInputError("order must be a permutation of the trial indices")

    seeds = [splitmix64(master_seed, i) for i in range(trials)]
    logger.info(
        f"Running {trials} trials of {config.name} ({config.policy.value}, {config.info_mode.value}) "
        f"with master seed {master_seed}"
    )

    results: Dict[int, TrialMetrics] = {}
    if workers == 1:
        for i in order:
            results[i] = run_trial(config, seeds[i], tol)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.submit(run_trial, config, seeds[i], tol) for i in order}
            for i, future in futures.items():
                results[i] = future.result()

    batch = aggregate([results[i] for i in range(trials)], master_seed)
    logger.info(f"{config.name}: win rate {batch.win_rate:.2f} over {trials} trials")
    return batch


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def write_csv(batch: BatchMetrics, path) -> Path:
    """
    Write one row per trial plus a summary row.

    The summary row carries the master seed, the win rate in the winner
    column and the per-win means.

    Args:
        batch: Batch metrics
        path: Output file

    Returns:
        Path written

    Raises:
        OSError: when the file cannot be written
    """
    if not str(path):
        raise OSError("output path is empty")
    path = Path(path)

    rows: List[Dict[str, str]] = []
    for i, t in enumerate(batch.trials):
        row = {"trial": str(i), "seed": str(t.seed), "winner": t.winner.value, "ticks": str(t.ticks)}
        row.update({column: _fmt(getattr(t, column)) for column in METRIC_COLUMNS})
        rows.append(row)
    summary = {
        "trial": SUMMARY_LABEL,
        "seed": str(batch.master_seed),
        "winner": _fmt(batch.win_rate),
        "ticks": _fmt(batch.means["ticks"]),
    }
    summary.update({column: _fmt(batch.means[column]) for column in METRIC_COLUMNS})
    rows.append(summary)

    pd.DataFrame(rows, columns=CSV_COLUMNS).to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(batch.trials)} trials to {path}")
    return path
