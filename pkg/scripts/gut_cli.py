"""
Command line for the GUT harness: run batches, solve a matrix game, validate scenarios.
"""
import sys
import json
import argparse
from pathlib import Path

import pandas as pd
import yaml

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.config import get_config
from core.errors import GutError
from core.harness import run_batch, write_csv
from core.logging_utils import setup_logger, set_package_level
from core.matgame import PayoffMatrix, exploitability, solve
from core.scenario import load_scenario, with_overrides

logger = setup_logger(__name__)


def read_matrix(path: Path) -> PayoffMatrix:
    """Load a payoff matrix from JSON/YAML (list of rows) or headerless CSV."""
    if path.suffix.lower() == ".csv":
        rows = pd.read_csv(path, header=None).to_numpy(dtype=float).tolist()
    else:
        rows = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise GutError(f"{path}: expected a non-empty list of rows")
    return PayoffMatrix.from_rows(rows)


def cmd_run(args, config) -> int:
    scenario = with_overrides(load_scenario(args.scenario), args.policy, args.gut_mode, args.info)
    trials = args.trials if args.trials is not None else config.default_trials
    seed = args.seed if args.seed is not None else config.master_seed
    workers = args.workers if args.workers is not None else config.workers

    batch = run_batch(scenario, trials, seed, workers, tol=config.solver_tol)
    if args.out is None:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        out = str(config.output_dir / f"{scenario.name}_{scenario.policy.value}.csv")
    else:
        out = args.out
    write_csv(batch, out)
    print(f"{scenario.name}: win rate {batch.win_rate:.2f} ({batch.wins}/{trials}) -> {out}")
    return 0


def cmd_solve(args, config) -> int:
    tol = args.tol if args.tol is not None else config.solver_tol
    payoff = read_matrix(Path(args.matrix))
    solution = solve(payoff, tol)
    result = solution.to_dict()
    result["exploitability"] = exploitability(payoff, solution.row_strategy, solution.col_strategy)
    print(json.dumps(result))
    return 0


def cmd_validate(args, config) -> int:
    scenario = load_scenario(args.scenario)
    print(
        f"{args.scenario}: ok ({scenario.explorer_count} explorers vs {scenario.monster_count} monsters, "
        f"policy {scenario.policy.value}, monsters {scenario.monster_policy.value})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Game-theoretic utility tree harness")
    parser.add_argument("--config", default=None, help="Path to config file")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a batch of trials and write a CSV")
    run.add_argument("--scenario", required=True, help="Scenario document")
    run.add_argument("--policy", choices=["gut", "qmix", "qmix-gut"], help="Explorer policy (overrides scenario)")
    run.add_argument("--gut-mode", choices=["greedy", "map"], help="Path selection rule")
    run.add_argument("--info", choices=["complete", "linear", "poly"], help="Information mode")
    run.add_argument("--trials", type=int, help="Number of trials")
    run.add_argument("--seed", type=int, help="Master seed")
    run.add_argument("--workers", type=int, help="Worker processes")
    run.add_argument("--out", help="Output CSV path")
    run.set_defaults(handler=cmd_run)

    solve_cmd = sub.add_parser("solve", help="Solve a zero-sum matrix game")
    solve_cmd.add_argument("--matrix", required=True, help="JSON/YAML list of rows, or CSV")
    solve_cmd.add_argument("--tol", type=float, help="Solver tolerance")
    solve_cmd.set_defaults(handler=cmd_solve)

    validate = sub.add_parser("validate", help="Check a scenario document")
    validate.add_argument("--scenario", required=True, help="Scenario document")
    validate.set_defaults(handler=cmd_validate)
    return parser


def main(argv=None) -> int:
    """Main CLI function."""
    args = build_parser().parse_args(argv)

    try:
        config = get_config(args.config)
        config.validate()
        set_package_level(config.log_level)
        return args.handler(args, config)
    except (GutError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
