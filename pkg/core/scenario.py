"""
Scenario documents: parsing, defaulting and validation.

A scenario is a JSON document (YAML is accepted too) with a
``schema_version`` field. Every world, cost and coefficient constant has a
default; a file only names what it changes.
"""
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type, TypeVar

import yaml

from core.adversary import InfoMode, RegressionCoeffs
from core.errors import InvalidInputError, ScenarioError
from core.gut import GutMode
from core.logging_utils import get_logger
from core.policies import GameCoeffs, MonsterMode, PolicyMode
from core.util_model import EnergyCoeffs, HpCoeffs, LevelModifiers, WinCoeffs
from core.world import CostTable, Obstacle, Vec, WorldParams

logger = get_logger(__name__)

SCHEMA_VERSION = 1

T = TypeVar("T")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one batch of trials needs."""
    explorer_count: int
    monster_count: int
    name: str = "scenario"
    obstacles: Tuple[Obstacle, ...] = ()
    treasure: Vec = (85.0, 85.0)
    explorer_spawn: Vec = (20.0, 20.0)
    policy: PolicyMode = PolicyMode.GUT
    gut_mode: GutMode = GutMode.GREEDY
    info_mode: InfoMode = InfoMode.COMPLETE
    monster_policy: MonsterMode = MonsterMode.NEAREST
    explorer_attack_power: float = 1.0
    monster_power_ratio: float = 3.0
    world: WorldParams = field(default_factory=WorldParams)
    costs: CostTable = field(default_factory=CostTable)
    coeffs: GameCoeffs = field(default_factory=GameCoeffs)
    regression: RegressionCoeffs = field(default_factory=RegressionCoeffs)
    schema_version: int = SCHEMA_VERSION

    @property
    def tick_cap(self) -> int:
        return self.world.tick_cap


_ALIASES = {"explorers": "explorer_count", "monsters": "monster_count", "info": "info_mode"}
_TOP_LEVEL = {
    "schema_version", "name", "explorer_count", "monster_count", "obstacles", "treasure",
    "explorer_spawn", "policy", "gut_mode", "info_mode", "monster_policy",
    "explorer_attack_power", "monster_power_ratio",
}
_WORLD_KEYS = {f.name for f in fields(WorldParams)}
_BUNDLES = {
    "costs": CostTable,
    "win": WinCoeffs,
    "energy": EnergyCoeffs,
    "hp": HpCoeffs,
    "modifiers": LevelModifiers,
    "regression": RegressionCoeffs,
}


def _normalise(value: Any) -> str:
    return str(value).strip().lower().replace("_", "-")


def _enum(name: str, value: Any, kind):
    try:
        return kind(_normalise(value))
    except ValueError:
        allowed = ", ".join(member.value for member in kind)
        raise ScenarioError(name, f"unknown value {value!r} (expected one of {allowed})")


def _number(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(name, f"expected a number, got {value!r}")
    return float(value)


def _count(name: str, value: Any, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(name, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ScenarioError(name, f"must be >= {minimum}, got {value}")
    return value


def _point(name: str, value: Any) -> Vec:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(name, f"expected [x, y], got {value!r}")
    return _number(f"{name}[0]", value[0]), _number(f"{name}[1]", value[1])


def _bundle(name: str, value: Any, kind: Type[T]) -> T:
    if not isinstance(value, dict):
        raise ScenarioError(name, f"expected a mapping, got {type(value).__name__}")
    known = {f.name for f in fields(kind)}
    for key in value:
        if key not in known:
            raise ScenarioError(f"{name}.{key}", "unknown key")
    try:
        return kind(**{k: _number(f"{name}.{k}", v) for k, v in value.items()})
    except InvalidInputError as exc:
        raise ScenarioError(name, str(exc))


def _world(data: Dict[str, Any]) -> WorldParams:
    values: Dict[str, Any] = {}
    for key in _WORLD_KEYS & data.keys():
        raw = data[key]
        if key in ("tick_cap", "attack_rounds_per_tick", "edge_patience"):
            values[key] = _count(key, raw, 1 if key != "edge_patience" else 0)
        elif key == "exhaustion_kills":
            if not isinstance(raw, bool):
                raise ScenarioError(key, f"expected true or false, got {raw!r}")
            values[key] = raw
        else:
            values[key] = _number(key, raw)
    params = WorldParams(**values)

    for key in ("width", "height", "speed", "sensing_radius", "comm_radius", "attack_range",
                "treasure_radius", "formation_spacing", "guard_radius"):
        if getattr(params, key) <= 0:
            raise ScenarioError(key, f"must be > 0, got {getattr(params, key)}")
    if params.comm_radius <= params.sensing_radius:
        raise ScenarioError(
            "comm_radius",
            f"must exceed sensing_radius ({params.comm_radius} <= {params.sensing_radius})",
        )
    return params


def _obstacles(value: Any) -> Tuple[Obstacle, ...]:
    if not isinstance(value, list):
        raise ScenarioError("obstacles", "expected a list")
    result = []
    for i, item in enumerate(value):
        name = f"obstacles[{i}]"
        if not isinstance(item, dict) or set(item) != {"center", "radius"}:
            raise ScenarioError(name, "expected {center: [x, y], radius: r}")
        radius = _number(f"{name}.radius", item["radius"])
        if radius <= 0:
            raise ScenarioError(f"{name}.radius", f"must be > 0, got {radius}")
        result.append(Obstacle(_point(f"{name}.center", item["center"]), radius))
    return tuple(result)


def parse_scenario(data: Any, source: str = "<scenario>") -> ScenarioConfig:
    """
    Build a validated ScenarioConfig from a parsed document.

    Args:
        data: Mapping as read from the document
        source: Name used in log messages

    Returns:
        ScenarioConfig with defaults applied

    Raises:
        ScenarioError: naming the offending field
    """
    if not isinstance(data, dict):
        raise ScenarioError(None, f"{source}: top level must be a mapping")
    data = {_ALIASES.get(k, k): v for k, v in data.items()}

    for key in data:
        if key not in _TOP_LEVEL and key not in _WORLD_KEYS and key not in _BUNDLES:
            raise ScenarioError(key, "unknown key")

    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError("schema_version", f"unsupported version {version!r}")
    for required in ("explorer_count", "monster_count"):
        if required not in data:
            raise ScenarioError(required, "missing")

    explorer_attack_power = _number("explorer_attack_power", data.get("explorer_attack_power", 1.0))
    monster_power_ratio = _number("monster_power_ratio", data.get("monster_power_ratio", 3.0))
    if explorer_attack_power <= 0:
        raise ScenarioError("explorer_attack_power", "must be > 0")
    if monster_power_ratio <= 0:
        raise ScenarioError("monster_power_ratio", "must be > 0")

    costs = _bundle("costs", data.get("costs", {}), CostTable)
    for cost in fields(CostTable):
        if getattr(costs, cost.name) < 0:
            raise ScenarioError(f"costs.{cost.name}", "must be >= 0")

    coeffs = GameCoeffs(
        win=_bundle("win", data.get("win", {}), WinCoeffs),
        energy=_bundle("energy", data.get("energy", {}), EnergyCoeffs),
        hp=_bundle("hp", data.get("hp", {}), HpCoeffs),
        mods=_bundle("modifiers", data.get("modifiers", {}), LevelModifiers),
    )

    config = ScenarioConfig(
        explorer_count=_count("explorer_count", data["explorer_count"], 1),
        monster_count=_count("monster_count", data["monster_count"], 0),
        name=str(data.get("name", source)),
        obstacles=_obstacles(data.get("obstacles", [])),
        treasure=_point("treasure", data.get("treasure", [85.0, 85.0])),
        explorer_spawn=_point("explorer_spawn", data.get("explorer_spawn", [20.0, 20.0])),
        policy=_enum("policy", data.get("policy", "gut"), PolicyMode),
        gut_mode=_enum("gut_mode", data.get("gut_mode", "greedy"), GutMode),
        info_mode=_enum("info_mode", data.get("info_mode", "complete"), InfoMode),
        monster_policy=_enum("monster_policy", data.get("monster_policy", "nearest"), MonsterMode),
        explorer_attack_power=explorer_attack_power,
        monster_power_ratio=monster_power_ratio,
        world=_world(data),
        costs=costs,
        coeffs=coeffs,
        regression=_bundle("regression", data.get("regression", {}), RegressionCoeffs),
    )
    return config


def load_scenario(path) -> ScenarioConfig:
    """
    Read and validate a scenario document.

    Args:
        path: JSON or YAML file

    Returns:
        ScenarioConfig

    Raises:
        ScenarioError: unreadable file, parse error or invalid field
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(None, f"cannot read {path}: {exc.strerror or exc}")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(None, f"cannot parse {path}: {exc}")

    config = parse_scenario(data, source=path.stem)
    logger.info(
        f"Loaded scenario {config.name}: {config.explorer_count} explorers vs "
        f"{config.monster_count} monsters, {len(config.obstacles)} obstacles"
    )
    return config


def with_overrides(
    config: ScenarioConfig,
    policy: Optional[str] = None,
    gut_mode: Optional[str] = None,
    info_mode: Optional[str] = None
) -> ScenarioConfig:
    """Replace the decision modes of a loaded scenario (CLI flags)."""
    changes: Dict[str, Any] = {}
    if policy is not None:
        changes["policy"] = _enum("policy", policy, PolicyMode)
    if gut_mode is not None:
        changes["gut_mode"] = _enum("gut_mode", gut_mode, GutMode)
    if info_mode is not None:
        changes["info_mode"] = _enum("info_mode", info_mode, InfoMode)
    return replace(config, **changes) if changes else config
