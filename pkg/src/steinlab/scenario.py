"""Scenario configs: JSON files describing one null/alternative pair and a list of checks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .families import FamilySpec

SCHEMA = "stein-lab/scenario@1"
_FIELDS = {"schema", "name", "description", "seed", "log_base", "null", "alternative",
           "eps", "n_max", "checks", "params"}


@dataclass(frozen=True)
class Scenario:
    name: str
    null: FamilySpec
    alt: FamilySpec
    eps: float
    n_max: int
    checks: tuple
    seed: int = 0
    description: str = ""
    log_base: str | None = None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"schema": SCHEMA, "name": self.name, "description": self.description,
               "seed": self.seed, "null": self.null.to_dict(), "alternative": self.alt.to_dict(),
               "eps": self.eps, "n_max": self.n_max, "checks": list(self.checks),
               "params": self.params}
        if self.log_base is not None:
            out["log_base"] = self.log_base
        return out


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def parse_scenario(data: dict, registry=None) -> Scenario:
    """Validate a decoded config. Raises :class:`ConfigError` on any problem."""
    if registry is None:
        from .checks import REGISTRY as registry
    _require(isinstance(data, dict), "config must be a JSON object")
    extra = set(data) - _FIELDS
    _require(not extra, f"unknown config fields {sorted(extra)}")
    _require(data.get("schema") == SCHEMA, f"schema must be {SCHEMA!r}")
    for key in ("name", "null", "alternative", "eps", "n_max", "checks"):
        _require(key in data, f"missing field {key!r}")
    name = data["name"]
    _require(isinstance(name, str) and name and "/" not in name, "name must be a nonempty string")
    eps = data["eps"]
    _require(isinstance(eps, (int, float)) and not isinstance(eps, bool) and 0 < eps < 1,
             "eps must lie in (0, 1)")
    n_max = data["n_max"]
    _require(isinstance(n_max, int) and not isinstance(n_max, bool) and n_max >= 1,
             "n_max must be an integer >= 1")
    seed = data.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0,
             "seed must be a nonnegative integer")
    base = data.get("log_base")
    _require(base in (None, "2", "e", 2), "log_base must be 2 or 'e'")
    checks = data["checks"]
    _require(isinstance(checks, list) and checks, "checks must be a nonempty list")
    unknown = [c for c in checks if c not in registry]
    _require(not unknown, f"unregistered checks {unknown}")
    _require(len(set(checks)) == len(checks), "checks must not repeat")
    params = data.get("params", {})
    _require(isinstance(params, dict), "params must be an object")
    for key, val in params.items():
        _require(key in checks, f"params given for check {key!r} which is not listed")
        _require(isinstance(val, dict), f"params for {key!r} must be an object")
        bad = set(val) - set(registry[key].defaults)
        _require(not bad, f"unknown params {sorted(bad)} for {key!r}")
    null = FamilySpec.from_dict(data["null"])
    alt = FamilySpec.from_dict(data["alternative"])
    _require(null.alphabet.size == alt.alphabet.size, "null and alternative alphabets differ")
    return Scenario(name, null, alt, float(eps), n_max, tuple(checks), seed,
                    str(data.get("description", "")), None if base is None else str(base), params)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_scenario(data)


def bundled_names() -> list[str]:
    root = resources.files("steinlab") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_path(name: str):
    return resources.files("steinlab") / "scenarios" / f"{name}.json"


def resolve(arg: str) -> Scenario:
    """Load a config path, or a bundled scenario by name."""
    if not Path(arg).exists() and arg in bundled_names():
        return parse_scenario(json.loads(bundled_path(arg).read_text()))
    return load_scenario(arg)
