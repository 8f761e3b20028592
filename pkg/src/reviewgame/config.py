"""Config files and dict round-tripping for run and sweep settings.

Config files are YAML with optional sections ``game``, ``revision``,
``run`` and ``sweep``::

    game:
      epsilon: 0.3
      delta: 0.3
      mu: 1.6
      ebar_mode: table      # or text, or give ebar: 0.5 directly
    revision:
      payoff_averaging: population_weighted
      eta: 0.044
      eta_scale: log10
    run:
      rounds: 13000
      seed: 1
    sweep:
      epsilons: [0.1, 0.2, 0.3, 0.4]
      seeds: [1, 2, 3, 4, 5]
      parallelism: 4
"""

from __future__ import annotations

from dataclasses import asdict, fields
from pathlib import Path

import yaml

from .dynamics import RevisionConfig, RunConfig
from .game import EBAR_MODES, GameParams, StrategySpace

SECTIONS = ("game", "revision", "run", "sweep")


class ConfigError(ValueError):
    pass


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping of sections")
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
    for name, section in data.items():
        if section is not None and not isinstance(section, dict):
            raise ConfigError(f"config section {name!r} must be a mapping")
    return {k: dict(v or {}) for k, v in data.items()}


def _check_keys(section: dict, allowed, where: str):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {', '.join(sorted(unknown))}")


def game_from_dict(d: dict) -> GameParams:
    d = dict(d)
    _check_keys(d, [f.name for f in fields(GameParams)] + ["ebar_mode"], "game")
    mode = d.pop("ebar_mode", None)
    if mode is not None:
        if "ebar" in d:
            raise ConfigError("give either ebar or ebar_mode, not both")
        if mode not in EBAR_MODES:
            raise ConfigError(f"ebar_mode must be one of {sorted(EBAR_MODES)}")
        d["ebar"] = EBAR_MODES[mode]
    if "epsilon" not in d:
        raise ConfigError("game.epsilon is required")
    return GameParams(**{k: float(v) for k, v in d.items()})


def revision_from_dict(d: dict) -> RevisionConfig:
    _check_keys(d, [f.name for f in fields(RevisionConfig)], "revision")
    return RevisionConfig(**d)


def space_from_dict(d: dict | None) -> StrategySpace:
    if not d:
        return StrategySpace()
    return StrategySpace(tuple(d["efforts"]), tuple(d["thresholds"]))


def run_to_dict(cfg: RunConfig) -> dict:
    return {
        "game": asdict(cfg.game),
        "revision": asdict(cfg.revision),
        "rounds": cfg.rounds,
        "seed": cfg.seed,
        "record_every": cfg.record_every,
        "population": cfg.population,
        "space": {"efforts": list(cfg.space.efforts), "thresholds": list(cfg.space.thresholds)},
    }


def run_from_dict(d: dict) -> RunConfig:
    return RunConfig(
        game=game_from_dict(d["game"]),
        revision=revision_from_dict(d.get("revision", {})),
        rounds=int(d.get("rounds", 13000)),
        seed=int(d.get("seed", 0)),
        record_every=int(d.get("record_every", 1)),
        population=int(d.get("population", 1800)),
        space=space_from_dict(d.get("space")),
    )
