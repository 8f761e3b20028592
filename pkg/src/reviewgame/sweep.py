"""Parameter grid runs over (epsilon, delta, mu) x seeds, and table layout."""

from __future__ import annotations

import hashlib
import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from itertools import product

import numpy as np

from . import __version__
from .analytics import ENTIRE, LAST_3000, RunSummary, WindowSpec, summarize_run
from .config import run_from_dict, run_to_dict
from .dynamics import RNG_ALGORITHM, RunConfig, run_simulation
from .equilibrium import NashResult, enumerate_pure_nash
from .game import GameParams, build_game, round_half_away

log = logging.getLogger(__name__)

DEFAULT_EPSILONS = (0.1, 0.2, 0.3, 0.4)
DEFAULT_DELTAS = (0.0, 0.1, 0.2, 0.3)
DEFAULT_MUS = (0.0, 0.2, 0.4, 0.8, 1.6)
DEFAULT_SEEDS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class SweepGrid:
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    deltas: tuple[float, ...] = DEFAULT_DELTAS
    mus: tuple[float, ...] = DEFAULT_MUS
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    base: RunConfig = field(default_factory=lambda: RunConfig(GameParams(epsilon=0.1)))
    windows: tuple[WindowSpec, ...] = (ENTIRE, LAST_3000)

    def __post_init__(self):
        for name in ("epsilons", "deltas", "mus", "seeds"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"{name} must be non-empty")
            if len(set(values)) != len(values):
                raise ValueError(f"{name} contains duplicates")
            object.__setattr__(self, name, values)

    def combinations(self) -> list[tuple[float, float, float]]:
        return list(product(self.epsilons, self.deltas, self.mus))

    def game(self, eps: float, delta: float, mu: float) -> GameParams:
        return self.base.game.replace(epsilon=eps, delta=delta, mu=mu)

    def run_config(self, eps, delta, mu, seed) -> RunConfig:
        return self.base.replace(game=self.game(eps, delta, mu), seed=seed)

    def to_dict(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "deltas": list(self.deltas),
            "mus": list(self.mus),
            "seeds": list(self.seeds),
            "windows": [w.label for w in self.windows],
            "base": run_to_dict(self.base),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepGrid":
        return cls(
            epsilons=tuple(float(x) for x in d["epsilons"]),
            deltas=tuple(float(x) for x in d["deltas"]),
            mus=tuple(float(x) for x in d["mus"]),
            seeds=tuple(int(x) for x in d["seeds"]),
            base=run_from_dict(d["base"]),
            windows=tuple(WindowSpec.parse(w) for w in d["windows"]),
        )


@dataclass(frozen=True)
class SummaryRow:
    epsilon: float
    delta: float
    mu: float
    seed: int
    summary: RunSummary


@dataclass(frozen=True)
class RunRecord:
    epsilon: float
    delta: float
    mu: float
    seed: int
    status: str
    series_sha256: str | None = None
    seconds: float | None = None
    error: str | None = None


@dataclass
class SweepResult:
    grid: SweepGrid
    rows: list[SummaryRow]
    nash: dict[tuple[float, float, float], NashResult]
    runs: list[RunRecord]
    manifest: dict

    @property
    def failures(self) -> list[RunRecord]:
        return [r for r in self.runs if r.status != "ok"]


def series_digest(series) -> str:
    h = hashlib.sha256()
    for arr in (series.rounds, series.author, series.reviewer):
        h.update(np.ascontiguousarray(arr, dtype="<i8").tobytes())
    return h.hexdigest()


def _run_one(key, cfg: RunConfig, windows):
    t0 = time.perf_counter()
    try:
        series = run_simulation(cfg)
        summaries = summarize_run(series, windows, cfg.space)
        return key, summaries, series_digest(series), time.perf_counter() - t0, None
    except Exception:  # noqa: BLE001 - quarantined per run, reported in the manifest
        return key, None, None, time.perf_counter() - t0, traceback.format_exc(limit=3)


def run_sweep(grid: SweepGrid, parallelism: int = 1, progress=None) -> SweepResult:
    """Simulate every (combination, seed); output order follows the grid, not completion."""
    if parallelism < 1:
        raise ValueError("parallelism must be positive")
    jobs = [((e, d, m, s), grid.run_config(e, d, m, s))
            for (e, d, m) in grid.combinations() for s in grid.seeds]
    done = {}
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if parallelism == 1:
        for key, cfg in jobs:
            done[key] = _run_one(key, cfg, grid.windows)
            if progress:
                progress(len(done), len(jobs))
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(_run_one, key, cfg, grid.windows) for key, cfg in jobs]
            for fut in futures:
                out = fut.result()
                done[out[0]] = out
                if progress:
                    progress(len(done), len(jobs))

    rows, runs = [], []
    for key, _ in jobs:
        _, summaries, digest, secs, err = done[key]
        e, d, m, s = key
        if err is not None:
            log.error("run eps=%s delta=%s mu=%s seed=%s failed:\n%s", e, d, m, s, err)
            runs.append(RunRecord(e, d, m, s, "failed", None, secs, err))
            continue
        runs.append(RunRecord(e, d, m, s, "ok", digest, secs))
        rows.extend(SummaryRow(e, d, m, s, x) for x in summaries)

    nash = {c: enumerate_pure_nash(build_game(grid.game(*c), grid.base.space)) for c in grid.combinations()}
    manifest = build_manifest(grid, runs, nash, started)
    return SweepResult(grid, rows, nash, runs, manifest)


def build_manifest(grid: SweepGrid, runs, nash, started: str | None = None) -> dict:
    return {
        "tool": "reviewgame",
        "version": __version__,
        "rng_algorithm": RNG_ALGORITHM,
        "started": started,
        "grid": grid.to_dict(),
        "nash_counts": [
            {"epsilon": e, "delta": d, "mu": m, "count": r.count, "cells": [list(c) for c in r.equilibria]}
            for (e, d, m), r in nash.items()
        ],
        "runs": [
            {"epsilon": r.epsilon, "delta": r.delta, "mu": r.mu, "seed": r.seed, "status": r.status,
             "series_sha256": r.series_sha256, "seconds": r.seconds, "error": r.error}
            for r in runs
        ],
        "expected_runs": len(grid.combinations()) * len(grid.seeds),
        "complete": all(r.status == "ok" for r in runs)
        and len(runs) == len(grid.combinations()) * len(grid.seeds),
    }


@dataclass(frozen=True)
class Table:
    """Median expected level per (delta row, mu column) for one epsilon."""

    epsilon: float
    role: str
    window: WindowSpec
    deltas: tuple[float, ...]
    mus: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]

    def cell(self, delta: float, mu: float) -> float:
        return self.values[self.deltas.index(delta)][self.mus.index(mu)]

    def formatted(self, digits: int = 3) -> list[list[str]]:
        return [[str(round_half_away(v, digits)) for v in row] for row in self.values]


def tabulate(rows, epsilon: float, role: str, window: WindowSpec,
             deltas=None, mus=None) -> Table:
    """Median over seeds of the expected level; raises on missing cells."""
    picked = [r for r in rows if r.epsilon == epsilon and r.summary.role == role and r.summary.window == window]
    if not picked:
        raise KeyError(f"no results for epsilon={epsilon} role={role} window={window.label}")
    deltas = tuple(deltas) if deltas is not None else tuple(sorted({r.delta for r in picked}))
    mus = tuple(mus) if mus is not None else tuple(sorted({r.mu for r in picked}))
    values = []
    for d in deltas:
        row = []
        for m in mus:
            vals = [r.summary.expected_level for r in picked if r.delta == d and r.mu == m]
            if not vals:
                raise KeyError(f"missing combination epsilon={epsilon} delta={d} mu={m}")
            row.append(float(np.median(vals)))
        values.append(tuple(row))
    return Table(epsilon, role, window, deltas, mus, tuple(values))
