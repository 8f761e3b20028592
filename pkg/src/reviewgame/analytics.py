"""Window statistics over recorded runs: strategy shares, E[level], S-bar."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .dynamics import TimeSeries
from .game import StrategySpace, relabel

NORMALIZATION_ATOL = 1e-9


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "entire_history"
    k: int = 3000

    def __post_init__(self):
        if self.kind not in ("entire_history", "last_k"):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if self.kind == "last_k" and self.k < 1:
            raise ValueError("last_k window needs k >= 1")

    @classmethod
    def parse(cls, text: str) -> "WindowSpec":
        """Accepts ``entire`` / ``entire_history`` or ``last:K``."""
        text = text.strip()
        if text in ("entire", "entire_history", "all"):
            return cls("entire_history")
        m = re.fullmatch(r"last[:_](\d+)", text)
        if m:
            return cls("last_k", int(m.group(1)))
        raise ValueError(f"cannot parse window {text!r}; use 'entire' or 'last:K'")

    @property
    def label(self) -> str:
        return "entire" if self.kind == "entire_history" else f"last:{self.k}"


ENTIRE = WindowSpec("entire_history")
LAST_3000 = WindowSpec("last_k", 3000)


@dataclass(frozen=True)
class RunSummary:
    """Window statistics for one role; vectors are in matrix order (S1 lowest)."""

    role: str
    window: WindowSpec
    mean_pct: np.ndarray
    std_pct: np.ndarray
    s_bar: float
    expected_level: float

    def mean_in(self, labeling: str) -> np.ndarray:
        return relabel(self.mean_pct, labeling)

    def std_in(self, labeling: str) -> np.ndarray:
        return relabel(self.std_pct, labeling)


def _window_rows(series: TimeSeries, window: WindowSpec) -> np.ndarray:
    rounds = series.rounds
    played = rounds >= 1
    last = int(rounds[-1])
    if window.kind == "entire_history":
        mask = played
    else:
        if window.k > last:
            raise ValueError(f"window last:{window.k} is longer than the {last} recorded rounds")
        mask = played & (rounds > last - window.k)
    if not mask.any():
        raise ValueError("window contains no recorded rounds")
    return mask


def window_distribution(series: TimeSeries, role: str, window: WindowSpec):
    """Mean and population std of per-round strategy fractions over the window.

    Round 0 (the initial state) is never part of a window.
    """
    counts = series.counts(role)[_window_rows(series, window)]
    totals = counts.sum(axis=1)
    if (totals == totals[0]).all():
        # scale once so a constant series gets an exact zero std
        return counts.mean(axis=0) / totals[0], counts.std(axis=0) / totals[0]
    frac = counts / totals[:, None]
    return frac.mean(axis=0), frac.std(axis=0)


def _check_normalized(p, atol):
    p = np.asarray(p, dtype=float)
    if abs(p.sum() - 1.0) > atol:
        raise ValueError(f"distribution sums to {p.sum()!r}, not 1 (atol={atol})")
    return p


def expected_level(p, levels, atol: float = NORMALIZATION_ATOL) -> float:
    """``sum(levels * p)``; ``p`` is used as given, never renormalized."""
    p = _check_normalized(p, atol)
    levels = np.asarray(levels, dtype=float)
    if p.shape != levels.shape:
        raise ValueError("distribution and levels differ in length")
    return float(p @ levels)


def weighted_strategy_index(p, atol: float = NORMALIZATION_ATOL) -> float:
    """``sum(i * p_i)`` with ``p`` in highest-first order, i = 1..n."""
    p = _check_normalized(p, atol)
    return float(p @ np.arange(1, p.size + 1))


def summarize(series: TimeSeries, role: str, window: WindowSpec, space: StrategySpace | None = None) -> RunSummary:
    space = space or (series.config.space if series.config else StrategySpace())
    mean, std = window_distribution(series, role, window)
    return RunSummary(
        role=role,
        window=window,
        mean_pct=100.0 * mean,
        std_pct=100.0 * std,
        s_bar=weighted_strategy_index(relabel(mean, "highest_first")),
        expected_level=expected_level(mean, space.levels(role)),
    )


def summarize_run(series: TimeSeries, windows=(ENTIRE, LAST_3000), space: StrategySpace | None = None) -> list[RunSummary]:
    """Summaries for both roles over each window that fits the series."""
    last = int(series.rounds[-1])
    out = []
    for role in ("author", "reviewer"):
        for w in windows:
            if w.kind == "last_k" and w.k > last:
                continue
            out.append(summarize(series, role, w, space))
    return out
