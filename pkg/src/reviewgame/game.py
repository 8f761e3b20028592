"""Author-reviewer base game: strategy grid, parameters, payoffs, bimatrix.

Strategies are indexed 0..5 in ascending order of effort (authors) or
acceptance threshold (reviewers). Labels ``S1``..``S6`` follow the same
order (S1 = lowest level); the figure convention (1 = highest level) is
available through :func:`relabel`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

DEFAULT_EFFORTS = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
DEFAULT_THRESHOLDS = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7)

EBAR_TABLE = 0.45
EBAR_TEXT = 0.55
EBAR_MODES = {"table": EBAR_TABLE, "text": EBAR_TEXT}

# Grid values are short decimals; snapping keeps 0.5 >= 0.5 exact after
# arithmetic such as 0.1 * 5.
_SNAP_DIGITS = 9

LABELINGS = ("matrix", "highest_first")


def _snap(x: float) -> float:
    return round(float(x), _SNAP_DIGITS)


@dataclass(frozen=True)
class StrategySpace:
    efforts: tuple[float, ...] = DEFAULT_EFFORTS
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS

    def __post_init__(self):
        efforts = tuple(_snap(e) for e in self.efforts)
        thresholds = tuple(_snap(t) for t in self.thresholds)
        if len(efforts) != len(thresholds):
            raise ValueError("efforts and thresholds must have the same length")
        for name, levels in (("efforts", efforts), ("thresholds", thresholds)):
            if not levels:
                raise ValueError(f"{name} must be non-empty")
            if any(not 0.0 < v < 1.0 for v in levels):
                raise ValueError(f"{name} must lie in the open unit interval")
            if any(b <= a for a, b in zip(levels, levels[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        object.__setattr__(self, "efforts", efforts)
        object.__setattr__(self, "thresholds", thresholds)

    @property
    def size(self) -> int:
        return len(self.efforts)

    def levels(self, role: str) -> np.ndarray:
        if role == "author":
            return np.array(self.efforts)
        if role == "reviewer":
            return np.array(self.thresholds)
        raise ValueError(f"unknown role {role!r}")

    def min_acceptances(self) -> int:
        """Smallest number of thresholds any effort level clears."""
        return min(sum(accept(e, t) for t in self.thresholds) for e in self.efforts)


@dataclass(frozen=True)
class GameParams:
    """Parameters of one game instance.

    ``mu == 0`` is the double-blind regime; ``mu > 0`` is open review.
    ``ebar`` is the reference effort for the open-review reputation terms.
    The published matrices are reproduced by 0.45 (``"table"`` mode); the
    population mean effort, 0.55, is available as ``"text"`` mode.
    """

    epsilon: float
    delta: float = 0.0
    mu: float = 0.0
    alpha: float = 0.1
    beta: float = 0.1
    ebar: float = EBAR_TABLE

    def __post_init__(self):
        for name in ("alpha", "beta", "epsilon", "delta", "mu"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be a non-negative real, got {v!r}")
        if not 0.0 <= self.ebar <= 1.0:
            raise ValueError(f"ebar must lie in [0, 1], got {self.ebar!r}")

    @classmethod
    def with_ebar_mode(cls, mode: str, **kwargs) -> "GameParams":
        try:
            ebar = EBAR_MODES[mode]
        except KeyError:
            raise ValueError(f"ebar mode must be one of {sorted(EBAR_MODES)}, got {mode!r}") from None
        return cls(ebar=ebar, **kwargs)

    @property
    def regime(self) -> str:
        return "double_blind" if self.mu == 0 else "open_review"

    def replace(self, **changes) -> "GameParams":
        return replace(self, **changes)


def accept(effort: float, threshold: float) -> bool:
    """Reviewer accepts iff effort meets or exceeds the threshold."""
    return _snap(effort) >= _snap(threshold)


def author_payoff(effort: float, threshold: float, p: GameParams) -> float:
    if not accept(effort, threshold):
        return -p.beta * effort
    return (
        1.0
        + p.alpha * (1.0 - effort)
        + p.epsilon * effort
        - p.beta * effort
        + p.mu * max(threshold - p.ebar, 0.0)
    )


def reviewer_payoff(effort: float, threshold: float, p: GameParams) -> float:
    if not accept(effort, threshold):
        return 1.0
    return 1.0 + p.delta * (effort - threshold) + p.mu * max(effort - p.ebar, 0.0)


@dataclass(frozen=True)
class BimatrixGame:
    """Paired payoff tables indexed ``[effort row, threshold column]``."""

    author_payoffs: np.ndarray
    reviewer_payoffs: np.ndarray
    params: GameParams
    space: StrategySpace = field(default_factory=StrategySpace)

    def __post_init__(self):
        a = np.array(self.author_payoffs, dtype=float)
        r = np.array(self.reviewer_payoffs, dtype=float)
        if a.shape != r.shape or a.ndim != 2:
            raise ValueError("payoff tables must be 2-d and share a shape")
        a.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "author_payoffs", a)
        object.__setattr__(self, "reviewer_payoffs", r)

    @property
    def shape(self) -> tuple[int, int]:
        return self.author_payoffs.shape

    def rounded(self, digits: int = 2) -> tuple[list[list[Decimal]], list[list[Decimal]]]:
        """Both tables rounded half away from zero, as displayed in reports."""
        return (
            [[round_half_away(x, digits) for x in row] for row in self.author_payoffs],
            [[round_half_away(x, digits) for x in row] for row in self.reviewer_payoffs],
        )


def build_game(p: GameParams, space: StrategySpace | None = None) -> BimatrixGame:
    space = space or StrategySpace()
    n = space.size
    a = np.empty((n, n))
    r = np.empty((n, n))
    for i, e in enumerate(space.efforts):
        for j, t in enumerate(space.thresholds):
            a[i, j] = author_payoff(e, t, p)
            r[i, j] = reviewer_payoff(e, t, p)
    return BimatrixGame(a, r, p, space)


def round_half_away(x: float, digits: int = 2) -> Decimal:
    # Go through a short repr first so 1.125000000000001 style float noise
    # does not decide the rounding direction.
    d = Decimal(repr(round(float(x), 10)))
    q = Decimal(1).scaleb(-digits)
    return d.quantize(q, rounding=ROUND_HALF_UP)


def strategy_labels(n: int = 6, labeling: str = "matrix") -> list[str]:
    """Column labels for index order ``0..n-1`` under the given labeling."""
    if labeling == "matrix":
        return [f"S{i + 1}" for i in range(n)]
    if labeling == "highest_first":
        return [f"S{n - i}" for i in range(n)]
    raise ValueError(f"labeling must be one of {LABELINGS}, got {labeling!r}")


def relabel(values, labeling: str = "matrix") -> np.ndarray:
    """Reorder a per-strategy vector from matrix order into ``labeling`` order."""
    arr = np.asarray(values)
    if labeling == "matrix":
        return arr.copy()
    if labeling == "highest_first":
        return arr[::-1].copy()
    raise ValueError(f"labeling must be one of {LABELINGS}, got {labeling!r}")
