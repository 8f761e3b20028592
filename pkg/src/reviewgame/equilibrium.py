"""Pure-strategy Nash equilibria of bimatrix games."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import BimatrixGame, GameParams, build_game

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class NashResult:
    equilibria: tuple[tuple[int, int], ...]
    tolerance: float

    @property
    def count(self) -> int:
        return len(self.equilibria)


def enumerate_pure_nash(game: BimatrixGame, tolerance: float = DEFAULT_TOLERANCE) -> NashResult:
    """All cells where neither player gains more than ``tolerance`` by deviating.

    Weak best responses count, so a row player indifferent between several
    rows has an equilibrium candidate in each of them.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    a = game.author_payoffs
    r = game.reviewer_payoffs
    author_best = a >= a.max(axis=0, keepdims=True) - tolerance
    reviewer_best = r >= r.max(axis=1, keepdims=True) - tolerance
    cells = np.argwhere(author_best & reviewer_best)
    # argwhere walks in C order, so cells are already sorted by (row, col).
    return NashResult(tuple((int(i), int(j)) for i, j in cells), tolerance)


def nash_count_grid(epsilons, deltas, mus, *, ebar: float, tolerance: float = DEFAULT_TOLERANCE,
                    alpha: float = 0.1, beta: float = 0.1) -> dict[tuple[float, float, float], NashResult]:
    out = {}
    for eps in epsilons:
        for d in deltas:
            for mu in mus:
                p = GameParams(epsilon=eps, delta=d, mu=mu, alpha=alpha, beta=beta, ebar=ebar)
                out[(eps, d, mu)] = enumerate_pure_nash(build_game(p), tolerance)
    return out
