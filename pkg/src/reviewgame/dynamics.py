"""Imitative logit-choice dynamics for the author and reviewer populations.

Each round every agent independently gets a revision opportunity with
probability ``prob_revision``. A reviser either mutates (uniform random
strategy, probability ``prob_mutation``) or compiles a candidate record of
itself plus ``n_candidates - 1`` distinct peers drawn without replacement,
pairs each candidate with the average payoff of its strategy, and picks a
strategy with logit probabilities over the record's rows.

The hot loop lives in :mod:`reviewgame._kernel`; :func:`revise_agent` is a
plain-numpy restatement of one revision, kept as a reference for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import _kernel
from .game import BimatrixGame, GameParams, StrategySpace, build_game

DEFAULT_POPULATION = 1800

PAYOFF_AVERAGING = ("population_weighted", "uniform_over_types")
UPDATE_TIMING = ("synchronous", "sequential")
ETA_SCALES = ("log10", "linear")

RNG_ALGORITHM = "numpy.random.PCG64; SeedSequence(seed).spawn(2) -> (author, reviewer)"

ROLES = ("author", "reviewer")


@dataclass(frozen=True)
class RevisionConfig:
    """Revision protocol settings, shared by both populations.

    ``eta`` is read on the scale named by ``eta_scale``. Under ``"log10"``
    (the default, matching the NetLogo ABED slider the published runs were
    configured with) the logit noise actually applied is ``10 ** eta``;
    under ``"linear"`` it is ``eta`` itself.
    """

    prob_revision: float = 0.122
    n_candidates: int = 31
    eta: float = 0.044
    eta_scale: str = "log10"
    prob_mutation: float = 0.008
    payoff_averaging: str = "population_weighted"
    update_timing: str = "synchronous"

    def __post_init__(self):
        for name in ("prob_revision", "prob_mutation"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if int(self.n_candidates) != self.n_candidates or self.n_candidates < 1:
            raise ValueError("n_candidates must be a positive integer")
        if self.eta_scale not in ETA_SCALES:
            raise ValueError(f"eta_scale must be one of {ETA_SCALES}, got {self.eta_scale!r}")
        if not math.isfinite(self.eta) or (self.eta_scale == "linear" and self.eta <= 0):
            raise ValueError(f"eta must be positive and finite, got {self.eta!r}")
        if self.payoff_averaging not in PAYOFF_AVERAGING:
            raise ValueError(f"payoff_averaging must be one of {PAYOFF_AVERAGING}")
        if self.update_timing not in UPDATE_TIMING:
            raise ValueError(f"update_timing must be one of {UPDATE_TIMING}")

    @property
    def effective_eta(self) -> float:
        return 10.0 ** self.eta if self.eta_scale == "log10" else float(self.eta)

    @property
    def mode_id(self) -> int:
        return PAYOFF_AVERAGING.index(self.payoff_averaging)


@dataclass(frozen=True)
class RunConfig:
    game: GameParams
    rounds: int = 13000
    seed: int = 0
    record_every: int = 1
    revision: RevisionConfig = field(default_factory=RevisionConfig)
    population: int = DEFAULT_POPULATION
    space: StrategySpace = field(default_factory=StrategySpace)

    def __post_init__(self):
        if self.rounds < 0:
            raise ValueError("rounds must be non-negative")
        if self.record_every < 1:
            raise ValueError("record_every must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.population < self.revision.n_candidates:
            raise ValueError("population is smaller than the candidate list")

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class CandidateRecord:
    strategies: np.ndarray
    payoffs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.strategies, dtype=np.int64)
        p = np.asarray(self.payoffs, dtype=float)
        if s.shape != p.shape or s.ndim != 1 or s.size == 0:
            raise ValueError("record needs matching, non-empty strategy and payoff columns")
        object.__setattr__(self, "strategies", s)
        object.__setattr__(self, "payoffs", p)


@dataclass
class PopulationState:
    """Per-agent strategy ids (0-based) for both roles."""

    author_strategies: np.ndarray
    reviewer_strategies: np.ndarray
    round: int = 0

    def counts(self, role: str, k: int = 6) -> np.ndarray:
        arr = self.author_strategies if role == "author" else self.reviewer_strategies
        return np.bincount(arr, minlength=k).astype(np.int64)

    def copy(self) -> "PopulationState":
        return PopulationState(self.author_strategies.copy(), self.reviewer_strategies.copy(), self.round)


class RngPair(NamedTuple):
    author: np.random.Generator
    reviewer: np.random.Generator


def make_rngs(seed: int) -> RngPair:
    a, r = np.random.SeedSequence(seed).spawn(2)
    return RngPair(np.random.Generator(np.random.PCG64(a)), np.random.Generator(np.random.PCG64(r)))


@dataclass(frozen=True)
class TimeSeries:
    """Recorded strategy counts; row 0 is the initial state (round 0).

    ``revisions[i]`` is the number of revision opportunities (authors,
    reviewers) in the round recorded at row ``i``.
    """

    rounds: np.ndarray
    author: np.ndarray
    reviewer: np.ndarray
    revisions: np.ndarray
    config: RunConfig | None = None

    def counts(self, role: str) -> np.ndarray:
        if role == "author":
            return self.author
        if role == "reviewer":
            return self.reviewer
        raise ValueError(f"unknown role {role!r}")

    @property
    def population(self) -> int:
        return int(self.author[0].sum())

    def __len__(self):
        return len(self.rounds)


def initial_state(space: StrategySpace | None = None, population: int = DEFAULT_POPULATION) -> PopulationState:
    k = (space or StrategySpace()).size
    if population <= 0 or population % k:
        raise ValueError(f"population {population} is not divisible by {k} strategies")
    strat = np.repeat(np.arange(k, dtype=np.int64), population // k)
    return PopulationState(strat, strat.copy(), 0)


def strategy_avg_payoffs(game: BimatrixGame, role: str, opponent_counts=None,
                         mode: str = "population_weighted") -> np.ndarray:
    k = game.shape[0]
    if mode not in PAYOFF_AVERAGING:
        raise ValueError(f"mode must be one of {PAYOFF_AVERAGING}")
    if mode == "population_weighted":
        if opponent_counts is None:
            raise ValueError("population_weighted mode needs opponent counts")
        counts = np.asarray(opponent_counts, dtype=np.int64)
        if counts.shape != (k,) or (counts < 0).any():
            raise ValueError("opponent counts must be a non-negative vector per strategy")
        if counts.sum() == 0:
            raise ValueError("opponent counts sum to zero")
    else:
        counts = np.ones(k, dtype=np.int64)
    if role not in ROLES:
        raise ValueError(f"unknown role {role!r}")
    table = game.author_payoffs if role == "author" else game.reviewer_payoffs
    out = np.empty(k)
    _kernel.avg_payoffs(np.ascontiguousarray(table), counts, PAYOFF_AVERAGING.index(mode),
                        role == "author", out)
    return out


def logit_probabilities(record: CandidateRecord, eta: float, k: int = 6) -> np.ndarray:
    """Switch probabilities over ``k`` strategies from a candidate record.

    Each row contributes ``exp(payoff / eta)`` to its strategy; the maximum
    payoff is subtracted first so large payoffs do not overflow.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    z = np.exp((record.payoffs - record.payoffs.max()) / eta)
    probs = np.bincount(record.strategies, weights=z, minlength=k)
    return probs / probs.sum()


def revise_agent(agent: int, population: np.ndarray, avg_payoffs, cfg: RevisionConfig,
                 rng: np.random.Generator) -> int:
    """One revision for ``population[agent]``, written out step by step."""
    population = np.asarray(population)
    n = cfg.n_candidates
    k = len(avg_payoffs)
    if population.size < n:
        raise ValueError(f"cannot draw {n - 1} distinct peers from {population.size - 1} agents")
    if rng.random() < cfg.prob_mutation:
        return int(rng.integers(k))
    others = rng.choice(population.size - 1, size=n - 1, replace=False)
    others[others >= agent] += 1
    strategies = np.append(population[others], population[agent])
    record = CandidateRecord(strategies, np.asarray(avg_payoffs, dtype=float)[strategies])
    probs = logit_probabilities(record, cfg.effective_eta, k)
    return int(rng.choice(k, p=probs))


def _tables(game: BimatrixGame):
    return (np.ascontiguousarray(game.author_payoffs), np.ascontiguousarray(game.reviewer_payoffs))


def step_round(state: PopulationState, game: BimatrixGame, cfg: RevisionConfig, rngs: RngPair) -> PopulationState:
    """Return the successor state; ``state`` itself is left untouched."""
    k = game.shape[0]
    n = state.author_strategies.size
    if min(n, state.reviewer_strategies.size) < cfg.n_candidates:
        raise ValueError("population is smaller than the candidate list")
    nxt = state.copy()
    ca = nxt.counts("author", k)
    cr = nxt.counts("reviewer", k)
    A, R = _tables(game)
    _kernel.step(rngs.author, rngs.reviewer, nxt.author_strategies, nxt.reviewer_strategies,
                 ca, cr, A, R, cfg.mode_id, cfg.effective_eta, cfg.prob_revision,
                 cfg.prob_mutation, cfg.n_candidates, cfg.update_timing == "sequential",
                 np.zeros(n, np.int64), np.zeros(nxt.reviewer_strategies.size, np.int64),
                 np.zeros(2, np.int64), np.zeros(2, np.int64))
    nxt.round += 1
    return nxt


def run_simulation(cfg: RunConfig, state: PopulationState | None = None) -> TimeSeries:
    game = build_game(cfg.game, cfg.space)
    state = (state or initial_state(cfg.space, cfg.population)).copy()
    rngs = make_rngs(cfg.seed)
    A, R = _tables(game)
    rev = cfg.revision
    rounds, a, r, revs = _kernel.run(
        rngs.author, rngs.reviewer, state.author_strategies, state.reviewer_strategies,
        A, R, cfg.rounds, cfg.record_every, rev.mode_id, rev.effective_eta,
        rev.prob_revision, rev.prob_mutation, rev.n_candidates,
        rev.update_timing == "sequential",
    )
    rounds = rounds + state.round
    return TimeSeries(rounds, a, r, revs, cfg)
