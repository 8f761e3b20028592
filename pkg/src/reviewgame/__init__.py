"""Author-reviewer peer-review game: payoffs, pure Nash equilibria, and
imitative logit dynamics for double-blind and open-review regimes."""

__version__ = "0.1.0"

from .game import (  # noqa: E402
    BimatrixGame, GameParams, StrategySpace, accept, author_payoff, build_game, reviewer_payoff,
)
from .equilibrium import NashResult, enumerate_pure_nash  # noqa: E402
from .dynamics import (  # noqa: E402
    CandidateRecord, PopulationState, RevisionConfig, RunConfig, TimeSeries, initial_state,
    logit_probabilities, make_rngs, revise_agent, run_simulation, step_round, strategy_avg_payoffs,
)
from .analytics import (  # noqa: E402
    RunSummary, WindowSpec, expected_level, summarize, summarize_run, weighted_strategy_index,
    window_distribution,
)

__all__ = [
    "BimatrixGame", "GameParams", "StrategySpace", "accept", "author_payoff", "build_game",
    "reviewer_payoff", "NashResult", "enumerate_pure_nash", "CandidateRecord", "PopulationState",
    "RevisionConfig", "RunConfig", "TimeSeries", "initial_state", "logit_probabilities", "make_rngs",
    "revise_agent", "run_simulation", "step_round", "strategy_avg_payoffs", "RunSummary", "WindowSpec",
    "expected_level", "summarize", "summarize_run", "weighted_strategy_index", "window_distribution",
]
