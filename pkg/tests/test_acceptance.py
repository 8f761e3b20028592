"""Acceptance criteria, each checked at its stated tolerance.

Every criterion records one or more parts through the ``acceptance``
fixture; the terminal summary prints one PASS/FAIL line per criterion.
Criterion 7 runs the full default sweep and takes about a quarter of an
hour on one core.
"""

import os
import time
from itertools import product

import numpy as np
import pytest

from reviewgame.analytics import ENTIRE, LAST_3000, expected_level, summarize, weighted_strategy_index
from reviewgame.cli import main
from reviewgame.dynamics import (
    CandidateRecord,
    PopulationState,
    RevisionConfig,
    RunConfig,
    logit_probabilities,
    run_simulation,
    strategy_avg_payoffs,
)
from reviewgame.equilibrium import enumerate_pure_nash, nash_count_grid
from reviewgame.game import GameParams, StrategySpace, build_game, round_half_away
from reviewgame.report import summary_csv, timeseries_csv
from reviewgame.sweep import SummaryRow, SweepGrid, run_sweep
from reference_data import FIG_DISTRIBUTIONS, REFERENCE_MATRICES, REFERENCE_NASH_COUNTS, parse_matrix
from test_equilibrium import double_loop_nash, random_game

EPSILONS = (0.1, 0.2, 0.3, 0.4)
DELTAS = (0.0, 0.1, 0.2, 0.3)
MUS = (0.0, 0.2, 0.4, 0.8, 1.6)
BAND_SEEDS = (1, 2, 3, 4, 5)


# -- 1 ----------------------------------------------------------------------------

def test_criterion_1_matrix_reproduction(acceptance):
    all_ok = True
    for key in sorted(REFERENCE_MATRICES):
        author, reviewer = build_game(GameParams(epsilon=key[0], delta=key[1], mu=key[2], ebar=0.45)).rounded(2)
        exp_a, exp_r = parse_matrix(REFERENCE_MATRICES[key])
        bad = [(i + 1, j + 1) for i, j in product(range(6), range(6))
               if str(author[i][j]) != exp_a[i][j] or str(reviewer[i][j]) != exp_r[i][j]]
        ok = not bad
        all_ok &= ok
        acceptance(1, "matrix reproduction", f"eps,delta,mu={key}", ok,
                   "36/36 cells" if ok else f"mismatched cells {bad}")
    assert all_ok


# -- 2 ----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def nash_grid():
    t0 = time.perf_counter()
    grid = nash_count_grid(EPSILONS, DELTAS, MUS, ebar=0.45)
    return grid, time.perf_counter() - t0


def test_criterion_2_reference_counts(acceptance):
    got = {k: enumerate_pure_nash(build_game(GameParams(epsilon=k[0], delta=k[1], mu=k[2]))).count
           for k in REFERENCE_NASH_COUNTS}
    ok = got == REFERENCE_NASH_COUNTS
    acceptance(2, "nash counts", "example matrices 26/6/6/1", ok, f"got {[got[k] for k in sorted(got)]}")
    assert ok


@pytest.mark.parametrize("eps", [0.1, 0.2])
def test_criterion_2_multiple_equilibria_low_epsilon(acceptance, nash_grid, eps):
    grid, _ = nash_grid
    counts = {(d, m): grid[(eps, d, m)].count for d in DELTAS for m in MUS}
    low = {k: v for k, v in counts.items() if v < 2}
    ok = not low
    acceptance(2, "nash counts", f"eps={eps} all 20 games count >= 2", ok,
               "ok" if ok else f"{len(low)} games below 2, e.g. (delta,mu)={min(low)} count={low[min(low)]}")
    assert ok


def test_criterion_2_high_epsilon_structure(acceptance, nash_grid):
    grid, seconds = nash_grid
    bad = {}
    for eps, d, m in product((0.3, 0.4), DELTAS, MUS):
        want = 6 if d == 0 else 1
        if grid[(eps, d, m)].count != want:
            bad[(eps, d, m)] = grid[(eps, d, m)].count
    ok = not bad and seconds < 1.0
    acceptance(2, "nash counts", "eps in {0.3,0.4}: 6 if delta=0 else 1", ok,
               f"grid time {seconds:.3f}s" + ("" if not bad else f"; mismatches {bad}"))
    assert ok


# -- 3 ----------------------------------------------------------------------------

def test_criterion_3_analytics_exactness(acceptance):
    levels = np.array(StrategySpace().efforts)
    all_ok = True
    for window, (pct, s_bar, e) in sorted(FIG_DISTRIBUTIONS.items()):
        p = np.array(pct) / 100
        # published percentages are rounded to 2 dp and sum to 100.01
        got_s = float(round_half_away(weighted_strategy_index(p, atol=5e-4), 3))
        got_e = float(round_half_away(expected_level(p[::-1], levels, atol=5e-4), 3))
        ok = got_s == s_bar and got_e == e
        all_ok &= ok
        acceptance(3, "analytics exactness", window, ok, f"E={got_e:.3f} (want {e}) S-bar={got_s:.3f} (want {s_bar})")
    assert all_ok


# -- 4 ----------------------------------------------------------------------------

BAND_CELLS = [(0.3, 0.3, 1.6), (0.4, 0.0, 0.0), (0.1, 0.0, 0.0), (0.1, 0.1, 0.0), (0.1, 0.2, 0.0), (0.1, 0.3, 0.0)]


def _band_runs(revision: RevisionConfig):
    out, times = {}, []
    for cell in BAND_CELLS:
        for seed in BAND_SEEDS:
            cfg = RunConfig(GameParams(epsilon=cell[0], delta=cell[1], mu=cell[2]), seed=seed, revision=revision)
            t0 = time.perf_counter()
            series = run_simulation(cfg)
            times.append(time.perf_counter() - t0)
            out[(cell, seed)] = {(role, w.label): summarize(series, role, w).expected_level
                                 for role in ("author", "reviewer") for w in (ENTIRE, LAST_3000)}
    return out, times


def _median(runs, cell, role, window):
    return float(np.median([runs[(cell, s)][(role, window)] for s in BAND_SEEDS]))


@pytest.fixture(scope="module")
def bands():
    t0 = time.perf_counter()
    runs, times = _band_runs(RevisionConfig())
    return runs, times, time.perf_counter() - t0


BAND_CHECKS = [
    ("a", (0.3, 0.3, 1.6), "author", "last:3000", 0.751, 0.03),
    ("b", (0.4, 0.0, 0.0), "author", "last:3000", 0.791, 0.03),
    ("c reviewer", (0.1, 0.3, 0.0), "reviewer", "entire", 0.232, 0.03),
    ("c author", (0.1, 0.3, 0.0), "author", "entire", 0.629, 0.05),
]


@pytest.mark.slow
@pytest.mark.parametrize("name,cell,role,window,target,tol", BAND_CHECKS, ids=[c[0] for c in BAND_CHECKS])
def test_criterion_4_bands(acceptance, bands, name, cell, role, window, target, tol):
    runs, _, _ = bands
    med = _median(runs, cell, role, window)
    ok = abs(med - target) <= tol
    acceptance(4, "simulation bands", f"({name}) {cell} {role} {window}", ok,
               f"median {med:.3f} vs {target} +/- {tol} (population_weighted)")
    assert ok


@pytest.mark.slow
def test_criterion_4_effort_non_increasing_in_delta(acceptance, bands):
    runs, _, _ = bands
    meds = [_median(runs, (0.1, d, 0.0), "author", "entire") for d in (0.0, 0.1, 0.2, 0.3)]
    ok = all(b <= a for a, b in zip(meds, meds[1:]))
    acceptance(4, "simulation bands", "(d) eps=0.1 mu=0 author effort vs delta", ok,
               "medians " + ", ".join(f"{m:.3f}" for m in meds))
    assert ok


@pytest.mark.slow
def test_criterion_4_runtime(acceptance, bands):
    _, times, total = bands
    ok = max(times) <= 10.0 and total <= 600.0
    acceptance(4, "simulation bands", "runtime", ok,
               f"slowest 13000-round run {max(times):.2f}s, band suite {total:.1f}s")
    assert ok


# -- 5 ----------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_5_single_run_determinism(acceptance):
    cfg = RunConfig(GameParams(epsilon=0.3, delta=0.3, mu=1.6), seed=11)
    texts = []
    for _ in range(2):
        series = run_simulation(cfg)
        rows = [SummaryRow(0.3, 0.3, 1.6, 11, summarize(series, r, w))
                for r in ("author", "reviewer") for w in (ENTIRE, LAST_3000)]
        texts.append((timeseries_csv(series, "run").encode(), summary_csv(rows).encode()))
    ok = texts[0] == texts[1]
    acceptance(5, "determinism", "repeat run, same (config, seed)", ok,
               "time series and summary CSVs byte-identical" if ok else "outputs differ")
    assert ok


@pytest.mark.slow
def test_criterion_5_parallelism_determinism(acceptance):
    grid = SweepGrid(epsilons=(0.1, 0.3), deltas=(0.3,), mus=(0.0, 1.6), seeds=(1, 2))
    one = run_sweep(grid, parallelism=1)
    eight = run_sweep(grid, parallelism=8)
    ok = (summary_csv(one.rows).encode() == summary_csv(eight.rows).encode()
          and [r.series_sha256 for r in one.runs] == [r.series_sha256 for r in eight.runs]
          and not one.failures)
    acceptance(5, "determinism", "parallelism 1 vs 8", ok,
               f"{len(one.runs)} full-length runs; summary CSV and series digests "
               + ("identical" if ok else "differ"))
    assert ok


# -- 6 ----------------------------------------------------------------------------

def test_criterion_6_logit_normalization(acceptance):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(5000):
        n = int(rng.integers(1, 40))
        payoffs = rng.uniform(-100, 100, size=n)
        eta = float(10 ** rng.uniform(-3, 3))
        p = logit_probabilities(CandidateRecord(rng.integers(0, 6, size=n), payoffs), eta)
        worst = max(worst, abs(p.sum() - 1.0)) if np.all(np.isfinite(p)) else np.inf
    ok = worst <= 1e-12
    acceptance(6, "property suite", "logit normalization |payoff|<=100", ok, f"max |sum-1| = {worst:.2e}")
    assert ok


@pytest.mark.slow
def test_criterion_6_conservation(acceptance):
    series = run_simulation(RunConfig(GameParams(epsilon=0.2, delta=0.1, mu=0.4), seed=3))
    ok = bool((series.author.sum(axis=1) == 1800).all() and (series.reviewer.sum(axis=1) == 1800).all())
    acceptance(6, "property suite", "count conservation", ok, f"{len(series)} recorded rounds, 1800 per role")
    assert ok


def test_criterion_6_absorption(acceptance):
    state = PopulationState(np.full(1800, 1, np.int64), np.full(1800, 3, np.int64))
    cfg = RunConfig(GameParams(epsilon=0.4, delta=0.3, mu=1.6), rounds=500, seed=8,
                    revision=RevisionConfig(prob_mutation=0.0))
    series = run_simulation(cfg, state)
    ok = bool((series.author[:, 1] == 1800).all() and (series.reviewer[:, 3] == 1800).all())
    acceptance(6, "property suite", "homogeneous absorption at zero mutation", ok, "500 rounds")
    assert ok


def test_criterion_6_revisers(acceptance):
    series = run_simulation(RunConfig(GameParams(epsilon=0.1), rounds=1000, seed=12))
    means = series.revisions[1:].mean(axis=0)
    ok = bool(np.all(np.abs(means - 219.6) <= 5))
    acceptance(6, "property suite", "revisers per round", ok,
               f"authors {means[0]:.1f}, reviewers {means[1]:.1f} (want 219.6 +/- 5)")
    assert ok


def test_criterion_6_average_payoff_oracle(acceptance):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        game = build_game(GameParams(epsilon=rng.uniform(0, 0.5), delta=rng.uniform(0, 0.5), mu=rng.uniform(0, 2)))
        opponents = rng.integers(0, 6, size=1800)
        counts = np.bincount(opponents, minlength=6)
        a = strategy_avg_payoffs(game, "author", counts)
        r = strategy_avg_payoffs(game, "reviewer", counts)
        for s in range(6):
            oa = sum(game.author_payoffs[s, o] for o in opponents) / 1800
            orr = sum(game.reviewer_payoffs[o, s] for o in opponents) / 1800
            worst = max(worst, abs(a[s] - oa), abs(r[s] - orr))
    ok = worst <= 1e-12
    acceptance(6, "property suite", "avg payoffs vs 1800-opponent oracle", ok, f"max error {worst:.2e}")
    assert ok


def test_criterion_6_nash_oracle(acceptance):
    rng = np.random.default_rng(99)
    mismatches = 0
    for _ in range(1000):
        g = random_game(rng)
        if list(enumerate_pure_nash(g).equilibria) != double_loop_nash(g.author_payoffs, g.reviewer_payoffs):
            mismatches += 1
    ok = mismatches == 0
    acceptance(6, "property suite", "nash enumerator vs double-loop oracle", ok, f"{mismatches}/1000 mismatches")
    assert ok


# -- 7 ----------------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.sweep
def test_criterion_7_full_sweep(acceptance, tmp_path, capsys):
    out = tmp_path / "sweep"
    parallelism = max(1, os.cpu_count() or 1)
    t0 = time.perf_counter()
    code = main(["sweep", "--out-dir", str(out), "--parallelism", str(parallelism)])
    seconds = time.perf_counter() - t0
    capsys.readouterr()
    report = (out / "report.md").read_text() if (out / "report.md").exists() else ""
    code_r = main(["report", "--in-dir", str(out), "--format", "csv"])
    csv_text = capsys.readouterr().out
    n_tables = report.count("### ")
    n_rows = len(csv_text.strip().splitlines()) - 1
    ok = code == 0 and code_r == 0 and n_tables == 16 and n_rows == 16 * 20 and seconds <= 1800
    acceptance(7, "full sweep", "80 combinations x 5 seeds", ok,
               f"{seconds / 60:.1f} min at parallelism {parallelism}, {n_tables} tables, {n_rows} table cells")
    # keep the tables visible in the test log
    print(report)
    assert ok
