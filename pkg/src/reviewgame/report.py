"""File formats: payoff matrices, time series, summaries, manifests, tables, SVG.

Every CSV written here has a matching reader, and all writes go through
:func:`atomic_write` (temp file in the target directory, then rename).
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
import tempfile
from decimal import Decimal
from pathlib import Path

import numpy as np

from .analytics import RunSummary, WindowSpec
from .dynamics import TimeSeries
from .game import BimatrixGame, relabel
from .sweep import SummaryRow, Table

MANIFEST_NAME = "manifest.json"
SUMMARY_NAME = "summary.csv"
NASH_NAME = "nash.csv"

SUMMARY_COLUMNS = (
    ["epsilon", "delta", "mu", "seed", "role", "window"]
    + [f"mean_s{i}" for i in range(1, 7)]
    + [f"std_s{i}" for i in range(1, 7)]
    + ["s_bar", "expected_level", "labeling"]
)
TIMESERIES_COLUMNS = ["run_id", "round", "role"] + [f"s{i}" for i in range(1, 7)]
TIMESERIES_HEADER = "# labeling: matrix (s1 = lowest effort/threshold)"


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def _num(x: float) -> str:
    return repr(float(x))


def _csv_text(rows, header=None, preamble=None) -> str:
    buf = io.StringIO()
    if preamble:
        buf.write(preamble + "\n")
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _data_lines(text: str):
    return [ln for ln in text.splitlines() if ln and not ln.startswith("#")]


# -- payoff matrices -------------------------------------------------------

def _dual_labels(n: int) -> list[str]:
    # matrix label / figure label, e.g. S1/F6 for the lowest level
    return [f"S{i + 1}/F{n - i}" for i in range(n)]


def _matrix_preamble(game: BimatrixGame) -> str:
    p = game.params
    return (
        f"# epsilon={p.epsilon:g} delta={p.delta:g} mu={p.mu:g} alpha={p.alpha:g} beta={p.beta:g} "
        f"ebar={p.ebar:g}; cells (author, reviewer); labels S<i> matrix order (S1 lowest), "
        f"F<i> figure order (F1 highest)"
    )


def matrix_csv(game: BimatrixGame) -> str:
    a, r = game.rounded(2)
    n = game.shape[0]
    labels = _dual_labels(n)
    space = game.space
    header = ["effort\\threshold"] + [f"{lab} t={t:g}" for lab, t in zip(labels, space.thresholds)]
    rows = []
    for i in range(n):
        rows.append([f"{labels[i]} e={space.efforts[i]:g}"] + [f"({a[i][j]},{r[i][j]})" for j in range(n)])
    return _csv_text(rows, header, _matrix_preamble(game))


def matrix_text(game: BimatrixGame) -> str:
    a, r = game.rounded(2)
    n = game.shape[0]
    labels = _dual_labels(n)
    space = game.space
    cells = [[f"({a[i][j]},{r[i][j]})" for j in range(n)] for i in range(n)]
    width = max(len(c) for row in cells for c in row)
    head = [f"{lab} t={t:g}" for lab, t in zip(labels, space.thresholds)]
    width = max(width, *(len(h) for h in head))
    row_heads = [f"{lab} e={e:g}" for lab, e in zip(labels, space.efforts)]
    rw = max(len(h) for h in row_heads)
    lines = [_matrix_preamble(game), " " * rw + " | " + " | ".join(h.rjust(width) for h in head)]
    lines.append("-" * len(lines[-1]))
    for rh, row in zip(row_heads, cells):
        lines.append(rh.ljust(rw) + " | " + " | ".join(c.rjust(width) for c in row))
    return "\n".join(lines) + "\n"


_CELL = re.compile(r"\(\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*\)+")


def parse_cell(text: str) -> tuple[Decimal, Decimal]:
    """Parse ``"(1.10,1.00)"``; a stray extra closing parenthesis is tolerated."""
    m = _CELL.fullmatch(text.strip())
    if not m:
        raise ValueError(f"not a payoff cell: {text!r}")
    return Decimal(m.group(1)), Decimal(m.group(2))


def read_matrix_csv(text: str):
    """Return (author, reviewer) as nested lists of ``Decimal``."""
    rows = list(csv.reader(_data_lines(text)))[1:]
    author, reviewer = [], []
    for row in rows:
        pairs = [parse_cell(c) for c in row[1:]]
        author.append([p[0] for p in pairs])
        reviewer.append([p[1] for p in pairs])
    return author, reviewer


# -- time series -----------------------------------------------------------

def run_id(cfg) -> str:
    g = cfg.game
    return f"eps{g.epsilon:g}_delta{g.delta:g}_mu{g.mu:g}_seed{cfg.seed}"


def timeseries_csv(series: TimeSeries, rid: str) -> str:
    rows = []
    for i, t in enumerate(series.rounds):
        rows.append([rid, int(t), "author", *map(int, series.author[i])])
        rows.append([rid, int(t), "reviewer", *map(int, series.reviewer[i])])
    return _csv_text(rows, TIMESERIES_COLUMNS, TIMESERIES_HEADER)


def read_timeseries_csv(text: str) -> dict[str, TimeSeries]:
    by_run: dict[str, dict] = {}
    reader = csv.DictReader(_data_lines(text))
    for row in reader:
        d = by_run.setdefault(row["run_id"], {"rounds": [], "author": [], "reviewer": []})
        counts = [int(row[f"s{i}"]) for i in range(1, 7)]
        if row["role"] == "author":
            d["rounds"].append(int(row["round"]))
        d[row["role"]].append(counts)
    out = {}
    for rid, d in by_run.items():
        n = len(d["rounds"])
        out[rid] = TimeSeries(np.array(d["rounds"], dtype=np.int64), np.array(d["author"], dtype=np.int64),
                              np.array(d["reviewer"], dtype=np.int64), np.zeros((n, 2), dtype=np.int64))
    return out


# -- summaries -------------------------------------------------------------

def summary_csv(rows: list[SummaryRow], labeling: str = "highest_first") -> str:
    out = []
    for r in rows:
        s = r.summary
        out.append(
            [_num(r.epsilon), _num(r.delta), _num(r.mu), r.seed, s.role, s.window.label]
            + [_num(x) for x in s.mean_in(labeling)]
            + [_num(x) for x in s.std_in(labeling)]
            + [_num(s.s_bar), _num(s.expected_level), labeling]
        )
    return _csv_text(out, SUMMARY_COLUMNS)


def read_summary_csv(text: str) -> list[SummaryRow]:
    rows = []
    for row in csv.DictReader(_data_lines(text)):
        labeling = row["labeling"]
        # relabel is its own inverse for both labelings
        mean = relabel([float(row[f"mean_s{i}"]) for i in range(1, 7)], labeling)
        std = relabel([float(row[f"std_s{i}"]) for i in range(1, 7)], labeling)
        summary = RunSummary(row["role"], WindowSpec.parse(row["window"]), mean, std,
                             float(row["s_bar"]), float(row["expected_level"]))
        rows.append(SummaryRow(float(row["epsilon"]), float(row["delta"]), float(row["mu"]),
                               int(row["seed"]), summary))
    return rows


def nash_csv(nash: dict) -> str:
    rows = []
    for (e, d, m), res in nash.items():
        cells = " ".join(f"S{i + 1}:S{j + 1}" for i, j in res.equilibria)
        rows.append([_num(e), _num(d), _num(m), res.count, cells])
    return _csv_text(rows, ["epsilon", "delta", "mu", "count", "cells"])


# -- manifests -------------------------------------------------------------

def manifest_text(manifest: dict) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"


def read_manifest(directory) -> dict:
    path = Path(directory) / MANIFEST_NAME
    if not path.is_file():
        raise FileNotFoundError(f"no manifest found in {directory}")
    return json.loads(path.read_text())


# -- report tables ---------------------------------------------------------

ROLE_TITLES = {"author": "Expected effort levels (authors)", "reviewer": "Expected threshold levels (reviewers)"}


def _window_title(w: WindowSpec) -> str:
    return "entire history" if w.kind == "entire_history" else f"last {w.k} rounds"


def table_markdown(t: Table) -> str:
    cols = [("Double Blind" if m == 0 else "Open Review") + f" mu={m:g}" for m in t.mus]
    lines = [
        f"### {ROLE_TITLES[t.role]}, epsilon = {t.epsilon:g}, {_window_title(t.window)}",
        "",
        "| delta \\ mu | " + " | ".join(cols) + " |",
        "|---" * (len(cols) + 1) + "|",
    ]
    for d, row in zip(t.deltas, t.formatted(3)):
        lines.append(f"| delta={d:g} | " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def tables_csv(tables: list[Table]) -> str:
    rows = []
    for t in tables:
        for d, frow in zip(t.deltas, t.formatted(3)):
            for m, v in zip(t.mus, frow):
                regime = "double_blind" if m == 0 else "open_review"
                rows.append([_num(t.epsilon), t.role, t.window.label, _num(d), _num(m), regime, v])
    return _csv_text(rows, ["epsilon", "role", "window", "delta", "mu", "regime", "median_expected_level"])


# -- charts ----------------------------------------------------------------

def shares_svg(series: TimeSeries, role: str, title: str = "") -> str:
    """Strategy share (%) against round, one line per strategy, figure labels.

    Needs matplotlib (the ``svg`` extra).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "reviewgame"
    counts = series.counts(role)
    pct = 100.0 * counts / counts.sum(axis=1, keepdims=True)
    n = pct.shape[1]
    colors = plt.get_cmap("RdYlGn")(np.linspace(0.0, 1.0, n))
    fig, ax = plt.subplots(figsize=(9, 4.5))
    # matrix index i is figure label n - i; green = highest level
    for i in range(n - 1, -1, -1):
        ax.plot(series.rounds, pct[:, i], color=colors[i], lw=0.8, label=str(n - i))
    ax.set_xlabel("round")
    ax.set_ylabel("strategy share (%)")
    ax.set_ylim(0, 100)
    if title:
        ax.set_title(title)
    ax.legend(title="strategy (1 = highest)", ncol=n, fontsize="small", loc="upper center")
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()
