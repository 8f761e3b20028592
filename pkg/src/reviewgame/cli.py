"""Command-line entry point: ``reviewgame {matrix,nash,simulate,sweep,report}``."""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from dataclasses import fields
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analytics import ENTIRE, WindowSpec, summarize_run
from .config import ConfigError, game_from_dict, load_config_file, revision_from_dict, run_to_dict
from .dynamics import ETA_SCALES, PAYOFF_AVERAGING, RNG_ALGORITHM, UPDATE_TIMING, RevisionConfig, RunConfig, run_simulation
from .equilibrium import DEFAULT_TOLERANCE, enumerate_pure_nash
from .game import EBAR_MODES, LABELINGS, build_game
from .report import (
    MANIFEST_NAME, NASH_NAME, SUMMARY_NAME, atomic_write, manifest_text, matrix_csv, matrix_text,
    nash_csv, read_manifest, read_summary_csv, run_id, shares_svg, summary_csv, table_markdown,
    tables_csv, timeseries_csv,
)
from .sweep import SummaryRow, SweepGrid, run_sweep, tabulate

log = logging.getLogger("reviewgame")

GAME_FLAGS = ("epsilon", "delta", "mu", "alpha", "beta", "ebar")
REVISION_FLAGS = tuple(f.name for f in fields(RevisionConfig))


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _window(text: str) -> WindowSpec:
    try:
        return WindowSpec.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_game_flags(p, epsilon_required=False):
    g = p.add_argument_group("game")
    g.add_argument("--epsilon", type=float, required=epsilon_required, help="author reputation weight")
    g.add_argument("--delta", type=float, help="reviewer ease bonus weight (default 0)")
    g.add_argument("--mu", type=float, help="open-review reputation weight; 0 = double blind (default 0)")
    g.add_argument("--alpha", type=float, help="economy bonus weight (default 0.1)")
    g.add_argument("--beta", type=float, help="effort cost weight (default 0.1)")
    g.add_argument("--ebar-mode", choices=sorted(EBAR_MODES), help="reference effort: table=0.45 (default), text=0.55")
    g.add_argument("--ebar", type=float, help="explicit reference effort, overrides --ebar-mode")


def _add_revision_flags(p):
    g = p.add_argument_group("revision protocol")
    g.add_argument("--prob-revision", type=float)
    g.add_argument("--n-candidates", type=int)
    g.add_argument("--eta", type=float, help="logit noise, read on --eta-scale (default 0.044)")
    g.add_argument("--eta-scale", choices=ETA_SCALES, help="log10 (default): noise = 10**eta; linear: noise = eta")
    g.add_argument("--prob-mutation", type=float)
    g.add_argument("--payoff-averaging", choices=PAYOFF_AVERAGING)
    g.add_argument("--update-timing", choices=UPDATE_TIMING)


def _add_run_flags(p):
    g = p.add_argument_group("run")
    g.add_argument("--config", type=Path, help="YAML config file; flags override it")
    g.add_argument("--rounds", type=int)
    g.add_argument("--record-every", type=int)
    g.add_argument("--population", type=int)


def _game_section(args, file_cfg) -> dict:
    d = dict(file_cfg.get("game", {}))
    for name in GAME_FLAGS:
        v = getattr(args, name, None)
        if v is not None:
            d[name] = v
    mode = getattr(args, "ebar_mode", None)
    if args.ebar is not None:
        d.pop("ebar_mode", None)
    elif mode is not None:
        d.pop("ebar", None)
        d["ebar_mode"] = mode
    return d


def _revision(args, file_cfg) -> RevisionConfig:
    d = dict(file_cfg.get("revision", {}))
    for name in REVISION_FLAGS:
        v = getattr(args, name, None)
        if v is not None:
            d[name] = v
    return revision_from_dict(d)


def _run_section(args, file_cfg) -> dict:
    d = dict(file_cfg.get("run", {}))
    allowed = {"rounds", "seed", "record_every", "population"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in run: {', '.join(sorted(unknown))}")
    for name in allowed:
        v = getattr(args, name, None)
        if v is not None:
            d[name] = v
    return d


def _file_cfg(args) -> dict:
    return load_config_file(args.config) if getattr(args, "config", None) else {}


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(out, text)
        log.info("wrote %s", out)


# -- commands --------------------------------------------------------------

def cmd_matrix(args) -> int:
    game = build_game(game_from_dict(_game_section(args, {})))
    _emit(matrix_csv(game) if args.format == "csv" else matrix_text(game), args.out)
    return 0


def cmd_nash(args) -> int:
    if args.grid:
        grid = SweepGrid(base=RunConfig(game_from_dict(_game_section(args, {}) | {"epsilon": 0.1})))
        if args.epsilons:
            grid = SweepGrid(epsilons=tuple(args.epsilons), base=grid.base)
        nash = {c: enumerate_pure_nash(build_game(grid.game(*c)), args.tolerance) for c in grid.combinations()}
        _emit(nash_csv(nash), args.out)
        return 0
    if args.epsilon is None:
        raise ConfigError("--epsilon is required unless --grid is given")
    game = build_game(game_from_dict(_game_section(args, {})))
    res = enumerate_pure_nash(game, args.tolerance)
    lines = [f"pure Nash equilibria: {res.count} (tolerance {res.tolerance:g})"]
    for i, j in res.equilibria:
        lines.append(f"  author S{i + 1} (e={game.space.efforts[i]:g}) / reviewer S{j + 1} "
                     f"(t={game.space.thresholds[j]:g})  payoffs "
                     f"({game.author_payoffs[i, j]:.2f}, {game.reviewer_payoffs[i, j]:.2f})")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def cmd_simulate(args) -> int:
    file_cfg = _file_cfg(args)
    run = _run_section(args, file_cfg)
    cfg = RunConfig(
        game=game_from_dict(_game_section(args, file_cfg)),
        revision=_revision(args, file_cfg),
        rounds=int(run.get("rounds", 13000)),
        seed=int(run.get("seed", 0)),
        record_every=int(run.get("record_every", 1)),
        population=int(run.get("population", 1800)),
    )
    if cfg.rounds < 1:
        raise ConfigError("--rounds must be at least 1")
    out_dir = args.out_dir
    series = run_simulation(cfg)
    windows = [ENTIRE, WindowSpec("last_k", min(args.last_k, cfg.rounds))]
    rows = [SummaryRow(cfg.game.epsilon, cfg.game.delta, cfg.game.mu, cfg.seed, s)
            for s in summarize_run(series, windows, cfg.space)]
    rid = run_id(cfg)
    files = {
        "timeseries.csv": timeseries_csv(series, rid),
        SUMMARY_NAME: summary_csv(rows, args.labeling),
    }
    if args.svg:
        for role in ("author", "reviewer"):
            files[f"shares_{role}.svg"] = shares_svg(series, role, f"{role}s, {rid}")
    for name, text in files.items():
        atomic_write(out_dir / name, text)
    manifest = {
        "tool": "reviewgame",
        "version": __version__,
        "command": "simulate",
        "rng_algorithm": RNG_ALGORITHM,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "run_id": rid,
        "config": run_to_dict(cfg),
        "windows": [w.label for w in windows],
        "files": {name: _sha256(text) for name, text in sorted(files.items())},
    }
    atomic_write(out_dir / MANIFEST_NAME, manifest_text(manifest))
    for s in rows:
        log.info("%s %s E=%.3f S-bar=%.3f", s.summary.role, s.summary.window.label,
                 s.summary.expected_level, s.summary.s_bar)
    print(f"wrote {len(files) + 1} files to {out_dir}")
    return 0


def _sweep_grid(args) -> SweepGrid:
    if args.from_manifest:
        src = args.from_manifest
        manifest = read_manifest(src.parent if src.is_file() else src)
        return SweepGrid.from_dict(manifest["grid"])
    file_cfg = _file_cfg(args)
    game = _game_section(args, file_cfg)
    game.setdefault("epsilon", 0.1)
    run = _run_section(args, file_cfg)
    base = RunConfig(
        game=game_from_dict(game),
        revision=_revision(args, file_cfg),
        rounds=int(run.get("rounds", 13000)),
        record_every=int(run.get("record_every", 1)),
        population=int(run.get("population", 1800)),
    )
    sw = dict(file_cfg.get("sweep", {}))
    unknown = set(sw) - {"epsilons", "deltas", "mus", "seeds", "parallelism"}
    if unknown:
        raise ConfigError(f"unknown keys in sweep: {', '.join(sorted(unknown))}")
    kw = {}
    for name in ("epsilons", "deltas", "mus", "seeds"):
        v = getattr(args, name) if getattr(args, name) is not None else sw.get(name)
        if v is not None:
            kw[name] = tuple(v)
    if args.n_seeds is not None:
        if "seeds" in kw and getattr(args, "seeds") is not None:
            raise ConfigError("give --seeds or --n-seeds, not both")
        kw["seeds"] = tuple(range(1, args.n_seeds + 1))
    if args.parallelism is None:
        args.parallelism = int(sw.get("parallelism", 1))
    last_k = min(3000, base.rounds)
    return SweepGrid(base=base, windows=(ENTIRE, WindowSpec("last_k", last_k)), **kw)


def _report_tables(rows, grid_dict, roles, windows):
    tables = []
    for eps in grid_dict["epsilons"]:
        for role in roles:
            for w in windows:
                tables.append(tabulate(rows, float(eps), role, w,
                                       deltas=[float(d) for d in grid_dict["deltas"]],
                                       mus=[float(m) for m in grid_dict["mus"]]))
    return tables


def cmd_sweep(args) -> int:
    grid = _sweep_grid(args)
    parallelism = args.parallelism or 1
    n_runs = len(grid.combinations()) * len(grid.seeds)
    log.info("sweep: %d combinations x %d seeds = %d runs, parallelism %d",
             len(grid.combinations()), len(grid.seeds), n_runs, parallelism)

    def progress(done, total):
        if done % 10 == 0 or done == total:
            log.info("  %d/%d runs done", done, total)

    result = run_sweep(grid, parallelism, progress)
    out_dir = args.out_dir
    atomic_write(out_dir / SUMMARY_NAME, summary_csv(result.rows, args.labeling))
    atomic_write(out_dir / NASH_NAME, nash_csv(result.nash))
    result.manifest["files"] = {
        SUMMARY_NAME: _sha256((out_dir / SUMMARY_NAME).read_text()),
        NASH_NAME: _sha256((out_dir / NASH_NAME).read_text()),
    }
    atomic_write(out_dir / MANIFEST_NAME, manifest_text(result.manifest))
    if result.failures:
        log.error("%d runs failed; see manifest", len(result.failures))
        return 1
    tables = _report_tables(result.rows, result.manifest["grid"], ("author", "reviewer"), grid.windows)
    atomic_write(out_dir / "report.md", "\n".join(table_markdown(t) for t in tables))
    print(f"{n_runs} runs; wrote {SUMMARY_NAME}, {NASH_NAME}, {MANIFEST_NAME}, report.md "
          f"({len(tables)} tables) to {out_dir}")
    return 0


def cmd_report(args) -> int:
    manifest = read_manifest(args.in_dir)
    if not manifest.get("complete", False) or "grid" not in manifest:
        failed = [r for r in manifest.get("runs", []) if r.get("status") != "ok"]
        raise ConfigError(f"sweep in {args.in_dir} is incomplete ({len(failed)} failed runs of "
                          f"{manifest.get('expected_runs', '?')})")
    summary_path = Path(args.in_dir) / SUMMARY_NAME
    if not summary_path.is_file():
        raise ConfigError(f"no {SUMMARY_NAME} in {args.in_dir}")
    text = summary_path.read_text()
    expected = manifest.get("files", {}).get(SUMMARY_NAME)
    if expected and expected != _sha256(text):
        raise ConfigError(f"{summary_path} does not match the checksum in the manifest")
    rows = read_summary_csv(text)
    grid = manifest["grid"]
    roles = ("author", "reviewer") if args.role == "all" else (args.role,)
    windows = [WindowSpec.parse(w) for w in grid["windows"]] if args.window == "all" else [_window(args.window)]
    tables = _report_tables(rows, grid, roles, windows)
    if args.format == "csv":
        _emit(tables_csv(tables), args.out)
    else:
        _emit("\n".join(table_markdown(t) for t in tables), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reviewgame", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matrix", help="print the 6x6 payoff bimatrix")
    _add_game_flags(p, epsilon_required=True)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("nash", help="enumerate pure-strategy Nash equilibria")
    _add_game_flags(p)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--grid", action="store_true", help="count equilibria over the (epsilon, delta, mu) grid")
    p.add_argument("--epsilons", type=_float_list)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_nash)

    p = sub.add_parser("simulate", help="run one simulation and write CSVs and a manifest")
    _add_game_flags(p)
    _add_revision_flags(p)
    _add_run_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--last-k", type=int, default=3000)
    p.add_argument("--labeling", choices=LABELINGS, default="highest_first")
    p.add_argument("--svg", action="store_true", help="also write strategy-share charts (needs matplotlib)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the parameter grid over several seeds")
    _add_game_flags(p)
    _add_revision_flags(p)
    _add_run_flags(p)
    p.add_argument("--epsilons", type=_float_list)
    p.add_argument("--deltas", type=_float_list)
    p.add_argument("--mus", type=_float_list)
    p.add_argument("--seeds", type=_int_list)
    p.add_argument("--n-seeds", type=int)
    p.add_argument("--parallelism", type=int)
    p.add_argument("--from-manifest", type=Path, help="re-run exactly the grid recorded in a sweep manifest")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--labeling", choices=LABELINGS, default="highest_first")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="tables of median expected levels from a finished sweep")
    p.add_argument("--in-dir", type=Path, required=True)
    p.add_argument("--role", choices=("author", "reviewer", "all"), default="all")
    p.add_argument("--window", default="all", help="entire, last:K or all")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if getattr(args, "window", None) not in (None, "all"):
        try:
            WindowSpec.parse(args.window)
        except ValueError as e:
            parser.error(str(e))
    try:
        return args.func(args)
    except (ConfigError, ValueError, KeyError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        where = f" ({e.filename})" if getattr(e, "filename", None) else ""
        print(f"error: {e.strerror or e}{where}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
