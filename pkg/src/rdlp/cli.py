"""Command-line interface.

    rdlp run   --config grid.toml [--out results]
    rdlp rank  --results results [--top-n 10] [--matrix matrix.toml]
    rdlp plot  --run RUN_ID --results results [--out results/plots]
    rdlp synth --spec synthetic.toml --out profiles.csv

Exits 0 on success; 2 with a diagnostic on configuration or data errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

try:
    import tomllib
except ImportError:
    import tomli as tomllib

from . import runner, scoring
from .config import load_config
from .errors import ConfigError, DataError, MetricError, ParameterError
from .profiles import write_csv
from .synthetic import generate_synthetic, load_synthetic_spec


def _cmd_run(args):
    cfg = load_config(args.config)
    records = runner.run_grid(cfg, out_dir=args.out)
    out = args.out if args.out is not None else cfg.output_dir
    ok = sum(1 for r in records if r.status == "ok")
    print(f"{len(records)} runs executed ({ok} ok, {len(records) - ok} failed) -> {out}")
    return 0


def _cmd_rank(args):
    matrix = None
    if args.matrix:
        with open(args.matrix, "rb") as fh:
            matrix = scoring.load_matrix(tomllib.load(fh))
    report = runner.rank_results_dir(args.results, top_n=args.top_n, matrix=matrix)
    print(f"stage 1: {len(report['stage1'])} runs ranked by combined index (lower first)")
    for row in report["stage1"][: report["top_n"]]:
        print(f"  ci #{row['rank']:<3} {row['run_id']:<48} ci={row['ci']:.4f}")
    print("stage 2: scoring-matrix ranking of the shortlist (lower total is better)")
    for row in report["stage2"]:
        total = "disqualified" if row["disqualified"] else f"total={row['total']:.1f}"
        print(f"  final #{row['final_rank']:<3} {row['run_id']:<48} {total} (ci rank {row['ci_rank']})")
    print(f"report written to {Path(args.results) / 'report.json'}")
    return 0


def _cmd_plot(args):
    records = {r.run_id: r for r in runner.load_records(args.results)}
    if args.run not in records:
        raise DataError(f"unknown run id {args.run!r}; see {Path(args.results) / 'index.csv'}")
    out = args.out if args.out is not None else str(Path(args.results) / "plots")
    paths = runner.emit_plots(records[args.run], out)
    for p in paths:
        print(p)
    return 0


def _cmd_synth(args):
    with open(args.spec, "rb") as fh:
        spec = load_synthetic_spec(tomllib.load(fh))
    pset = generate_synthetic(spec)
    write_csv(pset, args.out)
    print(f"{len(pset)} profiles written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rdlp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment grid")
    p_run.add_argument("--config", required=True, help="experiment config (TOML)")
    p_run.add_argument("--out", default=None, help="results directory (overrides config)")
    p_run.set_defaults(func=_cmd_run)

    p_rank = sub.add_parser("rank", help="two-stage ranking over a results directory")
    p_rank.add_argument("--results", required=True)
    p_rank.add_argument("--top-n", type=int, default=None)
    p_rank.add_argument("--matrix", default=None, help="scoring matrix (TOML)")
    p_rank.set_defaults(func=_cmd_rank)

    p_plot = sub.add_parser("plot", help="emit RDLP curves and size bars for one run")
    p_plot.add_argument("--run", required=True, help="run id")
    p_plot.add_argument("--results", required=True)
    p_plot.add_argument("--out", default=None)
    p_plot.set_defaults(func=_cmd_plot)

    p_synth = sub.add_parser("synth", help="generate a synthetic profile CSV")
    p_synth.add_argument("--spec", required=True, help="synthetic spec (TOML)")
    p_synth.add_argument("--out", required=True, help="output CSV path")
    p_synth.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataError, MetricError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: malformed results document: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
