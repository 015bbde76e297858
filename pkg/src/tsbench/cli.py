"""Command-line entry points.

Exit codes: 0 success, 1 validation error, 2 some cells failed, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import __version__
from .characterization import characterize_dataset, profile_records
from .errors import BenchmarkError
from .evaluation import EvaluationPlan, MetricRow, run_plan
from .ingestion import DatasetManifest, RunConfig, load_dataset, parse_config
from .reporting import (
    EXPORT_FORMATS,
    PLOT_KINDS,
    ResultRecord,
    RunLog,
    aggregate_ranks,
    emit_plot_data,
    export_results,
    read_results,
)

log = logging.getLogger("tsbench")

EXIT_OK, EXIT_VALIDATION, EXIT_PARTIAL, EXIT_IO = 0, 1, 2, 3
RESULTS_FILE = "results.csv"
LOG_FILE = "run.log"


def demo_config_path() -> Path:
    return Path(str(resources.files("tsbench") / "data" / "demo.yaml"))


def _cell_id(plan: EvaluationPlan) -> str:
    return f"{plan.dataset.name}/{plan.method.label()}/F={plan.horizon}"


def _failed_rows(plan: EvaluationPlan, exc: Exception) -> list[MetricRow]:
    reason = f"{type(exc).__name__}: {exc}"
    return [
        MetricRow(plan.dataset.name, plan.method.label(), plan.horizon, plan.strategy,
                  m, None, 0, 1, 0.0, reason)
        for m in plan.metrics
    ]


def execute(cfg: RunConfig, parallel: int = 1, run_log: RunLog | None = None,
            timing: bool = False) -> list[ResultRecord]:
    """Run every cell of ``cfg`` and return records in canonical order.

    Cells run on a thread pool; ``map`` hands results back in plan order,
    so the single collecting loop below is the only place records are
    gathered and the output does not depend on ``parallel``.
    """
    plans = cfg.plans()
    fingerprint = cfg.fingerprint()

    def work(plan: EvaluationPlan) -> list[MetricRow]:
        cell = _cell_id(plan)
        if run_log:
            run_log.write("cell_start", cell=cell, fingerprint=fingerprint)
        started = time.perf_counter()
        try:
            rows = run_plan(plan)
        except BenchmarkError as exc:
            rows = _failed_rows(plan, exc)
        if run_log:
            run_log.write(
                "cell_end", cell=cell, seconds=round(time.perf_counter() - started, 6),
                failures=sum(r.failures for r in rows),
            )
        return rows

    records = []
    with ThreadPoolExecutor(max_workers=max(1, parallel)) as pool:
        for rows in pool.map(work, plans):
            for row in rows:
                records.append(
                    ResultRecord.from_row(row, fingerprint, __version__,
                                          seconds=None if timing else 0.0)
                )
    return sorted(records, key=ResultRecord.sort_key)


# ---------------------------------------------------------------------------
# subcommands


def cmd_characterize(args) -> int:
    manifest = DatasetManifest(
        path=Path(args.dataset),
        frequency_label=args.frequency,
        seasonal_period=args.period,
    )
    dataset = load_dataset(manifest)
    if args.per_channel:
        rows = [r.as_row() for r in profile_records(dataset, shift_thresholds=args.thresholds)]
    else:
        summary, _ = characterize_dataset(dataset, shift_thresholds=args.thresholds)
        rows = [{"series": dataset.name, **summary.scores(), "adf_pvalue": summary.adf_pvalue}]
        if summary.correlation is None:
            rows[0]["correlation"] = ""
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.output:
            out.close()
    return EXIT_OK


def cmd_run(args) -> int:
    is_demo = args.config == "demo"
    cfg = parse_config(demo_config_path() if is_demo else args.config, seed=args.seed)
    if args.output:
        cfg.output_dir = Path(args.output)
    elif is_demo:
        cfg.output_dir = Path.cwd() / "demo-results"
    parallel = args.parallel or cfg.parallelism
    run_log = RunLog(cfg.output_dir / LOG_FILE)
    run_log.write("run_start", fingerprint=cfg.fingerprint(), version=__version__,
                  cells=len(cfg.plans()), parallel=parallel, seed=cfg.seed)
    records = execute(cfg, parallel, run_log, timing=args.timing)
    path = export_results(records, cfg.output_dir / RESULTS_FILE)
    failed = sum(1 for r in records if r.failed or r.failures)
    run_log.write("run_end", results=str(path), records=len(records), failed_records=failed)
    log.info("wrote %d records to %s", len(records), path)
    return EXIT_PARTIAL if failed else EXIT_OK


def _results_path(arg: str) -> Path:
    p = Path(arg)
    return p / RESULTS_FILE if p.is_dir() else p


def cmd_rank(args) -> int:
    records = read_results(_results_path(args.results))
    table = aggregate_ranks(records, args.metric, not args.higher_is_better, args.per)
    print(f"# metric={table.metric} per={table.per} cells={table.n_cells}")
    print("method,wins")
    for method, wins in table.rows():
        print(f"{method},{wins}")
    return EXIT_OK


def cmd_export(args) -> int:
    records = read_results(_results_path(args.results))
    export_results(records, args.output, args.format)
    return EXIT_OK


def cmd_plot_data(args) -> int:
    if args.kind == "characteristic-radar":
        if not args.dataset:
            raise BenchmarkError("characteristic-radar needs --dataset")
        dataset = load_dataset(DatasetManifest(path=Path(args.dataset), seasonal_period=args.period))
        summary, per_channel = characterize_dataset(dataset)
        profiles = {dataset.name: summary}
        if args.per_channel:
            profiles = dict(zip(dataset.channel_names, per_channel))
        text = emit_plot_data(args.kind, args.output, profiles=profiles)
    else:
        if not args.results:
            raise BenchmarkError(f"{args.kind} needs --results")
        records = read_results(_results_path(args.results))
        text = emit_plot_data(args.kind, args.output, records=records, metric=args.metric,
                              lower_is_better=not args.higher_is_better, per=args.per)
    if not args.output:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("characterize", help="profile a CSV dataset")
    p.add_argument("dataset")
    p.add_argument("--per-channel", action="store_true")
    p.add_argument("--frequency", default=None)
    p.add_argument("--period", type=int, default=None)
    p.add_argument("--thresholds", type=int, default=100, help="shifting threshold count")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("run", help="execute a benchmark config ('demo' for the bundled one)")
    p.add_argument("--config", required=True)
    p.add_argument("--parallel", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", "-o", help="output directory (overrides the config)")
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock seconds in results (breaks byte-identity)")
    p.set_defaults(func=cmd_run)

    def add_rank_opts(p):
        p.add_argument("--metric", default="mae")
        p.add_argument("--per", choices=("cell", "dataset"), default="cell")
        p.add_argument("--higher-is-better", action="store_true")

    p = sub.add_parser("rank", help="count best results per method")
    p.add_argument("--results", required=True, help="results directory or file")
    add_rank_opts(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("export", help="re-export results")
    p.add_argument("--results", required=True)
    p.add_argument("--format", choices=EXPORT_FORMATS, default="csv")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("plot-data", help="emit a plotting table")
    p.add_argument("--kind", choices=PLOT_KINDS, required=True)
    p.add_argument("--results")
    p.add_argument("--dataset")
    p.add_argument("--period", type=int, default=None)
    p.add_argument("--per-channel", action="store_true")
    p.add_argument("--output", "-o")
    add_rank_opts(p)
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (BenchmarkError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
