"""Reporting layer: result records, rank counts, exports and plot data."""

from __future__ import annotations

import csv
import io
import json
import math
import threading
from collections import defaultdict
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .characterization import CharacteristicProfile
from .errors import EmptyRecordsError, InsufficientDataForPlotError, ParseError, ValidationError
from .evaluation import MetricRow

RESULT_COLUMNS = (
    "dataset", "method", "horizon", "strategy", "metric", "value",
    "windows", "failures", "seconds", "fingerprint", "version", "reason",
)
EXPORT_FORMATS = ("csv", "structured-text")
PLOT_KINDS = ("characteristic-radar", "rank-bar", "metric-vs-horizon")
RADAR_AXES = ("trend", "seasonality", "stationarity", "shifting", "transition", "correlation")
TIE_RTOL = 1e-9
FAILED = "failed"


@dataclass(frozen=True)
class ResultRecord:
    dataset: str
    method: str
    horizon: int
    strategy: str
    metric: str
    value: float | None
    windows: int
    failures: int
    seconds: float
    fingerprint: str
    version: str
    reason: str = ""

    def __post_init__(self):
        if self.value is not None and not math.isfinite(self.value):
            raise ValidationError("record value must be finite or None (failed)")

    @property
    def failed(self) -> bool:
        return self.value is None

    @classmethod
    def from_row(cls, row: MetricRow, fingerprint: str, version: str, seconds: float | None = None):
        return cls(
            dataset=row.dataset,
            method=row.method,
            horizon=row.horizon,
            strategy=row.strategy,
            metric=row.metric,
            value=row.value,
            windows=row.windows,
            failures=row.failures,
            seconds=row.seconds if seconds is None else seconds,
            fingerprint=fingerprint,
            version=version,
            reason=row.reason,
        )

    def sort_key(self) -> tuple:
        return (self.dataset, self.method, self.horizon, self.metric, self.strategy)


def canonical_order(records: Iterable[ResultRecord]) -> list[ResultRecord]:
    return sorted(records, key=ResultRecord.sort_key)


# ---------------------------------------------------------------------------
# ranks


@dataclass(frozen=True)
class RankTable:
    """Per-method count of cells on which the method is best."""

    metric: str
    counts: Mapping[str, int]
    n_cells: int
    per: str = "cell"

    def rows(self) -> list[tuple[str, int]]:
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))


def _ties(values: Mapping[str, float], lower_is_better: bool) -> list[str]:
    best = min(values.values()) if lower_is_better else max(values.values())
    tol = TIE_RTOL * abs(best)
    return [m for m, v in values.items() if abs(v - best) <= tol]


def aggregate_ranks(
    records: Sequence[ResultRecord],
    metric: str,
    lower_is_better: bool = True,
    per: str = "cell",
) -> RankTable:
    """Count how often each method attains the best ``metric`` value.

    ``per="cell"`` compares methods within each (dataset, horizon, strategy)
    cell. ``per="dataset"`` first averages each method's values over the
    horizons it has on a dataset. Methods within a relative ``1e-9`` of the
    best are all credited. Failed values never win.
    """
    if per not in ("cell", "dataset"):
        raise ValidationError(f"per must be 'cell' or 'dataset', got {per!r}")
    chosen = [r for r in records if r.metric == metric]
    if not chosen:
        raise EmptyRecordsError(f"no records for metric {metric!r}")

    methods = sorted({r.method for r in chosen})
    groups: dict[tuple, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in chosen:
        if r.failed:
            continue
        key = (r.dataset,) if per == "dataset" else (r.dataset, r.horizon, r.strategy)
        groups[key][r.method].append(r.value)

    counts = {m: 0 for m in methods}
    for key in sorted(groups):
        cell = {m: math.fsum(v) / len(v) for m, v in groups[key].items()}
        for m in _ties(cell, lower_is_better):
            counts[m] += 1
    return RankTable(metric=metric, counts=counts, n_cells=len(groups), per=per)


# ---------------------------------------------------------------------------
# export


def _fmt(v) -> str:
    if v is None:
        return FAILED
    if isinstance(v, float):
        return repr(v)
    return str(v)


def results_to_csv(records: Iterable[ResultRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in canonical_order(records):
        w.writerow([_fmt(getattr(r, c)) for c in RESULT_COLUMNS])
    return buf.getvalue()


def results_to_text(records: Iterable[ResultRecord]) -> str:
    """One JSON object per line, keys in column order."""
    lines = []
    for r in canonical_order(records):
        d = asdict(r)
        lines.append(json.dumps({c: d[c] for c in RESULT_COLUMNS}))
    return "\n".join(lines) + "\n"


def export_results(records: Sequence[ResultRecord], path: str | Path, fmt: str = "csv") -> Path:
    if not records:
        raise EmptyRecordsError("nothing to export")
    if fmt not in EXPORT_FORMATS:
        raise ValidationError(f"format must be one of {EXPORT_FORMATS}, got {fmt!r}")
    text = results_to_csv(records) if fmt == "csv" else results_to_text(records)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))
    return path


def _parse_value(cell: str) -> float | None:
    return None if cell == FAILED else float(cell)


def read_results(path: str | Path) -> list[ResultRecord]:
    """Load records written by :func:`export_results` (either format)."""
    path = Path(path)
    text = path.read_text()
    if not text.strip():
        return []
    if text.lstrip().startswith("{"):
        return [ResultRecord(**json.loads(line)) for line in text.splitlines() if line.strip()]
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    missing = [c for c in RESULT_COLUMNS[:-1] if c not in header]
    if missing:
        raise ParseError(f"results file lacks columns {missing}", row=1)
    out = []
    for lineno, row in enumerate(reader, start=2):
        d = dict(zip(header, row))
        try:
            out.append(
                ResultRecord(
                    dataset=d["dataset"],
                    method=d["method"],
                    horizon=int(d["horizon"]),
                    strategy=d["strategy"],
                    metric=d["metric"],
                    value=_parse_value(d["value"]),
                    windows=int(d["windows"]),
                    failures=int(d["failures"]),
                    seconds=float(d["seconds"]),
                    fingerprint=d["fingerprint"],
                    version=d["version"],
                    reason=d.get("reason", ""),
                )
            )
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad results row: {exc}", row=lineno) from None
    return out


# ---------------------------------------------------------------------------
# plot data


def _write_table(header: Sequence[str], rows: Iterable[Sequence], path: str | Path | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def radar_rows(profiles: Mapping[str, CharacteristicProfile]) -> list[tuple]:
    rows = []
    for name in sorted(profiles):
        scores = profiles[name].scores()
        for axis in RADAR_AXES:
            rows.append((name, axis, scores.get(axis, "")))
    return rows


def metric_vs_horizon_rows(records: Sequence[ResultRecord], metric: str) -> list[tuple]:
    cells: dict[tuple, list[float]] = defaultdict(list)
    for r in records:
        if r.metric == metric and not r.failed:
            cells[(r.dataset, r.method, r.horizon)].append(r.value)
    return [(d, m, h, math.fsum(v) / len(v)) for (d, m, h), v in sorted(cells.items())]


def emit_plot_data(
    kind: str,
    path: str | Path | None = None,
    *,
    records: Sequence[ResultRecord] | None = None,
    profiles: Mapping[str, CharacteristicProfile] | None = None,
    metric: str = "mae",
    lower_is_better: bool = True,
    per: str = "cell",
) -> str:
    """Write a plain long-format table for ``kind`` and return its text.

    characteristic-radar: ``series,axis,value``, six axes per profile.
    rank-bar: ``method,wins`` from :func:`aggregate_ranks`.
    metric-vs-horizon: ``dataset,method,horizon,value``.
    """
    if kind not in PLOT_KINDS:
        raise ValidationError(f"kind must be one of {PLOT_KINDS}, got {kind!r}")
    if kind == "characteristic-radar":
        if not profiles:
            raise InsufficientDataForPlotError("radar data needs at least one profile")
        return _write_table(("series", "axis", "value"), radar_rows(profiles), path)
    if not records:
        raise InsufficientDataForPlotError(f"{kind} needs result records")
    if kind == "rank-bar":
        try:
            table = aggregate_ranks(records, metric, lower_is_better, per)
        except EmptyRecordsError as exc:
            raise InsufficientDataForPlotError(str(exc)) from None
        return _write_table(("method", "wins"), table.rows(), path)
    rows = metric_vs_horizon_rows(records, metric)
    if not rows:
        raise InsufficientDataForPlotError(f"no successful {metric!r} values")
    return _write_table(("dataset", "method", "horizon", "value"), rows, path)


# ---------------------------------------------------------------------------
# run log


class RunLog:
    """Append-only JSON-lines log; safe to share between worker threads."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def write(self, event: str, **fields) -> None:
        entry = {"ts": datetime.now(timezone.utc).isoformat(timespec="milliseconds"), "event": event}
        entry.update(fields)
        line = json.dumps(entry, default=str)
        with self._lock, open(self.path, "a") as fh:
            fh.write(line + "\n")
