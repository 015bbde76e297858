"""Data layer: CSV datasets, sidecar metadata and run configuration.

Dataset files are wide CSV. The first column must be named ``date`` and
hold integer indices or ISO-8601 timestamps, strictly increasing; every
other column is one channel. An optional sidecar with the same basename
and a ``.meta`` suffix carries ``key: value`` lines (``#`` starts a
comment)::

    frequency: hourly
    seasonal_period: 24
    domain: energy
    split: 7:1:2

Run configuration is a YAML document::

    seed: 7                      # default seed for every method
    strategy: rolling            # fixed | rolling
    metrics: [mae, mse]
    normalization: zscore        # zscore | none
    metric_scale: normalized     # normalized | raw (MASE always raw)
    stride: 1
    batch_size: 32
    retrain_each_window: null    # omit for the per-method default
    output_dir: results
    parallelism: 1
    datasets:
      - path: data/etth.csv      # relative to the config file
        name: etth               # default: file stem
        domain: energy
        frequency: hourly
        seasonal_period: 24
        split: "6:2:2"
        channels: [HUFL, OT]     # default: all columns
        fill: reject             # reject | ffill | interpolate
        horizons: [24, 48]
        lookback: 96
    methods:
      - name: var
        hyperparameters: {order: 2}
        mode: DMS                # DMS | IMS
        seed: 3

Unknown keys are rejected with their key path.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from . import forecasters
from .core import DEFAULT_HORIZONS, DEFAULT_SPLIT, FREQUENCIES, Dataset, SplitSpec, validate_series
from .errors import (
    BenchmarkError,
    InvalidSplitError,
    MissingValuesError,
    ParseError,
    RaggedRowsError,
    SchemaError,
    UnknownMethodError,
    ValidationError,
)
from .evaluation import NORMALIZATIONS, STRATEGIES, EvaluationPlan
from .forecasters import MethodSpec
from .metrics import METRIC_NAMES

FILL_POLICIES = ("reject", "ffill", "interpolate")
MISSING_TOKENS = {"", "nan", "NaN", "NAN", "na", "NA", "null", "None"}
META_KEYS = {"frequency", "seasonal_period", "domain", "split", "name"}


@dataclass(frozen=True)
class DatasetManifest:
    path: Path
    name: str = ""
    domain_tag: str = ""
    frequency_label: str | None = None
    seasonal_period: int | None = None
    split: SplitSpec | None = None
    channels: tuple[str, ...] | None = None
    fill_policy: str = "reject"
    horizons: tuple[int, ...] = ()
    lookback: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "path", Path(self.path))
        if not self.name:
            object.__setattr__(self, "name", self.path.stem)
        if self.fill_policy not in FILL_POLICIES:
            raise ValidationError(f"fill policy must be one of {FILL_POLICIES}")


def read_sidecar(csv_path: Path) -> dict[str, str]:
    meta_path = Path(csv_path).with_suffix(".meta")
    if not meta_path.exists():
        return {}
    out = {}
    for lineno, line in enumerate(meta_path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key = key.strip()
        if not sep or key not in META_KEYS:
            raise ParseError(f"bad sidecar entry {line!r} in {meta_path.name}", row=lineno)
        out[key] = value.strip()
    return out


def _parse_dates(raw: list[str]) -> np.ndarray:
    try:
        return np.array([int(v) for v in raw], dtype=np.int64)
    except ValueError:
        pass
    stamps = []
    for i, v in enumerate(raw, start=2):
        try:
            stamps.append(np.datetime64(datetime.fromisoformat(v.strip())))
        except ValueError:
            raise ParseError(f"unparseable date {v!r}", row=i, column="date") from None
    return np.array(stamps)


def _fill(col: np.ndarray, policy: str, name: str) -> np.ndarray:
    missing = np.isnan(col)
    if not missing.any():
        return col
    first = int(np.flatnonzero(missing)[0])
    if policy == "reject":
        raise MissingValuesError("missing value", row=first + 2, column=name)
    valid = np.flatnonzero(~missing)
    if valid.size == 0:
        raise MissingValuesError("column has no values", column=name)
    if policy == "ffill":
        if missing[0]:
            raise MissingValuesError("cannot forward-fill a leading gap", row=2, column=name)
        idx = np.where(missing, 0, np.arange(len(col)))
        np.maximum.accumulate(idx, out=idx)
        return col[idx]
    pos = np.arange(len(col))
    return np.interp(pos, valid, col[valid])


def read_csv_table(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    return header, body


def load_dataset(manifest: DatasetManifest | str | Path) -> Dataset:
    """Parse a wide CSV (plus optional sidecar) into a :class:`Dataset`.

    Raises
    ------
    ParseError
        Bad header, unparseable cell or date, or non-increasing dates.
    RaggedRowsError
        A row with the wrong number of cells.
    MissingValuesError
        A missing cell under the ``reject`` policy.
    """
    if not isinstance(manifest, DatasetManifest):
        manifest = DatasetManifest(path=Path(manifest))
    path = manifest.path
    header, body = read_csv_table(path)
    if not header or header[0].lower() != "date":
        raise ParseError("first column must be 'date'", row=1)
    if len(header) < 2:
        raise ParseError("no value columns", row=1)
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names", row=1)
    if not body:
        raise ParseError("no data rows")

    width = len(header)
    values = np.empty((len(body), width - 1))
    for i, row in enumerate(body):
        if len(row) != width:
            raise RaggedRowsError(f"expected {width} cells, got {len(row)}", row=i + 2)
        for j, cell in enumerate(row[1:], start=1):
            cell = cell.strip()
            if cell in MISSING_TOKENS:
                values[i, j - 1] = np.nan
                continue
            try:
                values[i, j - 1] = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric cell {cell!r}", row=i + 2, column=header[j]) from None
            if math.isinf(values[i, j - 1]):
                raise ParseError("infinite value", row=i + 2, column=header[j])

    dates = _parse_dates([r[0] for r in body])
    if len(dates) > 1:
        bad = np.flatnonzero(dates[1:] <= dates[:-1])
        if bad.size:
            raise ParseError("dates must be strictly increasing", row=int(bad[0]) + 3, column="date")

    names = header[1:]
    wanted = list(manifest.channels) if manifest.channels else names
    missing_cols = [c for c in wanted if c not in names]
    if missing_cols:
        raise ParseError(f"unknown channel(s) {missing_cols}", row=1)

    meta = read_sidecar(path)
    frequency = manifest.frequency_label or meta.get("frequency", "other")
    if frequency not in FREQUENCIES:
        raise ParseError(f"unknown frequency {frequency!r}")
    period = manifest.seasonal_period
    if period is None and "seasonal_period" in meta:
        try:
            period = int(meta["seasonal_period"])
        except ValueError:
            raise ParseError(f"bad seasonal_period {meta['seasonal_period']!r} in sidecar") from None
    split = manifest.split
    if split is None and "split" in meta:
        split = SplitSpec.from_ratio(meta["split"])
    channels = []
    for name in wanted:
        col = _fill(values[:, names.index(name)], manifest.fill_policy, name)
        channels.append(validate_series(col, dates, period, frequency, name))
    return Dataset(
        name=manifest.name if manifest.name != path.stem or "name" not in meta else meta["name"],
        channels=tuple(channels),
        domain_tag=manifest.domain_tag or meta.get("domain", ""),
        split=split or DEFAULT_SPLIT,
    )


def _format_date(v) -> str:
    if isinstance(v, np.datetime64):
        return str(v)
    return str(int(v))


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write ``dataset`` as wide CSV. Floats use ``repr`` so a reload is
    bit-exact; missing timestamps become a 0-based integer index."""
    path = Path(path)
    dates = dataset.timestamps
    if dates is None:
        dates = np.arange(dataset.length)
    values = dataset.values()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *dataset.channel_names])
        for d, row in zip(dates, values):
            w.writerow([_format_date(d), *(repr(float(v)) for v in row)])


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# run configuration

TOP_KEYS = {
    "seed", "strategy", "metrics", "normalization", "metric_scale", "stride",
    "batch_size", "retrain_each_window", "output_dir", "parallelism",
    "datasets", "methods",
}
DATASET_KEYS = {
    "path", "name", "domain", "frequency", "seasonal_period", "split",
    "channels", "fill", "horizons", "lookback", "train_window",
}
METHOD_KEYS = {"name", "hyperparameters", "mode", "seed"}


@dataclass
class RunConfig:
    datasets: list[DatasetManifest]
    methods: list[MethodSpec]
    strategy: str = "rolling"
    metrics: tuple[str, ...] = ("mae", "mse")
    normalization: str = "zscore"
    metric_scale: str = "normalized"
    stride: int = 1
    batch_size: int = 32
    retrain_each_window: bool | None = None
    seed: int = 0
    output_dir: Path = Path("results")
    parallelism: int = 1
    source: Path | None = None
    registry: dict[str, Dataset] = field(default_factory=dict, repr=False)
    train_windows: dict[str, int | None] = field(default_factory=dict)
    data_digests: dict[str, str] = field(default_factory=dict, repr=False)

    def horizons(self, manifest: DatasetManifest) -> tuple[int, ...]:
        if manifest.horizons:
            return manifest.horizons
        ds = self.registry[manifest.name]
        return (DEFAULT_HORIZONS[ds.channels[0].frequency_label],)

    def plans(self) -> list[EvaluationPlan]:
        """Every cell of the run, in canonical (dataset, method, horizon) order."""
        out = []
        for man in sorted(self.datasets, key=lambda m: m.name):
            ds = self.registry[man.name]
            for spec in sorted(self.methods, key=lambda s: s.label()):
                for h in sorted(self.horizons(man)):
                    out.append(
                        EvaluationPlan(
                            dataset=ds,
                            method=spec,
                            strategy=self.strategy,
                            horizon=h,
                            lookback=man.lookback,
                            stride=self.stride,
                            metrics=self.metrics,
                            normalization=self.normalization,
                            metric_scale=self.metric_scale,
                            retrain_each_window=self.retrain_each_window,
                            batch_size=self.batch_size,
                            split=man.split,
                            seasonal_period=man.seasonal_period,
                            train_window=self.train_windows.get(man.name),
                        )
                    )
        return out

    def canonical(self) -> dict[str, Any]:
        """Settings that determine results (excludes output dir and parallelism)."""
        return {
            "strategy": self.strategy,
            "metrics": list(self.metrics),
            "normalization": self.normalization,
            "metric_scale": self.metric_scale,
            "stride": self.stride,
            "batch_size": self.batch_size,
            "retrain_each_window": self.retrain_each_window,
            "seed": self.seed,
            "datasets": [
                {
                    "name": m.name,
                    "digest": self.data_digests.get(m.name, ""),
                    "channels": list(m.channels) if m.channels else None,
                    "frequency": m.frequency_label,
                    "seasonal_period": m.seasonal_period,
                    "split": str(m.split) if m.split else None,
                    "fill": m.fill_policy,
                    "horizons": list(m.horizons),
                    "lookback": m.lookback,
                    "train_window": self.train_windows.get(m.name),
                }
                for m in sorted(self.datasets, key=lambda m: m.name)
            ],
            "methods": [
                {
                    "name": s.name,
                    "hyperparameters": {k: s.hyperparameters[k] for k in sorted(s.hyperparameters)},
                    "mode": s.prediction_mode,
                    "seed": s.deterministic_seed,
                }
                for s in sorted(self.methods, key=lambda s: s.label())
            ],
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise SchemaError(f"missing required key {key!r}", path)
    return mapping[key]


def _check_keys(mapping: Any, allowed: set[str], path: str) -> None:
    if not isinstance(mapping, dict):
        raise SchemaError("expected a mapping", path)
    for key in mapping:
        if key not in allowed:
            raise SchemaError(f"unknown key {key!r}", f"{path}.{key}" if path else str(key))


def _int(value, path: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise SchemaError(f"expected an integer >= {minimum}, got {value!r}", path)
    return value


def _choice(value, choices: Sequence[str], path: str) -> str:
    if value not in choices:
        raise SchemaError(f"expected one of {list(choices)}, got {value!r}", path)
    return value


def _parse_manifest(entry: Any, index: int, base: Path) -> tuple[DatasetManifest, int | None]:
    path = f"datasets[{index}]"
    _check_keys(entry, DATASET_KEYS, path)
    file_path = Path(str(_require(entry, "path", path)))
    if not file_path.is_absolute():
        file_path = base / file_path
    split = None
    if entry.get("split") is not None:
        try:
            split = SplitSpec.from_ratio(entry["split"])
        except ValidationError as exc:
            raise InvalidSplitError(str(exc), f"{path}.split") from None
    freq = entry.get("frequency")
    if freq is not None:
        _choice(freq, FREQUENCIES, f"{path}.frequency")
    channels = entry.get("channels")
    if channels is not None and (not isinstance(channels, list) or not channels):
        raise SchemaError("expected a non-empty list of column names", f"{path}.channels")
    horizons = entry.get("horizons", [])
    if isinstance(horizons, int):
        horizons = [horizons]
    if not isinstance(horizons, list):
        raise SchemaError("expected a list of integers", f"{path}.horizons")
    horizons = tuple(_int(h, f"{path}.horizons[{i}]") for i, h in enumerate(horizons))
    if len(set(horizons)) != len(horizons):
        raise SchemaError("duplicate horizons", f"{path}.horizons")
    period = entry.get("seasonal_period")
    lookback = entry.get("lookback")
    train_window = entry.get("train_window")
    manifest = DatasetManifest(
        path=file_path,
        name=str(entry.get("name") or file_path.stem),
        domain_tag=str(entry.get("domain", "")),
        frequency_label=freq,
        seasonal_period=None if period is None else _int(period, f"{path}.seasonal_period"),
        split=split,
        channels=tuple(str(c) for c in channels) if channels else None,
        fill_policy=_choice(entry.get("fill", "reject"), FILL_POLICIES, f"{path}.fill"),
        horizons=horizons,
        lookback=None if lookback is None else _int(lookback, f"{path}.lookback"),
    )
    return manifest, None if train_window is None else _int(train_window, f"{path}.train_window")


def _parse_method(entry: Any, index: int, default_seed: int) -> MethodSpec:
    path = f"methods[{index}]"
    if isinstance(entry, str):
        entry = {"name": entry}
    _check_keys(entry, METHOD_KEYS, path)
    name = str(_require(entry, "name", path))
    hp = entry.get("hyperparameters") or {}
    if not isinstance(hp, dict):
        raise SchemaError("expected a mapping", f"{path}.hyperparameters")
    mode = str(entry.get("mode", "DMS")).upper()
    _choice(mode, ("DMS", "IMS"), f"{path}.mode")
    seed = entry.get("seed", default_seed)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise SchemaError(f"expected an integer seed, got {seed!r}", f"{path}.seed")
    spec = MethodSpec(name, hp, mode, seed)
    try:
        forecasters.validate_spec(spec)
    except UnknownMethodError as exc:
        raise UnknownMethodError(f"{path}.name: {exc}") from None
    except ValidationError as exc:
        raise SchemaError(str(exc), f"{path}.hyperparameters") from None
    return spec


def config_from_mapping(doc: Any, base: Path = Path("."), load: bool = True, seed: int | None = None) -> RunConfig:
    """Validate a parsed config document; optionally load and check data."""
    _check_keys(doc, TOP_KEYS, "")
    default_seed = doc.get("seed", 0) if seed is None else seed
    if isinstance(default_seed, bool) or not isinstance(default_seed, int):
        raise SchemaError(f"expected an integer, got {default_seed!r}", "seed")

    metrics = doc.get("metrics", ["mae", "mse"])
    if isinstance(metrics, str):
        metrics = [metrics]
    if not isinstance(metrics, list) or not metrics:
        raise SchemaError("expected a non-empty list", "metrics")
    for i, m in enumerate(metrics):
        _choice(str(m).lower(), METRIC_NAMES, f"metrics[{i}]")
    retrain = doc.get("retrain_each_window")
    if retrain is not None and not isinstance(retrain, bool):
        raise SchemaError("expected true, false or null", "retrain_each_window")

    datasets_doc = _require(doc, "datasets", "")
    methods_doc = _require(doc, "methods", "")
    if not isinstance(datasets_doc, list) or not datasets_doc:
        raise SchemaError("expected a non-empty list", "datasets")
    if not isinstance(methods_doc, list) or not methods_doc:
        raise SchemaError("expected a non-empty list", "methods")
    parsed = [_parse_manifest(e, i, base) for i, e in enumerate(datasets_doc)]
    manifests = [m for m, _ in parsed]
    names = [m.name for m in manifests]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate dataset names", "datasets")
    methods = [_parse_method(e, i, default_seed) for i, e in enumerate(methods_doc)]
    labels = [s.label() for s in methods]
    if len(set(labels)) != len(labels):
        raise SchemaError("duplicate method entries", "methods")

    cfg = RunConfig(
        datasets=manifests,
        methods=methods,
        strategy=_choice(doc.get("strategy", "rolling"), STRATEGIES, "strategy"),
        metrics=tuple(str(m).lower() for m in metrics),
        normalization=_choice(doc.get("normalization", "zscore"), NORMALIZATIONS, "normalization"),
        metric_scale=_choice(doc.get("metric_scale", "normalized"), ("normalized", "raw"), "metric_scale"),
        stride=_int(doc.get("stride", 1), "stride"),
        batch_size=_int(doc.get("batch_size", 32), "batch_size"),
        retrain_each_window=retrain,
        seed=default_seed,
        output_dir=base / str(doc.get("output_dir", "results")),
        parallelism=_int(doc.get("parallelism", 1), "parallelism"),
        train_windows={m.name: tw for m, tw in parsed},
    )
    if load:
        load_registry(cfg)
    return cfg


def load_registry(cfg: RunConfig) -> None:
    """Load every dataset and check each (dataset, horizon) cell up front."""
    for i, man in enumerate(cfg.datasets):
        where = f"datasets[{i}]"
        if not man.path.exists():
            raise FileNotFoundError(f"{where}.path: file not found: {man.path}")
        try:
            ds = load_dataset(man)
        except ParseError as exc:
            raise SchemaError(f"{man.path.name}: {exc}", where) from None
        except ValidationError as exc:
            raise InvalidSplitError(f"{man.name}: {exc}", where) from None
        cfg.registry[man.name] = ds
        cfg.data_digests[man.name] = file_digest(man.path)
    for plan in cfg.plans():
        try:
            plan.validate()
        except ValidationError as exc:
            raise InvalidSplitError(
                f"dataset {plan.dataset.name!r}, horizon {plan.horizon}: {exc}", "datasets"
            ) from None


def parse_config(path: str | Path, load: bool = True, seed: int | None = None) -> RunConfig:
    """Read and fully validate a YAML run configuration.

    I/O failures propagate as ``OSError``; everything else wrong with the
    document raises a :class:`ConfigError` subclass or
    :class:`UnknownMethodError`. ``seed`` overrides the file's default seed (as ``--seed`` does).
    """
    path = Path(path)
    text = path.read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"invalid YAML: {exc}") from None
    cfg = config_from_mapping(doc, base=path.parent, load=load, seed=seed)
    cfg.source = path
    return cfg


__all__ = [
    "BenchmarkError",
    "DatasetManifest",
    "RunConfig",
    "config_from_mapping",
    "load_dataset",
    "parse_config",
    "read_sidecar",
    "write_dataset",
]
