"""Method layer: a small registry of forecasting baselines.

Every method is fitted on a ``(T, N)`` training slice and predicts from an
arbitrary history, so the same fitted model can be re-used across rolling
windows. ``prediction_mode`` selects direct multi-step (DMS) output or
iterative multi-step (IMS) roll-out of the one-step predictor.
"""

from __future__ import annotations

import csv
import hashlib
import json
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import (
    ForecasterError,
    InsufficientDataError,
    NonFiniteOutputError,
    ShapeMismatchError,
    SingularSystemError,
    UnknownMethodError,
    ValidationError,
)

MODES = ("DMS", "IMS")
RIDGE_LAMBDA = 1e-8


@dataclass(frozen=True)
class MethodSpec:
    name: str
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)
    prediction_mode: str = "DMS"
    deterministic_seed: int = 0

    def __post_init__(self):
        mode = str(self.prediction_mode).upper()
        if mode not in MODES:
            raise ValidationError(f"prediction_mode must be DMS or IMS, got {self.prediction_mode!r}")
        object.__setattr__(self, "prediction_mode", mode)
        object.__setattr__(self, "hyperparameters", dict(self.hyperparameters))

    def label(self) -> str:
        """Result-table name, e.g. ``var(order=2)`` or ``linear_regression(lags=3)/IMS``."""
        base = self.name
        if self.hyperparameters:
            args = ",".join(f"{k}={self.hyperparameters[k]}" for k in sorted(self.hyperparameters))
            base = f"{self.name}({args})"
        return base if self.prediction_mode == "DMS" else f"{base}/{self.prediction_mode}"


@dataclass(frozen=True, eq=False)
class FittedModel:
    spec: MethodSpec
    params: dict
    fingerprint: str
    n_channels: int
    min_history: int
    seasonal_period: int = 1
    horizon: int = 1


def data_fingerprint(data: np.ndarray) -> str:
    arr = np.ascontiguousarray(data, dtype=np.float64)
    h = hashlib.sha256()
    h.update(str(arr.shape).encode())
    h.update(arr.tobytes())
    return h.hexdigest()[:16]


def _as_2d(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ShapeMismatchError(f"expected a (T, N) array, got shape {arr.shape}")
    return arr


class Forecaster:
    """Base class; subclasses implement ``_fit`` and ``_forecast``.

    ``_forecast`` returns the DMS forecast; ``_step`` (one-step prediction)
    drives IMS and defaults to ``_forecast(..., 1)``.
    """

    name = ""
    family = "statistical"
    defaults: dict[str, Any] = {}

    @classmethod
    def check_hyperparameters(cls, hp: Mapping[str, Any]) -> dict[str, Any]:
        unknown = sorted(set(hp) - set(cls.defaults))
        if unknown:
            raise ValidationError(f"{cls.name}: unknown hyperparameter(s) {', '.join(unknown)}")
        merged = dict(cls.defaults)
        merged.update(hp)
        return merged

    def min_history(self, hp: dict, period: int) -> int:
        return 1

    def _fit(self, data: np.ndarray, hp: dict, period: int, horizon: int, spec: MethodSpec) -> dict:
        return {}

    def _forecast(self, params: dict, history: np.ndarray, horizon: int) -> np.ndarray:
        raise NotImplementedError

    def _step(self, params: dict, history: np.ndarray) -> np.ndarray:
        return self._forecast(params, history, 1)[0]

    def fit(self, spec: MethodSpec, data, seasonal_period: int = 1, horizon: int = 1) -> FittedModel:
        arr = _as_2d(data)
        hp = self.check_hyperparameters(spec.hyperparameters)
        params = self._fit(arr, hp, int(seasonal_period), int(horizon), spec)
        params["hp"] = hp
        return FittedModel(
            spec=spec,
            params=params,
            fingerprint=data_fingerprint(arr),
            n_channels=arr.shape[1],
            min_history=self.min_history(hp, int(seasonal_period)),
            seasonal_period=int(seasonal_period),
            horizon=int(horizon),
        )

    def predict(self, model: FittedModel, history, horizon: int) -> np.ndarray:
        hist = _as_2d(history)
        if hist.shape[1] != model.n_channels:
            raise ShapeMismatchError(
                f"history has {hist.shape[1]} channels, model was fitted on {model.n_channels}"
            )
        if horizon < 1:
            raise ValidationError(f"horizon must be positive, got {horizon}")
        if len(hist) < model.min_history:
            raise InsufficientDataError(
                f"{model.spec.name} needs {model.min_history} history points, got {len(hist)}"
            )
        if model.spec.prediction_mode == "IMS":
            buf = hist
            out = np.empty((horizon, hist.shape[1]))
            for k in range(horizon):
                out[k] = self._step(model.params, buf)
                buf = np.vstack([buf, out[k : k + 1]])
        else:
            out = np.asarray(self._forecast(model.params, hist, horizon), dtype=float)
        if out.shape != (horizon, hist.shape[1]):
            raise ShapeMismatchError(f"{model.spec.name} produced shape {out.shape}")
        if not np.all(np.isfinite(out)):
            raise NonFiniteOutputError(f"{model.spec.name} produced non-finite forecasts")
        return out


class Naive(Forecaster):
    name = "naive"

    def _forecast(self, params, history, horizon):
        return np.repeat(history[-1:], horizon, axis=0)


class SeasonalNaive(Forecaster):
    name = "seasonal_naive"
    defaults = {"period": None}

    def _period(self, hp, period):
        return int(hp["period"] or period or 1)

    def min_history(self, hp, period):
        return self._period(hp, period)

    def _fit(self, data, hp, period, horizon, spec):
        s = self._period(hp, period)
        if len(data) < s:
            raise InsufficientDataError(f"seasonal_naive needs {s} points, got {len(data)}")
        return {"period": s, "last_cycle": data[-s:].copy()}

    def _forecast(self, params, history, horizon):
        s = params["period"]
        cycle = history[-s:]
        reps = -(-horizon // s)
        return np.tile(cycle, (reps, 1))[:horizon]


class _LaggedLeastSquares(Forecaster):
    """Autoregression on the last ``lags`` values with an intercept.

    In DMS mode one regression per step ahead is solved; step 1 is shared
    with the IMS one-step model, so both modes coincide for horizon 1.
    """

    cross_channel = False
    lag_key = "lags"

    def _lags(self, hp) -> int:
        p = int(hp[self.lag_key])
        if p < 1:
            raise ValidationError(f"{self.name}: {self.lag_key} must be >= 1")
        return p

    def min_history(self, hp, period):
        return self._lags(hp)

    def _design(self, window: np.ndarray, p: int) -> np.ndarray:
        # window: (p, N) oldest first -> features most recent first
        lagged = window[::-1]
        return lagged.reshape(-1) if self.cross_channel else lagged

    def _solve(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _fit(self, data, hp, period, horizon, spec):
        p = self._lags(hp)
        n_steps = horizon if spec.prediction_mode == "DMS" else 1
        t_len, n = data.shape
        n_samples = t_len - p - n_steps + 1
        n_features = 1 + (p * n if self.cross_channel else p)
        if n_samples < n_features + 1:
            raise InsufficientDataError(
                f"{self.name}: {t_len} points too few for {p} lags over {n_steps} step(s)"
            )
        windows = np.stack([data[i : i + p] for i in range(n_samples)])
        coefs = []
        for h in range(1, n_steps + 1):
            targets = data[p + h - 1 : p + h - 1 + n_samples]
            if self.cross_channel:
                X = np.column_stack([np.ones(n_samples), windows[:, ::-1, :].reshape(n_samples, -1)])
                coefs.append(self._solve(X, targets))
            else:
                per = []
                for j in range(n):
                    X = np.column_stack([np.ones(n_samples), windows[:, ::-1, j]])
                    per.append(self._solve(X, targets[:, j]))
                coefs.append(np.column_stack(per))
        return {"lags": p, "coefs": coefs}

    def _predict_step(self, coef: np.ndarray, window: np.ndarray) -> np.ndarray:
        if self.cross_channel:
            x = np.concatenate([[1.0], window[::-1].reshape(-1)])
            return x @ coef
        n = window.shape[1]
        lagged = window[::-1]
        return np.array([coef[0, j] + lagged[:, j] @ coef[1:, j] for j in range(n)])

    def _forecast(self, params, history, horizon):
        coefs = params["coefs"]
        if horizon > len(coefs):
            raise ShapeMismatchError(
                f"{self.name} was fitted for {len(coefs)} step(s) ahead, asked for {horizon}"
            )
        window = history[-params["lags"] :]
        return np.vstack([self._predict_step(coefs[h], window) for h in range(horizon)])

    def _step(self, params, history):
        return self._predict_step(params["coefs"][0], history[-params["lags"] :])


class LinearRegression(_LaggedLeastSquares):
    name = "linear_regression"
    family = "ml"
    defaults = {"lags": 3}

    def _solve(self, X, y):
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        return coef


class VAR(_LaggedLeastSquares):
    """Vector autoregression; normal equations with a ridge fallback."""

    name = "var"
    cross_channel = True
    lag_key = "order"
    defaults = {"order": 1}

    def _lags(self, hp):
        p = int(hp["order"])
        if not 1 <= p <= 8:
            raise ValidationError(f"var: order must lie in [1, 8], got {p}")
        return p

    def _solve(self, X, Y):
        gram = X.T @ X
        rhs = X.T @ Y
        if np.linalg.matrix_rank(gram) == gram.shape[0]:
            try:
                return np.linalg.solve(gram, rhs)
            except np.linalg.LinAlgError:
                pass
        try:
            coef = np.linalg.solve(gram + RIDGE_LAMBDA * np.eye(gram.shape[0]), rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(f"var: normal equations singular ({exc})") from None
        if not np.all(np.isfinite(coef)):
            raise SingularSystemError("var: non-finite coefficients")
        return coef

    @staticmethod
    def lag_matrices(model: FittedModel) -> list[np.ndarray]:
        """One-step coefficient matrices ``A_i[target, source]``."""
        coef = model.params["coefs"][0]
        n = model.n_channels
        return [coef[1 + i * n : 1 + (i + 1) * n].T for i in range(model.params["lags"])]


_GRID = np.round(np.arange(1, 10) / 10.0, 1)


class ETS(Forecaster):
    """Additive Holt-Winters (level, trend, season) per channel.

    Smoothing weights are chosen on a 0.1..0.9 grid by one-step in-sample
    MSE. Without a usable season (period < 2 or fewer than two cycles) the
    seasonal part is dropped.
    """

    name = "ets"
    defaults = {"period": None}

    def _period(self, hp, period):
        return int(hp["period"] or period or 1)

    def min_history(self, hp, period):
        s = self._period(hp, period)
        return 2 * s if s >= 2 else 2

    @staticmethod
    def _init_state(y: np.ndarray, s: int):
        if s >= 2:
            first = y[:s].mean()
            trend = (y[s : 2 * s].mean() - first) / s
            return first, trend, y[:s] - first
        return y[0], y[1] - y[0], np.zeros(1)

    @staticmethod
    def _filter(y, s, alpha, beta, gamma):
        """Run the recursion for a batch of parameter triples.

        Returns final (level, trend, seasonal) and summed squared one-step errors.
        """
        k = alpha.shape[0]
        l0, b0, s0 = ETS._init_state(y, s)
        level = np.full(k, l0, dtype=float)
        trend = np.full(k, b0, dtype=float)
        m = len(s0)
        season = np.tile(s0, (k, 1)).astype(float)
        sse = np.zeros(k)
        for t, obs in enumerate(y):
            idx = t % m
            err = obs - (level + trend + season[:, idx])
            sse += err * err
            level = level + trend + alpha * err
            trend = trend + alpha * beta * err
            season[:, idx] = season[:, idx] + gamma * (1.0 - alpha) * err
        return level, trend, season, sse

    def _fit(self, data, hp, period, horizon, spec):
        s = self._period(hp, period)
        if s >= 2 and len(data) < 2 * s:
            s = 1
        if len(data) < 2:
            raise InsufficientDataError("ets needs at least 2 points")
        if s >= 2:
            a, b, g = (x.reshape(-1) for x in np.meshgrid(_GRID, _GRID, _GRID, indexing="ij"))
        else:
            a, b = (x.reshape(-1) for x in np.meshgrid(_GRID, _GRID, indexing="ij"))
            g = np.zeros_like(a)
        chosen = []
        for j in range(data.shape[1]):
            *_, sse = self._filter(data[:, j], s, a, b, g)
            best = int(np.argmin(sse))
            chosen.append((float(a[best]), float(b[best]), float(g[best])))
        return {"period": s, "smoothing": chosen}

    def _states(self, params, history):
        s = params["period"]
        if s >= 2 and len(history) < 2 * s:
            s = 1
        out = []
        for j, (a, b, g) in enumerate(params["smoothing"]):
            lv, tr, se, _ = self._filter(history[:, j], s, np.array([a]), np.array([b]), np.array([g]))
            out.append((lv[0], tr[0], se[0], len(history) % len(se[0])))
        return out

    def _forecast(self, params, history, horizon):
        steps = np.arange(1, horizon + 1)
        cols = []
        for level, trend, season, offset in self._states(params, history):
            m = len(season)
            cols.append(level + steps * trend + season[(offset + steps - 1) % m])
        return np.column_stack(cols)


class SubprocessForecaster(Forecaster):
    """Delegates prediction to an external command.

    The command is invoked as ``command... REQUEST_CSV META_JSON RESPONSE_CSV``.
    The request CSV holds the history window (header = channel names), the
    JSON sidecar holds ``horizon``, ``lookback``, ``seed`` and ``channels``.
    The command must write ``horizon`` rows of ``N`` comma-separated values
    (an optional header row is skipped). A nonzero exit status is a failure.
    """

    name = "subprocess"
    family = "external"
    defaults = {"command": None, "timeout": 600, "channels": None}

    def _fit(self, data, hp, period, horizon, spec):
        cmd = hp["command"]
        if not cmd:
            raise ValidationError("subprocess: 'command' hyperparameter is required")
        return {"command": [cmd] if isinstance(cmd, str) else list(cmd), "seed": spec.deterministic_seed}

    def _forecast(self, params, history, horizon):
        names = params["hp"].get("channels") or [f"ch{j}" for j in range(history.shape[1])]
        with tempfile.TemporaryDirectory(prefix="tsbench-") as tmp:
            req = Path(tmp) / "request.csv"
            meta = Path(tmp) / "request.json"
            resp = Path(tmp) / "response.csv"
            write_request(req, meta, history, horizon, params["seed"], names)
            proc = subprocess.run(
                [*params["command"], str(req), str(meta), str(resp)],
                capture_output=True,
                text=True,
                timeout=params["hp"]["timeout"],
            )
            if proc.returncode != 0:
                raise ForecasterError(
                    f"external method exited with status {proc.returncode}: {proc.stderr.strip()[:200]}"
                )
            return read_response(resp, horizon, history.shape[1])


def write_request(req: Path, meta: Path, history: np.ndarray, horizon: int, seed: int, names) -> None:
    with open(req, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in history:
            w.writerow([repr(float(v)) for v in row])
    meta.write_text(
        json.dumps(
            {"horizon": int(horizon), "lookback": int(len(history)), "seed": int(seed), "channels": list(names)},
            sort_keys=True,
        )
    )


def read_response(path: Path, horizon: int, n_channels: int) -> np.ndarray:
    if not path.exists():
        raise ForecasterError(f"external method wrote no response file at {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows:
        try:
            [float(v) for v in rows[0]]
        except ValueError:
            rows = rows[1:]
    try:
        arr = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ForecasterError(f"unparseable response: {exc}") from None
    if arr.shape != (horizon, n_channels):
        raise ShapeMismatchError(f"response shape {arr.shape}, expected {(horizon, n_channels)}")
    return arr


METHODS: dict[str, type[Forecaster]] = {
    cls.name: cls for cls in (Naive, SeasonalNaive, LinearRegression, VAR, ETS, SubprocessForecaster)
}


def register_method(cls: type[Forecaster]) -> type[Forecaster]:
    METHODS[cls.name] = cls
    return cls


def get_method(name: str) -> Forecaster:
    try:
        return METHODS[name]()
    except KeyError:
        raise UnknownMethodError(f"unknown method {name!r}; registered: {', '.join(sorted(METHODS))}") from None


def validate_spec(spec: MethodSpec) -> None:
    get_method(spec.name).check_hyperparameters(spec.hyperparameters)


def fit(spec: MethodSpec, data, seasonal_period: int = 1, horizon: int = 1) -> FittedModel:
    return get_method(spec.name).fit(spec, data, seasonal_period, horizon)


def predict(model: FittedModel, history, horizon: int) -> np.ndarray:
    return get_method(model.spec.name).predict(model, history, horizon)
