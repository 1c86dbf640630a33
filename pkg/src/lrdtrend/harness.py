"""Monte Carlo MISE experiments, reports and figure data."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import KernelPlan, kernel_smooth, minimax_thresholds
from .constants import TrendSmoothness, theoretical_mise
from .estimator import WaveletDesign, adaptive_plan, hard_threshold, mise_grid, soft_threshold
from .exceptions import ConfigurationError, LrdTrendError
from .noise import CirculantSampler, NoiseModel
from .trends import TrendFunction, default_smoothness, get_trend
from .wavelets import as_table
from ._validation import design_points, is_power_of_two

log = logging.getLogger(__name__)

METHODS = ("adaptive", "minimax", "kernel")


@dataclass(frozen=True)
class ExperimentConfig:
    trend: str = "sine"
    delta: float | None = None
    basis: str = "s4"
    d: float = 0.2
    n_values: tuple = (128, 256, 512, 1024, 2048, 4096, 8192)
    replicates: int = 400
    seed: int = 0
    methods: tuple = ("adaptive",)
    output_dir: str = "results"
    innovation_variance: float = 1.0
    cap: str = "aliasing"
    chunk_size: int = 50

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "methods", tuple(str(m).lower() for m in self.methods))
        self.validate()

    def validate(self):
        if self.replicates < 1:
            raise ConfigurationError("replicates must be >= 1")
        if not self.n_values:
            raise ConfigurationError("n_values must not be empty")
        bad = [n for n in self.n_values if not is_power_of_two(n) or n < 8]
        if bad:
            raise ConfigurationError(f"n values must be powers of two >= 8, got {bad}")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ConfigurationError(f"methods must be a non-empty subset of {METHODS}, got {self.methods}")
        if not 0.0 < float(self.d) < 0.5:
            raise ConfigurationError(f"d must lie in (0, 0.5), got {self.d}")
        if self.chunk_size < 1:
            raise ConfigurationError("chunk_size must be >= 1")
        if self.cap not in ("aliasing", "full"):
            raise ConfigurationError("cap must be 'aliasing' or 'full'")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - set(cls.field_names())
        if unknown:
            raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        return cls.from_dict(data)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        data = dataclasses.asdict(self)
        data.update({k: v for k, v in changes.items() if v is not None})
        return self.from_dict(data)

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["n_values"] = list(self.n_values)
        data["methods"] = list(self.methods)
        return data

    def build_trend(self) -> TrendFunction:
        params = {} if self.delta is None else {"delta": float(self.delta)}
        return get_trend(self.trend, **params)

    def noise_model(self) -> NoiseModel:
        return NoiseModel(self.d, self.innovation_variance)


@dataclass(frozen=True)
class MiseCell:
    method: str
    n: int
    replicates: int
    mise: float = float("nan")
    se: float = float("nan")
    theoretical: float | None = None
    J: int | None = None
    q: int | None = None
    error: str | None = None

    @property
    def ratio(self) -> float | None:
        if self.theoretical is None or self.error is not None:
            return None
        return self.mise / self.theoretical

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["ratio"] = self.ratio
        return out


CSV_COLUMNS = ["method", "n", "replicates", "mise", "se", "theoretical", "ratio", "J", "q", "error"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


@dataclass(frozen=True)
class MiseReport:
    config: ExperimentConfig
    cells: tuple = field(default=())

    def methods(self) -> list[str]:
        return [m for m in self.config.methods if any(c.method == m for c in self.cells)]

    def cell(self, method: str, n: int) -> MiseCell:
        for c in self.cells:
            if c.method == method and c.n == n:
                return c
        raise KeyError((method, n))

    def failed(self) -> list[MiseCell]:
        return [c for c in self.cells if not c.ok]

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in self.cells:
            d = c.to_dict()
            w.writerow([_fmt(d[k]) for k in CSV_COLUMNS])
        return buf.getvalue()

    def to_json_text(self) -> str:
        doc = {"config": self.config.to_dict(), "cells": [c.to_dict() for c in self.cells]}
        return json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n"

    def save(self, directory=None, stem: str = "mise") -> tuple[Path, Path]:
        out = Path(directory or self.config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
        csv_path.write_text(self.to_csv_text())
        json_path.write_text(self.to_json_text())
        return csv_path, json_path

    @classmethod
    def from_json(cls, path) -> "MiseReport":
        try:
            doc = json.loads(Path(path).read_text())
            config = ExperimentConfig.from_dict(doc["config"])
            fields = {f.name for f in dataclasses.fields(MiseCell)}
            cells = []
            for c in doc["cells"]:
                c = {k: v for k, v in c.items() if k in fields}
                for key in ("mise", "se"):
                    if c.get(key) is None:
                        c[key] = float("nan")
                cells.append(MiseCell(**c))
        except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read report {path}: {exc}") from None
        return cls(config, tuple(cells))


def doppler_cstar_override(trend: TrendFunction, r: int | None = None) -> TrendSmoothness:
    """Smoothness functionals on the trend's restricted bounds when it has them.

    Trends without an override get the full-interval functionals unchanged.
    ``r`` should be the basis's vanishing-moment count.
    """
    return default_smoothness(trend, r)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = math.fsum(values) / values.size
    if values.size < 2:
        return mean, float("nan")
    var = math.fsum((values - mean) ** 2) / (values.size - 1)
    return mean, math.sqrt(var / values.size)


class _CellRunner:
    """ISE per replicate for one method at one ``n``."""

    def __init__(self, method: str, n: int, config: ExperimentConfig, trend: TrendFunction,
                 smooth: TrendSmoothness, grid: np.ndarray):
        self.method = method
        self.n = n
        self.grid = grid
        self.theoretical = None
        self.J = self.q = None
        model = config.noise_model()
        if method == "kernel":
            curvature = trend.smoothness(2, trend.cstar_bounds or (0.0, 1.0)).integral_gr_sq
            self.plan = KernelPlan.optimal(n, model, curvature)
            return
        plan, constants = adaptive_plan(n, config.basis, model, smooth, cap=config.cap)
        self.plan = plan
        self.J, self.q = plan.J, plan.q
        self.design = WaveletDesign(as_table(config.basis), n, plan.J, plan.q, grid)
        if method == "adaptive":
            self.rule, self.th = hard_threshold, plan.thresholds
            self.theoretical = theoretical_mise(n, plan, constants, smooth)
        else:
            self.rule, self.th = soft_threshold, minimax_thresholds(n, plan.J, plan.q, constants)

    def estimates(self, Y: np.ndarray) -> np.ndarray:
        if self.method == "kernel":
            return kernel_smooth(Y, self.plan.bandwidth, self.grid)
        s, d = self.design.coefficients(Y)
        return self.design.synthesize(s, [self.rule(dj, th)[0] for dj, th in zip(d, self.th)])


def _failed(method, n, R, exc) -> MiseCell:
    log.warning("cell (%s, n=%d) failed: %s", method, n, exc)
    return MiseCell(method, n, R, error=f"{type(exc).__name__}: {exc}")


def run_experiment(config: ExperimentConfig, persist: bool = True) -> MiseReport:
    """Simulate, estimate and average the ISE for every (method, n) cell.

    Replicate ``i`` uses the noise stream ``seed + i`` for every ``n`` and
    every method, so cells do not depend on which other cells are run.
    Module errors abort only the affected cell.
    """
    trend = config.build_trend()
    smooth = doppler_cstar_override(trend, as_table(config.basis).spec.m_psi)
    model = config.noise_model()
    R = config.replicates
    cells = []
    for n in config.n_values:
        grid, weights = mise_grid(n)
        truth = trend(grid)
        runners = {}
        for method in config.methods:
            try:
                runners[method] = _CellRunner(method, n, config, trend, smooth, grid)
            except (LrdTrendError, ValueError) as exc:
                cells.append(_failed(method, n, R, exc))
        ise = {m: np.empty(R) for m in runners}
        try:
            sampler = CirculantSampler(model, n)
        except LrdTrendError as exc:
            cells.extend(_failed(m, n, R, exc) for m in runners)
            continue
        signal = trend(design_points(n))
        for start in range(0, R, config.chunk_size):
            stop = min(R, start + config.chunk_size)
            Y = signal[None, :] + sampler.draw_many(stop - start, config.seed + start)
            for method in list(runners):
                try:
                    est = runners[method].estimates(Y)
                    # fsum is exactly rounded, so the bytes do not depend on BLAS or batch shape
                    sq = (est - truth[None, :]) ** 2 * weights[None, :]
                    ise[method][start:stop] = [math.fsum(row) for row in sq]
                except (LrdTrendError, ValueError, FloatingPointError) as exc:
                    cells.append(_failed(method, n, R, exc))
                    del runners[method]
        for method, runner in runners.items():
            vals = ise[method]
            if not np.all(np.isfinite(vals)):
                cells.append(_failed(method, n, R, FloatingPointError("non-finite ISE")))
                continue
            mean, se = _mean_se(vals)
            cells.append(MiseCell(method, n, R, mean, se, runner.theoretical, runner.J, runner.q))
    order = {m: i for i, m in enumerate(config.methods)}
    cells.sort(key=lambda c: (order[c.method], c.n))
    report = MiseReport(config, tuple(cells))
    if persist:
        report.save()
    return report


def fitted_slope(log2_n, log2_mise) -> float | None:
    """Least-squares slope; ``None`` with fewer than two points."""
    x = np.asarray(log2_n, dtype=float)
    y = np.asarray(log2_mise, dtype=float)
    ok = np.isfinite(y)
    if ok.sum() < 2:
        return None
    return float(np.polyfit(x[ok], y[ok], 1)[0])


def figure_table(report: MiseReport) -> tuple[list[int], dict]:
    methods = report.methods()
    ns = sorted({c.n for c in report.cells})
    cols = {}
    for m in methods:
        col = []
        for n in ns:
            try:
                c = report.cell(m, n)
                col.append(math.log2(c.mise) if c.ok and c.mise > 0 else float("nan"))
            except KeyError:
                col.append(float("nan"))
        cols[m] = col
    return ns, cols


def emit_figure_data(report: MiseReport, directory=None, stem: str = "figure") -> dict:
    """Write ``<stem>.csv`` (log2_n, log2_mise_<method>...), ``<stem>.svg`` and
    ``<stem>_slopes.json``; returns the paths and slopes."""
    if not report.cells or not any(c.ok for c in report.cells):
        raise ConfigurationError("report has no successful cells to plot")
    ns, cols = figure_table(report)
    x = [math.log2(n) for n in ns]
    slopes = {m: fitted_slope(x, cols[m]) for m in cols}
    out = Path(directory or report.config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    csv_path = out / f"{stem}.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["log2_n"] + [f"log2_mise_{m}" for m in cols])
        for i, xi in enumerate(x):
            w.writerow([_fmt(xi)] + [_fmt(cols[m][i]) for m in cols])

    slopes_path = out / f"{stem}_slopes.json"
    slopes_path.write_text(json.dumps(slopes, indent=2, sort_keys=True) + "\n")

    svg_path = out / f"{stem}.svg"
    _render_svg(svg_path, x, cols, slopes, report.config)
    return {"csv": csv_path, "svg": svg_path, "slopes_json": slopes_path, "slopes": slopes}


def _render_svg(path: Path, x, cols, slopes, config: ExperimentConfig):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "lrdtrend"
    fig, ax = plt.subplots(figsize=(6, 4))
    for m, y in cols.items():
        label = m if slopes[m] is None else f"{m} (slope {slopes[m]:.3f})"
        ax.plot(x, y, marker="o", label=label)
    ax.set_xlabel("log2 n")
    ax.set_ylabel("log2 MISE")
    ax.set_title(f"{config.trend}, d={config.d}, basis {config.basis}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
