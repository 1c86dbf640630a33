"""Empirical wavelet coefficients, hard-threshold reconstruction and the
adaptive trend estimator.

Coefficients are plain Riemann sums over the design ``t_i = i/n``::

    s_Jk = (1/n) sum_i Y_i phi_Jk(t_i),   d_jk = (1/n) sum_i Y_i psi_jk(t_i)

evaluated through sparse basis matrices, so a batch of replicates costs one
sparse product per level.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sparse
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .constants import (EstimatorPlan, LrdBasisConstants, TrendSmoothness, basis_constants, full_resolution,
                        level_noise_variance, plan_estimator)
from .exceptions import ConfigurationError
from .noise import NoiseModel
from .trends import default_smoothness, get_trend
from .wavelets import (DEFAULT_RESOLUTION, FATHER, MOTHER, DyadicTable, _kind, as_table, available_bases,
                       moment, shift_range)
from ._validation import check_batch, check_design, check_int, check_points, check_series, design_points


def basis_matrix(table: DyadicTable, kind: str, level: int, t) -> sparse.csr_matrix:
    """Sparse ``(len(t), n_shifts)`` matrix of ``w_{level,k}(t_i)``."""
    t = check_points(t)
    N = table.N
    kmin, kmax = shift_range(N, level)
    scale = N * 2.0**level
    x = scale * t
    base = np.floor(x).astype(np.int64)
    rows, cols, vals = [], [], []
    idx = np.arange(t.size)
    for off in range(N + 1):
        k = base - off
        ok = (k >= kmin) & (k <= kmax)
        v = table.evaluate(kind, x[ok] - k[ok])
        nz = v != 0.0
        rows.append(idx[ok][nz])
        cols.append(k[ok][nz] - kmin)
        vals.append(math.sqrt(scale) * v[nz])
    shape = (t.size, kmax - kmin + 1)
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape)


@dataclass(frozen=True, eq=False)
class Sample:
    values: np.ndarray

    def __post_init__(self):
        arr = check_series(self.values, min_length=4)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def t(self) -> np.ndarray:
        return design_points(self.n)


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Father coefficients at level ``J`` and detail coefficients for ``j = 0..q``.

    Arrays are indexed by ``k - k_min`` with ``k_min = -N + 1``.
    """

    J: int
    q: int
    N: int
    s_hat: np.ndarray
    d_hat: tuple
    kept: tuple = None

    def __post_init__(self):
        if len(self.d_hat) != self.q + 1:
            raise ConfigurationError("need one detail array per level")
        if self.s_hat.size != shift_range(self.N, self.J)[1] - shift_range(self.N, self.J)[0] + 1:
            raise ConfigurationError("father coefficient count does not match J")
        for j, d in enumerate(self.d_hat):
            lo, hi = shift_range(self.N, self.J + j)
            if d.size != hi - lo + 1:
                raise ConfigurationError(f"detail level {j} has wrong length")
        if self.kept is None:
            object.__setattr__(self, "kept", tuple(np.ones(d.size, bool) for d in self.d_hat))

    def shifts(self, j: int | None = None) -> np.ndarray:
        """Shift indices of the father (``j=None``) or detail level ``j``."""
        lo, hi = shift_range(self.N, self.J if j is None else self.J + j)
        return np.arange(lo, hi + 1)

    def detail(self, j: int, k: int) -> float:
        return float(self.d_hat[j][k - shift_range(self.N, self.J + j)[0]])

    def father(self, k: int) -> float:
        return float(self.s_hat[k - shift_range(self.N, self.J)[0]])

    def rows(self):
        """``(level, shift, value, kept)`` rows; father rows use level ``-1``."""
        for k, v in zip(self.shifts(), self.s_hat):
            yield -1, int(k), float(v), True
        for j in range(self.q + 1):
            for k, v, kp in zip(self.shifts(j), self.d_hat[j], self.kept[j]):
                yield j, int(k), float(v), bool(kp)

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["level", "shift", "value", "kept"])
            for level, k, v, kp in self.rows():
                w.writerow([level, k, repr(v), int(kp)])
        return path


def _check_levels(n: int, J: int, q: int):
    J = check_int(J, "J", 0)
    q = check_int(q, "q", -1)
    if q > full_resolution(n) - J:
        raise ConfigurationError(f"q={q} exceeds the available resolution floor(log2 n) - J = "
                                 f"{full_resolution(n) - J}")
    return J, q


class WaveletDesign:
    """Cached basis matrices on the design and on an evaluation grid.

    Serves many replicates of the same ``(n, J, q)`` at once.
    """

    def __init__(self, table: DyadicTable, n: int, J: int, q: int, eval_points=None):
        self.table = table
        self.n = check_int(n, "n", 4)
        self.J, self.q = _check_levels(self.n, J, q)
        t = design_points(self.n)
        self.father_design = basis_matrix(table, FATHER, self.J, t).T.tocsr()
        self.detail_design = [basis_matrix(table, MOTHER, self.J + j, t).T.tocsr() for j in range(self.q + 1)]
        self._eval_points = None
        if eval_points is not None:
            self.set_eval_points(eval_points)

    def set_eval_points(self, points):
        pts = check_points(points)
        self._eval_points = pts
        self.father_eval = basis_matrix(self.table, FATHER, self.J, pts)
        self.detail_eval = [basis_matrix(self.table, MOTHER, self.J + j, pts) for j in range(self.q + 1)]

    @property
    def eval_points(self):
        return self._eval_points

    def coefficients(self, Y) -> tuple[np.ndarray, list]:
        """Father ``(R, K0)`` and detail ``[(R, Kj)]`` coefficients of rows of ``Y``."""
        Y = check_batch(Y)
        if Y.shape[1] != self.n:
            raise ValueError(f"expected {self.n} columns, got {Y.shape[1]}")
        s = (self.father_design @ Y.T).T / self.n
        d = [(m @ Y.T).T / self.n for m in self.detail_design]
        return s, d

    def synthesize(self, s: np.ndarray, d: list) -> np.ndarray:
        """Reconstruction on the evaluation grid, ``(R, m)``."""
        if self._eval_points is None:
            raise ConfigurationError("no evaluation points set")
        out = (self.father_eval @ np.atleast_2d(s).T).T
        for m, dj in zip(self.detail_eval, d):
            out += (m @ np.atleast_2d(dj).T).T
        return out


def empirical_coefficients(sample, basis, J: int, q: int) -> CoefficientSet:
    """Riemann-sum coefficients of one sample."""
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    table = as_table(basis)
    design = WaveletDesign(table, sample.n, J, q)
    s, d = design.coefficients(sample.values)
    return CoefficientSet(design.J, design.q, table.N, s[0], tuple(x[0] for x in d))


def hard_threshold(d: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    keep = np.abs(d) > delta
    return np.where(keep, d, 0.0), keep


def soft_threshold(d: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    keep = np.abs(d) > delta
    return np.where(keep, np.sign(d) * (np.abs(d) - delta), 0.0), keep


_RULES = {"hard": hard_threshold, "soft": soft_threshold}


class TrendEstimate:
    """A fitted trend: values on the design plus an evaluator on ``[0, 1]``."""

    def __init__(self, evaluator: Callable, n: int, plan=None, coefficients: CoefficientSet | None = None,
                 method: str = "adaptive", sample: Sample | None = None):
        self._evaluator = evaluator
        self.n = n
        self.plan = plan
        self.coefficients = coefficients
        self.method = method
        self.sample = sample
        self.t = design_points(n)
        self.values = self(self.t)

    def __call__(self, t) -> np.ndarray:
        return self._evaluator(check_points(t))

    def to_csv(self, path, truth: Callable | None = None) -> Path:
        """Columns ``t, y, g_true, g_hat`` on the design points."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        y = self.sample.values if self.sample is not None else np.full(self.n, np.nan)
        g = truth(self.t) if truth is not None else np.full(self.n, np.nan)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "y", "g_true", "g_hat"])
            for row in zip(self.t, y, g, self.values):
                w.writerow([repr(float(v)) for v in row])
        return path


def _coefficient_evaluator(table: DyadicTable, coeffs: CoefficientSet, d_used: list) -> Callable:
    def evaluate(t):
        out = basis_matrix(table, FATHER, coeffs.J, t) @ coeffs.s_hat
        for j, dj in enumerate(d_used):
            if np.any(dj):
                out = out + basis_matrix(table, MOTHER, coeffs.J + j, t) @ dj
        return out

    return evaluate


def reconstruct(coeffs: CoefficientSet, thresholds, basis="s4", rule: str = "hard", plan=None,
                sample: Sample | None = None, n: int | None = None, method: str = "adaptive") -> TrendEstimate:
    """Threshold the detail coefficients level by level and synthesise.

    ``thresholds[j]`` applies to level ``j``; ``inf`` removes the level and
    ``0`` keeps it whole.
    """
    table = as_table(basis)
    if table.N != coeffs.N:
        raise ConfigurationError("basis does not match the coefficient set")
    th = np.broadcast_to(np.asarray(thresholds, dtype=float), (coeffs.q + 1,))
    if np.any(th < 0):
        raise ConfigurationError("thresholds must be nonnegative")
    shrink = _RULES[rule]
    used, kept = [], []
    for dj, delta in zip(coeffs.d_hat, th):
        v, k = shrink(dj, delta)
        used.append(v)
        kept.append(k)
    out = CoefficientSet(coeffs.J, coeffs.q, coeffs.N, coeffs.s_hat, coeffs.d_hat, tuple(kept))
    n = n or (sample.n if sample is not None else None) or 2 ** (coeffs.J + coeffs.q + 2)
    return TrendEstimate(_coefficient_evaluator(table, out, used), n, plan, out, method, sample)


def coefficient_variance(j: int, J: int, n: int, constants: LrdBasisConstants) -> float:
    """Leading-order ``Var(d_jk)``."""
    return level_noise_variance(J + j, n, constants)


def asymptotic_detail(trend, j: int, k, J: int, basis) -> np.ndarray | float:
    """Leading-order ``d_jk`` from the ``r``-th derivative at ``k / (N 2**(J+j))``."""
    table = as_table(basis)
    r, N, L = table.spec.m_psi, table.N, J + j
    nu = moment(table, MOTHER, r)
    t0 = np.asarray(k, dtype=float) / (N * 2.0**L)
    out = nu / math.factorial(r) * trend.derivative(t0, r) * N ** (-(2 * r + 1) / 2) * 2.0 ** (-(2 * r + 1) * L / 2)
    return float(out) if np.ndim(k) == 0 else out


def _resolution_for(table: DyadicTable, level: int, budget: float) -> DyadicTable:
    """Coarser table so that (number of shifts) x (grid size) stays within budget."""
    M = table.M
    while M > 6 and (table.N * 2.0**level) * table.N * 2.0**M > budget:
        M -= 1
    if M == table.M:
        return table
    name = table.spec.family_name
    return as_table(name if name in available_bases() else table.spec, M)


def exact_coefficients(g: Callable, basis, kind: str, level: int, shifts=None,
                       budget: float = 4e7) -> np.ndarray:
    """``int_0^1 g(t) w_{level,k}(t) dt`` by quadrature on the table grid.

    Basis functions overhanging ``[0, 1]`` are truncated to the interval.  At
    fine levels the table is coarsened so the work stays within ``budget``
    function evaluations.
    """
    table = _resolution_for(as_table(basis), level, budget)
    N = table.N
    kmin, kmax = shift_range(N, level)
    ks = np.arange(kmin, kmax + 1) if shifts is None else np.atleast_1d(np.asarray(shifts))
    scale = N * 2.0**level
    # Haar values are constant on each cell (x - step, x]: sample g mid-cell
    u = table.grid - (table.step / 2 if table.piecewise_constant else 0.0)
    wv = table.quadrature_weights * table.values(_kind(kind))
    nz = wv != 0
    u, wv = u[nz], wv[nz]
    out = np.empty(ks.size)
    chunk = max(1, int(2e6 // max(u.size, 1)))
    for start in range(0, ks.size, chunk):
        kk = ks[start:start + chunk]
        tt = (u[None, :] + kk[:, None]) / scale
        inside = (tt >= 0.0) & (tt <= 1.0)
        gv = np.where(inside, g(np.clip(tt, 0.0, 1.0)), 0.0)
        out[start:start + chunk] = gv @ wv
    return out / math.sqrt(scale)


def adaptive_plan(n: int, basis, model: NoiseModel, smooth: TrendSmoothness, J: int | None = None,
                  cap: str = "aliasing", M: int = DEFAULT_RESOLUTION) -> tuple[EstimatorPlan, LrdBasisConstants]:
    constants = basis_constants(basis, model, M)
    return plan_estimator(n, constants, smooth, J=J, cap=cap), constants


def adaptive_estimate(sample, model: NoiseModel, smooth: TrendSmoothness, basis="s4",
                      J: int | None = None, cap: str = "aliasing") -> TrendEstimate:
    """Resolve the plan from the closed-form rules and reconstruct."""
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    plan, _ = adaptive_plan(sample.n, basis, model, smooth, J=J, cap=cap)
    coeffs = empirical_coefficients(sample, basis, plan.J, plan.q)
    return reconstruct(coeffs, plan.thresholds, basis, "hard", plan, sample)


def mise_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``4n + 1`` equispaced points on ``[0, 1]`` with trapezoid weights."""
    m = 4 * n
    grid = np.linspace(0.0, 1.0, m + 1)
    w = np.full(m + 1, 1.0 / m)
    w[0] = w[-1] = 0.5 / m
    return grid, w


def empirical_mise(estimate, truth: Callable, n: int | None = None) -> float:
    """``int_0^1 (g - g_hat)^2`` by the trapezoid rule on ``4n + 1`` points."""
    n = n or estimate.n
    grid, w = mise_grid(n)
    err = np.asarray(truth(grid)) - np.asarray(estimate(grid))
    return float(np.dot(w, err**2))


def tail_energy(smooth: TrendSmoothness, J: int, q: int, constants: LrdBasisConstants) -> float:
    """Leading-order ``sum_{j>q} sum_k d_jk^2``."""
    r, N = constants.r, constants.N
    return (constants.nu_r**2 / math.factorial(r) ** 2 / (2.0 ** (2 * r) - 1) * N ** (-2.0 * r)
            * 2.0 ** (-2.0 * r * (J + q)) * smooth.integral_gr_sq)


def tail_energy_bruteforce(g: Callable, basis, J: int, q: int, extra_levels: int = 12,
                           interior_only: bool = False, rtol: float = 1e-7) -> float:
    """``sum_{j=q+1}^{q+extra} sum_k d_jk^2`` from quadrature coefficients.

    Stops early once a level adds less than ``rtol`` of the running total.
    ``interior_only`` drops shifts whose support leaves ``[0, 1]``.
    """
    table = as_table(basis)
    N = table.N
    total = 0.0
    for j in range(q + 1, q + extra_levels + 1):
        level = J + j
        d = exact_coefficients(g, table, MOTHER, level)
        if interior_only:
            lo, hi = shift_range(N, level)
            k = np.arange(lo, hi + 1)
            d = d[(k >= 0) & (k + N <= N * 2**level)]
        add = float(np.sum(d**2))
        total += add
        if add < rtol * total:
            break
    return total


class AdaptiveWaveletRegressor(RegressorMixin, BaseEstimator):
    """Hard-threshold wavelet trend estimator with closed-form tuning.

    The design is fixed at ``t_i = i/n``: ``X`` may be omitted or passed as
    those points.  ``trend`` names a registered trend whose smoothness
    functionals tune the plan; alternatively pass ``smoothness`` directly.
    """

    def __init__(self, basis="s4", d=0.2, innovation_variance=1.0, trend="sine", smoothness=None,
                 J=None, cap="aliasing"):
        self.basis = basis
        self.d = d
        self.innovation_variance = innovation_variance
        self.trend = trend
        self.smoothness = smoothness
        self.J = J
        self.cap = cap

    def _smoothness(self) -> TrendSmoothness:
        if self.smoothness is not None:
            if not isinstance(self.smoothness, TrendSmoothness):
                raise ConfigurationError("smoothness must be a TrendSmoothness")
            return self.smoothness
        if self.trend is None:
            raise ConfigurationError("either trend or smoothness is required")
        return default_smoothness(get_trend(self.trend), as_table(self.basis).spec.m_psi)

    def fit(self, X=None, y=None):
        if y is None:
            X, y = None, X
        y = check_series(y, min_length=4)
        n = check_design(X, y.size)
        self.model_ = NoiseModel(self.d, self.innovation_variance)
        self.table_ = as_table(self.basis)
        self.plan_, self.constants_ = adaptive_plan(n, self.basis, self.model_, self._smoothness(),
                                                    J=self.J, cap=self.cap)
        coeffs = empirical_coefficients(Sample(y), self.table_, self.plan_.J, self.plan_.q)
        self.estimate_ = reconstruct(coeffs, self.plan_.thresholds, self.table_, "hard", self.plan_, Sample(y))
        self.coefficients_ = self.estimate_.coefficients
        self.n_features_in_ = 1
        self.n_samples_ = n
        return self

    def predict(self, X=None):
        check_is_fitted(self, "estimate_")
        if X is None:
            return self.estimate_.values.copy()
        t = check_points(X, "X")
        if np.any((t < 0) | (t > 1)):
            raise ValueError("prediction points must lie in [0, 1]")
        return self.estimate_(t)
