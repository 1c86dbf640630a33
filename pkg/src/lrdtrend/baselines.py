"""Comparison estimators: minimax soft thresholding and rectangular-kernel
smoothing with the long-memory optimal bandwidth."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
from scipy.special import gammaln
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .constants import LrdBasisConstants, TrendSmoothness, level_noise_variance
from .estimator import Sample, TrendEstimate, adaptive_plan, empirical_coefficients, reconstruct
from .exceptions import ConfigurationError, DomainError
from .noise import NoiseModel
from .trends import default_smoothness, get_trend
from .wavelets import as_table
from ._validation import check_batch, check_design, check_points, check_series


def minimax_thresholds(n: int, J: int, q: int, constants: LrdBasisConstants) -> np.ndarray:
    """``sqrt(2 ln n) * sigma_j`` for ``j = 0..q``."""
    lam = math.sqrt(2.0 * math.log(n))
    return np.array([lam * math.sqrt(level_noise_variance(J + j, n, constants)) for j in range(q + 1)])


def soft_threshold_estimate(sample, basis, J: int, q: int, constants: LrdBasisConstants) -> TrendEstimate:
    """Soft shrinkage of every detail level at the level-scaled universal threshold."""
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    coeffs = empirical_coefficients(sample, basis, J, q)
    th = minimax_thresholds(sample.n, J, q, constants)
    return reconstruct(coeffs, th, basis, "soft", sample=sample, method="minimax")


def beta_of_d(d: float) -> float:
    """``2**(2d) Gamma(1-2d) sin(pi d) / (d (2d+1))``."""
    d = float(d)
    if not 0.0 < d < 0.5:
        raise DomainError(f"d must lie in (0, 0.5), got {d}")
    return 2.0 ** (2 * d) * math.exp(gammaln(1 - 2 * d)) * math.sin(math.pi * d) / (d * (2 * d + 1))


def optimal_bandwidth_constant(d: float, C_f: float, I_g2: float) -> float:
    if not I_g2 > 0:
        raise DomainError("I(g'') must be positive")
    if not C_f > 0:
        raise DomainError("C_f must be positive")
    return (9.0 * (1 - 2 * d) * beta_of_d(d) * C_f / I_g2) ** (1.0 / (5 - 2 * d))


def optimal_bandwidth(n: int, d: float, C_f: float, I_g2: float) -> float:
    """``C_opt n**((2d-1)/(5-2d))`` clamped to ``(0, 1/2]``."""
    if n < 1:
        raise DomainError("n must be positive")
    b = optimal_bandwidth_constant(d, C_f, I_g2) * float(n) ** ((2 * d - 1) / (5 - 2 * d))
    return min(b, 0.5)


@dataclass(frozen=True)
class KernelPlan:
    d: float
    C_f: float
    I_g2: float
    bandwidth: float

    def __post_init__(self):
        if not 0.0 < self.bandwidth <= 0.5:
            raise ConfigurationError(f"bandwidth must lie in (0, 1/2], got {self.bandwidth}")

    @classmethod
    def optimal(cls, n: int, model: NoiseModel, I_g2: float) -> "KernelPlan":
        return cls(model.d, model.C_f, I_g2, optimal_bandwidth(n, model.d, model.C_f, I_g2))


_EDGE = 1e-12


def _window(n: int, b: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inclusive design-index range ``[lo, hi]`` (1-based) with ``|t - i/n| <= b``."""
    lo = np.maximum(np.ceil(n * (t - b) - _EDGE), 1).astype(np.int64)
    hi = np.minimum(np.floor(n * (t + b) + _EDGE), n).astype(np.int64)
    return lo, hi


def kernel_weights(n: int, bandwidth: float, t) -> sparse.csr_matrix:
    """Rows of the renormalised rectangular-kernel smoother."""
    t = check_points(t)
    lo, hi = _window(n, bandwidth, t)
    counts = np.maximum(hi - lo + 1, 0)
    if np.any(counts == 0):
        raise ConfigurationError("bandwidth too small: some points see no design point")
    rows = np.repeat(np.arange(t.size), counts)
    cols = np.concatenate([np.arange(a - 1, b) for a, b in zip(lo, hi)])
    vals = np.repeat(1.0 / counts, counts)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(t.size, n))


def kernel_smooth(Y, bandwidth: float, t) -> np.ndarray:
    """Window means of each row of ``Y`` at points ``t`` (cumulative sums)."""
    Y = check_batch(Y)
    n = Y.shape[1]
    t = check_points(t)
    lo, hi = _window(n, bandwidth, t)
    counts = hi - lo + 1
    if np.any(counts <= 0):
        raise ConfigurationError("bandwidth too small: some points see no design point")
    cs = np.concatenate([np.zeros((Y.shape[0], 1)), np.cumsum(Y, axis=1)], axis=1)
    return (cs[:, hi] - cs[:, lo - 1]) / counts


def kernel_estimate(sample, plan: KernelPlan) -> TrendEstimate:
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    y = sample.values

    def evaluate(t):
        return kernel_smooth(y, plan.bandwidth, t)[0]

    return TrendEstimate(evaluate, sample.n, plan, method="kernel", sample=sample)


class _TrendRegressor(RegressorMixin, BaseEstimator):
    def _smoothness(self) -> TrendSmoothness:
        if getattr(self, "smoothness", None) is not None:
            return self.smoothness
        if self.trend is None:
            raise ConfigurationError("either trend or smoothness is required")
        return default_smoothness(get_trend(self.trend), as_table(self.basis).spec.m_psi)

    def predict(self, X=None):
        check_is_fitted(self, "estimate_")
        if X is None:
            return self.estimate_.values.copy()
        t = check_points(X, "X")
        if np.any((t < 0) | (t > 1)):
            raise ValueError("prediction points must lie in [0, 1]")
        return self.estimate_(t)

    @staticmethod
    def _xy(X, y):
        if y is None:
            X, y = None, X
        y = check_series(y, min_length=4)
        return check_design(X, y.size), y


class MinimaxWaveletRegressor(_TrendRegressor):
    """Soft-threshold wavelet estimator on the adaptive estimator's level range."""

    def __init__(self, basis="s4", d=0.2, innovation_variance=1.0, trend="sine", smoothness=None, cap="aliasing"):
        self.basis = basis
        self.d = d
        self.innovation_variance = innovation_variance
        self.trend = trend
        self.smoothness = smoothness
        self.cap = cap

    def fit(self, X=None, y=None):
        n, y = self._xy(X, y)
        model = NoiseModel(self.d, self.innovation_variance)
        plan, constants = adaptive_plan(n, self.basis, model, self._smoothness(), cap=self.cap)
        self.levels_ = (plan.J, plan.q)
        self.estimate_ = soft_threshold_estimate(y, as_table(self.basis), plan.J, plan.q, constants)
        self.thresholds_ = minimax_thresholds(n, plan.J, plan.q, constants)
        self.n_features_in_ = 1
        return self


class KernelTrendRegressor(_TrendRegressor):
    """Rectangular-kernel smoother; ``bandwidth=None`` uses the optimal one."""

    def __init__(self, d=0.2, innovation_variance=1.0, trend="sine", I_g2=None, bandwidth=None):
        self.d = d
        self.innovation_variance = innovation_variance
        self.trend = trend
        self.I_g2 = I_g2
        self.bandwidth = bandwidth

    def _curvature(self) -> float:
        if self.I_g2 is not None:
            return float(self.I_g2)
        return self._smoothness_r2().integral_gr_sq

    def _smoothness_r2(self) -> TrendSmoothness:
        if self.trend is None:
            raise ConfigurationError("either trend or I_g2 is required")
        return default_smoothness(get_trend(self.trend), r=2)

    def fit(self, X=None, y=None):
        n, y = self._xy(X, y)
        model = NoiseModel(self.d, self.innovation_variance)
        if self.bandwidth is None:
            plan = KernelPlan.optimal(n, model, self._curvature())
        else:
            plan = KernelPlan(model.d, model.C_f, float(self.I_g2 or float("nan")), float(self.bandwidth))
        self.plan_ = plan
        self.estimate_ = kernel_estimate(y, plan)
        self.n_features_in_ = 1
        return self
