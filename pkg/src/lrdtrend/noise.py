"""FARIMA(0, d, 0) Gaussian noise: exact second-order theory and simulation."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .exceptions import DomainError, NumericalError
from ._validation import check_int


@dataclass(frozen=True)
class NoiseModel:
    """FARIMA(0, d, 0) with innovation variance ``sigma2``.

    ``d = 0`` is accepted as the white-noise limit; the long-memory constants
    are only defined for ``0 < d < 1/2``.
    """

    d: float
    innovation_variance: float = 1.0

    def __post_init__(self):
        d = float(self.d)
        if not 0.0 <= d < 0.5:
            raise DomainError(f"d must lie in [0, 0.5), got {d}")
        if not self.innovation_variance > 0:
            raise DomainError("innovation_variance must be positive")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "innovation_variance", float(self.innovation_variance))

    @property
    def alpha(self) -> float:
        return 1.0 - 2.0 * self.d

    @property
    def C_gamma(self) -> float:
        return c_gamma(self)

    @property
    def C_f(self) -> float:
        return self.innovation_variance / (2.0 * math.pi)

    def autocov(self, k) -> np.ndarray | float:
        return autocov(self, k)


@dataclass(frozen=True, eq=False)
class NoisePath:
    n: int
    values: np.ndarray
    seed: int

    def __post_init__(self):
        self.values.setflags(write=False)

    def to_csv(self, path) -> Path:
        return write_column_csv(path, self.values, header="xi")


def autocov(model: NoiseModel, k) -> np.ndarray | float:
    """Exact autocovariance ``gamma(k)`` from Gamma-function ratios.

    Computed as ``gamma(0) * exp(lgamma(k+d) - lgamma(k+1-d) - lgamma(d) + lgamma(1-d))``
    so large lags do not overflow.
    """
    k_arr = np.abs(np.asarray(k))
    if np.any(k_arr != np.floor(k_arr)):
        raise ValueError("lags must be integers")
    d, s2 = model.d, model.innovation_variance
    if d == 0.0:
        out = np.where(k_arr == 0, s2, 0.0)
    else:
        g0 = s2 * math.exp(gammaln(1 - 2 * d) - 2 * gammaln(1 - d))
        kf = np.maximum(k_arr.astype(float), 1.0)
        # lgamma(d) overflows for subnormal d, so lag 0 is kept out of the ratio
        with np.errstate(invalid="ignore"):
            ratio = np.exp(gammaln(kf + d) - gammaln(kf + 1 - d) - gammaln(d) + gammaln(1 - d))
        out = g0 * np.where(k_arr == 0, 1.0, ratio)
    return float(out) if np.ndim(k) == 0 else out


def c_gamma(model: NoiseModel) -> float:
    """``C_gamma`` in ``gamma(k) ~ C_gamma |k|**(-alpha)``."""
    d = model.d
    if d <= 0.0:
        raise DomainError("C_gamma is only defined for d > 0")
    return model.innovation_variance * math.exp(gammaln(1 - 2 * d) - gammaln(d) - gammaln(1 - d))


def spectral_density(model: NoiseModel, lam) -> np.ndarray:
    """``f(lam) = sigma2 / (2 pi) |2 sin(lam/2)|**(-2d)``."""
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore"):
        return model.C_f * np.abs(2.0 * np.sin(lam / 2.0)) ** (-2.0 * model.d)


def _embedding_eigenvalues(model: NoiseModel, n: int) -> np.ndarray:
    m = n
    for _ in range(2):
        g = autocov(model, np.arange(m + 1))
        row = np.concatenate([g, g[-2:0:-1]])
        lam = np.fft.rfft(row).real
        if lam.min() >= -1e-10 * lam.max():
            return np.fft.fft(row).real.clip(min=0.0)
        m *= 2
    raise NumericalError("circulant embedding is not nonnegative definite")


class CirculantSampler:
    """Reusable Davies-Harte sampler for a fixed ``(model, n)``."""

    def __init__(self, model: NoiseModel, n: int):
        self.model = model
        self.n = check_int(n, "n", 2)
        lam = _embedding_eigenvalues(model, self.n)
        self._size = lam.size
        self._scale = np.sqrt(lam / lam.size)

    def draw(self, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(self._size) + 1j * rng.standard_normal(self._size)
        return np.fft.fft(self._scale * z)[: self.n].real

    def draw_many(self, replicates: int, seed: int) -> np.ndarray:
        """Row ``i`` uses the stream ``default_rng(seed + i)``."""
        out = np.empty((replicates, self.n))
        for i in range(replicates):
            out[i] = self.draw(seed + i)
        return out


def simulate(model: NoiseModel, n: int, seed: int) -> NoisePath:
    """One exact Gaussian path of length ``n``, deterministic in ``seed``."""
    seed = check_int(seed, "seed")
    return NoisePath(n, CirculantSampler(model, n).draw(seed), seed)


def simulate_many(model: NoiseModel, n: int, replicates: int, seed: int) -> np.ndarray:
    """``(replicates, n)`` array; replicate ``i`` is ``simulate(model, n, seed + i)``."""
    replicates = check_int(replicates, "replicates", 1)
    return CirculantSampler(model, n).draw_many(replicates, check_int(seed, "seed"))


def write_column_csv(path, values, header: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([header])
        for v in np.asarray(values).ravel():
            w.writerow([repr(float(v))])
    return path
