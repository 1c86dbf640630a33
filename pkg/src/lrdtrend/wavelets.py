"""Compactly supported orthonormal wavelets on [0, N].

Father and mother wavelets are tabulated on the dyadic grid ``i / 2**M`` by
the cascade (two-scale refinement) iteration and linearly interpolated
elsewhere.  Scaled basis functions follow the ``[0, N]`` support convention::

    phi_Jk(t) = sqrt(N) 2**(J/2) phi(N 2**J t - k)
    psi_jk(t) = sqrt(N) 2**((J+j)/2) psi(N 2**(J+j) t - k)

with shifts ``k = -N+1 .. N 2**level - 1``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .exceptions import InvalidWaveletError

DEFAULT_RESOLUTION = 12
FATHER = "father"
MOTHER = "mother"


def tol(M: int) -> float:
    """Grid tolerance ``C * 2**(-M/2)`` with ``C = 1``."""
    return 2.0 ** (-M / 2.0)


def _kind(kind: str) -> str:
    k = str(kind).lower()
    if k in ("father", "phi", "scaling"):
        return FATHER
    if k in ("mother", "psi", "wavelet"):
        return MOTHER
    raise ValueError(f"kind must be 'father' or 'mother', got {kind!r}")


@dataclass(frozen=True)
class WaveletSpec:
    """A two-scale filter ``h`` with ``phi(x) = sum_k h_k phi(2x - k)``.

    The filter is normalised to ``sum(h) == 2``.
    """

    family_name: str
    m_psi: int
    support_length: int
    refinement_coefficients: tuple
    family: str = "daubechies"

    def __post_init__(self):
        h = np.asarray(self.refinement_coefficients, dtype=float)
        object.__setattr__(self, "refinement_coefficients", tuple(float(x) for x in h))
        if self.m_psi < 1:
            raise InvalidWaveletError("m_psi must be >= 1")
        if abs(h.sum() - 2.0) > 1e-12:
            raise InvalidWaveletError(f"filter must sum to 2, sums to {h.sum()!r}")
        if len(h) != self.support_length + 1:
            raise InvalidWaveletError("filter length must equal support_length + 1")
        if self.family == "haar" and self.support_length != 1:
            raise InvalidWaveletError("Haar support length must be 1")
        if self.family in ("daubechies", "symmlet") and self.support_length != 2 * self.m_psi - 1:
            raise InvalidWaveletError("Daubechies support length must be 2*m_psi - 1")

    @property
    def N(self) -> int:
        return self.support_length

    @property
    def h(self) -> np.ndarray:
        return np.asarray(self.refinement_coefficients)

    @property
    def g(self) -> np.ndarray:
        """Mother-wavelet filter ``g_k = (-1)**k h_{N-k}``."""
        h = self.h
        k = np.arange(len(h))
        return (-1.0) ** k * h[::-1]


def daubechies_filter(p: int, least_asymmetric: bool = False) -> np.ndarray:
    """Daubechies filter with ``p`` vanishing moments, normalised to sum 2.

    Spectral factorisation of the Daubechies polynomial.  With
    ``least_asymmetric`` the root selection minimising the deviation of the
    phase response from linear phase is returned (symmlets).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    coeffs = [math.comb(p - 1 + k, k) for k in range(p)]
    yroots = np.roots(coeffs[::-1]) if p > 1 else np.array([])

    groups = []
    used: set[int] = set()
    for i, y in enumerate(yroots):
        if i in used:
            continue
        b = 2.0 - 4.0 * y
        z = (b + np.sqrt(b * b - 4.0 + 0j)) / 2.0
        pair = (z, 1.0 / z)
        if abs(y.imag) < 1e-10:
            groups.append([(pair[0],), (pair[1],)])
            used.add(i)
        else:
            j = next(j for j in range(len(yroots))
                     if j not in used and j != i and abs(yroots[j] - np.conj(y)) < 1e-8)
            used |= {i, j}
            groups.append([(pair[0], np.conj(pair[0])), (pair[1], np.conj(pair[1]))])

    def build(choice):
        roots = [-1.0] * p
        for grp, c in zip(groups, choice):
            roots += list(grp[c])
        h = np.real(np.poly(roots))
        return 2.0 * h / h.sum()

    if not least_asymmetric:
        choice = [0 if abs(grp[0][0]) < 1 else 1 for grp in groups]
        return build(choice)

    w = np.linspace(0.0, np.pi, 512)[1:-1]
    design = np.vstack([w, np.ones_like(w)]).T
    best = None
    for choice in itertools.product((0, 1), repeat=len(groups)):
        h = build(choice)
        phase = np.unwrap(np.angle(np.polyval(h[::-1], np.exp(-1j * w))))
        resid = phase - design @ np.linalg.lstsq(design, phase, rcond=None)[0]
        cost = float(np.max(np.abs(resid)))
        if best is None or cost < best[0] - 1e-12:
            best = (cost, h)
    return best[1]


def count_vanishing_moments(h, atol: float = 1e-8) -> int:
    """Number of zeros of the filter's frequency response at pi."""
    h = np.asarray(h, dtype=float)
    k = np.arange(len(h), dtype=float)
    sign = (-1.0) ** k
    m = 0
    while m < len(h) and abs(np.sum(sign * k**m * h)) < atol * max(1.0, np.sum(np.abs(k**m * h))):
        m += 1
    return m


def haar_spec() -> WaveletSpec:
    return WaveletSpec("haar", 1, 1, (1.0, 1.0), family="haar")


def daubechies_spec(p: int, least_asymmetric: bool = True, name: str | None = None) -> WaveletSpec:
    if p == 1:
        return haar_spec()
    h = daubechies_filter(p, least_asymmetric=least_asymmetric)
    family = "symmlet" if least_asymmetric else "daubechies"
    return WaveletSpec(name or f"s{2 * p}", p, 2 * p - 1, tuple(h), family=family)


_REGISTRY = {
    "haar": lambda: haar_spec(),
    "s4": lambda: daubechies_spec(2, name="s4"),
    "s6": lambda: daubechies_spec(3, name="s6"),
    "s8": lambda: daubechies_spec(4, name="s8"),
    "s10": lambda: daubechies_spec(5, name="s10"),
}


def available_bases() -> list[str]:
    return list(_REGISTRY)


@lru_cache(maxsize=None)
def get_spec(name: str) -> WaveletSpec:
    """Registered basis by name: ``haar``, ``s4``, ``s6``, ``s8``, ``s10``."""
    try:
        return _REGISTRY[name.lower()]()
    except KeyError:
        raise KeyError(f"unknown basis {name!r}; available: {available_bases()}") from None


def load_filter_file(path, name: str | None = None) -> WaveletSpec:
    """Read refinement coefficients from a plain-text column file.

    One coefficient per line; blank lines and ``#`` comments are ignored.
    Coefficients summing to ``sqrt(2)`` (the unit-norm convention) are
    rescaled to sum 2.
    """
    path = Path(path)
    values = []
    for line in path.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            values.append(float(line.split()[0]))
    h = np.asarray(values)
    if h.size < 2:
        raise InvalidWaveletError("filter file must contain at least two coefficients")
    if abs(h.sum() - math.sqrt(2.0)) < 1e-8:
        h = h * math.sqrt(2.0)
    if abs(h.sum() - 2.0) < 1e-9:
        h = h * (2.0 / h.sum())
    m = max(count_vanishing_moments(h), 1)
    return WaveletSpec(name or path.stem, m, len(h) - 1, tuple(h), family="custom")


@dataclass(frozen=True, eq=False)
class DyadicTable:
    """Father/mother values on the grid ``i / 2**M`` of ``[0, N]``.

    ``piecewise_constant`` marks the Haar table, whose values are exact under
    the left-open convention ``phi = 1`` on ``(0, 1]``; for it evaluation uses
    the value at the right end of the containing cell instead of linear
    interpolation.
    """

    spec: WaveletSpec
    resolution_exponent: int
    phi_values: np.ndarray
    psi_values: np.ndarray
    quadrature_weights: np.ndarray
    piecewise_constant: bool = False
    _grid: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.phi_values, self.psi_values, self.quadrature_weights):
            arr.setflags(write=False)
        object.__setattr__(self, "_grid", np.arange(self.phi_values.size) / 2.0**self.M)

    @property
    def M(self) -> int:
        return self.resolution_exponent

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def step(self) -> float:
        return 2.0 ** (-self.M)

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    def values(self, kind: str) -> np.ndarray:
        return self.phi_values if _kind(kind) == FATHER else self.psi_values

    def evaluate(self, kind: str, x) -> np.ndarray:
        """phi(x) or psi(x); zero outside ``[0, N]``."""
        vals = self.values(kind)
        x = np.asarray(x, dtype=float)
        pos = x * 2.0**self.M
        inside = (x >= 0.0) & (x <= self.N)
        last = vals.size - 1
        if self.piecewise_constant:
            idx = np.clip(np.ceil(pos - 1e-9).astype(np.int64), 0, last)
            out = vals[idx]
        else:
            i = np.clip(np.floor(pos).astype(np.int64), 0, last - 1)
            frac = pos - i
            out = vals[i] * (1.0 - frac) + vals[i + 1] * frac
        return np.where(inside, out, 0.0)

    def cell_values(self, kind: str) -> np.ndarray:
        """Piecewise-constant representation on the ``N 2**M`` grid cells."""
        vals = self.values(kind)
        if self.piecewise_constant:
            return vals[1:].copy()
        return 0.5 * (vals[:-1] + vals[1:])

    def integrate(self, f_values) -> float:
        return float(np.dot(self.quadrature_weights, f_values))


def _trapezoid_weights(size: int, step: float) -> np.ndarray:
    w = np.full(size, step)
    w[0] = w[-1] = step / 2.0
    return w


def _check_orthonormal_filter(h: np.ndarray):
    L = len(h)
    for m in range(0, (L + 1) // 2):
        s = float(np.dot(h[2 * m:], h[: L - 2 * m]))
        target = 2.0 if m == 0 else 0.0
        if abs(s - target) > 1e-8:
            raise InvalidWaveletError(
                f"filter is not orthonormal: sum h_k h_(k+{2 * m}) = {s:.3g}, expected {target}")


def _integer_values(h: np.ndarray) -> np.ndarray:
    N = len(h) - 1
    A = np.zeros((N + 1, N + 1))
    for i in range(N + 1):
        for j in range(N + 1):
            k = 2 * i - j
            if 0 <= k <= N:
                A[i, j] = h[k]
    w, v = np.linalg.eig(A)
    dist = np.abs(w - 1.0)
    idx = int(np.argmin(dist))
    if dist[idx] > 1e-8 or np.sum(dist < 1e-8) > 1:
        raise InvalidWaveletError("refinement matrix has no unique unit eigenvalue")
    p = np.real(v[:, idx])
    if abs(p.sum()) < 1e-12:
        raise InvalidWaveletError("cascade does not converge: eigenvector sums to zero")
    return p / p.sum()


def cascade_evaluate(spec: WaveletSpec, M: int = DEFAULT_RESOLUTION) -> DyadicTable:
    """Tabulate phi and psi at every dyadic point ``i / 2**M`` in ``[0, N]``.

    Values at integers come from the unit eigenvector of the refinement
    matrix; each halving of the grid then applies the two-scale equation
    exactly, so the table satisfies the refinement equation at grid points up
    to rounding.  Haar is tabulated from its closed form.
    """
    if M < 6:
        raise ValueError("resolution exponent M must be >= 6")
    N = spec.N
    size = N * 2**M + 1
    step = 2.0**-M

    if spec.family == "haar":
        x = np.arange(size) * step
        phi = ((x > 0) & (x <= 1)).astype(float)
        psi = np.where((x > 0) & (x <= 0.5), 1.0, np.where((x > 0.5) & (x <= 1), -1.0, 0.0))
        weights = np.full(size, step)
        weights[0] = 0.0  # right-endpoint rule: exact for left-open step functions
        return DyadicTable(spec, M, phi, psi, weights, piecewise_constant=True)

    h = spec.h
    _check_orthonormal_filter(h)
    vals = _integer_values(h)
    for m in range(1, M + 1):
        new = np.empty(N * 2**m + 1)
        new[::2] = vals
        odd = np.arange(1, N * 2**m, 2)
        acc = np.zeros(odd.size)
        half = 2 ** (m - 1)
        for k, hk in enumerate(h):
            idx = odd - k * half
            ok = (idx >= 0) & (idx <= N * half)
            acc[ok] += hk * vals[idx[ok]]
        new[1::2] = acc
        vals = new
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals)) > 1e3:
        raise InvalidWaveletError("cascade iteration diverged")

    psi = np.zeros(size)
    i = np.arange(size)
    for k, gk in enumerate(spec.g):
        idx = 2 * i - k * 2**M
        ok = (idx >= 0) & (idx < size)
        psi[ok] += gk * vals[idx[ok]]
    return DyadicTable(spec, M, vals, psi, _trapezoid_weights(size, step))


@lru_cache(maxsize=None)
def get_table(name: str, M: int = DEFAULT_RESOLUTION) -> DyadicTable:
    """Cached table for a registered basis."""
    return cascade_evaluate(get_spec(name), M)


def as_table(basis, M: int = DEFAULT_RESOLUTION) -> DyadicTable:
    """Accept a basis name, a :class:`WaveletSpec` or a :class:`DyadicTable`."""
    if isinstance(basis, DyadicTable):
        return basis
    if isinstance(basis, WaveletSpec):
        return cascade_evaluate(basis, M)
    return get_table(str(basis), M)


def shift_range(N: int, level: int) -> tuple[int, int]:
    """Admissible shifts ``(k_min, k_max)`` at a given level (inclusive)."""
    return -N + 1, N * 2**level - 1


def eval_scaled(table: DyadicTable, kind: str, level: int, k: int, t) -> np.ndarray | float:
    """Evaluate ``sqrt(N) 2**(level/2) w(N 2**level t - k)``.

    ``w`` is phi for ``kind='father'`` and psi for ``kind='mother'``; for the
    mother wavelet ``level`` is the absolute level ``J + j``.
    """
    N = table.N
    kmin, kmax = shift_range(N, level)
    if not kmin <= k <= kmax:
        raise IndexError(f"shift {k} outside [{kmin}, {kmax}] at level {level}")
    t_arr = np.asarray(t, dtype=float)
    scale = N * 2.0**level
    out = math.sqrt(scale) * table.evaluate(kind, scale * t_arr - k)
    return float(out) if np.ndim(t) == 0 else out


def moment(table: DyadicTable, kind: str = MOTHER, order: int = 0) -> float:
    """``int_0^N t**order w(t) dt`` by grid quadrature."""
    if order < 0:
        raise ValueError("order must be >= 0")
    return table.integrate(table.grid**order * table.values(kind))


def refinement_residual(table: DyadicTable, where: str = "grid") -> float:
    """Max violation of ``phi(x) = sum_k h_k phi(2x - k)``.

    ``where='grid'`` checks the tabulated points; ``where='midpoints'`` checks
    cell midpoints through the interpolant and so measures how well the
    interpolated table satisfies the equation between grid points.
    """
    h = table.spec.h
    if where == "grid":
        x = table.grid
    elif where == "midpoints":
        x = table.grid[:-1] + table.step / 2.0
    else:
        raise ValueError("where must be 'grid' or 'midpoints'")
    lhs = table.evaluate(FATHER, x)
    rhs = sum(hk * table.evaluate(FATHER, 2.0 * x - k) for k, hk in enumerate(h))
    return float(np.max(np.abs(lhs - rhs)))


def partition_of_unity_error(table: DyadicTable) -> float:
    """Max ``|sum_k phi(x - k) - 1|`` over grid points of ``[0, 1]``."""
    step = 2**table.M
    x = table.grid[: step + 1]
    total = sum(table.evaluate(FATHER, x + k) for k in range(table.N + 1))
    return float(np.max(np.abs(total - 1.0)))
