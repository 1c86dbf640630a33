"""Test trends on [0, 1] with exact derivatives and smoothness functionals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp
from scipy import integrate

from .constants import TrendSmoothness
from .exceptions import ConfigurationError, DivergentIntegralError, DomainError

_t = sp.Symbol("t", real=True)
MAX_ORDER = 5  # largest vanishing-moment count among registered bases
SELF_CHECK_RTOL = 1e-4


def _lambdify(expr) -> Callable:
    f = sp.lambdify(_t, expr, "numpy")

    def call(t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(f(t), dtype=float), t.shape).copy()

    return call


@dataclass(frozen=True)
class Piece:
    """A smooth branch valid on ``(lo, hi)``."""

    lo: float
    hi: float
    expr: sp.Expr
    derivatives: tuple = field(default=(), repr=False)

    @classmethod
    def build(cls, lo, hi, expr):
        ders = tuple(_lambdify(sp.diff(expr, _t, k)) for k in range(MAX_ORDER + 1))
        return cls(float(lo), float(hi), expr, ders)


class TrendFunction:
    """A trend ``g`` on ``[0, 1]`` built from smooth sympy branches.

    ``value`` decides point values (so indicator conventions at the
    breakpoints are explicit); derivatives up to ``MAX_ORDER`` come from the
    branch containing ``t`` and are undefined (NaN) at breakpoints.
    """

    def __init__(self, name: str, pieces, value: Callable | None = None, r: int = 2,
                 cstar_bounds: tuple | None = None, jumps=(), params: dict | None = None):
        self.name = name
        self.pieces = tuple(Piece.build(*p) for p in pieces)
        self._value = value
        self.r = r
        self.cstar_bounds = cstar_bounds
        self.jumps = tuple(jumps)
        self.params = dict(params or {})
        self.breaks = tuple(sorted({p.lo for p in self.pieces} | {p.hi for p in self.pieces}))
        self._self_check()

    def __repr__(self):
        extra = "".join(f", {k}={v!r}" for k, v in self.params.items())
        return f"TrendFunction({self.name!r}{extra})"

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self._value is not None:
            return self._value(t)
        return self._by_piece(t, 0)

    def _by_piece(self, t: np.ndarray, order: int) -> np.ndarray:
        out = np.full(t.shape, np.nan)
        for i, p in enumerate(self.pieces):
            last = i == len(self.pieces) - 1
            first = i == 0
            mask = ((t > p.lo) | (first & (t >= p.lo))) & ((t < p.hi) | (last & (t <= p.hi)))
            if np.any(mask):
                out[mask] = p.derivatives[order](t[mask])
        return out

    def derivative(self, t, order: int | None = None) -> np.ndarray:
        order = self.r if order is None else order
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"derivative order must be in 0..{MAX_ORDER}")
        t = np.asarray(t, dtype=float)
        out = self._by_piece(t, order)
        if order > 0:
            inner = [b for b in self.breaks if 0.0 < b < 1.0]
            for b in inner:
                out = np.where(np.isclose(t, b, rtol=0, atol=1e-15), np.nan, out)
        return out

    def _segments(self, a: float, b: float):
        cuts = [a] + [x for x in self.breaks if a < x < b] + [b]
        return list(zip(cuts[:-1], cuts[1:]))

    def integral_sq_derivative(self, order: int | None = None, bounds=(0.0, 1.0)) -> float:
        """``int_a^b (g^(order))^2`` with a divergence check at the bounds."""
        order = self.r if order is None else order
        a, b = bounds
        total = 0.0
        for lo, hi in self._segments(a, b):
            piece = self._piece_at(0.5 * (lo + hi))
            total += _convergent_integral(lambda x: piece.derivatives[order](x) ** 2, lo, hi)
        return total

    def _piece_at(self, x: float) -> Piece:
        for p in self.pieces:
            if p.lo <= x <= p.hi:
                return p
        raise DomainError(f"no branch covers t={x}")

    def smoothness(self, r: int | None = None, bounds=(0.0, 1.0), modified: bool = False) -> TrendSmoothness:
        r = self.r if r is None else r
        a, b = bounds
        grid = np.linspace(a, b, 20001)[1:-1]
        vals = self.derivative(grid, r)
        return TrendSmoothness(r, self.integral_sq_derivative(r, (a, b)),
                               float(np.nanmax(vals**2)), (a, b), modified)

    def _self_check(self):
        """Compare symbolic derivatives with finite differences of ``g``."""
        probe = np.linspace(0.05, 0.95, 37)
        probe = probe[np.all(np.abs(probe[:, None] - np.array(self.breaks)[None, :]) > 0.02, axis=1)]
        probe = probe[np.all(np.abs(probe[:, None] - np.array(self.jumps or [2.0])[None, :]) > 0.02, axis=1)]
        h = 1e-6
        for order in (1, 2):
            lower = self if order == 1 else (lambda x: self.derivative(x, 1))
            fd = (lower(probe + h) - lower(probe - h)) / (2 * h)
            exact = self.derivative(probe, order)
            scale = max(1.0, float(np.max(np.abs(exact))))
            if np.max(np.abs(fd - exact)) > SELF_CHECK_RTOL * scale:
                raise ConfigurationError(f"{self.name}: derivative oracle of order {order} disagrees "
                                         "with finite differences")


def _convergent_integral(f: Callable, lo: float, hi: float) -> float:
    """Integrate ``f`` on ``[lo, hi]``; reject integrals that grow without bound.

    Finite endpoints with finite integrand are integrated directly.  An
    integrand that is infinite or huge at an endpoint is integrated on
    shrinking cut-offs ``[lo + eps, hi - eps]``; if halving ``eps`` keeps
    adding a non-vanishing fraction the integral is declared divergent.
    """
    def quad(a, b):
        return integrate.quad(f, a, b, limit=500, epsabs=0.0, epsrel=1e-10)[0]

    with np.errstate(all="ignore"):
        ends = np.array([f(np.array(lo)), f(np.array(hi))], dtype=float)
    mid = quad(lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo))
    if np.all(np.isfinite(ends)) and np.max(np.abs(ends)) < 1e6 * max(1.0, abs(mid)):
        base = quad(lo, hi)
        # a finite endpoint value can still hide a non-integrable neighbourhood
        eps = 1e-6 * (hi - lo)
        edge = quad(lo, lo + eps) + quad(hi - eps, hi)
        if np.isfinite(base) and edge < 1e-3 * max(base, 1e-300):
            return base
    width = hi - lo
    values = []
    for k in range(4, 30, 2):
        eps = width * 2.0**-k
        values.append(quad(lo + eps, hi - eps))
    grow = [values[i + 1] - values[i] for i in range(len(values) - 1)]
    if grow[-1] > 1e-6 * values[-1] and grow[-1] >= 0.5 * grow[-2]:
        raise DivergentIntegralError(f"integral on [{lo}, {hi}] grows without bound as the bounds widen")
    return values[-1]


def sine(amplitude: float = 10.0) -> TrendFunction:
    return TrendFunction("sine", [(0, 1, amplitude * sp.sin(4 * sp.pi * _t))], params={"amplitude": amplitude})


def jumpsine(delta: float = 10.0) -> TrendFunction:
    """``10 sin(4 pi t) + delta * I{5/8 < t < 7/8}``."""
    s = 10 * sp.sin(4 * sp.pi * _t)

    def value(t):
        return 10.0 * np.sin(4 * np.pi * t) + delta * ((t > 5 / 8) & (t < 7 / 8))

    return TrendFunction("jumpsine", [(0, 5 / 8, s), (5 / 8, 7 / 8, s + delta), (7 / 8, 1, s)],
                         value=value, jumps=(5 / 8, 7 / 8), params={"delta": delta})


def sharp() -> TrendFunction:
    """``10 (exp(min(t, 1 - t)) - 1)``, a kink at ``t = 1/2``."""
    def value(t):
        return 10.0 * (np.exp(np.minimum(t, 1.0 - t)) - 1.0)

    return TrendFunction("sharp", [(0, 0.5, 10 * (sp.exp(_t) - 1)), (0.5, 1, 10 * (sp.exp(1 - _t) - 1))],
                         value=value)


DOPPLER_BOUNDS = (0.1, 0.95)


def doppler() -> TrendFunction:
    expr = 10 * sp.sqrt(_t * (1 - _t)) * sp.sin(2 * sp.pi * sp.Rational(105, 100) / (_t + sp.Rational(5, 100)))
    f = _lambdify(expr)

    def value(t):
        return f(np.clip(t, 0.0, 1.0))

    return TrendFunction("doppler", [(0, 1, expr)], value=value, cstar_bounds=DOPPLER_BOUNDS)


_REGISTRY = {"sine": sine, "jumpsine": jumpsine, "sharp": sharp, "doppler": doppler}


def available_trends() -> list[str]:
    return list(_REGISTRY)


def get_trend(name: str, **params) -> TrendFunction:
    """Registered trend by name; instances are cached per parameter set."""
    if name.lower() not in _REGISTRY:
        raise ConfigurationError(f"unknown trend {name!r}; available: {available_trends()}")
    try:
        return _build(name.lower(), tuple(sorted(params.items())))
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for trend {name!r}: {exc}") from None


@lru_cache(maxsize=64)
def _build(name: str, params: tuple) -> TrendFunction:
    return _REGISTRY[name](**dict(params))


def default_smoothness(trend: TrendFunction, r: int | None = None) -> TrendSmoothness:
    """Functionals on the trend's C* bounds (the full interval unless overridden)."""
    if trend.cstar_bounds is not None:
        return trend.smoothness(r, trend.cstar_bounds, modified=True)
    return trend.smoothness(r)


def closed_form_sine_integral(r: int, amplitude: float = 10.0) -> float:
    """``int_0^1 (d^r/dt^r A sin(4 pi t))^2 dt = A^2 (4 pi)^(2r) / 2``."""
    return amplitude**2 * (4 * math.pi) ** (2 * r) / 2
