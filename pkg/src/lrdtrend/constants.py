"""Long-memory basis constants and the closed-form adaptivity rules.

Everything here is deterministic arithmetic on three ingredients: the basis
(``C_phi^2``, ``C_psi^2``, ``nu_r``, ``N``), the noise exponent ``alpha`` and
the trend functional ``int (g^(r))^2``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve

from .exceptions import ConfigurationError, DomainError, RegimeTieError
from .noise import NoiseModel, c_gamma
from ._validation import check_alpha, check_int, floor_log2
from .wavelets import DEFAULT_RESOLUTION, FATHER, MOTHER, DyadicTable, _kind, as_table, moment

REGIME_RTOL = 1e-4
_SNAP = 1e-12


class Regime(str, enum.Enum):
    CASE_I = "case_i"
    CASE_II = "case_ii"

    def __str__(self):
        return self.value


def _cell_kernel(m: np.ndarray, alpha: float) -> np.ndarray:
    """Exact ``int int |x - y|**(-alpha)`` over unit cells ``m`` apart."""
    p = 2.0 - alpha
    a = np.abs(m.astype(float))
    return (np.abs(a + 1) ** p - 2 * a**p + np.abs(a - 1) ** p) / ((1 - alpha) * p)


def singular_product_integral(table: DyadicTable, kind: str, alpha: float) -> float:
    """``int_0^N int_0^N |x - y|**(-alpha) w(x) w(y) dx dy``.

    ``w`` is replaced by its piecewise-constant cell values and the kernel is
    integrated exactly over every cell pair, so the diagonal singularity
    costs nothing.  The Toeplitz quadratic form is evaluated by FFT.
    """
    alpha = check_alpha(alpha)
    c = table.cell_values(_kind(kind))
    m = c.size
    kern = _cell_kernel(np.arange(-(m - 1), m), alpha)
    conv = fftconvolve(c, kern)[m - 1: 2 * m - 1]
    return float(table.step ** (2.0 - alpha) * np.dot(c, conv))


@dataclass(frozen=True)
class LrdBasisConstants:
    alpha: float
    C_phi_sq: float
    C_psi_sq: float
    nu_r: float
    r: int
    N: int
    basis: str = "custom"

    def __post_init__(self):
        check_alpha(self.alpha)
        if not (self.C_phi_sq > 0 and self.C_psi_sq > 0):
            raise DomainError("C_phi_sq and C_psi_sq must be positive")
        if self.nu_r == 0:
            raise DomainError("nu_r must be non-zero")
        check_int(self.r, "r", 1)
        check_int(self.N, "N", 1)

    @property
    def phi_side(self) -> float:
        """``(2**alpha - 1) C_phi^2``, compared against ``C_psi^2``."""
        return (2.0**self.alpha - 1.0) * self.C_phi_sq

    def to_dict(self) -> dict:
        out = asdict(self)
        try:
            out["regime"] = regime(self).value
        except RegimeTieError:
            out["regime"] = "tie"
        return out


def compute_basis_constants(table: DyadicTable, model: NoiseModel, basis: str | None = None) -> LrdBasisConstants:
    alpha = check_alpha(model.alpha)
    cg = c_gamma(model)
    r = table.spec.m_psi
    return LrdBasisConstants(
        alpha=alpha,
        C_phi_sq=cg * singular_product_integral(table, FATHER, alpha),
        C_psi_sq=cg * singular_product_integral(table, MOTHER, alpha),
        nu_r=moment(table, MOTHER, r),
        r=r,
        N=table.N,
        basis=basis or table.spec.family_name,
    )


@lru_cache(maxsize=None)
def _cached_constants(name: str, d: float, variance: float, M: int) -> LrdBasisConstants:
    return compute_basis_constants(as_table(name, M), NoiseModel(d, variance), name)


def basis_constants(basis, model: NoiseModel | float, M: int = DEFAULT_RESOLUTION) -> LrdBasisConstants:
    """Constants for a basis and noise model; cached for registered names.

    ``model`` may be a :class:`NoiseModel` or a bare ``d``.
    """
    if not isinstance(model, NoiseModel):
        model = NoiseModel(float(model))
    if isinstance(basis, str):
        return _cached_constants(basis.lower(), model.d, model.innovation_variance, M)
    table = as_table(basis, M)
    return compute_basis_constants(table, model)


@dataclass(frozen=True)
class TrendSmoothness:
    """``int_a^b (g^(r))^2`` and ``max (g^(r))^2`` for a trend."""

    r: int
    integral_gr_sq: float
    max_gr_sq: float = float("nan")
    bounds: tuple = (0.0, 1.0)
    modified: bool = False

    def __post_init__(self):
        check_int(self.r, "r", 1)
        if not self.integral_gr_sq > 0:
            raise DomainError("integral of (g^(r))^2 must be positive")
        a, b = (float(x) for x in self.bounds)
        if not 0.0 <= a < b <= 1.0:
            raise DomainError(f"bounds must satisfy 0 <= a < b <= 1, got {self.bounds}")
        object.__setattr__(self, "bounds", (a, b))

    def scaled(self, factor: float) -> "TrendSmoothness":
        return TrendSmoothness(self.r, self.integral_gr_sq * factor, self.max_gr_sq * factor,
                               self.bounds, self.modified)


def _check_pair(constants: LrdBasisConstants, smooth: TrendSmoothness):
    if constants.r != smooth.r:
        raise ConfigurationError(
            f"basis has {constants.r} vanishing moments but trend functionals use r={smooth.r}")


def _side(kind: str) -> str:
    k = str(kind).lower()
    if k in ("psi", "mother"):
        return "psi"
    if k in ("phi", "father"):
        return "phi"
    raise ValueError(f"kind must be 'psi' or 'phi', got {kind!r}")


def _noise_constant(kind: str, constants: LrdBasisConstants) -> float:
    return constants.C_psi_sq if _side(kind) == "psi" else constants.phi_side


def c_star_components(kind: str, constants: LrdBasisConstants, smooth: TrendSmoothness) -> tuple:
    """``(C1, C2, C3, C4)`` with ``C* = (C1 + C2 + C3) / (2r + alpha) + C4``."""
    _check_pair(constants, smooth)
    r = constants.r
    c1 = math.log2(smooth.integral_gr_sq)
    c2 = math.log2((constants.nu_r / math.factorial(r)) ** 2)
    c3 = -math.log2(_noise_constant(kind, constants))
    c4 = -math.log2(constants.N)
    return c1, c2, c3, c4


def c_star(kind: str, constants: LrdBasisConstants, smooth: TrendSmoothness) -> float:
    c1, c2, c3, c4 = c_star_components(kind, constants, smooth)
    return (c1 + c2 + c3) / (2 * constants.r + constants.alpha) + c4


def level_argument(kind: str, n: float, constants: LrdBasisConstants, smooth: TrendSmoothness) -> float:
    """The continuous optimal level ``alpha/(2r+alpha) log2 n + C*``."""
    if not n > 0:
        raise DomainError("n must be positive")
    a = constants.alpha / (2 * constants.r + constants.alpha)
    return a * math.log2(n) + c_star(kind, constants, smooth)


def _split(x: float) -> tuple[int, float]:
    near = round(x)
    if abs(x - near) < _SNAP:
        return int(near), 0.0
    fl = math.floor(x)
    return int(fl), x - fl


def delta_n(kind: str, n: float, constants: LrdBasisConstants, smooth: TrendSmoothness) -> float:
    """Fractional part of the continuous optimal level, in ``[0, 1)``."""
    return _split(level_argument(kind, n, constants, smooth))[1]


def regime(constants: LrdBasisConstants, rtol: float = REGIME_RTOL) -> Regime:
    """Case i when ``(2**alpha - 1) C_phi^2 > C_psi^2``, case ii when smaller.

    Values within ``rtol`` of each other raise :class:`RegimeTieError`.
    """
    a, b = constants.phi_side, constants.C_psi_sq
    if abs(a - b) <= rtol * max(a, b):
        raise RegimeTieError(
            f"(2^alpha-1) C_phi^2 = {a:.10g} and C_psi^2 = {b:.10g} agree within rtol={rtol}")
    return Regime.CASE_I if a > b else Regime.CASE_II


def _admits(constants: LrdBasisConstants, wanted: Regime):
    try:
        got = regime(constants)
    except RegimeTieError:
        return
    if got != wanted:
        raise ConfigurationError(f"constants are in {got.value}, formula requires {wanted.value}")


def j_guard(n: int, constants: LrdBasisConstants) -> float:
    """Largest admissible coarse level in case i."""
    return constants.alpha / (2 * constants.r + constants.alpha) * math.log2(n) - 1.0


def optimal_q_candidates(n: int, J: int, constants: LrdBasisConstants, smooth: TrendSmoothness) -> tuple:
    """Co-optimal smoothing parameters, canonical (largest) first."""
    _admits(constants, Regime.CASE_I)
    n = check_int(n, "n", 2)
    J = check_int(J, "J", 0)
    if J > j_guard(n, constants):
        raise ConfigurationError(
            f"J={J} exceeds the admissible coarse level {j_guard(n, constants):.3f}; use a smaller J")
    fl, frac = _split(level_argument("psi", n, constants, smooth))
    q = fl - J
    if q < 0:
        raise ConfigurationError(f"optimal q is negative ({q}); use a smaller J")
    return (q, q - 1) if frac == 0.0 and q >= 1 else (q,)


def optimal_q(n: int, J: int, constants: LrdBasisConstants, smooth: TrendSmoothness) -> int:
    return optimal_q_candidates(n, J, constants, smooth)[0]


def optimal_J_candidates(n: int, constants: LrdBasisConstants, smooth: TrendSmoothness) -> tuple:
    _admits(constants, Regime.CASE_II)
    n = check_int(n, "n", 2)
    fl, frac = _split(level_argument("phi", n, constants, smooth))
    J = fl + 1
    if J < 0:
        raise ConfigurationError(f"optimal J is negative ({J})")
    return (J, J - 1) if frac == 0.0 and J >= 1 else (J,)


def optimal_J(n: int, constants: LrdBasisConstants, smooth: TrendSmoothness) -> int:
    return optimal_J_candidates(n, constants, smooth)[0]


def level_noise_variance(level: int, n: int, constants: LrdBasisConstants) -> float:
    """Leading-order variance ``C_psi^2 N**(alpha-1) n**(-alpha) 2**(-level(1-alpha))``
    of an empirical detail coefficient at absolute level ``level = J + j``."""
    a = constants.alpha
    return constants.C_psi_sq * constants.N ** (a - 1) * n ** (-a) * 2.0 ** (-level * (1 - a))


def threshold_sq(level: int, n: int, constants: LrdBasisConstants) -> float:
    """``4 e sigma^2 (ln n)^2`` at absolute level ``level``."""
    return 4.0 * math.e * level_noise_variance(level, n, constants) * math.log(n) ** 2


def thresholds(n: int, J: int, q: int, q_star: int, constants: LrdBasisConstants) -> np.ndarray:
    """Hard thresholds for detail levels ``j = 0..q``.

    Levels ``j <= q_star`` are kept untouched (``q_star = -1`` thresholds
    every level).
    """
    n = check_int(n, "n", 2)
    q = check_int(q, "q", -1)
    out = np.zeros(q + 1)
    for j in range(q + 1):
        if j > q_star:
            out[j] = math.sqrt(threshold_sq(J + j, n, constants))
    return out


def resolution_cap(n: int, N: int) -> int:
    """Finest absolute level used by the plans: ``N 2**level <= n / 2``."""
    return floor_log2(n / (2 * N)) if n >= 2 * N else -1


def full_resolution(n: int) -> int:
    return floor_log2(n)


@dataclass(frozen=True, eq=False)
class EstimatorPlan:
    """Resolved coarse level, detail depth and thresholds."""

    regime: Regime
    J: int
    q: int
    q_star: int
    thresholds: np.ndarray
    n: int
    tie: bool = False
    alternatives: tuple = field(default=())

    def __post_init__(self):
        if self.J < 0:
            raise ConfigurationError("J must be >= 0")
        if self.q < -1:
            raise ConfigurationError("q must be >= -1")
        th = np.asarray(self.thresholds, dtype=float)
        if th.size != self.q + 1:
            raise ConfigurationError("need one threshold per detail level")
        if np.any(th < 0):
            raise ConfigurationError("thresholds must be nonnegative")
        th.setflags(write=False)
        object.__setattr__(self, "thresholds", th)
        object.__setattr__(self, "regime", Regime(self.regime))

    @property
    def finest_level(self) -> int:
        return self.J + self.q

    def to_dict(self) -> dict:
        return {"regime": self.regime.value, "J": self.J, "q": self.q, "q_star": self.q_star,
                "n": self.n, "tie": self.tie, "thresholds": [float(x) for x in self.thresholds],
                "alternatives": [list(a) for a in self.alternatives]}


def plan_estimator(n: int, constants: LrdBasisConstants, smooth: TrendSmoothness,
                   J: int | None = None, cap: str = "aliasing") -> EstimatorPlan:
    """Choose ``(J, q, q_star, thresholds)``.

    ``cap='aliasing'`` stops at the finest level with at least two design
    points per unit of the scaled support; ``cap='full'`` uses every level up
    to ``floor(log2 n)``.  A regime tie is resolved as case ii: both cases
    then span the same space below the thresholded levels.
    """
    n = check_int(n, "n", 4)
    _check_pair(constants, smooth)
    if cap == "aliasing":
        top = resolution_cap(n, constants.N)
    elif cap == "full":
        top = full_resolution(n)
    else:
        raise ConfigurationError(f"cap must be 'aliasing' or 'full', got {cap!r}")
    tie = False
    try:
        reg = regime(constants)
    except RegimeTieError:
        reg, tie = Regime.CASE_II, True

    if reg is Regime.CASE_II:
        cands = optimal_J_candidates(n, constants, smooth)
        J_ = cands[0] if J is None else check_int(J, "J", 0)
        q = max(top - J_, -1)
        alts = tuple((j, max(top - j, -1)) for j in cands[1:])
        return EstimatorPlan(reg, J_, q, -1, thresholds(n, J_, q, -1, constants), n, tie, alts)

    J_ = 0 if J is None else check_int(J, "J", 0)
    cands = optimal_q_candidates(n, J_, constants, smooth)
    q = max(top - J_, -1)
    q_star = min(cands[0], q)
    alts = tuple((J_, min(c, q)) for c in cands[1:])
    return EstimatorPlan(reg, J_, q, q_star, thresholds(n, J_, q, q_star, constants), n, tie, alts)


def rate_exponent(r: int, alpha: float) -> float:
    """``2 r alpha / (2r + alpha)``."""
    return 2.0 * r * alpha / (2 * r + alpha)


def _level_factor(r: int, alpha: float, d_bias: float, d_var: float) -> float:
    return 2.0 ** (2 * r * d_bias) / (2.0 ** (2 * r) - 1) + 2.0 ** (alpha * (1 - d_var)) / (2.0**alpha - 1)


def a1(n: int, constants: LrdBasisConstants, smooth: TrendSmoothness) -> float:
    r, a = constants.r, constants.alpha
    dl = delta_n("psi", n, constants, smooth)
    return _level_factor(r, a, dl, dl) * constants.C_psi_sq ** (2 * r / (2 * r + a))


def a2(constants: LrdBasisConstants, smooth: TrendSmoothness) -> float:
    _check_pair(constants, smooth)
    r, a = constants.r, constants.alpha
    b = constants.nu_r**2 / math.factorial(r) ** 2 * smooth.integral_gr_sq
    return b ** (a / (2 * r + a))


def a3(n: int, constants: LrdBasisConstants, smooth: TrendSmoothness) -> float:
    r, a = constants.r, constants.alpha
    dl = delta_n("phi", n, constants, smooth)
    return _level_factor(r, a, dl, dl) * constants.phi_side ** (2 * r / (2 * r + a))


def theoretical_mise(n: int, plan: EstimatorPlan | Regime | str, constants: LrdBasisConstants,
                     smooth: TrendSmoothness) -> float:
    """Leading-order optimal MISE for the plan's regime."""
    reg = Regime(plan.regime if isinstance(plan, EstimatorPlan) else plan)
    _admits(constants, reg)
    lead = a1(n, constants, smooth) if reg is Regime.CASE_I else a3(n, constants, smooth)
    return lead * a2(constants, smooth) * n ** (-rate_exponent(constants.r, constants.alpha))
