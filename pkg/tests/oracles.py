"""Independent reference computations used only by the tests.

Nothing here calls the package's evaluation, coefficient or constant code;
the only shared input is the tabulated wavelet (checked on its own in
test_wavelets).
"""
from __future__ import annotations

import math
import warnings

import mpmath
import numpy as np
import scipy.sparse as sparse
from scipy import integrate
from scipy.linalg import toeplitz


def farima_acov_recursive(d: float, nlags: int, sigma2: float = 1.0) -> np.ndarray:
    """gamma(0) from Gamma functions, then gamma(k) = gamma(k-1) (k-1+d)/(k-d)."""
    g = np.empty(nlags)
    g[0] = sigma2 * math.gamma(1 - 2 * d) / math.gamma(1 - d) ** 2
    for k in range(1, nlags):
        g[k] = g[k - 1] * (k - 1 + d) / (k - d)
    return g


def farima_acov_spectral(d: float, k: int, sigma2: float = 1.0) -> float:
    """2 int_0^pi f(lam) cos(k lam) d lam with the FARIMA spectral density.

    The ``lam**(-2d)`` singularity is handled by an algebraic quadrature weight.
    """
    def smooth(lam):
        ratio = 1.0 if lam == 0 else lam / (2 * math.sin(lam / 2))
        return sigma2 / (2 * math.pi) * ratio ** (2 * d) * math.cos(k * lam)

    val, _ = integrate.quad(smooth, 0, math.pi, weight="alg", wvar=(-2 * d, 0), limit=400, epsabs=1e-14)
    return 2 * val


def haar_phi(x):
    x = np.asarray(x, dtype=float)
    return ((x > 0) & (x <= 1)).astype(float)


def haar_psi(x):
    x = np.asarray(x, dtype=float)
    return np.where((x > 0) & (x <= 0.5), 1.0, np.where((x > 0.5) & (x <= 1), -1.0, 0.0))


def _interp_function(table, kind):
    vals = table.phi_values if kind == "father" else table.psi_values
    grid = np.arange(vals.size) / 2.0**table.M
    N = table.N
    if table.piecewise_constant:
        return haar_phi if kind == "father" else haar_psi

    def w(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0) & (x <= N), np.interp(x, grid, vals), 0.0)

    return w


def basis_columns(table, kind: str, level: int, points: np.ndarray) -> sparse.csc_matrix:
    """Column k holds w_{level,k}(points) built shift by shift."""
    N = table.N
    w = _interp_function(table, kind)
    scale = N * 2.0**level
    shifts = range(-N + 1, N * 2**level)
    rows, cols, vals = [], [], []
    for c, k in enumerate(shifts):
        lo = np.searchsorted(points, k / scale, side="left")
        hi = np.searchsorted(points, (k + N) / scale, side="right")
        if hi <= lo:
            continue
        v = math.sqrt(scale) * w(scale * points[lo:hi] - k)
        rows.append(np.arange(lo, hi))
        cols.append(np.full(hi - lo, c))
        vals.append(v)
    m = len(range(-N + 1, N * 2**level))
    return sparse.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(points.size, m))


class FiniteSampleMise:
    """Exact finite-n MISE of the unthresholded linear estimator.

    ``g_hat = E C Y`` with ``C`` the design Riemann-sum operator and ``E`` the
    synthesis on a 4n+1 trapezoid grid.  Bias by direct evaluation, variance
    as ``trace(E^T W E . C Gamma C^T)`` with a dense Toeplitz ``Gamma``.
    """

    def __init__(self, table, n: int, d: float, g):
        self.table = table
        self.n = n
        self.t = np.arange(1, n + 1) / n
        self.grid = np.linspace(0, 1, 4 * n + 1)
        self.w = np.full(self.grid.size, 1 / (4 * n))
        self.w[[0, -1]] /= 2
        self.Gamma = toeplitz(farima_acov_recursive(d, n))
        self.g_t = g(self.t)
        self.g_grid = g(self.grid)
        self._cache = {}

    def _blocks(self, kind, level):
        key = (kind, level)
        if key not in self._cache:
            C = basis_columns(self.table, kind, level, self.t).T.tocsr() / self.n
            E = basis_columns(self.table, kind, level, self.grid).tocsr()
            self._cache[key] = (C, E)
        return self._cache[key]

    def mise(self, J: int, q: int) -> tuple[float, float]:
        blocks = [self._blocks("father", J)] + [self._blocks("mother", J + j) for j in range(q + 1)]
        C = sparse.vstack([b[0] for b in blocks]).tocsr()
        E = sparse.hstack([b[1] for b in blocks]).tocsr()
        fit = E @ (C @ self.g_t)
        bias = float(np.dot(self.w, (fit - self.g_grid) ** 2))
        G = (E.T @ sparse.diags(self.w) @ E).toarray()
        CG = C @ self.Gamma
        V = C @ CG.T
        var = float(np.sum(G * V))
        return bias, var

    def argmin(self, J_range=range(0, 7), q_range=range(0, 9)):
        top = int(math.floor(math.log2(self.n)))
        best = None
        for J in J_range:
            for q in q_range:
                if J + q > top:
                    continue
                b, v = self.mise(J, q)
                if best is None or b + v < best[0]:
                    best = (b + v, J, q)
        return best


def c_star_mp(alpha, r, N, C_noise, nu, integral, digits: int = 50):
    """C* at high precision with mpmath."""
    with mpmath.workdps(digits):
        a = mpmath.mpf(alpha)
        val = mpmath.log(mpmath.mpf(nu) ** 2 * mpmath.mpf(integral)
                         / (mpmath.mpf(C_noise) * mpmath.factorial(r) ** 2), 2) / (2 * r + a)
        return val - mpmath.log(N, 2)


def beta_mp(d, digits: int = 50):
    with mpmath.workdps(digits):
        d = mpmath.mpf(d)
        return 2 ** (2 * d) * mpmath.gamma(1 - 2 * d) * mpmath.sin(mpmath.pi * d) / (d * (2 * d + 1))


def haar_singular_mother(alpha: float) -> float:
    """Four-block closed form of int int |x-y|^-alpha psi(x) psi(y) for Haar."""
    h = 0.5
    p = 2 - alpha
    same = 2 * h**p / ((1 - alpha) * p)
    adjacent = h**p * (2**p - 2) / ((1 - alpha) * p)
    return 2 * same - 2 * adjacent


def quad_detail(g, table, level: int, k: int) -> float:
    """int_0^1 g psi_{level,k} by adaptive quadrature on the interpolated table."""
    N = table.N
    w = _interp_function(table, "mother")
    scale = N * 2.0**level
    lo, hi = max(0.0, k / scale), min(1.0, (k + N) / scale)
    f = lambda t: g(t) * math.sqrt(scale) * float(w(scale * t - k))
    pts = [(k + i / 2) / scale for i in range(2 * N + 1) if lo < (k + i / 2) / scale < hi]
    with warnings.catch_warnings():
        # the interpolated table has a kink at every grid node; accuracy is checked by the caller
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, lo, hi, points=pts or None, limit=400, epsabs=1e-14)
    return val


def _filter_response(h, w):
    k = np.arange(len(h))
    return (np.asarray(h)[None, :] * np.exp(-1j * np.outer(w, k))).sum(axis=1) / 2.0


def fourier_sq(spec, kind: str, w, depth: int = 40) -> np.ndarray:
    """``|w_hat(omega)|**2`` from the infinite product of the filter response."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    base = w / 2.0 if kind == "mother" else w
    out = np.ones(w.size, dtype=complex)
    for j in range(1, depth + 1):
        out *= _filter_response(spec.h, base / 2**j)
    if kind == "mother":
        out *= _filter_response(spec.g, w / 2.0)
    return np.abs(out) ** 2


def singular_integral_fourier(spec, kind: str, alpha: float, W: float = 2000.0) -> float:
    """``int int |x-y|**-alpha w(x) w(y)`` via ``|omega|**(alpha-1) |w_hat|**2``.

    Uses the Fourier transform of ``|x|**-alpha``; never touches a tabulated
    wavelet.
    """
    edges = np.concatenate([[0.0], np.geomspace(1e-12, W, 500)])
    x, wt = np.polynomial.legendre.leggauss(20)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        xm = (a + b) / 2 + (b - a) / 2 * x
        total += np.sum(wt * (b - a) / 2 * xm ** (alpha - 1) * fourier_sq(spec, kind, xm))
    return 2 * total * math.gamma(1 - alpha) * math.sin(math.pi * alpha / 2) / math.pi


def filter_moments(spec, order: int, kind: str = "mother") -> float:
    """Exact ``int x**order w(x) dx`` from the two-scale relation alone."""
    h = spec.h
    k = np.arange(len(h), dtype=float)
    m = [1.0]
    for p in range(1, order + 1):
        s = sum(math.comb(p, i) * m[i] * np.sum(h * k ** (p - i)) for i in range(p))
        m.append(2.0 ** (-p - 1) * s / (1 - 2.0**-p))
    if kind == "father":
        return m[order]
    g = spec.g
    return 2.0 ** (-order - 1) * sum(
        math.comb(order, i) * m[i] * np.sum(g * k ** (order - i)) for i in range(order + 1))
