"""Numerical integration on circles and the torus, plus Nevanlinna characteristics.

Integrands with logarithmic singularities along coincidence curves are handled
by a staggered midpoint product rule: the two torus lattices are offset by half
a cell so the singular set is never sampled, and the leading 1/N error of the
diagonal band is removed by Richardson extrapolation (for the translation
invariant part of the kernel this cancellation is exact at every N).

Area integrals against the log(r/|z|) weight use a Gauss rule generated for
the weight u*log(1/u) on (0,1); its recurrence coefficients are computed once
from the exact rational moments 1/(k+2)^2, so the radial rule converges
spectrally for the smooth pullback densities that arise here.

All grid reductions use numpy's pairwise summation; results are deterministic
for fixed settings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

from .errors import (
    DomainError,
    NoConvergence,
    NumericalError,
    PoleAtOrigin,
    PoleOnDisk,
)
from .maps import DiskMap

_CHUNK_ROWS = 256

try:  # fused torus kernels; numpy chunks remain as the fallback
    import numba

    @numba.njit(parallel=True, cache=True, fastmath=False)
    def _plain_rowsums(p1r, p1i, p2r, p2i, out):
        n, m = p1r.shape[0], p2r.shape[0]
        for j in numba.prange(n):
            acc = 0.0
            bad = 0
            for k in range(m):
                dr = p1r[j] - p2r[k]
                di = p1i[j] - p2i[k]
                sq = dr * dr + di * di
                if sq == 0.0:
                    bad = 1
                else:
                    acc += math.log(sq)
            out[j] = math.nan if bad else acc

    @numba.njit(parallel=True, cache=True, fastmath=False)
    def _cross_rowsums(p1r, p1i, q1r, q1i, p2r, p2i, q2r, q2i, out):
        n, m = p1r.shape[0], p2r.shape[0]
        for j in numba.prange(n):
            acc = 0.0
            bad = 0
            for k in range(m):
                dr = p1r[j] * q2r[k] - p1i[j] * q2i[k] - (q1r[j] * p2r[k] - q1i[j] * p2i[k])
                di = p1r[j] * q2i[k] + p1i[j] * q2r[k] - (q1r[j] * p2i[k] + q1i[j] * p2r[k])
                sq = dr * dr + di * di
                if sq == 0.0:
                    bad = 1
                else:
                    acc += math.log(sq)
            out[j] = math.nan if bad else acc

    _HAVE_NUMBA = True

    import os

    _thread_cap = os.environ.get("OVERFLOW_LAB_THREADS")
    if _thread_cap:
        try:
            numba.set_num_threads(max(1, min(int(_thread_cap), numba.get_num_threads())))
        except ValueError:
            pass
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False


@dataclass(frozen=True)
class QuadratureSettings:
    """Grid controls shared by the circle and torus rules.

    ``base_grid`` is the coarsest lattice size (a power of two), doubling up
    to ``max_depth`` times until two successive accepted estimates differ by
    less than ``tol``.  ``stagger`` keeps the two torus lattices offset by
    half a cell; disabling it is for diagnostics only.
    """

    base_grid: int = 256
    tol: float = 1e-6
    max_depth: int = 6
    stagger: bool = True

    def __post_init__(self):
        if self.base_grid < 2 or (self.base_grid & (self.base_grid - 1)) != 0:
            raise DomainError("base_grid must be a power of two >= 2")
        if not (self.tol > 0):
            raise DomainError("tol must be positive")
        if self.max_depth < 0:
            raise DomainError("max_depth must be nonnegative")


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class Certificate:
    """Convergence evidence attached to an accepted estimate."""

    tol: float
    achieved: float
    grid: int


def _midpoints(n: int, offset: float = 0.0) -> np.ndarray:
    return (np.arange(n) + 0.5 + offset) / n


def circle_mean(values: Callable[[np.ndarray], np.ndarray],
                settings: QuadratureSettings = DEFAULT_SETTINGS,
                label: str = "circle mean") -> Tuple[float, Certificate]:
    """Mean over [0,1) of a periodic integrand, midpoint rule with doubling.

    Acceptance is tested on the Richardson pair 2*I(2N) - I(N): integrable
    log spikes sitting at a fixed offset from the lattice contribute an
    exactly-1/N error term which the pair removes; for smooth periodic
    integrands the pair converges as fast as the raw sequence.
    """
    raw = []
    richardson_prev = None
    n = settings.base_grid
    for _ in range(settings.max_depth + 1):
        vals = np.asarray(values(_midpoints(n)), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NumericalError(f"{label}: integrand not finite on the grid")
        raw.append(float(np.mean(vals)))
        if len(raw) >= 2:
            richardson = 2.0 * raw[-1] - raw[-2]
            if richardson_prev is not None and abs(richardson - richardson_prev) <= settings.tol:
                return richardson, Certificate(
                    settings.tol, abs(richardson - richardson_prev), n
                )
            richardson_prev = richardson
        n *= 2
    raise NoConvergence(f"{label}: no convergence at grid {n // 2}")


#: Inner-lattice refinement of the torus product rule.  Equal-weight circle
#: rules are exponentially accurate except for fiber points within ~1/N of the
#: circle, so refining one axis by a fixed even factor buys that accuracy at
#: linear cost; kept even so the lattices never collide.
_INNER_REFINE = 8


def torus_pair_log_integral(boundary: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]],
                            settings: QuadratureSettings = DEFAULT_SETTINGS,
                            label: str = "torus log integral") -> Tuple[float, Certificate]:
    """Double integral of log|p(t) q(s) - q(t) p(s)| over the unit torus.

    ``boundary`` evaluates the homogeneous pair (p, q) along the circle
    parameter.  The plain ratio kernel log|f(t) - f(s)| is the case q = 1.
    The two staggered midpoint lattices are refined together, the inner one
    kept a fixed factor finer; each level's diagonal-band error is exactly
    proportional to one over the lattice size, so acceptance is tested on
    the Richardson pair 2*I(2N) - I(N).
    """
    inner_offset = 0.25 if settings.stagger else 0.0
    raw = []
    n = settings.base_grid
    richardson_prev = None
    for _ in range(settings.max_depth + 1):
        m = n * _INNER_REFINE
        p1, q1 = boundary(_midpoints(n))
        p2, q2 = boundary(_midpoints(m, inner_offset))
        total = _log_cross_sum(p1, q1, p2, q2, label)
        raw.append(0.5 * total / (n * m))
        if len(raw) >= 2:
            richardson = 2.0 * raw[-1] - raw[-2]
            if richardson_prev is not None and abs(richardson - richardson_prev) <= settings.tol:
                return richardson, Certificate(
                    settings.tol, abs(richardson - richardson_prev), n
                )
            richardson_prev = richardson
        n *= 2
    raise NoConvergence(f"{label}: no convergence at grid {n // 2}")


def _log_cross_sum(p1, q1, p2, q2, label: str) -> float:
    """Sum of log of the cross-kernel modulus squared over the product lattice.

    Row sums are accumulated independently (deterministic under threading),
    then combined with numpy's pairwise summation.
    """
    plain = q1 is None
    if _HAVE_NUMBA:
        out = np.empty(len(p1))
        if plain:
            _plain_rowsums(
                np.ascontiguousarray(p1.real), np.ascontiguousarray(p1.imag),
                np.ascontiguousarray(p2.real), np.ascontiguousarray(p2.imag),
                out,
            )
        else:
            _cross_rowsums(
                np.ascontiguousarray(p1.real), np.ascontiguousarray(p1.imag),
                np.ascontiguousarray(q1.real), np.ascontiguousarray(q1.imag),
                np.ascontiguousarray(p2.real), np.ascontiguousarray(p2.imag),
                np.ascontiguousarray(q2.real), np.ascontiguousarray(q2.imag),
                out,
            )
        if not np.all(np.isfinite(out)):
            raise NumericalError(
                f"{label}: lattice hit an exact coincidence of boundary values"
            )
        return float(np.sum(out))
    total = 0.0
    n = len(p1)
    for lo in range(0, n, _CHUNK_ROWS):
        hi = min(lo + _CHUNK_ROWS, n)
        if plain:
            cross = p1[lo:hi, None] - p2[None, :]
        else:
            cross = p1[lo:hi, None] * q2[None, :] - q1[lo:hi, None] * p2[None, :]
        sq = cross.real**2 + cross.imag**2
        if np.any(sq == 0.0):
            raise NumericalError(
                f"{label}: lattice hit an exact coincidence of boundary values"
            )
        total += float(np.sum(np.log(sq)))
    return total


# -- circle log means -------------------------------------------------------

def circle_log_mean(alpha: DiskMap, c: complex, r: float,
                    settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Integral over t in [0,1) of log|alpha(r e^{2 pi i t}) - c|."""
    c = complex(c)

    def values(ts: np.ndarray) -> np.ndarray:
        z = r * np.exp(2j * np.pi * ts)
        p, q = alpha.num_den_at(z)
        mod = np.abs(p - c * q)
        if np.any(mod == 0.0):
            raise NumericalError("circle_log_mean: value c attained on the grid")
        return np.log(mod) - np.log(np.abs(q))

    value, _ = circle_mean(values, settings, label="circle_log_mean")
    return value


def torus_log_double_integral(alpha: DiskMap, r: float,
                              settings: QuadratureSettings = DEFAULT_SETTINGS,
                              with_certificate: bool = False):
    """Double integral of log|alpha(r e(t1)) - alpha(r e(t2))| on the torus."""
    if alpha.is_constant():
        raise DomainError("torus integral of a constant map is singular")

    def boundary(ts: np.ndarray):
        z = r * np.exp(2j * np.pi * ts)
        p, q = alpha.num_den_at(z)
        return (p, None) if alpha.is_polynomial else (p, q)

    value, cert = torus_pair_log_integral(boundary, settings,
                                          label="torus_log_double_integral")
    if not alpha.is_polynomial:
        # log|p1/q1 - p2/q2| = log|p1 q2 - q1 p2| - log|q1| - log|q2|
        def qvals(ts: np.ndarray) -> np.ndarray:
            z = r * np.exp(2j * np.pi * ts)
            _, q = alpha.num_den_at(z)
            return np.log(np.abs(q))

        corr, _ = circle_mean(qvals, settings, label="denominator mean")
        value -= 2.0 * corr
    return (value, cert) if with_certificate else value


# -- Gauss rule for the weight u log(1/u) on (0,1) --------------------------

def _chebyshev_recurrence(n: int):
    """Three-term recurrence for the weight u*log(1/u) du on (0,1), exact."""
    moments = [Fraction(1, (l + 2) ** 2) for l in range(2 * n)]
    sigma_prev = [Fraction(0)] * (2 * n)
    sigma = list(moments)
    alpha = [moments[1] / moments[0]]
    beta = [moments[0]]
    for k in range(1, n):
        sigma_next = [Fraction(0)] * (2 * n)
        for l in range(k, 2 * n - k):
            sigma_next[l] = (
                sigma[l + 1]
                - alpha[k - 1] * sigma[l]
                - beta[k - 1] * sigma_prev[l]
            )
        alpha.append(sigma_next[k + 1] / sigma_next[k] - sigma[k] / sigma[k - 1])
        beta.append(sigma_next[k] / sigma[k - 1])
        sigma_prev, sigma = sigma, sigma_next
    return alpha, beta


@lru_cache(maxsize=None)
def gauss_log_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating f against u*log(1/u) du on (0,1)."""
    alpha, beta = _chebyshev_recurrence(n)
    jacobi = np.zeros((n, n))
    for k in range(n):
        jacobi[k, k] = float(alpha[k])
    for k in range(1, n):
        off = math.sqrt(float(beta[k]))
        jacobi[k, k - 1] = jacobi[k - 1, k] = off
    nodes, vecs = np.linalg.eigh(jacobi)
    weights = float(beta[0]) * vecs[0, :] ** 2
    return nodes, weights


# -- Nevanlinna characteristic ----------------------------------------------

def _fubini_study_density(alpha: DiskMap, z: np.ndarray) -> np.ndarray:
    """Density of the pulled-back Fubini-Study form against dx dy, pole-safe."""
    wn, q2 = alpha.derivative_num_den_at(z)
    p, q = alpha.num_den_at(z)
    denom = (np.abs(q) ** 2 + np.abs(p) ** 2) ** 2
    return (np.abs(wn) ** 2) / (np.pi * denom)


_RADIAL_NODES = 48


def nevanlinna_T(alpha: DiskMap, r: float, method: str = "boundary",
                 settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Ahlfors-Shimizu characteristic of alpha at radius r.

    boundary:  (1/2) int log(1 + |alpha(r e(t))|^2) dt - (1/2) log(1 + |alpha(0)|^2),
               valid for maps pole-free on the closed disk.
    area:      int over the disk of log(r/|z|) against the pulled-back
               Fubini-Study form, in polar coordinates with the log weight
               absorbed into the radial Gauss rule; valid for meromorphic maps.
    """
    if alpha.den[0] == 0:
        raise PoleAtOrigin("alpha(0) is infinite")
    if alpha.is_constant():
        return 0.0
    if method == "boundary":
        if alpha.poles_inside(r):
            raise PoleOnDisk(f"map has a pole on the closed disk of radius {r}")

        def values(ts: np.ndarray) -> np.ndarray:
            z = r * np.exp(2j * np.pi * ts)
            p, q = alpha.num_den_at(z)
            return np.log(np.abs(p) ** 2 + np.abs(q) ** 2) - 2.0 * np.log(np.abs(q))

        mean, _ = circle_mean(values, settings, label="nevanlinna boundary")
        a0 = complex(alpha.value_at_zero())
        return 0.5 * mean - 0.5 * math.log1p(abs(a0) ** 2)
    if method == "area":
        nodes, weights = gauss_log_rule(_RADIAL_NODES)
        prev = None
        n_theta = settings.base_grid
        for _ in range(settings.max_depth + 1):
            ts = _midpoints(n_theta)
            phases = np.exp(2j * np.pi * ts)
            total = 0.0
            for u, w in zip(nodes, weights):
                dens = _fubini_study_density(alpha, r * u * phases)
                total += w * float(np.mean(dens))
            est = 2.0 * math.pi * r * r * total
            if prev is not None and abs(est - prev) <= settings.tol:
                return est
            prev = est
            n_theta *= 2
        raise NoConvergence("nevanlinna area integral did not stabilize")
    raise DomainError(f"unknown method {method!r}")
