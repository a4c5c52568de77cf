"""Potential theory on closed disks and the two model diagonal Green functions.

Scope is deliberately narrow: equilibrium potentials of pointed closed disks
(log+ of r/|z - a|, harmonic measure uniform on the bounding circle) and the
diagonal Green functions of the plane and of the projective line.  Curvature
forms of arbitrary Green functions and Dirichlet-space pairings are out of
scope and have no representation here.

Singular values are returned as the explicit marker ``math.inf`` so that a
quadrature rule can never silently consume the singular point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import CoincidentDivisors, DomainError, InvalidPoint, NoConvergence
from .quadrature import DEFAULT_SETTINGS, Certificate, QuadratureSettings, circle_mean

INF = math.inf


@dataclass(frozen=True)
class DiskPotential:
    """Equilibrium potential g(z) = log+ (r / |z - a|) of a pointed disk.

    Nonnegative, zero outside the open disk, +inf at the center; its
    curvature measure is the uniform probability measure on |z - a| = r.
    """

    center: complex = 0j
    radius: float = 1.0

    def __post_init__(self):
        if not (self.radius > 0):
            raise DomainError("disk radius must be positive")

    def __call__(self, z: complex) -> float:
        d = abs(complex(z) - complex(self.center))
        if d == 0.0:
            return INF
        return max(0.0, math.log(self.radius / d))

    def values(self, z: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; singular points come out as inf."""
        d = np.abs(np.asarray(z, dtype=complex) - complex(self.center))
        with np.errstate(divide="ignore"):
            out = np.log(self.radius / d)
        return np.maximum(out, 0.0)


def disk_green(p: DiskPotential, z: complex) -> float:
    """Value of the equilibrium potential at z (inf marker at the center)."""
    return p(z)


def capacitary_degree(r: float, psi_prime0) -> float:
    """log(r / |psi'(0)|): the degree of the capacitary normal bundle."""
    if not (r > 0):
        raise DomainError("radius must be positive")
    a = abs(psi_prime0)
    if a == 0:
        raise DomainError("psi'(0) must be nonzero")
    return math.log(r) - math.log(a)


@dataclass(frozen=True)
class DiagonalGreen:
    """Green function for the diagonal: variant "C" or "P1".

    C:  g(z1, z2) = log|z1 - z2|^{-1}, associated 2-form zero.
    P1: the U(2)-invariant kernel on homogeneous pairs, associated to the
        Fubini-Study form; nonnegative everywhere.
    """

    variant: str = "C"

    def __post_init__(self):
        if self.variant not in ("C", "P1"):
            raise DomainError(f"unknown variant {self.variant!r}")


def _homogeneous(p) -> Tuple[complex, complex]:
    if isinstance(p, (tuple, list)):
        if len(p) != 2:
            raise InvalidPoint(f"expected a pair, got {p!r}")
        x0, x1 = complex(p[0]), complex(p[1])
    else:
        x0, x1 = 1.0 + 0j, complex(p)
    if x0 == 0 and x1 == 0:
        raise InvalidPoint("(0, 0) is not a projective point")
    return x0, x1


def diagonal_green(g: DiagonalGreen, p1, p2) -> float:
    """Evaluate the diagonal Green function; inf marker on the diagonal.

    For the P1 variant, points are finite chart values or homogeneous pairs
    (x0, x1) representing x1/x0.
    """
    if g.variant == "C":
        d = abs(complex(p1) - complex(p2))
        return INF if d == 0.0 else -math.log(d)
    x0, x1 = _homogeneous(p1)
    y0, y1 = _homogeneous(p2)
    cross = abs(x0 * y1 - x1 * y0)
    if cross == 0.0:
        return INF
    return (
        -math.log(cross)
        + 0.5 * math.log(abs(x0) ** 2 + abs(x1) ** 2)
        + 0.5 * math.log(abs(y0) ** 2 + abs(y1) ** 2)
    )


def capacitary_norm_P1(w: complex) -> float:
    """Capacitary norm of d/dz at a finite chart point of the line: (1+|w|^2)^{-1}."""
    return 1.0 / (1.0 + abs(complex(w)) ** 2)


def star_product_integral(g1: DiskPotential, g2: DiskPotential,
                          settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Integral of the star product of two disk potentials.

    Equals g2 evaluated at the first singular point plus the mean of g1 over
    the curvature circle of g2.  Symmetric in its arguments; zero when the
    supporting disks are disjoint.
    """
    if complex(g1.center) == complex(g2.center):
        raise CoincidentDivisors("star product needs distinct singular points")
    point_term = g2(g1.center)

    def values(ts: np.ndarray) -> np.ndarray:
        z = complex(g2.center) + g2.radius * np.exp(2j * np.pi * ts)
        return g1.values(z)

    mean_term, _ = circle_mean(values, settings, label="star product mean")
    return point_term + mean_term


def truncated_integral(g: DiskPotential, mu_center: complex, mu_radius: float,
                       radii_schedule: Sequence[float],
                       settings: QuadratureSettings = DEFAULT_SETTINGS,
                       ) -> Tuple[float, Certificate]:
    """Integral of g against the uniform measure on a circle, by truncation.

    Each iterate caps g at the level it reaches at distance ``rho`` from its
    singular point, for ``rho`` running through the strictly decreasing
    schedule; the limit is accepted once two successive iterates agree within
    the tolerance.  This keeps every iterate finite even when the circle
    passes through the singular point.
    """
    if not (mu_radius > 0):
        raise DomainError("measure circle radius must be positive")
    schedule = list(radii_schedule)
    if not schedule or any(x <= 0 for x in schedule):
        raise DomainError("schedule must consist of positive radii")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError("schedule must be strictly decreasing")

    prev = None
    for rho in schedule:
        cap = math.log(g.radius / rho)
        if cap <= 0:
            # truncation level not yet positive: iterate is trivially 0-capped
            cap = 0.0

        def values(ts: np.ndarray, _cap=cap) -> np.ndarray:
            z = complex(mu_center) + mu_radius * np.exp(2j * np.pi * ts)
            return np.minimum(g.values(z), _cap)

        est, _ = circle_mean(values, settings, label="truncated integral")
        if prev is not None and abs(est - prev) <= settings.tol:
            return est, Certificate(settings.tol, abs(est - prev), 0)
        prev = est
    raise NoConvergence("truncation schedule exhausted without stabilizing")
