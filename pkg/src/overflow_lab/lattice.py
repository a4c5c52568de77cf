"""Exact rational intersection lattices and their equilibrium divisors.

All arithmetic is exact: matrices are cleared to integers and eliminated
fraction-free (Bareiss), so negative definiteness (alternating leading
principal minors), equilibrium solutions, and the comparison identities all
hold as equalities of rationals, never up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from .errors import CandidateNotCNB, DomainError, NotNegativeDefinite


def _to_fraction_matrix(rows: Sequence[Sequence]) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


@dataclass(frozen=True)
class IntersectionLattice:
    """Labeled symmetric pairing of vertical components against a section.

    ``matrix`` holds the pairwise component intersections, ``c`` the section
    against each component, ``cc`` the section self-intersection.
    """

    labels: Tuple[str, ...]
    matrix: Tuple[Tuple[Fraction, ...], ...]
    c: Tuple[Fraction, ...]
    cc: Fraction

    def __post_init__(self):
        m = len(self.labels)
        object.__setattr__(self, "matrix", _to_fraction_matrix(self.matrix))
        object.__setattr__(self, "c", tuple(Fraction(x) for x in self.c))
        object.__setattr__(self, "cc", Fraction(self.cc))
        if len(self.matrix) != m or any(len(row) != m for row in self.matrix):
            raise DomainError("matrix shape does not match the labels")
        if len(self.c) != m:
            raise DomainError("section vector length does not match the labels")
        for i in range(m):
            for j in range(i + 1, m):
                if self.matrix[i][j] != self.matrix[j][i]:
                    raise DomainError(f"matrix not symmetric at ({i}, {j})")

    @property
    def size(self) -> int:
        return len(self.labels)


def leading_principal_minors(matrix: Sequence[Sequence[Fraction]]) -> List[Fraction]:
    """All leading principal minors, by fraction-free (Bareiss) elimination.

    Denominators are cleared first, so the elimination runs over integers;
    the pivot after step k is the size-(k+1) minor of the scaled matrix.  A
    zero pivot (possible for matrices that are not definite) falls back to
    exact fraction determinants.
    """
    m = len(matrix)
    if m == 0:
        return []
    scale = 1
    for row in matrix:
        for x in row:
            d = Fraction(x).denominator
            scale = scale * d // math.gcd(scale, d)
    a = [[int(Fraction(x) * scale) for x in row] for row in matrix]
    minors: List[Fraction] = []
    prev = 1
    for k in range(m):
        pivot = a[k][k]
        if pivot == 0:
            return [
                _det_fraction([row[: j + 1] for row in matrix[: j + 1]])
                for j in range(m)
            ]
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        minors.append(Fraction(pivot, scale ** (k + 1)))
        prev = pivot
    return minors


def _det_fraction(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    m = len(rows)
    a = [list(row) for row in rows]
    det = Fraction(1)
    for k in range(m):
        pivot_row = next((i for i in range(k, m) if a[i][k] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
            det = -det
        det *= a[k][k]
        inv = Fraction(1) / a[k][k]
        for i in range(k + 1, m):
            factor = a[i][k] * inv
            if factor == 0:
                continue
            for j in range(k, m):
                a[i][j] -= factor * a[k][j]
    return det


def is_negative_definite(lattice: IntersectionLattice) -> bool:
    """Leading principal minors alternate in sign, starting negative."""
    minors = leading_principal_minors(lattice.matrix)
    for k, minor in enumerate(minors):
        if (-1) ** (k + 1) * minor <= 0:
            return False
    return True


def solve_exact(matrix: Sequence[Sequence[Fraction]],
                rhs: Sequence[Fraction]) -> List[Fraction]:
    """Exact solve of a nonsingular rational system by Gaussian elimination."""
    m = len(rhs)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for k in range(m):
        pivot_row = next((i for i in range(k, m) if a[i][k] != 0), None)
        if pivot_row is None:
            raise DomainError("singular system")
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
        inv = Fraction(1) / a[k][k]
        for i in range(m):
            if i == k:
                continue
            factor = a[i][k] * inv
            if factor == 0:
                continue
            for j in range(k, m + 1):
                a[i][j] -= factor * a[k][j]
    return [a[i][m] / a[i][i] for i in range(m)]


# -- equilibrium divisors ------------------------------------------------------

@dataclass(frozen=True)
class EquilibriumDivisor:
    coefficients: Tuple[Fraction, ...]
    dd: Fraction
    effective: bool

    def as_dict(self) -> dict:
        return {
            "coefficients": [str(v) for v in self.coefficients],
            "dd": str(self.dd),
            "effective": self.effective,
        }


def equilibrium_divisor(lattice: IntersectionLattice) -> EquilibriumDivisor:
    """The unique vertical correction v with (C + V) . W = 0 for all W.

    Solved exactly; against a negative definite pairing with the section
    meeting the support, the solution is effective and the corrected
    self-intersection is cc + c . v.
    """
    if not is_negative_definite(lattice):
        raise NotNegativeDefinite("intersection matrix must be negative definite")
    if lattice.size == 0:
        return EquilibriumDivisor((), lattice.cc, True)
    v = solve_exact(lattice.matrix, [-x for x in lattice.c])
    dd = lattice.cc + sum(ci * vi for ci, vi in zip(lattice.c, v))
    return EquilibriumDivisor(tuple(v), dd, all(x >= 0 for x in v))


@dataclass(frozen=True)
class CNBReport:
    holds: bool
    dd: Fraction
    component_degrees: Tuple[Fraction, ...]

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "dd": str(self.dd),
            "component_degrees": [str(x) for x in self.component_degrees],
        }


def divisor_self_intersection(lattice: IntersectionLattice,
                              v: Sequence[Fraction]) -> Fraction:
    v = [Fraction(x) for x in v]
    quad = sum(
        v[i] * v[j] * lattice.matrix[i][j]
        for i in range(lattice.size)
        for j in range(lattice.size)
    )
    lin = sum(ci * vi for ci, vi in zip(lattice.c, v))
    return lattice.cc + 2 * lin + quad


def is_CNB(lattice: IntersectionLattice, v: Sequence[Fraction]) -> CNBReport:
    """Nef-and-big test for C + sum(v_i W_i): componentwise degrees plus bigness.

    For the equilibrium coefficients the component degrees vanish and the
    test reduces to positivity of the self-intersection, returned as witness.
    """
    v = [Fraction(x) for x in v]
    if len(v) != lattice.size:
        raise DomainError("coefficient vector length mismatch")
    if any(x < 0 for x in v):
        raise DomainError("candidate coefficients must be nonnegative")
    component = tuple(
        lattice.c[i]
        + sum(lattice.matrix[i][j] * v[j] for j in range(lattice.size))
        for i in range(lattice.size)
    )
    section_degree = lattice.cc + sum(ci * vi for ci, vi in zip(lattice.c, v))
    dd = divisor_self_intersection(lattice, v)
    holds = all(x >= 0 for x in component) and section_degree >= 0 and dd > 0
    return CNBReport(holds=holds, dd=dd, component_degrees=component)


# -- blow-up chain fixtures ----------------------------------------------------

def blowup_chain_fixture(n: int, cc) -> IntersectionLattice:
    """Chain of a proper transform and n-1 middle exceptional curves.

    The section meets only the proper transform; the equilibrium coefficients
    come out (n, n-1, ..., 1) with corrected self-intersection cc + n.
    """
    if n < 1:
        raise DomainError("chain length must be >= 1")
    labels = ["Xt"] + [f"E{i}" for i in range(1, n)]
    matrix = [[Fraction(0)] * n for _ in range(n)]
    matrix[0][0] = Fraction(-1)
    for i in range(1, n):
        matrix[i][i] = Fraction(-2)
    for i in range(n - 1):
        matrix[i][i + 1] = matrix[i + 1][i] = Fraction(1)
    c = [Fraction(1)] + [Fraction(0)] * (n - 1)
    return IntersectionLattice(tuple(labels), tuple(map(tuple, matrix)), tuple(c), Fraction(cc))


# -- extremality comparison ----------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    coefficient_gap: Tuple[Fraction, ...]   # equilibrium minus candidate
    coefficient_dominates: bool
    section_gap: Fraction                   # C.D - C.Dtilde
    dd_gap: Fraction                        # D.D - Dtilde.Dtilde
    quadratic_identity_holds: bool          # dd_gap == -(gap . M . gap)
    equality: bool

    def as_dict(self) -> dict:
        return {
            "coefficient_gap": [str(x) for x in self.coefficient_gap],
            "coefficient_dominates": self.coefficient_dominates,
            "section_gap": str(self.section_gap),
            "dd_gap": str(self.dd_gap),
            "quadratic_identity_holds": self.quadratic_identity_holds,
            "equality": self.equality,
        }


def denough_compare(lattice: IntersectionLattice,
                    v_eq: Sequence[Fraction],
                    v_candidate: Sequence[Fraction]) -> ComparisonReport:
    """Compare the equilibrium divisor with a nef-and-big candidate.

    The candidate must pass the componentwise checks; then the equilibrium
    dominates coefficientwise, meets the section at least as positively, and
    its self-intersection exceeds the candidate's by the exact amount
    -(delta . M . delta).
    """
    v_eq = [Fraction(x) for x in v_eq]
    v_cand = [Fraction(x) for x in v_candidate]
    report = is_CNB(lattice, v_cand)
    if not report.holds:
        raise CandidateNotCNB("candidate fails the nef-and-big checks")
    delta = [a - b for a, b in zip(v_eq, v_cand)]
    dd_eq = divisor_self_intersection(lattice, v_eq)
    dd_cand = report.dd
    quad = sum(
        delta[i] * delta[j] * lattice.matrix[i][j]
        for i in range(lattice.size)
        for j in range(lattice.size)
    )
    section_eq = lattice.cc + sum(ci * vi for ci, vi in zip(lattice.c, v_eq))
    section_cand = lattice.cc + sum(ci * vi for ci, vi in zip(lattice.c, v_cand))
    return ComparisonReport(
        coefficient_gap=tuple(delta),
        coefficient_dominates=all(x >= 0 for x in delta),
        section_gap=section_eq - section_cand,
        dd_gap=dd_eq - dd_cand,
        quadratic_identity_holds=(dd_eq - dd_cand) == -quad,
        equality=all(x == 0 for x in delta),
    )
