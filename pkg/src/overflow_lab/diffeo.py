"""Truncated groups of formal diffeomorphisms tangent to the identity.

A level-n element is X + a_2 X^2 + ... + a_{n+1} X^{n+1} modulo X^{n+2},
under composition.  The Haar measure in these coefficients is Lebesgue, the
integer elements form a cocompact lattice, and the unit cube of coefficient
vectors is a fundamental domain.  The group acts on series with fixed leading
term a X^e by phi -> phi o g^{-1}; the module verifies the measure-theoretic
facts behind that action numerically: the constant Jacobian (e a)^n of the
orbit coordinate map, and the lattice-point counting bound for how often an
orbit meets a coefficient box.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DomainError,
    EnumerationTooLarge,
    LevelMismatch,
    StepTooSmall,
)
from .series import TruncatedSeries, compose, compositional_inverse

ENUMERATION_CAP = 10_000


@dataclass(frozen=True)
class TruncatedDiffeo:
    """X plus higher terms, truncated at level n (coefficients a_2..a_{n+1})."""

    coeffs: tuple

    @property
    def level(self) -> int:
        return len(self.coeffs)

    def as_series(self, order: int) -> TruncatedSeries:
        zero = 0.0 if self._is_float() else Fraction(0)
        one = 1.0 if self._is_float() else Fraction(1)
        cs = [zero, one] + list(self.coeffs)
        cs += [zero] * (order + 1 - len(cs))
        return TruncatedSeries(cs[: order + 1])

    def _is_float(self) -> bool:
        return any(isinstance(c, float) for c in self.coeffs)


def identity_diffeo(level: int, backend: str = "rational") -> TruncatedDiffeo:
    zero = 0.0 if backend == "float" else Fraction(0)
    return TruncatedDiffeo((zero,) * level)


def _from_series(s: TruncatedSeries, level: int) -> TruncatedDiffeo:
    return TruncatedDiffeo(tuple(s.truncate(level + 1).coeffs[2:]))


def group_compose(x: TruncatedDiffeo, y: TruncatedDiffeo) -> TruncatedDiffeo:
    """Truncated composition x(y(X)) at the common level."""
    if x.level != y.level:
        raise LevelMismatch(f"levels {x.level} and {y.level}")
    order = x.level + 1
    return _from_series(compose(x.as_series(order), y.as_series(order)), x.level)


def group_invert(x: TruncatedDiffeo) -> TruncatedDiffeo:
    return _from_series(compositional_inverse(x.as_series(x.level + 1)), x.level)


@dataclass(frozen=True)
class OrbitElement:
    """Series a X^e + higher terms, truncated at level n beyond the lead."""

    e: int
    a: int
    coeffs: tuple  # coefficients of X^{e+1} .. X^{e+n}

    def __post_init__(self):
        if self.e < 1:
            raise DomainError("leading exponent must be >= 1")
        if self.a == 0:
            raise DomainError("leading coefficient must be nonzero")

    @property
    def level(self) -> int:
        return len(self.coeffs)

    def as_series(self) -> TruncatedSeries:
        lead = self.a
        is_float = any(isinstance(c, float) for c in self.coeffs)
        zero = 0.0 if is_float else Fraction(0)
        cs = [zero] * self.e + [float(lead) if is_float else Fraction(lead)]
        cs += list(self.coeffs)
        return TruncatedSeries(cs)


def act(g: TruncatedDiffeo, phi: OrbitElement) -> OrbitElement:
    """The left action phi o g^{-1}, truncated back to the orbit level."""
    if g.level != phi.level:
        raise LevelMismatch(f"levels {g.level} and {phi.level}")
    order = phi.e + phi.level
    inv = compositional_inverse(g.as_series(order))
    moved = compose(phi.as_series().truncate(order), inv)
    return OrbitElement(phi.e, phi.a, tuple(moved.coeffs[phi.e + 1 :]))


def haar_sample(n: int, seed: int) -> TruncatedDiffeo:
    """Fundamental-domain representative with i.i.d. uniform coefficients."""
    if n < 1:
        raise DomainError("level must be >= 1")
    rng = np.random.default_rng(seed)
    return TruncatedDiffeo(tuple(float(x) for x in rng.uniform(size=n)))


def reduce_mod_integer(g: TruncatedDiffeo) -> Tuple[TruncatedDiffeo, TruncatedDiffeo]:
    """Right-translate by an integer element into the unit coefficient cube."""
    level = g.level
    current = g
    gamma = identity_diffeo(level, "rational")
    for k in range(2, level + 2):
        c = current.coeffs[k - 2]
        shift = -math.floor(c)
        if shift != 0:
            gen_coeffs = [Fraction(0)] * level
            gen_coeffs[k - 2] = Fraction(shift)
            gen = TruncatedDiffeo(tuple(gen_coeffs))
            current = group_compose(current, gen)
            gamma = group_compose(gamma, gen)
    return gamma, current


def reduce_to_fundamental(phi: OrbitElement) -> Tuple[TruncatedDiffeo, OrbitElement]:
    """Split an integer orbit element as gamma acting on a domain representative.

    Successive generators X + b X^k shift the coefficient at X^{e+k-1} by
    -a e b without touching lower ones, so each coefficient lands in
    [0, e |a|) in turn; everything stays in exact integers and the returned
    pair reconstructs the input via the group action.
    """
    if any(
        not (isinstance(c, (int, Fraction)) and Fraction(c).denominator == 1)
        for c in phi.coeffs
    ):
        raise DomainError("reduction needs integer coefficients")
    n = phi.level
    span = phi.e * abs(phi.a)
    current = OrbitElement(
        phi.e, phi.a, tuple(Fraction(c) for c in phi.coeffs)
    )
    total = identity_diffeo(n, "rational")
    ae = phi.e * phi.a
    for k in range(2, n + 2):
        c = int(current.coeffs[k - 2])
        remainder = c % span
        b = (c - remainder) // ae
        if b != 0:
            gen_coeffs = [Fraction(0)] * n
            gen_coeffs[k - 2] = Fraction(b)
            gen = TruncatedDiffeo(tuple(gen_coeffs))
            current = act(gen, current)
            total = group_compose(gen, total)
        assert 0 <= int(current.coeffs[k - 2]) < span
    gamma = group_invert(total)
    return gamma, current


# -- Jacobian of the orbit coordinate map --------------------------------------

def _orbit_coordinates(phi: OrbitElement, g_coeffs: Sequence[float]) -> np.ndarray:
    """Coefficients e+1 .. e+n of phi o g for g = X + sum g_i X^i."""
    n = len(g_coeffs)
    order = phi.e + n
    g = TruncatedSeries([0.0, 1.0] + [float(c) for c in g_coeffs]).truncate(order)
    moved = compose(phi.as_series().to_float().truncate(order), g)
    return np.array([float(c) for c in moved.coeffs[phi.e + 1 :]], dtype=float)


@dataclass(frozen=True)
class JacobianCheck:
    determinant: float
    expected: float
    relative_error: float

    def as_dict(self) -> dict:
        return {
            "determinant": self.determinant,
            "expected": self.expected,
            "relative_error": self.relative_error,
        }


def jacobian_check(e: int, a: int, n: int, phi: OrbitElement,
                   g: TruncatedDiffeo, h: float = 1e-3) -> JacobianCheck:
    """Central-difference Jacobian of g -> phi o g against the constant (e a)^n.

    Differencing is deliberately independent of the exact-composition path:
    its purpose is to confirm the closed form, not to reuse it.  Determinants
    at steps h and h/2 must agree or the step is rejected.
    """
    if n > 6:
        raise DomainError("finite-difference check limited to level <= 6")
    if phi.e != e or phi.a != a or phi.level != n:
        raise DomainError("orbit element does not match (e, a, n)")
    if g.level != n:
        raise LevelMismatch(f"sample point level {g.level}, expected {n}")
    expected = float((e * a) ** n)
    if n == 0:
        return JacobianCheck(1.0, 1.0, 0.0)
    base = [float(c) for c in g.coeffs]

    def determinant(step: float) -> float:
        cols = []
        for i in range(n):
            plus = list(base)
            minus = list(base)
            plus[i] += step
            minus[i] -= step
            cols.append(
                (_orbit_coordinates(phi, plus) - _orbit_coordinates(phi, minus))
                / (2 * step)
            )
        return float(np.linalg.det(np.stack(cols, axis=1)))

    det_h = determinant(h)
    det_h2 = determinant(h / 2)
    scale = max(abs(expected), 1.0)
    if abs(det_h - det_h2) > 1e-5 * scale:
        raise StepTooSmall(
            f"determinant unstable across step halving: {det_h} vs {det_h2}"
        )
    return JacobianCheck(
        determinant=det_h2,
        expected=expected,
        relative_error=abs(det_h2 - expected) / scale,
    )


# -- Monte-Carlo lattice-box bound ----------------------------------------------

def _batched_truncated_product(u: np.ndarray, v: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros((u.shape[0], order + 1))
    for i in range(min(u.shape[1], order + 1)):
        top = min(v.shape[1], order + 1 - i)
        for j in range(top):
            out[:, i + j] += u[:, i] * v[:, j]
    return out


def _batched_inverse(g: np.ndarray, order: int) -> np.ndarray:
    """Compositional inverses of a batch of X + sum a_j X^j, to the order."""
    batch = g.shape[0]
    inv = np.zeros((batch, order + 1))
    inv[:, 1] = 1.0
    for _ in range(order):
        powers = inv
        correction = np.zeros_like(inv)
        for j in range(2, g.shape[1]):
            powers = _batched_truncated_product(powers, inv, order)
            correction += g[:, j][:, None] * powers
        new = -correction
        new[:, 1] += 1.0
        inv = new
    return inv


@dataclass(frozen=True)
class MeasureBoundReport:
    estimate: float
    stderr: float
    paper_bound: float
    product_bound: float
    samples: int
    shards: int
    seed: int
    uninformative: bool

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "paper_bound": self.paper_bound,
            "product_bound": self.product_bound,
            "samples": self.samples,
            "shards": self.shards,
            "seed": self.seed,
            "uninformative": self.uninformative,
        }


def measure_bound_mc(e: int, a: int, rho: float, box_radius: float, n: int,
                     samples: int = 100_000, seed: int = 0,
                     shards: int = 4) -> MeasureBoundReport:
    """Frequency with which a translated orbit lattice meets a coefficient box.

    Samples the fundamental cube, enumerates the finite set of domain
    representatives, and counts samples g for which some representative phi
    has all trailing coefficients of phi o g^{-1} within |coeff_i| <=
    box_radius * rho^{-i}.  The counting bound compares two closed forms: the
    published exponent (n+2e+2)(n-1)/2 and the sharper product-form exponent
    sum of i = e+1 .. e+n; the former is the weaker (larger) bound and is
    reported as ``paper_bound``.
    """
    if n < 1 or n > 4:
        raise DomainError("level must be between 1 and 4")
    if samples < 1 or shards < 1:
        raise DomainError("need positive samples and shards")
    span = e * abs(a)
    if span**n > ENUMERATION_CAP:
        raise EnumerationTooLarge(f"{span}^{n} domain representatives")
    order = e + n
    reps = []
    for tail in itertools.product(range(span), repeat=n):
        coeffs = np.zeros(order + 1)
        coeffs[e] = a
        coeffs[e + 1 :] = tail
        reps.append(coeffs)
    reps = np.stack(reps)
    box = box_radius * np.array([rho ** -(e + 1 + i) for i in range(n)])

    per_shard = [samples // shards] * shards
    for i in range(samples % shards):
        per_shard[i] += 1
    hits = 0
    for shard, count in enumerate(per_shard):
        if count == 0:
            continue
        rng = np.random.default_rng(np.random.SeedSequence((seed, shard)))
        g = np.zeros((count, n + 2))
        g[:, 1] = 1.0
        g[:, 2:] = rng.uniform(size=(count, n))
        inv = _batched_inverse(g, order)
        # powers of the inverse: inv^e .. inv^{e+n}
        power = inv
        for _ in range(e - 1):
            power = _batched_truncated_product(power, inv, order)
        powers = [power]
        for _ in range(n):
            powers.append(_batched_truncated_product(powers[-1], inv, order))
        in_event = np.zeros(count, dtype=bool)
        for rep in reps:
            moved = rep[e] * powers[0]
            for i in range(1, n + 1):
                if rep[e + i] != 0.0:
                    moved = moved + rep[e + i] * powers[i]
            trailing = np.abs(moved[:, e + 1 :])
            in_event |= np.all(trailing <= box[None, :], axis=1)
        hits += int(np.sum(in_event))

    estimate = hits / samples
    stderr = math.sqrt(max(estimate * (1 - estimate), 1e-300) / samples)
    paper_exponent = (n + 2 * e + 2) * (n - 1) / 2
    product_exponent = sum(range(e + 1, e + n + 1))
    paper_bound = (2 * box_radius) ** n * rho ** (-paper_exponent)
    product_bound = (2 * box_radius) ** n * rho ** (-product_exponent)
    return MeasureBoundReport(
        estimate=estimate,
        stderr=stderr,
        paper_bound=paper_bound,
        product_bound=product_bound,
        samples=samples,
        shards=shards,
        seed=seed,
        uninformative=(rho <= 1.0 or paper_bound >= 1.0),
    )
