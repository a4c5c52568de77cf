"""Truncated formal power series over exact rationals or floats.

A series is a finite coefficient vector c_0..c_N, understood modulo X^{N+1}.
Arithmetic in the rational backend is exact; the float backend exists for
numeric experiments and uses a configurable zero threshold.  Values are
immutable and safe to share between threads.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import AllZero, DomainError, NonzeroConstantTerm, NotInvertible

Coefficient = Union[Fraction, float]

#: Float-backend zero threshold.  The rational backend tests exactly.
DEFAULT_ZERO_TOL = 1e-12


def _normalize(coeffs: Iterable) -> tuple:
    out = []
    has_float = False
    for c in coeffs:
        if isinstance(c, Fraction):
            out.append(c)
        elif isinstance(c, int):
            out.append(Fraction(c))
        elif isinstance(c, float):
            out.append(c)
            has_float = True
        else:
            raise DomainError(f"unsupported coefficient type {type(c).__name__}")
    if has_float:
        out = [float(c) for c in out]
    return tuple(out)


class TruncatedSeries:
    """Formal power series truncated at a fixed order.

    Equality is coefficientwise up to the common order, matching how the
    truncated ring is used: two series that agree as far as both are known
    count as equal.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        coeffs = _normalize(coeffs)
        if not coeffs:
            raise DomainError("a series needs at least the constant coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    # -- basic structure -------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def backend(self) -> str:
        return "float" if self.coeffs and isinstance(self.coeffs[0], float) else "rational"

    def __getitem__(self, k: int) -> Coefficient:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        raise IndexError(k)

    def coefficient(self, k: int) -> Coefficient:
        """Coefficient of X^k, zero beyond the truncation order."""
        if k < 0:
            raise IndexError(k)
        if k < len(self.coeffs):
            return self.coeffs[k]
        return 0.0 if self.backend == "float" else Fraction(0)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order < 0:
            raise DomainError("order must be nonnegative")
        zero = 0.0 if self.backend == "float" else Fraction(0)
        coeffs = list(self.coeffs[: order + 1])
        coeffs += [zero] * (order + 1 - len(coeffs))
        return TruncatedSeries(coeffs)

    def to_float(self) -> "TruncatedSeries":
        return TruncatedSeries([float(c) for c in self.coeffs])

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        n = min(self.order, other.order)
        return all(self.coeffs[k] == other.coeffs[k] for k in range(n + 1))

    __hash__ = None  # mutable-style equality

    def __repr__(self) -> str:
        return f"TruncatedSeries({list(self.coeffs)!r})"

    # -- ring operations -------------------------------------------------

    def _common(self, other: "TruncatedSeries"):
        n = min(self.order, other.order)
        a, b = self, other
        if a.backend != b.backend:
            a, b = a.to_float(), b.to_float()
        return a, b, n

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        a, b, n = self._common(other)
        return TruncatedSeries([a.coeffs[k] + b.coeffs[k] for k in range(n + 1)])

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        a, b, n = self._common(other)
        return TruncatedSeries([a.coeffs[k] - b.coeffs[k] for k in range(n + 1)])

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries([-c for c in self.coeffs])

    def __mul__(self, other) -> "TruncatedSeries":
        if isinstance(other, (int, Fraction, float)):
            scalar = Fraction(other) if isinstance(other, int) else other
            return TruncatedSeries([c * scalar for c in self.coeffs])
        a, b, n = self._common(other)
        zero = 0.0 if a.backend == "float" else Fraction(0)
        out = [zero] * (n + 1)
        for i, ci in enumerate(a.coeffs[: n + 1]):
            if ci == 0:
                continue
            for j in range(0, n + 1 - i):
                out[i + j] += ci * b.coeffs[j]
        return TruncatedSeries(out)

    __rmul__ = __mul__

    def evaluate(self, z):
        """Horner evaluation of the truncated polynomial at a number z."""
        coeffs = self.coeffs
        if isinstance(z, complex) or isinstance(z, float):
            coeffs = [float(c) for c in coeffs]
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = acc * z + c
        return acc


def x_series(order: int, backend: str = "rational") -> TruncatedSeries:
    """The identity series X to the given order."""
    if order < 1:
        raise DomainError("identity series needs order >= 1")
    if backend == "float":
        return TruncatedSeries([0.0, 1.0] + [0.0] * (order - 1))
    return TruncatedSeries([Fraction(0), Fraction(1)] + [Fraction(0)] * (order - 1))


def _is_zero(c: Coefficient, zero_tol: float) -> bool:
    if isinstance(c, float):
        return abs(c) <= zero_tol
    return c == 0


def compose(f: TruncatedSeries, g: TruncatedSeries,
            zero_tol: float = DEFAULT_ZERO_TOL) -> TruncatedSeries:
    """Coefficients of f(g(X)) modulo X^{N+1}, N the common order.

    Requires g(0) = 0, otherwise the truncated composition is not defined.
    """
    a, b, n = f._common(g)
    if not _is_zero(b.coeffs[0], zero_tol):
        raise NonzeroConstantTerm(f"inner series has constant term {b.coeffs[0]}")
    a, b = a.truncate(n), b.truncate(n)
    # Horner in g: result = (..(f_N * g + f_{N-1}) * g + ...) + f_0
    acc = TruncatedSeries([a.coeffs[n]]).truncate(n)
    for k in range(n - 1, -1, -1):
        acc = acc * b
        acc = TruncatedSeries(
            [acc.coeffs[0] + a.coeffs[k]] + list(acc.coeffs[1:])
        )
    return acc


def compositional_inverse(g: TruncatedSeries,
                          zero_tol: float = DEFAULT_ZERO_TOL) -> TruncatedSeries:
    """The series h with h(g(X)) = X mod X^{N+1}.

    Solved term by term: the coefficient of X^k in h(g) is triangular in the
    unknowns with diagonal entry g_1^k, so the rational backend stays exact.
    """
    if not _is_zero(g.coeffs[0], zero_tol):
        raise NonzeroConstantTerm(f"series has constant term {g.coeffs[0]}")
    if g.order < 1 or _is_zero(g.coeffs[1], zero_tol):
        raise NotInvertible("linear coefficient vanishes")
    n = g.order
    one = 1.0 if g.backend == "float" else Fraction(1)
    zero = 0.0 if g.backend == "float" else Fraction(0)
    # g_pows[j] = g^j truncated at order n
    g_pows = [TruncatedSeries([one]).truncate(n)]
    for _ in range(n):
        g_pows.append(g_pows[-1] * g)
    h = [zero] * (n + 1)
    for k in range(1, n + 1):
        target = one if k == 1 else zero
        acc = target
        for j in range(1, k):
            acc -= h[j] * g_pows[j].coeffs[k]
        h[k] = acc / g_pows[k].coeffs[k]
    return TruncatedSeries(h)


def valuation_and_leading(s: TruncatedSeries, drop_constant: bool = False,
                          zero_tol: float = DEFAULT_ZERO_TOL):
    """Smallest index e >= 1 with nonzero coefficient, and that coefficient.

    Without ``drop_constant`` the constant term must vanish; with it, a_0 is
    ignored.  Raises AllZero when the series is constant to its order.
    """
    if not drop_constant and not _is_zero(s.coeffs[0], zero_tol):
        raise DomainError(
            "series has a constant term; pass drop_constant to ignore it"
        )
    for e in range(1, s.order + 1):
        if not _is_zero(s.coeffs[e], zero_tol):
            return e, s.coeffs[e]
    raise AllZero(f"no nonzero coefficient up to order {s.order}")


def parse_series_literal(items: Sequence) -> TruncatedSeries:
    """Series from a list of literals; order inferred from the length.

    Strings containing '.', 'e', or 'E' parse as floats, everything else as
    exact rationals ("3/7", "-2").
    """
    from .errors import ParseError

    coeffs = []
    for pos, item in enumerate(items):
        if isinstance(item, (int, Fraction)):
            coeffs.append(Fraction(item))
            continue
        if isinstance(item, float):
            coeffs.append(item)
            continue
        if not isinstance(item, str):
            raise ParseError(f"unsupported literal {item!r}", pos)
        text = item.strip()
        try:
            if any(ch in text for ch in ".eE"):
                coeffs.append(float(text))
            else:
                coeffs.append(Fraction(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad coefficient literal {text!r}: {exc}", pos) from None
    if not coeffs:
        raise ParseError("empty series literal", 0)
    return TruncatedSeries(coeffs)
