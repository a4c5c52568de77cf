import math

import numpy as np
import pytest

from overflow_lab.errors import NoConvergence, PoleOnDisk
from overflow_lab.maps import DiskMap, parse_map
from overflow_lab.quadrature import (
    QuadratureSettings,
    circle_log_mean,
    gauss_log_rule,
    nevanlinna_T,
    torus_log_double_integral,
)

IDENTITY = DiskMap((0, 1))
TIGHT = QuadratureSettings(tol=1e-9)


class TestCircleLogMean:
    def test_jensen_inside(self):
        assert circle_log_mean(IDENTITY, 0.0, 2.0) == pytest.approx(math.log(2), abs=1e-8)

    def test_jensen_outside(self):
        assert circle_log_mean(IDENTITY, 3.0, 1.0) == pytest.approx(math.log(3), abs=1e-8)

    def test_square_at_zero(self):
        zsq = DiskMap((0, 0, 1))
        assert circle_log_mean(zsq, 0.0, 1.0) == pytest.approx(0.0, abs=1e-8)

    def test_random_jensen_corpus(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            r = float(rng.uniform(0.2, 3.0))
            c = complex(rng.normal(), rng.normal())
            ratio = abs(c) / r
            if 0.99 <= ratio <= 1.01:
                continue
            expected = math.log(max(r, abs(c)))
            got = circle_log_mean(IDENTITY, c, r)
            assert got == pytest.approx(expected, abs=1e-8)


class TestTorusDoubleIntegral:
    def test_identity_unit_circle(self):
        assert torus_log_double_integral(IDENTITY, 1.0, TIGHT) == pytest.approx(0.0, abs=1e-8)

    def test_identity_radius_two(self):
        got = torus_log_double_integral(IDENTITY, 2.0, TIGHT)
        assert got == pytest.approx(math.log(2), abs=1e-8)

    def test_square_unit(self):
        zsq = DiskMap((0, 0, 1))
        assert torus_log_double_integral(zsq, 1.0, TIGHT) == pytest.approx(0.0, abs=1e-7)

    def test_moebius_consistency(self):
        # log|m(z1)-m(z2)| for m = (z-2)/(z+2): cross form avoids poles
        m = parse_map("(z-2)/(z+2)")
        got = torus_log_double_integral(m, 1.0)
        # closed form: |m(z1)-m(z2)| = 4|z1-z2| / (|z1+2||z2+2|)
        # => integral = log 4 + 0 - 2 * mean log|z+2| = log 4 - 2 log 2 = 0
        assert got == pytest.approx(0.0, abs=1e-6)


class TestGaussLogRule:
    @pytest.mark.parametrize("k", [0, 1, 2, 5, 10])
    def test_monomial_moments(self, k):
        # int_0^1 u^k * u log(1/u) du = 1/(k+2)^2
        nodes, weights = gauss_log_rule(24)
        got = float(np.sum(weights * nodes**k))
        assert got == pytest.approx(1.0 / (k + 2) ** 2, rel=1e-12)

    def test_analytic_function(self):
        # int_0^1 exp(u) u log(1/u) du, reference by mpmath-free series:
        # sum_k 1/k! * 1/(k+2)^2
        nodes, weights = gauss_log_rule(24)
        got = float(np.sum(weights * np.exp(nodes)))
        ref = sum(1.0 / math.factorial(k) / (k + 2) ** 2 for k in range(40))
        assert got == pytest.approx(ref, rel=1e-13)


class TestNevanlinna:
    def test_constant_map(self):
        const = DiskMap((5,))
        assert nevanlinna_T(const, 1.0, "area") == 0.0
        assert nevanlinna_T(const, 1.0, "boundary") == 0.0

    def test_identity_boundary_closed_form(self):
        got = nevanlinna_T(IDENTITY, 1.0, "boundary")
        assert got == pytest.approx(math.log(2) / 2, abs=1e-10)

    def test_identity_area_matches(self):
        got = nevanlinna_T(IDENTITY, 1.0, "area")
        assert got == pytest.approx(math.log(2) / 2, abs=1e-6)

    def test_boundary_vs_area_quadratic(self):
        alpha = parse_map("z^2+z")
        tb = nevanlinna_T(alpha, 1.0, "boundary")
        ta = nevanlinna_T(alpha, 1.0, "area")
        assert ta == pytest.approx(tb, abs=1e-4)

    def test_pole_on_disk_rejected(self):
        m = parse_map("1/(z-1/2)")
        with pytest.raises(PoleOnDisk):
            nevanlinna_T(m, 1.0, "boundary")

    def test_area_handles_interior_pole(self):
        m = parse_map("1/(z-1/2)")
        value = nevanlinna_T(m, 1.0, "area")
        assert math.isfinite(value) and value > 0

    def test_nondecreasing_in_radius(self):
        alpha = parse_map("z^3+z")
        values = [nevanlinna_T(alpha, r, "boundary") for r in (0.5, 1.0, 1.5, 2.0)]
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))


def test_no_convergence_raises():
    wild = QuadratureSettings(base_grid=4, tol=1e-14, max_depth=1)
    alpha = parse_map("z^5+z^2+z")
    with pytest.raises(NoConvergence):
        torus_log_double_integral(alpha, 1.3, wild)
