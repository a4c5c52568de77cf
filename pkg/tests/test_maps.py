from fractions import Fraction as F

import pytest

from overflow_lab.errors import ConstantMap, ParseError, PoleAtOrigin
from overflow_lab.maps import DiskMap, parse_map


class TestParser:
    def test_polynomial(self):
        m = parse_map("z^3+z")
        assert m.num == (F(0), F(1), F(0), F(1))
        assert m.is_polynomial

    def test_rational(self):
        m = parse_map("(z-2)/(z+2)")
        assert m.num == (F(-2), F(1))
        assert m.den == (F(2), F(1))

    def test_coefficients(self):
        m = parse_map("2*z^4+3*z")
        assert m.num == (F(0), F(3), F(0), F(0), F(2))

    def test_float_literal(self):
        m = parse_map("z^2 - z/10")
        assert m.num == (F(0), F(-1, 10), F(1))

    def test_unary_minus(self):
        m = parse_map("-z^2+1")
        assert m.num == (F(1), F(0), F(-1))

    def test_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_map("z^3 + $")
        assert err.value.position == 6

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            parse_map("z+1 )")

    def test_pole_at_origin_rejected(self):
        with pytest.raises(PoleAtOrigin):
            parse_map("1/z")


class TestDiskMapStructure:
    def test_ramification_simple(self):
        assert parse_map("z^3+z").ramification_index() == 1

    def test_ramification_higher(self):
        m = parse_map("z^2+5")
        assert m.ramification_index() == 2
        assert m.jet() == 1

    def test_jet_scaling(self):
        m = parse_map("7*z^3")
        assert m.ramification_index() == 3
        assert m.jet() == 7

    def test_rational_jet(self):
        m = parse_map("(z-2)/(z+2)")
        # alpha(0) = -1, alpha'(0) = ((z+2) - (z-2))/(z+2)^2 at 0 = 1
        assert m.value_at_zero() == -1
        assert m.ramification_index() == 1
        assert m.jet() == 1

    def test_constant_detected(self):
        with pytest.raises(ConstantMap):
            parse_map("3").ramification_index()
        assert parse_map("(2*z+2)/(z+1)").is_constant()

    def test_scaled(self):
        m = parse_map("z^3+z").scaled(F(2))
        assert m.num == (F(0), F(2), F(0), F(8))

    def test_real_structure_flag(self):
        assert parse_map("z^2-z/10").real_coefficients
        assert DiskMap((0, 1j)).real_coefficients is False
