"""
Tests for exact parsing, formatting, truncation and integer helpers.
"""

from fractions import Fraction

import pytest

from errors import NumericParseError, ParameterError, SingularBasisError
from exactnum import (
    FixedPointReal,
    ceil_log2,
    ceil_sqrt,
    determinant,
    format_exact,
    integer_root,
    parse_exact,
    scale_to_integer,
    solve_rational,
    to_fraction,
    truncate,
)


class TestParsing:
    """Test exact parsing of numeric strings."""

    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ("-0.3", Fraction(-3, 10)),
            ("1e-20 ", Fraction(1, 10**20)),
            ("7/12", Fraction(7, 12)),
            ("  42", Fraction(42)),
            ("+2.5E3", Fraction(2500)),
        ],
    )
    def test_parse_exact(self, text: str, expected: Fraction) -> None:
        """Test decimal, exponent and a/b forms parse without rounding."""
        assert parse_exact(text) == expected

    @pytest.mark.parametrize("text", ["abc", "1/0", "", "0x10", "1.2.3"])
    def test_parse_exact_rejects_malformed(self, text: str) -> None:
        """Test malformed strings raise with the offending token."""
        with pytest.raises(NumericParseError) as exc_info:
            parse_exact(text)
        assert exc_info.value.token == text

    def test_to_fraction_rejects_floats(self) -> None:
        """Test binary floats and bools are refused."""
        with pytest.raises(NumericParseError):
            to_fraction(0.5)  # type: ignore[arg-type]
        with pytest.raises(NumericParseError):
            to_fraction(True)

    def test_to_fraction_accepts_exact_types(self) -> None:
        assert to_fraction(3) == 3
        assert to_fraction(Fraction(1, 3)) == Fraction(1, 3)
        assert to_fraction("0.125") == Fraction(1, 8)


class TestFormatting:
    """Test rendering of rationals."""

    @pytest.mark.parametrize(
        ("value", "expected"),
        [
            (Fraction(1, 4), "0.25"),
            (Fraction(-5, 2), "-2.5"),
            (Fraction(-1, 20), "-0.05"),
            (Fraction(7), "7"),
            (-3, "-3"),
            (Fraction(1, 3), "1/3"),
            (Fraction(-2, 7), "-2/7"),
            (Fraction(19, 20), "0.95"),
        ],
    )
    def test_format_exact(self, value: Fraction | int, expected: str) -> None:
        assert format_exact(value) == expected

    @pytest.mark.parametrize("value", [Fraction(3, 1024), Fraction(-7, 3), Fraction(123456789, 10**9)])
    def test_format_parses_back(self, value: Fraction) -> None:
        """Test formatted output reads back to the same rational."""
        assert parse_exact(format_exact(value)) == value


class TestTruncation:
    """Test N-bit truncation toward zero."""

    @pytest.mark.parametrize(
        ("x", "bits", "expected"),
        [
            ("0.3", 2, Fraction(1, 4)),
            ("-0.3", 2, Fraction(-1, 4)),
            ("0.75", 2, Fraction(3, 4)),
            ("5/3", 0, Fraction(1)),
            ("0.999", 3, Fraction(7, 8)),
        ],
    )
    def test_truncate(self, x: str, bits: int, expected: Fraction) -> None:
        assert truncate(x, bits).value == expected

    @pytest.mark.parametrize("x", ["0.3", "-7/9", "123.456", "-1e-5"])
    def test_truncate_is_idempotent_and_shrinks(self, x: str) -> None:
        """Test truncating twice is a no-op and magnitude never grows."""
        once = truncate(x, 10)
        assert truncate(once.value, 10) == once
        assert abs(once.value) <= abs(parse_exact(x))
        assert abs(parse_exact(x) - once.value) < Fraction(1, 1 << 10)

    def test_scale_to_integer(self) -> None:
        fixed = truncate("0.3", 4)
        assert scale_to_integer(fixed) == 4
        assert scale_to_integer(fixed, 3) == 12
        with pytest.raises(ParameterError):
            scale_to_integer(fixed, 0)

    def test_negative_precision_rejected(self) -> None:
        with pytest.raises(ParameterError):
            truncate("1", -1)
        with pytest.raises(ParameterError):
            FixedPointReal(1, -2)

    def test_fixed_point_str(self) -> None:
        assert str(FixedPointReal(-3, 3)) == "-0.375"


class TestIntegerHelpers:
    """Test exact integer logarithm and roots."""

    @pytest.mark.parametrize(("value", "expected"), [(1, 0), (2, 1), (4, 2), (5, 3), (30, 5), (40, 6)])
    def test_ceil_log2(self, value: int, expected: int) -> None:
        assert ceil_log2(value) == expected

    @pytest.mark.parametrize(("value", "expected"), [(0, 0), (1, 1), (2, 2), (9, 3), (10, 4), (10**40, 10**20)])
    def test_ceil_sqrt(self, value: int, expected: int) -> None:
        assert ceil_sqrt(value) == expected

    @pytest.mark.parametrize(
        ("value", "k", "expected"),
        [
            (27, 3, 3),
            (28, 3, None),
            (2**400, 5, 2**80),
            (3**200 + 1, 2, None),
            (0, 4, 0),
            (1, 7, 1),
            (12345, 1, 12345),
        ],
    )
    def test_integer_root(self, value: int, k: int, expected: int | None) -> None:
        assert integer_root(value, k) == expected

    def test_helpers_reject_out_of_range(self) -> None:
        with pytest.raises(ParameterError):
            ceil_log2(0)
        with pytest.raises(ParameterError):
            ceil_sqrt(-1)
        with pytest.raises(ParameterError):
            integer_root(8, 0)


class TestLinearAlgebra:
    """Test exact determinant and rational solve."""

    def test_determinant_with_pivoting(self) -> None:
        assert determinant([[0, 2], [3, 4]]) == -6
        assert determinant([[2, 0, 1], [1, 3, 2], [1, 1, 2]]) == 6
        assert determinant([[1, 2], [2, 4]]) == 0

    def test_solve_rational(self) -> None:
        solution = solve_rational([[2, 1], [1, 3]], [3, 5])
        assert solution == [Fraction(4, 5), Fraction(7, 5)]

    def test_solve_rational_singular(self) -> None:
        with pytest.raises(SingularBasisError):
            solve_rational([[1, 2], [2, 4]], [1, 2])
