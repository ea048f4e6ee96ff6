"""
Exact numeric foundation: unbounded integers, canonical rationals and N-bit
fixed-point truncation of real inputs.

Python ints are the big-integer type and fractions.Fraction the canonical
rational (always reduced, positive denominator). Binary floating point never
enters the data path: real numbers come in as decimal or "a/b" strings.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from errors import NumericParseError, ParameterError, SingularBasisError

IntegerVector = list[int]
IntegerMatrix = list[list[int]]
RationalVector = list[Fraction]

ExactInput = int | Fraction | str


def parse_exact(text: str) -> Fraction:
    """
    Parse a decimal or rational literal exactly.

    Accepts an optional sign, integer and fractional parts, an exponent, or the
    "a/b" form, with surrounding whitespace ("-0.3", "1e-20 ", "7/12").

    Raises:
        NumericParseError: naming the offending token
    """
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise NumericParseError(text) from exc


def to_fraction(value: ExactInput) -> Fraction:
    """Convert an int, Fraction or numeric string to a Fraction."""
    # bool is an int subclass and float would smuggle binary rounding in
    if isinstance(value, bool) or not isinstance(value, int | Fraction | str):
        raise NumericParseError(repr(value), "only int, Fraction or str accepted")
    if isinstance(value, str):
        return parse_exact(value)
    return Fraction(value)


def format_exact(value: Fraction | int) -> str:
    """
    Render a rational as a finite decimal string when possible, else "a/b".

    Finite decimals are exactly those whose reduced denominator is 2^a * 5^b.
    """
    q = Fraction(value)
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"

    places = max(twos, fives)
    if places == 0:
        return str(q.numerator)
    digits = str(abs(q.numerator) * 10**places // q.denominator).rjust(places + 1, "0")
    sign = "-" if q < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


@dataclass(frozen=True)
class FixedPointReal:
    """A real number stored exactly as scaled_value / 2^precision."""

    scaled_value: int
    precision: int

    def __post_init__(self) -> None:
        if self.precision < 0:
            msg = f"precision must be non-negative, got {self.precision}"
            raise ParameterError(msg)

    @property
    def value(self) -> Fraction:
        return Fraction(self.scaled_value, 1 << self.precision)

    def __str__(self) -> str:
        return format_exact(self.value)


def truncate(x: ExactInput, n_bits: int) -> FixedPointReal:
    """
    Keep the first n_bits binary digits after the point, rounding toward zero.

    Returns sign(x) * floor(2^N |x|) / 2^N. Idempotent at a fixed N and never
    increases the magnitude.
    """
    if n_bits < 0:
        msg = f"truncation level must be non-negative, got {n_bits}"
        raise ParameterError(msg)
    q = to_fraction(x)
    magnitude = (abs(q.numerator) << n_bits) // q.denominator
    return FixedPointReal(-magnitude if q < 0 else magnitude, n_bits)


def scale_to_integer(x: FixedPointReal, extra_factor: int = 1) -> int:
    """Return extra_factor * 2^N * x_N as an exact integer."""
    if extra_factor < 1:
        msg = f"extra factor must be positive, got {extra_factor}"
        raise ParameterError(msg)
    return extra_factor * x.scaled_value


def ceil_log2(value: int) -> int:
    """Smallest k with 2^k >= value, for value >= 1."""
    if value < 1:
        msg = f"ceil_log2 needs a positive integer, got {value}"
        raise ParameterError(msg)
    return (value - 1).bit_length()


def ceil_sqrt(value: int) -> int:
    """Smallest s with s^2 >= value, by exact integer square root."""
    if value < 0:
        msg = f"ceil_sqrt needs a non-negative integer, got {value}"
        raise ParameterError(msg)
    root = isqrt(value)
    return root if root * root == value else root + 1


def integer_root(value: int, k: int) -> int | None:
    """Return r with r^k == value exactly, or None when value is no perfect k-th power."""
    if k < 1 or value < 0:
        msg = f"integer_root needs k >= 1 and value >= 0, got k={k}, value={value}"
        raise ParameterError(msg)
    if value < 2 or k == 1:
        return value
    # Newton iteration from above converges to floor(value^(1/k))
    root = 1 << -(-value.bit_length() // k)
    while True:
        step = ((k - 1) * root + value // root ** (k - 1)) // k
        if step >= root:
            break
        root = step
    return root if root**k == value else None


def infinity_norm(vector: Sequence[int | Fraction]) -> int | Fraction:
    return max((abs(v) for v in vector), default=0)


def dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b, strict=True))


def mat_vec(matrix: Sequence[Sequence[int]], vector: Sequence[int]) -> IntegerVector:
    return [dot(row, vector) for row in matrix]


def transpose(matrix: Sequence[Sequence[int]]) -> IntegerMatrix:
    return [list(column) for column in zip(*matrix, strict=True)]


def determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix (fraction-free Bareiss)."""
    rows = [list(r) for r in matrix]
    size = len(rows)
    if any(len(r) != size for r in rows):
        msg = "determinant needs a square matrix"
        raise ParameterError(msg)

    sign = 1
    previous = 1
    for k in range(size - 1):
        if rows[k][k] == 0:
            pivot = next((i for i in range(k + 1, size) if rows[i][k] != 0), None)
            if pivot is None:
                return 0
            rows[k], rows[pivot] = rows[pivot], rows[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                rows[i][j] = (rows[i][j] * rows[k][k] - rows[i][k] * rows[k][j]) // previous
        previous = rows[k][k]
    return sign * rows[-1][-1] if size else 1


def solve_rational(
    matrix: Sequence[Sequence[int | Fraction]], rhs: Sequence[int | Fraction]
) -> RationalVector:
    """
    Solve matrix @ x = rhs exactly over the rationals.

    Raises:
        SingularBasisError: if the square matrix is singular
    """
    size = len(matrix)
    augmented = [
        [Fraction(v) for v in row] + [Fraction(b)]
        for row, b in zip(matrix, rhs, strict=True)
    ]
    for col in range(size):
        pivot = next((r for r in range(col, size) if augmented[r][col] != 0), None)
        if pivot is None:
            msg = "matrix is singular"
            raise SingularBasisError(msg)
        augmented[col], augmented[pivot] = augmented[pivot], augmented[col]
        lead = augmented[col][col]
        augmented[col] = [v / lead for v in augmented[col]]
        for r in range(size):
            factor = augmented[r][col]
            if r != col and factor != 0:
                augmented[r] = [
                    v - factor * w for v, w in zip(augmented[r], augmented[col], strict=True)
                ]
    return [row[-1] for row in augmented]
