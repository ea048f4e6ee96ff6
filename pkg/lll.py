"""
Exact-arithmetic Lenstra-Lenstra-Lovasz reduction for full-rank integer lattices.

The reduction keeps integral Gram-Schmidt data: d[i] is the Gram determinant of
the first i basis vectors and lam[k][j] = d[j+1] * mu[k][j] is an integer, so no
rational arithmetic happens inside the main loop. The checkers below recompute
everything with Fractions and are independent of that representation.
"""

import logging
from collections.abc import Sequence
from dataclasses import InitVar, dataclass
from fractions import Fraction

from errors import ParameterError, SingularBasisError
from exactnum import (
    IntegerMatrix,
    IntegerVector,
    determinant,
    dot,
    solve_rational,
    transpose,
)

logger = logging.getLogger(__name__)

DEFAULT_DELTA = Fraction(3, 4)


@dataclass(frozen=True)
class LatticeBasis:
    """Ordered list of d linearly independent integer vectors of length d."""

    vectors: tuple[tuple[int, ...], ...]
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        size = len(self.vectors)
        if size == 0:
            msg = "a lattice basis needs at least one vector"
            raise SingularBasisError(msg)
        for index, vector in enumerate(self.vectors):
            if len(vector) != size:
                msg = f"basis vector {index} has length {len(vector)}, expected {size}"
                raise SingularBasisError(msg)
        if check and determinant(self.vectors) == 0:
            msg = "basis vectors are linearly dependent"
            raise SingularBasisError(msg)

    @classmethod
    def from_rows(
        cls, rows: Sequence[Sequence[int]], *, check: bool = True
    ) -> "LatticeBasis":
        return cls(tuple(tuple(int(v) for v in row) for row in rows), check)

    @classmethod
    def from_columns(
        cls, matrix: Sequence[Sequence[int]], *, check: bool = True
    ) -> "LatticeBasis":
        """Lattice generated by the columns of a matrix (transposed once here)."""
        return cls.from_rows(transpose(matrix), check=check)

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def rows(self) -> IntegerMatrix:
        return [list(v) for v in self.vectors]


@dataclass(frozen=True)
class ReductionReport:
    """Reduced basis plus diagnostics of the run that produced it."""

    reduced_basis: LatticeBasis
    delta: Fraction
    swap_count: int
    size_reduction_count: int
    max_intermediate_bits: int


def _validate_delta(delta: Fraction) -> Fraction:
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        msg = f"delta must lie strictly between 1/4 and 1, got {delta}"
        raise ParameterError(msg)
    return delta


def lll_reduce(
    basis: LatticeBasis,
    delta: Fraction = DEFAULT_DELTA,
    *,
    min_norm_first: bool = False,
) -> ReductionReport:
    """
    Reduce a full-rank basis to a delta-LLL-reduced basis of the same lattice.

    Args:
        basis: Full-rank input basis
        delta: Lovasz parameter in (1/4, 1); 3/4 gives the 2^((d-1)/2) bound
        min_norm_first: Move the shortest output vector to the front. The
            result is then no longer guaranteed to satisfy the Lovasz condition,
            so this is off by default.

    Returns:
        ReductionReport with the reduced basis and run statistics

    Raises:
        ParameterError: if delta is out of range
    """
    delta = _validate_delta(delta)
    num, den = delta.numerator, delta.denominator

    b = basis.rows()
    size = len(b)
    lam: list[list[int]] = [[0] * size for _ in range(size)]
    d = [0] * (size + 1)
    d[0] = 1
    d[1] = dot(b[0], b[0])

    swaps = 0
    size_reductions = 0
    max_bits = max(abs(v).bit_length() for row in b for v in row)

    def size_reduce(k: int, col: int) -> None:
        nonlocal size_reductions
        if 2 * abs(lam[k][col]) <= d[col + 1]:
            return
        q = (2 * lam[k][col] + d[col + 1]) // (2 * d[col + 1])
        b[k] = [x - q * y for x, y in zip(b[k], b[col], strict=True)]
        lam[k][col] -= q * d[col + 1]
        for i in range(col):
            lam[k][i] -= q * lam[col][i]
        size_reductions += 1

    k = 1
    k_max = 0
    while k < size:
        if k > k_max:
            k_max = k
            for j in range(k + 1):
                u = dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k + 1] = u
            if d[k + 1] == 0:
                msg = "basis vectors are linearly dependent"
                raise SingularBasisError(msg)

        size_reduce(k, k - 1)
        if den * (d[k + 1] * d[k - 1] + lam[k][k - 1] ** 2) < num * d[k] ** 2:
            b[k], b[k - 1] = b[k - 1], b[k]
            for j in range(k - 1):
                lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
            mu = lam[k][k - 1]
            new_d = (d[k - 1] * d[k + 1] + mu * mu) // d[k]
            for i in range(k + 1, k_max + 1):
                t = lam[i][k]
                lam[i][k] = (d[k + 1] * lam[i][k - 1] - mu * t) // d[k]
                lam[i][k - 1] = (new_d * t + mu * lam[i][k]) // d[k + 1]
            d[k] = new_d
            swaps += 1
            max_bits = max(max_bits, new_d.bit_length())
            k = max(1, k - 1)
        else:
            for col in range(k - 2, -1, -1):
                size_reduce(k, col)
            max_bits = max(max_bits, max(abs(v).bit_length() for v in b[k]))
            k += 1

    max_bits = max(max_bits, max(v.bit_length() for v in d))
    if min_norm_first:
        shortest = min(range(size), key=lambda i: (dot(b[i], b[i]), i))
        b.insert(0, b.pop(shortest))

    logger.debug(
        "LLL d=%d delta=%s: %d swaps, %d size reductions, %d max bits",
        size,
        delta,
        swaps,
        size_reductions,
        max_bits,
    )
    return ReductionReport(
        reduced_basis=LatticeBasis.from_rows(b, check=False),
        delta=delta,
        swap_count=swaps,
        size_reduction_count=size_reductions,
        max_intermediate_bits=max_bits,
    )


def shortest_output_vector(report: ReductionReport) -> IntegerVector:
    """First vector of the reduced basis, the one carrying the LLL guarantee."""
    return list(report.reduced_basis.vectors[0])


def gram_schmidt(
    basis: LatticeBasis,
) -> tuple[list[list[Fraction]], list[Fraction]]:
    """
    Exact rational Gram-Schmidt orthogonalization.

    Returns:
        (mu, norms2) with mu[i][j] the projection coefficients for j < i and
        norms2[i] = ||b*_i||^2
    """
    rows = basis.rows()
    size = len(rows)
    ortho: list[list[Fraction]] = []
    norms2: list[Fraction] = []
    mu = [[Fraction(0)] * size for _ in range(size)]
    for i, row in enumerate(rows):
        current = [Fraction(v) for v in row]
        for j in range(i):
            mu[i][j] = sum(
                (Fraction(x) * y for x, y in zip(row, ortho[j], strict=True)), Fraction(0)
            ) / norms2[j]
            current = [c - mu[i][j] * o for c, o in zip(current, ortho[j], strict=True)]
        mu[i][i] = Fraction(1)
        ortho.append(current)
        norms2.append(sum((c * c for c in current), Fraction(0)))
    return mu, norms2


def is_size_reduced(basis: LatticeBasis) -> bool:
    mu, _ = gram_schmidt(basis)
    return all(
        abs(mu[i][j]) <= Fraction(1, 2) for i in range(basis.dimension) for j in range(i)
    )


def satisfies_lovasz(basis: LatticeBasis, delta: Fraction = DEFAULT_DELTA) -> bool:
    mu, norms2 = gram_schmidt(basis)
    return all(
        norms2[i] >= (delta - mu[i][i - 1] ** 2) * norms2[i - 1]
        for i in range(1, basis.dimension)
    )


def is_lll_reduced(basis: LatticeBasis, delta: Fraction = DEFAULT_DELTA) -> bool:
    return is_size_reduced(basis) and satisfies_lovasz(basis, delta)


def lattice_coordinates(basis: LatticeBasis, vector: Sequence[int]) -> list[Fraction]:
    """Rational coefficients c with sum(c_i * b_i) = vector."""
    return solve_rational(transpose(basis.vectors), vector)


def in_lattice(basis: LatticeBasis, vector: Sequence[int]) -> bool:
    return all(c.denominator == 1 for c in lattice_coordinates(basis, vector))


def change_of_basis(source: LatticeBasis, target: LatticeBasis) -> list[list[Fraction]]:
    """Rows of T with target_i = sum_j T[i][j] * source_j."""
    return [lattice_coordinates(source, vector) for vector in target.vectors]


def same_lattice(source: LatticeBasis, target: LatticeBasis) -> bool:
    """True iff the change of basis is integral with determinant +-1."""
    if source.dimension != target.dimension:
        return False
    transform = change_of_basis(source, target)
    if any(c.denominator != 1 for row in transform for c in row):
        return False
    return abs(determinant([[int(c) for c in row] for row in transform])) == 1


def shortest_vector_norm2(basis: LatticeBasis) -> int:
    """
    Squared length of a shortest nonzero lattice vector.

    Exhaustive Fincke-Pohst enumeration with exact rationals, meant as a test
    oracle for dimensions up to about 8. Cost grows quickly with the
    orthogonality defect, so callers pass an already reduced basis.
    """
    mu, norms2 = gram_schmidt(basis)
    size = basis.dimension
    best = min(dot(v, v) for v in basis.vectors)
    coeffs = [0] * size

    def search(level: int, partial: Fraction) -> None:
        nonlocal best
        center = -sum(
            (mu[j][level] * coeffs[j] for j in range(level + 1, size)), Fraction(0)
        )
        start = round(center)
        for step in (1, -1):
            x = start if step == 1 else start - 1
            while True:
                contribution = norms2[level] * (x - center) ** 2
                # radius tracks the current best
                if partial + contribution > best:
                    break
                coeffs[level] = x
                total = partial + contribution
                if level == 0:
                    if 0 < total < best:
                        best = int(total)
                else:
                    search(level - 1, total)
                x += step
        coeffs[level] = 0

    search(size - 1, Fraction(0))
    return best
