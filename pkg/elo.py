"""
Extended Lagarias-Odlyzko recovery of an integer vector beta* from integer
observations Y = X beta* + W.

A random shift Z makes beta = beta* + Z coprime with high probability, the
observations are embedded in an amplified (2n+p)-dimensional lattice, LLL finds
a short vector whose middle block is a multiple q*beta, and the gcd of that
block recovers q.
"""

import logging
import random
from collections.abc import Sequence
from dataclasses import dataclass

from errors import ContractViolationError, DimensionMismatchError, ParameterError
from exactnum import (
    IntegerMatrix,
    IntegerVector,
    ceil_log2,
    ceil_sqrt,
    infinity_norm,
    mat_vec,
)
from lll import DEFAULT_DELTA, LatticeBasis, lll_reduce, shortest_output_vector
from numtheory import derive_seed, gcd_vector

logger = logging.getLogger(__name__)

CLAMP_THRESHOLD = 3


@dataclass(frozen=True)
class EloInput:
    """Integer observations, design matrix and the user's bounds R_hat, W_hat."""

    y: tuple[int, ...]
    x: tuple[tuple[int, ...], ...]
    r_hat: int
    w_hat: int

    def __post_init__(self) -> None:
        if not self.y or not self.x or not self.x[0]:
            msg = "need at least one observation and one feature"
            raise DimensionMismatchError(msg)
        if len(self.x) != len(self.y):
            msg = f"Y has {len(self.y)} entries but X has {len(self.x)} rows"
            raise DimensionMismatchError(msg)
        width = len(self.x[0])
        for index, row in enumerate(self.x):
            if len(row) != width:
                msg = f"X row {index} has {len(row)} entries, expected {width}"
                raise DimensionMismatchError(msg)
        if self.r_hat < 1 or self.w_hat < 1:
            msg = f"R_hat and W_hat must be >= 1, got {self.r_hat} and {self.w_hat}"
            raise ParameterError(msg)

    @classmethod
    def build(
        cls,
        y: Sequence[int],
        x: Sequence[Sequence[int]],
        r_hat: int,
        w_hat: int,
    ) -> "EloInput":
        return cls(tuple(y), tuple(tuple(row) for row in x), r_hat, w_hat)

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def p(self) -> int:
        return len(self.x[0])


@dataclass(frozen=True)
class EloTrace:
    """Intermediate quantities of one ELO run, enough to replay it."""

    seed: int
    shift: tuple[int, ...]
    y1: tuple[int, ...]
    y2: tuple[int, ...]
    clamped_indices: frozenset[int]
    m: int
    zhat: tuple[int, ...]
    g: int
    lll_swaps: int
    degenerate: bool


@dataclass(frozen=True)
class EloResult:
    beta_hat: tuple[int, ...]
    trace: EloTrace


def shift_range(p: int, r_hat: int) -> tuple[int, int]:
    """Inclusive range {R_hat+1, ..., 2 R_hat + max(1, ceil(log2 p))}."""
    return r_hat + 1, 2 * r_hat + max(1, ceil_log2(p))


def sample_shift(p: int, r_hat: int, rng: random.Random) -> IntegerVector:
    """Random shift Z with iid entries uniform on shift_range(p, r_hat)."""
    if p < 1 or r_hat < 1:
        msg = f"p and R_hat must be >= 1, got {p} and {r_hat}"
        raise ParameterError(msg)
    low, high = shift_range(p, r_hat)
    return [rng.randint(low, high) for _ in range(p)]


def clamp_observations(y1: Sequence[int]) -> tuple[IntegerVector, frozenset[int]]:
    """Replace every entry with |y| < 3 by 3; return the result and the altered indices."""
    clamped = frozenset(i for i, v in enumerate(y1) if abs(v) < CLAMP_THRESHOLD)
    return [CLAMP_THRESHOLD if i in clamped else v for i, v in enumerate(y1)], clamped


def compute_m(n: int, p: int, r_hat: int, w_hat: int) -> int:
    """Amplification m = 2^(n + ceil(p/2) + 3) * p * (R_hat ceil(sqrt p) + W_hat ceil(sqrt n))."""
    if min(n, p, r_hat, w_hat) < 1:
        msg = "n, p, R_hat and W_hat must all be >= 1"
        raise ParameterError(msg)
    exponent = n + (p + 1) // 2 + 3
    return (1 << exponent) * p * (r_hat * ceil_sqrt(p) + w_hat * ceil_sqrt(n))


def build_lattice_matrix(
    x: Sequence[Sequence[int]], y2: Sequence[int], m: int
) -> IntegerMatrix:
    """
    The (2n+p) x (2n+p) matrix whose columns generate the ELO lattice:

        [ m X   -m Diag(Y2)   m I_n ]
        [ I_p        0          0   ]
        [  0         0        I_n   ]
    """
    if any(v == 0 for v in y2):
        msg = "Y2 has a zero entry; clamp_observations must run first"
        raise ContractViolationError(msg)
    n, p = len(y2), len(x[0])
    size = 2 * n + p

    rows: IntegerMatrix = []
    for i in range(n):
        row = [m * v for v in x[i]] + [0] * (2 * n)
        row[p + i] = -m * y2[i]
        row[p + n + i] = m
        rows.append(row)
    for j in range(p):
        row = [0] * size
        row[j] = 1
        rows.append(row)
    for i in range(n):
        row = [0] * size
        row[p + n + i] = 1
        rows.append(row)
    return rows


def _rescale(block: Sequence[int], g: int) -> IntegerVector | None:
    """Divide by +-g so every coordinate is >= 1, or None if neither sign works."""
    if any(v % g for v in block):
        msg = "gcd does not divide the vector it was computed from"
        raise ContractViolationError(msg)
    scaled = [v // g for v in block]
    if all(v >= 1 for v in scaled):
        return scaled
    if all(v <= -1 for v in scaled):
        return [-v for v in scaled]
    return None


def elo_recover(data: EloInput, seed: int) -> EloResult:
    """
    Run ELO once with the shift drawn from random.Random(seed).

    Returns the estimate and the trace. The estimate is the zero vector when
    the gcd of the middle block is zero or when no sign of the gcd makes the
    rescaled block entrywise positive; both cases mark the trace degenerate.
    """
    n, p = data.n, data.p
    rng = random.Random(seed)
    shift = sample_shift(p, data.r_hat, rng)

    y1 = [y + xz for y, xz in zip(data.y, mat_vec(data.x, shift), strict=True)]
    y2, clamped = clamp_observations(y1)
    m = compute_m(n, p, data.r_hat, data.w_hat)

    basis = LatticeBasis.from_columns(build_lattice_matrix(data.x, y2, m), check=False)
    report = lll_reduce(basis, DEFAULT_DELTA)
    zhat = shortest_output_vector(report)
    block = zhat[n : n + p]
    g = gcd_vector(block).value

    beta: IntegerVector | None = None
    if g != 0:
        beta = _rescale(block, g)
        if beta is not None and block[0] < 0:
            g = -g
    degenerate = beta is None
    beta_hat = [0] * p if beta is None else [b - z for b, z in zip(beta, shift, strict=True)]

    logger.debug(
        "ELO n=%d p=%d seed=%d: m has %d bits, g=%d, %d swaps%s",
        n,
        p,
        seed,
        m.bit_length(),
        g,
        report.swap_count,
        " (degenerate)" if degenerate else "",
    )
    trace = EloTrace(
        seed=seed,
        shift=tuple(shift),
        y1=tuple(y1),
        y2=tuple(y2),
        clamped_indices=clamped,
        m=m,
        zhat=tuple(zhat),
        g=g,
        lll_swaps=report.swap_count,
        degenerate=degenerate,
    )
    return EloResult(beta_hat=tuple(beta_hat), trace=trace)


def residual_norm(data: EloInput, beta_hat: Sequence[int]) -> int:
    """||Y - X beta_hat||_inf"""
    if len(beta_hat) != data.p:
        msg = f"estimate has {len(beta_hat)} entries, expected {data.p}"
        raise DimensionMismatchError(msg)
    fitted = mat_vec(data.x, beta_hat)
    return int(infinity_norm([y - f for y, f in zip(data.y, fitted, strict=True)]))


def verify_residual(data: EloInput, beta_hat: Sequence[int], tolerance: int) -> bool:
    return residual_norm(data, beta_hat) <= tolerance


def elo_recover_with_retry(
    data: EloInput, seed: int, retries: int = 0
) -> tuple[EloResult, int]:
    """
    Run ELO, re-running with derived seeds while the run is degenerate or its
    estimate leaves a residual above W_hat.

    Attempt 0 uses seed itself, so retries=0 is exactly elo_recover.

    Returns:
        (result of the last attempt, number of attempts made)
    """
    if retries < 0:
        msg = f"retries must be >= 0, got {retries}"
        raise ParameterError(msg)

    attempt_seed = seed
    for attempt in range(retries + 1):
        if attempt:
            attempt_seed = derive_seed(seed, "retry", attempt)
        result = elo_recover(data, attempt_seed)
        if not result.trace.degenerate and verify_residual(
            data, result.beta_hat, data.w_hat
        ):
            return result, attempt + 1
        logger.info("ELO attempt %d (seed %d) rejected", attempt + 1, attempt_seed)
    return result, retries + 1
