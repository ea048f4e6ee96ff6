"""
Lattice-based regression over real-valued data.

Observations and features are truncated to N fractional bits, lifted to
integers by 2^N (and Q_hat for the observations), handed to ELO, and the
integer answer is divided by Q_hat.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from elo import EloInput, EloTrace, elo_recover_with_retry
from errors import DimensionMismatchError, ParameterError
from exactnum import ExactInput, infinity_norm, scale_to_integer, to_fraction, truncate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LbrInput:
    """Real-valued regression data with truncation level and bounds."""

    y: tuple[Fraction, ...]
    x: tuple[tuple[Fraction, ...], ...]
    n_bits: int
    q_hat: int
    r_hat: int
    w_hat: Fraction

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
        if self.n_bits < 1:
            msg = f"truncation level N must be >= 1, got {self.n_bits}"
            raise ParameterError(msg)
        if self.q_hat < 1 or self.r_hat < 1:
            msg = f"Q_hat and R_hat must be >= 1, got {self.q_hat} and {self.r_hat}"
            raise ParameterError(msg)
        if self.w_hat <= 0:
            msg = f"W_hat must be positive, got {self.w_hat}"
            raise ParameterError(msg)

    @classmethod
    def build(
        cls,
        y: Sequence[ExactInput],
        x: Sequence[Sequence[ExactInput]],
        n_bits: int,
        q_hat: int,
        r_hat: int,
        w_hat: ExactInput,
    ) -> "LbrInput":
        """Convert ints, Fractions or numeric strings into an LbrInput."""
        return cls(
            y=tuple(to_fraction(v) for v in y),
            x=tuple(tuple(to_fraction(v) for v in row) for row in x),
            n_bits=n_bits,
            q_hat=q_hat,
            r_hat=r_hat,
            w_hat=to_fraction(w_hat),
        )

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def p(self) -> int:
        return len(self.x[0])


@dataclass(frozen=True)
class LbrResult:
    beta_hat: tuple[Fraction, ...]
    trace: EloTrace
    attempts: int


def effective_noise_bound(
    n_bits: int, q_hat: int, sigma: ExactInput, r_hat: int, p: int
) -> int:
    """Integer noise bound ceil(2 Q_hat (2^N sigma + R_hat p)) handed to ELO."""
    sigma = to_fraction(sigma)
    if n_bits < 0 or sigma < 0 or min(q_hat, r_hat, p) < 1:
        msg = "effective_noise_bound needs N >= 0, sigma >= 0 and Q_hat, R_hat, p >= 1"
        raise ParameterError(msg)
    return math.ceil(2 * q_hat * ((1 << n_bits) * sigma + r_hat * p))


def lift_instance(data: LbrInput) -> EloInput:
    """Truncate at N bits and lift to the integer instance ELO consumes."""
    n_bits = data.n_bits
    y_lifted = [scale_to_integer(truncate(v, n_bits), data.q_hat) for v in data.y]
    x_lifted = [[scale_to_integer(truncate(v, n_bits)) for v in row] for row in data.x]
    return EloInput.build(
        y_lifted,
        x_lifted,
        r_hat=data.q_hat * data.r_hat,
        w_hat=effective_noise_bound(n_bits, data.q_hat, data.w_hat, data.r_hat, data.p),
    )


def lifted_noise_norm(data: LbrInput, beta_star: Sequence[ExactInput]) -> int:
    """
    ||2^N Q_hat Y_N - 2^N X_N (Q_hat beta*)||_inf for a planted beta*.

    Raises:
        ParameterError: if Q_hat beta* is not integral
    """
    scaled = [data.q_hat * to_fraction(b) for b in beta_star]
    if any(b.denominator != 1 for b in scaled):
        msg = "Q_hat * beta* must be an integer vector"
        raise ParameterError(msg)
    lifted = lift_instance(data)
    integral = [int(b) for b in scaled]
    if len(integral) != lifted.p:
        msg = f"beta* has {len(integral)} entries, expected {lifted.p}"
        raise DimensionMismatchError(msg)
    residual = [
        y - sum(x * b for x, b in zip(row, integral, strict=True))
        for y, row in zip(lifted.y, lifted.x, strict=True)
    ]
    return int(infinity_norm(residual))


def lbr_recover(data: LbrInput, seed: int, retries: int = 0) -> LbrResult:
    """
    Recover a rational beta* whose entries share the denominator Q_hat.

    Args:
        data: Real-valued instance and parameters
        seed: Seed of the shift generator, recorded in the trace
        retries: Extra ELO attempts with derived seeds on degenerate output

    Returns:
        LbrResult whose estimate has denominators dividing Q_hat
    """
    lifted = lift_instance(data)
    logger.debug(
        "LBR n=%d p=%d N=%d: lifted R_hat=%d, W_hat has %d bits",
        data.n,
        data.p,
        data.n_bits,
        lifted.r_hat,
        lifted.w_hat.bit_length(),
    )
    result, attempts = elo_recover_with_retry(lifted, seed, retries)
    beta_hat = tuple(Fraction(b, data.q_hat) for b in result.beta_hat)
    return LbrResult(beta_hat=beta_hat, trace=result.trace, attempts=attempts)
