"""
Closed-form evaluators for the sample-size, truncation-level and noise
thresholds of ELO and LBR.

Logarithms are base 2. A logarithm that is not an exact integer power is
evaluated with mpmath at WORKING_PRECISION bits and returned as a rational on a
2^-GRID_BITS grid, rounded up when it feeds a required-N lower bound and down
when it feeds a max-N upper bound, so reported windows are never falsely
satisfiable. Noise magnitudes come back as SigmaValue: exact when the closed
form is rational, otherwise rounded down to MANTISSA_BITS significant bits.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

import mpmath

from errors import ParameterError
from exactnum import ExactInput, integer_root, to_fraction

logger = logging.getLogger(__name__)

WORKING_PRECISION = 256
GRID_BITS = 40
MANTISSA_BITS = 72

# mpmath ships without type information
Mpf = Any


class NoiseModel(str, Enum):
    ADVERSARIAL = "adversarial"
    IID = "iid"


@dataclass(frozen=True)
class ProblemProfile:
    """
    Sizes and distribution constants of a regression problem.

    c bounds the density of the feature distribution, epsilon is the slack of
    the truncation window, and C (E|V| <= C 2^N) is carried for documentation
    only since none of the evaluated inequalities uses it.
    """

    n: int
    p: int
    r: int
    q: int
    sigma: Fraction = Fraction(0)
    c: Fraction = Fraction(1)
    epsilon: Fraction = Fraction(1, 10)
    big_c: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if min(self.n, self.p, self.r, self.q) < 1:
            msg = "n, p, R and Q must all be >= 1"
            raise ParameterError(msg)
        if self.sigma < 0:
            msg = f"sigma must be non-negative, got {self.sigma}"
            raise ParameterError(msg)
        if self.c <= 0 or self.epsilon <= 0 or self.big_c <= 0:
            msg = "c, epsilon and C must be positive"
            raise ParameterError(msg)


@dataclass(frozen=True)
class SigmaValue:
    """A noise magnitude together with its base-2 logarithm."""

    value: Fraction
    log2: Fraction
    exact: bool

    def scaled(self, factor: int) -> "SigmaValue":
        log2 = self.log2 + _log2(Fraction(factor), up=False)
        return SigmaValue(self.value * factor, log2, self.exact)

    def __mul__(self, other: "SigmaValue") -> "SigmaValue":
        return SigmaValue(
            self.value * other.value, self.log2 + other.log2, self.exact and other.exact
        )


@dataclass(frozen=True)
class BoundReport:
    """Truncation window of the noisy LBR guarantee."""

    required_n: Fraction
    max_n: Fraction | None
    satisfiable: bool
    min_integer_n: int
    max_integer_n: int | None
    sigma_ceiling: SigmaValue
    p_threshold: Fraction
    max_n_natural: Fraction | None
    detail: dict[str, Fraction] = field(default_factory=dict)


@dataclass(frozen=True)
class PhaseBoundary:
    """sigma0 = (RQ)^(-p/n), the noise level separating possible from impossible."""

    rq: int
    ratio: Fraction
    sigma0: SigmaValue
    degenerate: bool

    def bracket(self, epsilon: ExactInput) -> tuple[SigmaValue, SigmaValue]:
        """
        (sigma0^(1+eps), sigma0^(1-eps)): recovery succeeds below the first,
        is impossible above the second.
        """
        epsilon = to_fraction(epsilon)
        if not 0 < epsilon < 1:
            msg = f"epsilon must lie in (0, 1), got {epsilon}"
            raise ParameterError(msg)
        return (
            _rational_power(Fraction(self.rq), -self.ratio * (1 + epsilon)),
            _rational_power(Fraction(self.rq), -self.ratio * (1 - epsilon)),
        )


@dataclass(frozen=True)
class BoundsSummary:
    profile: ProblemProfile
    elo_rhs: Fraction
    window: BoundReport
    info_ceiling: SigmaValue
    phase: PhaseBoundary
    lower_bracket: SigmaValue
    upper_bracket: SigmaValue
    model: NoiseModel
    lbr_rhs: Fraction | None = None
    lbr_holds: bool | None = None


def _mpf(value: Fraction | int) -> Mpf:
    q = Fraction(value)
    return mpmath.mpf(q.numerator) / q.denominator


def _directed(value: Mpf, *, up: bool) -> Fraction:
    """Round onto the 2^-GRID_BITS grid with one cell of padding in the given direction."""
    scaled = value * (1 << GRID_BITS)
    cell = int(mpmath.ceil(scaled)) + 1 if up else int(mpmath.floor(scaled)) - 1
    return Fraction(cell, 1 << GRID_BITS)


def _round_down(value: Mpf) -> Fraction:
    """Exact rational below a positive mpf, keeping MANTISSA_BITS significant bits."""
    man, exp = value.man_exp
    man = int(man)
    drop = max(0, man.bit_length() - MANTISSA_BITS)
    man >>= drop
    exp += drop
    return Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)


def _exact_log2(q: Fraction) -> int | None:
    if q.numerator == 1 and q.denominator & (q.denominator - 1) == 0:
        return -(q.denominator.bit_length() - 1)
    if q.denominator == 1 and q.numerator & (q.numerator - 1) == 0:
        return q.numerator.bit_length() - 1
    return None


def _log2(value: Fraction | Mpf, *, up: bool) -> Fraction:
    """Directed base-2 logarithm of a positive Fraction or mpf."""
    if isinstance(value, int | Fraction):
        value = Fraction(value)
        if value <= 0:
            msg = f"logarithm of a non-positive value {value}"
            raise ParameterError(msg)
        exact = _exact_log2(value)
        if exact is not None:
            return Fraction(exact)
        with mpmath.workprec(WORKING_PRECISION):
            return _directed(mpmath.log(_mpf(value), 2), up=up)
    with mpmath.workprec(WORKING_PRECISION):
        return _directed(mpmath.log(value, 2), up=up)


def _rational_root(q: Fraction, k: int) -> Fraction | None:
    num = integer_root(q.numerator, k)
    den = integer_root(q.denominator, k)
    return None if num is None or den is None else Fraction(num, den)


def _rational_power(base: Fraction, exponent: Fraction) -> SigmaValue:
    """base^exponent for a positive rational base, exact whenever that is rational."""
    root = _rational_root(base, exponent.denominator)
    if root is not None:
        value = root**exponent.numerator
        exact_log = _exact_log2(value)
        if exact_log is not None:
            return SigmaValue(value, Fraction(exact_log), exact=True)
        return SigmaValue(value, _log2(value, up=False), exact=True)
    with mpmath.workprec(WORKING_PRECISION):
        approx = mpmath.power(_mpf(base), _mpf(exponent))
        log2 = _directed(_mpf(exponent) * mpmath.log(_mpf(base), 2), up=False)
        return SigmaValue(_round_down(approx), log2, exact=False)


def _sqrt_mpf(value: int) -> Mpf:
    root = integer_root(value, 2)
    return mpmath.mpf(root) if root is not None else mpmath.sqrt(value)


def elo_condition_rhs(n: int, p: int, r_hat: int, w_inf: int, c: ExactInput) -> Fraction:
    """
    Bits of feature precision ELO needs:

        (2n+p)/(2n) * [2n+p + 10 log(R_hat sqrt(p) + (||W||+1) sqrt(n))] + 6 log((1+c) n p)

    Both logarithms are rounded up.
    """
    c = to_fraction(c)
    if min(n, p, r_hat) < 1 or w_inf < 0 or c <= 0:
        msg = "elo_condition_rhs needs n, p, R_hat >= 1, ||W|| >= 0 and c > 0"
        raise ParameterError(msg)

    sqrt_p, sqrt_n = integer_root(p, 2), integer_root(n, 2)
    if sqrt_p is not None and sqrt_n is not None:
        noise_log = _log2(Fraction(r_hat * sqrt_p + (w_inf + 1) * sqrt_n), up=True)
    else:
        with mpmath.workprec(WORKING_PRECISION):
            arg = r_hat * _sqrt_mpf(p) + (w_inf + 1) * _sqrt_mpf(n)
        noise_log = _log2(arg, up=True)

    density_log = _log2((1 + c) * n * p, up=True)
    dim = 2 * n + p
    return Fraction(dim, 2 * n) * (dim + 10 * noise_log) + 6 * density_log


def lbr_condition_rhs(
    n_bits: int,
    profile: ProblemProfile,
    q_hat: int,
    r_hat: int,
    model: NoiseModel = NoiseModel.ADVERSARIAL,
) -> Fraction:
    """
    Right-hand side of the LBR truncation condition, rounded up:

        (2n+p)/2 * (2n+p + 10 log Q_hat + 10 log(2^N s + R_hat p) + 20 log(3 (1+c) n p))

    with s = sigma for adversarial noise and s = sqrt(n p) sigma for iid noise.
    """
    if n_bits < 1 or q_hat < 1 or r_hat < 1:
        msg = "lbr_condition_rhs needs N, Q_hat and R_hat >= 1"
        raise ParameterError(msg)
    n, p = profile.n, profile.p
    dim = 2 * n + p

    scale = (1 << n_bits) * profile.sigma
    if model is NoiseModel.IID and profile.sigma:
        root = integer_root(n * p, 2)
        if root is None:
            with mpmath.workprec(WORKING_PRECISION):
                arg = _mpf(scale) * mpmath.sqrt(n * p) + r_hat * p
            noise_log = _log2(arg, up=True)
        else:
            noise_log = _log2(scale * root + r_hat * p, up=True)
    else:
        noise_log = _log2(scale + r_hat * p, up=True)

    inner = (
        dim
        + 10 * _log2(Fraction(q_hat), up=True)
        + 10 * noise_log
        + 20 * _log2(3 * (1 + profile.c) * n * p, up=True)
    )
    return Fraction(dim, 2) * inner


def lbr_condition_holds(
    n_bits: int,
    profile: ProblemProfile,
    q_hat: int,
    r_hat: int,
    model: NoiseModel = NoiseModel.ADVERSARIAL,
) -> bool:
    """N > RHS, evaluated directly (N also appears inside the RHS)."""
    return n_bits > lbr_condition_rhs(n_bits, profile, q_hat, r_hat, model)


def cor2_window(profile: ProblemProfile) -> BoundReport:
    """
    Truncation window log(1/sigma) >= N >= (1+eps)[(p+2n)^2/(2n) + (2+p/n) log(RQ)].

    sigma = 0 leaves the window open above (max_n is None).
    """
    n, p, eps = profile.n, profile.p, profile.epsilon
    rq = profile.r * profile.q
    sample_term = Fraction((p + 2 * n) ** 2, 2 * n)
    rq_weight = 2 + Fraction(p, n)
    required = (1 + eps) * (sample_term + rq_weight * _log2(Fraction(rq), up=True))

    max_n: Fraction | None = None
    max_natural: Fraction | None = None
    if profile.sigma > 0:
        max_n = _log2(1 / profile.sigma, up=False)
        with mpmath.workprec(WORKING_PRECISION):
            max_natural = _directed(mpmath.log(_mpf(1 / profile.sigma)), up=False)

    ceiling = _rational_power(Fraction(2), -(1 + eps) * sample_term) * _rational_power(
        Fraction(rq), -(1 + eps) * rq_weight
    )
    threshold_arg = Fraction(300) / ((1 + profile.c) * eps)
    p_threshold = (300 / eps) * _log2(threshold_arg, up=True)

    report = BoundReport(
        required_n=required,
        max_n=max_n,
        satisfiable=max_n is None or required <= max_n,
        min_integer_n=math.ceil(required),
        max_integer_n=None if max_n is None else math.floor(max_n),
        sigma_ceiling=ceiling,
        p_threshold=p_threshold,
        max_n_natural=max_natural,
        detail={"sample_term": sample_term, "rq_term": required - (1 + eps) * sample_term},
    )
    logger.debug("window for n=%d p=%d: N >= %s, N <= %s", n, p, float(required), max_n)
    return report


def info_theoretic_sigma_ceiling(n: int, p: int, q: int, r: int) -> SigmaValue:
    """
    R (np)^3 ((2QR+1)^(2p/n) - 1)^(-1/2): exact recovery is impossible for
    any estimator when sigma exceeds this value.
    """
    if min(n, p, q, r) < 1:
        msg = "n, p, Q and R must all be >= 1"
        raise ParameterError(msg)
    factor = r * (n * p) ** 3
    inner = _rational_power(Fraction(2 * q * r + 1), Fraction(2 * p, n))
    if inner.exact:
        return _rational_power(inner.value - 1, Fraction(-1, 2)).scaled(factor)

    with mpmath.workprec(WORKING_PRECISION):
        power = mpmath.power(2 * q * r + 1, _mpf(Fraction(2 * p, n)))
        value = factor / mpmath.sqrt(power - 1)
        return SigmaValue(_round_down(value), _log2(value, up=False), exact=False)


def phase_boundary_sigma0(n: int, p: int, r: int, q: int) -> PhaseBoundary:
    """sigma0 = (RQ)^(-p/n). RQ = 1 degenerates to sigma0 = 1 and is flagged."""
    if min(n, p, q, r) < 1:
        msg = "n, p, R and Q must all be >= 1"
        raise ParameterError(msg)
    rq = r * q
    ratio = Fraction(p, n)
    if rq == 1:
        logger.warning("RQ = 1: the phase boundary degenerates to sigma0 = 1")
        return PhaseBoundary(rq, ratio, SigmaValue(Fraction(1), Fraction(0), True), True)
    return PhaseBoundary(rq, ratio, _rational_power(Fraction(rq), -ratio), False)


def bounds_report(
    profile: ProblemProfile,
    *,
    model: NoiseModel = NoiseModel.ADVERSARIAL,
    q_hat: int | None = None,
    r_hat: int | None = None,
    n_bits: int | None = None,
) -> BoundsSummary:
    """
    Evaluate every threshold for one profile.

    Q_hat and R_hat default to Q and R. The LBR condition is only evaluated when
    a truncation level is given. The ELO condition uses ceil(sigma) as ||W||.
    """
    q_hat = profile.q if q_hat is None else q_hat
    r_hat = profile.r if r_hat is None else r_hat
    phase = phase_boundary_sigma0(profile.n, profile.p, profile.r, profile.q)
    if phase.degenerate:
        lower = upper = phase.sigma0
    else:
        lower, upper = phase.bracket(profile.epsilon)

    lbr_rhs: Fraction | None = None
    lbr_holds: bool | None = None
    if n_bits is not None:
        lbr_rhs = lbr_condition_rhs(n_bits, profile, q_hat, r_hat, model)
        lbr_holds = n_bits > lbr_rhs

    return BoundsSummary(
        profile=profile,
        elo_rhs=elo_condition_rhs(
            profile.n, profile.p, r_hat, math.ceil(profile.sigma), profile.c
        ),
        window=cor2_window(profile),
        info_ceiling=info_theoretic_sigma_ceiling(
            profile.n, profile.p, profile.q, profile.r
        ),
        phase=phase,
        lower_bracket=lower,
        upper_bracket=upper,
        model=model,
        lbr_rhs=lbr_rhs,
        lbr_holds=lbr_holds,
    )
