"""
Vector gcd for the rescaling step of ELO, plus a Monte-Carlo estimator of the
density of coprime pairs (which tends to 6/pi^2).
"""

import hashlib
import logging
import math
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Any

import mpmath

from errors import ParameterError
from workers import map_tasks

logger = logging.getLogger(__name__)

COPRIME_LIMIT = 6 / math.pi**2
DEFAULT_CHUNK_SIZE = 10_000
STANDARD_ERROR_PRECISION = 64

# mpmath ships without type information
Mpf = Any


def derive_seed(*parts: object) -> int:
    """
    Deterministic 63-bit seed from an arbitrary key.

    Used wherever independent streams are needed (per trial, per chunk, per
    retry) so results do not depend on scheduling order.
    """
    key = ":".join(str(part) for part in parts).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


@dataclass(frozen=True)
class GcdResult:
    value: int
    all_zero: bool


def gcd_vector(vector: Iterable[int]) -> GcdResult:
    """
    Non-negative gcd of all coordinates, folded left to right with Euclid.

    gcd(0, a) = |a| and the gcd of an all-zero (or empty) vector is 0.
    """
    value = reduce(math.gcd, vector, 0)
    return GcdResult(value=value, all_zero=value == 0)


def gcd_scaling_check(vector: Sequence[int], factor: int) -> bool:
    """Check gcd(factor * v) == |factor| * gcd(v)."""
    if factor == 0 or not any(vector):
        msg = "gcd scaling needs a nonzero vector and a nonzero factor"
        raise ParameterError(msg)
    scaled = gcd_vector(factor * v for v in vector).value
    return scaled == abs(factor) * gcd_vector(vector).value


@dataclass(frozen=True)
class CoprimalityEstimate:
    hits: int
    samples: int

    @property
    def estimate(self) -> Fraction:
        return Fraction(self.hits, self.samples)

    @property
    def variance(self) -> Fraction:
        """Exact p_hat (1 - p_hat) / samples."""
        p_hat = self.estimate
        return p_hat * (1 - p_hat) / self.samples

    @property
    def standard_error(self) -> Mpf:
        variance = self.variance
        with mpmath.workprec(STANDARD_ERROR_PRECISION):
            return mpmath.sqrt(mpmath.mpf(variance.numerator) / variance.denominator)


@dataclass(frozen=True)
class ChunkTask:
    q1: int
    q2: int
    q: int
    samples: int
    seed: int


def count_coprime(task: ChunkTask) -> int:
    rng = random.Random(task.seed)
    return sum(
        math.gcd(rng.randint(task.q1, task.q1 + task.q), rng.randint(task.q2, task.q2 + task.q))
        == 1
        for _ in range(task.samples)
    )


def coprimality_density(
    q1: int,
    q2: int,
    q: int,
    samples: int,
    seed: int,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    workers: int | None = None,
) -> CoprimalityEstimate:
    """
    Fraction of coprime pairs (a, b) with a uniform on [q1, q1+q] and b uniform
    on [q2, q2+q], both ranges inclusive.

    Sampling is split into chunks with seeds derived from (seed, chunk index),
    so the estimate only depends on the arguments, never on the number of
    worker processes (None reads LATREG_WORKERS).
    """
    if min(q1, q2, q, samples, chunk_size) < 1:
        msg = "q1, q2, q, samples and chunk_size must all be positive"
        raise ParameterError(msg)

    tasks = [
        ChunkTask(q1, q2, q, min(chunk_size, samples - start), derive_seed(seed, "chunk", index))
        for index, start in enumerate(range(0, samples, chunk_size))
    ]
    hits = sum(map_tasks(count_coprime, tasks, workers))

    result = CoprimalityEstimate(hits=hits, samples=samples)
    logger.debug(
        "coprime density on [%d,+%d]x[%d,+%d]: %d/%d", q1, q, q2, q, hits, samples
    )
    return result
