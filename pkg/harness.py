"""
Planted-instance generators and seeded experiment sweeps for ELO and LBR.

Every trial derives its own seed from (seed base, cell index, trial index), so
a sweep produces the same records whatever the worker count or scheduling
order. Continuous distributions are realized as exact dyadic rationals with
INTERNAL_BITS fractional bits.
"""

import csv
import logging
import math
import random
import re
import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import IO

import mpmath

from elo import EloInput, elo_recover, sample_shift
from errors import ParameterError
from exactnum import ExactInput, format_exact, parse_exact
from lbr import LbrInput, lbr_recover
from numtheory import CoprimalityEstimate, derive_seed, gcd_vector
from workers import map_tasks

logger = logging.getLogger(__name__)

INTERNAL_BITS = 256
CSV_HEADER = ("n", "p", "alpha_or_sigma", "N", "trials", "success_rate", "mean_time_s")

_EXPONENTIAL = re.compile(r"^\s*(?:e\^\(?|exp\()\s*([^()\s]+)\s*\)?\s*$")

def parse_sigma(text: str) -> Fraction:
    """
    Read a noise magnitude.

    Decimal and "a/b" strings are exact. "e^-20" and "exp(-12)" are rounded
    down to a dyadic rational with INTERNAL_BITS fractional bits.
    """
    match = _EXPONENTIAL.match(text)
    if match is None:
        sigma = parse_exact(text)
    else:
        exponent = parse_exact(match.group(1))
        with mpmath.workprec(INTERNAL_BITS + 64):
            value = mpmath.exp(mpmath.mpf(exponent.numerator) / exponent.denominator)
            scaled = int(mpmath.floor(value * (1 << INTERNAL_BITS)))
        sigma = Fraction(scaled, 1 << INTERNAL_BITS)
    if sigma < 0:
        msg = f"noise magnitude must be non-negative, got {text!r}"
        raise ParameterError(msg)
    return sigma


def n_bits_for_alpha(p: int, n: int, alpha: ExactInput) -> int:
    """Feature bit length ceil(p^2 / (2 alpha n)) for a sample-size ratio alpha."""
    alpha = parse_exact(alpha) if isinstance(alpha, str) else Fraction(alpha)
    if alpha <= 0 or n < 1 or p < 1:
        msg = f"need alpha > 0 and n, p >= 1, got alpha={alpha}, n={n}, p={p}"
        raise ParameterError(msg)
    return math.ceil(Fraction(p * p) / (2 * alpha * n))


@dataclass(frozen=True)
class GenerationParams:
    kind: str
    n: int
    p: int
    r: int
    q: int
    sigma: Fraction
    n_bits: int | None
    signed: bool
    seed: int


@dataclass(frozen=True)
class RegressionInstance:
    """A planted problem Y = X beta* + W, held exactly."""

    x: tuple[tuple[Fraction, ...], ...]
    y: tuple[Fraction, ...]
    beta_star: tuple[Fraction, ...]
    w: tuple[Fraction, ...]
    params: GenerationParams

    def residual_identity_holds(self) -> bool:
        return all(
            y == sum((a * b for a, b in zip(row, self.beta_star, strict=True)), Fraction(0)) + w
            for y, row, w in zip(self.y, self.x, self.w, strict=True)
        )

    def to_elo_input(self, r_hat: int, w_hat: int) -> EloInput:
        """Integer ELO instance; raises ParameterError if any value is fractional."""
        values = [*self.y, *(v for row in self.x for v in row)]
        if any(v.denominator != 1 for v in values):
            msg = "instance has non-integer entries; use the LBR path"
            raise ParameterError(msg)
        return EloInput.build(
            [int(v) for v in self.y],
            [[int(v) for v in row] for row in self.x],
            r_hat,
            w_hat,
        )

    def to_lbr_input(self, n_bits: int, q_hat: int, r_hat: int, w_hat: Fraction) -> LbrInput:
        return LbrInput(self.y, self.x, n_bits, q_hat, r_hat, w_hat)


def _uniform_unit(rng: random.Random) -> Fraction:
    """Dyadic uniform on the open interval (0, 1)."""
    return Fraction(rng.randint(1, (1 << INTERNAL_BITS) - 1), 1 << INTERNAL_BITS)


def _signed(value: int, rng: random.Random, signed: bool) -> int:
    return -value if signed and rng.random() < 0.5 else value


def _assemble(
    x: list[list[Fraction]],
    beta: list[Fraction],
    w: list[Fraction],
    params: GenerationParams,
) -> RegressionInstance:
    y = [
        sum((a * b for a, b in zip(row, beta, strict=True)), Fraction(0)) + noise
        for row, noise in zip(x, w, strict=True)
    ]
    return RegressionInstance(
        x=tuple(tuple(row) for row in x),
        y=tuple(y),
        beta_star=tuple(beta),
        w=tuple(w),
        params=params,
    )


def gen_elo_instance(
    n: int, p: int, r: int, n_bits: int, seed: int, *, signed: bool = False
) -> RegressionInstance:
    """
    Integer instance with beta* uniform on {1, ..., R}, X uniform on
    {1, ..., 2^n_bits} and no noise. With signed=True beta* is uniform on
    {-R, ..., R} instead.
    """
    if min(n, p, r, n_bits) < 1:
        msg = "n, p, R and n_bits must all be >= 1"
        raise ParameterError(msg)
    rng = random.Random(seed)
    if signed:
        beta = [Fraction(rng.randint(-r, r)) for _ in range(p)]
    else:
        beta = [Fraction(rng.randint(1, r)) for _ in range(p)]
    x = [[Fraction(rng.randint(1, 1 << n_bits)) for _ in range(p)] for _ in range(n)]
    params = GenerationParams("elo", n, p, r, 1, Fraction(0), n_bits, signed, seed)
    return _assemble(x, beta, [Fraction(0)] * n, params)


def gen_lbr_instance(
    n: int,
    p: int,
    r: int,
    sigma: Fraction,
    seed: int,
    *,
    q: int = 1,
    signed: bool = False,
) -> RegressionInstance:
    """
    Real-valued instance: each beta* entry is 0 with probability 1/2 and
    otherwise k/q with k uniform on {1, ..., R q} (random sign if signed), X is
    uniform on (0, 1) and W uniform on (-sigma, sigma).
    """
    if min(n, p, r, q) < 1 or sigma < 0:
        msg = "n, p, R, Q must be >= 1 and sigma >= 0"
        raise ParameterError(msg)
    rng = random.Random(seed)
    beta = [
        Fraction(0)
        if rng.random() < 0.5
        else Fraction(_signed(rng.randint(1, r * q), rng, signed), q)
        for _ in range(p)
    ]
    x = [[_uniform_unit(rng) for _ in range(p)] for _ in range(n)]
    if sigma:
        w = [sigma * (2 * _uniform_unit(rng) - 1) for _ in range(n)]
    else:
        w = [Fraction(0)] * n
    params = GenerationParams("lbr", n, p, r, q, sigma, None, signed, seed)
    return _assemble(x, beta, w, params)


@dataclass(frozen=True)
class TrialRecord:
    cell: int
    trial: int
    seed: int
    success: bool
    wall_time: float
    lll_swaps: int
    degenerate: bool


@dataclass(frozen=True)
class SweepRow:
    n: int
    p: int
    label: str
    n_bits: int
    trials: int
    successes: int
    mean_time: float

    @property
    def success_rate(self) -> Fraction:
        return Fraction(self.successes, self.trials)


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    records: list[TrialRecord]


@dataclass(frozen=True)
class EloTrialTask:
    cell: int
    trial: int
    seed: int
    n: int
    p: int
    r: int
    n_bits: int


@dataclass(frozen=True)
class LbrTrialTask:
    cell: int
    trial: int
    seed: int
    n: int
    p: int
    r: int
    sigma: Fraction
    n_bits: int


def run_elo_trial(task: EloTrialTask) -> TrialRecord:
    instance = gen_elo_instance(task.n, task.p, task.r, task.n_bits, task.seed)
    data = instance.to_elo_input(r_hat=task.r, w_hat=1)
    start = time.perf_counter()
    result = elo_recover(data, derive_seed(task.seed, "shift"))
    elapsed = time.perf_counter() - start
    success = tuple(Fraction(b) for b in result.beta_hat) == instance.beta_star
    return TrialRecord(
        cell=task.cell,
        trial=task.trial,
        seed=task.seed,
        success=success and not result.trace.degenerate,
        wall_time=elapsed,
        lll_swaps=result.trace.lll_swaps,
        degenerate=result.trace.degenerate,
    )


def run_lbr_trial(task: LbrTrialTask) -> TrialRecord:
    instance = gen_lbr_instance(task.n, task.p, task.r, task.sigma, task.seed)
    w_hat = max(task.sigma, Fraction(1, 1 << task.n_bits))
    data = instance.to_lbr_input(task.n_bits, q_hat=1, r_hat=task.r, w_hat=w_hat)
    start = time.perf_counter()
    result = lbr_recover(data, derive_seed(task.seed, "shift"))
    elapsed = time.perf_counter() - start
    return TrialRecord(
        cell=task.cell,
        trial=task.trial,
        seed=task.seed,
        success=result.beta_hat == instance.beta_star and not result.trace.degenerate,
        wall_time=elapsed,
        lll_swaps=result.trace.lll_swaps,
        degenerate=result.trace.degenerate,
    )


def _summarize(
    records: Iterable[TrialRecord], cell: int, n: int, p: int, label: str, n_bits: int
) -> SweepRow:
    mine = [record for record in records if record.cell == cell]
    return SweepRow(
        n=n,
        p=p,
        label=label,
        n_bits=n_bits,
        trials=len(mine),
        successes=sum(record.success for record in mine),
        mean_time=sum(record.wall_time for record in mine) / len(mine),
    )


def _check_grid(trials: int, **axes: Sequence[object]) -> None:
    if trials < 1:
        msg = f"trials must be >= 1, got {trials}"
        raise ParameterError(msg)
    for name, values in axes.items():
        if not values:
            msg = f"{name} must not be empty"
            raise ParameterError(msg)


def run_elo_sweep(
    p: int,
    n_list: Sequence[int],
    r: int,
    alpha_list: Sequence[str],
    trials: int,
    seed_base: int,
    *,
    workers: int | None = None,
) -> SweepResult:
    """
    Exact-recovery rate of ELO over the (n, alpha) grid.

    Features carry ceil(p^2 / (2 alpha n)) bits; ELO runs with R_hat = R and
    W_hat = 1. Alphas are given as exact strings and echoed into the CSV.
    """
    _check_grid(trials, n_list=n_list, alpha_list=alpha_list)

    cells = [
        (index, n, alpha, n_bits_for_alpha(p, n, alpha))
        for index, (n, alpha) in enumerate((n, a) for n in n_list for a in alpha_list)
    ]
    tasks = [
        EloTrialTask(cell, t, derive_seed(seed_base, cell, t), n, p, r, n_bits)
        for cell, n, _, n_bits in cells
        for t in range(trials)
    ]
    records = sorted(
        map_tasks(run_elo_trial, tasks, workers), key=lambda record: (record.cell, record.trial)
    )
    rows = []
    for cell, n, alpha, n_bits in cells:
        row = _summarize(records, cell, n, p, alpha, n_bits)
        logger.info("ELO n=%d alpha=%s N=%d: %d/%d", n, alpha, n_bits, row.successes, trials)
        rows.append(row)
    return SweepResult(rows=rows, records=records)


def run_lbr_sweep(
    p: int,
    n: int,
    r: int,
    sigma_list: Sequence[str],
    n_list: Sequence[int],
    trials: int,
    seed_base: int,
    *,
    workers: int | None = None,
) -> SweepResult:
    """
    Exact-recovery rate of LBR over the (sigma, N) grid with Q_hat = 1,
    R_hat = R and W_hat = max(sigma, 2^-N).
    """
    _check_grid(trials, sigma_list=sigma_list, n_list=n_list)
    if any(bits < 1 for bits in n_list):
        msg = "truncation levels must be >= 1"
        raise ParameterError(msg)

    cells = [
        (index, label, parse_sigma(label), bits)
        for index, (label, bits) in enumerate((s, b) for s in sigma_list for b in n_list)
    ]
    tasks = [
        LbrTrialTask(cell, t, derive_seed(seed_base, cell, t), n, p, r, sigma, bits)
        for cell, _, sigma, bits in cells
        for t in range(trials)
    ]
    records = sorted(
        map_tasks(run_lbr_trial, tasks, workers), key=lambda record: (record.cell, record.trial)
    )
    rows = []
    for cell, label, _, bits in cells:
        row = _summarize(records, cell, n, p, label, bits)
        logger.info("LBR sigma=%s N=%d: %d/%d", label, bits, row.successes, trials)
        rows.append(row)
    return SweepResult(rows=rows, records=records)


def write_sweep_csv(rows: Iterable[SweepRow], stream: IO[str], *, timing: bool = False) -> None:
    """Write the sweep table; mean_time_s stays empty unless timing is requested."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            (
                row.n,
                row.p,
                row.label,
                row.n_bits,
                row.trials,
                format_exact(row.success_rate),
                f"{row.mean_time:.6f}" if timing else "",
            )
        )


def shift_coprimality_rate(p: int, r_hat: int, trials: int, seed: int) -> CoprimalityEstimate:
    """
    Fraction of trials in which beta* + Z has gcd 1, for beta* uniform on
    [-R_hat, R_hat]^p and Z drawn by the ELO shift sampler.
    """
    if min(p, r_hat, trials) < 1:
        msg = "p, R_hat and trials must all be >= 1"
        raise ParameterError(msg)
    hits = 0
    for trial in range(trials):
        rng = random.Random(derive_seed(seed, "shift-gcd", trial))
        beta = [rng.randint(-r_hat, r_hat) for _ in range(p)]
        shift = sample_shift(p, r_hat, rng)
        hits += gcd_vector(b + z for b, z in zip(beta, shift, strict=True)).value == 1
    return CoprimalityEstimate(hits=hits, samples=trials)


COPRIMALITY_HEADER = ("check", "samples", "hits", "estimate", "standard_error")


def write_coprimality_csv(
    checks: Iterable[tuple[str, CoprimalityEstimate]], stream: IO[str]
) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(COPRIMALITY_HEADER)
    for name, estimate in checks:
        writer.writerow(
            (
                name,
                estimate.samples,
                estimate.hits,
                format_exact(estimate.estimate),
                mpmath.nstr(estimate.standard_error, 6),
            )
        )
