"""
Pydantic models for the JSON files read and written by the command line.

Numbers travel as decimal strings (or JSON integers) and are parsed exactly;
binary floats are rejected. Output models serialize integers and rationals as
strings so files stay exact and byte-stable.
"""

from collections.abc import Sequence
from fractions import Fraction
from typing import Annotated

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    field_validator,
    model_validator,
)

from bounds import BoundsSummary, ProblemProfile, SigmaValue
from elo import EloInput, EloTrace
from errors import NumericParseError
from exactnum import format_exact, parse_exact
from harness import TrialRecord, parse_sigma
from lbr import LbrInput
from lll import LatticeBasis, ReductionReport


def _exact_int(value: object) -> object:
    if isinstance(value, str):
        try:
            return int(value.strip())
        except ValueError:
            raise NumericParseError(value, "not an integer") from None
    return value


def _exact_fraction(value: object) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise NumericParseError(repr(value), "binary floats are not accepted")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_exact(value)
    raise NumericParseError(repr(value))


def _noise_magnitude(value: object) -> Fraction:
    if isinstance(value, str):
        return parse_sigma(value)
    return _exact_fraction(value)


BigInt = Annotated[int, BeforeValidator(_exact_int), PlainSerializer(str, return_type=str)]
ExactNumber = Annotated[
    Fraction,
    PlainValidator(_exact_fraction),
    PlainSerializer(format_exact, return_type=str),
]


def _check_matrix(
    x: Sequence[Sequence[object]], rows: int | None, label: str
) -> None:
    if not x or not x[0]:
        msg = f"{label} must have at least one row and one column"
        raise ValueError(msg)
    if rows is not None and len(x) != rows:
        msg = f"y has {rows} entries but {label} has {len(x)} rows"
        raise ValueError(msg)
    width = len(x[0])
    for index, row in enumerate(x):
        if len(row) != width:
            msg = f"{label} row {index} has {len(row)} entries, expected {width}"
            raise ValueError(msg)


class FileModel(BaseModel):
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)


class EloInstanceFile(FileModel):
    """
    Pydantic model for integer ELO instances.
    """

    y: list[BigInt] = Field(..., min_length=1, description="Integer observations")
    x: list[list[BigInt]] = Field(..., description="n x p integer design matrix")
    r_hat: BigInt = Field(..., ge=1, description="Bound on the entries of beta*")
    w_hat: BigInt = Field(1, ge=1, description="Bound on the noise entries")
    seed: int | None = Field(None, description="Shift seed, overridden by --seed")

    @model_validator(mode="after")
    def check_shape(self) -> "EloInstanceFile":
        _check_matrix(self.x, len(self.y), "x")
        return self

    def to_input(self) -> EloInput:
        return EloInput.build(self.y, self.x, self.r_hat, self.w_hat)


class LbrInstanceFile(FileModel):
    """
    Pydantic model for real-valued LBR instances.
    """

    y: list[ExactNumber] = Field(..., min_length=1)
    x: list[list[ExactNumber]]
    n_bits: int = Field(..., ge=1, description="Truncation level N")
    q_hat: BigInt = Field(1, ge=1)
    r_hat: BigInt = Field(..., ge=1)
    w_hat: ExactNumber = Field(Fraction(1), description="Bound on the real noise")
    seed: int | None = None

    @model_validator(mode="after")
    def check_shape(self) -> "LbrInstanceFile":
        _check_matrix(self.x, len(self.y), "x")
        if self.w_hat <= 0:
            msg = "w_hat must be positive"
            raise ValueError(msg)
        return self

    def to_input(self) -> LbrInput:
        return LbrInput.build(
            self.y, self.x, self.n_bits, self.q_hat, self.r_hat, self.w_hat
        )


class LatticeBasisFile(FileModel):
    """
    Pydantic model for a lattice basis given as rows.
    """

    basis: list[list[BigInt]]

    @model_validator(mode="after")
    def check_square(self) -> "LatticeBasisFile":
        _check_matrix(self.basis, None, "basis")
        if len(self.basis) != len(self.basis[0]):
            msg = f"basis has {len(self.basis)} rows of length {len(self.basis[0])}"
            raise ValueError(msg)
        return self

    def to_basis(self) -> LatticeBasis:
        return LatticeBasis.from_rows(self.basis)


class ProfileFile(FileModel):
    """
    Pydantic model for the problem profile read by the bounds command.
    sigma also accepts "e^-20" style magnitudes.
    """

    n: int = Field(..., ge=1)
    p: int = Field(..., ge=1)
    r: BigInt = Field(..., ge=1)
    q: BigInt = Field(1, ge=1)
    sigma: Annotated[Fraction, PlainValidator(_noise_magnitude)] = Fraction(0)
    c: ExactNumber = Fraction(1)
    epsilon: ExactNumber = Fraction(1, 10)
    big_c: ExactNumber = Field(Fraction(1), alias="C")
    q_hat: BigInt | None = Field(None, ge=1)
    r_hat: BigInt | None = Field(None, ge=1)
    n_bits: int | None = Field(None, ge=1)

    model_config = ConfigDict(
        extra="forbid", arbitrary_types_allowed=True, populate_by_name=True
    )

    def to_profile(self) -> ProblemProfile:
        return ProblemProfile(
            n=self.n,
            p=self.p,
            r=self.r,
            q=self.q,
            sigma=self.sigma,
            c=self.c,
            epsilon=self.epsilon,
            big_c=self.big_c,
        )


class EloSweepSpec(FileModel):
    """
    Pydantic model for an ELO success-rate sweep over (n, alpha).
    """

    p: int = Field(..., ge=1)
    n_list: list[int] = Field(..., min_length=1)
    r: BigInt = Field(100, ge=1)
    alpha_list: list[str] = Field(..., min_length=1)
    trials: int = Field(20, ge=1)
    seed: int = 0

    @field_validator("n_list")
    @classmethod
    def check_sizes(cls, values: list[int]) -> list[int]:
        for value in values:
            if value < 1:
                msg = f"n_list entry {value} must be >= 1"
                raise ValueError(msg)
        return values

    @field_validator("alpha_list")
    @classmethod
    def check_alphas(cls, values: list[str]) -> list[str]:
        for value in values:
            if parse_exact(value) <= 0:
                msg = f"alpha {value!r} must be positive"
                raise ValueError(msg)
        return values


class LbrSweepSpec(FileModel):
    """
    Pydantic model for an LBR success-rate sweep over (sigma, N).
    """

    p: int = Field(..., ge=1)
    n: int = Field(..., ge=1)
    r: BigInt = Field(100, ge=1)
    sigma_list: list[str] = Field(..., min_length=1)
    n_bits_list: list[int] = Field(..., min_length=1)
    trials: int = Field(20, ge=1)
    seed: int = 0

    @field_validator("sigma_list")
    @classmethod
    def check_sigmas(cls, values: list[str]) -> list[str]:
        for value in values:
            parse_sigma(value)
        return values

    @field_validator("n_bits_list")
    @classmethod
    def check_levels(cls, values: list[int]) -> list[int]:
        for value in values:
            if value < 1:
                msg = f"truncation level {value} must be >= 1"
                raise ValueError(msg)
        return values


class CoprimalitySpec(FileModel):
    """
    Pydantic model for the coprimality density check. With shift_p set, the
    shifted-vector gcd check runs as well.
    """

    q1: BigInt = Field(..., ge=1)
    q2: BigInt = Field(..., ge=1)
    q: BigInt = Field(..., ge=1)
    samples: int = Field(..., ge=1)
    seed: int = 0
    chunk_size: int = Field(10_000, ge=1)
    shift_p: int | None = Field(None, ge=1)
    shift_r_hat: BigInt = Field(100, ge=1)
    shift_trials: int = Field(1000, ge=1)


class TraceOutput(BaseModel):
    """
    Pydantic model for the ELO trace written next to every recovery.
    """

    seed: int
    attempts: int
    shift: list[BigInt]
    y1: list[BigInt]
    y2: list[BigInt]
    clamped_indices: list[int]
    m: BigInt
    zhat: list[BigInt]
    g: BigInt
    lll_swaps: int
    degenerate: bool

    @classmethod
    def from_trace(cls, trace: EloTrace, attempts: int) -> "TraceOutput":
        return cls(
            seed=trace.seed,
            attempts=attempts,
            shift=list(trace.shift),
            y1=list(trace.y1),
            y2=list(trace.y2),
            clamped_indices=sorted(trace.clamped_indices),
            m=trace.m,
            zhat=list(trace.zhat),
            g=trace.g,
            lll_swaps=trace.lll_swaps,
            degenerate=trace.degenerate,
        )


class RecoveryOutput(BaseModel):
    """
    Pydantic model for a recovered vector, entries as exact strings.
    """

    beta_hat: list[str]
    trace: TraceOutput

    @classmethod
    def build(
        cls, beta_hat: tuple[Fraction, ...] | tuple[int, ...], trace: EloTrace, attempts: int
    ) -> "RecoveryOutput":
        return cls(
            beta_hat=[format_exact(v) for v in beta_hat],
            trace=TraceOutput.from_trace(trace, attempts),
        )


class ReductionOutput(BaseModel):
    """
    Pydantic model for an LLL-reduced basis and the statistics of the run.
    """

    delta: str
    basis: list[list[BigInt]]
    swap_count: int
    size_reduction_count: int
    max_intermediate_bits: int

    @classmethod
    def from_report(cls, report: ReductionReport) -> "ReductionOutput":
        return cls(
            delta=format_exact(report.delta),
            basis=report.reduced_basis.rows(),
            swap_count=report.swap_count,
            size_reduction_count=report.size_reduction_count,
            max_intermediate_bits=report.max_intermediate_bits,
        )


class SigmaOutput(BaseModel):
    value: str
    log2: str
    exact: bool

    @classmethod
    def from_value(cls, sigma: SigmaValue) -> "SigmaOutput":
        return cls(
            value=format_exact(sigma.value),
            log2=format_exact(sigma.log2),
            exact=sigma.exact,
        )


def _optional(value: Fraction | None) -> str | None:
    return None if value is None else format_exact(value)


class BoundsOutput(BaseModel):
    """
    Pydantic model for the bounds report. max_n is null when sigma = 0, which
    leaves the truncation window open above.
    """

    model: str
    elo_required_n: str
    window_required_n: str
    window_max_n: str | None
    window_max_n_natural: str | None
    window_satisfiable: bool
    window_min_integer_n: int
    window_max_integer_n: int | None
    window_sigma_ceiling: SigmaOutput
    p_threshold: str
    info_sigma_ceiling: SigmaOutput
    sigma0: SigmaOutput
    sigma0_degenerate: bool
    recoverable_below: SigmaOutput
    impossible_above: SigmaOutput
    lbr_rhs: str | None
    lbr_holds: bool | None

    @classmethod
    def from_summary(cls, summary: BoundsSummary) -> "BoundsOutput":
        window = summary.window
        return cls(
            model=summary.model.value,
            elo_required_n=format_exact(summary.elo_rhs),
            window_required_n=format_exact(window.required_n),
            window_max_n=_optional(window.max_n),
            window_max_n_natural=_optional(window.max_n_natural),
            window_satisfiable=window.satisfiable,
            window_min_integer_n=window.min_integer_n,
            window_max_integer_n=window.max_integer_n,
            window_sigma_ceiling=SigmaOutput.from_value(window.sigma_ceiling),
            p_threshold=format_exact(window.p_threshold),
            info_sigma_ceiling=SigmaOutput.from_value(summary.info_ceiling),
            sigma0=SigmaOutput.from_value(summary.phase.sigma0),
            sigma0_degenerate=summary.phase.degenerate,
            recoverable_below=SigmaOutput.from_value(summary.lower_bracket),
            impossible_above=SigmaOutput.from_value(summary.upper_bracket),
            lbr_rhs=_optional(summary.lbr_rhs),
            lbr_holds=summary.lbr_holds,
        )


class StoredRecordOutput(BaseModel):
    """
    Pydantic model for one trial record read back from the store.
    """

    experiment: str
    kind: str
    cell: int
    trial: int
    seed: int
    success: bool
    wall_time: float
    lll_swaps: int
    degenerate: bool

    @classmethod
    def from_record(cls, experiment: str, kind: str, record: TrialRecord) -> "StoredRecordOutput":
        return cls(
            experiment=experiment,
            kind=kind,
            cell=record.cell,
            trial=record.trial,
            seed=record.seed,
            success=record.success,
            wall_time=record.wall_time,
            lll_swaps=record.lll_swaps,
            degenerate=record.degenerate,
        )
