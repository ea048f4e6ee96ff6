"""
Tests for instance generators, sweeps and CSV output.
"""

import io
import math
from fractions import Fraction

import pytest

from errors import ParameterError
from harness import (
    CSV_HEADER,
    INTERNAL_BITS,
    SweepRow,
    gen_elo_instance,
    gen_lbr_instance,
    n_bits_for_alpha,
    parse_sigma,
    run_elo_sweep,
    run_lbr_sweep,
    shift_coprimality_rate,
    write_coprimality_csv,
    write_sweep_csv,
)
from numtheory import CoprimalityEstimate


class TestParsing:
    """Test sigma strings and alpha to bit-length conversion."""

    def test_parse_sigma_exponential(self) -> None:
        sigma = parse_sigma("e^-20")
        assert (1 << INTERNAL_BITS) % sigma.denominator == 0
        assert sigma < Fraction(math.exp(-20)) * (1 + Fraction(1, 10**12))
        assert abs(float(sigma) - math.exp(-20)) < 1e-20

    @pytest.mark.parametrize("text", ["exp(-12)", "e^(-12)", " e^-12 "])
    def test_parse_sigma_spellings(self, text: str) -> None:
        assert parse_sigma(text) == parse_sigma("exp(-12)")

    def test_parse_sigma_decimal(self) -> None:
        assert parse_sigma("0") == 0
        assert parse_sigma("1e-6") == Fraction(1, 10**6)
        assert parse_sigma("3/7") == Fraction(3, 7)

    def test_parse_sigma_rejects_negative(self) -> None:
        with pytest.raises(ParameterError):
            parse_sigma("-0.5")

    @pytest.mark.parametrize(
        ("p", "n", "alpha", "expected"),
        [(30, 1, "0.25", 1800), (30, 4, "1", 113), (8, 1, "0.25", 128), (2, 1, 1, 2)],
    )
    def test_n_bits_for_alpha(self, p: int, n: int, alpha: str | int, expected: int) -> None:
        assert n_bits_for_alpha(p, n, alpha) == expected

    def test_n_bits_rejects_non_positive_alpha(self) -> None:
        with pytest.raises(ParameterError):
            n_bits_for_alpha(4, 1, "0")


class TestGenerators:
    """Test the planted-instance generators."""

    def test_elo_instance(self) -> None:
        instance = gen_elo_instance(2, 5, 10, 64, seed=1)
        assert instance.residual_identity_holds()
        assert all(1 <= b <= 10 for b in instance.beta_star)
        assert all(1 <= v <= 1 << 64 for row in instance.x for v in row)
        assert instance.w == (0, 0)
        data = instance.to_elo_input(r_hat=10, w_hat=1)
        assert (data.n, data.p) == (2, 5)

    def test_elo_instance_signed(self) -> None:
        instance = gen_elo_instance(1, 200, 3, 16, seed=2, signed=True)
        assert any(b < 0 for b in instance.beta_star)
        assert all(-3 <= b <= 3 for b in instance.beta_star)

    def test_deterministic(self) -> None:
        assert gen_elo_instance(1, 4, 5, 32, seed=9) == gen_elo_instance(1, 4, 5, 32, seed=9)
        assert gen_lbr_instance(2, 4, 5, Fraction(1, 8), 9) == gen_lbr_instance(
            2, 4, 5, Fraction(1, 8), 9
        )
        assert gen_elo_instance(1, 4, 5, 32, seed=9) != gen_elo_instance(1, 4, 5, 32, seed=10)

    def test_lbr_mixture(self) -> None:
        """Test beta* entries are zero about half the time and on the 1/q grid otherwise."""
        instance = gen_lbr_instance(1, 1000, 100, Fraction(0), seed=3, q=4)
        zeros = sum(b == 0 for b in instance.beta_star)
        assert 450 <= zeros <= 550
        assert all(b.denominator in (1, 2, 4) for b in instance.beta_star)
        assert all(0 <= b <= 100 for b in instance.beta_star)

    def test_lbr_noise_bounded(self) -> None:
        sigma = Fraction(1, 1000)
        instance = gen_lbr_instance(50, 3, 10, sigma, seed=4)
        assert instance.residual_identity_holds()
        assert all(abs(w) < sigma for w in instance.w)
        assert all(0 < v < 1 for row in instance.x for v in row)

    def test_real_instance_refuses_integer_path(self) -> None:
        instance = gen_lbr_instance(1, 2, 3, Fraction(0), seed=5)
        with pytest.raises(ParameterError):
            instance.to_elo_input(r_hat=3, w_hat=1)


class TestSweeps:
    """Test seeded sweeps and their CSV rendering."""

    def test_elo_sweep_shape(self) -> None:
        result = run_elo_sweep(4, [1, 2], 10, ["0.5", "1"], 2, seed_base=0, workers=1)

        assert [(row.n, row.label) for row in result.rows] == [
            (1, "0.5"),
            (1, "1"),
            (2, "0.5"),
            (2, "1"),
        ]
        assert len(result.records) == 8
        assert [(r.cell, r.trial) for r in result.records] == [
            (cell, trial) for cell in range(4) for trial in range(2)
        ]
        assert result.rows[0].n_bits == 16

    def test_elo_sweep_high_rate_below_alpha_one(self) -> None:
        """Test p=8, n=1, alpha=0.25 succeeds in nearly every trial."""
        result = run_elo_sweep(8, [1], 100, ["0.25"], 20, seed_base=2024, workers=1)
        assert result.rows[0].n_bits == 128
        assert result.rows[0].success_rate >= Fraction(95, 100)

    def test_sweep_records_reproducible(self) -> None:
        first = run_elo_sweep(3, [1], 5, ["1"], 3, seed_base=7, workers=1)
        second = run_elo_sweep(3, [1], 5, ["1"], 3, seed_base=7, workers=1)
        assert [r.seed for r in first.records] == [r.seed for r in second.records]
        assert [r.success for r in first.records] == [r.success for r in second.records]

    def test_pooled_sweep_matches_serial(self) -> None:
        """Test records and CSV are the same with one worker and with several."""
        serial = run_elo_sweep(4, [1, 2], 6, ["0.5", "1.5"], 3, seed_base=11, workers=1)
        pooled = run_elo_sweep(4, [1, 2], 6, ["0.5", "1.5"], 3, seed_base=11, workers=3)

        def csv_text(rows: list[SweepRow]) -> str:
            stream = io.StringIO()
            write_sweep_csv(rows, stream)
            return stream.getvalue()

        assert csv_text(pooled.rows) == csv_text(serial.rows)
        assert [(r.cell, r.trial, r.seed, r.success, r.lll_swaps) for r in pooled.records] == [
            (r.cell, r.trial, r.seed, r.success, r.lll_swaps) for r in serial.records
        ]

    def test_lbr_sweep_shape(self) -> None:
        result = run_lbr_sweep(3, 1, 5, ["0", "e^-4"], [40, 80], 2, seed_base=1, workers=1)
        assert [(row.label, row.n_bits) for row in result.rows] == [
            ("0", 40),
            ("0", 80),
            ("e^-4", 40),
            ("e^-4", 80),
        ]
        assert all(row.trials == 2 for row in result.rows)

    @pytest.mark.parametrize(
        ("kwargs", "message"),
        [
            ({"n_list": [], "alpha_list": ["1"], "trials": 1}, "n_list"),
            ({"n_list": [1], "alpha_list": [], "trials": 1}, "alpha_list"),
            ({"n_list": [1], "alpha_list": ["1"], "trials": 0}, "trials"),
        ],
    )
    def test_empty_grid_rejected(self, kwargs: dict[str, object], message: str) -> None:
        with pytest.raises(ParameterError) as exc_info:
            run_elo_sweep(4, r=10, seed_base=0, workers=1, **kwargs)  # type: ignore[arg-type]
        assert message in str(exc_info.value)

    def test_write_sweep_csv(self) -> None:
        rows = [
            SweepRow(n=1, p=30, label="0.25", n_bits=1800, trials=20, successes=19, mean_time=1.5),
            SweepRow(n=2, p=30, label="1", n_bits=225, trials=3, successes=1, mean_time=0.25),
        ]
        stream = io.StringIO()

        write_sweep_csv(rows, stream)

        lines = stream.getvalue().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[1] == "1,30,0.25,1800,20,0.95,"
        assert lines[2] == "2,30,1,225,3,1/3,"

    def test_write_sweep_csv_with_timing(self) -> None:
        row = SweepRow(n=1, p=2, label="e^-20", n_bits=40, trials=4, successes=4, mean_time=0.125)
        stream = io.StringIO()

        write_sweep_csv([row], stream, timing=True)

        assert stream.getvalue().splitlines()[1] == "1,2,e^-20,40,4,1,0.125000"


class TestCoprimality:
    def test_shift_makes_large_vectors_coprime(self) -> None:
        estimate = shift_coprimality_rate(40, 100, 1000, seed=0)
        assert estimate.estimate >= Fraction(99, 100)

    def test_write_coprimality_csv(self) -> None:
        stream = io.StringIO()
        write_coprimality_csv([("density", CoprimalityEstimate(hits=3, samples=4))], stream)
        assert stream.getvalue() == (
            "check,samples,hits,estimate,standard_error\n"
            "density,4,3,0.75,0.216506\n"
        )
