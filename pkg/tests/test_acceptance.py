"""
End-to-end checks of recovery rates, coprimality and bound consistency.

The long sweeps are marked slow; run them with `pytest -m slow`.
"""

import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from bounds import (
    ProblemProfile,
    cor2_window,
    info_theoretic_sigma_ceiling,
    phase_boundary_sigma0,
)
from elo import elo_recover_with_retry, verify_residual
from harness import gen_elo_instance, gen_lbr_instance, run_elo_sweep, run_lbr_sweep
from lbr import lbr_recover, lift_instance
from main import EXIT_OK, main
from numtheory import COPRIME_LIMIT, coprimality_density

ALPHA_GRID = ["0.25", "0.5", "0.75", "1", "1.3", "1.6", "1.9", "2.25", "2.5", "2.75"]


class TestCoprimalityDensity:
    """Test the coprime-pair density against 6/pi^2."""

    @pytest.mark.parametrize(("q1", "q2"), [(1, 1), (10**5, 10**6), (10**6, 10**5), (10**6, 10**6)])
    def test_density_near_limit(self, q1: int, q2: int) -> None:
        estimate = coprimality_density(q1, q2, 10**6 - 1, 100_000, seed=q1 + q2)
        assert abs(float(estimate.estimate) - COPRIME_LIMIT) < 0.01


class TestBoundsConsistency:
    """Test structural properties of the bounds over random profiles."""

    def test_random_profiles(self) -> None:
        rng = random.Random(606)
        for _ in range(100):
            n, p = rng.randint(1, 20), rng.randint(1, 60)
            r, q = rng.randint(1, 1000), rng.randint(1, 10)
            epsilon = Fraction(rng.randint(1, 99), 100)
            profile = ProblemProfile(n=n, p=p, r=r, q=q, epsilon=epsilon)

            report = cor2_window(profile)
            assert report.required_n >= Fraction((p + 2 * n) ** 2, 2 * n)

            phase = phase_boundary_sigma0(n, p, r, q)
            if r * q > 1:
                lower, upper = phase.bracket(epsilon)
                assert lower.value < upper.value
                assert lower.log2 < upper.log2

    def test_info_ceiling_decreasing_in_p(self) -> None:
        rng = random.Random(607)
        for _ in range(20):
            n, q, r = rng.randint(1, 2), rng.randint(1, 5), rng.randint(1, 50)
            logs = [info_theoretic_sigma_ceiling(n, p, q, r).log2 for p in range(10, 20)]
            assert all(a > b for a, b in zip(logs, logs[1:], strict=False))


class TestDeterminism:
    """Test repeated CLI runs give identical files."""

    def test_bounds_and_elo_outputs(self, tmp_path: Path) -> None:
        profile = tmp_path / "profile.json"
        profile.write_text(
            json.dumps({"n": 2, "p": 6, "r": 5, "sigma": "e^-30", "n_bits": 300})
        )
        instance = gen_elo_instance(1, 3, 9, 120, seed=12)
        elo_file = tmp_path / "elo.json"
        elo_file.write_text(
            json.dumps(
                {
                    "y": [str(int(v)) for v in instance.y],
                    "x": [[str(int(v)) for v in row] for row in instance.x],
                    "r_hat": 9,
                }
            )
        )

        outputs = []
        for run in range(2):
            bounds_out = tmp_path / f"bounds{run}.json"
            elo_out = tmp_path / f"elo{run}.json"
            assert main(["bounds", "--profile", str(profile), "--output", str(bounds_out)]) == EXIT_OK
            assert main(["elo", "--input", str(elo_file), "--output", str(elo_out), "--retry", "8"]) == EXIT_OK
            outputs.append((bounds_out.read_bytes(), elo_out.read_bytes()))

        assert outputs[0] == outputs[1]


@pytest.mark.slow
class TestExactnessInvariant:
    """Test that every accepted recovery is exact, over many planted instances."""

    def test_elo_signed_and_zero(self) -> None:
        accepted = 0
        for seed in range(120):
            instance = gen_elo_instance(1, 3, 4, 200, seed=seed, signed=True)
            data = instance.to_elo_input(r_hat=4, w_hat=1)
            result, _ = elo_recover_with_retry(data, seed, retries=4)
            if not result.trace.degenerate and verify_residual(data, result.beta_hat, 1):
                accepted += 1
                assert tuple(Fraction(b) for b in result.beta_hat) == instance.beta_star
        assert accepted >= 110

    def test_lbr_rationals(self) -> None:
        accepted = 0
        for seed in range(100):
            instance = gen_lbr_instance(1, 3, 5, Fraction(0), seed=seed, q=3, signed=True)
            data = instance.to_lbr_input(200, q_hat=3, r_hat=5, w_hat=Fraction(1, 1 << 200))
            result = lbr_recover(data, seed, retries=4)
            lifted = lift_instance(data)
            integral = [int(b * 3) for b in result.beta_hat]
            if not result.trace.degenerate and verify_residual(lifted, integral, lifted.w_hat):
                accepted += 1
                assert result.beta_hat == instance.beta_star
        assert accepted >= 90


@pytest.mark.slow
class TestRecoveryRates:
    """Test the success-rate trends of the sweeps."""

    def test_fast_variant_below_alpha_one(self) -> None:
        result = run_elo_sweep(12, [1], 100, ["0.25", "0.5", "0.75"], 20, seed_base=1)
        assert all(row.success_rate == 1 for row in result.rows)

    def test_full_size_below_alpha_one(self) -> None:
        result = run_elo_sweep(30, [1], 100, ["0.25", "0.5", "0.75"], 20, seed_base=2)
        assert all(row.success_rate == 1 for row in result.rows)

    def test_degradation_in_alpha(self) -> None:
        result = run_elo_sweep(30, [1], 100, ALPHA_GRID, 20, seed_base=3)
        rates = [row.success_rate for row in result.rows]
        inversions = [
            later - earlier for earlier, later in zip(rates, rates[1:], strict=False) if later > earlier
        ]
        assert len(inversions) <= 1
        assert all(step <= Fraction(1, 10) for step in inversions)

    def test_noiseless_lbr(self) -> None:
        result = run_lbr_sweep(30, 10, 100, ["0"], [125], 20, seed_base=4)
        assert result.rows[0].success_rate >= Fraction(9, 10)

    def test_truncation_window(self) -> None:
        """Test the rate at sigma = e^-20 rises from zero, peaks, and falls back as N grows."""
        levels = [24, 32, 34, 36, 38, 40, 48]
        result = run_lbr_sweep(30, 10, 100, ["e^-20"], levels, 20, seed_base=5)
        rates = [row.success_rate for row in result.rows]
        peak = max(rates)
        peak_index = rates.index(peak)

        assert 0 < peak_index < len(levels) - 1
        assert peak >= Fraction(1, 4)
        assert rates[0] <= Fraction(1, 10)
        assert rates[-1] <= Fraction(1, 10)

    def test_far_too_fine_truncation_fails(self) -> None:
        noisy = run_lbr_sweep(30, 10, 100, ["e^-4"], [400], 20, seed_base=6)
        assert noisy.rows[0].success_rate <= Fraction(1, 10)

    def test_noiseless_rate_non_decreasing_in_n(self) -> None:
        """Test that without noise a finer truncation never hurts, up to trial noise."""
        result = run_lbr_sweep(8, 2, 10, ["0"], [8, 16, 24, 32, 40, 56, 72], 10, seed_base=7)
        rates = [row.success_rate for row in result.rows]
        drops = [
            earlier - later for earlier, later in zip(rates, rates[1:], strict=False) if later < earlier
        ]

        assert rates[0] <= Fraction(1, 10)
        assert rates[-1] >= Fraction(9, 10)
        assert len(drops) <= 1
        assert all(drop <= Fraction(1, 10) for drop in drops)
