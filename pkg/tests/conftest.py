"""
Test configuration and fixtures for the lattice regression tests.

Recovery tests pick their seeds through the shift sampler, so a coprime (or
deliberately non-coprime) beta + Z is known before the lattice is reduced.
"""

import json
import random
from collections.abc import AsyncGenerator, Callable, Sequence
from fractions import Fraction
from pathlib import Path
from typing import Any

import pytest
import pytest_asyncio
from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine

from database import Base
from elo import EloInput, sample_shift
from numtheory import gcd_vector

BETA_STAR = (2, -1, 3)
FEATURE_BITS = 200


def _first_shift_seed(beta: Sequence[int], r_hat: int, coprime: bool) -> int:
    for seed in range(1000):
        shift = sample_shift(len(beta), r_hat, random.Random(seed))
        g = gcd_vector(b + z for b, z in zip(beta, shift, strict=True)).value
        if (g == 1) == coprime:
            return seed
    msg = "no matching shift found"
    raise AssertionError(msg)


@pytest.fixture
def coprime_seed() -> Callable[[Sequence[int], int], int]:
    """First seed whose ELO shift makes beta + Z coprime."""
    return lambda beta, r_hat: _first_shift_seed(beta, r_hat, coprime=True)


@pytest.fixture
def shared_factor_seed() -> Callable[[Sequence[int], int], int]:
    """First seed whose ELO shift leaves beta + Z with a common factor."""
    return lambda beta, r_hat: _first_shift_seed(beta, r_hat, coprime=False)


@pytest.fixture
def planted_beta() -> tuple[int, ...]:
    return BETA_STAR


@pytest.fixture
def planted_elo_input() -> EloInput:
    """n=1, p=3 noiseless instance with 200-bit features and beta* = (2, -1, 3)."""
    rng = random.Random(20240501)
    x = [[rng.randint(1, 1 << FEATURE_BITS) for _ in BETA_STAR]]
    y = [sum(a * b for a, b in zip(x[0], BETA_STAR, strict=True))]
    return EloInput.build(y, x, r_hat=3, w_hat=1)


@pytest.fixture
def planted_seed() -> int:
    return _first_shift_seed(BETA_STAR, 3, coprime=True)


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[str, Any], Path]:
    """Write a JSON document under tmp_path and return its path."""

    def write(name: str, payload: Any) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return write


@pytest.fixture
def dyadic_features() -> Callable[[int, int, int], list[list[Fraction]]]:
    """Uniform (0, 1) features with 256 fractional bits from a fixed seed."""

    def build(n: int, p: int, seed: int) -> list[list[Fraction]]:
        rng = random.Random(seed)
        return [
            [Fraction(rng.randint(1, (1 << 256) - 1), 1 << 256) for _ in range(p)]
            for _ in range(n)
        ]

    return build


@pytest_asyncio.fixture
async def test_db_session(tmp_path: Path) -> AsyncGenerator[AsyncSession, None]:
    """Create a test database session on a fresh SQLite file."""
    engine = create_async_engine(f"sqlite+aiosqlite:///{tmp_path}/latreg_test.db")
    session_maker = async_sessionmaker(
        bind=engine, class_=AsyncSession, expire_on_commit=False
    )

    try:
        async with engine.begin() as conn:
            await conn.run_sync(Base.metadata.drop_all)
            await conn.run_sync(Base.metadata.create_all)

        async with session_maker() as session:
            yield session

    finally:
        await engine.dispose()
