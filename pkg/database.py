"""
Trial-record store for experiment sweeps.
Uses async SQLAlchemy with aiosqlite so sweeps run on different days can be
aggregated per experiment label.
"""

import os
import pathlib
from collections.abc import AsyncGenerator, Iterable
from datetime import datetime

from sqlalchemy import Boolean, DateTime, Float, Integer, String, delete, select
from sqlalchemy.ext.asyncio import (
    AsyncEngine,
    AsyncSession,
    async_sessionmaker,
    create_async_engine,
)
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column
from sqlalchemy.sql import func

from harness import TrialRecord


# Database configuration
def get_database_url() -> str:
    """
    Get the database URL based on environment configuration.

    In production mode (LATREG_ENVIRONMENT=production), uses latreg.db
    In development/test mode (default), uses latreg_test.db

    Can be overridden with LATREG_DATABASE_URL environment variable.
    """
    if database_url := os.getenv("LATREG_DATABASE_URL"):
        return database_url

    environment = os.getenv("LATREG_ENVIRONMENT", "development").lower()
    db_file = "latreg.db" if environment == "production" else "latreg_test.db"
    return f"sqlite+aiosqlite:///{db_file}"


# Created on first use so the URL is read after the environment is final
engine: AsyncEngine | None = None
async_session_maker: async_sessionmaker[AsyncSession] | None = None


def get_engine() -> AsyncEngine:
    """Get or create the database engine."""
    global engine
    if engine is None:
        database_url = get_database_url()
        if database_url.startswith("sqlite"):
            db_file_path = database_url.replace("sqlite+aiosqlite:///", "")
            if db_file_path and "/" in db_file_path:
                pathlib.Path(db_file_path).parent.mkdir(parents=True, exist_ok=True)

        engine = create_async_engine(
            database_url,
            echo=bool(os.getenv("LATREG_DEBUG", False)),
            pool_pre_ping=False,
        )
    return engine


def get_session_maker() -> async_sessionmaker[AsyncSession]:
    """Get or create the async session maker."""
    global async_session_maker
    if async_session_maker is None:
        async_session_maker = async_sessionmaker(
            get_engine(),
            class_=AsyncSession,
            expire_on_commit=False,
        )
    return async_session_maker


async def dispose_engine() -> None:
    """Close the engine so the next call to get_engine() starts fresh."""
    global engine, async_session_maker
    if engine is not None:
        await engine.dispose()
    engine = None
    async_session_maker = None


class Base(DeclarativeBase):
    """Base class for all database models."""


class TrialRecordModel(Base):
    """
    SQLAlchemy model for one sweep trial.
    Seeds are stored as text since derived seeds use the full 63 bits.
    """

    __tablename__ = "trial_records"

    id: Mapped[int] = mapped_column(primary_key=True)
    experiment: Mapped[str] = mapped_column(String(255), nullable=False, index=True)
    kind: Mapped[str] = mapped_column(String(16), nullable=False)
    cell: Mapped[int] = mapped_column(Integer, nullable=False)
    trial: Mapped[int] = mapped_column(Integer, nullable=False)
    seed: Mapped[str] = mapped_column(String(32), nullable=False)
    success: Mapped[bool] = mapped_column(Boolean, nullable=False)
    wall_time: Mapped[float] = mapped_column(Float, nullable=False)
    lll_swaps: Mapped[int] = mapped_column(Integer, nullable=False)
    degenerate: Mapped[bool] = mapped_column(Boolean, nullable=False)
    created_at: Mapped[datetime] = mapped_column(
        DateTime, nullable=False, default=func.now()
    )

    def to_record(self) -> TrialRecord:
        return TrialRecord(
            cell=self.cell,
            trial=self.trial,
            seed=int(self.seed),
            success=self.success,
            wall_time=self.wall_time,
            lll_swaps=self.lll_swaps,
            degenerate=self.degenerate,
        )

    def __repr__(self) -> str:
        return f"TrialRecordModel(id={self.id}, experiment='{self.experiment}', cell={self.cell}, trial={self.trial}, success={self.success})"


async def get_async_session() -> AsyncGenerator[AsyncSession, None]:
    """
    Yield an async database session and close it afterwards.
    """
    session_maker = get_session_maker()
    async with session_maker() as session:
        try:
            yield session
        finally:
            await session.close()


async def init_database() -> None:
    """
    Initialize the database by creating all tables.
    """
    engine = get_engine()
    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)


async def save_trial_records_db(
    session: AsyncSession,
    experiment: str,
    kind: str,
    records: Iterable[TrialRecord],
) -> int:
    """
    Persist the records of one sweep under an experiment label.

    Args:
        session: Async database session
        experiment: Label grouping records across invocations
        kind: "elo" or "lbr"
        records: Trial records of the sweep

    Returns:
        Number of rows written
    """
    rows = [
        TrialRecordModel(
            experiment=experiment,
            kind=kind,
            cell=record.cell,
            trial=record.trial,
            seed=str(record.seed),
            success=record.success,
            wall_time=record.wall_time,
            lll_swaps=record.lll_swaps,
            degenerate=record.degenerate,
        )
        for record in records
    ]
    session.add_all(rows)
    await session.commit()
    return len(rows)


async def get_trial_records_db(
    session: AsyncSession, experiment: str | None = None
) -> list[TrialRecordModel]:
    """
    Get stored trial records, optionally for one experiment label.

    Args:
        session: Async database session
        experiment: Label to filter on; None returns every record

    Returns:
        Records ordered by experiment, cell and trial
    """
    stmt = select(TrialRecordModel)
    if experiment is not None:
        stmt = stmt.where(TrialRecordModel.experiment == experiment)
    stmt = stmt.order_by(
        TrialRecordModel.experiment,
        TrialRecordModel.cell,
        TrialRecordModel.trial,
        TrialRecordModel.id,
    )
    result = await session.execute(stmt)
    return list(result.scalars().all())


async def clear_database(older_than: datetime | None = None) -> int:
    """
    Clear trial records from the database.

    Args:
        older_than: If provided, only delete records created before this date.
                   If None, delete all records.

    Returns:
        Number of records deleted
    """
    session_maker = get_session_maker()
    async with session_maker() as session:
        if older_than is None:
            result = await session.execute(delete(TrialRecordModel))
        else:
            result = await session.execute(
                delete(TrialRecordModel).where(TrialRecordModel.created_at < older_than)
            )
        await session.commit()
        return result.rowcount or 0


async def store_trial_records(
    experiment: str, kind: str, records: Iterable[TrialRecord]
) -> int:
    """
    Create the tables if needed, save the records and release the engine.
    Meant to be driven by asyncio.run() from the command line.
    """
    try:
        await init_database()
        async with get_session_maker()() as session:
            return await save_trial_records_db(session, experiment, kind, records)
    finally:
        await dispose_engine()


async def load_trial_records(experiment: str | None = None) -> list[TrialRecordModel]:
    """
    Read stored records back for the records command, then release the engine.

    Args:
        experiment: Label to filter on; None returns every record

    Returns:
        Records ordered by experiment, cell and trial
    """
    try:
        await init_database()
        async with get_session_maker()() as session:
            return await get_trial_records_db(session, experiment)
    finally:
        await dispose_engine()


async def purge_trial_records(older_than: datetime | None = None) -> int:
    """Delete stored records (all, or those created before older_than) and release the engine."""
    try:
        await init_database()
        return await clear_database(older_than)
    finally:
        await dispose_engine()
