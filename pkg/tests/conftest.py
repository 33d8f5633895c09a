"""Shared fixtures: sample and full databases, the statement corpus."""

from __future__ import annotations

import io
from pathlib import Path

import pytest

# populated by the acceptance suite; echoed after the test summary
ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for name, ok in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}")

from sgl.datasource import Database, TableSchema
from sgl.demo import CARS_SAMPLE, TREES_SAMPLE, cars_rows, trees_rows

CORPUS_DIR = Path(__file__).parent / "fixtures" / "corpus"


def load_corpus() -> dict[str, str]:
    return {p.stem: p.read_text(encoding="utf-8") for p in sorted(CORPUS_DIR.glob("*.sgl"))}


def full_cars_csv() -> str:
    lines = ["car_id,horsepower,miles_per_gallon,origin,year"]
    lines += [",".join(str(v) for v in row) for row in cars_rows()]
    return "\n".join(lines) + "\n"


def full_trees_csv() -> str:
    lines = ["tree_id,age,circumference"]
    lines += [",".join(str(v) for v in row) for row in trees_rows()]
    return "\n".join(lines) + "\n"


def make_sample_db() -> Database:
    db = Database(":memory:")
    db.load_csv(io.StringIO(CARS_SAMPLE), "cars")
    db.load_csv(io.StringIO(TREES_SAMPLE), "trees")
    return db


def make_full_db() -> Database:
    db = Database(":memory:")
    db.load_csv(io.StringIO(full_cars_csv()), "cars")
    db.load_csv(io.StringIO(full_trees_csv()), "trees")
    return db


@pytest.fixture
def sample_db() -> Database:
    return make_sample_db()


@pytest.fixture
def full_db() -> Database:
    return make_full_db()


@pytest.fixture(scope="session")
def corpus() -> dict[str, str]:
    statements = load_corpus()
    assert len(statements) == 22
    return statements


CARS_SCHEMA = TableSchema("cars", (
    ("car_id", "int"), ("horsepower", "int"), ("miles_per_gallon", "int"),
    ("origin", "text"), ("year", "int"),
))
TREES_SCHEMA = TableSchema("trees", (
    ("tree_id", "int"), ("age", "int"), ("circumference", "int"),
))


@pytest.fixture
def schemas() -> dict[str, TableSchema]:
    return {"table:cars": CARS_SCHEMA, "table:trees": TREES_SCHEMA}
