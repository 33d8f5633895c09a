"""Deterministic demo datasets shaped like the classic cars/trees warehouses.

Generated with a fixed seed so every checkout produces identical CSV bytes;
used by the CLI quickstart and the larger test fixtures.
"""

from __future__ import annotations

import csv
import random
from pathlib import Path

CARS_SAMPLE = """car_id,horsepower,miles_per_gallon,origin,year
1,130,18,USA,1970
2,165,15,USA,1970
3,150,18,USA,1970
4,150,16,USA,1970
5,140,17,USA,1970
"""

TREES_SAMPLE = """tree_id,age,circumference
1,118,30
1,484,58
1,664,87
1,1004,115
1,1231,120
"""

_ORIGINS = ("USA", "USA", "USA", "Europe", "Japan")
_HP_RANGE = {"USA": (90, 230), "Europe": (50, 140), "Japan": (52, 135)}


def cars_rows(count: int = 300, seed: int = 7) -> list[list]:
    rng = random.Random(seed)
    rows = []
    for car_id in range(1, count + 1):
        origin = _ORIGINS[rng.randrange(len(_ORIGINS))]
        lo, hi = _HP_RANGE[origin]
        hp = rng.randrange(lo, hi + 1)
        year = rng.randrange(1970, 1983)
        base = 46.0 - 0.15 * hp + 0.6 * (year - 1970)
        mpg = max(9, round(base + rng.gauss(0.0, 2.5)))
        rows.append([car_id, hp, mpg, origin, year])
    return rows


def trees_rows() -> list[list]:
    ages = (118, 330, 540, 750, 960, 1170, 1380)
    growth = {1: 0.58, 2: 0.95, 3: 0.62, 4: 1.02, 5: 0.83}
    rows = []
    for tree_id in sorted(growth):
        for age in ages:
            circumference = round(22 + growth[tree_id] * age ** 0.72)
            rows.append([tree_id, age, circumference])
    return rows


def write_demo_csvs(directory: str | Path) -> dict[str, Path]:
    """Write cars.csv and trees.csv (full synthetic sets) plus the 5-row samples."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    def write(name: str, header: list[str], rows: list[list]) -> None:
        path = directory / f"{name}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        paths[name] = path

    write("cars", ["car_id", "horsepower", "miles_per_gallon", "origin", "year"], cars_rows())
    write("trees", ["tree_id", "age", "circumference"], trees_rows())
    (directory / "cars_sample.csv").write_text(CARS_SAMPLE, encoding="utf-8")
    paths["cars_sample"] = directory / "cars_sample.csv"
    (directory / "trees_sample.csv").write_text(TREES_SAMPLE, encoding="utf-8")
    paths["trees_sample"] = directory / "trees_sample.csv"
    return paths
