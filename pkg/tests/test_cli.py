"""CLI tests: exit codes, diagnostics format, determinism, service startup."""

from __future__ import annotations

import os
import socket
import subprocess
import sys
import time

import httpx
import pytest

from sgl.cli import main
from sgl.demo import CARS_SAMPLE, TREES_SAMPLE

SCATTER = "visualize horsepower as x, miles_per_gallon as y from cars using points;"
JITTERED = "visualize origin as x, miles_per_gallon as y from cars using jittered points;"


@pytest.fixture
def db_path(tmp_path):
    path = str(tmp_path / "warehouse.db")
    cars = tmp_path / "cars.csv"
    cars.write_text(CARS_SAMPLE, encoding="utf-8")
    trees = tmp_path / "trees.csv"
    trees.write_text(TREES_SAMPLE, encoding="utf-8")
    assert main(["load", "--file", str(cars), "--table", "cars", "--db", path]) == 0
    assert main(["load", "--file", str(trees), "--table", "trees", "--db", path]) == 0
    return path


def test_load_prints_schema_summary(tmp_path, capsys):
    cars = tmp_path / "cars.csv"
    cars.write_text(CARS_SAMPLE, encoding="utf-8")
    code = main(["load", "--file", str(cars), "--table", "cars", "--db", str(tmp_path / "x.db")])
    assert code == 0
    assert capsys.readouterr().out.strip() == "cars: 5 columns"


def test_load_missing_file_exit_2(tmp_path, capsys):
    code = main(["load", "--file", str(tmp_path / "nope.csv"), "--table", "t"])
    assert code == 2
    assert "nope.csv" in capsys.readouterr().err


def test_load_ragged_csv_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n3\n", encoding="utf-8")
    code = main(["load", "--file", str(bad), "--table", "t", "--db", str(tmp_path / "x.db")])
    assert code == 2
    err = capsys.readouterr().err
    assert "RaggedRow" in err and "3" in err


def test_run_writes_svg(db_path, tmp_path, capsys):
    out = tmp_path / "chart.svg"
    code = main([
        "run", "--statement", SCATTER, "--db", db_path, "--output", str(out),
    ])
    assert code == 0
    svg = out.read_text(encoding="utf-8")
    assert svg.startswith("<?xml")
    assert svg.count("<circle") == 5


def test_run_stdout_output(db_path, capsys):
    code = main(["run", "--statement", SCATTER, "--db", db_path])
    assert code == 0
    assert capsys.readouterr().out.count("<circle") == 5


def test_run_statement_error_exit_1(db_path, capsys):
    code = main([
        "run", "--statement",
        "visualize horsepower as x, count(*) as theta from cars group by horsepower using points;",
        "--db", db_path,
    ])
    assert code == 1
    err = capsys.readouterr().err
    assert "E_COORD_MIX" in err
    assert err.startswith("<statement>:")
    # editor-friendly position format: path:line:col: CODE message
    head = err.splitlines()[0]
    path, line, col, rest = head.split(":", 3)
    assert path == "<statement>"
    assert line.isdigit() and col.isdigit()


def test_run_input_file_and_seed_determinism(db_path, tmp_path):
    source = tmp_path / "q.sgl"
    source.write_text(JITTERED, encoding="utf-8")
    out1, out2, out3 = (tmp_path / f"o{i}.svg" for i in range(3))
    for out in (out1, out2):
        assert main([
            "run", "--input", str(source), "--db", db_path,
            "--seed", "5", "--output", str(out),
        ]) == 0
    assert main([
        "run", "--input", str(source), "--db", db_path,
        "--seed", "6", "--output", str(out3),
    ]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.read_bytes() != out3.read_bytes()


def test_run_parallel_rendering_identical(db_path, tmp_path):
    serial = tmp_path / "serial.svg"
    parallel = tmp_path / "parallel.svg"
    statement = SCATTER[:-1] + " facet by origin;"
    assert main(["run", "--statement", statement, "--db", db_path, "--output", str(serial)]) == 0
    assert main([
        "run", "--statement", statement, "--db", db_path, "--output", str(parallel), "--parallel",
    ]) == 0
    assert serial.read_bytes() == parallel.read_bytes()


def test_run_config_overrides(db_path, tmp_path):
    conf = tmp_path / "render.conf"
    conf.write_text("width=320\nheight=240\n", encoding="utf-8")
    out = tmp_path / "small.svg"
    assert main([
        "run", "--statement", SCATTER, "--db", db_path,
        "--config", str(conf), "--output", str(out),
    ]) == 0
    assert 'width="320"' in out.read_text(encoding="utf-8")


def test_run_stdin(db_path, tmp_path, monkeypatch, capsys):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO(SCATTER))
    assert main(["run", "--input", "-", "--db", db_path]) == 0
    assert "<svg" in capsys.readouterr().out


def test_serve_port_in_use_exit_3(capsys):
    blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    blocker.bind(("127.0.0.1", 0))
    port = blocker.getsockname()[1]
    try:
        code = main(["serve", "--port", str(port)])
    finally:
        blocker.close()
    assert code == 3
    assert str(port) in capsys.readouterr().err


def _wait_health(port: int, timeout: float = 15.0) -> None:
    deadline = time.time() + timeout
    while time.time() < deadline:
        try:
            if httpx.get(f"http://127.0.0.1:{port}/health", timeout=1.0).status_code == 200:
                return
        except httpx.HTTPError:
            time.sleep(0.15)
    raise TimeoutError("service did not come up")


def _free_port() -> int:
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    return port


def test_serve_subprocess_and_catalog_persistence(tmp_path):
    port = _free_port()
    db = str(tmp_path / "persist.db")
    env = dict(os.environ, SGL_DB_PATH=db, SGL_PORT=str(port))
    args = [sys.executable, "-m", "sgl.cli", "serve"]

    proc = subprocess.Popen(args, env=env, stdout=subprocess.PIPE, stderr=subprocess.STDOUT)
    try:
        _wait_health(port)
        put = httpx.put(f"http://127.0.0.1:{port}/tables/cars", content=CARS_SAMPLE, timeout=5.0)
        assert put.status_code == 201
        names = [t["name"] for t in httpx.get(f"http://127.0.0.1:{port}/tables", timeout=5.0).json()["tables"]]
        assert names == ["cars"]
    finally:
        proc.terminate()
        proc.wait(timeout=10)

    proc = subprocess.Popen(args, env=env, stdout=subprocess.PIPE, stderr=subprocess.STDOUT)
    try:
        _wait_health(port)
        names = [t["name"] for t in httpx.get(f"http://127.0.0.1:{port}/tables", timeout=5.0).json()["tables"]]
        assert names == ["cars"]  # catalog survived the restart
        query = httpx.post(
            f"http://127.0.0.1:{port}/query", json={"sgl": SCATTER}, timeout=10.0,
        )
        assert query.status_code == 200
    finally:
        proc.terminate()
        proc.wait(timeout=10)
