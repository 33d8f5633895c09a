"""HTTP service tests over the ASGI test client."""

from __future__ import annotations

import threading

import pytest
from fastapi.testclient import TestClient

from sgl import __version__
from sgl.demo import CARS_SAMPLE, TREES_SAMPLE
from sgl.service import MAX_UPLOAD_BYTES, create_app

SCATTER = (
    "visualize\n  horsepower as x,\n  miles_per_gallon as y\nfrom cars\nusing points;"
)
HISTOGRAM_NO_GROUP = (
    "visualize\n  bin(miles_per_gallon) as x,\n  count(*) as y\nfrom cars\nusing bars;"
)


@pytest.fixture
def client():
    app = create_app()
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


@pytest.fixture
def loaded(client):
    assert client.put("/tables/cars", content=CARS_SAMPLE).status_code == 201
    assert client.put("/tables/trees", content=TREES_SAMPLE).status_code == 201
    return client


def test_health_reports_version(client):
    body = client.get("/health").json()
    assert body == {"status": "ok", "version": __version__}


def test_tables_empty_on_fresh_start(client):
    assert client.get("/tables").json() == {"tables": []}


def test_upload_returns_schema(client):
    response = client.put("/tables/cars", content=CARS_SAMPLE)
    assert response.status_code == 201
    body = response.json()
    assert body["name"] == "cars"
    assert [c["name"] for c in body["columns"]] == [
        "car_id", "horsepower", "miles_per_gallon", "origin", "year",
    ]
    assert [c["type"] for c in body["columns"]] == ["int", "int", "int", "text", "int"]


def test_tables_lists_catalog(loaded):
    body = loaded.get("/tables").json()
    assert [t["name"] for t in body["tables"]] == ["cars", "trees"]


def test_query_returns_svg_and_warnings(loaded):
    response = loaded.post("/query", json={"sgl": SCATTER})
    assert response.status_code == 200
    body = response.json()
    assert body["svg"].count("<circle") == 5
    assert body["warnings"] == []
    assert body["timing_ms"] >= 0


def test_query_determinism_same_seed(loaded):
    request = {"sgl": "visualize origin as x, miles_per_gallon as y from cars using jittered points;", "seed": 9}
    first = loaded.post("/query", json=request).json()["svg"]
    second = loaded.post("/query", json=request).json()["svg"]
    assert first == second


def test_query_render_overrides(loaded):
    body = loaded.post("/query", json={"sgl": SCATTER, "width": 801, "height": 601}).json()
    assert 'width="801"' in body["svg"]
    assert 'height="601"' in body["svg"]


def test_query_accept_svg_negotiation(loaded):
    response = loaded.post(
        "/query", json={"sgl": SCATTER}, headers={"accept": "image/svg+xml"},
    )
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("image/svg+xml")
    assert response.text.startswith("<?xml")


def test_malformed_statement_400_with_position(loaded):
    response = loaded.post("/query", json={"sgl": "visualize from"})
    assert response.status_code == 400
    diagnostics = response.json()["diagnostics"]
    assert len(diagnostics) >= 1
    d = diagnostics[0]
    assert d["code"] == "UnexpectedToken"
    assert d["line"] == 1 and d["col"] == 11
    assert set(d) >= {"code", "message", "line", "col", "length"}


def test_groupby_incomplete_400(loaded):
    response = loaded.post("/query", json={"sgl": HISTOGRAM_NO_GROUP})
    assert response.status_code == 400
    assert response.json()["diagnostics"][0]["code"] == "E_GROUPBY_INCOMPLETE"


def test_unknown_table_400(client):
    response = client.post("/query", json={"sgl": SCATTER})
    assert response.status_code == 400
    assert response.json()["diagnostics"][0]["code"] == "E_NO_TABLE"


def test_empty_upload_400(client):
    response = client.put("/tables/cars", content="")
    assert response.status_code == 400
    assert response.json()["diagnostics"][0]["code"] == "EmptyFile"


def test_ragged_upload_400(client):
    response = client.put("/tables/bad", content="a,b\n1\n")
    assert response.status_code == 400
    assert response.json()["diagnostics"][0]["code"] == "RaggedRow"


def test_reupload_replaces_table(loaded):
    extended = CARS_SAMPLE + "6,97,27,Japan,1975\n"
    assert loaded.put("/tables/cars", content=extended).status_code == 201
    body = loaded.post("/query", json={"sgl": SCATTER}).json()
    assert body["svg"].count("<circle") == 6


def test_oversized_upload_rejected(client):
    blob = "a\n" + "1\n" * (MAX_UPLOAD_BYTES // 2 + 2)
    response = client.put("/tables/big", content=blob)
    assert response.status_code == 413
    assert response.json()["diagnostics"][0]["code"] == "E_TOO_LARGE"


def test_query_cannot_mutate_tables(loaded):
    response = loaded.post("/query", json={
        "sgl": "visualize a as x from (drop table cars) using points;",
    })
    assert response.status_code == 400
    assert loaded.post("/query", json={"sgl": SCATTER}).status_code == 200


def test_catalog_never_partial_during_ingestion(loaded):
    errors: list[str] = []
    stop = threading.Event()

    def reader():
        while not stop.is_set():
            body = loaded.get("/tables").json()
            for schema in body["tables"]:
                if schema["name"] == "wide" and len(schema["columns"]) != 3:
                    errors.append(f"partial table: {schema}")
                    return

    threads = [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    wide = "x,y,z\n" + "\n".join(f"{i},{i},{i}" for i in range(300))
    for _ in range(10):
        assert loaded.put("/tables/wide", content=wide).status_code == 201
    stop.set()
    for t in threads:
        t.join()
    assert errors == []


def test_validation_rejects_empty_sgl(client):
    response = client.post("/query", json={"sgl": ""})
    assert response.status_code == 422  # pydantic contract: sgl must be non-empty


def test_backend_failure_maps_to_500(loaded, monkeypatch):
    def explode(*args, **kwargs):
        raise RuntimeError("backend fell over")

    monkeypatch.setattr(loaded.app.state.engine, "run", explode)
    response = loaded.post("/query", json={"sgl": SCATTER})
    assert response.status_code == 500
    diagnostics = response.json()["diagnostics"]
    assert diagnostics[0]["code"] == "E_INTERNAL"
    assert "backend fell over" in diagnostics[0]["message"]
