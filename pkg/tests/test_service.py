import pytest
from fastapi.testclient import TestClient

from torusreeb.service.app import app

client = TestClient(app)

FIX1 = "cos(2*pi*x)+0.5*cos(2*pi*y)"
FIX2 = "cos(2*pi*2*x)+0.5*cos(2*pi*y)"
TREE = "cos(2*pi*x)*cos(2*pi*y)"


def test_health():
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_analyze_fixture():
    r = client.post("/analyze", json={"field": {"expr": FIX1, "resolution": 128}})
    assert r.status_code == 200
    data = r.json()
    assert data["schema"] == 1
    assert len(data["critical_points"]) == 4
    assert data["reeb"]["betti1"] == 1
    assert data["has_cycle"] is True
    assert len(data["cycle_edges"]) == 2
    assert data["svg"].startswith("<svg")
    values = [p["value"] for p in data["critical_points"]]
    assert values == sorted(values)


def test_analyze_tree_fixture():
    r = client.post("/analyze", json={"field": {"expr": TREE, "resolution": 128}})
    data = r.json()
    assert data["reeb"]["betti1"] == 0
    assert data["has_cycle"] is False
    assert data["cycle_edges"] is None


def test_analyze_parse_error_maps_to_422():
    r = client.post("/analyze", json={"field": {"expr": "cos(", "resolution": 128}})
    assert r.status_code == 422
    body = r.json()
    assert body["error"] == "FieldSyntaxError"
    assert body["exit_code"] == 1


def test_analyze_nonperiodic_rejected():
    r = client.post("/analyze", json={"field": {"expr": "x", "resolution": 128}})
    assert r.status_code == 422
    assert r.json()["error"] == "NotPeriodic"
    assert r.json()["exit_code"] == 1


def test_field_spec_requires_exactly_one_source():
    r = client.post("/analyze", json={"field": {"resolution": 128}})
    assert r.status_code == 422  # pydantic validation


def test_decompose_endpoint():
    r = client.post("/decompose", json={"field": {"expr": FIX2, "resolution": 128}})
    assert r.status_code == 200
    data = r.json()
    assert data["m"] == 4
    assert data["cyclic_index"] == 2
    assert data["orbit"] == [0, 2]


def test_decompose_explicit_level():
    r = client.post("/decompose",
                    json={"field": {"expr": FIX2, "resolution": 128}, "level": 0.1})
    assert r.status_code == 200
    assert r.json()["cyclic_index"] == 2


def test_pi1_endpoint_n2():
    r = client.post("/pi1", json={"field": {"expr": FIX2, "resolution": 128}})
    assert r.status_code == 200
    data = r.json()
    assert data["cyclic_index"] == 2
    assert data["generators"] == ["a_0", "a_1", "t"]
    assert data["eval_table"] == {"a_0": 0, "a_1": 0, "t": 1}
    assert data["krot_table"] == {"a_0": 0, "a_1": 0, "t": 1}
    assert "gens: a_0, a_1, t" in data["presentation_text"]
    assert data["base_source"] == "assumed_abelian_rank_1"


def test_pi1_endpoint_n1_direct_product():
    r = client.post("/pi1", json={"field": {"expr": FIX1, "resolution": 128}})
    data = r.json()
    assert data["cyclic_index"] == 1
    assert data["generators"] == ["a", "t"]
    assert data["relators"] == ["a t a^-1 t^-1"]


def test_pi1_custom_base():
    r = client.post("/pi1", json={
        "field": {"expr": FIX2, "resolution": 128},
        "base_presentation": "gens: u, v\nrels: u v u^-1 v^-1\n",
    })
    data = r.json()
    assert data["base_source"] == "user"
    assert set(data["generators"]) == {"u_0", "v_0", "u_1", "v_1", "t"}


def test_pi1_tree_maps_to_exit3():
    r = client.post("/pi1", json={"field": {"expr": TREE, "resolution": 128}})
    assert r.status_code == 422
    assert r.json()["error"] == "NoCycle"
    assert r.json()["exit_code"] == 3


def test_quotient_endpoint():
    r = client.post("/quotient", json={"field": {"expr": FIX2, "resolution": 128}})
    assert r.status_code == 200
    data = r.json()
    assert data["n"] == 2
    assert data["commutation_error"] <= 1e-9
    assert data["quotient"]["cyclic_index"] == 1
    assert data["quotient_field_file"].startswith("grid: 128")


def test_render_endpoint():
    r = client.post("/render", json={"field": {"expr": FIX1, "resolution": 128}})
    assert r.status_code == 200
    assert r.json()["svg"].startswith("<svg")


def test_verify_endpoint_small():
    r = client.post("/verify", json={"n": 1, "resolution": 128, "frames": 8})
    assert r.status_code == 200
    data = r.json()
    assert data["all_passed"] is True
    names = {c["name"] for c in data["checks"]}
    assert "slide_basis" in names
    assert "quotient_commutation" in names


def test_verify_corrupt_slide_fails():
    r = client.post("/verify",
                    json={"n": 2, "resolution": 128, "frames": 8,
                          "corrupt_slide": True})
    data = r.json()
    assert data["all_passed"] is False
    failed = [c for c in data["checks"] if not c["passed"]]
    assert [c["name"] for c in failed] == ["corrupted_slide_f_invariance"]


def test_grid_payload_roundtrip():
    import numpy as np
    from torusreeb.field import parse_field_expr, sample_grid

    g = sample_grid(parse_field_expr(FIX1), 64)
    rows = [[float(v) for v in g.values[:, j]] for j in range(64)]
    r = client.post("/analyze", json={"field": {"grid": rows}})
    assert r.status_code == 200
    assert len(r.json()["critical_points"]) == 4
