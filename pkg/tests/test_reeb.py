import json

import pytest

from torusreeb.errors import NoCrossing
from torusreeb.field import parse_field_expr, sample_grid
from torusreeb.reeb import build_reeb_graph, find_cycle, reeb_to_json
from torusreeb.svg import render_reeb_svg


def fixture_field(n, eps=0.5, res=256):
    return sample_grid(parse_field_expr(f"cos(2*pi*{n}*x)+{eps}*cos(2*pi*y)"), res)


def tree_field(res=256):
    return sample_grid(parse_field_expr("cos(2*pi*x)*cos(2*pi*y)"), res)


@pytest.fixture(scope="module")
def g1():
    return build_reeb_graph(fixture_field(1))


@pytest.fixture(scope="module")
def g2():
    return build_reeb_graph(fixture_field(2))


@pytest.fixture(scope="module")
def gtree():
    return build_reeb_graph(tree_field())


def test_n1_graph_shape(g1):
    assert len(g1.vertices) == 4
    assert len(g1.edges) == 4
    assert g1.betti1 == 1
    assert sorted(v.degree for v in g1.vertices) == [1, 1, 3, 3]
    # vertices come out in increasing value order
    vals = [v.value for v in g1.vertices]
    assert vals == sorted(vals)


def test_n2_graph_shape(g2):
    assert len(g2.vertices) == 8
    assert len(g2.edges) == 8
    assert g2.betti1 == 1
    assert sorted(v.degree for v in g2.vertices) == [1, 1, 1, 1, 3, 3, 3, 3]


def test_tree_fixture(gtree):
    assert gtree.betti1 == 0
    assert find_cycle(gtree) is None
    # one shared-value saddle component of degree 4
    assert sorted(v.degree for v in gtree.vertices) == [1, 1, 1, 1, 4]
    assert len([v for v in gtree.vertices if len(v.points) == 4]) == 1


def test_cycle_lengths(g1, g2):
    assert len(find_cycle(g1).edge_ids) == 2
    assert len(find_cycle(g2).edge_ids) == 4


def test_cycle_edges_are_exactly_the_nonseparating_ones(g1, g2, gtree):
    for g in (g1, g2, gtree):
        cyc = find_cycle(g)
        on_cycle = set(cyc.edge_ids) if cyc else set()
        for e in g.edges:
            assert (e.id in on_cycle) == (e.homology != (0, 0))


def test_edge_intervals_exclude_critical_values(g1, g2):
    for g in (g1, g2):
        crit_vals = {v.value for v in g.vertices}
        for e in g.edges:
            assert e.vmin < e.vmax
            for w in crit_vals:
                assert not (e.vmin + 1e-12 < w < e.vmax - 1e-12)


def test_saddles_connect_monotone(g2):
    for e in g2.edges:
        assert g2.vertices[e.u].value < g2.vertices[e.v].value


def test_representative_curve_level_inside_interval(g2):
    for e in g2.edges:
        assert e.vmin < e.curve.level < e.vmax


def test_json_deterministic():
    a = json.dumps(reeb_to_json(build_reeb_graph(fixture_field(1, res=128))), sort_keys=True)
    b = json.dumps(reeb_to_json(build_reeb_graph(fixture_field(1, res=128))), sort_keys=True)
    assert a == b


def test_json_shape(g1):
    d = reeb_to_json(g1)
    assert d["schema"] == 1
    assert d["betti1"] == 1
    assert {v["id"] for v in d["vertices"]} == {0, 1, 2, 3}
    points = [p for v in d["vertices"] for p in v["points"]]
    assert len(points) == 4
    assert all(set(p) == {"x", "y", "value", "index"} for p in points)


def test_svg_renders(g2):
    svg = render_reeb_svg(g2)
    assert svg.startswith("<svg")
    assert svg.count("<circle") == 8
    assert "betti1=1" in svg


def test_no_crossing_guard_still_works():
    with pytest.raises(NoCrossing):
        from torusreeb.morse import trace_level_component
        trace_level_component(fixture_field(1, res=128), 1.9, (0, 0))
