import pytest
from hypothesis import given, strategies as st

from wansync.overlay import (DelayView, GraphError, LinkSpec, OverlayGraph, build_graph,
                             delay_view, graph_to_spec, throughput_at)

from conftest import connected_graphs


def tri_spec():
    return {"nodes": ["a", "b", "c"],
            "links": [{"ends": ["a", "b"], "rate": 1.0}, {"ends": ["b", "c"], "rate": 1.0},
                      {"ends": ["a", "c"], "rate": 0.5}]}


def test_build_triangle():
    g = build_graph(tri_spec())
    assert g.node_count == 3 and len(g.links) == 3
    assert g.name(2) == "c"
    assert g.is_connected()


def test_zero_rate_rejected_with_entry_name():
    spec = tri_spec()
    spec["links"][2]["rate"] = 0
    with pytest.raises(GraphError, match=r"links\[2\].*non-positive throughput"):
        build_graph(spec)


@pytest.mark.parametrize("mutate, message", [
    (lambda s: s["links"].append({"ends": ["b", "a"], "rate": 2.0}), "duplicate link"),
    (lambda s: s["links"].append({"ends": ["a", "zz"], "rate": 2.0}), "dangling"),
    (lambda s: s["links"][0].update(colour="red"), "unknown key"),
    (lambda s: s["links"][0].update(delay=3.0), "exactly one of"),
    (lambda s: s["links"][0].update(rate=-1.0), "non-positive"),
    (lambda s: s["links"].append({"ends": ["a", "a"], "rate": 1.0}), "endpoints must differ"),
])
def test_build_graph_rejects(mutate, message):
    spec = tri_spec()
    mutate(spec)
    with pytest.raises(GraphError, match=message):
        build_graph(spec)


def test_schedule_validation():
    with pytest.raises(GraphError, match="start at time 0"):
        LinkSpec(0, 1, ((1.0, 2.0),))
    with pytest.raises(GraphError, match="strictly increase"):
        LinkSpec(0, 1, ((0.0, 2.0), (5.0, 1.0), (5.0, 3.0)))
    with pytest.raises(GraphError, match="loss"):
        LinkSpec(0, 1, ((0.0, 2.0),), loss_rate=1.0)


def test_piecewise_lookup_is_left_closed():
    g = build_graph({"nodes": 2, "links": [{"ends": [0, 1], "schedule": [[0, 4], [180, 2]]}]})
    assert throughput_at(g, (0, 1), 0) == 4
    assert throughput_at(g, (1, 0), 179.999) == 4
    assert throughput_at(g, (0, 1), 180) == 2
    assert delay_view(g, 200)[0, 1] == 0.5
    const = build_graph({"nodes": 2, "links": [{"ends": [0, 1], "rate": 4}]})
    assert throughput_at(const, (0, 1), 1e6) == 4


def test_triangle_delay_view():
    d = delay_view(build_graph(tri_spec()), 0)
    assert dict(d) == {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 2.0}
    assert d[2, 0] == 2.0
    assert throughput_at(build_graph(tri_spec()), (0, 2), 0) == 0.5


def test_unknown_link_and_negative_time():
    g = build_graph(tri_spec())
    with pytest.raises(GraphError):
        throughput_at(g, (0, 5), 0)
    with pytest.raises(GraphError):
        delay_view(g, -1)


def test_delay_view_rejects_nonpositive():
    with pytest.raises(GraphError):
        DelayView({(0, 1): 0.0})


def test_bundled_internet2_rates_in_range(internet2):
    g = internet2.graph
    assert g.node_count == 9 and g.is_connected()
    mbps = 1e6 / 8 / 4
    for link in g.links:
        for _, rate in link.schedule:
            assert 20 * mbps - 1 <= rate <= 155 * mbps + 1


def test_components_reported():
    g = OverlayGraph(4, (LinkSpec(0, 1, ((0.0, 1.0),)), LinkSpec(2, 3, ((0.0, 1.0),))))
    assert not g.is_connected()
    assert g.components() == [[0, 1], [2, 3]]


@given(connected_graphs(), st.floats(0, 1e4))
def test_delay_is_reciprocal_of_throughput(g, t):
    d = delay_view(g, t)
    for e in g.edges():
        assert d[e] == 1 / throughput_at(g, e, t)
        assert d[e] > 0


@given(connected_graphs())
def test_spec_round_trip(g):
    again = build_graph(graph_to_spec(g))
    assert again == g
