import itertools

from hypothesis import given, settings, strategies as st

from graphdd.benchgen import TopologySpec, gen_random, make_device
from graphdd.graph import bfs_traversal, build_graph, connected_components
from graphdd.schedule import DeviceModel, IdleWindow, extract_idles

from _support import fig2_circuit, line


def win(i, q, a, b):
    return IdleWindow(i, q, a, b)


def brute_edges(idles, device):
    out = set()
    for a, b in itertools.combinations(idles, 2):
        if device.coupled(a.qubit, b.qubit) and min(a.end, b.end) > max(a.start, b.start):
            out.add((min(a.id, b.id), max(a.id, b.id)))
    return out


def test_touching_windows_are_not_joined():
    g = build_graph([win(0, 0, 0, 100), win(1, 1, 100, 200)], line(2))
    assert g.edges == []


def test_uncoupled_qubits_are_not_joined():
    g = build_graph([win(0, 0, 0, 100), win(1, 2, 0, 100)], line(3))
    assert g.edges == []
    assert len(connected_components(g)) == 2


def test_overlap_recorded_on_edge():
    g = build_graph([win(0, 0, 0, 100), win(1, 1, 40, 300)], line(2))
    (e,) = g.edges
    assert (e.node_a, e.node_b, e.overlap_start, e.overlap_end) == (0, 1, 40, 100)
    assert g.edge_between(1, 0) is e
    assert g.edge_between(0, 0) is None


def test_fig2_graph_is_acyclic_with_two_components():
    ws = extract_idles(fig2_circuit())
    g = build_graph(ws, line(4))
    comps = connected_components(g)
    assert len(g.nodes) == 9
    assert len(comps) == 2
    assert g.cycle_rank() == 0
    plan = bfs_traversal(g)
    assert plan.fvs == frozenset()
    assert sorted(plan.order) == list(range(9))


def test_triangle_puts_one_node_in_fvs():
    dev = DeviceModel(3, frozenset({(0, 1), (1, 2), (0, 2)}))
    ws = [win(0, 0, 0, 100), win(1, 1, 10, 100), win(2, 2, 20, 100)]
    g = build_graph(ws, dev)
    assert g.cycle_rank() == 1
    plan = bfs_traversal(g)
    assert plan.order == (0, 1, 2)
    assert plan.fvs == {2}
    assert plan.parent == {0: None, 1: 0, 2: None}


def test_bfs_roots_at_earliest_window_per_component():
    ws = [win(0, 0, 50, 100), win(1, 1, 0, 80), win(2, 3, 500, 600)]
    plan = bfs_traversal(build_graph(ws, line(4)))
    assert plan.order == (1, 0, 2)
    assert plan.parent == {1: None, 0: 1, 2: None}


def test_to_dict_shape():
    g = build_graph([win(0, 0, 0, 100), win(1, 1, 40, 300)], line(2))
    d = g.to_dict()
    assert d["edges"] == [[0, 1]]
    assert d["nodes"][1] == {"id": 1, "qubit": 1, "start": 40, "end": 300}


@settings(max_examples=60, deadline=None)
@given(width=st.integers(2, 9), depth=st.integers(1, 25), seed=st.integers(0, 5000), ring=st.booleans())
def test_graph_matches_brute_force_and_traversal_is_valid(width, depth, seed, ring):
    dev = make_device(TopologySpec("ring" if ring else "line", width))
    ws = extract_idles(gen_random(width, depth, seed, dev))
    g = build_graph(ws, dev)
    assert {(e.node_a, e.node_b) for e in g.edges} == brute_edges(ws, dev)

    plan = bfs_traversal(g)
    assert sorted(plan.order) == sorted(g.nodes)
    seen = set()
    for n in plan.order:
        earlier = [m for m in g.neighbors(n) if m in seen and m not in plan.fvs]
        if n in plan.fvs:
            assert plan.parent[n] is None
        else:
            # every kept node has at most one embedded neighbour: its parent
            assert len(earlier) <= 1
            assert plan.parent[n] == (earlier[0] if earlier else None)
        seen.add(n)
    # the kept nodes form a forest
    kept = [n for n in g.nodes if n not in plan.fvs]
    kept_edges = [e for e in g.edges if e.node_a not in plan.fvs and e.node_b not in plan.fvs]
    parent = {n: n for n in kept}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in kept_edges:
        ra, rb = find(e.node_a), find(e.node_b)
        assert ra != rb
        parent[ra] = rb
