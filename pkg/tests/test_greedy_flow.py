import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import instance
from fairdiv.core import FairnessSpec
from fairdiv.fixtures import fix_a, fix_tight
from fairdiv.greedy_flow import (
    FlowNetwork,
    build_clusters,
    build_network,
    fair_greedy_flow,
    fair_greedy_flow_search,
    max_flow,
)
from fairdiv.oracle import brute_force_opt


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_max_flow_matches_networkx(data):
    n = data.draw(st.integers(2, 9))
    edges = data.draw(
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(0, 5)), max_size=25)
    )
    net = FlowNetwork(n, 0, n - 1)
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    for u, v, c in edges:
        if u == v:
            continue
        net.add_arc(u, v, c)
        if g.has_edge(u, v):
            g[u][v]["capacity"] += c
        else:
            g.add_edge(u, v, capacity=c)
    res = max_flow(net)
    assert res.value == nx.maximum_flow_value(g, 0, n - 1)
    # conservation and capacity on our own flow
    bal = np.zeros(n, dtype=int)
    for (u, v, c), f in zip(net.arcs, res.flow):
        assert 0 <= f <= c
        bal[u] -= f
        bal[v] += f
    assert bal[n - 1] == res.value and bal[0] == -res.value
    assert not bal[1 : n - 1].any()


def test_tight_example_clusters():
    ds, spec = fix_tight()
    fam = build_clusters(ds, spec, 1.0)
    assert fam.trace(ds) == ["p1 p2", "p3", "p4"]
    sol = fair_greedy_flow(ds, spec, 1.0, family=fam)
    assert sol.diversity == 1.0
    assert sol.group_counts == spec.quotas
    assert sol.info == {"clusters": 3, "flow": 3}


def test_network_layout():
    ds, spec = fix_tight()
    fam = build_clusters(ds, spec, 1.0)
    net, links = build_network(fam, spec)
    assert net.n_nodes == 2 + spec.m + len(fam)
    assert sorted(links.values()) == [(0, 0), (1, 0), (1, 1), (1, 2)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.floats(0.5, 30.0))
def test_clusters_respect_the_rules(seed, gamma):
    ds, spec = instance(seed, 20, 3, matrix=seed % 2 == 0)
    fam = build_clusters(ds, spec, gamma)
    thr = gamma / (ds.m + 1)
    seen = set()
    for cl, roster in zip(fam.clusters, fam.rosters):
        assert not seen & set(cl)
        seen |= set(cl)
        assert sorted(roster.values()) == sorted(cl)
        assert len({int(ds.groups[p]) for p in cl}) == len(cl)
    assert len(fam) <= spec.k * ds.m + 1
    # representatives of different clusters are at least the threshold apart
    pts = [p for cl in fam.clusters for p in cl]
    owner = {p: j for j, cl in enumerate(fam.clusters) for p in cl}
    for a in pts:
        for b in pts:
            if owner[a] != owner[b]:
                assert ds.matrix[a, b] >= thr
    sol = fair_greedy_flow(ds, spec, gamma, family=fam)
    if sol is not None:
        assert sol.group_counts == spec.quotas
        assert sol.diversity >= thr


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_search_is_within_factor(seed):
    ds, spec = instance(seed, 14, 2, matrix=seed % 2 == 1)
    opt = brute_force_opt(ds, spec).diversity
    sol = fair_greedy_flow_search(ds, spec, eps=0.01)
    assert sol.group_counts == spec.quotas
    assert sol.diversity >= opt / (3 * 1.01)


def test_binary_mode_and_edge_cases():
    ds, spec = fix_a()
    assert fair_greedy_flow_search(ds, spec, mode="binary").group_counts == spec.quotas
    fb = fair_greedy_flow_search(ds, FairnessSpec((1, 0)))
    assert fb.info["fallback"]
    with pytest.raises(ValueError):
        fair_greedy_flow_search(ds, spec, eps=0)
    with pytest.raises(ValueError):
        build_clusters(ds, spec, 0.0)
