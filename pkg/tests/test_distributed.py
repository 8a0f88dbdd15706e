import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import instance
from fairdiv.distributed import (
    MessageLedger,
    PartitionError,
    by_hash,
    compose,
    from_mapping,
    local_coreset,
    round_robin,
    two_round_solve,
)
from fairdiv.euclidean.coreset import coreset_size
from fairdiv.fixtures import fix_a
from fairdiv.oracle import brute_force_opt


def test_partitioners():
    assert round_robin(5, 2) == [[0, 2, 4], [1, 3]]
    ds, _ = fix_a()
    parts = by_hash(ds.ids, 3)
    assert sorted(i for p in parts for i in p) == list(range(5))
    assert parts == by_hash(ds.ids, 3)
    assert from_mapping(ds, {"a0": 5, "b1": 1, "a4": 1, "b7": 5, "a10": 1}) == [[1, 2, 4], [0, 3]]
    with pytest.raises(PartitionError, match="no site"):
        from_mapping(ds, {"a0": 0})
    with pytest.raises(PartitionError):
        round_robin(5, 0)


def test_local_coreset_and_cover_radius():
    ds, spec = instance(2, 40, 2)
    lc = local_coreset(ds, list(range(20)), spec, 0.5, 2)
    size = coreset_size(spec.k, 0.5, 2)
    for g, o in enumerate(lc.orderings):
        assert len(o) == min(size, lc.group_sizes[g])
        assert lc.cover_radius(g) == 0.0  # tiny groups are kept whole
    lc1 = local_coreset(ds, list(range(40)), spec, 1.0, 1)
    g0 = lc1.orderings[0]
    if len(g0) < lc1.group_sizes[0]:
        assert lc1.cover_radius(0) == g0.radii[-1]


def test_compose_rejects_overlap():
    ds, spec = instance(4, 12, 2)
    a = local_coreset(ds, [0, 1, 2, 3, 4, 5], spec, 0.5, 2, site=0)
    b = local_coreset(ds, [5, 6, 7, 8, 9, 10, 11], spec, 0.5, 2, site=1)
    with pytest.raises(PartitionError, match="point 5"):
        compose([a, b], spec, 0.5, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_union_keeps_a_good_solution(seed, sites):
    ds, spec = instance(seed, 20, 2)
    owner = np.random.default_rng(seed).integers(sites, size=ds.n)
    parts = [np.flatnonzero(owner == j).tolist() for j in range(sites)]
    parts = [p for p in parts if p]
    locals_ = [local_coreset(ds, p, spec, 0.5, 2, site=j) for j, p in enumerate(parts)]
    union = compose(locals_, spec, 0.5, 2)
    assert len(union) <= union.bound
    opt = brute_force_opt(ds, spec).diversity
    assert brute_force_opt(ds.subset(union.points()), spec).diversity >= opt / 1.5


def test_two_round_solvers():
    ds, spec = instance(9, 30, 2)
    opt = brute_force_opt(ds, spec).diversity
    parts = round_robin(ds.n, 3)
    sol = two_round_solve(ds, parts, spec, final_solver="brute")
    assert sol.algorithm_tag == "distributed-brute"
    assert sol.group_counts == spec.quotas and sol.diversity >= opt / 1.5
    assert sol.info["sites"] == 3
    assert sol.info["point_records_sent"] == sol.info["union_size"]
    assert len(sol.info["messages"]) == 3
    fe = two_round_solve(ds, parts, spec, final_solver="fair_euclidean", rng=np.random.default_rng(0))
    assert fe.meets(spec.scaled_targets(0.5))
    with pytest.warns(UserWarning):
        lp = two_round_solve(ds, parts, spec, final_solver="lp6", rng=np.random.default_rng(0))
    assert lp.diversity >= lp.gamma_used / 6
    with pytest.raises(PartitionError, match="overlap"):
        two_round_solve(ds, [[0, 1], [1, *range(2, 30)]], spec)
    with pytest.raises(PartitionError, match="cover"):
        two_round_solve(ds, [[0, 1]], spec)
    with pytest.raises(ValueError):
        two_round_solve(ds, parts, spec, final_solver="other")


def test_message_ledger():
    led = MessageLedger()
    led.send(0, 4)
    led.send(1, 3)
    assert led.total_records == 7
    assert led.messages[0] == {"from": 0, "to": "coordinator", "point_records": 4}
