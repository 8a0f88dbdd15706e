import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import instance
from fairdiv.core import FairDivError, FairnessSpec, diversity
from fairdiv.fixtures import fix_a, fix_tight
from fairdiv.guessing import dataset_range
from fairdiv.oracle import brute_force_opt
from fairdiv.streaming import (
    OnceStream,
    StreamContext,
    StreamReusedError,
    fair_stream_euclidean,
    fair_stream_gen,
    fair_stream_two_groups,
    stream_order,
    tau_gmm,
    tau_gmm_stream,
    two_group_candidate,
)


def test_once_stream():
    s = OnceStream(range(3))
    assert list(s) == [0, 1, 2] and s.consumed == 3
    with pytest.raises(StreamReusedError):
        list(s)


def test_stream_order():
    ds, _ = fix_a()
    assert stream_order(ds) == [0, 1, 2, 3, 4]
    shuffled = stream_order(ds, 4)
    assert sorted(shuffled) == [0, 1, 2, 3, 4]
    assert shuffled == stream_order(ds, 4)


def test_context_counters():
    ctx = StreamContext(1.0, 10.0, 0.5)
    assert ctx.guesses[0] == 1.0 and ctx.guesses[-1] == 10.0
    g = ctx.guesses[1]
    ctx.hold(g)
    ctx.hold(g)
    ctx.hold(ctx.guesses[0])
    assert ctx.report() == {"guesses": len(ctx.guesses), "peak_memory_points": 3, "peak_per_guess": 2}
    with pytest.raises(ValueError):
        StreamContext(0.0, 1.0, 0.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.2, 10.0), st.integers(1, 8))
def test_tau_gmm_is_separated_and_maximal(seed, tau, cap):
    ds, _ = instance(seed, 20, 1)
    held = tau_gmm(ds, range(ds.n), tau, cap)
    assert len(held) <= cap
    assert diversity(ds, held) >= tau
    if len(held) < cap:
        # every skipped point is within tau of an admitted one
        for p in range(ds.n):
            assert p in held or min(ds.matrix[p, q] for q in held) < tau


def test_tau_gmm_stream_per_group():
    ds, _ = fix_a()
    held = tau_gmm_stream(ds, range(ds.n), 5.0, [3, 3])
    assert held == [[0, 4], [1, 3]]
    with pytest.raises(ValueError):
        tau_gmm(ds, [], 0.0, 1)


def test_two_groups_on_fix_a():
    ds, spec = fix_a()
    lo, hi = dataset_range(ds)
    sol = fair_stream_two_groups(ds, OnceStream(range(ds.n)), spec, lo, hi, eps=0.1)
    assert sol.group_counts == spec.quotas
    assert sol.diversity >= 3.0 / 4.4
    assert sol.info["peak_per_guess"] <= 3 * spec.k
    three, spec3 = instance(0, 9, 3)
    with pytest.raises(ValueError):
        fair_stream_two_groups(three, OnceStream(range(9)), spec3, 1.0, 2.0)


def test_two_group_candidate_repair():
    ds, spec = fix_a()
    # stream kept only group-b points; group a must be filled from its own set
    cand = two_group_candidate(ds, spec, 4.0, [1, 3], ([0, 2, 4], [1, 3]))
    assert cand is not None
    assert sorted(int(ds.groups[p]) for p in cand) == [0, 0, 1]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_two_groups_factor(seed):
    ds, spec = instance(seed, 30, 2)
    opt = brute_force_opt(ds, spec).diversity
    lo, hi = dataset_range(ds)
    sol = fair_stream_two_groups(ds, OnceStream(stream_order(ds, seed)), spec, lo, hi, eps=0.1)
    assert sol.group_counts == spec.quotas
    assert sol.diversity >= opt / 4.4


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_stream_gen_memory_and_separation(seed):
    ds, spec = instance(seed, 30, 3, matrix=seed % 2 == 0)
    lo, hi = dataset_range(ds)
    with pytest.warns(UserWarning):
        sol = fair_stream_gen(ds, OnceStream(range(ds.n)), spec, lo, hi, rng=np.random.default_rng(seed))
    assert sol.info["peak_memory_points"] <= spec.k * spec.m * sol.info["guesses"]
    assert sol.info["pool_size"] <= ds.n
    assert sol.diversity >= sol.gamma_used / 6


def test_stream_euclidean():
    ds, spec = instance(5, 25, 2)
    lo, hi = dataset_range(ds)
    sol = fair_stream_euclidean(ds, OnceStream(range(ds.n)), spec, lo, hi, rng=np.random.default_rng(0))
    assert sol.meets(spec.scaled_targets(0.5))
    assert sol.diversity >= brute_force_opt(ds, spec).diversity / 1.5
    with pytest.raises(ValueError):
        tight, tspec = fix_tight()
        fair_stream_euclidean(tight, OnceStream(range(4)), tspec, 0.2, 1.0)


def test_bad_bounds_raise():
    ds, spec = fix_a()
    with pytest.raises(FairDivError):
        # every guess is far above the largest distance, so no guess can fill the quotas
        fair_stream_two_groups(ds, OnceStream(range(ds.n)), FairnessSpec((3, 2)), 100.0, 200.0)
