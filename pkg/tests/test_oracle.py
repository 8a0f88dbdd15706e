import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairdiv.core import Dataset, FairnessSpec, Solution, diversity
from fairdiv.fixtures import fix_a, fix_b, fix_tight
from fairdiv.oracle import OracleBudgetError, brute_force_opt, search_space_size, verify


def naive_opt(ds: Dataset, spec: FairnessSpec) -> tuple[float, tuple[int, ...]]:
    """Enumerate every quota-exact set; best diversity, ties to the smallest sorted tuple."""
    per_group = [itertools.combinations(m, k) for m, k in zip(ds.members, spec.quotas)]
    best = None
    for combo in itertools.product(*per_group):
        sel = tuple(sorted(i for part in combo for i in part))
        key = (-diversity(ds, sel), sel)
        if best is None or key < best:
            best = key
    return -best[0], best[1]


@st.composite
def small_instances(draw):
    n = draw(st.integers(2, 9))
    m = draw(st.integers(1, 3))
    pts = draw(st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)), min_size=n, max_size=n))
    labels = [f"g{i % m}" for i in range(n)]
    ds = Dataset.from_coords(np.array(pts, dtype=float), labels)
    quotas = tuple(draw(st.integers(0, min(3, s))) for s in ds.group_sizes())
    return ds, FairnessSpec(quotas)


@settings(max_examples=150, deadline=None)
@given(small_instances())
def test_matches_exhaustive_enumeration(inst):
    ds, spec = inst
    sol = brute_force_opt(ds, spec)
    want_div, want_sel = naive_opt(ds, spec)
    assert sol.diversity == want_div
    assert sol.group_counts == spec.quotas
    assert sol.selected == want_sel


def test_fixture_optima():
    ds, spec = fix_a()
    sol = brute_force_opt(ds, spec)
    assert sol.diversity == 3.0
    # three optimal sets exist; the lowest-index one is reported
    assert sol.selected == (0, 2, 3)
    assert brute_force_opt(*fix_b()).diversity == 5.0
    tight = brute_force_opt(*fix_tight())
    assert tight.diversity == 1.0
    assert tight.ids(fix_tight()[0]) == ["p1", "p3", "p4"]


def test_budget_guard():
    ds = Dataset.from_coords(np.arange(30.0), ["g"] * 30)
    spec = FairnessSpec((10,))
    assert search_space_size(ds, spec) == math.comb(30, 10)
    with pytest.raises(OracleBudgetError):
        brute_force_opt(ds, spec, budget=1000)


def test_coincident_points_give_zero():
    ds = Dataset.from_coords(np.zeros(4), ["a", "a", "b", "b"])
    sol = brute_force_opt(ds, FairnessSpec((1, 1)))
    assert sol.diversity == 0.0 and sol.group_counts == (1, 1)


def test_verify_verdicts():
    ds, spec = fix_a()
    good = Solution.build(ds, [0, 2, 3])
    assert verify(ds, spec, good).passed
    weak = Solution.build(ds, [0, 1, 2])
    v = verify(ds, spec, weak, alpha=3.0)
    assert v.passed and v.ratio == 3.0
    assert not verify(ds, spec, weak, alpha=2.9).diversity_ok
    short = Solution.build(ds, [0, 4])
    v = verify(ds, spec, short, alpha=1.0, beta=0.5)
    assert v.required_counts == (1, 1)
    assert v.diversity_ok and not v.fairness_ok
    with pytest.raises(ValueError):
        verify(ds, spec, good, alpha=0.5)
    with pytest.raises(ValueError):
        verify(ds, spec, good, beta=0.0)
