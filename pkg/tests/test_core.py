import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairdiv.core import (
    Ball,
    Dataset,
    FairnessSpec,
    InfeasibleError,
    MetricError,
    Solution,
    ball_members,
    better,
    check_feasible,
    derive_rng,
    distance,
    diversity,
    euclidean_block,
    fallback_solution,
    matrix_issues,
    triangle_violation,
    trim_to_quotas,
    validate,
)
from fairdiv.fixtures import fix_a, fix_tight

coords_st = st.lists(
    st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=2, max_size=12
).map(lambda pts: np.array(pts, dtype=float))


def test_diversity_of_small_sets_is_infinite():
    ds, _ = fix_a()
    assert diversity(ds, []) == math.inf
    assert diversity(ds, [3]) == math.inf
    assert diversity(ds, [0, 1]) == 1.0


def test_fix_a_distances():
    ds, spec = fix_a()
    assert ds.ids == ("a0", "b1", "a4", "b7", "a10")
    assert ds.group_names == ("a", "b")
    assert spec.quotas == (2, 1)
    assert distance(ds, 0, 4) == 10.0
    with pytest.raises(IndexError):
        distance(ds, 0, 5)


@given(coords_st)
def test_matrix_is_a_metric(coords):
    ds = Dataset.from_coords(coords, ["g"] * len(coords))
    mat = ds.matrix
    assert np.array_equal(mat, mat.T)
    assert np.all(np.diag(mat) == 0)
    assert matrix_issues(mat) == []


@given(coords_st, st.data())
def test_subset_reuses_parent_distances(coords, data):
    ds = Dataset.from_coords(coords, ["g"] * len(coords))
    idx = data.draw(st.lists(st.integers(0, len(coords) - 1), min_size=2, unique=True))
    sub = ds.subset(idx)
    assert sub.parent_index == tuple(idx)
    for a, i in enumerate(idx):
        for b, j in enumerate(idx):
            assert sub.matrix[a, b] == ds.matrix[i, j]


def test_euclidean_block_matches_norm():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(5, 3)), rng.normal(size=(4, 3))
    got = euclidean_block(a, b)
    want = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    np.testing.assert_allclose(got, want, rtol=1e-12)


def test_matrix_checks_name_the_cell():
    good = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    assert matrix_issues(good) == []
    asym = good.copy()
    asym[0, 1] = 1.5
    assert "asymmetric" in matrix_issues(asym)[0]
    diag = good.copy()
    diag[1, 1] = 0.1
    assert "diagonal" in matrix_issues(diag)[0]
    tri = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    assert triangle_violation(tri) is not None
    with pytest.raises(MetricError):
        Dataset.from_matrix(tri, ["a", "a", "b"])


def test_balls_are_open():
    ds, _ = fix_a()
    assert Ball(0, 4.0).members(ds) == [0, 1]
    assert not Ball(0, 4.0).contains(ds, 2)
    assert ball_members(ds, 0, 4.0001) == [0, 1, 2]
    with pytest.raises(ValueError):
        ball_members(ds, 0, 0.0)


def test_spec_mapping_and_feasibility():
    ds, _ = fix_a()
    with pytest.raises(ValueError, match="missing quota"):
        FairnessSpec.from_mapping(ds, {"a": 1})
    with pytest.raises(ValueError, match="unknown"):
        FairnessSpec.from_mapping(ds, {"a": 1, "b": 1, "c": 1})
    with pytest.raises(ValueError):
        FairnessSpec((-1, 2))
    with pytest.raises(InfeasibleError, match="group b: 3 > 2"):
        check_feasible(ds, FairnessSpec((1, 3)))
    assert FairnessSpec((40, 3)).scaled_targets(0.5) == (20, 2)


def test_validate_collects_all_issues():
    ds, _ = fix_a()
    report = validate(ds, FairnessSpec((4, 3)))
    assert not report.ok
    assert len(report.issues) == 2
    assert validate(ds, FairnessSpec((0, 0))).issues == ["total quota k must be at least 1"]
    assert validate(*fix_tight()).ok


def test_solution_build_recomputes():
    ds, _ = fix_a()
    sol = Solution.build(ds, [3, 0, 2, 0], gamma=2.5, tag="x")
    assert sol.selected == (0, 2, 3)
    assert sol.diversity == 3.0
    assert sol.group_counts == (2, 1)
    assert sol.ids(ds) == ["a0", "a4", "b7"]


def test_better_prefers_diversity_then_lex():
    ds, _ = fix_a()
    s1 = Solution.build(ds, [0, 3, 4])
    s2 = Solution.build(ds, [0, 2, 3])
    s3 = Solution.build(ds, [0, 1, 2])
    assert better(s1, s2) is s2
    assert better(s3, s1) is s1
    assert better(None, s3) is s3


def test_trim_and_fallback():
    ds, spec = fix_a()
    assert trim_to_quotas(ds, [4, 0, 1, 2, 3], (2, 1)) == [4, 0, 1]
    fb = fallback_solution(ds, spec, "t")
    assert fb.selected == (0, 1, 2)
    assert fb.info["fallback"] and fb.gamma_used == 0.0


def test_derive_rng_streams():
    a = derive_rng(7, "lp6", 1).random(3)
    assert np.array_equal(a, derive_rng(7, "lp6", 1).random(3))
    assert not np.array_equal(a, derive_rng(7, "lp6", 2).random(3))
    assert not np.array_equal(a, derive_rng(8, "lp6", 1).random(3))


@settings(max_examples=50)
@given(coords_st, st.data())
def test_diversity_is_min_pair(coords, data):
    ds = Dataset.from_coords(coords, ["g"] * len(coords))
    idx = data.draw(st.lists(st.integers(0, len(coords) - 1), min_size=2, unique=True))
    want = min(float(np.linalg.norm(coords[i] - coords[j])) for i in idx for j in idx if i < j)
    assert math.isclose(diversity(ds, idx), want, rel_tol=1e-12, abs_tol=1e-12)
