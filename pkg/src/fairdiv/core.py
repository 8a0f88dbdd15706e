"""Metric-space primitives shared by every solver.

A :class:`Dataset` owns the points, their group labels and a dense distance
matrix.  All algorithms read distances from that one matrix, so values that
are compared across modules (an oracle optimum against a heuristic result,
say) come from identical arithmetic and can be compared exactly.
"""

from __future__ import annotations

import math
import warnings
import zlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

INF = math.inf
TRIANGLE_TOL = 1e-9
TRIANGLE_CHECK_MAX_N = 2000


class FairDivError(Exception):
    """Base class for errors raised by this package."""


class MetricError(FairDivError, ValueError):
    """The supplied distances do not form a (pseudo)metric."""


class InfeasibleError(FairDivError):
    """No selection can satisfy the requested quotas."""


def euclidean_block(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances between every row of ``a`` and every row of ``b``.

    Every Euclidean distance in the package is produced here so the same
    pair always yields the same float.
    """
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _ordered_labels(labels: Sequence[Any]) -> list[str]:
    names = [str(x) for x in labels]
    seen: dict[str, None] = dict.fromkeys(names)
    uniq = list(seen)
    try:
        return sorted(uniq, key=lambda s: int(s))
    except ValueError:
        return uniq


class Dataset:
    """Points with group labels under either a Euclidean or an explicit metric.

    Groups are stored as integers ``0..m-1``; ``group_names`` keeps the labels
    read from input files.  Instances are treated as immutable.
    """

    def __init__(
        self,
        ids: Sequence[str],
        groups: Sequence[Any],
        *,
        coords: np.ndarray | None = None,
        matrix: np.ndarray | None = None,
        group_names: Sequence[str] | None = None,
        validate: bool = True,
    ) -> None:
        if (coords is None) == (matrix is None):
            raise ValueError("exactly one of coords or matrix must be given")
        self.ids: tuple[str, ...] = tuple(str(i) for i in ids)
        n = len(self.ids)
        if len(set(self.ids)) != n:
            raise ValueError("point ids must be unique")
        if len(groups) != n:
            raise ValueError(f"expected {n} group labels, got {len(groups)}")
        labels = [str(g) for g in groups]
        names = list(group_names) if group_names is not None else _ordered_labels(labels)
        index = {name: i for i, name in enumerate(names)}
        unknown = sorted(set(labels) - set(index))
        if unknown:
            raise ValueError(f"group labels not in group_names: {unknown}")
        self.group_names: tuple[str, ...] = tuple(names)
        self.groups = np.array([index[g] for g in labels], dtype=np.int64)
        self.groups.setflags(write=False)

        self.coords: np.ndarray | None = None
        self._matrix: np.ndarray | None = None
        self.parent_index: tuple[int, ...] | None = None
        if coords is not None:
            c = np.asarray(coords, dtype=np.float64)
            if c.ndim == 1:
                c = c[:, None]
            if c.ndim != 2 or c.shape[0] != n or c.shape[1] < 1:
                raise ValueError("coords must have shape (n, D) with D >= 1")
            if not np.all(np.isfinite(c)):
                raise ValueError("coords must be finite")
            c = c.copy()
            c.setflags(write=False)
            self.coords = c
        else:
            mat = np.array(matrix, dtype=np.float64)
            if mat.shape != (n, n):
                raise ValueError(f"matrix must be {n}x{n}, got {mat.shape}")
            if validate:
                check_matrix(mat)
            mat.setflags(write=False)
            self._matrix = mat

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_coords(cls, coords, groups, ids=None, group_names=None) -> "Dataset":
        coords = np.asarray(coords, dtype=np.float64)
        if ids is None:
            ids = [f"p{i}" for i in range(len(coords))]
        return cls(ids, groups, coords=coords, group_names=group_names)

    @classmethod
    def from_matrix(cls, matrix, groups, ids=None, group_names=None, validate=True) -> "Dataset":
        n = len(groups)
        if ids is None:
            ids = [f"p{i + 1}" for i in range(n)]
        return cls(ids, groups, matrix=matrix, group_names=group_names, validate=validate)

    # -- basic properties -----------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def m(self) -> int:
        return len(self.group_names)

    @property
    def is_euclidean(self) -> bool:
        return self.coords is not None

    @property
    def dim(self) -> int | None:
        return None if self.coords is None else self.coords.shape[1]

    @cached_property
    def matrix(self) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix
        assert self.coords is not None
        mat = euclidean_block(self.coords, self.coords)
        mat.setflags(write=False)
        return mat

    @cached_property
    def dlist(self) -> list[list[float]]:
        """Row-major Python copy of the matrix, for tight scalar loops."""
        return self.matrix.tolist()

    @cached_property
    def members(self) -> tuple[tuple[int, ...], ...]:
        """Point indices of each group, ascending."""
        out: list[list[int]] = [[] for _ in range(self.m)]
        for i, g in enumerate(self.groups.tolist()):
            out[g].append(i)
        return tuple(tuple(x) for x in out)

    def group_sizes(self) -> list[int]:
        return [len(x) for x in self.members]

    def index_of(self, point_id: str) -> int:
        try:
            return self._id_index[point_id]
        except KeyError:
            raise KeyError(f"unknown point id {point_id!r}") from None

    @cached_property
    def _id_index(self) -> dict[str, int]:
        return {pid: i for i, pid in enumerate(self.ids)}

    def group_index(self, label: str) -> int:
        try:
            return self.group_names.index(str(label))
        except ValueError:
            raise KeyError(f"unknown group {label!r}") from None

    def subset(self, indices: Iterable[int]) -> "Dataset":
        """Restriction to ``indices`` (kept in the given order).

        The sub-dataset reuses this dataset's distance values and remembers
        the parent indices in ``parent_index``.
        """
        idx = np.asarray(list(indices), dtype=np.int64)
        sub = Dataset(
            [self.ids[i] for i in idx],
            [self.group_names[g] for g in self.groups[idx]],
            matrix=self.matrix[np.ix_(idx, idx)],
            group_names=self.group_names,
            validate=False,
        )
        if self.coords is not None:
            c = self.coords[idx].copy()
            c.setflags(write=False)
            sub.coords = c
        sub.parent_index = tuple(int(i) for i in idx)
        return sub

    def __repr__(self) -> str:
        mode = f"euclidean D={self.dim}" if self.is_euclidean else "matrix"
        return f"Dataset(n={self.n}, m={self.m}, {mode})"


def check_matrix(mat: np.ndarray, tol: float = TRIANGLE_TOL) -> None:
    """Raise :class:`MetricError` naming the first offending cell or triple."""
    issues = matrix_issues(mat, tol=tol, first_only=True)
    if issues:
        raise MetricError(issues[0])


def matrix_issues(mat: np.ndarray, tol: float = TRIANGLE_TOL, first_only: bool = False) -> list[str]:
    n = mat.shape[0]
    issues: list[str] = []
    bad = np.argwhere(~np.isfinite(mat))
    if len(bad):
        i, j = bad[0]
        issues.append(f"non-finite distance at cell ({i},{j})")
        return issues
    diag = np.flatnonzero(np.diag(mat) != 0.0)
    if len(diag):
        issues.append(f"nonzero diagonal at cell ({diag[0]},{diag[0]})")
        if first_only:
            return issues
    neg = np.argwhere(mat < 0)
    if len(neg):
        i, j = neg[0]
        issues.append(f"negative distance at cell ({i},{j})")
        if first_only:
            return issues
    asym = np.argwhere(np.triu(mat != mat.T))
    if len(asym):
        i, j = asym[0]
        issues.append(f"asymmetric distances at cell ({i},{j}): {mat[i, j]!r} != {mat[j, i]!r}")
        if first_only:
            return issues
    if n > TRIANGLE_CHECK_MAX_N:
        warnings.warn(f"triangle inequality not checked for n={n} > {TRIANGLE_CHECK_MAX_N}")
    else:
        witness = triangle_violation(mat, tol)
        if witness is not None:
            a, b, c = witness
            issues.append(
                f"triangle inequality violated for ({a},{b},{c}): "
                f"d({a},{c})={mat[a, c]!r} > d({a},{b})+d({b},{c})"
            )
    return issues


def triangle_violation(mat: np.ndarray, tol: float = TRIANGLE_TOL) -> tuple[int, int, int] | None:
    """Return ``(a, b, c)`` with ``d(a,c) > d(a,b) + d(b,c) + tol``, or None."""
    for b in range(mat.shape[0]):
        viol = mat > mat[:, b][:, None] + mat[b, :][None, :] + tol
        if viol.any():
            a, c = np.argwhere(viol)[0]
            return int(a), b, int(c)
    return None


@dataclass(frozen=True)
class FairnessSpec:
    """Per-group quotas ``k_1..k_m``."""

    quotas: tuple[int, ...]

    def __post_init__(self) -> None:
        q = tuple(int(x) for x in self.quotas)
        if any(x < 0 for x in q):
            raise ValueError("quotas must be non-negative")
        object.__setattr__(self, "quotas", q)

    @property
    def k(self) -> int:
        return sum(self.quotas)

    @property
    def m(self) -> int:
        return len(self.quotas)

    @classmethod
    def from_mapping(cls, dataset: Dataset, quotas: Mapping[str, int]) -> "FairnessSpec":
        missing = [g for g in dataset.group_names if g not in quotas]
        if missing:
            raise ValueError(f"missing quota for group(s): {', '.join(missing)}")
        extra = [g for g in quotas if g not in dataset.group_names]
        if extra:
            raise ValueError(f"quota given for unknown group(s): {', '.join(map(str, extra))}")
        return cls(tuple(int(quotas[g]) for g in dataset.group_names))

    def scaled_targets(self, eps: float) -> tuple[int, ...]:
        """``ceil((1 - eps) * k_i)`` for each group."""
        return tuple(math.ceil((1.0 - eps) * k) for k in self.quotas)


def check_feasible(dataset: Dataset, spec: FairnessSpec) -> None:
    if spec.m != dataset.m:
        raise ValueError(f"spec has {spec.m} quotas for {dataset.m} groups")
    sizes = dataset.group_sizes()
    for name, k, size in zip(dataset.group_names, spec.quotas, sizes):
        if k > size:
            raise InfeasibleError(f"quota exceeds group size for group {name}: {k} > {size}")


def diversity(dataset: Dataset, subset: Iterable[int]) -> float:
    """Minimum pairwise distance of ``subset``; ``inf`` for fewer than two points."""
    idx = np.asarray(sorted(set(int(i) for i in subset)), dtype=np.int64)
    if len(idx) < 2:
        return INF
    sub = dataset.matrix[np.ix_(idx, idx)]
    iu = np.triu_indices(len(idx), k=1)
    return float(sub[iu].min())


def distance(dataset: Dataset, i: int, j: int) -> float:
    n = dataset.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"point index out of range: ({i}, {j}) for n={n}")
    return float(dataset.matrix[i, j])


@dataclass(frozen=True)
class Ball:
    """Open ball: ``q`` is a member iff ``d(center, q) < radius``."""

    center: int
    radius: float

    def contains(self, dataset: Dataset, q: int) -> bool:
        return dataset.matrix[self.center, q] < self.radius

    def members(self, dataset: Dataset) -> list[int]:
        return np.flatnonzero(dataset.matrix[self.center] < self.radius).tolist()


def ball_members(dataset: Dataset, center: int, radius: float) -> list[int]:
    if radius <= 0:
        raise ValueError("radius must be positive")
    return Ball(center, radius).members(dataset)


@dataclass
class ValidationReport:
    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok


def validate(dataset: Dataset, spec: FairnessSpec | None = None) -> ValidationReport:
    """Collect every violated invariant instead of raising on the first."""
    report = ValidationReport()
    if not dataset.is_euclidean:
        report.issues.extend(matrix_issues(dataset.matrix))
    if spec is not None:
        if spec.m != dataset.m:
            report.issues.append(f"spec has {spec.m} quotas for {dataset.m} groups")
        else:
            for name, k, size in zip(dataset.group_names, spec.quotas, dataset.group_sizes()):
                if k > size:
                    report.issues.append(f"quota exceeds group size for group {name}: {k} > {size}")
        if spec.k < 1:
            report.issues.append("total quota k must be at least 1")
    return report


@dataclass(frozen=True)
class Solution:
    """A selected index set together with how it was obtained.

    Build instances with :meth:`build` so that ``diversity`` and
    ``group_counts`` are always recomputed from ``selected``.
    """

    selected: tuple[int, ...]
    diversity: float
    group_counts: tuple[int, ...]
    gamma_used: float | None = None
    trials: int = 1
    algorithm_tag: str = ""
    info: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def build(
        cls,
        dataset: Dataset,
        indices: Iterable[int],
        *,
        gamma: float | None = None,
        trials: int = 1,
        tag: str = "",
        info: Mapping[str, Any] | None = None,
    ) -> "Solution":
        sel = tuple(sorted(set(int(i) for i in indices)))
        counts = [0] * dataset.m
        for i in sel:
            counts[int(dataset.groups[i])] += 1
        return cls(
            selected=sel,
            diversity=diversity(dataset, sel),
            group_counts=tuple(counts),
            gamma_used=gamma,
            trials=trials,
            algorithm_tag=tag,
            info=dict(info or {}),
        )

    def ids(self, dataset: Dataset) -> list[str]:
        return [dataset.ids[i] for i in self.selected]

    def lift(self, sub: Dataset, parent: Dataset) -> "Solution":
        """Re-express a solution found on ``sub = parent.subset(...)``."""
        if sub.parent_index is None:
            raise ValueError("dataset is not a subset")
        return Solution.build(
            parent,
            (sub.parent_index[i] for i in self.selected),
            gamma=self.gamma_used,
            trials=self.trials,
            tag=self.algorithm_tag,
            info=self.info,
        )

    def meets(self, targets: Sequence[int]) -> bool:
        return all(c >= t for c, t in zip(self.group_counts, targets))

    def sort_key(self) -> tuple:
        """Max diversity first, then the lexicographically smallest index set."""
        return (-self.diversity, self.selected)


def better(a: Solution | None, b: Solution | None) -> Solution | None:
    if a is None:
        return b
    if b is None:
        return a
    return a if a.sort_key() <= b.sort_key() else b


def trim_to_quotas(dataset: Dataset, indices: Iterable[int], quotas: Sequence[int]) -> list[int]:
    """Keep at most ``quotas[g]`` points per group, in the given order."""
    left = list(quotas)
    out = []
    for i in indices:
        g = int(dataset.groups[i])
        if left[g] > 0:
            out.append(i)
            left[g] -= 1
    return out


def fallback_solution(dataset: Dataset, spec: FairnessSpec, tag: str) -> Solution:
    """Lowest-index quota-exact set, for when no positive guess succeeds (optimum 0)."""
    picks = [i for g, k in enumerate(spec.quotas) for i in dataset.members[g][:k]]
    return Solution.build(dataset, picks, gamma=0.0, tag=tag, info={"fallback": True})


def derive_rng(seed: int, *labels: Any) -> np.random.Generator:
    """Named sub-stream of a master seed, e.g. ``derive_rng(7, "lp6", "trial", 3)``."""
    words = [int(seed) & 0xFFFFFFFF, (int(seed) >> 32) & 0xFFFFFFFF]
    words += [zlib.crc32(repr(lab).encode()) for lab in labels]
    return np.random.default_rng(np.random.SeedSequence(words))
