"""Farthest-point (GMM) traversals and the per-group coreset built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ..core import INF, Dataset, FairnessSpec


@dataclass(frozen=True)
class GmmOrdering:
    """Points in traversal order.

    ``radii[t]`` is the distance from ``order[t]`` to ``order[:t]``; the seed
    has radius ``inf``.  Radii never increase, and ``order[:t]`` has
    diversity ``radii[t-1]``.
    """

    order: tuple[int, ...]
    radii: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.order)


def gmm(
    dataset: Dataset,
    size: int,
    pool: Iterable[int] | None = None,
    init: Sequence[int] = (),
) -> GmmOrdering:
    """Farthest-point traversal of ``pool`` (default: every point).

    Starts from ``init`` if given, otherwise from the lowest index; ties
    for the farthest point go to the lowest index.  Stops at ``size``
    points or when the pool runs out.
    """
    if size < 1:
        raise ValueError("size must be at least 1")
    cand = np.asarray(sorted(set(int(i) for i in pool)) if pool is not None else range(dataset.n), dtype=np.int64)
    if len(cand) == 0:
        raise ValueError("gmm needs a non-empty point set")
    mat = dataset.matrix
    order: list[int] = []
    radii: list[float] = []
    near = np.full(len(cand), INF)
    taken = np.zeros(len(cand), dtype=bool)
    pos = {int(p): i for i, p in enumerate(cand)}

    def take(p: int, r: float) -> None:
        order.append(p)
        radii.append(r)
        np.minimum(near, mat[p, cand], out=near)
        if p in pos:
            taken[pos[p]] = True

    for p in init:
        p = int(p)
        r = INF if not order else float(mat[p, order].min())
        take(p, r)
    if not order:
        take(int(cand[0]), INF)
    while len(order) < size:
        score = np.where(taken, -1.0, near)
        best = int(np.argmax(score))
        if taken[best]:
            break
        take(int(cand[best]), float(near[best]))
    return GmmOrdering(tuple(order), tuple(radii))


def maximal_prefix(ordering: GmmOrdering, threshold: float) -> tuple[int, ...]:
    """Longest prefix whose diversity is at least ``threshold``."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    for t, r in enumerate(ordering.radii):
        if r < threshold:
            return ordering.order[:t]
    return ordering.order


def eps_prime(eps: float) -> float:
    return eps / (1.0 + eps)


def coreset_size(k: int, eps: float, lam: float) -> int:
    """``ceil((4/eps')**lam * k)`` with ``eps' = eps/(1+eps)``.

    Exact rational arithmetic is used when ``lam`` is an integer so the
    ceiling is never off by one from rounding.
    """
    if not 0 < eps:
        raise ValueError("eps must be positive")
    if float(lam).is_integer():
        e = Fraction(eps)
        base = 4 * (1 + e) / e
        return math.ceil(base ** int(lam) * k)
    return math.ceil((4.0 / eps_prime(eps)) ** lam * k)


def coreset_bound(k: int, eps: float, lam: float) -> int:
    """Looser published size cap ``ceil((8/eps)**lam * k)``."""
    if float(lam).is_integer():
        return math.ceil((8 / Fraction(eps)) ** int(lam) * k)
    return math.ceil((8.0 / eps) ** lam * k)


@dataclass(frozen=True)
class CoresetBundle:
    orderings: tuple[GmmOrdering, ...]
    eps: float
    lam: float
    size: int
    """Per-group traversal length requested (before capping at the group size)."""

    def points(self) -> list[int]:
        return sorted(set(p for o in self.orderings for p in o.order))

    def prefixes(self, threshold: float) -> list[tuple[int, ...]]:
        return [maximal_prefix(o, threshold) if len(o) else () for o in self.orderings]

    def __len__(self) -> int:
        return sum(len(o) for o in self.orderings)


def build_coreset(dataset: Dataset, spec: FairnessSpec, eps: float, lam: float | None = None) -> CoresetBundle:
    """GMM traversal of each group, truncated at :func:`coreset_size` points."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if lam is None:
        lam = dataset.dim if dataset.dim is not None else 1
    if lam < 1:
        raise ValueError("lambda must be at least 1")
    size = coreset_size(spec.k, eps, lam)
    orderings = []
    for members in dataset.members:
        if members:
            orderings.append(gmm(dataset, size, members))
        else:
            orderings.append(GmmOrdering((), ()))
    return CoresetBundle(tuple(orderings), float(eps), float(lam), size)
