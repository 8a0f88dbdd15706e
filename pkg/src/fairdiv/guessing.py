"""Candidate values for the unknown optimum and searches over them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Literal, TypeVar

import numpy as np

from .core import Dataset, Solution, better

T = TypeVar("T")


@dataclass(frozen=True)
class GuessSchedule:
    values: tuple[float, ...]
    kind: Literal["pairwise", "geometric"]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if any(v <= 0 for v in vals):
            raise ValueError("guesses must be positive")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("guesses must be strictly increasing")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]


def distinct_distances(matrix: np.ndarray) -> list[float]:
    """Sorted distinct positive off-diagonal entries."""
    n = matrix.shape[0]
    vals = np.unique(matrix[np.triu_indices(n, k=1)])
    return vals[vals > 0].tolist()


def pairwise_guesses(dataset: Dataset, indices: Iterable[int] | None = None) -> GuessSchedule:
    """Every distinct positive distance, optionally restricted to ``indices``."""
    mat = dataset.matrix
    if indices is not None:
        idx = sorted(set(int(i) for i in indices))
        mat = mat[np.ix_(idx, idx)]
    if mat.shape[0] < 2:
        raise ValueError("need at least two points for a pairwise schedule")
    vals = distinct_distances(mat)
    if not vals:
        raise ValueError("all points coincide; no positive distance to guess")
    return GuessSchedule(tuple(vals), "pairwise")


def geometric_guesses(d_lo: float, d_hi: float, eps: float) -> GuessSchedule:
    """``d_lo * (1+eps)**t`` up to the first value reaching ``d_hi``, which is clamped to ``d_hi``."""
    if not d_lo > 0:
        raise ValueError("d_lo must be positive")
    if d_hi < d_lo:
        raise ValueError("d_hi must be >= d_lo")
    if not eps > 0:
        raise ValueError("eps must be positive")
    vals = []
    t = 0
    while True:
        v = d_lo * (1.0 + eps) ** t
        if v >= d_hi:
            vals.append(float(d_hi))
            break
        vals.append(v)
        t += 1
    return GuessSchedule(tuple(vals), "geometric")


def dataset_range(dataset: Dataset) -> tuple[float, float]:
    """Smallest positive and largest pairwise distance."""
    vals = distinct_distances(dataset.matrix)
    if not vals:
        raise ValueError("all points coincide; no positive distance")
    return vals[0], vals[-1]


def largest_feasible(schedule: Iterable[float], feasible: Callable[[float], bool]) -> float | None:
    """Binary search for the largest value accepted by a monotone predicate."""
    vals = list(schedule)
    lo, hi, best = 0, len(vals) - 1, None
    while lo <= hi:
        mid = (lo + hi) // 2
        if feasible(vals[mid]):
            best = vals[mid]
            lo = mid + 1
        else:
            hi = mid - 1
    return best


def largest_feasible_scan(schedule: Iterable[float], feasible: Callable[[float], bool]) -> float | None:
    """Linear-scan counterpart of :func:`largest_feasible`; no monotonicity assumed."""
    best = None
    for g in schedule:
        if feasible(g):
            best = g
    return best


def search_solutions(
    schedule: Iterable[float],
    attempt: Callable[[float], Solution | None],
    mode: Literal["scan", "binary"] = "scan",
) -> Solution | None:
    """Best solution over the guesses.

    ``scan`` tries every guess and keeps the best by diversity then
    lexicographic index order.  ``binary`` treats "attempt returned a
    solution" as a monotone predicate and keeps the best solution seen
    along the search path.
    """
    vals = list(schedule)
    best: Solution | None = None
    if mode == "scan":
        for g in vals:
            best = better(best, attempt(g))
        return best
    if mode != "binary":
        raise ValueError(f"unknown search mode {mode!r}")
    lo, hi = 0, len(vals) - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        sol = attempt(vals[mid])
        if sol is not None:
            best = better(best, sol)
            lo = mid + 1
        else:
            hi = mid - 1
    return best
