"""Exact solver for points on a line via a DP over per-group count profiles."""

from __future__ import annotations

import math

import numpy as np

from ..core import Dataset, FairnessSpec, Solution, check_feasible, fallback_solution
from ..guessing import largest_feasible, pairwise_guesses
from .dp import check_budget


def _line_order(dataset: Dataset) -> list[int]:
    if dataset.coords is None or dataset.coords.shape[1] != 1:
        raise ValueError("line solver needs one-dimensional coordinates")
    x = dataset.coords[:, 0]
    return np.lexsort((np.arange(dataset.n), x)).tolist()


def fair_line(dataset: Dataset, spec: FairnessSpec, gamma: float) -> Solution | None:
    """Quota-exact set with every pair at least ``gamma`` apart, or None.

    With the points sorted, ``reach[j]`` holds the count profiles achievable
    by a ``gamma``-separated subset of the first ``j`` points.  Point ``j``
    either is skipped (profile carried from ``j-1``) or is taken on top of a
    profile reachable at ``j'``, the last position at least ``gamma`` to its
    left.
    """
    check_feasible(dataset, spec)
    order = _line_order(dataset)
    n = len(order)
    quotas = spec.quotas
    check_budget(math.prod(k + 1 for k in quotas) * (n + 1), "line DP")
    rows = dataset.dlist
    groups = dataset.groups.tolist()
    zero = (0,) * spec.m
    # reach[j]: profile -> True if reached by taking point j, False if carried
    reach: list[dict[tuple[int, ...], bool]] = [{zero: False}]
    back = [0] * (n + 1)
    jp = 0
    for j in range(1, n + 1):
        pj = order[j - 1]
        while jp + 1 < j and rows[order[jp]][pj] >= gamma:
            jp += 1
        back[j] = jp
        g = groups[pj]
        cur = dict.fromkeys(reach[j - 1], False)
        if quotas[g] > 0:
            for prof in reach[jp]:
                if prof[g] < quotas[g]:
                    nxt = prof[:g] + (prof[g] + 1,) + prof[g + 1 :]
                    cur.setdefault(nxt, True)
        reach.append(cur)

    target = tuple(quotas)
    if target not in reach[n]:
        return None
    picks = []
    prof, j = target, n
    while j > 0:
        if reach[j][prof]:
            pj = order[j - 1]
            g = groups[pj]
            picks.append(pj)
            prof = prof[:g] + (prof[g] - 1,) + prof[g + 1 :]
            j = back[j]
        else:
            j -= 1
    return Solution.build(dataset, picks, gamma=gamma, tag="line")


def fair_line_opt(dataset: Dataset, spec: FairnessSpec) -> Solution:
    """Exact optimum: the largest pairwise distance at which :func:`fair_line` succeeds."""
    check_feasible(dataset, spec)
    if spec.k <= 1:
        return fallback_solution(dataset, spec, "line")
    try:
        schedule = pairwise_guesses(dataset)
    except ValueError:
        return fallback_solution(dataset, spec, "line")
    found: dict[float, Solution] = {}

    def feasible(g: float) -> bool:
        sol = fair_line(dataset, spec, g)
        if sol is not None:
            found[g] = sol
        return sol is not None

    gamma = largest_feasible(schedule, feasible)
    if gamma is None:
        return fallback_solution(dataset, spec, "line")
    return found[gamma]
