"""Profile DP across mutually far-apart clusters.

If clusters are pairwise at least ``gamma`` apart, a ``gamma``-separated set
is just a ``gamma``-separated subset of each cluster.  Each cluster is
summarised by the group-count profiles it can realise, and a table of
reachable profile sums is built cluster by cluster.
"""

from __future__ import annotations

import os
from typing import Sequence

from ..core import Dataset, FairDivError, Solution

DEFAULT_BUDGET_CELLS = 10**8
DEFAULT_CLUSTER_CAP = 24
DEFAULT_NODE_BUDGET = 5 * 10**6

Profile = tuple[int, ...]


class BudgetError(FairDivError):
    """A table or enumeration would exceed its configured budget."""


def budget_cells() -> int:
    raw = os.environ.get("FAIRDIV_BUDGET_CELLS")
    if raw is None:
        return DEFAULT_BUDGET_CELLS
    try:
        val = int(float(raw))
    except ValueError:
        raise ValueError(f"FAIRDIV_BUDGET_CELLS must be a number, got {raw!r}") from None
    if val <= 0:
        raise ValueError("FAIRDIV_BUDGET_CELLS must be positive")
    return val


def check_budget(cells: int, what: str) -> None:
    limit = budget_cells()
    if cells > limit:
        raise BudgetError(f"{what} needs {cells} cells, over the budget of {limit} (FAIRDIV_BUDGET_CELLS)")


def cluster_profiles(
    dataset: Dataset,
    cluster: Sequence[int],
    gamma: float,
    limits: Sequence[int],
    cap: int | None = DEFAULT_CLUSTER_CAP,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> dict[Profile, tuple[int, ...]]:
    """Every count profile (componentwise <= ``limits``) of a ``gamma``-separated subset.

    Maps each profile to the first witness subset found.  Subsets are grown
    in ascending point order and only while they stay separated, so the
    search visits separated subsets only.
    """
    pts = sorted(int(i) for i in cluster)
    if cap is not None and len(pts) > cap:
        raise BudgetError(f"cluster of {len(pts)} points exceeds the enumeration cap of {cap}")
    rows = dataset.dlist
    groups = dataset.groups.tolist()
    lim = list(limits)
    size = len(pts)
    compat = []
    for a in range(size):
        mask = 0
        for b in range(a + 1, size):
            if rows[pts[a]][pts[b]] >= gamma:
                mask |= 1 << b
        compat.append(mask)
    out: dict[Profile, tuple[int, ...]] = {(0,) * len(lim): ()}
    prof = [0] * len(lim)
    chosen: list[int] = []
    nodes = 0

    def rec(cand: int) -> None:
        nonlocal nodes
        while cand:
            low = cand & -cand
            cand ^= low
            a = low.bit_length() - 1
            g = groups[pts[a]]
            if prof[g] >= lim[g]:
                continue
            nodes += 1
            if nodes > node_budget:
                raise BudgetError(f"profile enumeration exceeded {node_budget} subsets")
            prof[g] += 1
            chosen.append(pts[a])
            out.setdefault(tuple(prof), tuple(chosen))
            rec(cand & compat[a])
            chosen.pop()
            prof[g] -= 1

    rec((1 << size) - 1)
    return out


def fair_dp(
    dataset: Dataset,
    clusters: Sequence[Sequence[int]],
    targets: Sequence[int],
    gamma: float,
    caps: Sequence[int] | None = None,
    cluster_cap: int | None = DEFAULT_CLUSTER_CAP,
) -> Solution | None:
    """Union of per-cluster separated subsets meeting ``targets``, or None.

    Counts are capped at ``caps`` (default: ``targets``).  When ``caps``
    exceeds ``targets`` the reachable profile with the most points (ties:
    lexicographically largest) among those meeting the targets is returned.
    The caller guarantees the clusters are pairwise ``gamma`` apart.
    """
    limits = tuple(caps) if caps is not None else tuple(targets)
    if any(c < t for c, t in zip(limits, targets)):
        raise ValueError("caps must be at least the targets")
    budget = budget_cells()
    zero = (0,) * len(limits)
    layers: list[dict[Profile, tuple[Profile, Profile]]] = [{zero: (zero, zero)}]
    witnesses = []
    cells = 1
    for cl in clusters:
        profs = cluster_profiles(dataset, cl, gamma, limits, cap=cluster_cap)
        witnesses.append(profs)
        prev = layers[-1]
        cur: dict[Profile, tuple[Profile, Profile]] = {}
        for base in prev:
            for add in profs:
                tot = tuple(a + b for a, b in zip(base, add))
                if any(t > c for t, c in zip(tot, limits)):
                    continue
                if tot not in cur:
                    cur[tot] = (base, add)
        cells += len(cur)
        if cells > budget:
            raise BudgetError(f"profile table exceeded {budget} cells (FAIRDIV_BUDGET_CELLS)")
        layers.append(cur)

    final = [p for p in layers[-1] if all(a >= t for a, t in zip(p, targets))]
    if not final:
        return None
    prof = max(final, key=lambda p: (sum(p), p))
    picks: list[int] = []
    for j in range(len(clusters), 0, -1):
        base, add = layers[j][prof]
        picks.extend(witnesses[j - 1][add])
        prof = base
    return Solution.build(dataset, picks, gamma=gamma, tag="fair-dp")
