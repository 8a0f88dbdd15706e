"""Exact solver and solution verifier for desk-scale instances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import INF, Dataset, FairDivError, FairnessSpec, Solution, check_feasible

DEFAULT_BUDGET = 5 * 10**7


class OracleBudgetError(FairDivError):
    """The instance has more candidate subsets than the configured budget."""


def search_space_size(dataset: Dataset, spec: FairnessSpec) -> int:
    return math.prod(math.comb(size, k) for size, k in zip(dataset.group_sizes(), spec.quotas))


class _Separated:
    """Depth-first search for quota-exact sets whose pairs are all >= t apart.

    Candidates are bitmasks over point indices; the lowest index is branched
    on first, so the first set found is the lexicographically smallest.
    """

    def __init__(self, dataset: Dataset, spec: FairnessSpec) -> None:
        self.dataset = dataset
        self.quotas = list(spec.quotas)
        self.groups = dataset.groups.tolist()
        self.gmask = [0] * dataset.m
        for g, members in enumerate(dataset.members):
            for i in members:
                self.gmask[g] |= 1 << i
        self.pool = 0
        for g, k in enumerate(self.quotas):
            if k > 0:
                self.pool |= self.gmask[g]

    def first(self, t: float) -> list[int] | None:
        n = self.dataset.n
        rows = self.dataset.dlist
        compat = []
        for i in range(n):
            row = rows[i]
            mask = 0
            for j in range(n):
                if j != i and row[j] >= t:
                    mask |= 1 << j
            compat.append(mask)
        need = list(self.quotas)
        chosen: list[int] = []
        gmask, groups = self.gmask, self.groups
        active = [g for g, k in enumerate(need) if k > 0]

        def viable(cand: int) -> bool:
            for g in active:
                if need[g] and (cand & gmask[g]).bit_count() < need[g]:
                    return False
            return True

        def rec(cand: int, left: int) -> bool:
            if left == 0:
                return True
            while cand:
                if not viable(cand):
                    return False
                low = cand & -cand
                i = low.bit_length() - 1
                g = groups[i]
                nxt = cand & compat[i] & ~((low << 1) - 1)
                need[g] -= 1
                if need[g] == 0:
                    nxt &= ~gmask[g]
                chosen.append(i)
                if rec(nxt, left - 1):
                    return True
                chosen.pop()
                need[g] += 1
                cand &= ~low
            return False

        if rec(self.pool, sum(need)):
            return sorted(chosen)
        return None


def brute_force_opt(
    dataset: Dataset, spec: FairnessSpec, budget: int = DEFAULT_BUDGET
) -> Solution:
    """Exact optimum, ties broken towards the lexicographically smallest index set.

    The optimum is one of the pairwise distances, so we binary-search that
    list with a pruned feasibility search and then report the first
    (lexicographically smallest) set at the optimal threshold.
    """
    check_feasible(dataset, spec)
    size = search_space_size(dataset, spec)
    if size > budget:
        raise OracleBudgetError(f"{size} candidate subsets exceed the oracle budget of {budget}")
    search = _Separated(dataset, spec)
    if spec.k <= 1:
        sel = search.first(-INF)
        assert sel is not None
        return Solution.build(dataset, sel, tag="brute")

    pool = [i for g, k in enumerate(spec.quotas) if k > 0 for i in dataset.members[g]]
    pool.sort()
    sub = dataset.matrix[np.ix_(pool, pool)]
    values = np.unique(sub[np.triu_indices(len(pool), k=1)])
    values = values[values > 0].tolist()

    lo, hi, best = 0, len(values) - 1, None
    while lo <= hi:
        mid = (lo + hi) // 2
        if search.first(values[mid]) is not None:
            best = mid
            lo = mid + 1
        else:
            hi = mid - 1
    threshold = values[best] if best is not None else 0.0
    sel = search.first(threshold)
    assert sel is not None
    return Solution.build(dataset, sel, tag="brute")


@dataclass(frozen=True)
class Verdict:
    passed: bool
    diversity: float
    optimum: float
    alpha: float
    beta: float
    required_counts: tuple[int, ...]
    group_counts: tuple[int, ...]
    diversity_ok: bool
    fairness_ok: bool

    @property
    def ratio(self) -> float:
        """``optimum / diversity`` (1.0 when both are unbounded)."""
        if self.diversity == self.optimum:
            return 1.0
        if self.diversity == 0:
            return INF
        return self.optimum / self.diversity


def verify(
    dataset: Dataset,
    spec: FairnessSpec,
    solution: Solution,
    alpha: float = 1.0,
    beta: float = 1.0,
    optimum: float | None = None,
    budget: int = DEFAULT_BUDGET,
) -> Verdict:
    """Check ``div >= opt/alpha`` and ``|S ∩ X_i| >= ceil(beta * k_i)``.

    ``optimum`` may be supplied when it is already known; otherwise the oracle
    is run.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    if optimum is None:
        optimum = brute_force_opt(dataset, spec, budget=budget).diversity
    required = tuple(math.ceil(beta * k) for k in spec.quotas)
    div_ok = solution.diversity >= optimum / alpha
    fair_ok = all(c >= r for c, r in zip(solution.group_counts, required))
    return Verdict(
        passed=div_ok and fair_ok,
        diversity=solution.diversity,
        optimum=optimum,
        alpha=alpha,
        beta=beta,
        required_counts=required,
        group_counts=solution.group_counts,
        diversity_ok=div_ok,
        fairness_ok=fair_ok,
    )
