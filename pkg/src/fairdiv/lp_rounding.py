"""Feasibility LP over open balls and its two randomized roundings.

For a guess ``gamma`` the LP asks for weights ``x >= 0`` with at least ``k_i``
total weight per group and at most 1 in every open ball of radius
``gamma/2``.  Rounding draws a weighted random order and keeps each support
point that comes first within its own ball:

* ``expected2`` rounds at radius ``gamma/2`` directly; the output is
  ``gamma/2``-separated and meets every quota in expectation.
* ``concentrated6`` first merges same-group weight within ``gamma/3`` so the
  group's support is ``gamma/3``-separated, then rounds at ``gamma/6``.  The
  per-group inclusion events become independent, so counts concentrate and
  a few repeated trials reach ``ceil((1-eps) k_i)`` with high probability.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

from .core import Dataset, FairDivError, FairnessSpec, Solution, check_feasible, fallback_solution, trim_to_quotas
from .guessing import largest_feasible, pairwise_guesses
from .simplex import FEAS_TOL, phase1

SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class LPInstance:
    gamma: float
    quotas: tuple[int, ...]
    groups: np.ndarray
    balls: np.ndarray = field(repr=False)
    """``balls[p, q]`` is True iff ``d(p, q) < gamma/2``."""

    @property
    def n(self) -> int:
        return len(self.groups)

    def ball(self, p: int) -> list[int]:
        return np.flatnonzero(self.balls[p]).tolist()

    def group_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Coverage rows ``A_ge``/``b_ge``, skipping groups with a zero quota."""
        m = len(self.quotas)
        a = np.zeros((m, self.n))
        a[self.groups, np.arange(self.n)] = 1.0
        keep = [i for i, k in enumerate(self.quotas) if k > 0]
        return a[keep], np.asarray([self.quotas[i] for i in keep], dtype=np.float64)

    def ball_rows(self) -> tuple[np.ndarray, np.ndarray]:
        return self.balls.astype(np.float64), np.ones(self.n)

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint violation of ``x`` (<= 0 means feasible)."""
        a_ge, b_ge = self.group_rows()
        a_le, b_le = self.ball_rows()
        gaps = [float(-x.min(initial=0.0))]
        if len(b_ge):
            gaps.append(float((b_ge - a_ge @ x).max()))
        gaps.append(float((a_le @ x - b_le).max(initial=-np.inf)))
        return max(gaps)

    def dump(self) -> str:
        """Plain-text rows ``GE|LE coeffs rhs`` for external cross-checking."""
        lines = []
        for sense, (a, b) in (("GE", self.group_rows()), ("LE", self.ball_rows())):
            for row, rhs in zip(a, b):
                coeffs = ",".join(str(int(v)) for v in row)
                lines.append(f"{sense} {coeffs} {rhs:g}")
        return "\n".join(lines) + "\n"


def build_lp(dataset: Dataset, spec: FairnessSpec, gamma: float) -> LPInstance:
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    balls = dataset.matrix < gamma / 2
    balls.setflags(write=False)
    return LPInstance(float(gamma), tuple(spec.quotas), dataset.groups, balls)


@dataclass(frozen=True)
class FractionalSolution:
    x: np.ndarray | None
    feasible: bool
    gamma: float
    pivots: int = 0

    @cached_property
    def support(self) -> np.ndarray:
        if self.x is None:
            return np.zeros(0, dtype=np.int64)
        return np.flatnonzero(self.x > SUPPORT_TOL)


def solve_feasibility(instance: LPInstance) -> FractionalSolution:
    a_ge, b_ge = instance.group_rows()
    a_le, b_le = instance.ball_rows()
    res = phase1(a_le, b_le, a_ge, b_ge)
    return FractionalSolution(res.x, res.feasible, instance.gamma, res.pivots)


def weighted_permutation(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Positions of the positive weights, ordered by sampling without replacement.

    Each step picks a remaining position with probability proportional to
    its weight.  Sorting independent ``Exp(1)/w`` keys gives exactly that
    distribution in one vectorised draw.
    """
    w = np.asarray(weights, dtype=np.float64)
    pos = np.flatnonzero(w > 0)
    if len(pos) == 0:
        raise ValueError("weighted_permutation needs at least one positive weight")
    keys = rng.standard_exponential(len(pos)) / w[pos]
    return pos[np.argsort(keys, kind="stable")]


def _ball_minima(dataset: Dataset, support: np.ndarray, order: np.ndarray, radius: float) -> list[int]:
    """Support points that come first in ``order`` within their open ball."""
    rank = np.empty(dataset.n, dtype=np.float64)
    rank[order] = np.arange(len(order))
    sub = dataset.matrix[np.ix_(support, support)] < radius
    srank = rank[support]
    first = np.where(sub, srank[None, :], np.inf).min(axis=1)
    return support[srank <= first].tolist()


def round_expected_fair(
    dataset: Dataset,
    spec: FairnessSpec,
    gamma: float,
    x: np.ndarray,
    rng: np.random.Generator,
) -> Solution:
    x = np.asarray(x, dtype=np.float64)
    support = np.flatnonzero(x > SUPPORT_TOL)
    if len(support) == 0:
        return Solution.build(dataset, [], gamma=gamma, tag="lp2")
    order = support[weighted_permutation(x[support], rng)]
    chosen = _ball_minima(dataset, support, order, gamma / 2)
    return Solution.build(dataset, chosen, gamma=gamma, tag="lp2")


@dataclass(frozen=True)
class RedistributedSolution:
    y: np.ndarray
    gamma: float

    @cached_property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.y > SUPPORT_TOL)


def redistribute_weights(
    dataset: Dataset, spec: FairnessSpec, gamma: float, x: np.ndarray
) -> RedistributedSolution:
    """Merge each group's weight onto representatives ``gamma/3`` apart.

    Points are visited in ascending index.  A support point that has not yet
    been absorbed collects the weight of every still-unabsorbed same-group
    point strictly within ``gamma/3``; those points drop to zero.  Each unit
    of weight moves at most once, so group totals are preserved exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    n = dataset.n
    y = np.zeros(n)
    done = np.zeros(n, dtype=bool)
    close = dataset.matrix < gamma / 3
    same = dataset.groups[:, None] == dataset.groups[None, :]
    for j in range(n):
        if done[j] or x[j] <= SUPPORT_TOL:
            continue
        grab = close[j] & same[j] & ~done
        y[j] = x[grab].sum()
        done |= grab
    return RedistributedSolution(y, float(gamma))


def transformed_violations(dataset: Dataset, spec: FairnessSpec, red: RedistributedSolution) -> list[str]:
    """Which of the coverage / ``gamma/6`` packing / non-negativity / ``gamma/3`` separation rules fail."""
    y, gamma = red.y, red.gamma
    out = []
    sums = np.bincount(dataset.groups, weights=y, minlength=dataset.m)
    for g, k in enumerate(spec.quotas):
        if sums[g] < k - FEAS_TOL:
            out.append(f"group {dataset.group_names[g]} weight {sums[g]:.6g} < {k}")
    packing = (dataset.matrix < gamma / 6) @ y
    if (packing > 1 + FEAS_TOL).any():
        out.append(f"gamma/6 ball weight {packing.max():.6g} > 1")
    if (y < 0).any():
        out.append("negative weight")
    supp = red.support
    sub = dataset.matrix[np.ix_(supp, supp)]
    gs = dataset.groups[supp]
    clash = (sub < gamma / 3) & (gs[:, None] == gs[None, :])
    np.fill_diagonal(clash, False)
    if clash.any():
        a, b = np.argwhere(clash)[0]
        out.append(f"same-group support points {supp[a]} and {supp[b]} closer than gamma/3")
    return out


def concentration_threshold(eps: float, m: int) -> float:
    """Smallest quota for which one concentrated trial succeeds w.p. >= 1/2."""
    return 3.0 * math.log(2 * m) / (eps * eps)


def trials_for(delta: float) -> int:
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return max(1, math.ceil(math.log2(1.0 / delta)))


def _fill_ratio(sol: Solution, targets: tuple[int, ...]) -> float:
    ratios = [c / t for c, t in zip(sol.group_counts, targets) if t > 0]
    return min(ratios, default=math.inf)


def round_concentrated(
    dataset: Dataset,
    spec: FairnessSpec,
    gamma: float,
    y: np.ndarray | RedistributedSolution,
    eps: float,
    delta: float,
    rng: np.random.Generator,
) -> Solution:
    """Repeat ``gamma/6`` rounding until every group reaches ``ceil((1-eps) k_i)``.

    Runs at most ``ceil(log2(1/delta))`` trials and returns the first success,
    or else the trial with the best worst-group fill ratio.
    """
    if isinstance(y, RedistributedSolution):
        y = y.y
    y = np.asarray(y, dtype=np.float64)
    support = np.flatnonzero(y > SUPPORT_TOL)
    if len(support) == 0:
        raise FairDivError("concentrated rounding needs a non-empty support")
    need = concentration_threshold(eps, spec.m)
    small = [dataset.group_names[g] for g, k in enumerate(spec.quotas) if 0 < k < need]
    if small:
        warnings.warn(
            f"quotas below {need:.1f} for group(s) {', '.join(small)}: "
            "the (1-eps) fairness guarantee does not apply",
            stacklevel=2,
        )
    targets = spec.scaled_targets(eps)
    trials = trials_for(delta)
    best: Solution | None = None
    best_key: tuple | None = None
    for t in range(1, trials + 1):
        order = support[weighted_permutation(y[support], rng)]
        chosen = _ball_minima(dataset, support, order, gamma / 6)
        sol = Solution.build(dataset, chosen, gamma=gamma, trials=t, tag="lp6")
        if sol.meets(targets):
            return sol
        key = (-_fill_ratio(sol, targets), t)
        if best_key is None or key < best_key:
            best, best_key = sol, key
    assert best is not None
    return Solution.build(dataset, best.selected, gamma=gamma, trials=trials, tag="lp6")


def lp_feasible_at(dataset: Dataset, spec: FairnessSpec, gamma: float) -> FractionalSolution:
    return solve_feasibility(build_lp(dataset, spec, gamma))


def lp_search(dataset: Dataset, spec: FairnessSpec) -> FractionalSolution | None:
    """LP solution at the largest pairwise-distance guess where the LP is feasible.

    Feasibility shrinks as ``gamma`` grows (balls only get larger), so a
    binary search over the sorted distances finds the threshold.
    """
    check_feasible(dataset, spec)
    try:
        schedule = pairwise_guesses(dataset)
    except ValueError:
        return None
    cache: dict[float, FractionalSolution] = {}

    def feasible(g: float) -> bool:
        cache[g] = lp_feasible_at(dataset, spec, g)
        return cache[g].feasible

    gamma = largest_feasible(schedule, feasible)
    return None if gamma is None else cache[gamma]


def lp_pipeline(
    dataset: Dataset,
    spec: FairnessSpec,
    eps: float = 0.5,
    mode: Literal["expected2", "concentrated6"] = "expected2",
    delta: float = 0.1,
    rng: np.random.Generator | None = None,
    *,
    search: FractionalSolution | None = None,
    trim: bool = False,
) -> Solution:
    """Search the largest LP-feasible guess and round at it.

    ``search`` lets callers reuse an earlier :func:`lp_search` result, which is
    deterministic.  With ``trim`` the output keeps at most ``k_i`` points per
    group (ascending index); trimming never lowers diversity.
    """
    if mode not in ("expected2", "concentrated6"):
        raise ValueError(f"unknown rounding mode {mode!r}")
    rng = rng if rng is not None else np.random.default_rng(0)
    tag = "lp2" if mode == "expected2" else "lp6"
    check_feasible(dataset, spec)
    if spec.k <= 1:
        return fallback_solution(dataset, spec, tag)
    frac = search if search is not None else lp_search(dataset, spec)
    if frac is None:
        return fallback_solution(dataset, spec, tag)
    if not frac.feasible or frac.x is None:
        raise FairDivError("lp_pipeline was handed an infeasible LP solution")
    gamma = frac.gamma
    if mode == "expected2":
        sol = round_expected_fair(dataset, spec, gamma, frac.x, rng)
    else:
        red = redistribute_weights(dataset, spec, gamma, frac.x)
        sol = round_concentrated(dataset, spec, gamma, red, eps, delta, rng)
    if trim:
        kept = trim_to_quotas(dataset, sol.selected, spec.quotas)
        sol = Solution.build(dataset, kept, gamma=gamma, trials=sol.trials, tag=tag)
    return sol
