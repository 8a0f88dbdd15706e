"""Single-pass algorithms over a stream of point indices.

Every algorithm runs one independent state machine per guess on a
geometric grid between the supplied distance bounds.  Each arriving point
is offered to every live guess once; afterwards the retained points are
post-processed offline.  Retained-point counts are tracked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import INF, Dataset, FairDivError, FairnessSpec, Solution, better, check_feasible
from .euclidean.coreset import coreset_bound
from .euclidean.grid import fair_euclidean_search
from .guessing import geometric_guesses
from .lp_rounding import lp_pipeline


class StreamReusedError(FairDivError):
    """A consume-once stream was iterated a second time."""


class OnceStream:
    """Iterable that can be consumed exactly once."""

    def __init__(self, items: Iterable[int]) -> None:
        self._items = items
        self._used = False
        self.consumed = 0

    def __iter__(self) -> Iterator[int]:
        if self._used:
            raise StreamReusedError("stream already consumed")
        self._used = True
        for item in self._items:
            self.consumed += 1
            yield int(item)


def stream_order(dataset: Dataset, shuffle_seed: int | None = None) -> list[int]:
    """File order, or a deterministic permutation of it."""
    order = list(range(dataset.n))
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(dataset.n).tolist()
    return order


@dataclass
class StreamContext:
    d_min_lb: float
    d_max_ub: float
    eps: float
    guesses: tuple[float, ...] = ()
    retained: dict[float, int] = field(default_factory=dict)
    """Points currently held per guess."""
    peak_memory_points: int = 0
    peak_per_guess: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.d_min_lb <= self.d_max_ub:
            raise ValueError("distance bounds must satisfy 0 < d_min_lb <= d_max_ub")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        self.guesses = geometric_guesses(self.d_min_lb, self.d_max_ub, self.eps).values
        self.retained = dict.fromkeys(self.guesses, 0)
        self._total = 0

    def hold(self, gamma: float, count: int = 1) -> None:
        self.retained[gamma] += count
        self._total += count
        self.peak_memory_points = max(self.peak_memory_points, self._total)
        self.peak_per_guess = max(self.peak_per_guess, self.retained[gamma])

    def report(self) -> dict[str, int]:
        return {
            "guesses": len(self.guesses),
            "peak_memory_points": self.peak_memory_points,
            "peak_per_guess": self.peak_per_guess,
        }


def _admits(rows: list[list[float]], held: Sequence[int], p: int, tau: float) -> bool:
    row = rows[p]
    return all(row[q] >= tau for q in held)


def tau_gmm(
    dataset: Dataset,
    sequence: Iterable[int],
    tau: float,
    cap: int,
    init: Sequence[int] = (),
) -> list[int]:
    """Admit each point (in order) at distance >= ``tau`` from all admitted ones, up to ``cap``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    if cap < len(init):
        raise ValueError("cap must be at least the size of init")
    rows = dataset.dlist
    held = [int(p) for p in init]
    for p in sequence:
        if len(held) >= cap:
            break
        if _admits(rows, held, p, tau):
            held.append(p)
    return held


def tau_gmm_stream(
    dataset: Dataset, stream: Iterable[int], tau: float, caps: Sequence[int]
) -> list[list[int]]:
    """Independent threshold traversal per group over one pass."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    rows = dataset.dlist
    groups = dataset.groups.tolist()
    held: list[list[int]] = [[] for _ in caps]
    for p in stream:
        g = groups[p]
        if len(held[g]) < caps[g] and _admits(rows, held[g], p, tau):
            held[g].append(p)
    return held


def _per_group_pass(
    dataset: Dataset,
    stream: Iterable[int],
    ctx: StreamContext,
    tau_of: float,
    caps: Sequence[int],
) -> dict[float, list[list[int]]]:
    rows = dataset.dlist
    groups = dataset.groups.tolist()
    state = {g: [[] for _ in caps] for g in ctx.guesses}
    for p in stream:
        grp = groups[p]
        if caps[grp] == 0:
            continue
        for gamma in ctx.guesses:
            held = state[gamma][grp]
            if len(held) < caps[grp] and _admits(rows, held, p, tau_of * gamma):
                held.append(p)
                ctx.hold(gamma)
    return state


def _pool(state: dict[float, list[list[int]]]) -> list[int]:
    return sorted({p for sets in state.values() for s in sets for p in s})


def fair_stream_gen(
    dataset: Dataset,
    stream: Iterable[int],
    spec: FairnessSpec,
    d_min_lb: float,
    d_max_ub: float,
    eps: float = 0.5,
    delta: float = 0.1,
    rng: np.random.Generator | None = None,
) -> Solution:
    """General metrics: per-group threshold sets at ``2*gamma/5``, then LP rounding on the pool.

    Each group keeps up to ``k`` points per guess.  After the pass the pooled
    points are solved offline with the concentrated LP rounding.
    """
    check_feasible(dataset, spec)
    ctx = StreamContext(d_min_lb, d_max_ub, eps)
    caps = [spec.k] * spec.m
    state = _per_group_pass(dataset, stream, ctx, 2.0 / 5.0, caps)
    pool = _pool(state)
    sub = dataset.subset(pool)
    check_feasible(sub, spec)
    sol = lp_pipeline(sub, spec, eps=eps, mode="concentrated6", delta=delta, rng=rng)
    lifted = sol.lift(sub, dataset)
    info = dict(lifted.info, pool_size=len(pool), **ctx.report())
    return Solution.build(dataset, lifted.selected, gamma=sol.gamma_used, trials=sol.trials, tag="stream-gen", info=info)


def fair_stream_euclidean(
    dataset: Dataset,
    stream: Iterable[int],
    spec: FairnessSpec,
    d_min_lb: float,
    d_max_ub: float,
    eps: float = 0.5,
    lam: float | None = None,
    delta: float = 0.1,
    rng: np.random.Generator | None = None,
) -> Solution:
    """Euclidean inputs: threshold sets at ``eps*gamma/4``, then the grid-shift search on the pool."""
    if dataset.coords is None:
        raise ValueError("euclidean streaming needs coordinates; the input is a distance matrix")
    check_feasible(dataset, spec)
    lam = lam if lam is not None else dataset.coords.shape[1]
    ctx = StreamContext(d_min_lb, d_max_ub, eps)
    cap = coreset_bound(spec.k, eps, lam)
    state = _per_group_pass(dataset, stream, ctx, eps / 4.0, [cap] * spec.m)
    pool = _pool(state)
    sub = dataset.subset(pool)
    check_feasible(sub, spec)
    sol = fair_euclidean_search(sub, spec, eps=eps, delta=delta, rng=rng, lam=lam)
    lifted = sol.lift(sub, dataset)
    info = dict(lifted.info, pool_size=len(pool), per_group_cap=cap, **ctx.report())
    return Solution.build(
        dataset, lifted.selected, gamma=sol.gamma_used, trials=sol.trials, tag="stream-euclidean", info=info
    )


def _nearest(rows: list[list[float]], p: int, among: Sequence[int]) -> int | None:
    best, best_d = None, INF
    for q in sorted(among):
        if rows[p][q] < best_d:
            best, best_d = q, rows[p][q]
    return best


def two_group_candidate(
    dataset: Dataset,
    spec: FairnessSpec,
    gamma: float,
    s_all: Sequence[int],
    s_by_group: Sequence[Sequence[int]],
) -> list[int] | None:
    """Post-stream repair for one guess; None when the quotas cannot be met."""
    rows = dataset.dlist
    groups = dataset.groups.tolist()
    t = [[p for p in s_all if groups[p] == g] for g in (0, 1)]
    deficit = [len(t[g]) - spec.quotas[g] for g in (0, 1)]
    u = 0 if deficit[0] <= deficit[1] else 1
    o = 1 - u
    # u has the smaller surplus and |S| <= k, so |T_u| <= k_u here
    e_u = tau_gmm(dataset, s_by_group[u], gamma / 4, spec.quotas[u], init=t[u])
    if len(e_u) < spec.quotas[u]:
        return None
    known = set(t[u])
    removed = set()
    for p in e_u:
        if p not in known:
            q = _nearest(rows, p, t[o])
            if q is not None:
                removed.add(q)
    rest = [q for q in t[o] if q not in removed]
    if len(rest) < spec.quotas[o]:
        return None
    return e_u + rest[: spec.quotas[o]]


def fair_stream_two_groups(
    dataset: Dataset,
    stream: Iterable[int],
    spec: FairnessSpec,
    d_min_lb: float,
    d_max_ub: float,
    eps: float = 0.1,
) -> Solution:
    """Two groups with exact quotas.

    Per guess three threshold sets at ``gamma/2`` are kept: one ignoring
    groups (cap ``k``) and one per group (caps ``k_1``, ``k_2``).  Afterwards
    the under-filled group is topped up from its own set at threshold
    ``gamma/4``, and for every added point the nearest point of the other
    group is removed.  The best candidate over all guesses wins.
    """
    if dataset.m != 2 or spec.m != 2:
        raise ValueError("fair_stream_two_groups needs exactly two groups")
    check_feasible(dataset, spec)
    ctx = StreamContext(d_min_lb, d_max_ub, eps)
    rows = dataset.dlist
    groups = dataset.groups.tolist()
    k = spec.k
    s_all = {g: [] for g in ctx.guesses}
    s_grp = {g: ([], []) for g in ctx.guesses}
    for p in stream:
        grp = groups[p]
        for gamma in ctx.guesses:
            tau = gamma / 2
            held = s_all[gamma]
            if len(held) < k and _admits(rows, held, p, tau):
                held.append(p)
                ctx.hold(gamma)
            mine = s_grp[gamma][grp]
            if len(mine) < spec.quotas[grp] and _admits(rows, mine, p, tau):
                mine.append(p)
                ctx.hold(gamma)

    best: Solution | None = None
    for gamma in ctx.guesses:
        cand = two_group_candidate(dataset, spec, gamma, s_all[gamma], s_grp[gamma])
        if cand is None:
            continue
        sol = Solution.build(dataset, cand, gamma=gamma, tag="stream-two-groups")
        best = better(best, sol)
    if best is None:
        raise FairDivError("no guess produced a candidate meeting both quotas; check the distance bounds")
    sizes = {
        g: (len(s_all[g]), len(s_grp[g][0]), len(s_grp[g][1])) for g in ctx.guesses
    }
    info = dict(ctx.report(), retained_at_gamma=sizes[best.gamma_used])
    return Solution.build(dataset, best.selected, gamma=best.gamma_used, tag="stream-two-groups", info=info)
