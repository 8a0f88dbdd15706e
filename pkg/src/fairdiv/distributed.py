"""Composable coresets and a simulated two-round coordinator protocol.

Round one: every site runs a per-group farthest-point traversal on its own
points and ships the result.  Round two: the coordinator solves on the
union.  Sites are simulated in-process; the message ledger records every
point record that would cross the wire.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

import numpy as np

from .core import Dataset, FairDivError, FairnessSpec, Solution, check_feasible
from .euclidean.coreset import GmmOrdering, coreset_bound, coreset_size, gmm
from .euclidean.grid import fair_euclidean_search
from .lp_rounding import lp_pipeline
from .oracle import brute_force_opt


class PartitionError(FairDivError, ValueError):
    pass


@dataclass(frozen=True)
class LocalCoreset:
    site: int
    orderings: tuple[GmmOrdering, ...]
    group_sizes: tuple[int, ...]
    """Points of each group held by the site."""

    def points(self) -> list[int]:
        return sorted(p for o in self.orderings for p in o.order)

    def cover_radius(self, g: int) -> float:
        """Radius within which the kept set covers the site's group ``g``.

        Zero when the whole group was kept.
        """
        o = self.orderings[g]
        if len(o) == self.group_sizes[g] or len(o) == 0:
            return 0.0
        return o.radii[-1]


def local_coreset(
    dataset: Dataset,
    partition: Sequence[int],
    spec: FairnessSpec,
    eps: float,
    lam: float | None = None,
    site: int = 0,
) -> LocalCoreset:
    if len(partition) == 0:
        raise PartitionError("a site needs at least one point")
    lam = lam if lam is not None else (dataset.dim or 1)
    size = coreset_size(spec.k, eps, lam)
    mine = set(int(i) for i in partition)
    orderings, sizes = [], []
    for members in dataset.members:
        local = [p for p in members if p in mine]
        sizes.append(len(local))
        orderings.append(gmm(dataset, size, local) if local else GmmOrdering((), ()))
    return LocalCoreset(site, tuple(orderings), tuple(sizes))


@dataclass(frozen=True)
class ComposedCoreset:
    per_group: tuple[tuple[int, ...], ...]
    sites: int
    bound: int
    """Published size cap ``L * m * ceil((8/eps)**lam * k)``."""
    cover_radii: tuple[float, ...] = ()
    """Per group, the largest site cover radius ``max_j r_j^i`` (0 if no site truncated)."""

    def critical(self, eps: float, optimum: float) -> tuple[bool, ...]:
        """Groups whose cover radius is below ``(eps'/2) * optimum``."""
        cut = eps / (1 + eps) / 2 * optimum
        return tuple(r < cut for r in self.cover_radii)

    def points(self) -> list[int]:
        return sorted(p for grp in self.per_group for p in grp)

    def __len__(self) -> int:
        return sum(len(g) for g in self.per_group)


def compose(
    locals_: Sequence[LocalCoreset], spec: FairnessSpec, eps: float, lam: float
) -> ComposedCoreset:
    """Union per group; raises when two sites shipped the same point."""
    seen: dict[int, int] = {}
    m = spec.m
    per_group: list[set[int]] = [set() for _ in range(m)]
    for lc in locals_:
        for g, o in enumerate(lc.orderings):
            for p in o.order:
                if p in seen and seen[p] != lc.site:
                    raise PartitionError(f"point {p} appears at sites {seen[p]} and {lc.site}")
                seen[p] = lc.site
                per_group[g].add(p)
    radii = tuple(max((lc.cover_radius(g) for lc in locals_), default=0.0) for g in range(m))
    bound = len(locals_) * m * coreset_bound(spec.k, eps, lam)
    return ComposedCoreset(tuple(tuple(sorted(s)) for s in per_group), len(locals_), bound, radii)


def round_robin(n: int, sites: int) -> list[list[int]]:
    _check_sites(sites)
    return [list(range(s, n, sites)) for s in range(sites)]


def by_hash(ids: Sequence[str], sites: int) -> list[list[int]]:
    _check_sites(sites)
    parts: list[list[int]] = [[] for _ in range(sites)]
    for i, pid in enumerate(ids):
        parts[zlib.crc32(pid.encode()) % sites].append(i)
    return parts


def from_mapping(dataset: Dataset, mapping: Mapping[str, int]) -> list[list[int]]:
    """Partition from ``point-id -> site`` (site labels are renumbered in sorted order)."""
    missing = [pid for pid in dataset.ids if pid not in mapping]
    if missing:
        raise PartitionError(f"no site given for point(s): {', '.join(missing[:5])}")
    unknown = [pid for pid in mapping if pid not in set(dataset.ids)]
    if unknown:
        raise PartitionError(f"partition names unknown point(s): {', '.join(unknown[:5])}")
    labels = sorted(set(mapping.values()))
    slot = {lab: i for i, lab in enumerate(labels)}
    parts: list[list[int]] = [[] for _ in labels]
    for i, pid in enumerate(dataset.ids):
        parts[slot[mapping[pid]]].append(i)
    return parts


def _check_sites(sites: int) -> None:
    if sites < 1:
        raise PartitionError("need at least one site")


@dataclass
class MessageLedger:
    messages: list[dict] = field(default_factory=list)

    def send(self, site: int, records: int) -> None:
        self.messages.append({"from": site, "to": "coordinator", "point_records": records})

    @property
    def total_records(self) -> int:
        return sum(m["point_records"] for m in self.messages)


FinalSolver = Literal["brute", "fair_euclidean", "lp6"]


def two_round_solve(
    dataset: Dataset,
    partitions: Sequence[Sequence[int]],
    spec: FairnessSpec,
    eps: float = 0.5,
    final_solver: FinalSolver = "brute",
    lam: float | None = None,
    delta: float = 0.1,
    rng: np.random.Generator | None = None,
) -> Solution:
    check_feasible(dataset, spec)
    parts = [list(p) for p in partitions if len(p)]
    flat = [i for p in parts for i in p]
    if len(flat) != len(set(flat)):
        raise PartitionError("partitions overlap")
    if sorted(flat) != list(range(dataset.n)):
        raise PartitionError("partitions do not cover every point")
    lam = lam if lam is not None else (dataset.dim or 1)
    ledger = MessageLedger()
    locals_ = []
    for s, part in enumerate(parts):
        lc = local_coreset(dataset, part, spec, eps, lam, site=s)
        ledger.send(s, len(lc.points()))
        locals_.append(lc)
    union = compose(locals_, spec, eps, lam)
    pts = union.points()
    sub = dataset.subset(pts)
    check_feasible(sub, spec)
    if final_solver == "brute":
        sol = brute_force_opt(sub, spec)
    elif final_solver == "fair_euclidean":
        sol = fair_euclidean_search(sub, spec, eps=eps, delta=delta, rng=rng, lam=lam)
    elif final_solver == "lp6":
        sol = lp_pipeline(sub, spec, eps=eps, mode="concentrated6", delta=delta, rng=rng)
    else:
        raise ValueError(f"unknown final solver {final_solver!r}")
    lifted = sol.lift(sub, dataset)
    info = dict(
        lifted.info,
        sites=len(parts),
        union_size=len(pts),
        union_bound=union.bound,
        cover_radii=list(union.cover_radii),
        point_records_sent=ledger.total_records,
        messages=ledger.messages,
    )
    return Solution.build(
        dataset, lifted.selected, gamma=sol.gamma_used, trials=sol.trials, tag=f"distributed-{final_solver}", info=info
    )
