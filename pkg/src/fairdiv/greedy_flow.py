"""Greedy clustering plus max-flow selection with exact quotas.

For a guess ``gamma`` the points are grouped into clusters of mutually close
points (chained within ``gamma/(m+1)``, at most one per group).  A flow
network then picks at most one point per cluster while meeting every quota.
Points in different clusters are ``gamma/(m+1)`` apart by construction, so
any full flow gives a quota-exact set with that diversity.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Literal

from .core import Dataset, FairnessSpec, Solution, check_feasible, fallback_solution
from .guessing import dataset_range, geometric_guesses, search_solutions


@dataclass(frozen=True)
class ClusterFamily:
    clusters: tuple[tuple[int, ...], ...]
    rosters: tuple[dict[int, int], ...] = field(repr=False)
    """Per cluster, group -> the member point of that group."""
    gamma: float = 0.0

    def __len__(self) -> int:
        return len(self.clusters)

    def trace(self, dataset: Dataset) -> list[str]:
        """One line per cluster listing member ids in insertion order."""
        return [" ".join(dataset.ids[i] for i in c) for c in self.clusters]


def build_clusters(dataset: Dataset, spec: FairnessSpec, gamma: float) -> ClusterFamily:
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    m, k = dataset.m, spec.k
    thr = gamma / (m + 1)
    rows = dataset.dlist
    groups = dataset.groups.tolist()
    remaining = set(range(dataset.n))
    hits = [0] * m
    clusters: list[tuple[int, ...]] = []
    rosters: list[dict[int, int]] = []
    while remaining and len(clusters) <= k * m:
        members: list[int] = []
        roster: dict[int, int] = {}
        grew = True
        while grew:
            grew = False
            for p in sorted(remaining):
                g = groups[p]
                if g in roster:
                    continue
                if not members or any(rows[p][x] < thr for x in members):
                    members.append(p)
                    roster[g] = p
                    remaining.discard(p)
                    grew = True
                    break
        remaining = {q for q in remaining if all(rows[x][q] >= thr for x in members)}
        clusters.append(tuple(members))
        rosters.append(roster)
        for g in roster:
            hits[g] += 1
        full = {g for g in range(m) if hits[g] >= k}
        if full:
            remaining = {q for q in remaining if groups[q] not in full}
    return ClusterFamily(tuple(clusters), tuple(rosters), float(gamma))


class FlowNetwork:
    """Directed graph with integer arc capacities, stored with paired residual arcs."""

    def __init__(self, n_nodes: int, source: int, sink: int) -> None:
        self.n_nodes = n_nodes
        self.source = source
        self.sink = sink
        self.heads: list[int] = []
        self.caps: list[int] = []
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]
        self.tails: list[int] = []

    def add_arc(self, u: int, v: int, cap: int) -> int:
        """Add ``u -> v``; returns the arc id (its reverse is ``id ^ 1``)."""
        aid = len(self.heads)
        for a, b, c in ((u, v, cap), (v, u, 0)):
            self.tails.append(a)
            self.heads.append(b)
            self.caps.append(int(c))
            self.adj[a].append(len(self.heads) - 1)
        return aid

    @property
    def arcs(self) -> list[tuple[int, int, int]]:
        return [(self.tails[a], self.heads[a], self.caps[a]) for a in range(0, len(self.heads), 2)]


@dataclass(frozen=True)
class FlowResult:
    value: int
    flow: tuple[int, ...]
    """Flow on each forward arc, indexed by ``arc_id // 2``."""


def max_flow(net: FlowNetwork) -> FlowResult:
    """Edmonds-Karp: repeatedly augment along a shortest residual path."""
    resid = list(net.caps)
    s, t = net.source, net.sink
    value = 0
    while True:
        via = [-1] * net.n_nodes
        seen = [False] * net.n_nodes
        seen[s] = True
        queue = deque([s])
        while queue and not seen[t]:
            u = queue.popleft()
            for a in net.adj[u]:
                v = net.heads[a]
                if resid[a] > 0 and not seen[v]:
                    seen[v] = True
                    via[v] = a
                    queue.append(v)
        if not seen[t]:
            break
        push, v = None, t
        while v != s:
            a = via[v]
            push = resid[a] if push is None else min(push, resid[a])
            v = net.tails[a]
        v = t
        while v != s:
            a = via[v]
            resid[a] -= push
            resid[a ^ 1] += push
            v = net.tails[a]
        value += push
    flow = tuple(net.caps[a] - resid[a] for a in range(0, len(resid), 2))
    return FlowResult(value, flow)


def build_network(family: ClusterFamily, spec: FairnessSpec) -> tuple[FlowNetwork, dict[int, tuple[int, int]]]:
    """Source, one node per group, one per cluster, sink.

    Returns the network and a map from group->cluster arc id to
    ``(group, cluster)``.
    """
    m, t = spec.m, len(family)
    src, sink = 0, m + t + 1
    net = FlowNetwork(m + t + 2, src, sink)
    for g in range(m):
        net.add_arc(src, 1 + g, spec.quotas[g])
    links = {}
    for g in range(m):
        for j, roster in enumerate(family.rosters):
            if g in roster:
                links[net.add_arc(1 + g, 1 + m + j, 1)] = (g, j)
    for j in range(t):
        net.add_arc(1 + m + j, sink, 1)
    return net, links


def fair_greedy_flow(
    dataset: Dataset, spec: FairnessSpec, gamma: float, family: ClusterFamily | None = None
) -> Solution | None:
    """Quota-exact set with diversity >= gamma/(m+1), or None when the flow falls short."""
    family = family if family is not None else build_clusters(dataset, spec, gamma)
    net, links = build_network(family, spec)
    res = max_flow(net)
    if res.value < spec.k:
        return None
    picks = [family.rosters[j][g] for aid, (g, j) in links.items() if res.flow[aid // 2] == 1]
    return Solution.build(
        dataset,
        picks,
        gamma=gamma,
        tag="greedy-flow",
        info={"clusters": len(family), "flow": res.value},
    )


def fair_greedy_flow_search(
    dataset: Dataset,
    spec: FairnessSpec,
    eps: float = 0.01,
    mode: Literal["scan", "binary"] = "scan",
) -> Solution:
    """Best greedy-flow solution over a ``(1+eps)`` grid of guesses.

    The grid spans the smallest positive to the largest pairwise distance.
    ``scan`` evaluates every guess; ``binary`` assumes success is monotone in
    the guess and needs only logarithmically many evaluations.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    check_feasible(dataset, spec)
    if spec.k <= 1 or dataset.n < 2:
        return fallback_solution(dataset, spec, "greedy-flow")
    try:
        lo, hi = dataset_range(dataset)
    except ValueError:
        return fallback_solution(dataset, spec, "greedy-flow")
    schedule = geometric_guesses(lo, hi, eps)
    best = search_solutions(schedule, lambda g: fair_greedy_flow(dataset, spec, g), mode)
    if best is None:
        return fallback_solution(dataset, spec, "greedy-flow")
    return best
