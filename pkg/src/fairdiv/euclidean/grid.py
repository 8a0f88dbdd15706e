"""Random grid shift over a coreset, then profile DP over the grid cells.

Cells have side ``W = 2 m D gamma / eps``.  After a uniformly random shift,
points within ``gamma/2`` of a cell wall are dropped, so survivors in
different cells are at least ``gamma`` apart and each cell can be solved
independently by the profile DP.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import Dataset, FairDivError, FairnessSpec, Solution, check_feasible, fallback_solution
from ..lp_rounding import trials_for
from .coreset import CoresetBundle, build_coreset
from .dp import fair_dp

Cube = tuple[int, ...]


class SearchFailedError(FairDivError):
    """No guess/shift combination produced a solution."""


def cell_width(m: int, dim: int, gamma: float, eps: float) -> float:
    return 2.0 * m * dim * gamma / eps


@dataclass
class ShiftResult:
    solution: Solution | None
    cubes: dict[Cube, list[int]] = field(default_factory=dict)
    shift: np.ndarray | None = None
    dropped: int = 0


def assign_cubes(
    coords: np.ndarray, points: list[int], shift: np.ndarray, width: float, gamma: float
) -> tuple[dict[Cube, list[int]], int]:
    """Surviving points keyed by integer cell index, plus the number dropped."""
    if not points:
        return {}, 0
    rel = coords[points] - shift
    cell = np.floor(rel / width)
    off = rel - cell * width
    half = gamma / 2
    keep = ~((off < half) | (off > width - half)).any(axis=1)
    cubes: dict[Cube, list[int]] = {}
    for p, c, ok in zip(points, cell.astype(np.int64).tolist(), keep.tolist()):
        if ok:
            cubes.setdefault(tuple(c), []).append(p)
    return dict(sorted(cubes.items())), int((~keep).sum())


def format_cubes(dataset: Dataset, cubes: dict[Cube, list[int]]) -> str:
    """Debug dump, one ``cube-index: point ids`` line per non-empty cell."""
    lines = []
    for c, pts in cubes.items():
        lines.append(f"{','.join(map(str, c))}: {' '.join(dataset.ids[p] for p in pts)}")
    return "\n".join(lines) + ("\n" if lines else "")


def fair_euclidean_shift(
    dataset: Dataset,
    bundle: CoresetBundle,
    spec: FairnessSpec,
    gamma: float,
    eps: float,
    rng: np.random.Generator,
) -> ShiftResult:
    """One random shift; see :func:`fair_euclidean`."""
    if dataset.coords is None:
        raise ValueError("grid shifting needs coordinates; the input is a distance matrix")
    dim = dataset.coords.shape[1]
    width = cell_width(spec.m, dim, gamma, eps)
    points = sorted(p for pre in bundle.prefixes(eps * gamma / 4) for p in pre)
    shift = rng.uniform(0.0, width, size=dim)
    cubes, dropped = assign_cubes(dataset.coords, points, shift, width, gamma)
    targets = spec.scaled_targets(eps)
    sol = fair_dp(dataset, list(cubes.values()), targets, gamma, caps=spec.quotas, cluster_cap=None)
    if sol is not None and sol.diversity < gamma:
        # float rounding at a cell wall; count the shift as failed
        sol = None
    if sol is not None:
        sol = Solution.build(dataset, sol.selected, gamma=gamma, tag="euclidean")
    return ShiftResult(sol, cubes, shift, dropped)


def fair_euclidean(
    dataset: Dataset,
    bundle: CoresetBundle,
    spec: FairnessSpec,
    gamma: float,
    eps: float,
    rng: np.random.Generator,
) -> Solution | None:
    """Set with diversity >= gamma and >= ceil((1-eps) k_i) points per group, or None.

    Uses the coreset prefixes at threshold ``eps*gamma/4``.  None means this
    particular shift failed; retrying with fresh randomness may succeed.
    """
    return fair_euclidean_shift(dataset, bundle, spec, gamma, eps, rng).solution


def fair_euclidean_search(
    dataset: Dataset,
    spec: FairnessSpec,
    eps: float = 0.5,
    delta: float = 0.1,
    rng: np.random.Generator | None = None,
    lam: float | None = None,
    bundle: CoresetBundle | None = None,
) -> Solution:
    """Try coreset pairwise distances from the largest down.

    Each guess gets ``ceil(log2(1/delta))`` shifts; the first success is
    returned, which is also the success at the largest guess.
    """
    if dataset.coords is None:
        raise ValueError("euclidean search needs coordinates; the input is a distance matrix")
    check_feasible(dataset, spec)
    rng = rng if rng is not None else np.random.default_rng(0)
    if spec.k <= 1:
        return fallback_solution(dataset, spec, "euclidean")
    bundle = bundle if bundle is not None else build_coreset(dataset, spec, eps, lam)
    pts = bundle.points()
    sub = dataset.matrix[np.ix_(pts, pts)]
    guesses = np.unique(sub[np.triu_indices(len(pts), k=1)])
    guesses = guesses[guesses > 0][::-1].tolist()
    shifts = trials_for(delta)
    tried = 0
    for gamma in guesses:
        for t in range(1, shifts + 1):
            tried += 1
            sol = fair_euclidean(dataset, bundle, spec, gamma, eps, rng)
            if sol is not None:
                return Solution.build(
                    dataset,
                    sol.selected,
                    gamma=gamma,
                    trials=t,
                    tag="euclidean",
                    info={"coreset_size": len(pts), "shifts_tried": tried},
                )
    if not guesses:
        return fallback_solution(dataset, spec, "euclidean")
    raise SearchFailedError(
        f"no shift succeeded over {len(guesses)} guesses x {shifts} shifts "
        f"(coreset of {len(pts)} points, smallest guess {guesses[-1]:.6g})"
    )
