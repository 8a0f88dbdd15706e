"""Dense phase-1 simplex for small feasibility systems.

Finds ``x >= 0`` with ``A_le x <= b_le`` and ``A_ge x >= b_ge`` (both right-hand
sides non-negative).  Slacks start basic for the ``<=`` rows and one artificial
per ``>=`` row carries the rest, so the phase-1 objective is the sum of the
artificials.  Bland's rule makes the pivot sequence, and hence the returned
vertex, a deterministic function of the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FairDivError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9


class LPNumericalError(FairDivError):
    """The solver could not certify its answer within tolerance."""


@dataclass(frozen=True)
class Phase1Result:
    feasible: bool
    x: np.ndarray | None
    pivots: int
    residual: float


def phase1(
    a_le: np.ndarray,
    b_le: np.ndarray,
    a_ge: np.ndarray,
    b_ge: np.ndarray,
    tol: float = PIVOT_TOL,
    max_pivots: int | None = None,
) -> Phase1Result:
    a_le = np.atleast_2d(np.asarray(a_le, dtype=np.float64))
    a_ge = np.atleast_2d(np.asarray(a_ge, dtype=np.float64))
    b_le = np.asarray(b_le, dtype=np.float64).ravel()
    b_ge = np.asarray(b_ge, dtype=np.float64).ravel()
    n = max(a_le.shape[1], a_ge.shape[1])
    if a_le.size == 0:
        a_le = np.zeros((0, n))
    if a_ge.size == 0:
        a_ge = np.zeros((0, n))
    p, q = a_le.shape[0], a_ge.shape[0]
    if len(b_le) != p or len(b_ge) != q:
        raise ValueError("right-hand side length does not match the constraint rows")
    if (b_le < 0).any() or (b_ge < 0).any():
        raise ValueError("right-hand sides must be non-negative")
    if q == 0:
        return Phase1Result(True, np.zeros(n), 0, 0.0)

    # columns: x (n) | slack (p) | surplus (q) | artificial (q)
    ncol = n + p + 2 * q
    rows = p + q
    full = np.zeros((rows, ncol))
    full[:p, :n] = a_le
    full[:p, n : n + p] = np.eye(p)
    full[p:, :n] = a_ge
    full[p:, n + p : n + p + q] = -np.eye(q)
    full[p:, n + p + q :] = np.eye(q)
    rhs0 = np.concatenate([b_le, b_ge])

    tab = np.zeros((rows + 1, ncol + 1))
    tab[:rows, :ncol] = full
    tab[:rows, ncol] = rhs0
    # reduced costs of minimising the artificial sum
    tab[rows, :] = -tab[p:rows, :].sum(axis=0)
    tab[rows, n + p + q : ncol] = 0.0
    basis = list(range(n, n + p)) + list(range(n + p + q, ncol))

    limit = max_pivots if max_pivots is not None else 50 * (rows + ncol)
    pivots = 0
    while True:
        cost = tab[rows, :ncol]
        entering = np.flatnonzero(cost < -tol)
        if len(entering) == 0:
            break
        j = int(entering[0])
        col = tab[:rows, j]
        cand = np.flatnonzero(col > tol)
        if len(cand) == 0:
            # cannot happen for a bounded phase-1 objective
            raise LPNumericalError("phase-1 objective reported unbounded")
        ratios = tab[cand, ncol] / col[cand]
        best = ratios.min()
        ties = cand[ratios <= best + tol * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        tab[r] /= tab[r, j]
        piv = tab[r].copy()
        factors = tab[:, j].copy()
        factors[r] = 0.0
        tab -= np.outer(factors, piv)
        tab[:, j] = 0.0
        tab[r, j] = 1.0
        basis[r] = j
        pivots += 1
        if pivots > limit:
            raise LPNumericalError(f"no convergence after {pivots} pivots")

    residual = float(-tab[rows, ncol])
    scale = max(1.0, float(b_ge.sum()))
    if residual > FEAS_TOL * scale:
        return Phase1Result(False, None, pivots, residual)

    # Recover the vertex from the basis with a fresh solve rather than the
    # accumulated tableau, then certify it against the original rows.
    try:
        xb = np.linalg.solve(full[:, basis], rhs0)
    except np.linalg.LinAlgError as exc:
        raise LPNumericalError(f"singular basis at the final vertex: {exc}") from None
    values = np.zeros(ncol)
    values[basis] = xb
    x = values[:n]
    if (x < -FEAS_TOL).any():
        raise LPNumericalError("recovered vertex has a negative coordinate")
    x = np.where(x < 0, 0.0, x)
    le_gap = (a_le @ x - b_le).max(initial=-np.inf)
    ge_gap = (b_ge - a_ge @ x).max(initial=-np.inf)
    if le_gap > FEAS_TOL or ge_gap > FEAS_TOL:
        raise LPNumericalError(
            f"recovered vertex violates constraints by {max(le_gap, ge_gap):.3g}"
        )
    return Phase1Result(True, x, pivots, residual)
