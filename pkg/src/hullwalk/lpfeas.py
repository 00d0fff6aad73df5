"""Dense phase-one simplex for small linear feasibility problems.

Only feasibility of ``A x = b, x >= 0`` is needed here (is the origin a convex
combination of some points, is a direction a conic combination of some
vectors), so there is no phase two.  Problems have at most a few hundred
columns and ``d + 1`` rows.
"""

from __future__ import annotations

import numpy as np

__all__ = ["InfeasibleProblem", "phase_one", "in_convex_hull", "in_conic_hull"]


class InfeasibleProblem(Exception):
    pass


def phase_one(A: np.ndarray, b: np.ndarray, tol: float = 1e-9, max_iter: int = 10_000):
    """Minimise the sum of artificial variables for ``A x = b, x >= 0``.

    Returns ``(residual, x)`` where ``residual`` is the optimal sum of
    artificials (zero, up to ``tol``, iff the system is feasible).  Bland's
    rule is used for both the entering and the leaving variable, so the
    iteration cannot cycle.
    """
    A = np.array(A, dtype=float, copy=True)
    b = np.array(b, dtype=float, copy=True)
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[m, :n] = -A.sum(axis=0)
    tab[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    for _ in range(max_iter):
        cost = tab[m, : n + m]
        entering = np.flatnonzero(cost < -tol)
        if entering.size == 0:
            break
        q = int(entering[0])
        col = tab[:m, q]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:  # unbounded direction; cannot happen in phase one
            break
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        p = int(min(ties, key=lambda r: basis[r]))
        tab[p] /= tab[p, q]
        others = np.arange(m + 1) != p
        tab[others] -= np.outer(tab[others, q], tab[p])
        basis[p] = q
    else:
        raise RuntimeError("phase-one simplex did not terminate")

    x = np.zeros(n + m)
    x[basis] = tab[:m, -1]
    return float(-tab[m, -1]), x[:n]


def in_convex_hull(points: np.ndarray, target=None, tol: float = 1e-9) -> bool:
    """Is ``target`` (default: origin) a convex combination of ``points`` (rows)?"""
    pts = np.asarray(points, dtype=float)
    if target is not None:
        pts = pts - np.asarray(target, dtype=float)
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms <= tol * max(1.0, norms.max(initial=0.0))):
        return True
    # 0 in conv(P) iff sum lambda_i p_i = 0 for some nonzero lambda >= 0, which
    # is invariant under positive rescaling of each p_i
    unit = pts / norms[:, None]
    A = np.vstack([unit.T, np.ones(len(unit))])
    b = np.zeros(A.shape[0])
    b[-1] = 1.0
    residual, _ = phase_one(A, b, tol=tol * 1e-3)
    return residual <= tol


def in_conic_hull(vectors: np.ndarray, direction, tol: float = 1e-9) -> bool:
    """Is ``direction`` a non-negative combination of ``vectors`` (rows)?"""
    vec = np.asarray(vectors, dtype=float)
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    unit = vec / np.linalg.norm(vec, axis=1)[:, None]
    residual, _ = phase_one(unit.T, u, tol=tol * 1e-3)
    return residual <= tol
