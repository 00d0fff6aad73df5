"""Deterministic checkers for the cyclic-shift lemmas behind the face probabilities.

Everything here acts on a single fixed configuration, so the outputs are
exact counts rather than estimates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from hullwalk.walkgen import WalkPath

__all__ = [
    "BOUNDARY_TOL",
    "DegenerateConfigurationError",
    "HalfSpace",
    "PointSequence",
    "block_shift_family",
    "bridge_fraction_oracle",
    "check_lemma",
    "cycle_lemma_witness",
    "family_size",
    "halfspace_fraction_oracle",
    "random_cycle_configuration",
    "shifted_sums",
    "valid_shifts",
]

BOUNDARY_TOL = 1e-9


class DegenerateConfigurationError(ValueError):
    """A configuration violates the genericity needed by the lemma."""


@dataclass(frozen=True, eq=False)
class PointSequence:
    """A base point ``x_0`` followed by increments ``x_1, ..., x_n``."""

    base: np.ndarray
    increments: np.ndarray

    def __post_init__(self):
        base = np.atleast_1d(np.asarray(self.base, dtype=float))
        inc = np.asarray(self.increments, dtype=float)
        if inc.ndim == 1:
            inc = inc[:, None]
        if inc.ndim != 2 or inc.shape[0] < 1 or inc.shape[1] != base.size:
            raise ValueError("increments must be an (n, d) array with n >= 1 matching the base point")
        if not (np.all(np.isfinite(base)) and np.all(np.isfinite(inc))):
            raise ValueError("entries must be finite")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "increments", inc)

    @property
    def n(self) -> int:
        return self.increments.shape[0]

    @property
    def d(self) -> int:
        return self.base.size


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """Closed half-space ``{z : <z, normal> >= offset}``."""

    normal: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        normal = np.atleast_1d(np.asarray(self.normal, dtype=float))
        if abs(np.linalg.norm(normal) - 1.0) > 1e-12:
            raise ValueError("normal must be a unit vector")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    def signed_distance(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float) @ self.normal - self.offset


def shifted_sums(seq: PointSequence, k: int) -> np.ndarray:
    """``x_0, x_0 + s_1(sigma), ..., x_0 + s_n(sigma)`` for ``sigma = (k+1, ..., n, 1, ..., k)``."""
    inc = np.roll(seq.increments, -k, axis=0)
    return seq.base + np.vstack([np.zeros(seq.d), np.cumsum(inc, axis=0)])


def _check_cycle_preconditions(seq: PointSequence, H: HalfSpace, tol: float) -> None:
    scale = max(1.0, float(np.abs(seq.base).max()), float(np.abs(seq.increments).sum(axis=0).max()))
    end = seq.base + seq.increments.sum(axis=0)
    if abs(H.signed_distance(seq.base)) > tol * scale or abs(H.signed_distance(end)) > tol * scale:
        raise DegenerateConfigurationError("x_0 and x_0 + s_n must lie on the boundary hyperplane")
    sums = np.vstack([np.zeros(seq.d), np.cumsum(seq.increments, axis=0)])[: seq.n]
    i, j = np.triu_indices(seq.n, k=1)
    diff = sums[j] - sums[i]
    length = np.linalg.norm(diff, axis=1)
    along = np.abs(diff @ H.normal)
    if np.any(along <= tol * np.maximum(length, 1e-300)):
        raise DegenerateConfigurationError("a partial-sum difference is parallel to the boundary")


def cycle_lemma_witness(seq: PointSequence, H: HalfSpace, tol: float = BOUNDARY_TOL) -> int:
    """The unique cyclic shift ``k`` whose partial sums all stay in ``H``.

    Among ``x_0 + s_i`` (``0 <= i <= n - 1``) that are not strictly inside
    ``H``, the one farthest from the boundary marks where the rotation starts.
    """
    _check_cycle_preconditions(seq, H, tol)
    sums = seq.base + np.vstack([np.zeros(seq.d), np.cumsum(seq.increments, axis=0)])[: seq.n]
    return int(np.argmin(H.signed_distance(sums)))


def valid_shifts(seq: PointSequence, H: HalfSpace, tol: float = BOUNDARY_TOL) -> list:
    """Exhaustive scan: every cyclic shift whose partial sums lie in ``H``."""
    out = []
    scale = max(1.0, float(np.abs(shifted_sums(seq, 0)).max()))
    for k in range(seq.n):
        if np.all(H.signed_distance(shifted_sums(seq, k)) >= -tol * scale):
            out.append(k)
    return out


# -- permutation families ---------------------------------------------------------------

def block_shift_family(bounds) -> list:
    """All products of cyclic shifts within the blocks ``(b_{j-1}, b_j]``.

    ``bounds = (0, b_1, ..., b_m)``; each permutation is returned as a list of
    0-based increment positions of length ``b_m``.
    """
    blocks = [list(range(a, b)) for a, b in zip(bounds, bounds[1:])]
    family = []
    for shifts in itertools.product(*(range(len(b)) for b in blocks)):
        perm = []
        for block, s in zip(blocks, shifts):
            perm.extend(block[s:] + block[:s])
        family.append(perm)
    return family


def _normal_from_points(points: np.ndarray, tol: float) -> np.ndarray:
    """Cofactor vector ``c`` with ``det[p_1, ..., p_{d-1}, z] = <c, z>``."""
    d = points.shape[1]
    c = np.empty(d)
    for i in range(d):
        minor = np.delete(points, i, axis=1)
        c[i] = (-1) ** (d - 1 + i) * np.linalg.det(minor)
    scale = float(np.prod(np.linalg.norm(points, axis=1)))
    if scale == 0.0 or np.linalg.norm(c) <= tol * scale:
        raise DegenerateConfigurationError("the anchor points do not span a unique hyperplane")
    return c / np.linalg.norm(c)


def _census(increments: np.ndarray, bounds: tuple, anchors: tuple, check_upto: int,
            tol: float) -> tuple:
    d = increments.shape[1]
    sums = np.vstack([np.zeros(d), np.cumsum(increments, axis=0)])
    normal = _normal_from_points(sums[list(anchors)], tol)
    family = block_shift_family(bounds)
    on_boundary = set(bounds)
    plus = minus = 0
    for perm in family:
        ps = np.cumsum(increments[perm], axis=0)
        pts = ps[:check_upto]
        side = pts @ normal
        length = np.linalg.norm(pts, axis=1)
        free = np.array([(k + 1) not in on_boundary for k in range(check_upto)], dtype=bool)
        if np.any(np.abs(side[free]) <= tol * np.maximum(length[free], 1e-300)):
            raise DegenerateConfigurationError("a permuted partial sum lies on the hyperplane")
        if np.all(side[free] > 0):
            plus += 1
        if np.all(side[free] < 0):
            minus += 1
    size = len(family)
    return Fraction(plus, size), Fraction(minus, size)


def _increasing(indices, lo: int, hi: int, count: int) -> tuple:
    idx = tuple(int(i) for i in indices)
    if len(idx) != count:
        raise ValueError(f"expected {count} indices, got {len(idx)}")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError("indices must be strictly increasing")
    if idx and (idx[0] < lo or idx[-1] > hi):
        raise ValueError(f"indices must lie in [{lo}, {hi}]")
    return idx


def halfspace_fraction_oracle(path: WalkPath, indices=(), tol: float = BOUNDARY_TOL) -> tuple:
    """Fractions of the block-shift family keeping ``S_1..S_n`` in ``H_+`` and in ``H_-``.

    ``H_pm = {z : pm det[S_{i_1}, ..., S_{i_{d-2}}, S_n, z] >= 0}``.  The blocks
    are ``(0, i_1], (i_1, i_2], ..., (i_{d-2}, n]``; anchor points, which every
    shift preserves, are not tested.  Generic paths give ``1 / |family|`` for
    each sign.
    """
    d, n = path.d, path.n
    if d < 2:
        raise ValueError("need d >= 2")
    idx = _increasing(indices, 1, n - 1, d - 2)
    bounds = (0,) + idx + (n,)
    return _census(path.increments, bounds, idx + (n,), n, tol)


def bridge_fraction_oracle(bridge: WalkPath, indices, tol: float = BOUNDARY_TOL) -> tuple:
    """Bridge version: ``bridge.points`` is ``S_0, ..., S_n, S_{n+1} = 0``.

    ``H_pm = {z : pm det[S_{i_1}, ..., S_{i_{d-1}}, z] >= 0}`` and the family
    rotates the ``d`` blocks ``(0, i_1], ..., (i_{d-1}, n+1]``.  Only
    ``S_1, ..., S_n`` are tested.
    """
    d = bridge.d
    n = bridge.n - 1
    if d < 2:
        raise ValueError("need d >= 2")
    if np.any(bridge.points[-1] != 0.0):
        raise ValueError("bridge must return to the origin at its last point")
    idx = _increasing(indices, 1, n, d - 1)
    bounds = (0,) + idx + (n + 1,)
    return _census(bridge.increments, bounds, idx, n, tol)


def family_size(n: int, indices, bridge: bool = False) -> int:
    """``|family| = i_1 (i_2 - i_1) ... (end - i_last)`` with end ``n`` or ``n + 1``."""
    end = n + 1 if bridge else n
    bounds = (0,) + tuple(indices) + (end,)
    return math.prod(b - a for a, b in zip(bounds, bounds[1:]))


# -- randomized drivers -------------------------------------------------------------------------

def random_cycle_configuration(d: int, n: int, rng: np.random.Generator) -> tuple:
    """Gaussian increments projected so that ``s_n`` is parallel to a random boundary."""
    if d == 1:
        normal = np.array([rng.choice((-1.0, 1.0))])
    else:
        normal = rng.standard_normal(d)
        normal /= np.linalg.norm(normal)
    base = rng.standard_normal(d)
    inc = rng.standard_normal((n, d))
    inc -= np.outer(np.full(n, (inc.sum(axis=0) @ normal) / n), normal)
    return PointSequence(base, inc), HalfSpace(normal, float(base @ normal))


def check_lemma(lemma: int, d: int, n: int, trials: int, seed: int = 0) -> int:
    """Number of random configurations on which the lemma's conclusion fails."""
    from hullwalk.walkgen import IncrementSpec, derive_rng, sample_bridges

    failures = 0
    for t in range(trials):
        rng = derive_rng(seed, lemma, t)
        if lemma == 1:
            seq, H = random_cycle_configuration(d, n, rng)
            k = cycle_lemma_witness(seq, H)
            failures += valid_shifts(seq, H) != [k]
            continue
        spec = IncrementSpec.gaussian(d=d)
        if lemma == 2:
            if n < d - 1:
                raise ValueError("need n >= d - 1")
            idx = tuple(sorted(rng.choice(np.arange(1, n), size=d - 2, replace=False).tolist()))
            path = WalkPath(np.vstack([np.zeros(d), np.cumsum(spec.sample(rng, (n,)), axis=0)]))
            target = Fraction(1, family_size(n, idx))
            fracs = halfspace_fraction_oracle(path, idx)
        elif lemma == 3:
            if n < d - 1:
                raise ValueError("need n >= d - 1")
            idx = tuple(sorted(rng.choice(np.arange(1, n + 1), size=d - 1, replace=False).tolist()))
            path = WalkPath(sample_bridges(spec, n + 1, 1, rng)[0])
            target = Fraction(1, family_size(n, idx, bridge=True))
            fracs = bridge_fraction_oracle(path, idx)
        else:
            raise ValueError("lemma must be 1, 2 or 3")
        failures += fracs != (target, target)
    return failures
