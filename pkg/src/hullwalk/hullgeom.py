"""Convex hulls of walk trajectories and their geometric functionals.

``build_hull`` uses Andrew's monotone chain in the plane and incremental
beneath-beyond insertion in higher dimensions.  Orientation tests compare
determinants normalised by the lengths of their rows against
``GEOMETRY_TOL``; a hit means ``d + 1`` points are (numerically) on one
hyperplane and :class:`DegenerateHullError` is raised so that the caller can
resample.

The ``batch_*`` functions are vectorised kernels over many paths at once,
used by the Monte Carlo harness.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from hullwalk.lpfeas import in_conic_hull, in_convex_hull
from hullwalk.walkgen import WalkPath, derive_rng

__all__ = [
    "GEOMETRY_TOL",
    "FRAME_TOL",
    "DegenerateHullError",
    "Facet",
    "HullSummary",
    "batch_cone_3d",
    "batch_opening_angle_2d",
    "batch_origin_outside_2d",
    "build_hull",
    "haar_frame",
    "hull_2d",
    "opening_angle",
    "origin_membership",
    "origin_outside_points",
    "project_hull",
    "simplex_volume",
    "temporal_census",
    "update_flags",
]

GEOMETRY_TOL = 1e-9
FRAME_TOL = 1e-12
TWO_PI = 2.0 * math.pi


class DegenerateHullError(ValueError):
    """Points are not in general position within the geometry tolerance."""


@dataclass(frozen=True)
class Facet:
    """A (d-1)-face given by sorted indices into the path's points.

    ``outward_sign`` is +1 when the hull lies in the half-space where
    ``det[v_2 - v_1, ..., v_d - v_1, z - v_1] >= 0`` and -1 otherwise.
    """

    vertex_indices: tuple
    outward_sign: int = 1

    @property
    def gaps(self) -> tuple:
        v = self.vertex_indices
        return tuple(b - a for a, b in zip(v, v[1:]))


@dataclass(eq=False)
class HullSummary:
    """Geometric readout of ``C_n = conv(S_0, ..., S_n)`` for one path.

    ``opening_angle`` and ``updates`` are computed on first access.
    """

    path: WalkPath
    facets: list
    facets_at_origin: int
    origin_outside: bool
    volume: float
    surface_area: float
    n_directions: int = 1000
    seed: int = 0
    tol: float = field(default=GEOMETRY_TOL, repr=False)

    @cached_property
    def opening_angle(self) -> float:
        return opening_angle(self.path, self.n_directions, self.seed, self.tol)

    @cached_property
    def updates(self) -> np.ndarray:
        return update_flags(self.path, self.tol)


# -- predicates ---------------------------------------------------------------

def _normalized_det(rows: np.ndarray) -> float:
    norms = np.linalg.norm(rows, axis=1)
    scale = float(np.prod(norms))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.det(rows)) / scale


def simplex_volume(vertices: np.ndarray) -> float:
    """k-volume of the simplex spanned by ``k + 1`` vertices in R^d (Gram determinant)."""
    v = np.asarray(vertices, dtype=float)
    edges = v[1:] - v[0]
    k = edges.shape[0]
    if k == 0:
        return 1.0
    gram = edges @ edges.T
    return math.sqrt(max(np.linalg.det(gram), 0.0)) / math.factorial(k)


# -- origin membership ----------------------------------------------------------

def origin_outside_points(points: np.ndarray, tol: float = GEOMETRY_TOL) -> bool:
    """True iff the origin is not a convex combination of the rows of ``points``."""
    return not in_convex_hull(points, tol=tol)


def origin_membership(path: WalkPath, tol: float = GEOMETRY_TOL) -> bool:
    """True iff ``0`` is not in ``conv(S_1, ..., S_n)`` (``S_0`` is excluded)."""
    if path.n < 1:
        raise ValueError("need n >= 1")
    return origin_outside_points(path.points[1:], tol)


def update_flags(path: WalkPath, tol: float = GEOMETRY_TOL) -> np.ndarray:
    """``flag[k-1] = S_k not in conv(0, S_1, ..., S_{k-1})`` for ``k = 1..n``."""
    if path.n < 1:
        raise ValueError("need n >= 1")
    pts = path.points
    flags = np.empty(path.n, dtype=bool)
    for k in range(1, path.n + 1):
        flags[k - 1] = origin_outside_points(pts[:k] - pts[k], tol)
    return flags


# -- opening angle ----------------------------------------------------------------

def _opening_angle_2d(vectors: np.ndarray) -> float:
    theta = np.sort(np.arctan2(vectors[:, 1], vectors[:, 0]))
    gaps = np.diff(np.concatenate([theta, [theta[0] + TWO_PI]]))
    g = float(gaps.max())
    return TWO_PI if g <= math.pi else TWO_PI - g


def opening_angle(path: WalkPath, n_directions: int = 1000, seed: int = 0,
                  tol: float = GEOMETRY_TOL) -> float:
    """Angle of the cone spanned by ``S_1, ..., S_n`` as seen from the origin.

    Planar paths get the exact arc angle (``2 pi`` when the origin is
    interior).  In R^3 the solid angle is estimated as ``4 pi`` times the
    fraction of ``n_directions`` uniform directions that lie in the conic
    hull; each membership is a phase-one feasibility problem.
    """
    if path.n < 1:
        raise ValueError("need n >= 1")
    vec = path.points[1:]
    if path.d == 2:
        return _opening_angle_2d(vec)
    if path.d == 3:
        rng = derive_rng(seed)
        u = rng.standard_normal((n_directions, 3))
        hits = sum(in_conic_hull(vec, ui, tol) for ui in u)
        return 4.0 * math.pi * hits / n_directions
    raise ValueError("opening angle is only defined here for d in {2, 3}")


# -- planar hull ----------------------------------------------------------------------

def hull_2d(points, tol: float = GEOMETRY_TOL) -> list:
    """Indices of hull vertices in counter-clockwise order (Andrew's monotone chain)."""
    pts = points.tolist() if isinstance(points, np.ndarray) else list(points)
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))

    def turn(o, a, b):
        ox, oy = pts[o]
        ax, ay = pts[a][0] - ox, pts[a][1] - oy
        bx, by = pts[b][0] - ox, pts[b][1] - oy
        cross = ax * by - ay * bx
        scale = math.hypot(ax, ay) * math.hypot(bx, by)
        if abs(cross) <= tol * scale:
            raise DegenerateHullError(f"points {o}, {a}, {b} are collinear within tolerance")
        return cross

    lower: list = []
    for i in order:
        while len(lower) >= 2 and turn(lower[-2], lower[-1], i) < 0:
            lower.pop()
        lower.append(i)
    upper: list = []
    for i in reversed(order):
        while len(upper) >= 2 and turn(upper[-2], upper[-1], i) < 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def _summary_2d(pts: np.ndarray, tol: float):
    ring = hull_2d(pts, tol)
    facets = []
    area2 = 0.0
    perim = 0.0
    m = len(ring)
    for a, b in zip(ring, ring[1:] + ring[:1]):
        pa, pb = pts[a], pts[b]
        area2 += pa[0] * pb[1] - pa[1] * pb[0]
        perim += math.hypot(pb[0] - pa[0], pb[1] - pa[1])
        lo, hi = (a, b) if a < b else (b, a)
        # ring is counter-clockwise, so the hull is on the left of a -> b;
        # det[v_hi - v_lo, z - v_lo] >= 0 on the hull side iff lo comes first
        facets.append(Facet((lo, hi), 1 if lo == a else -1))
    if m < 3:
        raise DegenerateHullError("hull is not two-dimensional")
    return facets, 0.5 * abs(area2), perim


# -- beneath-beyond ---------------------------------------------------------------------

def _hyperplane(vertices: np.ndarray, interior: np.ndarray):
    """Unit normal pointing away from ``interior`` and offset of the hyperplane through ``vertices``."""
    edges = vertices[1:] - vertices[0]
    normal = np.linalg.svd(edges)[2][-1]
    offset = float(normal @ vertices[0])
    if normal @ interior - offset > 0:
        normal, offset = -normal, -offset
    return normal, offset


def _initial_simplex(pts: np.ndarray, tol: float) -> list:
    d = pts.shape[1]
    chosen = [0]
    for _ in range(d):
        base = pts[chosen[0]]
        span = (pts[chosen[1:]] - base).T if len(chosen) > 1 else np.zeros((d, 0))
        rel = pts - base
        if span.shape[1]:
            q, _ = np.linalg.qr(span)
            resid = rel - (rel @ q) @ q.T
        else:
            resid = rel
        dist = np.linalg.norm(resid, axis=1)
        scale = np.linalg.norm(rel, axis=1)
        ratio = np.divide(dist, scale, out=np.zeros_like(dist), where=scale > 0)
        best = int(np.argmax(dist))
        if ratio[best] <= tol:
            raise DegenerateHullError("points do not span R^d")
        chosen.append(best)
    return chosen


def _hull_nd(pts: np.ndarray, tol: float):
    m, d = pts.shape
    simplex = _initial_simplex(pts, tol)
    interior = pts[simplex].mean(axis=0)
    facets: dict = {}
    for drop in range(d + 1):
        verts = tuple(sorted(simplex[:drop] + simplex[drop + 1:]))
        facets[verts] = _hyperplane(pts[list(verts)], interior)

    in_simplex = set(simplex)
    for p in range(m):
        if p in in_simplex:
            continue
        x = pts[p]
        keys = list(facets)
        normals = np.array([facets[k][0] for k in keys])
        offsets = np.array([facets[k][1] for k in keys])
        anchors = pts[[k[0] for k in keys]]
        dist = normals @ x - offsets
        reach = np.linalg.norm(x - anchors, axis=1)
        rel = dist / np.where(reach > 0, reach, 1.0)
        if np.any(np.abs(rel) <= tol):
            raise DegenerateHullError(f"point {p} lies on a facet hyperplane within tolerance")
        visible = [k for k, r in zip(keys, rel) if r > 0]
        if not visible:
            continue
        ridges = Counter()
        for k in visible:
            for ridge in itertools.combinations(k, d - 1):
                ridges[ridge] += 1
        for k in visible:
            del facets[k]
        for ridge, count in ridges.items():
            if count == 1:
                verts = tuple(sorted(ridge + (p,)))
                facets[verts] = _hyperplane(pts[list(verts)], interior)
    return facets, interior


def _facet_sign(pts: np.ndarray, verts: tuple, interior: np.ndarray) -> int:
    v = pts[list(verts)]
    rows = np.vstack([v[1:] - v[0], interior - v[0]])
    return 1 if np.linalg.det(rows) > 0 else -1


def build_hull(path: WalkPath, tol: float = GEOMETRY_TOL, n_directions: int = 1000,
               seed: int = 0) -> HullSummary:
    """Facets, volume, surface area and origin data of ``conv(S_0, ..., S_n)``."""
    pts = path.points
    d = path.d
    if path.n < d:
        raise ValueError(f"need n >= d (n={path.n}, d={d})")
    if d == 1:
        x = pts[:, 0]
        lo, hi = int(np.argmin(x)), int(np.argmax(x))
        facets = [Facet((lo,), 1), Facet((hi,), -1)]
        volume, surface = float(x[hi] - x[lo]), 2.0
    elif d == 2:
        facets, volume, surface = _summary_2d(pts, tol)
    else:
        raw, interior = _hull_nd(pts, tol)
        facets = []
        volume = 0.0
        surface = 0.0
        fact = math.factorial(d)
        for verts in sorted(raw):
            v = pts[list(verts)]
            facets.append(Facet(verts, _facet_sign(pts, verts, interior)))
            volume += abs(np.linalg.det(v - interior)) / fact
            surface += simplex_volume(v)
        facets.sort(key=lambda f: f.vertex_indices)
    facets = sorted(facets, key=lambda f: f.vertex_indices)
    at_origin = sum(1 for f in facets if f.vertex_indices[0] == 0)
    outside = origin_membership(path, tol)
    if outside != (at_origin > 0):
        raise DegenerateHullError("origin test disagrees with facet structure; configuration is near-degenerate")
    return HullSummary(path, facets, at_origin, outside, float(volume), float(surface),
                       n_directions, seed, tol)


def temporal_census(summary: HullSummary) -> Counter:
    """Count facets by their consecutive index gaps ``(i_2 - i_1, ..., i_d - i_{d-1})``."""
    return Counter(f.gaps for f in summary.facets)


# -- projections ----------------------------------------------------------------------------

def haar_frame(d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal ``d x k`` frame whose span is Haar-distributed on the Grassmannian."""
    g = rng.standard_normal((d, k))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def project_hull(path: WalkPath, frame: np.ndarray) -> WalkPath:
    """Coordinates of every ``S_i`` in the orthonormal ``d x k`` frame."""
    frame = np.asarray(frame, dtype=float)
    if frame.ndim != 2 or frame.shape[0] != path.d or frame.shape[1] > path.d:
        raise ValueError(f"frame must be d x k with k <= d, got {frame.shape}")
    gram = frame.T @ frame
    if np.max(np.abs(gram - np.eye(frame.shape[1]))) > FRAME_TOL:
        raise ValueError("frame columns are not orthonormal")
    return WalkPath(path.points @ frame)


# -- vectorised kernels -------------------------------------------------------------------------

def _cone_sweep_2d(vectors: np.ndarray):
    """Smallest cone containing each row's vectors: returns (width, covered) per path.

    ``vectors`` has shape ``(B, m, 2)``.  A path is covered when no half-plane
    contains all its vectors, i.e. the origin is in the interior of their hull.
    """
    theta = np.arctan2(vectors[..., 1], vectors[..., 0])
    lo = theta[:, 0].copy()
    width = np.zeros(theta.shape[0])
    covered = np.zeros(theta.shape[0], dtype=bool)
    for k in range(1, theta.shape[1]):
        t = theta[:, k]
        r = np.mod(t - lo, TWO_PI)
        out = r > width
        back = width + (TWO_PI - r)
        ccw = r <= back
        new_width = np.where(out, np.minimum(r, back), width)
        lo = np.where(out & ~ccw, t, lo)
        width = new_width
        covered |= width > math.pi
    return width, covered


def batch_origin_outside_2d(vectors: np.ndarray) -> np.ndarray:
    """``0 not in conv(rows)`` for each planar point set in a ``(B, m, 2)`` batch."""
    return ~_cone_sweep_2d(vectors)[1]


def batch_opening_angle_2d(vectors: np.ndarray) -> np.ndarray:
    """Exact planar opening angle for each path in a ``(B, m, 2)`` batch."""
    width, covered = _cone_sweep_2d(vectors)
    return np.where(covered, TWO_PI, width)


def batch_cone_3d(vectors: np.ndarray, directions: np.ndarray):
    """Conic hull tests in R^3 for a batch.

    ``vectors`` is ``(B, m, 3)`` and ``directions`` is ``(B, M, 3)``.
    Returns ``(pointed, inside)`` where ``pointed[b]`` says the cone is
    line-free (origin outside the hull of the vectors) and
    ``inside[b, j]`` says direction ``j`` lies in the cone.  Cone facets are
    the planes through pairs of generators that leave all other generators
    on one side.
    """
    B, m, _ = vectors.shape
    pairs = list(itertools.combinations(range(m), 2))
    i_idx = np.array([p[0] for p in pairs])
    j_idx = np.array([p[1] for p in pairs])
    normals = np.cross(vectors[:, i_idx], vectors[:, j_idx])  # (B, P, 3)
    side = np.einsum("bpk,bmk->bpm", normals, vectors)
    own = np.zeros((len(pairs), m), dtype=bool)
    own[np.arange(len(pairs)), i_idx] = True
    own[np.arange(len(pairs)), j_idx] = True
    pos = np.all((side > 0) | own, axis=2)
    neg = np.all((side < 0) | own, axis=2)
    is_facet = pos | neg
    oriented = normals * np.where(neg, -1.0, 1.0)[..., None]
    pointed = is_facet.any(axis=1)
    dots = np.einsum("bpk,bjk->bpj", oriented, directions)
    inside = np.all((dots >= 0) | ~is_facet[..., None], axis=1)
    return pointed, inside
