"""Monte Carlo estimation of hull functionals and comparison with exact values.

Samples are processed in fixed chunks of ``CHUNK`` paths.  Chunk ``c`` draws
from its own counter-based stream ``derive_rng(seed, c)``, computes
``(count, mean, M2)`` and the chunk summaries are merged left to right in
chunk order.  The chunk layout never depends on the worker count, so results
are bit-identical for any ``threads``.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from hullwalk import exactforms as ef
from hullwalk.exactforms import ExactValue
from hullwalk.hullgeom import (
    GEOMETRY_TOL,
    DegenerateHullError,
    batch_cone_3d,
    batch_opening_angle_2d,
    batch_origin_outside_2d,
    haar_frame,
    hull_2d,
    origin_outside_points,
    _hull_nd,
)
from hullwalk.walkgen import BridgeKind, IncrementSpec, _partial_sums, derive_rng, sample_bridges

__all__ = [
    "CHUNK",
    "Z_THRESHOLD",
    "ComparisonRow",
    "Estimate",
    "QUANTITIES",
    "compare",
    "crofton_intrinsic_volume",
    "default_threads",
    "distribution_freeness_test",
    "estimate",
    "exact_value",
    "two_sample_z",
]

CHUNK = 1000
Z_THRESHOLD = 4.0
MAX_RETRIES = 100
_RETRY_KEY = 1


# -- estimates ------------------------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error; ``ci95`` is ``mean +- 1.96 stderr``."""

    mean: float
    stderr: float
    n_samples: int
    discard_rate: float | None = None
    remainder: float | None = None
    degenerate: int = 0
    warnings: tuple = ()

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if not self.stderr >= 0:
            raise ValueError("stderr must be non-negative")

    @property
    def ci95(self) -> tuple:
        half = 1.96 * self.stderr
        return (self.mean - half, self.mean + half)

    @classmethod
    def from_values(cls, values, **extra) -> "Estimate":
        x = np.asarray(values, dtype=float)
        count, mean, m2 = _moments(x)
        return _finish(count, mean, m2, **extra)


def _moments(x: np.ndarray) -> tuple:
    count = x.size
    mean = float(x.mean())
    m2 = float(np.sum((x - mean) ** 2))
    return count, mean, m2


def _merge(a: tuple, b: tuple) -> tuple:
    """Chan et al. pairwise update of ``(count, mean, M2)``."""
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def _finish(count: int, mean: float, m2: float, **extra) -> Estimate:
    var = m2 / (count - 1) if count > 1 else 0.0
    return Estimate(mean, math.sqrt(max(var, 0.0) / count), count, **extra)


@dataclass(frozen=True)
class ComparisonRow:
    quantity: str
    exact: ExactValue
    estimate: Estimate

    @property
    def z(self) -> float:
        diff = self.estimate.mean - self.exact.value
        if self.estimate.stderr > 0:
            return diff / self.estimate.stderr
        return 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(self.exact.value)) else math.copysign(math.inf, diff)


def two_sample_z(a: Estimate, b: Estimate) -> float:
    se = math.hypot(a.stderr, b.stderr)
    diff = a.mean - b.mean
    if se > 0:
        return abs(diff) / se
    return 0.0 if diff == 0 else math.inf


def default_threads() -> int:
    raw = os.environ.get("HULLWALK_THREADS", "1")
    try:
        val = int(raw)
    except ValueError:
        raise ValueError(f"HULLWALK_THREADS must be an integer, got {raw!r}") from None
    if val < 1:
        raise ValueError("HULLWALK_THREADS must be >= 1")
    return val


# -- per-sample geometry helpers ---------------------------------------------------------------

def _facets(points: np.ndarray, tol: float = GEOMETRY_TOL) -> list:
    """Sorted vertex-index tuples of the facets of ``conv(points)``."""
    d = points.shape[1]
    if d == 1:
        x = points[:, 0]
        return sorted({(int(np.argmin(x)),), (int(np.argmax(x)),)})
    if d == 2:
        ring = hull_2d(points, tol)
        if len(ring) < 3:
            raise DegenerateHullError("hull is not two-dimensional")
        return sorted(tuple(sorted(e)) for e in zip(ring, ring[1:] + ring[:1]))
    return sorted(_hull_nd(points, tol)[0])


def _check_origin_consistency(points: np.ndarray, facets: list, tol: float) -> int:
    """Facets through index 0, asserting agreement with the origin-membership test."""
    at_origin = sum(1 for f in facets if f[0] == 0)
    rest = points[1:]
    if points.shape[1] == 2:
        outside = bool(batch_origin_outside_2d(rest[None])[0])
    else:
        outside = origin_outside_points(rest, tol)
    if outside != (at_origin > 0):
        raise DegenerateHullError("origin test disagrees with facet structure")
    if points.shape[1] == 2 and at_origin not in (0, 2):
        raise DegenerateHullError("planar hull has an odd number of edges at the origin")
    return at_origin


def _perimeter_area(points: np.ndarray, tol: float) -> tuple:
    ring = hull_2d(points, tol)
    if len(ring) < 3:
        raise DegenerateHullError("hull is not two-dimensional")
    p = points[ring]
    q = np.roll(p, -1, axis=0)
    area = 0.5 * abs(float(np.sum(p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0])))
    perim = float(np.sum(np.hypot(*(q - p).T)))
    return perim, area


def _volume_surface_nd(points: np.ndarray, tol: float) -> tuple:
    raw, interior = _hull_nd(points, tol)
    d = points.shape[1]
    fact = math.factorial(d)
    vol = surf = 0.0
    for verts in raw:
        v = points[list(verts)]
        vol += abs(np.linalg.det(v - interior)) / fact
        edges = v[1:] - v[0]
        surf += math.sqrt(max(np.linalg.det(edges @ edges.T), 0.0)) / math.factorial(d - 1)
    return vol, surf


def _kvolume(points: np.ndarray, tol: float) -> float:
    """Volume of the hull of points in R^k (k = number of columns)."""
    k = points.shape[1]
    if k == 1:
        return float(points[:, 0].max() - points[:, 0].min())
    if k == 2:
        return _perimeter_area(points, tol)[1]
    return _volume_surface_nd(points, tol)[0]


def _pinned_face_indicator(paths: np.ndarray, indices: tuple) -> np.ndarray:
    """Batch test: every point lies weakly on one side of the hyperplane through ``S_i``, ``i in indices``."""
    B, m, d = paths.shape
    verts = paths[:, list(indices)]
    edges = verts[:, 1:] - verts[:, :1]  # (B, d-1, d)
    normal = np.empty((B, d))
    for i in range(d):
        minor = np.delete(edges, i, axis=2)
        normal[:, i] = (-1) ** (d - 1 + i) * (np.linalg.det(minor) if d > 1 else 1.0)
    side = np.einsum("bmk,bk->bm", paths - verts[:, :1], normal)
    mask = np.ones(m, dtype=bool)
    mask[list(indices)] = False
    side = side[:, mask]
    return np.all(side >= 0, axis=1) | np.all(side <= 0, axis=1)


# -- quantity registry ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Quantity:
    """How to sample, evaluate and (when known) compute the exact value of a quantity.

    ``kernel(points, params, rng)`` maps a ``(B, m, d)`` batch to ``B``
    per-sample values.  ``per_sample`` kernels take one ``(m, d)`` array and
    may raise :class:`DegenerateHullError`, triggering a resample.
    """

    name: str
    source: str  # "walk", "bridge" (length n + 1) or "iid"
    kernel: Callable
    per_sample: bool = False
    exact: Callable | None = None
    symmetric_exact: bool = False
    requires_symmetric: bool = False
    dims: tuple | None = None
    doc: str = ""


def _k_origin_avoidance(pts, params, rng):
    rest = pts[:, 1:]
    d = pts.shape[2]
    if d == 1:
        x = rest[..., 0]
        return (np.all(x > 0, axis=1) | np.all(x < 0, axis=1)).astype(float)
    if d == 2:
        return batch_origin_outside_2d(rest).astype(float)
    return np.array([origin_outside_points(r) for r in rest], dtype=float)


def _k_bridge_origin(pts, params, rng):
    # drop the closing point S_{n+1} = 0
    return _k_origin_avoidance(pts[:, :-1], params, rng)


def _k_wendel(pts, params, rng):
    # the kernel above skips row 0 (S_0); i.i.d. points have no such row
    pad = np.zeros((pts.shape[0], 1, pts.shape[2]))
    return _k_origin_avoidance(np.concatenate([pad, pts], axis=1), params, rng)


def _k_faces(pts, params, rng):
    tol = params.get("tol", GEOMETRY_TOL)
    facets = _facets(pts, tol)
    _check_origin_consistency(pts, facets, tol)
    return float(len(facets))


def _k_faces_at_origin(pts, params, rng):
    tol = params.get("tol", GEOMETRY_TOL)
    return float(_check_origin_consistency(pts, _facets(pts, tol), tol))


def _k_bridge_faces_at_origin(pts, params, rng):
    return _k_faces_at_origin(pts[:-1], params, rng)


def _k_updates(pts, params, rng):
    B, m, d = pts.shape
    total = np.zeros(B)
    for k in range(1, m):
        shifted = pts[:, :k] - pts[:, k : k + 1]
        if d == 2:
            total += batch_origin_outside_2d(shifted)
        else:
            total += np.array([origin_outside_points(s) for s in shifted])
    return total


def _k_perimeter(pts, params, rng):
    tol = params.get("tol", GEOMETRY_TOL)
    if pts.shape[1] == 2:
        return _perimeter_area(pts, tol)[0]
    return _volume_surface_nd(pts, tol)[1]


def _k_volume(pts, params, rng):
    tol = params.get("tol", GEOMETRY_TOL)
    if pts.shape[1] == 2:
        return _perimeter_area(pts, tol)[1]
    return _volume_surface_nd(pts, tol)[0]


def _k_crofton(pts, params, rng):
    k = int(params["k"])
    frames = int(params.get("frames", 1))
    tol = params.get("tol", GEOMETRY_TOL)
    d = pts.shape[1]
    acc = 0.0
    for _ in range(frames):
        frame = haar_frame(d, k, rng)
        acc += _kvolume(pts @ frame, tol)
    return ef.crofton_constant(d, k) * acc / frames


def _k_angle_deficit(pts, params, rng):
    rest = pts[:, 1:]
    d = pts.shape[2]
    if d == 2:
        omega = batch_opening_angle_2d(rest)
        return np.maximum(math.pi - omega, 0.0)
    m_dirs = int(params.get("directions", 1000))
    out = np.empty(pts.shape[0])
    step = max(1, 20000 // max(1, m_dirs))
    for s in range(0, pts.shape[0], step):
        v = rest[s : s + step]
        u = rng.standard_normal((v.shape[0], m_dirs, 3))
        pointed, inside = batch_cone_3d(v, u)
        omega = 4.0 * math.pi * inside.mean(axis=1)
        out[s : s + step] = np.where(pointed, 2.0 * math.pi - omega, 0.0)
    return out


def _k_temporal(pts, params, rng):
    tol = params.get("tol", GEOMETRY_TOL)
    gaps = tuple(int(g) for g in params["gaps"])
    count = 0
    for f in _facets(pts, tol):
        if tuple(b - a for a, b in zip(f, f[1:])) == gaps:
            count += 1
    return float(count)


def _k_pinned(pts, params, rng):
    return _pinned_face_indicator(pts, tuple(params["indices"])).astype(float)


def _k_bridge_pinned(pts, params, rng):
    return _pinned_face_indicator(pts[:, :-1], tuple(params["indices"])).astype(float)


def _k_halfspace(pts, params, rng):
    d = pts.shape[2]
    u = np.asarray(params.get("direction", np.eye(d)[0]), dtype=float)
    u = u / np.linalg.norm(u)
    proj = pts[:, 1:] @ u
    return np.all(proj >= 0, axis=1).astype(float)


def _symmetric_2d(fn):
    def exact(spec, n, params):
        if spec.d != 2:
            raise ValueError("exact value is planar")
        return fn(n)
    return exact


def _exact_origin(spec, n, params):
    if spec.d == 1:
        # both signs of a one-dimensional persistence event
        a = ef.sparre_andersen(n)
        rational = 2 * a.rational if a.rational is not None else None
        return ExactValue(2 * a.value, rational, a.mode)
    if spec.d == 2:
        return ef.theorem1_prob(n)
    raise ValueError("exact origin-avoidance is known for d <= 2")


def _exact_updates(spec, n, params):
    if spec.d != 2:
        raise ValueError("exact update count is planar")
    # P(S_k not in conv(0, S_1, ..., S_{k-1})) equals the avoidance probability for k steps
    vals = [ef.theorem1_prob(k) for k in range(1, n + 1)]
    if all(v.rational is not None for v in vals):
        q = sum((v.rational for v in vals), Fraction(0))
        return ExactValue(float(q), q, "rational")
    return ExactValue(math.fsum(v.value for v in vals), None, "float")


def _exact_perimeter(spec, n, params):
    if spec.d == 2:
        return ef.spitzer_widom_perimeter(n, spec)
    d, sigma = ef._gaussian_scale(spec, None)
    return ExactValue(2.0 * ef.gaussian_intrinsic_volume(n, d, d - 1, sigma).value, None, "float")


def _exact_volume(spec, n, params):
    d, sigma = ef._gaussian_scale(spec, None)
    return ef.gaussian_expected_volume(n, d, sigma)


def _exact_crofton(spec, n, params):
    k = int(params["k"])
    if k == 1:
        return ef.v1_expected(n, spec.d, spec)
    d, sigma = ef._gaussian_scale(spec, None)
    return ef.gaussian_intrinsic_volume(n, d, k, sigma)


QUANTITIES: dict = {
    "origin-avoidance": Quantity(
        "origin-avoidance", "walk", _k_origin_avoidance, exact=_exact_origin, symmetric_exact=True,
        doc="1{0 not in conv(S_1..S_n)}"),
    "bridge-origin-avoidance": Quantity(
        "bridge-origin-avoidance", "bridge", _k_bridge_origin,
        exact=_symmetric_2d(ef.bridge_prob), doc="same event for a bridge of length n+1"),
    "wendel": Quantity(
        "wendel", "iid", _k_wendel, symmetric_exact=True,
        exact=lambda spec, n, p: ef.wendel_prob(n, spec.d),
        doc="1{0 not in conv(X_1..X_n)} for i.i.d. points"),
    "faces": Quantity(
        "faces", "walk", _k_faces, per_sample=True, dims=(2, 6),
        exact=lambda spec, n, p: ef.expected_faces(n, spec.d), doc="number of facets of C_n"),
    "faces-at-origin": Quantity(
        "faces-at-origin", "walk", _k_faces_at_origin, per_sample=True, dims=(2, 6), symmetric_exact=True,
        exact=lambda spec, n, p: ef.expected_faces_at_origin(n, spec.d), doc="facets through S_0"),
    "bridge-faces-at-origin": Quantity(
        "bridge-faces-at-origin", "bridge", _k_bridge_faces_at_origin, per_sample=True, dims=(2, 6),
        exact=lambda spec, n, p: ef.expected_bridge_faces_at_origin(n, spec.d),
        doc="facets through S_0 for a bridge of length n+1"),
    "updates": Quantity(
        "updates", "walk", _k_updates, exact=_exact_updates, symmetric_exact=True, dims=(2, 6),
        doc="number of k <= n with S_k outside conv(0, S_1..S_{k-1})"),
    "perimeter": Quantity(
        "perimeter", "walk", _k_perimeter, per_sample=True, dims=(2, 6), exact=_exact_perimeter,
        doc="perimeter (d=2) or surface area of C_n"),
    "volume": Quantity(
        "volume", "walk", _k_volume, per_sample=True, dims=(2, 6), exact=_exact_volume,
        doc="d-volume of C_n"),
    "vk-crofton": Quantity(
        "vk-crofton", "walk", _k_crofton, per_sample=True, exact=_exact_crofton,
        doc="Crofton estimate of V_k(C_n); params k, frames"),
    "opening-angle-deficit": Quantity(
        "opening-angle-deficit", "walk", _k_angle_deficit, dims=(2, 3), symmetric_exact=True,
        exact=lambda spec, n, p: ExactValue(
            2 * math.pi * (ef.sparre_andersen(n) if spec.d == 2 else ef.theorem1_prob(n)).value, None, "float"),
        doc="(pi - Omega)^+ for d=2, (2 pi - Omega)^+ for d=3"),
    "temporal-census": Quantity(
        "temporal-census", "walk", _k_temporal, per_sample=True, dims=(2, 6),
        exact=lambda spec, n, p: ef.face_prob_temporal_sum(n, spec.d, p["gaps"]),
        doc="number of facets with the given index gaps"),
    "pinned-face": Quantity(
        "pinned-face", "walk", _k_pinned, symmetric_exact=True, dims=(2, 6),
        exact=lambda spec, n, p: ef.face_prob_pinned(n, spec.d, p["indices"]),
        doc="1{conv(S_i, i in indices) is a facet}"),
    "bridge-pinned-face": Quantity(
        "bridge-pinned-face", "bridge", _k_bridge_pinned, dims=(2, 6),
        exact=lambda spec, n, p: ef.face_prob_bridge(n, spec.d, p["indices"]),
        doc="pinned facet indicator for a bridge of length n+1"),
    "halfspace-persistence": Quantity(
        "halfspace-persistence", "walk", _k_halfspace, symmetric_exact=True,
        exact=lambda spec, n, p: ef.sparre_andersen(n),
        doc="1{<S_k, u> >= 0 for k = 1..n}; param direction"),
}


def _validate(q: Quantity, spec: IncrementSpec, n: int, params: dict) -> None:
    if q.dims is not None and not q.dims[0] <= spec.d <= q.dims[1]:
        raise ValueError(f"quantity {q.name!r} needs {q.dims[0]} <= d <= {q.dims[1]}, got d={spec.d}")
    if q.requires_symmetric and not spec.symmetric:
        raise ValueError(f"quantity {q.name!r} requires a symmetric increment law")
    if n < 1:
        raise ValueError("n must be at least 1")
    if q.per_sample and q.name not in ("vk-crofton",) and n < spec.d:
        raise ValueError(f"hull functionals need n >= d (n={n}, d={spec.d})")
    if q.name == "vk-crofton" and not 1 <= int(params.get("k", 0)) <= spec.d:
        raise ValueError("vk-crofton needs 1 <= k <= d")
    if q.name == "opening-angle-deficit" and spec.d not in (2, 3):
        raise ValueError("opening angle is defined for d in {2, 3}")
    if q.name in ("pinned-face", "bridge-pinned-face"):
        ef._check_indices(n, spec.d, params.get("indices", ()))
    if q.name == "temporal-census" and len(params.get("gaps", ())) != spec.d - 1:
        raise ValueError(f"temporal-census needs {spec.d - 1} gaps")
    if q.source == "bridge" and spec.kind == "scaled-mixture":
        raise ValueError("bridges are built from i.i.d. increments")


def _draw(q: Quantity, spec: IncrementSpec, n: int, batch: int, rng, params: dict) -> np.ndarray:
    if q.source == "walk":
        return _partial_sums(spec.sample(rng, (batch, n)))
    if q.source == "bridge":
        return sample_bridges(spec, n + 1, batch, rng, params.get("bridge", BridgeKind.DIFFERENCE))
    return spec.sample(rng, (batch, n))


def _run_chunk(args) -> tuple:
    name, spec, n, seed, chunk, size, params = args
    q = QUANTITIES[name]
    rng = derive_rng(seed, chunk)
    pts = _draw(q, spec, n, size, rng, params)
    degenerate = 0
    if not q.per_sample:
        values = np.asarray(q.kernel(pts, params, rng), dtype=float)
    else:
        values = np.empty(size)
        for i in range(size):
            sample = pts[i]
            for attempt in range(MAX_RETRIES + 1):
                try:
                    values[i] = q.kernel(sample, params, rng)
                    break
                except DegenerateHullError:
                    if attempt == MAX_RETRIES:
                        raise
                    degenerate += 1
                    retry = derive_rng(seed, chunk, _RETRY_KEY, i, attempt)
                    sample = _draw(q, spec, n, 1, retry, params)[0]
    return _moments(values) + (degenerate,)


def _chunks(samples: int):
    full, rest = divmod(samples, CHUNK)
    sizes = [CHUNK] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def estimate(quantity: str, spec: IncrementSpec, n: int, samples: int, seed: int = 0,
             threads: int | None = None, **params) -> Estimate:
    """Monte Carlo mean of a registered quantity.

    Extra keyword ``params`` are quantity specific: ``indices``, ``gaps``,
    ``k``/``frames``, ``directions``, ``direction``, ``bridge``.
    """
    try:
        q = QUANTITIES[quantity]
    except KeyError:
        raise ValueError(f"unknown quantity {quantity!r}; known: {', '.join(sorted(QUANTITIES))}") from None
    if samples < 1:
        raise ValueError("samples must be at least 1")
    _validate(q, spec, n, params)
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    jobs = [(quantity, spec, n, seed, c, size, params) for c, size in _chunks(samples)]
    if threads == 1 or len(jobs) == 1:
        parts = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    acc = parts[0][:3]
    degenerate = parts[0][3]
    for part in parts[1:]:
        acc = _merge(acc, part[:3])
        degenerate += part[3]
    warnings = ()
    if degenerate:
        warnings = (f"{degenerate} degenerate samples resampled",)
    return _finish(*acc, degenerate=degenerate, warnings=warnings)


def crofton_intrinsic_volume(spec: IncrementSpec, n: int, k: int, samples: int,
                             frames_per_sample: int = 1, seed: int = 0,
                             threads: int | None = None) -> Estimate:
    """Estimate ``E V_k(C_n)`` by averaging projected k-volumes over Haar frames."""
    return estimate("vk-crofton", spec, n, samples, seed, threads, k=k, frames=frames_per_sample)


# settings in which a registered quantity has no exact counterpart
MC_ONLY = {
    "origin-avoidance": "d >= 3, or asymmetric laws",
    "bridge-origin-avoidance": "d != 2",
    "updates": "d != 2, or asymmetric laws",
    "perimeter": "surface area of non-Gaussian laws in d >= 3",
    "volume": "non-Gaussian laws",
    "vk-crofton": "k >= 2 with non-Gaussian laws",
    "opening-angle-deficit": "asymmetric laws",
    "pinned-face": "asymmetric laws",
    "faces-at-origin": "asymmetric laws",
    "wendel": "asymmetric laws",
    "halfspace-persistence": "asymmetric laws",
}


def exact_value(quantity: str, spec: IncrementSpec, n: int, **params) -> ExactValue:
    """Exact counterpart of a quantity, or ``ValueError`` when none is available."""
    q = QUANTITIES.get(quantity)
    if q is None:
        raise ValueError(f"unknown quantity {quantity!r}; known: {', '.join(sorted(QUANTITIES))}")
    mc_only = "; ".join(f"{k}: {v}" for k, v in sorted(MC_ONLY.items()))
    try:
        if q.symmetric_exact and not spec.symmetric:
            raise ValueError("the exact value assumes a symmetric increment law")
        return q.exact(spec, n, params)
    except ValueError as err:
        raise ValueError(f"no exact value for {quantity!r} here ({err}); Monte Carlo only: {mc_only}") from None


def compare(quantity: str, spec: IncrementSpec, n: int, samples: int, seed: int = 0,
            threads: int | None = None, **params) -> ComparisonRow:
    exact = exact_value(quantity, spec, n, **params)
    est = estimate(quantity, spec, n, samples, seed, threads, **params)
    return ComparisonRow(quantity, exact, est)


def distribution_freeness_test(quantity: str, specs: list, n: int, samples: int, seed: int = 0,
                               threads: int | None = None, **params) -> float:
    """Largest pairwise two-sample ``|z|`` between the estimates for each spec."""
    q = QUANTITIES.get(quantity)
    if q is None:
        raise ValueError(f"unknown quantity {quantity!r}")
    if not specs:
        raise ValueError("need at least one spec")
    if q.symmetric_exact and not all(s.symmetric for s in specs):
        raise ValueError(f"{quantity!r} is only distribution-free for symmetric laws")
    if len({s.d for s in specs}) != 1:
        raise ValueError("all specs must share the dimension")
    ests = [estimate(quantity, s, n, samples, seed + i, threads, **params) for i, s in enumerate(specs)]
    return max((two_sample_z(a, b) for a, b in itertools.combinations(ests, 2)), default=0.0)
