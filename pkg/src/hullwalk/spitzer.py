"""The half-space exit functional ``R(u)`` and related persistence estimates.

``R(u) = -E<S_T, u> / sqrt(<Sigma u, u>)`` where ``T`` is the first time the
projected walk ``<S_k, u>`` becomes negative.  Two independent routes are
provided: direct simulation of the overshoot (``r_of_u_ladder``) and the
exponential of the truncated positivity series (``r_of_u_series``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hullwalk.mcharness import CHUNK, Estimate, _finish, _merge, _moments
from hullwalk.walkgen import IncrementSpec, derive_rng

__all__ = [
    "DISCARD_WARN",
    "REMAINDER_CONSTANT",
    "DirectionalWalkView",
    "angular_average_R",
    "halfspace_persistence",
    "r_of_u_ladder",
    "r_of_u_series",
    "series_allowance",
]

SQRT_HALF = 1.0 / math.sqrt(2.0)
DISCARD_WARN = 0.10
REMAINDER_CONSTANT = 2.0

# stream tags keep the routes' random numbers disjoint for the same seed
_LADDER, _SERIES, _PERSIST, _ANGLES = 11, 12, 13, 14


@dataclass(frozen=True, eq=False)
class DirectionalWalkView:
    """The one-dimensional walk ``<S_k, u>`` for a unit direction ``u``."""

    spec: IncrementSpec
    direction: np.ndarray

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.direction, dtype=float))
        if u.shape != (self.spec.d,):
            raise ValueError(f"direction must have length {self.spec.d}")
        if abs(np.linalg.norm(u) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector; use DirectionalWalkView.along")
        object.__setattr__(self, "direction", u)
        if not self.variance > 0:
            raise ValueError("projected variance must be positive")

    @classmethod
    def along(cls, spec: IncrementSpec, u) -> "DirectionalWalkView":
        """View along ``u / |u|``; only the direction of ``u`` matters."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        norm = np.linalg.norm(u)
        if norm == 0:
            raise ValueError("direction must be non-zero")
        return cls(spec, u / norm)

    @property
    def variance(self) -> float:
        u = self.direction
        return float(u @ self.spec.covariance @ u)

    def steps(self, rng: np.random.Generator, shape) -> np.ndarray:
        return self.spec.sample(rng, shape) @ self.direction


def _chunk_sizes(samples: int):
    full, rest = divmod(samples, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _overshoots(view: DirectionalWalkView, size: int, max_steps: int, rng) -> np.ndarray:
    """``-S_T / sqrt(var)`` per walk, NaN for walks still non-negative after ``max_steps``."""
    out = np.full(size, np.nan)
    pos = np.zeros(size)
    alive = np.arange(size)
    t = 0
    block = 16
    scale = math.sqrt(view.variance)
    while alive.size and t < max_steps:
        b = min(block, max_steps - t)
        path = pos[alive, None] + np.cumsum(view.steps(rng, (alive.size, b)), axis=1)
        below = path < 0
        hit = below.any(axis=1)
        first = below.argmax(axis=1)
        idx = alive[hit]
        out[idx] = -path[hit, first[hit]] / scale
        pos[alive] = path[:, -1]
        alive = alive[~hit]
        t += b
        block = min(block * 2, 4096)
    return out


def r_of_u_ladder(view: DirectionalWalkView, max_steps: int = 100_000, samples: int = 10_000,
                  seed: int = 0) -> Estimate:
    """Average normalised overshoot below zero at the first exit time.

    Walks that stay non-negative for ``max_steps`` steps are discarded; the
    discard rate is reported and a warning is attached above 10%.
    """
    if samples < 1 or max_steps < 1:
        raise ValueError("samples and max_steps must be positive")
    acc = None
    kept = 0
    for c, size in enumerate(_chunk_sizes(samples)):
        vals = _overshoots(view, size, max_steps, derive_rng(seed, _LADDER, c))
        vals = vals[~np.isnan(vals)]
        if vals.size == 0:
            continue
        kept += vals.size
        part = _moments(vals)
        acc = part if acc is None else _merge(acc, part)
    discard = 1.0 - kept / samples
    if acc is None:
        raise RuntimeError("every walk was truncated; increase max_steps")
    warnings = ()
    if discard > DISCARD_WARN:
        warnings = (f"discard rate {discard:.3f} exceeds {DISCARD_WARN}; truncation bias likely",)
    return _finish(*acc, discard_rate=discard, warnings=warnings)


def series_allowance(est: Estimate) -> float:
    """Truncation allowance on the R scale implied by the series remainder."""
    if est.remainder is None or not math.isfinite(est.remainder):
        return math.inf
    return est.mean * math.expm1(est.remainder)


def r_of_u_series(view: DirectionalWalkView, n_terms: int = 200, samples_per_term: int = 10_000,
                  seed: int = 0) -> Estimate:
    """``exp(sum_{m<=n_terms} (P(<S_m,u> > 0) - 1/2) / m) / sqrt(2)``.

    Each simulated walk of ``n_terms`` steps contributes
    ``sum_m (1{<S_m,u> > 0} - 1/2) / m``; the mean of these per-walk sums is
    an unbiased estimate of the truncated series, and the stderr is carried
    through the exponential to first order.  ``remainder`` is the heuristic
    tail size ``2 / sqrt(n_terms)`` on the series scale.  Symmetric laws make
    every term exactly zero.
    """
    if n_terms < 0:
        raise ValueError("n_terms must be non-negative")
    if n_terms == 0:
        return Estimate(SQRT_HALF, 0.0, 1, remainder=math.inf, warnings=("empty series; remainder unbounded",))
    remainder = REMAINDER_CONSTANT / math.sqrt(n_terms)
    if view.spec.symmetric:
        return Estimate(SQRT_HALF, 0.0, max(samples_per_term, 1), remainder=remainder,
                        warnings=("heuristic remainder",))
    if samples_per_term < 2:
        raise ValueError("samples_per_term must be at least 2")
    weights = 1.0 / np.arange(1, n_terms + 1)
    acc = None
    for c, size in enumerate(_chunk_sizes(samples_per_term)):
        rng = derive_rng(seed, _SERIES, c)
        walk = np.cumsum(view.steps(rng, (size, n_terms)), axis=1)
        ell = ((walk > 0) - 0.5) @ weights
        part = _moments(ell)
        acc = part if acc is None else _merge(acc, part)
    series = _finish(*acc)
    r = SQRT_HALF * math.exp(series.mean)
    return Estimate(r, r * series.stderr, series.n_samples, remainder=remainder,
                    warnings=("heuristic remainder",))


def _inverse_sqrt(cov: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(cov)
    return (v / np.sqrt(w)) @ v.T


def angular_average_R(spec: IncrementSpec, n_directions: int = 64, per_direction_budget: int = 10_000,
                      seed: int = 0, n_terms: int = 200) -> Estimate:
    """Mean of ``R(Sigma^{-1/2} U)`` over ``U`` uniform on the unit circle (series route)."""
    if spec.d != 2:
        raise ValueError("the angular average is defined here for d = 2")
    if n_directions < 1:
        raise ValueError("n_directions must be positive")
    if spec.symmetric:
        return Estimate(SQRT_HALF, 0.0, n_directions)
    rng = derive_rng(seed, _ANGLES)
    theta = rng.uniform(0.0, 2.0 * math.pi, n_directions)
    seeds = rng.integers(0, 2**63, size=n_directions)
    root = _inverse_sqrt(spec.covariance)
    values = np.empty(n_directions)
    errs = np.empty(n_directions)
    for j, t in enumerate(theta):
        view = DirectionalWalkView.along(spec, root @ np.array([math.cos(t), math.sin(t)]))
        est = r_of_u_series(view, n_terms, per_direction_budget, seed=int(seeds[j]))
        values[j], errs[j] = est.mean, est.stderr
    if n_directions == 1:
        return Estimate(float(values[0]), float(errs[0]), 1, remainder=REMAINDER_CONSTANT / math.sqrt(n_terms))
    out = Estimate.from_values(values)
    return Estimate(out.mean, out.stderr, n_directions, remainder=REMAINDER_CONSTANT / math.sqrt(n_terms))


def halfspace_persistence(view: DirectionalWalkView, n: int, samples: int, seed: int = 0) -> Estimate:
    """``P(<S_k, u> >= 0 for k = 1..n)``."""
    if n < 1 or samples < 1:
        raise ValueError("n and samples must be positive")
    acc = None
    for c, size in enumerate(_chunk_sizes(samples)):
        rng = derive_rng(seed, _PERSIST, c)
        walk = np.cumsum(view.steps(rng, (size, n)), axis=1)
        part = _moments(np.all(walk >= 0, axis=1).astype(float))
        acc = part if acc is None else _merge(acc, part)
    return _finish(*acc)
