"""Random walk and bridge trajectories from configurable increment laws.

All randomness flows through :func:`derive_rng`, which maps a master seed and
a tuple of integer keys (sample index, chunk index, retry counter, ...) to an
independent Philox stream.  Philox is counter-based, so a stream depends only
on its keys and never on how work was scheduled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BridgeKind",
    "IncrementSpec",
    "UnsupportedBridgeError",
    "WalkPath",
    "derive_rng",
    "sample_bridge",
    "sample_bridges",
    "sample_exchangeable",
    "sample_walk",
    "sample_walks",
]

SEED_MASK = (1 << 64) - 1


class UnsupportedBridgeError(ValueError):
    """Requested bridge construction is not available for the increment law."""


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return a Philox generator for ``(seed, *keys)``.

    The same arguments always give the same stream, independent of process or
    thread layout.
    """
    if seed < 0 or any(k < 0 for k in keys):
        raise ValueError("seed and stream keys must be non-negative integers")
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


class BridgeKind(str, enum.Enum):
    DIFFERENCE = "difference"
    CONDITIONAL_GAUSSIAN = "conditional-gaussian"


def _check_covariance(cov: np.ndarray) -> np.ndarray:
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError(f"covariance must be square, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise ValueError("covariance has non-finite entries")
    if not np.allclose(cov, cov.T, rtol=1e-12, atol=1e-14):
        raise ValueError("covariance must be symmetric")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError("covariance must be positive definite") from None
    return cov


@dataclass(frozen=True, eq=False)
class IncrementSpec:
    """A sampleable increment law with its symmetry, mean and covariance.

    Build instances with the classmethod constructors (:meth:`gaussian`,
    :meth:`uniform_sphere`, :meth:`uniform_cube`,
    :meth:`centered_exponential`, :meth:`scaled_mixture`) rather than calling
    the dataclass directly; they fill in the analytic mean and covariance.
    """

    kind: str
    d: int
    symmetric: bool
    mean: np.ndarray
    covariance: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        object.__setattr__(self, "covariance", _check_covariance(self.covariance))
        if self.covariance.shape != (self.d, self.d):
            raise ValueError("covariance shape does not match dimension")
        mean = np.asarray(self.mean, dtype=float).reshape(self.d)
        object.__setattr__(self, "mean", mean)

    # -- constructors -----------------------------------------------------

    @classmethod
    def gaussian(cls, cov=None, d: int | None = None) -> "IncrementSpec":
        if cov is None:
            cov = np.eye(d if d is not None else 2)
        elif np.isscalar(cov):
            cov = float(cov) * np.eye(d if d is not None else 2)
        cov = _check_covariance(cov)
        chol = np.linalg.cholesky(cov)
        return cls("gaussian", cov.shape[0], True, np.zeros(cov.shape[0]), cov, {"chol": chol})

    @classmethod
    def uniform_sphere(cls, d: int = 2, radius: float = 1.0) -> "IncrementSpec":
        # a 0-sphere is two atoms, which puts mass on affine hyperplanes
        if d < 2:
            raise ValueError("uniform-sphere needs d >= 2")
        if radius <= 0:
            raise ValueError("radius must be positive")
        cov = (radius**2 / d) * np.eye(d)
        return cls("uniform-sphere", d, True, np.zeros(d), cov, {"radius": float(radius)})

    @classmethod
    def uniform_cube(cls, d: int = 2, half_width: float = 1.0) -> "IncrementSpec":
        if half_width <= 0:
            raise ValueError("half_width must be positive")
        cov = (half_width**2 / 3.0) * np.eye(d)
        return cls("uniform-cube", d, True, np.zeros(d), cov, {"half_width": float(half_width)})

    @classmethod
    def centered_exponential(cls, rates=(1.0, 1.0)) -> "IncrementSpec":
        """Coordinates ``(E_i - 1) / rate_i`` with independent standard exponentials ``E_i``."""
        rates = np.atleast_1d(np.asarray(rates, dtype=float))
        if np.any(rates <= 0):
            raise ValueError("rates must be positive")
        cov = np.diag(1.0 / rates**2)
        return cls(
            "centered-exponential-product", rates.size, False, np.zeros(rates.size), cov,
            {"rates": rates},
        )

    @classmethod
    def scaled_mixture(cls, base: "IncrementSpec", scales=(1.0,), probs=None) -> "IncrementSpec":
        """Increments ``V * Y_k`` with one positive scale ``V`` shared by the whole path.

        ``V`` takes the values ``scales`` with probabilities ``probs``
        (uniform by default).  The increments are exchangeable but dependent
        unless the scale law is a point mass.
        """
        if base.kind == "scaled-mixture":
            raise ValueError("nested mixtures are not supported")
        scales = np.atleast_1d(np.asarray(scales, dtype=float))
        if np.any(scales <= 0):
            raise ValueError("scales must be positive")
        if probs is None:
            probs = np.full(scales.size, 1.0 / scales.size)
        probs = np.atleast_1d(np.asarray(probs, dtype=float))
        if probs.shape != scales.shape or np.any(probs < 0) or not np.isclose(probs.sum(), 1.0):
            raise ValueError("probs must be a probability vector matching scales")
        second_moment = float(np.sum(probs * scales**2))
        mean = float(np.sum(probs * scales)) * base.mean
        return cls(
            "scaled-mixture", base.d, base.symmetric, mean, second_moment * base.covariance,
            {"base": base, "scales": scales, "probs": probs},
        )

    # -- sampling ---------------------------------------------------------

    def sample(self, rng: np.random.Generator, shape=()) -> np.ndarray:
        """Draw increments with array shape ``shape + (d,)``.

        For the scaled-mixture kind the last axis of ``shape`` indexes steps
        within one path, and one scale is drawn per path.
        """
        if isinstance(shape, (int, np.integer)):
            shape = (int(shape),)
        shape = tuple(shape)
        full = shape + (self.d,)
        kind = self.kind
        if kind == "gaussian":
            return rng.standard_normal(full) @ self.params["chol"].T
        if kind == "uniform-sphere":
            z = rng.standard_normal(full)
            z /= np.linalg.norm(z, axis=-1, keepdims=True)
            return self.params["radius"] * z
        if kind == "uniform-cube":
            a = self.params["half_width"]
            return rng.uniform(-a, a, size=full)
        if kind == "centered-exponential-product":
            return (rng.standard_exponential(full) - 1.0) / self.params["rates"]
        if kind == "scaled-mixture":
            base = self.params["base"]
            y = base.sample(rng, shape)
            if not shape:
                return y * rng.choice(self.params["scales"], p=self.params["probs"])
            v = rng.choice(self.params["scales"], size=shape[:-1], p=self.params["probs"])
            return y * v[..., None, None]
        raise ValueError(f"unknown increment kind {kind!r}")

    def describe(self) -> dict:
        out = {"kind": self.kind, "d": self.d, "symmetric": self.symmetric}
        for key, val in self.params.items():
            if key == "chol":
                continue
            if key == "base":
                out["base"] = val.describe()
            else:
                out[key] = np.asarray(val).tolist()
        if self.kind == "gaussian":
            out["covariance"] = self.covariance.tolist()
        return out


@dataclass(frozen=True, eq=False)
class WalkPath:
    """Partial sums ``S_0 = 0, S_1, ..., S_n`` stored as an ``(n + 1, d)`` array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be an (n+1, d) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("path has non-finite entries")
        if np.any(pts[0] != 0):
            raise ValueError("points[0] must be the origin")
        object.__setattr__(self, "points", pts)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        return self.points.shape[0] - 1

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.points, axis=0)

    @classmethod
    def from_increments(cls, increments) -> "WalkPath":
        inc = np.asarray(increments, dtype=float)
        if inc.ndim == 1:
            inc = inc[:, None]
        pts = np.concatenate([np.zeros((1, inc.shape[1])), np.cumsum(inc, axis=0)])
        return cls(pts)


def _partial_sums(increments: np.ndarray) -> np.ndarray:
    """``(..., n, d)`` increments to ``(..., n + 1, d)`` partial sums with a zero row."""
    pad = np.zeros(increments.shape[:-2] + (1, increments.shape[-1]))
    return np.concatenate([pad, np.cumsum(increments, axis=-2)], axis=-2)


def sample_walks(spec: IncrementSpec, n: int, batch: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of walks as an array ``(batch, n + 1, d)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return _partial_sums(spec.sample(rng, (batch, n)))


def sample_walk(spec: IncrementSpec, n: int, seed: int) -> WalkPath:
    """Partial sums of ``n`` i.i.d. increments drawn from ``spec``."""
    if spec.kind == "scaled-mixture":
        raise ValueError("scaled-mixture increments are not i.i.d.; use sample_exchangeable")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = derive_rng(seed)
    return WalkPath(_partial_sums(spec.sample(rng, (n,))))


def sample_exchangeable(spec: IncrementSpec, n: int, seed: int) -> WalkPath:
    """Partial sums of exchangeable, dependent increments (scaled-mixture law)."""
    if spec.kind != "scaled-mixture":
        raise ValueError("sample_exchangeable requires a scaled-mixture spec")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = derive_rng(seed)
    return WalkPath(_partial_sums(spec.sample(rng, (1, n))[0]))


def sample_bridges(spec: IncrementSpec, n: int, batch: int, rng: np.random.Generator,
                   kind: BridgeKind | str = BridgeKind.DIFFERENCE) -> np.ndarray:
    """Batch of bridges of length ``n`` as ``(batch, n + 1, d)``; the last row is exactly zero.

    The difference bridge is ``S_k - (k/n) S_n`` of a sampled walk.  The
    conditional Gaussian bridge is built step by step from the Gaussian
    transition law given the endpoint: with ``m`` steps left,
    ``S_k | S_{k-1} = x  ~  N(x (m-1)/m, Sigma (m-1)/m)``.
    """
    kind = BridgeKind(kind)
    if n < 2:
        raise ValueError("bridges need n >= 2")
    if kind is BridgeKind.CONDITIONAL_GAUSSIAN:
        if spec.kind != "gaussian":
            raise UnsupportedBridgeError("conditional bridges are only available for gaussian increments")
        d = spec.d
        pts = np.zeros((batch, n + 1, d))
        z = rng.standard_normal((batch, n - 1, d)) @ spec.params["chol"].T
        x = np.zeros((batch, d))
        for k in range(1, n):
            m = n - k + 1
            shrink = (m - 1) / m
            x = x * shrink + np.sqrt(shrink) * z[:, k - 1]
            pts[:, k] = x
        return pts
    pts = _partial_sums(spec.sample(rng, (batch, n)))
    frac = (np.arange(n + 1) / n)[None, :, None]
    out = pts - frac * pts[:, -1:, :]
    out[:, -1] = 0.0
    return out


def sample_bridge(spec: IncrementSpec, n: int, kind: BridgeKind | str, seed: int) -> WalkPath:
    """One bridge of length ``n``: ``points[n]`` is the origin by construction."""
    rng = derive_rng(seed)
    return WalkPath(sample_bridges(spec, n, 1, rng, kind)[0])
