"""Closed-form and asymptotic quantities for convex hulls of random walks.

Every finite formula is available in two modes:

``"float"``
    log-space double-factorial kernel and compensated summation
    (:func:`math.fsum`), usable for ``n`` in the millions;
``"rational"``
    exact :class:`fractions.Fraction` arithmetic, offered for ``n <= 64``.

``mode="auto"`` (the default) picks rational whenever it is available.

Notation used below: ``a_m = (2m-1)!!/(2m)!!`` with ``(-1)!! = 0!! = 1``, so
``a_0 = 1``, and ``h_m(J) = sum over compositions j_1 + ... + j_m = J (all
j_i >= 1) of 1/(j_1 ... j_m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate, signal

__all__ = [
    "AsymptoticValue",
    "ExactValue",
    "RATIONAL_MAX_N",
    "ASYMPTOTIC_FORMULAS",
    "asymptotic",
    "bridge_prob",
    "crofton_constant",
    "double_factorial_ratio",
    "expected_bridge_faces_at_origin",
    "expected_faces",
    "expected_faces_at_origin",
    "face_prob_bridge",
    "face_prob_pinned",
    "face_prob_temporal_sum",
    "gaussian_expected_volume",
    "gaussian_intrinsic_volume",
    "chi_mean",
    "kappa",
    "orthoscheme_intrinsic_volume",
    "sparre_andersen",
    "spherical_U",
    "spherical_U_direct",
    "spitzer_widom_perimeter",
    "theorem1_prob",
    "v1_expected",
    "wendel_prob",
]

RATIONAL_MAX_N = 64
# below this index a_m comes from a running product, above from a Stirling series
_SERIES_CUTOFF = 32
_DIRECT_CONVOLVE_MAX = 20000


@dataclass(frozen=True)
class ExactValue:
    value: float
    rational: Fraction | None = None
    mode: str = "float-log-space"

    def __float__(self) -> float:
        return self.value

    @property
    def rational_str(self) -> str | None:
        if self.rational is None:
            return None
        return f"{self.rational.numerator}/{self.rational.denominator}"


@dataclass(frozen=True)
class AsymptoticValue:
    value: float
    formula_id: str

    def __float__(self) -> float:
        return self.value


def _resolve_mode(mode: str, n: int, rational_ok: bool = True) -> bool:
    """True when the rational path should be used."""
    if mode == "float":
        return False
    if mode == "rational":
        if not rational_ok:
            raise ValueError("this quantity is irrational; rational mode is unavailable")
        if n > RATIONAL_MAX_N:
            raise ValueError(f"rational mode is limited to n <= {RATIONAL_MAX_N}")
        return True
    if mode == "auto":
        return rational_ok and n <= RATIONAL_MAX_N
    raise ValueError(f"unknown mode {mode!r}; expected 'auto', 'float' or 'rational'")


def _from_fraction(q: Fraction) -> ExactValue:
    return ExactValue(float(q), q, "rational")


def _from_float(x: float) -> ExactValue:
    return ExactValue(float(x), None, "float-log-space")


# -- double-factorial kernel --------------------------------------------------

def _log_half_ratio_large(x: np.ndarray) -> np.ndarray:
    """log Gamma(x + 1/2) - log Gamma(x + 1) for x >= _SERIES_CUTOFF."""
    z1 = x + 0.5
    z2 = x + 1.0

    def tail(z):
        zi = 1.0 / z
        zi2 = zi * zi
        return zi * (1 / 12 + zi2 * (-1 / 360 + zi2 * (1 / 1260 + zi2 * (-1 / 1680))))

    core = -0.5 * np.log(x) + x * np.log1p(0.5 / x) - (x + 0.5) * np.log1p(1.0 / x) + 0.5
    return core + tail(z1) - tail(z2)


def log_double_factorial_ratio(m) -> np.ndarray:
    """``log((2m-1)!!/(2m)!!)`` elementwise for integer ``m >= 0``."""
    m = np.asarray(m)
    if np.any(m < 0):
        raise ValueError("index must be non-negative")
    out = np.empty(m.shape, dtype=float)
    small = m < _SERIES_CUTOFF
    if np.any(small):
        steps = np.arange(1, _SERIES_CUTOFF, dtype=float)
        table = np.concatenate([[0.0], np.cumsum(np.log1p(-0.5 / steps))])
        out[small] = table[m[small]]
    big = ~small
    if np.any(big):
        x = m[big].astype(float)
        out[big] = _log_half_ratio_large(x) - 0.5 * math.log(math.pi)
    return out


def _half_ratios(n: int) -> np.ndarray:
    """Array ``a_0, ..., a_n`` in floating point."""
    return np.exp(log_double_factorial_ratio(np.arange(n + 1)))


def _half_ratio_q(m: int) -> Fraction:
    return Fraction(math.comb(2 * m, m), 4**m)


def double_factorial_ratio(m: int, mode: str = "auto") -> ExactValue:
    """``(2m-1)!!/(2m)!!``; equals 1 at ``m = 0``."""
    if _resolve_mode(mode, m):
        return _from_fraction(_half_ratio_q(m))
    return _from_float(float(np.exp(log_double_factorial_ratio(np.array(m)))))


# -- composition sums ---------------------------------------------------------

def _convolve(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    if n <= _DIRECT_CONVOLVE_MAX:
        out = np.convolve(a, b)[: n + 1]
    else:
        out = signal.fftconvolve(a, b)[: n + 1]
    return out


def _compositions(w: np.ndarray, m: int, n: int) -> np.ndarray:
    """``H_m(J) = sum_{j_1+...+j_m = J} prod w(j_i)`` for ``J = 0..n`` (``w[0]`` must be 0)."""
    if m == 0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    h = w.copy()
    for _ in range(m - 1):
        h = _convolve(h, w, n)
    return h


def _compositions_q(w: list, m: int, n: int) -> list:
    h = [Fraction(0)] * (n + 1)
    h[0] = Fraction(1)
    for _ in range(m):
        nxt = [Fraction(0)] * (n + 1)
        for total in range(1, n + 1):
            acc = Fraction(0)
            for j in range(1, total + 1):
                if h[total - j]:
                    acc += w[j] * h[total - j]
            nxt[total] = acc
        h = nxt
    return h


def _simplex_sum(w: np.ndarray, m: int, n: int) -> float:
    """``sum_{j_1+...+j_m <= n} prod w(j_i)`` via prefix sums (one convolution per extra factor)."""
    if m == 0:
        return 1.0
    inner = np.cumsum(_compositions(w, m - 1, n))
    return math.fsum(w[1 : n + 1] * inner[n - 1 :: -1])


def _simplex_sum_q(w: list, m: int, n: int) -> Fraction:
    return sum(_compositions_q(w, m, n), Fraction(0))


def _recip(n: int) -> np.ndarray:
    w = np.zeros(n + 1)
    w[1:] = 1.0 / np.arange(1, n + 1)
    return w


def _recip_q(n: int) -> list:
    return [Fraction(0)] + [Fraction(1, j) for j in range(1, n + 1)]


def _recip_sqrt(n: int) -> np.ndarray:
    w = np.zeros(n + 1)
    w[1:] = 1.0 / np.sqrt(np.arange(1, n + 1))
    return w


def _check_n(n: int, minimum: int = 1) -> int:
    if int(n) != n or n < minimum:
        raise ValueError(f"n must be an integer >= {minimum}, got {n}")
    return int(n)


def _check_indices(n: int, d: int, indices: Sequence[int]) -> tuple[int, ...]:
    idx = tuple(int(i) for i in indices)
    if len(idx) != d:
        raise ValueError(f"expected {d} indices, got {len(idx)}")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError("indices must be strictly increasing")
    if idx and (idx[0] < 0 or idx[-1] > n):
        raise ValueError(f"indices must lie in [0, {n}]")
    return idx


# -- one- and two-dimensional persistence ---------------------------------------

def sparre_andersen(n: int, mode: str = "auto") -> ExactValue:
    """P(S_1 > 0, ..., S_n > 0) for a continuous symmetric walk on the line.

    ``n = 0`` returns 1 (empty conjunction).
    """
    n = _check_n(n, 0)
    return double_factorial_ratio(n, mode)


def theorem1_prob(n: int, mode: str = "auto") -> ExactValue:
    """P(0 not in conv(S_1, ..., S_n)) for a planar symmetric walk.

    ``sum_{k=1}^n a_{n-k} / k``; the value does not depend on the increment law.
    """
    n = _check_n(n)
    if _resolve_mode(mode, n):
        return _from_fraction(sum((_half_ratio_q(n - k) / k for k in range(1, n + 1)), Fraction(0)))
    a = _half_ratios(n - 1)
    k = np.arange(1, n + 1)
    return _from_float(math.fsum(a[n - k] / k))


def bridge_prob(n: int, mode: str = "auto") -> ExactValue:
    """P(0 not in conv(S_1, ..., S_n)) for a planar bridge of length ``n + 1``."""
    n = _check_n(n)
    if _resolve_mode(mode, n):
        return _from_fraction(sum((Fraction(1, k * (n - k + 1)) for k in range(1, n + 1)), Fraction(0)))
    k = np.arange(1, n + 1, dtype=float)
    return _from_float(math.fsum(1.0 / (k * (n - k + 1))))


def wendel_prob(n: int, d: int, mode: str = "auto") -> ExactValue:
    """Wendel's probability that ``n`` i.i.d. symmetric vectors in R^d miss the origin in their hull."""
    n = _check_n(n)
    d = _check_n(d)
    q = Fraction(sum(math.comb(n - 1, k) for k in range(min(d, n))), 2 ** (n - 1))
    if _resolve_mode(mode, n):
        return _from_fraction(q)
    return _from_float(float(q))


# -- face probabilities -----------------------------------------------------------

def face_prob_pinned(n: int, d: int, indices: Sequence[int], mode: str = "auto") -> ExactValue:
    """P(conv(S_{i_1}, ..., S_{i_d}) is a facet of C_n) for a symmetric walk."""
    n = _check_n(n)
    idx = _check_indices(n, d, indices)
    gaps = [b - a for a, b in zip(idx, idx[1:])]
    if _resolve_mode(mode, n):
        q = 2 * _half_ratio_q(idx[0]) * _half_ratio_q(n - idx[-1])
        for g in gaps:
            q /= g
        return _from_fraction(q)
    la = log_double_factorial_ratio(np.array([idx[0], n - idx[-1]]))
    logv = math.log(2.0) + float(la.sum()) - math.fsum(math.log(g) for g in gaps)
    return _from_float(math.exp(logv))


def face_prob_bridge(n: int, d: int, indices: Sequence[int], mode: str = "auto") -> ExactValue:
    """Facet probability for a bridge ``S_1, ..., S_n, 0`` of length ``n + 1``."""
    n = _check_n(n)
    idx = _check_indices(n, d, indices)
    denom = n - idx[-1] + idx[0] + 1
    for a, b in zip(idx, idx[1:]):
        denom *= b - a
    q = Fraction(2, denom)
    return _from_fraction(q) if _resolve_mode(mode, n) else _from_float(float(q))


def face_prob_temporal_sum(n: int, d: int, gaps: Sequence[int], mode: str = "auto") -> ExactValue:
    """Expected number of facets with temporal structure ``gaps`` (any exchangeable increments)."""
    n = _check_n(n)
    gaps = tuple(int(g) for g in gaps)
    if len(gaps) != d - 1:
        raise ValueError(f"expected {d - 1} gaps for d={d}")
    if any(g < 1 for g in gaps):
        raise ValueError("gaps must be >= 1")
    if sum(gaps) > n:
        raise ValueError("gaps exceed the walk length")
    q = Fraction(2, math.prod(gaps))
    return _from_fraction(q) if _resolve_mode(mode, n) else _from_float(float(q))


def expected_faces(n: int, d: int, mode: str = "auto") -> ExactValue:
    """E|F_n| = 2 sum_{j_1+...+j_{d-1} <= n} 1/(j_1 ... j_{d-1})."""
    n = _check_n(n)
    d = _check_n(d)
    if _resolve_mode(mode, n):
        return _from_fraction(2 * _simplex_sum_q(_recip_q(n), d - 1, n))
    return _from_float(2.0 * _simplex_sum(_recip(n), d - 1, n))


def expected_faces_at_origin(n: int, d: int, mode: str = "auto") -> ExactValue:
    """Expected number of facets through the origin for a symmetric walk.

    Evaluates ``2 sum_J a_{n-J} h_{d-1}(J)``.  The sum is taken literally for
    every ``n >= 1``; it has its geometric meaning once ``n >= d``.
    """
    n = _check_n(n)
    d = _check_n(d, 2)
    if _resolve_mode(mode, n):
        h = _compositions_q(_recip_q(n), d - 1, n)
        return _from_fraction(2 * sum((_half_ratio_q(n - J) * h[J] for J in range(1, n + 1)), Fraction(0)))
    h = _compositions(_recip(n), d - 1, n)
    a = _half_ratios(n)
    J = np.arange(1, n + 1)
    return _from_float(2.0 * math.fsum(a[n - J] * h[J]))


def expected_bridge_faces_at_origin(n: int, d: int, mode: str = "auto") -> ExactValue:
    """Expected number of facets through the origin for a bridge of length ``n + 1``.

    ``2 sum_J h_{d-1}(J) / (n - J + 1)``; for ``d = 1`` this is ``2/(n+1)``.
    """
    n = _check_n(n, 0)
    d = _check_n(d)
    if d == 1:
        q = Fraction(2, n + 1)
        return _from_fraction(q) if _resolve_mode(mode, n) else _from_float(float(q))
    if n == 0:
        return _from_fraction(Fraction(0)) if _resolve_mode(mode, n) else _from_float(0.0)
    if _resolve_mode(mode, n):
        h = _compositions_q(_recip_q(n), d - 1, n)
        return _from_fraction(2 * sum((h[J] / (n - J + 1) for J in range(1, n + 1)), Fraction(0)))
    h = _compositions(_recip(n), d - 1, n)
    J = np.arange(1, n + 1)
    return _from_float(2.0 * math.fsum(h[J] / (n - J + 1)))


# -- intrinsic volumes ------------------------------------------------------------

def kappa(k: int) -> float:
    """Volume of the unit ball in R^k."""
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def chi_mean(k: int) -> float:
    """E||N|| for a standard Gaussian vector in R^k."""
    return math.sqrt(2.0) * math.exp(math.lgamma((k + 1) / 2) - math.lgamma(k / 2))


def crofton_constant(d: int, k: int) -> float:
    """Normalisation ``binom(d, k) kappa_d / (kappa_k kappa_{d-k})`` of the Crofton formula."""
    if not 0 <= k <= d:
        raise ValueError("need 0 <= k <= d")
    return math.comb(d, k) * kappa(d) / (kappa(k) * kappa(d - k))


def _gaussian_scale(spec, d: int | None) -> tuple[int, float]:
    """Dimension and common standard deviation of an isotropic Gaussian spec (or ``d`` and 1)."""
    if spec is None:
        return (2 if d is None else int(d)), 1.0
    if spec.kind != "gaussian":
        raise ValueError("closed form requires gaussian increments; estimate E||S_j|| by Monte Carlo instead")
    cov = spec.covariance
    s2 = cov[0, 0]
    if not np.allclose(cov, s2 * np.eye(spec.d)):
        raise ValueError("closed form requires an isotropic covariance sigma^2 I")
    return spec.d, math.sqrt(s2)


def gaussian_intrinsic_volume(n: int, d: int, k: int, sigma: float = 1.0) -> ExactValue:
    """E V_k(C_n) for a walk with N(0, sigma^2 I_d) increments.

    The Gram-determinant expectation of ``k`` independent standard Gaussian
    vectors in R^d factors into chi means (Bartlett decomposition), giving
    ``(sigma^k / k!) prod_{i<k} E chi_{d-i} sum_{j_1+...+j_k <= n} (j_1 ... j_k)^{-1/2}``.
    """
    n = _check_n(n)
    if not 1 <= k <= d:
        raise ValueError("need 1 <= k <= d")
    const = math.prod(chi_mean(d - i) for i in range(k)) / math.factorial(k)
    return _from_float(sigma**k * const * _simplex_sum(_recip_sqrt(n), k, n))


def gaussian_expected_volume(n: int, d: int, sigma: float = 1.0) -> ExactValue:
    """E Vol_d(C_n) = kappa_d / (2 pi)^{d/2} sum_{j_1+...+j_d <= n} (j_1 ... j_d)^{-1/2} for N(0, I_d) steps."""
    n = _check_n(n)
    if d < 2:
        raise ValueError("volume formula is stated for d >= 2")
    const = kappa(d) / (2 * math.pi) ** (d / 2)
    return _from_float(sigma**d * const * _simplex_sum(_recip_sqrt(n), d, n))


def v1_expected(n: int, d: int = 2, spec=None) -> ExactValue:
    """E V_1(C_n) = sum_j E||S_j|| / j for Gaussian increments.

    Isotropic covariances work in any dimension.  A general covariance is
    accepted in the plane, where E||Sigma^{1/2} N|| is a one-dimensional
    angular integral.
    """
    n = _check_n(n)
    if spec is not None and spec.kind == "gaussian" and spec.d == 2:
        cov = spec.covariance
        def radial(theta):
            u = np.array([math.cos(theta), math.sin(theta)])
            return math.sqrt(u @ cov @ u)
        mean_norm = chi_mean(2) * integrate.quad(radial, 0.0, 2 * math.pi, epsabs=1e-14, epsrel=1e-13)[0] / (2 * math.pi)
    else:
        d, sigma = _gaussian_scale(spec, d)
        mean_norm = sigma * chi_mean(d)
    return _from_float(mean_norm * math.fsum(_recip_sqrt(n)[1:]))


def spitzer_widom_perimeter(n: int, spec=None) -> ExactValue:
    """E Vol_1(boundary C_n) = 2 sum_j E||S_j|| / j for a planar Gaussian walk."""
    if spec is not None and spec.d != 2:
        raise ValueError("perimeter formula is planar")
    return _from_float(2.0 * v1_expected(n, 2, spec).value)


def orthoscheme_intrinsic_volume(n: int, k: int) -> ExactValue:
    """V_k of the canonical orthoscheme T_n: (1/k!) sum_{j_1+...+j_k <= n} (j_1 ... j_k)^{-1/2}."""
    n = _check_n(n)
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    return _from_float(_simplex_sum(_recip_sqrt(n), k, n) / math.factorial(k))


def spherical_U(n: int, k: int, mode: str = "auto") -> ExactValue:
    """Spherical intrinsic volume U_k of the spherical orthoscheme, k in {1, 2}.

    Uses ``U_k = P(0 in conv(S_1, ..., S_n)) / 2`` for a ``k``-dimensional
    symmetric walk.
    """
    n = _check_n(n)
    if k == 1:
        if _resolve_mode(mode, n):
            return _from_fraction(Fraction(1, 2) - _half_ratio_q(n))
        return _from_float(0.5 - sparre_andersen(n, "float").value)
    if k == 2:
        t = theorem1_prob(n, mode)
        if t.rational is not None:
            return _from_fraction((1 - t.rational) / 2)
        return _from_float((1.0 - t.value) / 2)
    raise ValueError("spherical_U is only available for k in {1, 2}")


def spherical_U_direct(n: int, k: int) -> Fraction:
    """Rational U_k by term-by-term summation of the stated series (k in {1, 2})."""
    n = _check_n(n)
    if k == 1:
        num = math.prod(range(1, 2 * n, 2))
        den = math.prod(range(2, 2 * n + 1, 2))
        return Fraction(1, 2) - Fraction(num, den)
    if k == 2:
        total = Fraction(0)
        for j in range(1, n + 1):
            num = math.prod(range(1, 2 * n - 2 * j, 2))
            den = math.prod(range(2, 2 * n - 2 * j + 1, 2))
            total += Fraction(num, 2 * j * den)
        return Fraction(1, 2) - total
    raise ValueError("k must be 1 or 2")


# -- asymptotic laws --------------------------------------------------------------

def _log(n: float) -> float:
    return math.log(n)


ASYMPTOTIC_FORMULAS = {
    "gamma-asympt": lambda n, p: 1.0 / math.sqrt(math.pi * n),
    "log-asympt": lambda n, p: _log(n) / math.sqrt(math.pi * n),
    "updates": lambda n, p: math.sqrt(n) * _log(n) / (2 * math.sqrt(math.pi)),
    "angle-conditional": lambda n, p: 2 * math.pi / _log(n),
    "e-rw-0": lambda n, p: 2 * _log(n) ** (p["d"] - 1) / math.sqrt(math.pi * n),
    "e-br-0": lambda n, p: 2 * p["d"] * _log(n) ** (p["d"] - 1) / n,
    "e-rw": lambda n, p: 2 * _log(n) ** (p["d"] - 1),
    "e-rw-0-asymmetric": lambda n, p: 2 * math.sqrt(2) * p["er"] * _log(n) ** (p["d"] - 1) / math.sqrt(math.pi * n),
    "theorem2": lambda n, p: math.sqrt(2) * p["er"] * _log(n) / math.sqrt(math.pi * n),
    "one-dim-asymmetric": lambda n, p: math.sqrt(2) * p["r"] / math.sqrt(math.pi * n),
    "exit-halfspace": lambda n, p: math.sqrt(2 / math.pi) * p["r"] / math.sqrt(n),
    "face-prob-asymptotic": lambda n, p: _face_prob_leading(n, p),
    "sv-asympt": lambda n, p: _log(n) ** (p["a"] + 1) / math.sqrt(n),
    "sv-asympt-2": lambda n, p: (p["b"] + 2) * _log(n) ** (p["b"] + 1) / ((p["b"] + 1) * n),
}


def _face_prob_leading(n, p):
    idx = tuple(p["indices"])  # (i_2, ..., i_d) with i_1 = 0
    if not idx or any(b <= a for a, b in zip(idx, idx[1:])) or idx[0] < 1 or idx[-1] > n:
        raise ValueError("indices must satisfy 1 <= i_2 < ... < i_d <= n")
    val = 2 * math.sqrt(2 / math.pi) * p["er"] / (idx[0] * math.sqrt(n - idx[-1] + 1))
    for a, b in zip(idx, idx[1:]):
        val /= b - a
    return val


def asymptotic(formula_id: str, n: float, **params) -> AsymptoticValue:
    """Leading-order value of a named asymptotic law at ``n``.

    ``params`` supplies what the law needs: ``d`` (dimension), ``er``
    (the angular average of the exit functional), ``r`` (a single exit
    functional value), ``indices``, ``a``/``b`` (log exponents).  Only the
    leading term is returned; no rate of convergence is implied.
    """
    try:
        fn = ASYMPTOTIC_FORMULAS[formula_id]
    except KeyError:
        known = ", ".join(sorted(ASYMPTOTIC_FORMULAS))
        raise ValueError(f"unknown formula_id {formula_id!r}; known: {known}") from None
    if n < 2:
        raise ValueError("asymptotic laws are evaluated for n >= 2")
    try:
        value = fn(float(n), params)
    except KeyError as exc:
        raise ValueError(f"formula {formula_id!r} needs parameter {exc.args[0]!r}") from None
    return AsymptoticValue(float(value), formula_id)
