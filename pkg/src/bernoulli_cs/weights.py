"""Optimized Bernoulli inclusion probabilities and complexity functionals.

For coherences sorted increasingly, the closed-form weights are

    R^2(j) = m * sum_{i<=j} alpha_i^2 / (j - (n - m))
    J      = max{ j : m alpha_j^2 < R^2(j) }
    L^2    = R^2(J)
    w_j    = min(m alpha_j^2 / L^2, 1)

Rows with zero coherence are dropped before sorting and get weight 0, so
``n`` above is the number of positive coherences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InsufficientMeasurementsError, InvalidInputError


@dataclass(frozen=True)
class WeightVector:
    """Bernoulli inclusion probabilities with their optimization metadata.

    ``J`` counts the unsaturated positive-coherence rows, ``Lsq`` is
    ``L^2(alpha, m)`` and ``perm[k]`` is the original index of the ``k``-th
    smallest positive coherence.
    """

    w: np.ndarray
    m: int
    J: int
    Lsq: float
    perm: np.ndarray

    @property
    def L(self) -> float:
        return math.sqrt(self.Lsq)

    @property
    def n(self) -> int:
        return self.w.size

    def __array__(self, dtype=None, copy=None):
        return self.w if dtype is None else self.w.astype(dtype)


@dataclass(frozen=True)
class HeuristicWeights:
    """Marginals ``w_i = 1 - exp(-lam p_i)`` of without-replacement sampling."""

    w: np.ndarray
    m: int
    lam: float

    def __array__(self, dtype=None, copy=None):
        return self.w if dtype is None else self.w.astype(dtype)


@dataclass(frozen=True)
class SampleComplexityQuery:
    Lambda: float
    m_star: int | None
    Lsq_at_m_star: float | None
    wr_bound: int
    feasible: bool
    monotone: bool


def _alpha(alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if a.ndim != 1 or np.any(a < 0) or not np.all(np.isfinite(a)):
        raise InvalidInputError("coherences must be a finite nonnegative vector")
    return a


class _SortedCoherences:
    """Sorted positive squared coherences with prefix sums, reused across m."""

    def __init__(self, alpha):
        a = _alpha(alpha)
        pos = np.flatnonzero(a > 0)
        if pos.size == 0:
            raise InvalidInputError("coherence vector has no positive entry")
        self.perm = pos[np.argsort(a[pos], kind="stable")]
        self.sq = a[self.perm] ** 2
        self.csum = np.cumsum(self.sq)
        self.npos = pos.size
        self.size = a.size

    def check_m(self, m):
        if m != int(m) or m <= 0:
            raise InvalidInputError(f"m must be a positive integer, got {m!r}")
        if m > self.npos:
            raise InsufficientMeasurementsError(
                f"cannot sample {m} measurements from {self.npos} positive-coherence rows"
            )
        return int(m)

    def solve(self, m):
        """Return ``(J, L^2)``; ``J`` counts unsaturated entries."""
        m = self.check_m(m)
        N = self.npos
        if m == N:
            # degenerate point: every row saturates
            return 0, m * self.sq[0]
        j = np.arange(N - m + 1, N + 1)
        R2 = m * self.csum[j - 1] / (j - (N - m))
        ok = np.flatnonzero(m * self.sq[j - 1] < R2)
        J = int(j[ok[-1]]) if ok.size else N - m + 1
        return J, float(m * self.csum[J - 1] / (J - (N - m)))


def optimized_bernoulli_weights(alpha, m: int) -> WeightVector:
    sc = _SortedCoherences(alpha)
    J, Lsq = sc.solve(m)
    m = int(m)
    w = np.zeros(sc.size)
    if J == 0:
        w[sc.perm] = 1.0
    else:
        ws = np.minimum(m * sc.sq / Lsq, 1.0)
        ws[J:] = 1.0
        w[sc.perm] = ws
    return WeightVector(w, m, J, Lsq, sc.perm)


def L_value(alpha, m: int) -> tuple[float, int]:
    J, Lsq = _SortedCoherences(alpha).solve(m)
    return math.sqrt(Lsq), J


def L_squared_curve(alpha, ms) -> np.ndarray:
    """``L^2(alpha, m)`` for every ``m`` in ``ms``."""
    sc = _SortedCoherences(alpha)
    return np.array([sc.solve(m)[1] for m in ms])


def with_replacement_weights(alpha) -> np.ndarray:
    """Optimized with-replacement probabilities ``p_i = alpha_i^2 / ||alpha||^2``."""
    a = _alpha(alpha)
    total = np.sum(a ** 2)
    if total <= 0:
        raise InvalidInputError("coherence vector has no positive entry")
    return a ** 2 / total


def _simplex(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise InvalidInputError("p must be a probability vector")
    return p


def heuristic_marginal_weights(p, m: int, tol: float = 1e-12) -> HeuristicWeights:
    """Solve ``sum_i (1 - exp(-lam p_i)) = m`` for ``lam`` by bisection.

    Each marginal stays below 1, so ``m`` must be smaller than the number of
    positive entries of ``p``.
    """
    p = _simplex(p)
    npos = int(np.count_nonzero(p))
    if m != int(m) or m <= 0:
        raise InvalidInputError(f"m must be a positive integer, got {m!r}")
    if m >= npos:
        raise InfeasibleError(f"no finite lambda gives sum(w) = {m} with {npos} positive entries")

    def total(lam):
        return -np.expm1(-lam * p).sum()

    lo, hi = 0.0, 1.0
    while total(hi) < m:
        lo, hi = hi, 2 * hi
    # the absolute tolerance is unreachable in double precision once lam is large
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, hi) or mid in (lo, hi):
            break
        if total(mid) < m:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return HeuristicWeights(-np.expm1(-lam * p), int(m), lam)


def _complexity_terms(alpha, w, m):
    a = _alpha(alpha)
    if isinstance(w, (WeightVector, HeuristicWeights)):
        m = w.m if m is None else m
        w = w.w
    w = np.asarray(w, dtype=float)
    if w.shape != a.shape:
        raise InvalidInputError("alpha and w must have the same length")
    if m is None:
        m = w.sum()
    active = (a > 0) & (w < 1)
    if np.any((a > 0) & (w <= 0)):
        raise InvalidInputError("zero weight on a positive-coherence row")
    return a[active], w[active], m


def gamma_complexity(alpha, w, m=None) -> float:
    """``max_j alpha_j sqrt(m) max(sqrt((1-w_j)/w_j), 1) 1{w_j < 1}``."""
    a, w, m = _complexity_terms(alpha, w, m)
    if a.size == 0:
        return 0.0
    return float(np.max(a * math.sqrt(m) * np.maximum(np.sqrt((1 - w) / w), 1.0)))


def eta_complexity(alpha, w, m=None) -> float:
    """``max_j alpha_j sqrt(m / w_j) 1{w_j < 1}``."""
    a, w, m = _complexity_terms(alpha, w, m)
    if a.size == 0:
        return 0.0
    return float(np.max(a * np.sqrt(m / w)))


def sample_complexity_bound(alpha, Lambda: float) -> SampleComplexityQuery:
    """Smallest ``m`` with ``m / L^2(alpha, m) >= Lambda`` by linear scan."""
    if not Lambda > 0:
        raise InvalidInputError("Lambda must be positive")
    sc = _SortedCoherences(alpha)
    slack = 1 - 1e-12  # keep exact thresholds from tipping over on rounding
    wr_bound = max(math.ceil(Lambda * float(sc.csum[-1]) * slack), 1)
    prev = -math.inf
    monotone = True
    for m in range(1, sc.npos + 1):
        Lsq = sc.solve(m)[1]
        phi = m / Lsq
        if phi < prev * (1 - 1e-12):
            monotone = False
        prev = phi
        if phi >= Lambda * slack:
            return SampleComplexityQuery(Lambda, m, Lsq, wr_bound, True, monotone)
    return SampleComplexityQuery(Lambda, None, None, wr_bound, False, monotone)
