"""Measurement operators, Gaussian noise and the unit truncation operator."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError
from .rng import as_generator
from .sampling import SamplingPlan
from .transforms import UnitaryOperator
from .weights import WeightVector


class MeasurementOperator:
    """Selected, scaled rows of a unitary transform.

    ``forward(x)`` returns ``sqrt(n/m) * D~ (F x)[rows]``, which is ``SDF x``
    (or ``SF x`` when ``apply_precond`` is false).  Rows with multiplicity
    greater than one appear repeatedly.
    """

    def __init__(self, F: UnitaryOperator, plan: SamplingPlan, apply_precond: bool = True):
        if plan.n != F.n:
            raise InvalidInputError(f"plan is for n={plan.n}, transform has n={F.n}")
        self.F = F
        self.plan = plan
        self.apply_precond = apply_precond
        self.rows = plan.rows
        base = math.sqrt(plan.n / plan.m)
        self.scale = base * plan.row_precond if apply_precond else np.full(self.rows.size, base)

    @property
    def shape(self):
        return (self.rows.size, self.F.n)

    def forward(self, x):
        x = np.asarray(x)
        if x.shape[0] != self.F.n:
            raise InvalidInputError(f"signal has length {x.shape[0]}, expected {self.F.n}")
        y = self.F.apply(x)[self.rows]
        return self.scale.reshape((-1,) + (1,) * (y.ndim - 1)) * y

    def adjoint(self, y):
        y = np.asarray(y)
        if y.shape[0] != self.rows.size:
            raise InvalidInputError(f"measurement vector has length {y.shape[0]}, expected {self.rows.size}")
        sy = self.scale.reshape((-1,) + (1,) * (y.ndim - 1)) * y
        if y.ndim == 1:
            z = np.bincount(self.rows, weights=sy.real, minlength=self.F.n).astype(complex)
            if np.iscomplexobj(sy):
                z += 1j * np.bincount(self.rows, weights=sy.imag, minlength=self.F.n)
        else:
            z = np.zeros((self.F.n,) + y.shape[1:], dtype=complex)
            np.add.at(z, self.rows, sy)
        return self.F.adjoint(z)

    def precondition(self, b):
        """``D~ b`` for raw measurements ``b`` of ``SF x``."""
        if not self.apply_precond:
            return np.asarray(b)
        return self.plan.row_precond * np.asarray(b)

    def norm_squared(self) -> float:
        """Exact squared operator norm (rows of ``F`` are orthonormal)."""
        acc = np.zeros(self.F.n)
        np.add.at(acc, self.rows, self.scale ** 2)
        return float(acc.max()) if acc.size else 0.0

    def matrix(self):
        return self.forward(np.eye(self.F.n))


def add_noise(meas, sigma: float, m: int, field: str = "real", rng=None):
    """Add ``sigma g / sqrt(m)``; complex ``g`` has i.i.d. N(0,1) real and imaginary parts."""
    if sigma < 0:
        raise InvalidInputError("sigma must be nonnegative")
    meas = np.asarray(meas)
    if sigma == 0:
        return meas.copy()
    gen = as_generator(rng)
    g = gen.standard_normal(meas.shape)
    if field == "complex":
        g = g + 1j * gen.standard_normal(meas.shape)
    elif field != "real":
        raise InvalidInputError(f"unknown field {field!r}")
    return meas + sigma * g / math.sqrt(m)


def truncation_index(v) -> int | None:
    """Number of leading entries kept by :func:`unit_truncate`, or None if ``||v|| < 1``."""
    v = np.asarray(v, dtype=float)
    csum = np.cumsum(v * v)
    I = int(np.searchsorted(csum, 1.0, side="left"))
    return None if I == v.size else I + 1


def unit_truncate(v) -> np.ndarray:
    """Keep the shortest prefix of ``v`` reaching unit norm, trimming its last entry.

    ``v`` must be entrywise nonnegative.  When ``||v|| < 1`` no prefix reaches
    unit norm and ``v`` is returned unchanged (see :func:`truncation_index`).
    """
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise InvalidInputError("unit truncation needs a nonnegative vector")
    I = truncation_index(v)
    if I is None:
        return v.copy()
    out = np.zeros_like(v)
    out[:I - 1] = v[:I - 1]
    head = float(np.dot(v[:I - 1], v[:I - 1]))
    out[I - 1] = math.sqrt(max(1.0 - head, 0.0))
    return out


class NoiseFactor(NamedTuple):
    factor: float
    max_Sd: float
    truncated_SD2a: float
    SD2a: float
    support: int | None


def noise_factor_terms(plan: SamplingPlan, alpha, w=None) -> NoiseFactor:
    """``||D~ T(SD alpha)||`` together with the quantities that bound it.

    Rows are reordered so that ``Sd`` is decreasing (ties by index) before the
    truncation.  ``d`` comes from Bernoulli weights ``w`` when given, else from
    the plan's own preconditioner.
    """
    alpha = np.asarray(alpha, dtype=float)
    rows = plan.rows
    if w is not None:
        wv = np.asarray(w.w if isinstance(w, WeightVector) else w, dtype=float)
        d = np.sqrt(plan.m / (plan.n * wv[rows]))
    else:
        d = plan.row_precond
    a = alpha[rows]
    if np.any(a <= 0):
        raise InvalidInputError("zero coherence on a selected row")
    order = np.lexsort((rows, -d))
    d, a = d[order], a[order]
    s = math.sqrt(plan.n / plan.m)
    Sd = s * d
    SDa = Sd * a
    T = unit_truncate(SDa)
    I = truncation_index(SDa)
    SD2a = s * d * d * a
    cut = SD2a if I is None else SD2a[:I]
    return NoiseFactor(
        factor=float(np.linalg.norm(d * T)),
        max_Sd=float(Sd.max()) if Sd.size else 0.0,
        truncated_SD2a=float(np.linalg.norm(cut)),
        SD2a=float(np.linalg.norm(SD2a)),
        support=I,
    )


def noise_factor(plan: SamplingPlan, alpha, w=None) -> float:
    return noise_factor_terms(plan, alpha, w).factor


def noise_tail_bound(alpha, w: WeightVector, t: float) -> float:
    """Level exceeded by the optimized-Bernoulli noise factor with probability at most ``t``."""
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.size
    L2 = w.Lsq
    amin = alpha[alpha > 0].min()
    return math.sqrt(L2 * min(1.0 / t + w.m / (n * L2), 1.0 / (n * amin ** 2)))
