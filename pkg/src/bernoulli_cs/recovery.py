"""Sparse recovery from preconditioned subsampled measurements.

The pipeline solves a LASSO in the synthesis coefficients of a sparsity
basis, keeps the ``k`` largest coefficients as the support, and re-fits them
by least squares:

    min_c  1/2 || D~ S F Psi c - D~ b ||^2 + lam ||c||_1
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidInputError
from .operators import MeasurementOperator, noise_factor
from .transforms import UnitaryOperator

LOG_FLOOR = 1e-15


@dataclass
class SparsePriorConfig:
    """Settings for :func:`recover_sparse`.

    ``transform`` is the analysis operator of the sparsity basis (synthesis is
    its adjoint).  ``lasso_penalty=None`` picks the larger of the universal
    threshold ``sigma * sqrt(2 log n / m) * max_column_norm`` and
    ``penalty_floor * ||A^* y||_inf`` (the floor keeps noiseless problems
    well posed).  Problems with ``n <= dense_limit`` use an explicit matrix.
    """

    transform: UnitaryOperator
    k: int
    lasso_penalty: float | None = None
    max_iters: int = 5000
    tol: float = 1e-9
    field: str = "real"
    continuation: bool = True
    penalty_floor: float = 1e-4
    dense_limit: int = 4096

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInputError("k must be at least 1")
        if not self.tol > 0:
            raise InvalidInputError("tol must be positive")


@dataclass
class RecoveryReport:
    rel_error: float | None
    abs_error: float | None
    sigma: float | None
    eps_proxy: float
    mismatch: float | None
    noise_factor: float | None
    m_realized: int
    scheme: str
    converged: bool = True
    rank_deficient: bool = False
    iterations: int = 0
    support: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


class _SynthesisMap:
    """``c -> D~ S F Psi c`` restricted to the configured field."""

    def __init__(self, Mop: MeasurementOperator, Psi: UnitaryOperator, field: str, dense_limit: int = 0):
        self.Mop, self.Psi, self.real = Mop, Psi, field == "real"
        # small problems are faster as one explicit matrix
        self.G = None
        if Psi.n <= dense_limit:
            G = Mop.forward(Psi.adjoint(np.eye(Psi.n)))
            if self.real:
                # real coefficients: stack (re, im) so every product stays real
                G = np.vstack([G.real, G.imag])
            self.G, self.GH = G, G.conj().T

    def embed(self, y):
        """Measurements in the representation returned by ``__call__``."""
        y = np.asarray(y)
        if self.G is not None and self.real:
            return np.concatenate([y.real, y.imag])
        return y

    def __call__(self, c):
        if self.G is not None:
            return self.G @ c
        return self.Mop.forward(self.Psi.adjoint(c))

    def adjoint(self, r):
        g = self.GH @ r if self.G is not None else self.Psi.apply(self.Mop.adjoint(r))
        return g.real if self.real else g

    def columns(self, idx):
        E = np.zeros((self.Psi.n, len(idx)))
        E[np.asarray(idx, dtype=np.int64), np.arange(len(idx))] = 1.0
        return self(E)

    def column_norms(self, chunk=256):
        if self.G is not None:
            return np.linalg.norm(self.G, axis=0)
        out = np.empty(self.Psi.n)
        for s in range(0, self.Psi.n, chunk):
            idx = np.arange(s, min(s + chunk, self.Psi.n))
            out[idx] = np.linalg.norm(self.columns(idx), axis=0)
        return out


def _soft(z, thr):
    mag = np.abs(z)
    return np.where(mag > thr, (1 - thr / np.maximum(mag, 1e-300)) * z, 0)


def lasso_prox_grad(A, y, lam, x0, L, max_iters, tol, history=None):
    """Monotone accelerated proximal gradient with backtracking.

    Returns ``(x, iterations, converged, L)``.  ``history`` (a list) receives
    the objective after every iteration; it never increases.
    """
    def smooth(x):
        r = A(x) - y
        return 0.5 * float(np.vdot(r, r).real), r

    def objective(x):
        return smooth(x)[0] + lam * float(np.abs(x).sum())

    x = x0.copy()
    Fx = objective(x)
    v, t = x.copy(), 1.0
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        fv, rv = smooth(v)
        grad = A.adjoint(rv)
        while True:
            z = _soft(v - grad / L, lam / L)
            dz = z - v
            fz = smooth(z)[0]
            if fz <= fv + float(np.vdot(grad, dz).real) + 0.5 * L * float(np.vdot(dz, dz).real) * (1 + 1e-12) + 1e-300:
                break
            L *= 2.0
        Fz = fz + lam * float(np.abs(z).sum())
        x_prev = x
        if Fz <= Fx:
            x, Fx = z, Fz
        t_next = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        v = x + (t / t_next) * (z - x) + ((t - 1) / t_next) * (x - x_prev)
        t = t_next
        if history is not None:
            history.append(Fx)
        # gradient-mapping stationarity at the extrapolated point
        if np.linalg.norm(dz) <= tol * max(np.linalg.norm(z), 1e-12):
            converged = True
            break
    return x, it, converged, L


def top_k_support(c, k: int) -> np.ndarray:
    """Indices of the ``k`` largest ``|c|``; ties go to the lower index."""
    mag = np.abs(np.asarray(c))
    order = np.lexsort((np.arange(mag.size), -mag))
    return np.sort(order[:k])


def _lstsq(Amat, y, real):
    if real:
        Amat = np.vstack([Amat.real, Amat.imag])
        y = np.concatenate([y.real, y.imag])
    coef, _, rank, _ = np.linalg.lstsq(Amat, y, rcond=None)
    return coef, rank < Amat.shape[1]


def debias(Mop: MeasurementOperator, y_pre, Psi: UnitaryOperator, support, field: str = "real"):
    """Least-squares fit of preconditioned data ``y_pre`` on the given coefficient support.

    Returns ``(coefficients, rank_deficient)``; rank deficiency yields the
    minimum-norm solution.
    """
    A = _SynthesisMap(Mop, Psi, field)
    cols = A.columns(support)
    coef_s, deficient = _lstsq(cols, np.asarray(y_pre), field == "real")
    coef = np.zeros(Psi.n, dtype=float if field == "real" else complex)
    coef[np.asarray(support, dtype=np.int64)] = coef_s
    return coef, deficient


def default_penalty(A: _SynthesisMap, y, sigma, m, floor):
    n = A.Psi.n
    universal = math.sqrt(2 * math.log(n) / m)
    col = float(A.column_norms().max())
    corr = float(np.abs(A.adjoint(y)).max())
    return max((sigma or 0.0) * universal * col, floor * corr)


def recover_sparse(Mop: MeasurementOperator, b, cfg: SparsePriorConfig, *, x0=None,
                   sigma: float | None = None, alpha=None, w=None, history=None):
    """LASSO, top-``k`` support, then least-squares debiasing.

    ``b`` holds raw measurements of ``SF x0`` (plus noise) in the order of
    ``Mop.rows``.  ``x0`` (when known) fills the error fields of the report;
    ``alpha`` (and optionally Bernoulli weights ``w``) fills the noise factor.
    """
    b = np.asarray(b)
    if b.shape != (Mop.rows.size,):
        raise InvalidInputError(f"expected {Mop.rows.size} measurements, got {b.shape}")
    Psi = cfg.transform
    if Psi.n != Mop.F.n:
        raise InvalidInputError("sparsity basis and measurement transform differ in size")
    A = _SynthesisMap(Mop, Psi, cfg.field, cfg.dense_limit)
    y = A.embed(Mop.precondition(b))
    dtype = float if cfg.field == "real" else complex
    L = max(Mop.norm_squared(), 1e-300)
    m = Mop.plan.m
    lam = cfg.lasso_penalty
    if lam is None:
        lam = default_penalty(A, y, sigma, m, cfg.penalty_floor)
    c = np.zeros(Psi.n, dtype=dtype)
    iters, converged = 0, False
    if cfg.continuation:
        lam_j = max(lam, 0.5 * float(np.abs(A.adjoint(y)).max()))
        while True:
            budget = max(cfg.max_iters - iters, 1)
            c, it, converged, L = lasso_prox_grad(A, y, lam_j, c, L, budget if lam_j == lam else min(budget, 300),
                                                  cfg.tol if lam_j == lam else 1e-4, history)
            iters += it
            if lam_j == lam or iters >= cfg.max_iters:
                break
            lam_j = max(lam, lam_j * 0.3)
    else:
        c, iters, converged, L = lasso_prox_grad(A, y, lam, c, L, cfg.max_iters, cfg.tol, history)

    support = top_k_support(c, min(cfg.k, Psi.n))
    coef, deficient = debias(Mop, Mop.precondition(b), Psi, support, cfg.field)
    xhat = Psi.adjoint(coef)
    if cfg.field == "real":
        xhat = xhat.real

    r = A(coef) - y
    achieved = float(np.vdot(r, r).real)
    best = achieved
    rel = ab = mism = None
    if x0 is not None:
        x0 = np.asarray(x0)
        c0 = Psi.apply(x0)
        keep = top_k_support(c0, min(cfg.k, Psi.n))
        c0k = np.zeros_like(c0)
        c0k[keep] = c0[keep]
        mism = float(np.linalg.norm(c0 - c0k))
        r0 = A(c0k.real if cfg.field == "real" else c0k) - y
        best = min(best, float(np.vdot(r0, r0).real))
        ab = float(np.linalg.norm(xhat - x0))
        rel = ab / float(np.linalg.norm(x0))
    nf = None
    if alpha is not None:
        nf = noise_factor(Mop.plan, alpha, w)
    report = RecoveryReport(
        rel_error=rel, abs_error=ab, sigma=sigma, eps_proxy=achieved - best, mismatch=mism,
        noise_factor=nf, m_realized=Mop.plan.m_realized, scheme=Mop.plan.scheme,
        converged=bool(converged), rank_deficient=bool(deficient), iterations=int(iters),
        support=[int(s) for s in support],
    )
    return xhat, report


def project_subspace_ls(Mop: MeasurementOperator, b, basis, field: str = "real"):
    """Least-squares fit of ``D~ b`` over ``D~ S F basis``; returns ``(xhat, rank_deficient)``."""
    basis = np.atleast_2d(np.asarray(basis))
    if basis.shape[0] != Mop.F.n:
        raise InvalidInputError("basis rows must match the signal dimension")
    cols = Mop.forward(basis)
    real = field == "real" and not np.iscomplexobj(basis)
    coef, deficient = _lstsq(cols, Mop.precondition(b), real)
    return basis @ coef, deficient


def geometric_mean_error(reports):
    """Geometric mean of relative errors and the multiplicative standard-error band.

    Returns ``(geo_mean, band, clamped)``; zero errors are clamped to
    ``1e-15`` and reported through ``clamped``.
    """
    e = np.array([r.rel_error if isinstance(r, RecoveryReport) else r for r in reports], dtype=float)
    if e.size == 0:
        raise InvalidInputError("no errors to aggregate")
    if np.any(e < 0) or not np.all(np.isfinite(e)):
        raise InvalidInputError("errors must be finite and nonnegative")
    clamped = bool(np.any(e < LOG_FLOOR))
    logs = np.log(np.maximum(e, LOG_FLOOR))
    se = float(np.std(logs, ddof=1) / math.sqrt(e.size)) if e.size > 1 else 0.0
    return float(np.exp(logs.mean())), float(np.exp(se)), clamped
