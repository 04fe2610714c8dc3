"""Sampling matrices: Bernoulli selectors, with- and without-replacement draws.

A :class:`SamplingPlan` records which rows of ``F`` are measured and the
diagonal preconditioner ``D~`` on those rows.  The measured row for index
``i`` is ``sqrt(n/m) * precond_i * f_i^*``, i.e. the plan realizes ``SDF``.
For Bernoulli weights ``precond_i = d_i = sqrt(m / (n w_i))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInputError, ResourceExhaustedError
from .rng import RngStream
from .weights import HeuristicWeights, WeightVector, heuristic_marginal_weights

SCHEMES = ("bernoulli", "bernoulli-cond", "wr", "wor-reject", "wor-seq")
PRECONDITIONERS = ("bernoulli", "heuristic", "with-replacement", "empirical")
ATTEMPT_CAP = 10**7
REGULARIZATION = 1e-7


@dataclass(frozen=True, eq=False)
class SamplingPlan:
    indices: np.ndarray
    multiplicities: np.ndarray
    precond: np.ndarray
    scheme: str
    n: int
    m: int
    seed: int = 0
    stream: int = 0
    attempts: int = 1
    total_draws: int | None = None
    reject_counts: np.ndarray | None = field(default=None, repr=False)

    @property
    def rows(self) -> np.ndarray:
        """Measured row indices, repeated by multiplicity."""
        return np.repeat(self.indices, self.multiplicities)

    @property
    def row_precond(self) -> np.ndarray:
        return np.repeat(self.precond, self.multiplicities)

    @property
    def m_realized(self) -> int:
        return int(self.multiplicities.sum())

    def to_dict(self) -> dict:
        out = {
            "scheme": self.scheme,
            "seed": int(self.seed),
            "stream": int(self.stream),
            "n": int(self.n),
            "m": int(self.m),
            "attempts": int(self.attempts),
            "indices": [int(i) for i in self.indices],
            "multiplicities": [int(c) for c in self.multiplicities],
            "precond": [float(d) for d in self.precond],
        }
        if self.total_draws is not None:
            out["total_draws"] = int(self.total_draws)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPlan":
        idx = np.asarray(d["indices"], dtype=np.int64)
        return cls(
            indices=idx,
            multiplicities=np.asarray(d.get("multiplicities", np.ones(idx.size)), dtype=np.int64),
            precond=np.asarray(d["precond"], dtype=float),
            scheme=d["scheme"],
            n=int(d["n"]),
            m=int(d["m"]),
            seed=int(d.get("seed", 0)),
            stream=int(d.get("stream", 0)),
            attempts=int(d.get("attempts", 1)),
            total_draws=d.get("total_draws"),
        )


def _stream(rng) -> tuple[np.random.Generator, int, int]:
    if isinstance(rng, RngStream):
        return rng.generator(), rng.seed, rng.stream
    if isinstance(rng, np.random.Generator):
        return rng, 0, 0
    s = RngStream(0 if rng is None else int(rng))
    return s.generator(), s.seed, s.stream


def _weights(w, m=None):
    if isinstance(w, (WeightVector, HeuristicWeights)):
        return np.asarray(w.w, dtype=float), int(w.m)
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or np.any(w < 0) or np.any(w > 1):
        raise InvalidInputError("weights must lie in [0, 1]")
    return w, int(round(w.sum())) if m is None else int(m)


def _probabilities(p):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise InvalidInputError("p must be a probability vector")
    return p


def bernoulli_precond(w, m, n):
    """``d_i = sqrt(m / (n w_i))``."""
    return np.sqrt(m / (n * np.asarray(w, dtype=float)))


def _heuristic_or_saturated(p, m):
    npos = int(np.count_nonzero(p))
    if m >= npos:
        return (p > 0).astype(float)
    return heuristic_marginal_weights(p, m).w


def build_preconditioner(plan: SamplingPlan, scheme: str, *, w=None, p=None) -> np.ndarray:
    """Preconditioner values on ``plan.indices`` for the named scheme.

    ``bernoulli`` and ``heuristic`` use ``sqrt(m / (n w_i))`` (``heuristic``
    derives ``w`` from ``p`` when ``w`` is not given); ``with-replacement`` uses
    ``1 / sqrt(n p_i)``; ``empirical`` merges the ``c_i`` with-replacement
    copies of a row drawn ``c_i`` times out of ``N`` total draws into a single
    row whose Gram contribution equals theirs.
    """
    idx, n, m = plan.indices, plan.n, plan.m
    if scheme == "bernoulli":
        if w is None:
            raise InvalidInputError("bernoulli preconditioner needs weights")
        return bernoulli_precond(_weights(w)[0][idx], m, n)
    if scheme == "heuristic":
        if w is None:
            if p is None:
                raise InvalidInputError("heuristic preconditioner needs p or w")
            w = _heuristic_or_saturated(_probabilities(p), m)
        return bernoulli_precond(np.asarray(w, dtype=float)[idx], m, n)
    if scheme == "with-replacement":
        if p is None:
            raise InvalidInputError("with-replacement preconditioner needs p")
        return 1.0 / np.sqrt(n * _probabilities(p)[idx])
    if scheme == "empirical":
        if p is None or plan.reject_counts is None or plan.total_draws is None:
            raise InvalidInputError("empirical preconditioner needs p and duplicate counts")
        counts = 1 + plan.reject_counts[idx]
        row = np.sqrt(counts / (plan.total_draws * _probabilities(p)[idx]))
        return math.sqrt(m / n) * row
    raise InvalidInputError(f"unknown preconditioner {scheme!r}")


def regularized_bernoulli_preconditioner(w, m=None, eps: float = REGULARIZATION) -> np.ndarray:
    """``d_i = sqrt(m / (n (w_i + eps m)))`` on all ``n`` rows."""
    w, m = _weights(w, m)
    return np.sqrt(m / (w.size * (w + eps * m)))


def _distinct_plan(idx, w, m, n, scheme, seed, stream, attempts=1):
    plan = SamplingPlan(idx, np.ones(idx.size, dtype=np.int64), np.empty(0), scheme,
                        n, m, seed, stream, attempts)
    return replace(plan, precond=bernoulli_precond(w[idx], m, n))


def sample_bernoulli(w, rng) -> SamplingPlan:
    """Include each row ``i`` independently with probability ``w_i``."""
    w, m = _weights(w)
    gen, seed, stream = _stream(rng)
    idx = np.flatnonzero(gen.random(w.size) < w)
    return _distinct_plan(idx, w, m, w.size, "bernoulli", seed, stream)


def sample_bernoulli_conditioned(w, rng, max_attempts: int = 10**6, batch: int = 64) -> SamplingPlan:
    """Redraw Bernoulli selections until exactly ``m`` rows are chosen."""
    w, m = _weights(w)
    gen, seed, stream = _stream(rng)
    used = 0
    while used < max_attempts:
        size = min(batch, max_attempts - used)
        draws = gen.random((size, w.size)) < w
        hits = np.flatnonzero(draws.sum(axis=1) == m)
        if hits.size:
            k = int(hits[0])
            idx = np.flatnonzero(draws[k])
            return _distinct_plan(idx, w, m, w.size, "bernoulli-cond", seed, stream, used + k + 1)
        used += size
    raise ResourceExhaustedError(f"no draw with exactly {m} rows in {used} attempts", used)


def _cdf(p):
    cdf = np.cumsum(p)
    return cdf / cdf[-1]


def _ordered_counts(draws):
    uniq, first, counts = np.unique(draws, return_index=True, return_counts=True)
    order = np.argsort(first, kind="stable")
    return uniq[order], counts[order]


def sample_with_replacement(p, m: int, rng) -> SamplingPlan:
    """``m`` i.i.d. draws from ``p``; repeats are kept as multiplicities."""
    p = _probabilities(p)
    gen, seed, stream = _stream(rng)
    draws = np.searchsorted(_cdf(p), gen.random(int(m)), side="right")
    idx, counts = _ordered_counts(draws)
    precond = 1.0 / np.sqrt(p.size * p[idx])
    return SamplingPlan(idx, counts.astype(np.int64), precond, "wr", p.size, int(m),
                        seed, stream, total_draws=int(m))


def _check_wor(p, m):
    npos = int(np.count_nonzero(p))
    if m != int(m) or m <= 0:
        raise InvalidInputError("m must be a positive integer")
    if npos < m:
        raise InvalidInputError(f"only {npos} rows have positive probability, need {m}")


def sample_wor_rejection(p, m: int, rng, max_attempts: float = ATTEMPT_CAP):
    """Draw i.i.d. from ``p`` and reject repeats until ``m`` rows are distinct.

    Before each new row, the expected number of draws it costs, ``1/(1-q)``
    with ``q`` the mass already selected, is added to a running estimate;
    once that estimate exceeds ``max_attempts`` the draw is abandoned.

    Returns ``(plan, total_draws, reject_counts)``; the plan carries the
    empirical preconditioner.
    """
    p = _probabilities(p)
    _check_wor(p, m)
    m = int(m)
    gen, seed, stream = _stream(rng)
    n = p.size
    cdf = _cdf(p)
    seen = np.zeros(n, dtype=bool)
    rejects = np.zeros(n, dtype=np.int64)
    order = []
    total = 0
    estimate = 0.0
    buf = np.empty(0, dtype=np.int64)
    while len(order) < m:
        remaining = p[~seen].sum()
        estimate += 1.0 / remaining if remaining > 0 else math.inf
        if estimate > max_attempts:
            raise ResourceExhaustedError(
                f"estimated attempts {estimate:.3g} exceed cap {max_attempts:.3g}", total
            )
        while True:
            if buf.size == 0:
                size = int(min(max(64, 2.0 / remaining), 1 << 20))
                buf = np.searchsorted(cdf, gen.random(size), side="right")
            novel = np.flatnonzero(~seen[buf])
            if novel.size == 0:
                np.add.at(rejects, buf, 1)
                total += buf.size
                buf = buf[:0]
                continue
            k = int(novel[0])
            np.add.at(rejects, buf[:k], 1)
            j = int(buf[k])
            total += k + 1
            buf = buf[k + 1:]
            break
        seen[j] = True
        order.append(j)
    idx = np.asarray(order, dtype=np.int64)
    plan = SamplingPlan(idx, np.ones(m, dtype=np.int64), np.empty(0), "wor-reject", n, m,
                        seed, stream, total_draws=total, reject_counts=rejects)
    plan = replace(plan, precond=build_preconditioner(plan, "empirical", p=p))
    return plan, total, rejects


def sample_wor_sequential(p, m: int, rng, precond: str = "heuristic") -> SamplingPlan:
    """Sequential draws, renormalizing ``p`` over the unselected rows each step."""
    p = _probabilities(p)
    _check_wor(p, m)
    m = int(m)
    gen, seed, stream = _stream(rng)
    live = p.copy()
    order = np.empty(m, dtype=np.int64)
    for r in range(m):
        cdf = np.cumsum(live)
        j = int(np.searchsorted(cdf, gen.random() * cdf[-1], side="right"))
        j = min(j, p.size - 1)
        while live[j] == 0:  # float edge at the top of the cdf
            j -= 1
        order[r] = j
        live[j] = 0.0
    plan = SamplingPlan(order, np.ones(m, dtype=np.int64), np.empty(0), "wor-seq", p.size, m,
                        seed, stream)
    if precond == "with-replacement":
        return replace(plan, precond=build_preconditioner(plan, "with-replacement", p=p))
    return replace(plan, precond=build_preconditioner(plan, "heuristic", p=p))
