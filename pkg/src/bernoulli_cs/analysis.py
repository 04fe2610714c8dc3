"""Monte-Carlo checks: RIP deviation, the partially deterministic toy, bound curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coherence import UnionOfSubspaces
from .errors import InvalidInputError, ResourceExhaustedError
from .operators import noise_factor, noise_tail_bound
from .parallel import pmap
from .rng import RngStream, stream_id
from .sampling import (
    SCHEMES,
    SamplingPlan,
    bernoulli_precond,
    sample_bernoulli,
    sample_bernoulli_conditioned,
    sample_with_replacement,
    sample_wor_rejection,
    sample_wor_sequential,
)
from .transforms import UnitaryOperator, identity
from .weights import (
    WeightVector,
    optimized_bernoulli_weights,
    sample_complexity_bound,
    L_squared_curve,
    with_replacement_weights,
)

RIP_THRESHOLD = 1.0 / 3.0
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return (lo, hi)


# --------------------------------------------------------------------- RIP


def subspace_images(F: UnitaryOperator, T: UnionOfSubspaces) -> list[np.ndarray]:
    """``F B_U`` for every basis; reusable across sampling plans."""
    if T.n != F.n:
        raise InvalidInputError(f"prior lives in dimension {T.n}, transform in {F.n}")
    return [F.apply(B) for B in T.bases]


def _row_scales(plan: SamplingPlan, w=None):
    if w is None:
        d = plan.row_precond
    else:
        wv = np.asarray(w.w if isinstance(w, WeightVector) else w, dtype=float)
        d = bernoulli_precond(wv[plan.rows], plan.m, plan.n)
    return math.sqrt(plan.n / plan.m) * d


def branch_singular_values(plan: SamplingPlan, images, w=None) -> list[tuple[float, float]]:
    """``(sigma_min, sigma_max)`` of ``SDF B_U`` for each subspace."""
    rows = plan.rows
    scale = _row_scales(plan, w)
    out = []
    for FB in images:
        ell = FB.shape[1]
        if rows.size == 0:
            out.append((0.0, 0.0))
            continue
        s = np.linalg.svd(scale[:, None] * FB[rows], compute_uv=False)
        smin = float(s[-1]) if rows.size >= ell else 0.0
        out.append((smin, float(s[0])))
    return out


def deviation_from_singular_values(sv) -> float:
    return max(max(abs(hi - 1.0), abs(1.0 - lo)) for lo, hi in sv)


def rip_deviation(plan: SamplingPlan, F: UnitaryOperator, T: UnionOfSubspaces, w=None) -> float:
    """``sup_{x in T, ||x||=1} | ||SDF x|| - 1 |`` for the realized plan.

    Per subspace the supremum is attained at an extreme singular value of
    ``SDF B_U``.  With ``w`` given the preconditioner is recomputed from those
    Bernoulli weights instead of taken from the plan.
    """
    return deviation_from_singular_values(branch_singular_values(plan, subspace_images(F, T), w))


@dataclass
class RipEstimate:
    trials: int
    scheme: str
    success_rate: float
    successes: int
    sampler_failures: int
    deviation_quantiles: dict = field(default_factory=dict)
    interval: tuple = (0.0, 1.0)
    criterion: str = "deviation"

    def to_dict(self):
        return {
            "trials": self.trials,
            "scheme": self.scheme,
            "criterion": self.criterion,
            "success_rate": self.success_rate,
            "successes": self.successes,
            "sampler_failures": self.sampler_failures,
            "success_rate_wilson95": list(self.interval),
            "deviation_quantiles": {str(q): v for q, v in self.deviation_quantiles.items()},
        }


def draw_plan(scheme: str, rng: RngStream, *, w=None, p=None, m=None) -> SamplingPlan:
    """Dispatch to the sampler named by ``scheme``."""
    if scheme == "bernoulli":
        return sample_bernoulli(w, rng)
    if scheme == "bernoulli-cond":
        return sample_bernoulli_conditioned(w, rng)
    if scheme == "wr":
        return sample_with_replacement(p, m, rng)
    if scheme == "wor-reject":
        return sample_wor_rejection(p, m, rng)[0]
    if scheme == "wor-seq":
        return sample_wor_sequential(p, m, rng)
    raise InvalidInputError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def rip_success_probability(
    F: UnitaryOperator,
    T: UnionOfSubspaces,
    weights,
    scheme: str,
    trials: int,
    seed: int = 0,
    *,
    m: int | None = None,
    threshold: float = RIP_THRESHOLD,
    criterion: str = "deviation",
    workers: int = 1,
) -> RipEstimate:
    """Fraction of sampled plans whose ``SDF`` satisfies the RIP on ``T``.

    ``weights`` are Bernoulli weights for the Bernoulli schemes and a
    probability vector otherwise (then ``m`` is required).  With
    ``criterion="injective"`` a trial succeeds when ``SDF`` is injective on
    every subspace, the scale-free form of the condition.  Sampler errors
    count as failures and are tallied separately.
    """
    if trials < 1:
        raise InvalidInputError("trials must be at least 1")
    if criterion not in ("deviation", "injective"):
        raise InvalidInputError(f"unknown criterion {criterion!r}")
    images = subspace_images(F, T)
    bern = scheme.startswith("bernoulli")
    if not bern and m is None:
        raise InvalidInputError("m is required for with/without-replacement schemes")
    kw = {"w": weights} if bern else {"p": weights, "m": m}

    def one(t):
        rng = RngStream(seed, stream_id("rip", scheme, t))
        try:
            plan = draw_plan(scheme, rng, **kw)
        except ResourceExhaustedError:
            return None
        sv = branch_singular_values(plan, images)
        dev = deviation_from_singular_values(sv)
        if criterion == "injective":
            ok = all(lo > 1e-9 * max(hi, 1.0) for lo, hi in sv)
        else:
            ok = dev <= threshold
        return dev, ok

    results = pmap(one, range(trials), workers)
    devs = np.array([r[0] for r in results if r is not None])
    successes = sum(1 for r in results if r is not None and r[1])
    failures = sum(1 for r in results if r is None)
    quant = {q: float(np.quantile(devs, q)) for q in QUANTILES} if devs.size else {}
    return RipEstimate(trials, scheme, successes / trials, successes, failures, quant,
                       wilson_interval(successes, trials), criterion)


# --------------------------------------------------------------------- toy


@dataclass(frozen=True)
class ToyExampleSpec:
    """Prior ``{e_1}`` plus a maximally incoherent ``(k-1)``-dim subspace on coords ``2..n``."""

    n: int
    k: int
    m: int

    def __post_init__(self):
        if self.k < 2 or not self.k <= self.m < self.n:
            raise InvalidInputError("toy example needs 2 <= k <= m < n")


def toy_prior(spec: ToyExampleSpec) -> UnionOfSubspaces:
    """``e_1`` and the span of the first ``k-1`` DFT columns padded with a zero first row."""
    n, k = spec.n, spec.k
    e1 = np.zeros((n, 1))
    e1[0, 0] = 1.0
    t = np.arange(n - 1)[:, None]
    c = np.arange(k - 1)[None, :]
    U = np.zeros((n, k - 1), dtype=complex)
    U[1:] = np.exp(-2j * np.pi * t * c / (n - 1)) / math.sqrt(n - 1)
    return UnionOfSubspaces([e1, U])


def toy_alpha(spec: ToyExampleSpec) -> np.ndarray:
    a = np.full(spec.n, math.sqrt((spec.k - 1) / (spec.n - 1)))
    a[0] = 1.0
    return a


def toy_rip_condition(indices, spec: ToyExampleSpec) -> bool:
    """Row 1 is sampled and at least ``k-1`` distinct other rows are."""
    idx = np.unique(np.asarray(indices, dtype=np.int64))
    return bool(np.any(idx == 0)) and int(np.count_nonzero(idx > 0)) >= spec.k - 1


def toy_failure_probabilities(spec: ToyExampleSpec, trials: int, seed: int = 0,
                              workers: int = 1, wor: str = "wor-reject") -> dict:
    """Empirical chances of missing row 1 under optimized without-replacement and Bernoulli draws."""
    alpha = toy_alpha(spec)
    w = optimized_bernoulli_weights(alpha, spec.m)
    p = with_replacement_weights(alpha)

    def one(t):
        wor_plan = draw_plan(wor, RngStream(seed, stream_id("toy", wor, t)), p=p, m=spec.m)
        ber_plan = sample_bernoulli(w, RngStream(seed, stream_id("toy", "bernoulli", t)))
        return (0 not in wor_plan.indices, 0 not in ber_plan.indices,
                ber_plan.m_realized < spec.k)

    res = np.array(pmap(one, range(trials), workers), dtype=bool).reshape(-1, 3)
    counts = res.sum(axis=0)
    names = ("wor_miss_rate", "bernoulli_miss_rate", "bernoulli_undercount_rate")
    out = {"n": spec.n, "k": spec.k, "m": spec.m, "trials": trials, "seed": seed}
    for name, c in zip(names, counts):
        out[name] = float(c / trials)
        out[name + "_wilson95"] = list(wilson_interval(int(c), trials))
    out["analytic_wor"] = (1.0 - 1.0 / spec.k) ** spec.m
    return out


def toy_rip_rates(spec: ToyExampleSpec, trials: int, seed: int = 0, workers: int = 1,
                  wor: str = "wor-seq") -> dict:
    """Toy RIP success (injectivity on both branches) for Bernoulli vs without-replacement."""
    F = identity(spec.n)
    T = toy_prior(spec)
    alpha = toy_alpha(spec)
    w = optimized_bernoulli_weights(alpha, spec.m)
    p = with_replacement_weights(alpha)
    ber = rip_success_probability(F, T, w, "bernoulli", trials, seed,
                                  criterion="injective", workers=workers)
    wr = rip_success_probability(F, T, p, wor, trials, seed, m=spec.m,
                                 criterion="injective", workers=workers)
    return {"bernoulli": ber.to_dict(), wor: wr.to_dict()}


# ------------------------------------------------------------ noise and curves


def noise_tail_exceedance(alpha, m: int, ts, trials: int, seed: int = 0, workers: int = 1) -> dict:
    """Fraction of optimized-Bernoulli plans whose noise factor beats the tail bound, per ``t``."""
    alpha = np.asarray(alpha, dtype=float)
    w = optimized_bernoulli_weights(alpha, m)

    def one(t):
        return noise_factor(sample_bernoulli(w, RngStream(seed, stream_id("noise", t))), alpha, w)

    factors = np.array(pmap(one, range(trials), workers))
    out = {}
    for t in ts:
        bound = noise_tail_bound(alpha, w, t)
        frac = float(np.mean(factors > bound))
        out[float(t)] = {"bound": bound, "exceed": frac,
                         "stderr": math.sqrt(max(t * (1 - t), frac * (1 - frac)) / trials)}
    return out


@dataclass
class ComplexityCurves:
    by_m: list       # (m, L^2(alpha, m), ||alpha||^2)
    by_lambda: list  # (Lambda, m_star_bernoulli, m_star_wr)


def complexity_curves(alpha, m_grid, Lambda_grid) -> ComplexityCurves:
    alpha = np.asarray(alpha, dtype=float)
    if len(m_grid) == 0 or len(Lambda_grid) == 0:
        raise InvalidInputError("grids must be nonempty")
    norm_sq = float(np.sum(alpha ** 2))
    Lsq = L_squared_curve(alpha, m_grid)
    by_m = [(int(m), float(v), norm_sq) for m, v in zip(m_grid, Lsq)]
    by_lambda = []
    for lam in Lambda_grid:
        q = sample_complexity_bound(alpha, lam)
        by_lambda.append((float(lam), q.m_star, q.wr_bound))
    return ComplexityCurves(by_m, by_lambda)
