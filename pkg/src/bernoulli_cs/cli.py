"""Command-line entry point: ``bernoulli-cs <subcommand> ...``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .analysis import (
    ToyExampleSpec,
    rip_success_probability,
    toy_failure_probabilities,
    toy_rip_rates,
)
from .coherence import UnionOfSubspaces, coherence_dictionary, coherence_exact, coherence_samples
from .errors import InvalidInputError, ResourceExhaustedError, SamplingError
from .experiments import ExperimentConfig, run_experiment
from .operators import MeasurementOperator, add_noise
from .recovery import SparsePriorConfig, recover_sparse
from .rng import RngStream, stream_id
from .sampling import (
    SCHEMES,
    SamplingPlan,
    sample_bernoulli,
    sample_bernoulli_conditioned,
    sample_with_replacement,
    sample_wor_rejection,
    sample_wor_sequential,
)
from .transforms import dft1d, dft2d, haar1d, haar2d, haar_atoms, identity
from .weights import (
    heuristic_marginal_weights,
    optimized_bernoulli_weights,
    sample_complexity_bound,
    with_replacement_weights,
)


def _shape(text):
    return tuple(int(s) for s in text.split(","))


def _transform(name, n, shape=None, levels=None):
    if name == "dft1d":
        return dft1d(n)
    if name == "dft2d":
        if shape is None:
            raise InvalidInputError("--shape H,W[,C] is required for dft2d")
        return dft2d(shape)
    if name == "haar":
        return haar2d(shape, levels) if shape is not None else haar1d(n, levels)
    if name == "identity":
        return identity(n)
    raise InvalidInputError(f"unknown transform {name!r}")


def _read_subspaces(path):
    data = io.read_json(path)
    bases = data["subspaces"] if isinstance(data, dict) else data
    return UnionOfSubspaces.from_spanning([np.asarray(b, dtype=float) for b in bases])


def cmd_coherence(args):
    kind, _, path = args.prior.partition(":")
    if kind == "haar":
        n = args.n
        if n is None:
            raise InvalidInputError("--n is required with --prior haar")
        F = _transform(args.transform, n, args.shape)
        Psi = haar2d(args.shape, args.levels) if args.shape else haar1d(n, args.levels)
        cv = coherence_dictionary(F, haar_atoms(Psi, representative=True))
    elif kind == "subspaces":
        T = _read_subspaces(path)
        cv = coherence_exact(_transform(args.transform, T.n, args.shape, args.levels), T)
    elif kind in ("atoms", "samples"):
        X = io.read_matrix(path)
        F = _transform(args.transform, X.shape[1], args.shape, args.levels)
        if kind == "atoms":
            cv = coherence_dictionary(F, X)
        else:
            cv = coherence_samples(F, X, RngStream(args.seed, stream_id("coherence-samples")))
    else:
        raise InvalidInputError("--prior must be subspaces:FILE, atoms:FILE, samples:FILE or haar")
    io.write_alpha(args.out, cv.alpha)


def cmd_weights(args):
    alpha = io.read_alpha(args.alpha)
    if args.scheme == "bernoulli":
        wv = optimized_bernoulli_weights(alpha, args.m)
        footer = {"L2": wv.Lsq, "J": wv.J, "scheme": "bernoulli", "m": args.m}
        w = wv.w
    elif args.scheme == "with-replacement":
        w = with_replacement_weights(alpha)
        footer = {"L2": float(np.sum(alpha ** 2)), "scheme": "with-replacement", "m": args.m}
    else:
        hw = heuristic_marginal_weights(with_replacement_weights(alpha), args.m)
        w = hw.w
        footer = {"lambda": hw.lam, "scheme": "heuristic", "m": args.m}
    io.write_weights(args.out, alpha, w, footer)


def cmd_complexity_bound(args):
    q = sample_complexity_bound(io.read_alpha(args.alpha), args.Lambda)
    io.write_json(args.out, {"m_star": q.m_star, "L2_at_m_star": q.Lsq_at_m_star, "wr_bound": q.wr_bound,
                             "feasible": q.feasible})


def cmd_sample(args):
    alpha, weight, footer = io.read_weights(args.weights)
    m = args.m if args.m is not None else int(footer.get("m", 0))
    if m < 1:
        raise InvalidInputError("m missing: pass --m or use a weights file with an '# m=' footer")
    kind = footer.get("scheme", "bernoulli")
    rng = RngStream(args.seed, stream_id("sample", args.scheme))
    if args.scheme.startswith("bernoulli"):
        if kind == "with-replacement":
            raise InvalidInputError("Bernoulli schemes need inclusion probabilities, not a with-replacement law")
        w = weight
        plan = sample_bernoulli(w, rng) if args.scheme == "bernoulli" else sample_bernoulli_conditioned(w, rng)
    else:
        p = weight if kind == "with-replacement" else with_replacement_weights(alpha)
        if args.scheme == "wr":
            plan = sample_with_replacement(p, m, rng)
        elif args.scheme == "wor-reject":
            plan = sample_wor_rejection(p, m, rng)[0]
        else:
            plan = sample_wor_sequential(p, m, rng)
    io.write_json(args.out, plan.to_dict())


def cmd_measure(args):
    plan = SamplingPlan.from_dict(io.read_json(args.plan))
    x = io.read_vector(args.signal, "real")
    F = _transform(args.transform, plan.n, args.shape)
    b = MeasurementOperator(F, plan, apply_precond=False).forward(x)
    b = add_noise(b, args.sigma, plan.m, "complex" if F.field == "complex" else "real",
                  RngStream(args.seed, stream_id("measure")))
    io.write_vector(args.out, b)


def cmd_recover(args):
    plan = SamplingPlan.from_dict(io.read_json(args.plan))
    F = _transform(args.transform, plan.n, args.shape)
    b = io.read_vector(args.measurements, "complex" if F.field == "complex" else "real")
    if args.prior != "haar":
        raise InvalidInputError("only --prior haar is supported")
    Psi = haar2d(args.shape, args.levels) if args.shape else haar1d(plan.n, args.levels)
    x0 = io.read_vector(args.signal, "real") if args.signal else None
    cfg = SparsePriorConfig(Psi, args.k, lasso_penalty=args.penalty)
    xhat, rep = recover_sparse(MeasurementOperator(F, plan), b, cfg, x0=x0, sigma=args.sigma)
    io.write_json(args.out, rep.to_dict())
    if args.xhat:
        io.write_vector(args.xhat, xhat)


def cmd_rip_estimate(args):
    c = io.read_json(args.config)
    T = UnionOfSubspaces.from_spanning([np.asarray(b, dtype=float) for b in c["subspaces"]])
    F = _transform(c.get("transform", "dft1d"), T.n)
    alpha = coherence_exact(F, T).alpha
    scheme = c.get("scheme", "bernoulli")
    m = int(c["m"])
    weights = optimized_bernoulli_weights(alpha, m) if scheme.startswith("bernoulli") else with_replacement_weights(alpha)
    est = rip_success_probability(
        F, T, weights, scheme, int(c.get("trials", 1000)), int(c.get("seed", 0)), m=m,
        threshold=float(c.get("threshold", 1.0 / 3.0)), criterion=c.get("criterion", "deviation"),
        workers=args.workers,
    )
    io.write_json(args.out, est.to_dict())


def cmd_toy(args):
    spec = ToyExampleSpec(args.n, args.k, args.m)
    out = toy_failure_probabilities(spec, args.trials, args.seed, args.workers)
    out["rip"] = toy_rip_rates(spec, args.trials, args.seed, args.workers)
    io.write_json(args.out, out)


def cmd_experiment(args):
    cfg = ExperimentConfig.from_dict(io.read_json(args.config))
    cfg.workers = args.workers
    run_experiment(cfg, args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bernoulli-cs", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coherence", parents=[common], help="local coherences of a prior")
    p.add_argument("--transform", choices=["dft1d", "dft2d", "haar", "identity"], default="dft1d")
    p.add_argument("--prior", required=True, help="subspaces:FILE.json, atoms:FILE.csv, samples:FILE.csv or haar")
    p.add_argument("--n", type=int)
    p.add_argument("--shape", type=_shape)
    p.add_argument("--levels", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("weights", parents=[common], help="sampling weights from coherences")
    p.add_argument("--alpha", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--scheme", choices=["bernoulli", "with-replacement", "heuristic"], default="bernoulli")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("complexity-bound", parents=[common], help="smallest m meeting m / L^2 >= Lambda")
    p.add_argument("--alpha", required=True)
    p.add_argument("--lambda", dest="Lambda", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_complexity_bound)

    p = sub.add_parser("sample", parents=[common], help="draw a sampling plan")
    p.add_argument("--weights", required=True)
    p.add_argument("--scheme", choices=SCHEMES, default="bernoulli-cond")
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("measure", parents=[common], help="simulate measurements of a signal under a plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--signal", required=True)
    p.add_argument("--transform", choices=["dft1d", "dft2d", "identity"], default="dft1d")
    p.add_argument("--shape", type=_shape)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("recover", parents=[common], help="sparse recovery from plan and measurements")
    p.add_argument("--plan", required=True)
    p.add_argument("--measurements", required=True)
    p.add_argument("--prior", default="haar")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--transform", choices=["dft1d", "dft2d", "identity"], default="dft1d")
    p.add_argument("--shape", type=_shape)
    p.add_argument("--levels", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--penalty", type=float)
    p.add_argument("--signal", help="ground truth, fills the error fields")
    p.add_argument("--xhat", help="also write the estimate here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("rip-estimate", parents=[common], help="Monte-Carlo RIP success probability")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rip_estimate)

    p = sub.add_parser("toy", parents=[common], help="partially deterministic toy example")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("experiment", parents=[common], help="run a config-driven batch")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InvalidInputError, SamplingError, ResourceExhaustedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
