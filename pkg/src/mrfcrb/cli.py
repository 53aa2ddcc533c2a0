"""Command-line front end.

Subcommands: estimate (MC CRB over a theta grid), exact (enumeration
oracle), validate (MC vs. oracle), scaling (CRB vs. field size), and
benchmark (estimator variance vs. CRB). All emit a stable CSV schema
plus a JSON report; progress goes to stderr.
"""

import argparse
import concurrent.futures
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .estimators import EstimatorConfig, replicate_benchmark
from .fim import (
    SingularFimError,
    accumulator_from_batch,
    crb_from_fim,
    effective_sample_size,
    finalize_fim,
)
from .kernels import RNG_NAME
from .lattice import LatticeSizeError
from .model import make_model
from .oracle import IntractableSizeError, exact_crb
from .samplers import SamplerKind, derive_seeds, run_chain

CSV_COLUMNS = [
    "mode", "K", "width", "height", "boundary", "theta", "sampler",
    "n_mc", "n_burn", "seed", "fim", "fim_se", "crb", "ess",
    "exact_fim", "exact_crb", "rel_err", "emp_var", "emp_bias",
    "n_ml", "elapsed_s",
]

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INTRACTABLE = 4


class ConfigError(ValueError):
    pass


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _parse_size(text: str):
    try:
        if "x" in text:
            w, h = text.split("x")
            return int(w), int(h)
        n = int(text)
        return n, n
    except ValueError as exc:
        raise ConfigError(f"bad --size value {text!r}; expected WxH") from exc


def _parse_theta(text: str):
    try:
        if ":" in text:
            a, b, n = text.split(":")
            grid = np.linspace(float(a), float(b), int(n))
        else:
            grid = np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad --theta value {text!r}; expected a:b:n or a comma list") from exc
    if len(grid) > 1 and not np.all(np.diff(grid) > 0):
        raise ConfigError("theta grid must be strictly increasing")
    return [float(t) for t in grid]


def _boundary(name: str) -> str:
    return {"torus": "toroidal", "toroidal": "toroidal", "free": "free"}.get(name, name)


def _resolve_k(args) -> int:
    if args.k is not None:
        k = args.k
    else:
        k = 3 if getattr(args, "model", "ising") == "potts" else 2
    if getattr(args, "model", None) == "ising" and k != 2:
        raise ConfigError("--model ising requires --k 2")
    if getattr(args, "model", None) == "potts" and k < 3:
        raise ConfigError("--model potts requires --k >= 3")
    if k < 2:
        raise ConfigError("--k must be >= 2")
    return k


def _echo(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "command")}


def write_outputs(out_dir: str, mode: str, rows: list, args_echo: dict,
                  extra: dict | None = None) -> str:
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{mode}.csv")
    with open(csv_path, "w") as f:
        f.write(f"# tool=mrfcrb {__version__}\n")
        f.write(f"# rng={RNG_NAME}\n")
        f.write(f"# master_seed={args_echo.get('seed')}\n")
        f.write(f"# config={json.dumps(args_echo, sort_keys=True)}\n")
        f.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            f.write(",".join(_fmt(row.get(c)) for c in CSV_COLUMNS) + "\n")
    report = {
        "tool": f"mrfcrb {__version__}",
        "rng": RNG_NAME,
        "config": args_echo,
        "runs": rows,
    }
    if extra:
        report.update(extra)
    with open(os.path.join(out_dir, f"{mode}.json"), "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
    return csv_path


def _estimate_one(model, theta, sampler, n_mc, n_burn, seed):
    t0 = time.perf_counter()
    out = run_chain(model, theta, sampler, n_burn=n_burn, n_mc=n_mc, seed=seed)
    acc = accumulator_from_batch(out.stat_series)
    ess = effective_sample_size(out.stat_series[:, 0])
    est = finalize_fim(acc, [ess], [theta], model.descriptor())
    report = crb_from_fim(est)
    return {
        "fim": float(est.matrix[0, 0]),
        "fim_se": float(est.se_matrix[0, 0]),
        "crb": float(report.crb[0, 0]),
        "ess": float(ess),
        "elapsed_s": time.perf_counter() - t0,
    }


def _run_grid(jobs, workers):
    """Run (key, callable) jobs on a thread pool; the compiled kernels
    release the GIL. Results come back sorted by key."""
    results = {}
    if workers <= 1:
        for key, fn in jobs:
            results[key] = fn()
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(fn): key for key, fn in jobs}
            for fut in concurrent.futures.as_completed(futures):
                results[futures[fut]] = fut.result()
    return [results[key] for key in sorted(results)]


def _base_row(mode, model, **kw):
    row = {c: "" for c in CSV_COLUMNS}
    row.update(
        mode=mode,
        K=model.num_labels,
        width=model.graph.width,
        height=model.graph.height,
        boundary=model.graph.boundary,
    )
    row.update(kw)
    return row


def cmd_estimate(args) -> int:
    k = _resolve_k(args)
    width, height = _parse_size(args.size)
    model = make_model(width, height, _boundary(args.boundary), k)
    thetas = _parse_theta(args.theta)
    sampler = SamplerKind.parse(args.sampler)
    seeds = derive_seeds(args.seed, args.n_seeds)

    jobs = []
    for ti, theta in enumerate(thetas):
        for si, seed in enumerate(seeds):
            def job(theta=theta, seed=seed):
                return _estimate_one(model, theta, sampler, args.nmc, args.burn, seed)
            jobs.append(((ti, si), job))
    _progress(f"estimate: {len(jobs)} chain(s) on {model.descriptor()}")
    results = _run_grid(jobs, args.workers)

    rows = []
    i = 0
    for theta in thetas:
        for seed in seeds:
            r = results[i]
            i += 1
            rows.append(_base_row(
                "estimate", model, theta=theta, sampler=args.sampler,
                n_mc=args.nmc, n_burn=args.burn, seed=seed, **r,
            ))
    csv_path = write_outputs(args.out, "estimate", rows, _echo(args))
    _progress(f"wrote {csv_path}")
    return 0


def cmd_exact(args) -> int:
    k = _resolve_k(args)
    width, height = _parse_size(args.size)
    model = make_model(width, height, _boundary(args.boundary), k)
    rows = []
    for theta in _parse_theta(args.theta):
        t0 = time.perf_counter()
        report = exact_crb(model, theta)
        rows.append(_base_row(
            "exact", model, theta=theta,
            exact_fim=float(report.fim.matrix[0, 0]),
            exact_crb=float(report.crb[0, 0]),
            elapsed_s=time.perf_counter() - t0,
        ))
    csv_path = write_outputs(args.out, "exact", rows, _echo(args))
    _progress(f"wrote {csv_path}")
    return 0


def cmd_validate(args) -> int:
    k = _resolve_k(args)
    width, height = _parse_size(args.size)
    model = make_model(width, height, _boundary(args.boundary), k)
    thetas = _parse_theta(args.theta)
    sampler = SamplerKind.parse(args.sampler)
    seeds = derive_seeds(args.seed, args.n_seeds)

    jobs = []
    for ti, theta in enumerate(thetas):
        for si, seed in enumerate(seeds):
            def job(theta=theta, seed=seed):
                return _estimate_one(model, theta, sampler, args.nmc, args.burn, seed)
            jobs.append(((ti, si), job))
    _progress(f"validate: {len(jobs)} chain(s) on {model.descriptor()}")
    results = _run_grid(jobs, args.workers)

    rows = []
    all_pass = True
    print(f"{'theta':>7} {'seed':>6} {'mc_fim':>12} {'exact_fim':>12} {'rel_err':>9}  status")
    i = 0
    for theta in thetas:
        exact = exact_crb(model, theta)
        exact_fim = float(exact.fim.matrix[0, 0])
        for seed in seeds:
            r = results[i]
            i += 1
            rel = abs(r["fim"] - exact_fim) / exact_fim
            ok = rel <= args.tol
            all_pass &= ok
            print(f"{theta:7.3f} {str(seed)[:6]:>6} {r['fim']:12.5f} "
                  f"{exact_fim:12.5f} {rel:9.4%}  {'PASS' if ok else 'FAIL'}")
            rows.append(_base_row(
                "validate", model, theta=theta, sampler=args.sampler,
                n_mc=args.nmc, n_burn=args.burn, seed=seed,
                exact_fim=exact_fim, exact_crb=float(exact.crb[0, 0]),
                rel_err=rel, **r,
            ))
    print(f"overall: {'PASS' if all_pass else 'FAIL'} (tolerance {args.tol:.2%})")
    csv_path = write_outputs(args.out, "validate", rows, _echo(args))
    _progress(f"wrote {csv_path}")
    return 0


def cmd_scaling(args) -> int:
    k_list = [int(v) for v in args.k_list.split(",")]
    sizes = [_parse_size(s) for s in args.sizes.split(",")]
    sampler = SamplerKind.parse(args.sampler)
    boundary = _boundary(args.boundary)

    jobs = []
    models = {}
    for ki, k in enumerate(k_list):
        for si, (w, h) in enumerate(sizes):
            model = make_model(w, h, boundary, k)
            models[(ki, si)] = model
            theta = model.critical_theta if args.theta is None else float(args.theta)
            seed = derive_seeds(args.seed, len(k_list) * len(sizes))[ki * len(sizes) + si]

            def job(model=model, theta=theta, seed=seed):
                return _estimate_one(model, theta, sampler, args.nmc, args.burn, seed)
            jobs.append(((ki, si), job))
    _progress(f"scaling: {len(jobs)} chain(s)")
    results = _run_grid(jobs, args.workers)

    rows = []
    fits = {}
    i = 0
    per_k = {k: [] for k in k_list}
    for ki, k in enumerate(k_list):
        for si, (w, h) in enumerate(sizes):
            model = models[(ki, si)]
            theta = model.critical_theta if args.theta is None else float(args.theta)
            r = results[i]
            i += 1
            rows.append(_base_row(
                "scaling", model, theta=theta, sampler=args.sampler,
                n_mc=args.nmc, n_burn=args.burn,
                seed=derive_seeds(args.seed, len(k_list) * len(sizes))[ki * len(sizes) + si],
                **r,
            ))
            per_k[k].append((w * h, r["crb"]))
    for k, points in per_k.items():
        if len(points) < 2:
            print(f"K={k}: single size supplied, log-log fit skipped")
            continue
        logn = np.log([p[0] for p in points])
        logc = np.log([p[1] for p in points])
        slope, intercept = np.polyfit(logn, logc, 1)
        pred = slope * logn + intercept
        ss_res = float(((logc - pred) ** 2).sum())
        ss_tot = float(((logc - logc.mean()) ** 2).sum())
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        fits[str(k)] = {"slope": float(slope), "intercept": float(intercept), "r2": r2}
        print(f"K={k}: log CRB vs log N slope={slope:.4f} R^2={r2:.5f}")
    csv_path = write_outputs(args.out, "scaling", rows, _echo(args), extra={"fits": fits})
    _progress(f"wrote {csv_path}")
    return 0


def cmd_benchmark(args) -> int:
    k = _resolve_k(args)
    width, height = _parse_size(args.size)
    model = make_model(width, height, _boundary(args.boundary), k)
    if args.nml < 2:
        raise ConfigError("--nml must be >= 2 (variance undefined otherwise)")
    cfg = EstimatorConfig(
        n_samples=args.posterior_samples,
        n_burn=args.posterior_burn,
        aux_moves=args.aux_moves,
        proposal_sd=args.proposal_sd,
        crb_n_mc=args.nmc,
        crb_n_burn=args.burn,
    )
    rows = []
    thetas = _parse_theta(args.theta)
    seeds = derive_seeds(args.seed, len(thetas))
    for theta, seed in zip(thetas, seeds):
        _progress(f"benchmark: theta={theta} N_ML={args.nml}")
        t0 = time.perf_counter()
        bench = replicate_benchmark(model, theta, args.nml, cfg, seed=seed)
        rows.append(_base_row(
            "benchmark", model, theta=theta, sampler="gibbs",
            n_mc=args.nmc, n_burn=args.burn, seed=seed,
            crb=bench.crb_at_theta,
            emp_var=bench.empirical_variance,
            emp_bias=bench.empirical_bias,
            n_ml=args.nml,
            elapsed_s=time.perf_counter() - t0,
        ))
    csv_path = write_outputs(args.out, "benchmark", rows, _echo(args))
    _progress(f"wrote {csv_path}")
    return 0


def _add_common(p, nmc_default=100_000):
    p.add_argument("--model", choices=["ising", "potts"], default=None)
    p.add_argument("--k", type=int, default=None, help="number of labels K")
    p.add_argument("--size", default="16x16", help="WxH lattice size")
    p.add_argument("--boundary", choices=["torus", "free"], default="torus")
    p.add_argument("--sampler", choices=["gibbs", "gibbs_random_scan", "sw"], default="gibbs")
    p.add_argument("--nmc", type=int, default=nmc_default, help="Monte Carlo samples")
    p.add_argument("--burn", type=int, default=1000, help="burn-in sweeps")
    p.add_argument("--seed", type=int, default=1, help="master seed")
    p.add_argument("--n-seeds", type=int, default=1, help="independent chains per theta")
    p.add_argument("--workers", type=int, default=1, help="thread-pool size")
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrfcrb",
        description="Monte Carlo Cramer-Rao bounds for Ising/Potts random fields",
    )
    parser.add_argument("--version", action="version", version=f"mrfcrb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="MC FIM/CRB over a theta grid")
    _add_common(p)
    p.add_argument("--theta", default="0.5", help="a:b:n grid or comma list")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("exact", help="enumeration-oracle FIM/CRB (tiny lattices)")
    _add_common(p)
    p.add_argument("--theta", default="0.5")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("validate", help="MC estimate vs. enumeration oracle")
    _add_common(p, nmc_default=200_000)
    p.add_argument("--theta", default="0.1:1.5:15")
    p.add_argument("--tol", type=float, default=0.05, help="relative-error tolerance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("scaling", help="CRB vs. field size near criticality")
    _add_common(p)
    p.set_defaults(sampler="sw", boundary="free")
    p.add_argument("--k-list", default="2,3,4", help="comma list of K values")
    p.add_argument("--sizes", default="16,32,64", help="comma list of sizes (side or WxH)")
    p.add_argument("--theta", default=None,
                   help="override coupling (default: log(1+sqrt(K)) per K)")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("benchmark", help="exchange-estimator variance vs. CRB")
    _add_common(p)
    p.set_defaults(boundary="free")
    p.add_argument("--theta", default="0.2,0.4")
    p.add_argument("--nml", type=int, default=100, help="number of replicates")
    p.add_argument("--posterior-samples", type=int, default=1000)
    p.add_argument("--posterior-burn", type=int, default=250)
    p.add_argument("--aux-moves", type=int, default=10)
    p.add_argument("--proposal-sd", type=float, default=0.05)
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except IntractableSizeError as exc:
        _progress(f"error: {exc}")
        return EXIT_INTRACTABLE
    except SingularFimError as exc:
        _progress(f"error: {exc}")
        return EXIT_NUMERICAL
    except (ConfigError, LatticeSizeError, ValueError) as exc:
        _progress(f"error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
