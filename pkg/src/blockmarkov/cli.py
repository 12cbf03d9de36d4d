"""Command line interface: simulate -> spectrum -> law -> compare, plus
moments, poisson and estimate.

Exit status is 0 on success, 2 on a usage error and 1 on a runtime error.
Every run prints its resolved configuration as one JSON line on stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import io
from .errors import BlockMarkovError
from .limitlaw import (default_grid, graphon_wm, graphon_wq, invert_density, law_cdf, law_system,
                       support_edge)
from .matrices import centered, expected_frequency, frequency_matrix, q_transform, transition_matrix
from .model import BlockModel, build_layout
from .moments import hankel_psd, quadrature_moments, tree_moments
from .pipeline import estimate_parameters, preprocess, read_clustering, read_transitions
from .poisson import DEFAULT_EPSILON, poisson_certificate, poisson_check
from .sampler import Equilibrium, UniformState, sample_path, stream_edge_counts
from .spectra import EmpiricalDistribution, ks_distance, singular_values, trim_top

log = logging.getLogger("blockmarkov")


def _resolve_ell(args, model, n) -> int:
    if args.ell is not None:
        return int(args.ell)
    coef = model.lam if args.ell_coef is None else args.ell_coef
    return int(round(coef * n * n))


def _echo(config: dict) -> None:
    print(json.dumps(config, sort_keys=True))


def cmd_simulate(args) -> None:
    model = BlockModel.load(args.model)
    layout = build_layout(model, args.n)
    ell = _resolve_ell(args, model, args.n)
    init = Equilibrium() if args.init == "equilibrium" else UniformState()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = {"command": "simulate", "model": model.to_dict(), "n": args.n, "ell": ell,
              "seed": args.seed, "init": args.init, "sizes": layout.sizes.tolist(), "out_dir": str(out)}
    _echo(config)
    if args.dump_path:
        path = sample_path(model, layout, ell, init, args.seed)
        io.write_spectrum(out / "path.csv", path.states)
        counts = frequency_matrix(path)
    else:
        counts = stream_edge_counts(model, layout, ell, init, args.seed)
    io.write_counts(out / "counts.csv", counts)
    io.write_block_constant(out / "expected.csv", expected_frequency(model, layout, ell))
    io.write_json(out / "config.json", config)


def _load_run_config(counts_path):
    cfg = Path(counts_path).with_name("config.json")
    return json.loads(cfg.read_text()) if cfg.exists() else {}


def cmd_spectrum(args) -> None:
    cfg = {}
    if args.matrix:
        M = io.read_dense(args.matrix)
        n = M.shape[0]
        transform = "matrix"
        default_scale = 1.0
    else:
        cfg = _load_run_config(args.counts)
        n = args.n if args.n is not None else cfg.get("n")
        if n is None:
            raise ValueError("--n is required when the counts file has no config.json beside it")
        counts = io.read_counts(args.counts, int(n))
        transform = args.transform
        if transform in ("m", "q"):
            if args.model:
                model = BlockModel.load(args.model)
            elif "model" in cfg:
                model = BlockModel.from_dict(cfg["model"])
            else:
                raise ValueError("--model is required for the m and q transforms")
            layout = build_layout(model, int(n))
            ell = args.ell if args.ell is not None else cfg.get("ell", counts.total)
            M = centered(counts, expected_frequency(model, layout, ell))
            if transform == "q":
                M = q_transform(M, model, layout, ell)
        elif transform == "phat":
            M = transition_matrix(counts).toarray()
        else:
            M = counts.dense()
        default_scale = math.sqrt(n) if transform in ("nhat", "m") else 1.0 / math.sqrt(n)
    scale = default_scale if args.scale is None else args.scale
    _echo({"command": "spectrum", "source": args.matrix or args.counts, "transform": transform,
           "n": int(n), "scale": scale, "method": args.method, "out": args.out})
    spec = singular_values(M, method=args.method)
    io.write_spectrum(args.out, spec.values / scale)


def cmd_law(args) -> None:
    model = BlockModel.load(args.model)
    system = law_system(model, args.target, tol=args.tol, max_iter=args.max_iter, damping=args.damping)
    grid = default_grid(system, args.points)
    _echo({"command": "law", "model": model.to_dict(), "target": args.target, "points": len(grid),
           "x_max": float(grid[-1]), "epsilon": args.epsilon, "extrapolate": not args.no_extrapolate,
           "tol": args.tol, "max_iter": args.max_iter, "damping": args.damping, "out": args.out})
    dens = invert_density(system, grid, args.epsilon, extrapolate=not args.no_extrapolate)
    io.write_density(args.out, dens if args.symmetric else dens.fold())
    if args.diagnostics:
        diag = {k: v for k, v in dens.diagnostics.items() if k != "iterations"}
        diag["support_edge"] = support_edge(dens)
        diag["mass"] = dens.fold().mass()
        io.write_json(args.diagnostics, diag)


def cmd_moments(args) -> None:
    model = BlockModel.load(args.model)
    M = args.max_order // 2
    _echo({"command": "moments", "model": model.to_dict(), "target": args.target,
           "max_order": 2 * M, "out": args.out})
    graphon = graphon_wm(model) if args.target.upper() == "N" else graphon_wq(model)
    tree = tree_moments(graphon, M)
    report = {"tree-sum": tree.to_dict()}
    if args.quadrature:
        system = law_system(model, args.target)
        dens = invert_density(system, default_grid(system))
        report["quadrature"] = quadrature_moments(dens, M).to_dict()
    check = hankel_psd(tree, M)
    report["hankel_min_eigenvalue"] = check.min_eigenvalue
    report["hankel_psd"] = check.psd
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def cmd_poisson(args) -> None:
    model = BlockModel.load(args.model)
    layout = build_layout(model, args.n)
    ell = _resolve_ell(args, model, args.n)
    k1, k2 = args.edge_clusters
    if not (0 <= k1 < model.K and 0 <= k2 < model.K):
        raise ValueError(f"edge clusters must lie in 0..{model.K - 1}")
    i = layout.states_of(k1)[0]
    dst = layout.states_of(k2)
    if args.self_loop:
        if k1 != k2:
            raise ValueError("--self-loop needs identical edge clusters")
        j = i
    else:
        j = dst[1] if (k1 == k2 and len(dst) > 1) else dst[0]
        if i == j:
            raise ValueError("cluster has a single state; only a self-loop edge exists")
    _echo({"command": "poisson", "model": model.to_dict(), "n": args.n, "ell": ell, "edge": [i, j],
           "replicas": args.replicas, "seed": args.seed, "epsilon": args.epsilon, "out": args.out})
    rep = poisson_check(model, layout, ell, (i, j), args.replicas, args.seed, args.workers)
    cert = poisson_certificate(model, layout, ell, k1, k2, self_loop=(i == j), epsilon=args.epsilon)
    report = {"edge": list(rep.edge), "clusters": list(rep.clusters), "rate": rep.rate, "tv": rep.tv,
              "tv_se": rep.tv_se, "mean": rep.mean, "variance": rep.variance, "replicas": rep.replicas,
              "certificate": {"epsilon": cert.epsilon, "r0": cert.r0, "bound": cert.bound}}
    io.write_json(args.out, report)
    if args.histogram:
        io.write_rows(args.histogram, ["value", "count"], sorted(rep.histogram.items()))


def cmd_estimate(args) -> None:
    data = read_transitions(args.transitions, args.format)
    data = preprocess(data, args.min_visits, args.drop_self_loops)
    sigma = read_clustering(args.clustering, data)
    _echo({"command": "estimate", "transitions": args.transitions, "format": args.format,
           "clustering": args.clustering, "min_visits": args.min_visits,
           "drop_self_loops": args.drop_self_loops, "n": data.n_states, "ell": data.ell, "out": args.out})
    est = estimate_parameters(data, sigma)
    io.write_json(args.out, est.to_dict())


def cmd_compare(args) -> None:
    values = io.read_spectrum(args.spectrum)
    dens = io.read_density(args.density)
    _echo({"command": "compare", "spectrum": args.spectrum, "density": args.density,
           "trim": args.trim, "out": args.out})
    cdf = law_cdf(dens)
    dist = EmpiricalDistribution(values)
    report = {"points": int(dist.size), "trim": args.trim,
              "ks_untrimmed": ks_distance(dist, cdf),
              "ks_trimmed": ks_distance(trim_top(dist, args.trim), cdf)}
    if args.out:
        io.write_json(args.out, report)
    else:
        print(json.dumps(report, indent=2))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blockmarkov", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_ell(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--ell", type=int, help="path length")
        g.add_argument("--ell-coef", type=float, help="path length as a multiple of n^2 (default: model lambda)")

    p = sub.add_parser("simulate", help="simulate a path and export its edge counts")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    add_ell(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=["equilibrium", "uniform"], default="equilibrium")
    p.add_argument("--dump-path", action="store_true", help="also write the state sequence")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="singular values of a matrix built from counts")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--counts")
    src.add_argument("--matrix", help="dense CSV matrix")
    p.add_argument("--transform", choices=["nhat", "phat", "m", "q"], default="nhat")
    p.add_argument("--n", type=int)
    p.add_argument("--model")
    p.add_argument("--ell", type=int)
    p.add_argument("--scale", type=float, help="divide singular values by this (default: sqrt(n) for nhat/m, 1/sqrt(n) for phat/q)")
    p.add_argument("--method", choices=["dilation", "svd"], default="dilation")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("law", help="solve the limiting singular value law")
    p.add_argument("--model", required=True)
    p.add_argument("--target", choices=["N", "P"], default="N")
    p.add_argument("--points", type=int, default=2001)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--no-extrapolate", action="store_true")
    p.add_argument("--symmetric", action="store_true", help="write the symmetrized density")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.add_argument("--diagnostics")
    p.set_defaults(func=cmd_law)

    p = sub.add_parser("moments", help="tree-sum moments of the limiting law")
    p.add_argument("--model", required=True)
    p.add_argument("--target", choices=["N", "P"], default="N")
    p.add_argument("--max-order", type=int, default=8)
    p.add_argument("--quadrature", action="store_true", help="also integrate the solved density")
    p.add_argument("--out")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("poisson", help="Poisson check of one edge count")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    add_ell(p)
    p.add_argument("--edge-clusters", type=int, nargs=2, required=True, metavar=("K1", "K2"))
    p.add_argument("--self-loop", action="store_true")
    p.add_argument("--replicas", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--histogram", help="write value,count CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_poisson)

    p = sub.add_parser("estimate", help="estimate block-model parameters from transitions")
    p.add_argument("--transitions", required=True)
    p.add_argument("--format", choices=["csv-pairs", "state-sequence"], default="csv-pairs")
    p.add_argument("--clustering", required=True)
    p.add_argument("--min-visits", type=int, default=0)
    p.add_argument("--drop-self-loops", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compare", help="KS distance between a spectrum and a law")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--density", required=True)
    p.add_argument("--trim", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (BlockMarkovError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"blockmarkov {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
