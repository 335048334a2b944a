"""Command-line interface: ``hyperdiffusion <subcommand> ...``.

Exit status is 0 on success, 2 on usage errors and 1 on data errors (with a
message on standard error).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import io
from .errors import HypergraphError, ToleranceNotReached
from .experiments import ExperimentConfig, bench_manifold, bench_resolvent, random_connected_hypergraph
from .hypergraph import bipartite_to_hypergraph, clique_expansion, indicator, knn_graph, knn_hypergraph
from .diffusion import diffuse
from .partition import local_partition
from .potentials import PotentialModel, parse_norm
from .resolvent import ResolventProblem, last_iterate_heuristic, ppr, resolvent_solve


def _model(args) -> PotentialModel:
    G = io.read_hypergraph(args.graph)
    return PotentialModel(G, parse_norm(args.norm))


def _seed_vector(args, n: int) -> np.ndarray:
    if args.seed_file is not None:
        return io.read_vector(args.seed_file, n)
    if args.seed_vertex is None:
        raise HypergraphError("give --seed-vertex or --seed-file")
    if not 0 <= args.seed_vertex < n:
        raise HypergraphError(f"seed vertex {args.seed_vertex} out of range [0, {n})")
    return indicator(n, [args.seed_vertex])


def _outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def cmd_convert(args):
    n, adj = io.read_bipartite(args.input)
    G, skipped = bipartite_to_hypergraph(n, adj, args.max_edge_size)
    io.write_hypergraph(G, args.out)
    print(f"{G.n} vertices, {G.m} hyperedges, {skipped} right nodes skipped", file=sys.stderr)


def cmd_clique(args):
    io.write_hypergraph(clique_expansion(io.read_hypergraph(args.input), args.scale), args.out)


def cmd_knn(args):
    X = io.read_points(args.input)
    G = knn_graph(X, args.k) if args.graph else knn_hypergraph(X, args.k)
    io.write_hypergraph(G, args.out)


def cmd_diffuse(args):
    model = _model(args)
    x0 = _seed_vector(args, model.n)
    out = _outdir(args.out)
    try:
        trace = diffuse(model, x0, args.steps, tol=args.tol, oracle=args.oracle)
    except ToleranceNotReached as exc:
        exc.trace.to_csv(os.path.join(out, "trace.csv"))
        raise
    trace.to_csv(os.path.join(out, "trace.csv"))
    trace.iterates_to_csv(os.path.join(out, "iterates.csv"))
    io.write_vector(trace.final, os.path.join(out, "final.csv"))
    io.write_meta(
        {"command": "diffuse", "graph": args.graph, "norm": args.norm, "steps": args.steps, "tol": args.tol,
         "oracle": args.oracle, "pi0": float(trace.pi0[0])},
        os.path.join(out, "meta.txt"),
    )


def _solve_kw(args):
    return dict(lambda_lower=args.lambda_lower, T=args.steps, oracle=args.oracle, prox=args.prox,
                early_stop=args.early_stop, tol=args.tol)


def cmd_resolvent(args):
    model = _model(args)
    s = _seed_vector(args, model.n)
    prob = ResolventProblem(model, args.lam, s, args.epsilon)
    solver = last_iterate_heuristic if args.last_iterate else resolvent_solve
    sol = solver(prob, **_solve_kw(args))
    out = _outdir(args.out)
    io.write_vector(sol.x, os.path.join(out, "solution.csv"))
    with open(os.path.join(out, "objective.csv"), "w") as fh:
        fh.write("t,objective\n")
        for t, v in enumerate(sol.history):
            fh.write(f"{t},{v!r}\n")
    io.write_meta({"command": "resolvent", "graph": args.graph, "norm": args.norm, "objective": sol.objective,
                   **sol.meta}, os.path.join(out, "meta.txt"))


def cmd_ppr(args):
    model = _model(args)
    s = _seed_vector(args, model.n)
    p, res = ppr(model, args.alpha, s, eps=args.epsilon, **_solve_kw(args))
    out = _outdir(args.out)
    io.write_vector(p, os.path.join(out, "ppr.csv"))
    io.write_vector(res.residual, os.path.join(out, "residual.csv"))
    io.write_meta({"command": "ppr", "graph": args.graph, "norm": args.norm, "alpha": args.alpha,
                   "epsilon": args.epsilon, "residual_norm": res.norm, "certificate_gap": res.gap},
                  os.path.join(out, "meta.txt"))


def cmd_partition(args):
    model = _model(args)
    if args.seed_vertex is None:
        raise HypergraphError("partition needs --seed-vertex")
    res = local_partition(model, args.seed_vertex, args.phi, tol=args.tol, oracle=args.oracle)
    out = _outdir(args.out)
    res.to_csv(os.path.join(out, "profile.csv"))
    with open(os.path.join(out, "cut.txt"), "w") as fh:
        fh.write("\n".join(str(int(v)) for v in res.S) + "\n")
    io.write_meta({"command": "partition", "graph": args.graph, "norm": args.norm, "seed_vertex": args.seed_vertex,
                   "phi_target": args.phi, "phi": res.phi, "t_star": res.t_star, "size": len(res.S)},
                  os.path.join(out, "meta.txt"))


def cmd_bench_resolvent(args):
    if args.graph is not None:
        G = io.read_hypergraph(args.graph)
        dataset = args.graph
    else:
        G = random_connected_hypergraph(np.random.default_rng(args.seed), args.synthetic, int(1.5 * args.synthetic))
        dataset = f"synthetic:{args.synthetic}"
    model = PotentialModel(G, parse_norm(args.norm))
    cfg = ExperimentConfig(dataset=dataset, norm=args.norm, lam=args.lam, eps=args.epsilon, T=args.steps,
                           tol=args.tol, seed=args.seed, out=args.out, seeds=args.seeds, oracle=args.oracle,
                           prox=args.prox)
    rows, _ = bench_resolvent(model, cfg)
    ok = [r["improvement"] for r in rows if r["status"] == "ok"]
    med = float(np.median(ok)) if ok else math.nan
    print(f"{len(ok)}/{len(rows)} seeds solved, median objective ratio averaged/last = {med:.6g}", file=sys.stderr)


def cmd_bench_manifold(args):
    steps = tuple(int(s) for s in args.steps.split(","))
    params = {"noise": args.noise} if args.noise is not None else {}
    cfg = ExperimentConfig(dataset=args.dataset, params=params, tol=args.tol, seed=args.seed, out=args.out,
                           steps=steps, trials=args.trials, k=args.k)
    bench_manifold(cfg)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hyperdiffusion", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_cmd(name, fn, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("graph", help="hypergraph file")
        sp.add_argument("--norm", default="linf", help="linf, l2 or lovasz:<cut-function file>")
        sp.add_argument("--tol", type=float, default=1e-8, help="min-norm oracle duality-gap tolerance")
        sp.add_argument("--oracle", choices=("any", "minnorm"), default="minnorm" if name in ("diffuse", "partition") else "any")
        sp.add_argument("--out", required=True, help="output directory")
        sp.set_defaults(func=fn)
        return sp

    def seeds(sp):
        sp.add_argument("--seed-vertex", type=int, help="seed is the indicator of this vertex")
        sp.add_argument("--seed-file", help="seed vector as vertex,value CSV")

    def solver(sp):
        sp.add_argument("--epsilon", type=float, default=0.1)
        sp.add_argument("--steps", type=int, default=None, help="iteration count (default from the accuracy bound)")
        sp.add_argument("--prox", choices=("degree", "clique"), default="degree")
        sp.add_argument("--lambda-lower", type=float, default=None, help="lower bound on the Poincaré constant")
        sp.add_argument("--early-stop", type=float, default=None, help="stop once ||x_t - x_{t-1}||_R^2 is below this")

    sp = sub.add_parser("convert", help="bipartite edge list to hypergraph file")
    sp.add_argument("input")
    sp.add_argument("--out", required=True)
    sp.add_argument("--max-edge-size", type=int, default=None, help="drop right nodes with more neighbours")
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("clique", help="clique expansion of a hypergraph file")
    sp.add_argument("input")
    sp.add_argument("--out", required=True)
    sp.add_argument("--scale", choices=("none", "size", "size-1"), default="none")
    sp.set_defaults(func=cmd_clique)

    sp = sub.add_parser("knn", help="k-NN hypergraph (or graph) of a point-cloud CSV")
    sp.add_argument("input")
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--graph", action="store_true", help="emit the k-NN graph instead")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_knn)

    sp = graph_cmd("diffuse", cmd_diffuse, "discrete heat diffusion")
    seeds(sp)
    sp.add_argument("--steps", type=int, default=10)

    sp = graph_cmd("resolvent", cmd_resolvent, "approximate resolvent by mirror descent")
    seeds(sp)
    solver(sp)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--last-iterate", action="store_true", help="return the last iterate instead of the average")

    sp = graph_cmd("ppr", cmd_ppr, "hypergraph personalized PageRank")
    seeds(sp)
    solver(sp)
    sp.add_argument("--alpha", type=float, required=True)

    sp = graph_cmd("partition", cmd_partition, "diffusion-based local partitioning")
    sp.add_argument("--seed-vertex", type=int, required=True)
    sp.add_argument("--phi", type=float, required=True, help="target conductance")

    sp = sub.add_parser("bench-resolvent", help="averaged output vs last iterate on random seeds")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="hypergraph file")
    src.add_argument("--synthetic", type=int, help="vertex count of a random connected hypergraph")
    sp.add_argument("--norm", default="linf")
    sp.add_argument("--lambda", dest="lam", type=float, default=0.12)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--steps", type=int, default=100)
    sp.add_argument("--seeds", type=int, default=20)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--oracle", choices=("any", "minnorm"), default="any")
    sp.add_argument("--prox", choices=("degree", "clique"), default="degree")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_bench_resolvent)

    sp = sub.add_parser("bench-manifold", help="hypergraph vs graph diffusion for semi-supervised labelling")
    sp.add_argument("--dataset", choices=("two-spirals", "rings", "hyperspheres"), default="two-spirals")
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--steps", default="30", help="comma-separated diffusion step counts")
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--noise", type=float, default=None, help="override the noise standard deviation")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_bench_manifold)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        args.func(args)
    except (HypergraphError, ToleranceNotReached, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
