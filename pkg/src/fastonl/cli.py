"""Command line entry point: ``fastonl run|bounds|powerlaw|oracle-check``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .graph import GraphFormatError
from .harness import (ConfigError, ExperimentConfig, default_eps_grid, export_bound_comparison,
                      export_power_law, load_experiment_data, run_experiment, sample_sources)
from .kernel import DENSE_CAP, KernelOperator, exact_basic_kernel, exact_kernel_matrix
from .push import PushConfig, check_linear_invariant

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

RUN_FLAGS = {
    "dataset": str, "method": str, "kernel": str, "lam": str, "beta": float, "b": float, "s": str,
    "eps": float, "trials": int, "seed": int, "order": str, "out": str, "power_p": int, "workers": int,
    "trace_coef": float, "predict": str,
}


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fastonl", description="Online node labeling with local-push kernels.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an online labeling experiment")
    run.add_argument("--config", help="JSON config file; flags override its fields")
    run.add_argument("--dataset", help="'karate', a dataset directory, or a name under $FASTONL_DATA")
    run.add_argument("--method", choices=["relaxation", "fastonl", "wm", "approximate"])
    run.add_argument("--kernel", help="K1..K6")
    run.add_argument("--lambda", dest="lam", help="absolute value or a multiple of n such as 0.15n")
    run.add_argument("--beta", type=float)
    run.add_argument("--b", type=float)
    run.add_argument("--s", choices=["I", "D"])
    run.add_argument("--eps", type=float)
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--order", help="'dataset', 'shuffle' or an order file")
    run.add_argument("--out", help="output directory")
    run.add_argument("--power-p", dest="power_p", type=int, help="power-series length for 'approximate'")
    run.add_argument("--trace-coef", dest="trace_coef", type=float)
    run.add_argument("--workers", type=int)
    run.add_argument("--predict", choices=["sample", "argmax"], help="draw from q (default) or take its mode")
    run.add_argument("--precompute", action="store_true", default=None)
    run.add_argument("--no-lcc", dest="lcc", action="store_false", default=None)
    run.add_argument("--no-timing", dest="timing", action="store_false", default=None,
                     help="write zeros in step_micros so reruns are byte-identical")
    run.add_argument("--count-votes", dest="count_votes", action="store_true", default=None)

    bounds = sub.add_parser("bounds", help="compare push cost with its bounds over an eps grid")
    bounds.add_argument("--dataset", default="karate")
    bounds.add_argument("--alpha", type=float, required=True)
    bounds.add_argument("--kind", choices=["L", "Lap"], default="L")
    bounds.add_argument("--eps", type=_floats, help="comma-separated grid (default: 9 points around 1/n)")
    bounds.add_argument("--sources", type=int, default=50, help="number of sampled sources")
    bounds.add_argument("--seed", type=int, default=0)
    bounds.add_argument("--stats", help="also write per-push JSON lines here")
    bounds.add_argument("--out", default="bounds.csv")
    bounds.add_argument("--no-lcc", dest="lcc", action="store_false")

    power = sub.add_parser("powerlaw", help="rank-sorted magnitudes of push estimates")
    power.add_argument("--dataset", default="karate")
    power.add_argument("--alpha", type=float, required=True)
    power.add_argument("--kind", choices=["L", "Lap"], default="L")
    power.add_argument("--eps", type=float, default=1e-12)
    power.add_argument("--source", type=int, action="append", help="source node id (repeatable)")
    power.add_argument("--sources", type=int, default=5, help="number of sampled sources")
    power.add_argument("--seed", type=int, default=0)
    power.add_argument("--out", default="powerlaw.csv")
    power.add_argument("--no-lcc", dest="lcc", action="store_false")

    oracle = sub.add_parser("oracle-check", help="check push columns against the dense oracle")
    oracle.add_argument("--dataset", default="karate")
    oracle.add_argument("--kernel", default="K2")
    oracle.add_argument("--lambda", dest="lam", default="0.15n")
    oracle.add_argument("--beta", type=float, default=0.0)
    oracle.add_argument("--b", type=float, default=0.0)
    oracle.add_argument("--s", choices=["I", "D"], default="I")
    oracle.add_argument("--eps", type=float, default=1e-12)
    oracle.add_argument("--sources", type=int, default=20)
    oracle.add_argument("--seed", type=int, default=0)
    oracle.add_argument("--tol", type=float, default=1e-6)
    oracle.add_argument("--no-lcc", dest="lcc", action="store_false")
    return parser


def _run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    for name in list(RUN_FLAGS) + ["precompute", "lcc", "timing", "count_votes"]:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    summary = run_experiment(cfg)
    print(json.dumps({k: summary[k] for k in ("accuracy", "accuracy_std", "mean_step_micros", "total_seconds")}))
    return EXIT_OK


def _bounds(args) -> int:
    g, _ = load_experiment_data(args.dataset, args.lcc)
    grid = args.eps or default_eps_grid(args.alpha, g.n)
    sources = sample_sources(g, args.sources, args.seed)
    rows = export_bound_comparison(g, args.alpha, grid, sources, args.out, args.kind, args.stats)
    bad = sum(r["andersen_violations"] + r["local_violations"] for r in rows)
    print(f"wrote {len(rows)} rows to {args.out}; bound violations: {bad}")
    return EXIT_OK


def _powerlaw(args) -> int:
    g, _ = load_experiment_data(args.dataset, args.lcc)
    if args.source:
        pos = np.searchsorted(g.node_ids, args.source)
        if np.any(pos >= g.n) or np.any(g.node_ids[np.minimum(pos, g.n - 1)] != args.source):
            raise ConfigError("unknown source node id")
        sources = pos
    else:
        sources = sample_sources(g, args.sources, args.seed)
    rows = export_power_law(g, PushConfig(args.alpha, args.eps, args.kind), sources, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def _oracle(args) -> int:
    g, _ = load_experiment_data(args.dataset, args.lcc)
    if g.n > DENSE_CAP:
        raise ConfigError(f"oracle-check needs n <= {DENSE_CAP}")
    cfg = ExperimentConfig(kernel=args.kernel, lam=args.lam, beta=args.beta, b=args.b, s=args.s)
    spec = cfg.kernel_spec(g.n)
    M = exact_kernel_matrix(g, spec)
    X = exact_basic_kernel(g, spec)
    op = KernelOperator(g, spec, args.eps)
    col_err = inv_err = 0.0
    for t in sample_sources(g, args.sources, args.seed):
        col = op.column(t)
        col_err = max(col_err, float(np.abs(col.to_dense(g.n) - M[:, t]).max()))
        if op.last_outcome is not None:
            inv_err = max(inv_err, check_linear_invariant(op.cfg, op.last_outcome, X, X[:, t]))
    ok = col_err <= args.tol and inv_err <= 1e-9
    print(f"kernel K{spec.id} alpha={op.alpha:.6g} eps={op.eps:.3g}: "
          f"max column error {col_err:.3e}, max linear-invariant error {inv_err:.3e} -> {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"run": _run, "bounds": _bounds, "powerlaw": _powerlaw, "oracle-check": _oracle}[args.command]
    try:
        return handler(args)
    except (ConfigError, ValueError) as exc:
        if isinstance(exc, GraphFormatError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
