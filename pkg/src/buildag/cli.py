"""Command line entry point: ``buildag {run,build,gen,metrics}``.

Exit codes: 0 success, 1 configuration/input error, 2 every trial failed.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import bench
from .build import BuildConfig, run_build
from .dag import sample_er_dag
from .estimation import EstimatorSpec
from .exceptions import BuildDagError
from .io import read_edge_list, read_matrix, write_edge_list, write_matrix
from .metrics import evaluate
from .sem import DataMatrix, NoiseModel, PrecisionMatrix, ensemble_precision, sample_data

EXIT_OK, EXIT_CONFIG, EXIT_ALL_FAILED = 0, 1, 2


def _cmd_run(args) -> int:
    overrides = {
        "n": args.n, "d": args.d, "trials": args.trials, "base_seed": args.base_seed,
        "sigma2": args.sigma2, "weight_lo": args.weight_lo, "weight_hi": args.weight_hi,
        "workers": args.workers,
        "m_list": [int(v) for v in args.m_list.split(",")] if args.m_list else None,
    }
    spec = bench.load_experiment(args.config, overrides)
    records = bench.run_experiment(spec)
    out = bench.write_outputs(spec, records, args.out)
    failed = sum(r.failed for r in records)
    print(f"wrote {len(records)} records ({failed} failed) to {out}")
    return EXIT_ALL_FAILED if failed == len(records) else EXIT_OK


def _cmd_build(args) -> int:
    values = read_matrix(args.input)
    source = None
    if args.estimator == "oracle":
        if not args.oracle_dag:
            raise BuildDagError("--estimator oracle needs --oracle-dag")
        source = (read_edge_list(args.oracle_dag), NoiseModel(args.sigma2))
    est = EstimatorSpec(args.estimator, ridge_lambda=args.ridge_lambda, oracle_source=source)
    config = BuildConfig(sigma2=args.sigma2, eps_leaf=args.eps_leaf, eps_edge=args.eps_edge,
                         rho=args.rho, estimator=est)
    if args.precision:
        result = run_build(None, config, theta0=PrecisionMatrix(values))
    else:
        result = run_build(DataMatrix(values), config)
    write_edge_list(result.to_dag(), args.output)
    status = "incomplete" if result.incomplete else "complete"
    print(f"{status} run: {int(np.count_nonzero(result.a_hat))} edges, "
          f"{result.refresh_count} refreshes -> {args.output}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dag = sample_er_dag(args.n, args.d, args.weight_lo, args.weight_hi, args.seed)
    write_edge_list(dag, out / "dag.tsv")
    ext = "." + args.format
    write_matrix(out / f"data{ext}", sample_data(dag, args.sigma2, args.m, args.seed).values)
    write_matrix(out / f"precision{ext}", ensemble_precision(dag, args.sigma2).values)
    print(f"wrote dag.tsv ({dag.n_edges} edges), data{ext}, precision{ext} to {out}")
    return EXIT_OK


def _cmd_metrics(args) -> int:
    truth = read_edge_list(args.truth)
    est = read_edge_list(args.estimate, n=truth.n)
    report = evaluate(est.weights, truth.weights).as_dict()
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(report.keys())
    writer.writerow(report.values())
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="buildag", description="Bottom-up DAG recovery from precision matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a benchmark experiment from a TOML file")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=float)
    p.add_argument("--m-list", help="comma separated sample sizes")
    p.add_argument("--trials", type=int)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--weight-lo", type=float)
    p.add_argument("--weight-hi", type=float)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("build", help="recover one DAG from a data or precision matrix file")
    p.add_argument("--input", required=True, help="n x m data matrix (or n x n precision with --precision)")
    p.add_argument("--output", required=True, help="edge list to write")
    p.add_argument("--precision", action="store_true", help="treat --input as a precision matrix")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--eps-leaf", type=float, default=None)
    p.add_argument("--eps-edge", type=float, default=0.25)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--estimator", default="sample_inverse", choices=["oracle", "sample_inverse", "ridge"])
    p.add_argument("--ridge-lambda", type=float, default=None)
    p.add_argument("--oracle-dag", help="ground-truth edge list for the oracle estimator")
    p.add_argument("--seed", type=int, default=0, help="accepted for symmetry with gen; BUILD is deterministic")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("gen", help="write a random DAG, SEM data and its precision matrix")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--d", type=float, default=2.0)
    p.add_argument("--weight-lo", type=float, default=0.5)
    p.add_argument("--weight-hi", type=float, default=2.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "npy"], default="csv")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("metrics", help="compare an estimated edge list against the truth")
    p.add_argument("truth")
    p.add_argument("estimate")
    p.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BuildDagError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
