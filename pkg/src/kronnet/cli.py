"""Command-line front end: bounds, searches, builds, fits, rate studies.

Every run is fully determined by its arguments (seeds included): identical
invocations produce identical output bytes.  Structured reports are JSON
(sorted keys); tabular output for plotting is CSV.  Exit statuses:
0 success, 2 search-not-found, 3 validation/usage error, 4 precision cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from ._util import as_fraction
from .approximator import approximation_grid_table, build_approximant, mesh_size
from .fixedpoint import PRECISION_CAP, PrecisionError
from .holder import REGISTRY, FunctionBoundError, HolderSpec, make_function
from .kronecker import (
    SearchConfig,
    SearchNotFound,
    TargetVector,
    min_weight_oracle,
    search_weight,
    weight_bound,
)
from .network import NetworkParams, forward
from .regression import (
    Dataset,
    ERMConfig,
    cell_statistics,
    empirical_risk,
    erm_fit,
    format_decimal,
    rate_study,
    read_dataset_csv,
    schedule,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(3)


def _big(value: int) -> dict:
    text = str(value)
    return {"decimal": text, "digits": len(text)}


def _emit(payload: dict, args) -> None:
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in sorted(_flatten(payload).items()):
            writer.writerow([key, value])
        text = buf.getvalue()
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flatten(payload, prefix=""):
    flat = {}
    if isinstance(payload, dict):
        for key, value in payload.items():
            flat.update(_flatten(value, f"{prefix}{key}."))
    elif isinstance(payload, (list, tuple)):
        for idx, value in enumerate(payload):
            flat.update(_flatten(value, f"{prefix}{idx}."))
    else:
        flat[prefix[:-1]] = payload
    return flat


def _parse_targets(args) -> TargetVector:
    if args.targets is not None:
        raw = args.targets
    elif args.targets_file is not None:
        with open(args.targets_file) as fh:
            raw = fh.read()
    else:
        raise ValueError("provide --targets or --targets-file")
    values = json.loads(raw, parse_float=Fraction)
    if not isinstance(values, list) or not values:
        raise ValueError("targets must be a non-empty JSON array of decimals in [0, 1)")
    return TargetVector.from_values(values)


def _parse_params(raw: str | None) -> dict:
    if not raw:
        return {}
    params = json.loads(raw)
    if not isinstance(params, dict):
        raise ValueError("--params must be a JSON object")
    return params


def cmd_bounds(args) -> int:
    if (args.N is None) == (args.n is None):
        raise ValueError("pass exactly one of --N (covering bound) or --n (schedule)")
    if args.N is not None:
        if args.eps is None:
            raise ValueError("--N needs --eps")
        eps = as_fraction(args.eps)
        bound = weight_bound(args.N, eps)
        _emit(
            {
                "command": "bounds",
                "mode": "covering",
                "N": args.N,
                "eps": str(eps),
                "q_bound": _big(bound),
            },
            args,
        )
        return 0
    spec = HolderSpec(beta=float(as_fraction(args.beta)), F=float(as_fraction(args.F)), K=float(as_fraction(args.K)))
    plan = schedule(args.n, spec, args.d)
    _emit(
        {
            "command": "bounds",
            "mode": "schedule",
            "n": args.n,
            "beta": args.beta,
            "F": args.F,
            "K": args.K,
            "d": args.d,
            "M_n": plan.M,
            "N_n": plan.n_cells,
            "Q_n": _big(plan.weight_bound),
        },
        args,
    )
    return 0


def cmd_kron_search(args) -> int:
    targets = _parse_targets(args)
    eps = as_fraction(args.eps)
    if args.cap is not None:
        cap = args.cap
    else:
        cap = weight_bound(targets.n, eps)
        if cap > 10**9:
            raise ValueError(
                f"guaranteed range has {len(str(cap))} digits; pass an explicit --cap"
            )
    config = SearchConfig(
        eps=eps,
        q_cap=cap,
        strategy=args.strategy,
        seed=args.seed,
        sample_budget=args.budget,
        workers=args.workers,
        precision_cap=args.precision_cap,
    )
    echo = {
        "command": "kron-search",
        "targets": [str(b) for b in targets.values],
        "eps": str(eps),
        "q_cap": cap,
        "strategy": args.strategy,
        "seed": args.seed,
        "sample_budget": args.budget,
        "workers": args.workers,
        "precision_cap": args.precision_cap,
    }
    try:
        result = search_weight(targets, config)
    except SearchNotFound as exc:
        _emit(
            {
                **echo,
                "error": "not-found",
                "scanned": exc.scanned,
            },
            args,
        )
        return 2
    _emit(
        {
            **echo,
            "result": {
                "weight": result.weight,
                "discrepancy_bound": str(result.discrepancy_bound),
                "discrepancy_bound_float": float(result.discrepancy_bound),
                "scanned": result.scanned,
                "precision_bits": result.precision_bits,
            },
        },
        args,
    )
    return 0


def cmd_approximate(args) -> int:
    params = _parse_params(args.params)
    f = make_function(
        args.function, d=args.d, K=float(as_fraction(args.K)), beta=args.beta, F=args.F, **params
    )
    eps = as_fraction(args.eps)
    echo = {
        "command": "approximate",
        "function": args.function,
        "params": params,
        "d": args.d,
        "spec": {"beta": f.spec.beta, "F": f.spec.F, "K": f.spec.K},
        "eps": str(eps),
        "q_cap": args.cap,
        "strategy": args.strategy,
        "seed": args.seed,
        "workers": args.workers,
        "precision_cap": args.precision_cap,
    }
    try:
        network, report = build_approximant(
            f,
            eps,
            q_cap=args.cap,
            strategy=args.strategy,
            seed=args.seed,
            workers=args.workers,
            sample_budget=args.budget,
            precision_cap=args.precision_cap,
            grid_resolution=args.grid_resolution,
        )
    except SearchNotFound as exc:
        _emit({**echo, "error": "not-found", "scanned": exc.scanned, "search_eps": str(exc.eps)}, args)
        return 2
    if args.grid_csv:
        table = approximation_grid_table(network, f, resolution=args.grid_resolution or 256)
        with open(args.grid_csv, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([f"x{k + 1}" for k in range(network.d)] + ["f", "z"])
            for row in table:
                writer.writerow([format_decimal(v) for v in row])
    _emit({**echo, "report": report.to_dict()}, args)
    return 0


def cmd_fit(args) -> int:
    data = read_dataset_csv(args.data)
    config = ERMConfig(
        M=args.M,
        q_cap=args.cap,
        strategy=args.strategy,
        seed=args.seed,
        sample_budget=args.budget,
        workers=args.workers,
    )
    weight, risk = erm_fit(data, float(as_fraction(args.K)), config)
    _emit(
        {
            "command": "fit",
            "data": args.data,
            "n": data.n,
            "d": data.d,
            "K": args.K,
            "M": args.M,
            "q_cap": args.cap,
            "strategy": args.strategy,
            "seed": args.seed,
            "workers": args.workers,
            "result": {"weight": weight, "risk": risk},
        },
        args,
    )
    return 0


_RATE_SCHEMA = {
    "function": dict,
    "d": int,
    "spec": dict,
    "n_list": list,
    "seeds": list,
}


def _load_rate_config(path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    problems = []
    if not isinstance(cfg, dict):
        raise ValueError("rate-study config must be a JSON object")
    for key, kind in _RATE_SCHEMA.items():
        if key not in cfg:
            problems.append(f"missing field {key!r}")
        elif not isinstance(cfg[key], kind):
            problems.append(f"field {key!r} must be {kind.__name__}")
    if isinstance(cfg.get("function"), dict) and "name" not in cfg["function"]:
        problems.append("field 'function.name' is required")
    if isinstance(cfg.get("spec"), dict):
        for sub in ("beta", "F", "K"):
            if sub not in cfg["spec"]:
                problems.append(f"field 'spec.{sub}' is required")
    if "q_cap" in cfg and not isinstance(cfg["q_cap"], (int, list)):
        problems.append("field 'q_cap' must be int or list")
    for key, kind in (("mc_size", int), ("mc_method", str), ("workers", int)):
        if key in cfg and not isinstance(cfg[key], kind):
            problems.append(f"field {key!r} must be {kind.__name__}")
    if problems:
        raise ValueError("invalid rate-study config:\n  " + "\n  ".join(problems))
    return cfg


def cmd_rate_study(args) -> int:
    cfg = _load_rate_config(args.config)
    spec = HolderSpec(beta=float(cfg["spec"]["beta"]), F=float(cfg["spec"]["F"]), K=float(cfg["spec"]["K"]))
    f0 = make_function(
        cfg["function"]["name"],
        d=cfg["d"],
        K=spec.K,
        beta=spec.beta,
        F=spec.F,
        **cfg["function"].get("params", {}),
    )
    report = rate_study(
        cfg["n_list"],
        f0,
        spec=spec,
        seeds=cfg["seeds"],
        q_caps=cfg.get("q_cap", 10_000_000),
        mc_size=cfg.get("mc_size", 100_000),
        mc_method=cfg.get("mc_method", "mc"),
        workers=cfg.get("workers", args.workers),
    )
    payload = {"command": "rate-study", "config": cfg, "report": report.to_dict()}
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["n", "M_n", "q_cap", "mean_pred_err", "sd_pred_err", "theoretical_exponent", "fitted_slope"]
            )
            for row in report.rows:
                writer.writerow(
                    [row.n, row.M, row.q_cap, format_decimal(row.mean_error),
                     format_decimal(row.sd_error), format_decimal(report.theoretical_exponent), ""]
                )
            writer.writerow(
                ["summary", "", "", "", "", format_decimal(report.theoretical_exponent),
                 "" if report.fitted_slope is None else format_decimal(report.fitted_slope)]
            )
    _emit(payload, args)
    return 0


def cmd_selftest(args) -> int:
    from .network import activation_exponent, triangular_block

    checks = []

    def check(name, ok):
        checks.append(ok)
        print(f"{'ok' if ok else 'FAIL'} - {name}")

    check("activation exponents 1..6", [activation_exponent(x) for x in range(1, 7)]
          == [Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
    check("triangular block of 5", triangular_block(5) == (3, 2))
    check("covering bound N=2 eps=1/2", weight_bound(2, Fraction(1, 2)) == 34992)
    check("mesh size ceil((2F/eps)^(1/beta))", mesh_size(Fraction(1, 2), HolderSpec(1.0, 1.0, 1.0)) == 4)
    result = search_weight(
        TargetVector.from_values([Fraction(1, 2)]),
        SearchConfig(eps=Fraction(1, 10), q_cap=256),
    )
    check("search hits weight 1 for target 1/2", result.weight == 1)
    check("oracle agrees", min_weight_oracle(TargetVector.from_values([Fraction(1, 2)]), Fraction(1, 10)) == 1)

    f = make_function("constant", d=1, value=0.0, K=1.0)
    network, report = build_approximant(f, 2.0, q_cap=100)
    check("loose build accepts weight 0", network.q == 0 and report.grid_sup_error <= 2.0)

    rng = np.random.default_rng(5)
    data = Dataset(X=rng.random((64, 1)), y=rng.standard_normal(64))
    stats = cell_statistics(data, 3)
    naive = sum(
        (float(yv) - forward(NetworkParams(d=1, K=1.0, M=3, q=9), xv)) ** 2
        for xv, yv in zip(data.X, data.y)
    )
    check("risk decomposition identity", abs(empirical_risk(9, stats, 1.0) - naive) <= 1e-9 * max(1.0, naive))

    print(f"{sum(checks)}/{len(checks)} checks passed")
    return 0 if all(checks) else 1


def build_parser() -> _Parser:
    parser = _Parser(prog="kronnet", description=__doc__)
    parser.add_argument("--version", action="version", version=f"kronnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    default_workers = max(1, os.cpu_count() or 1)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=default_workers,
                       help="scan parallelism; results are identical for any value")
        p.add_argument("--precision-cap", type=int, default=PRECISION_CAP, dest="precision_cap")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")

    p = sub.add_parser("bounds", help="covering bound for N targets, or the sample-size schedule")
    p.add_argument("--N", type=int, default=None, help="number of torus targets")
    p.add_argument("--eps", default=None, help="tolerance (decimal or p/q)")
    p.add_argument("--n", type=int, default=None, help="sample size for the schedule")
    p.add_argument("--beta", default="1")
    p.add_argument("--F", default="1")
    p.add_argument("--K", default="1")
    p.add_argument("--d", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("kron-search", help="search an integer weight hitting torus targets")
    p.add_argument("--targets", default=None, help="JSON array of decimals in [0,1)")
    p.add_argument("--targets-file", default=None, dest="targets_file")
    p.add_argument("--eps", required=True)
    p.add_argument("--cap", type=int, default=None, help="scan limit (default: the guaranteed bound)")
    p.add_argument("--strategy", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--budget", type=int, default=100_000, help="random-strategy draws")
    common(p)
    p.set_defaults(func=cmd_kron_search)

    p = sub.add_parser("approximate", help="build a sup-norm approximant of a registry function")
    p.add_argument("--function", required=True, choices=sorted(REGISTRY))
    p.add_argument("--params", default=None, help="JSON object of function parameters")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--K", default="1")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--F", type=float, default=None)
    p.add_argument("--eps", required=True)
    p.add_argument("--cap", type=int, default=10_000_000)
    p.add_argument("--strategy", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--grid-resolution", type=int, default=None, dest="grid_resolution")
    p.add_argument("--grid-csv", default=None, dest="grid_csv", help="write (x, f, z) samples here")
    common(p)
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("fit", help="empirical risk minimization on a dataset CSV")
    p.add_argument("--data", required=True, help="CSV with header x1,...,xd,y")
    p.add_argument("--K", default="1")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--cap", type=int, default=1_000_000)
    p.add_argument("--strategy", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--budget", type=int, default=100_000)
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("rate-study", help="prediction error vs sample size from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--csv", default=None, help="also write the summary table here")
    common(p)
    p.set_defaults(func=cmd_rate_study)

    p = sub.add_parser("selftest", help="quick internal consistency battery")
    common(p)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PrecisionError as exc:
        print(f"kronnet: precision cap: {exc}", file=sys.stderr)
        return 4
    except (FunctionBoundError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"kronnet: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
