"""Command-line surface.

Subcommands: estimate-kl, estimate-entropy, check-conditions,
experiment-convergence, diagnose-limit-law. Exit codes: 0 success, 2 input
or config error, 3 capacity/degeneracy during estimation. All output is
deterministic for a fixed seed: floats are serialized with repr (JSON) or 17
significant digits (CSV).
"""

import argparse
import json
import math
import sys

import numpy as np

from . import estimators, functionals, limit_law, models, sampleio
from .errors import CapacityError, DegenerateSampleError, DomainError, ModelParseError
from .streams import SeededStream

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ESTIMATION = 3

_JITTER_STREAM = 777
_ORACLE_STREAM = 999_999_999


def _emit_json(payload, out=None):
    (out or sys.stdout).write(json.dumps(payload, sort_keys=True) + "\n")


def _apply_jitter(points, magnitude, seed, stream_id):
    if not magnitude:
        return points
    rng = SeededStream(seed, stream_id).generator()
    return points + rng.uniform(-magnitude, magnitude, size=points.shape)


def _load_orders(args, n, which):
    path = getattr(args, f"orders_{which}", None)
    uniform = getattr(args, which, None)
    if path is not None:
        orders = sampleio.read_orders(path)
        if orders.shape[0] != n:
            raise sampleio.SampleParseError(
                path, 0, f"orders file has {orders.shape[0]} entries, sample has {n}"
            )
        return orders
    return uniform


def cmd_estimate_kl(args):
    x = sampleio.read_sample(args.x)
    y = sampleio.read_sample(args.y)
    x = _apply_jitter(x, args.jitter, args.seed, _JITTER_STREAM)
    y = _apply_jitter(y, args.jitter, args.seed, _JITTER_STREAM + 1)
    k = _load_orders(args, x.shape[0], "k")
    l = _load_orders(args, x.shape[0], "l")
    if k is None or l is None:
        raise argparse.ArgumentTypeError("need -k/-l or --orders-k/--orders-l")
    if np.isscalar(k) and np.isscalar(l):
        orders = estimators.OrderSpec.uniform(k, l)
    else:
        n = x.shape[0]
        ks = np.broadcast_to(np.asarray(k, dtype=np.int64), (n,))
        ls = np.broadcast_to(np.asarray(l, dtype=np.int64), (n,))
        orders = estimators.OrderSpec.per_sample(ks, ls)
    report = estimators.kl_estimate(x, y, orders)
    payload = {"command": "estimate-kl", "d": x.shape[1], **report.to_dict()}
    _emit_json(payload)
    return EXIT_OK


def cmd_estimate_entropy(args):
    x = sampleio.read_sample(args.x)
    x = _apply_jitter(x, args.jitter, args.seed, _JITTER_STREAM)
    k = _load_orders(args, x.shape[0], "k")
    if k is None:
        raise argparse.ArgumentTypeError("need -k or --orders-k")
    if np.isscalar(k):
        orders = estimators.OrderSpec.uniform(k)
    else:
        orders = estimators.OrderSpec.per_sample(np.asarray(k, dtype=np.int64))
    report = estimators.entropy_estimate(x, orders)
    payload = {"command": "estimate-entropy", "d": x.shape[1], **report.to_dict()}
    _emit_json(payload)
    return EXIT_OK


def cmd_check_conditions(args):
    p = models.parse_model(args.model_p)
    q = models.parse_model(args.model_q)
    params = functionals.FunctionalParams(
        nu=args.nu,
        level=args.level,
        epsilon=args.eps,
        radius=args.radius,
        threshold=args.threshold,
    )
    table = functionals.condition_report(p, q, params, args.budget, args.seed)
    width = max(len(name) for name in table)
    print(f"{'functional':<{width}}  {'estimate':>14}  {'std_error':>12}  verdict")
    for name, (rep, verdict) in table.items():
        est = "inf" if not math.isfinite(rep.estimate) else format(rep.estimate, ".6g")
        se = "inf" if not math.isfinite(rep.std_error) else format(rep.std_error, ".3g")
        print(f"{name:<{width}}  {est:>14}  {se:>12}  {verdict}")
    print("# verdicts are heuristic: split-half stability of a finite estimate")
    return EXIT_OK


def _parse_sizes(text):
    sizes = []
    for item in text.split(","):
        n_text, _, m_text = item.partition(":")
        if not m_text:
            raise argparse.ArgumentTypeError(f"size {item!r} is not of form n:m")
        try:
            sizes.append((int(n_text), int(m_text)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad size pair {item!r}") from None
    if any(b[0] <= a[0] for a, b in zip(sizes, sizes[1:])):
        raise argparse.ArgumentTypeError("sizes must be strictly ascending in n")
    return sizes


def cmd_experiment_convergence(args):
    p = models.parse_model(args.model_p)
    q = models.parse_model(args.model_q)
    sizes = _parse_sizes(args.sizes)
    if args.trials < 1:
        raise argparse.ArgumentTypeError("trials must be >= 1")
    if args.trials == 1:
        print("warning: trials=1, variance will be reported as 0", file=sys.stderr)
    if isinstance(p, models.Gaussian) and isinstance(q, models.Gaussian):
        oracle = models.kl_closed_form(p, q)
    else:
        oracle = models.kl_numeric_oracle(
            p, q, args.oracle_budget, SeededStream(args.seed, _ORACLE_STREAM)
        ).value

    rows = []
    for size_index, (n, m) in enumerate(sizes):
        values = []
        degenerate = 0
        for trial in range(args.trials):
            sid = trial + 1_000_000 * size_index
            x = p.sample(n, SeededStream(args.seed, 2 * sid))
            y = q.sample(m, SeededStream(args.seed, 2 * sid + 1))
            try:
                report = estimators.kl_estimate(
                    x, y, estimators.OrderSpec.uniform(args.k, args.l)
                )
            except DegenerateSampleError:
                degenerate += 1
                continue
            values.append(report.value)
        if not values:
            rows.append(
                {
                    "n": n, "m": m, "mean_estimate": math.nan, "bias": math.nan,
                    "variance": math.nan, "mse": math.nan, "trials": 0,
                    "degenerate_trials": degenerate,
                }
            )
            continue
        values = np.asarray(values)
        mean = float(np.mean(values))
        bias = mean - oracle
        variance = float(np.mean((values - mean) ** 2))
        rows.append(
            {
                "n": n,
                "m": m,
                "mean_estimate": mean,
                "bias": bias,
                "variance": variance,
                "mse": bias * bias + variance,
                "trials": len(values),
                "degenerate_trials": degenerate,
            }
        )

    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", encoding="utf-8")
    try:
        if args.format == "json":
            out.write(json.dumps({"oracle": oracle, "rows": rows}, sort_keys=True) + "\n")
        else:
            out.write(f"# oracle={format(oracle, '.17g')}\n")
            cols = ["n", "m", "mean_estimate", "bias", "variance", "mse", "trials",
                    "degenerate_trials"]
            out.write(",".join(cols) + "\n")
            for row in rows:
                cells = []
                for col in cols:
                    v = row[col]
                    cells.append(str(v) if isinstance(v, int) else format(v, ".17g"))
                out.write(",".join(cells) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_diagnose_limit_law(args):
    q = models.parse_model(args.model_q)
    try:
        x = np.asarray([float(v) for v in args.x_point.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad point {args.x_point!r}: expected comma-separated floats"
        ) from None
    report = limit_law.diagnose_limit_law(
        q, x, args.l, args.m, args.replicates, args.seed
    )
    _emit_json(
        {
            "command": "diagnose-limit-law",
            "statistic": report.statistic,
            "p_value": report.p_value,
            "replicates": report.replicates,
            "rate": report.rate,
            "shape": report.shape,
            "seed": report.seed,
        }
    )
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="knndiv",
        description="k-NN estimation of KL divergence and differential entropy",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    kl = sub.add_parser("estimate-kl", help="divergence estimate from two sample files")
    kl.add_argument("--x", required=True, help="sample file for the first law")
    kl.add_argument("--y", required=True, help="sample file for the second law")
    kl.add_argument("-k", type=int, help="neighbor order within x")
    kl.add_argument("-l", type=int, help="neighbor order into y")
    kl.add_argument("--orders-k", help="per-point orders file for x")
    kl.add_argument("--orders-l", help="per-point orders file into y")
    kl.add_argument("--jitter", type=float, default=0.0,
                    help="uniform noise magnitude to break duplicate points")
    kl.add_argument("--seed", type=int, default=0)
    kl.set_defaults(func=cmd_estimate_kl)

    ent = sub.add_parser("estimate-entropy", help="entropy estimate from a sample file")
    ent.add_argument("--x", required=True)
    ent.add_argument("-k", type=int)
    ent.add_argument("--orders-k")
    ent.add_argument("--jitter", type=float, default=0.0)
    ent.add_argument("--seed", type=int, default=0)
    ent.set_defaults(func=cmd_estimate_entropy)

    cond = sub.add_parser(
        "check-conditions",
        help="Monte-Carlo diagnostics for the estimator's regularity conditions",
    )
    cond.add_argument("--model-p", required=True)
    cond.add_argument("--model-q", required=True)
    cond.add_argument("--nu", type=float, default=1.0)
    cond.add_argument("--level", type=int, default=1)
    cond.add_argument("--eps", type=float, default=0.5)
    cond.add_argument("--radius", type=float, default=1.0)
    cond.add_argument("--threshold", type=float, default=None)
    cond.add_argument("--budget", type=int, default=20000)
    cond.add_argument("--seed", type=int, default=0)
    cond.set_defaults(func=cmd_check_conditions)

    conv = sub.add_parser(
        "experiment-convergence",
        help="bias/variance/MSE sweep over sample sizes against a model oracle",
    )
    conv.add_argument("--model-p", required=True)
    conv.add_argument("--model-q", required=True)
    conv.add_argument("-k", type=int, default=1)
    conv.add_argument("-l", type=int, default=1)
    conv.add_argument("--sizes", required=True, help="comma list of n:m pairs")
    conv.add_argument("--trials", type=int, default=20)
    conv.add_argument("--seed", type=int, default=0)
    conv.add_argument("--out", default="-")
    conv.add_argument("--format", choices=("csv", "json"), default="csv")
    conv.add_argument("--oracle-budget", type=int, default=200000,
                      help="Monte-Carlo oracle draws for non-Gaussian pairs")
    conv.set_defaults(func=cmd_experiment_convergence)

    law = sub.add_parser(
        "diagnose-limit-law",
        help="KS test of the scaled neighbor statistic against its Gamma limit",
    )
    law.add_argument("--model-q", required=True)
    law.add_argument("--x-point", required=True, help="comma-separated coordinates")
    law.add_argument("-l", type=int, required=True)
    law.add_argument("-m", type=int, required=True)
    law.add_argument("--replicates", type=int, default=5000)
    law.add_argument("--seed", type=int, default=0)
    law.set_defaults(func=cmd_diagnose_limit_law)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (sampleio.SampleParseError, ModelParseError,
            argparse.ArgumentTypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapacityError, DegenerateSampleError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
