"""Command-line interface: ``hddelta <subcommand> ...``.

Exit codes: 0 success, 2 bad arguments or config, 3 numerical/degenerate
failure, 4 I/O failure.  Failures print a JSON object to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bound as bd
from . import io as hio
from . import montecarlo as mc
from . import portfolio as pf
from . import series as sr
from .estimators import conservative_lasso, debias_dcl, lasso_cd, nodewise_precision, ols
from .exceptions import DegenerateError, DimensionError, HDDeltaError
from .norms import check_compatibility, parse_q, random_compatibility_suite

EXIT_PARSE, EXIT_NUMERIC, EXIT_IO = 2, 3, 4
SEED_ENV = "HD_DELTA_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(text: str, path=None) -> None:
    if path:
        hio.write_text(path, text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _seed(explicit, fallback=None) -> int:
    if explicit is not None:
        return int(explicit)
    if fallback is not None:
        return int(fallback)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    with open(args.config) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as e:
            raise UsageError(f"{args.config}: invalid JSON ({e})") from None
    cfg = dict(cfg)
    cfg["seed"] = _seed(args.seed, cfg.get("seed"))
    if args.reps is not None:
        cfg["reps"] = args.reps
    try:
        cells = mc.load_config(cfg)
    except (KeyError, TypeError) as e:
        raise UsageError(f"{args.config}: bad cell specification ({e})") from None

    def progress(res):
        if args.verbose:
            c = res.cell
            print(f"n={c.n} s0={c.s0} p={c.p}: mean ratio {res.mean_ratio:.4f}",
                  file=sys.stderr)

    table = mc.run_table1(cells, threads=args.threads, keep_ratios=False, progress=progress)
    _emit(table.to_csv(), args.output)
    if args.diagnostics:
        hio.write_text(args.diagnostics, table.to_json() + "\n")
    return 0


def cmd_estimate(args) -> int:
    data = hio.read_dataset(args.data)
    out = {}
    if args.method == "ols":
        est = ols(data)
    else:
        if args.lam == "auto":
            lam, _, diag = mc.select_lambda_ic(data, args.lambda_coefs or mc.DEFAULT_LAMBDA_COEFS)
            out["lambda_selection"] = {"lambdas": diag.lambdas, "ic": diag.ic,
                                       "support_sizes": diag.support_sizes,
                                       "selected_index": diag.selected_index}
        else:
            try:
                lam = float(args.lam)
            except ValueError:
                raise UsageError(f"--lambda must be 'auto' or a number, got {args.lam!r}") from None
        if args.method == "lasso":
            est = lasso_cd(data, lam, standardize=args.standardize)
        else:
            est = conservative_lasso(data, lam, standardize=args.standardize)
            if args.method == "dcl":
                prec = nodewise_precision(data.X, args.lambda_node)
                est = debias_dcl(data, est, prec)
                out["nodewise"] = {"lambda_node": float(prec.lambda_node[0]),
                                   "tau2": prec.tau2.tolist()}
    out["estimate"] = est.to_dict()
    _emit(_json(out), args.output)
    return 0


def _function_spec(args) -> bd.FunctionSpec:
    if args.spec:
        with open(args.spec) as fh:
            spec = json.load(fh)
        family, M = spec.get("family"), spec.get("matrix", spec.get("vector"))
        if family is None or M is None:
            raise UsageError("spec file needs 'family' and 'matrix' (or 'vector')")
    else:
        family = args.f
        path = {"linear": args.D, "quadratic": args.S, "basis": args.h}[family]
        if path is None:
            flag = {"linear": "--D", "quadratic": "--S", "basis": "--h"}[family]
            raise UsageError(f"--f {family} needs {flag}")
        M = hio.read_vector(path) if family == "basis" else hio.read_matrix(path)
    if family == "linear":
        return bd.Linear(M)
    if family == "quadratic":
        return bd.Quadratic(M)
    if family == "basis":
        return bd.BasisPoint(M)
    raise UsageError(f"unknown function family {family!r}")


def cmd_bound(args) -> int:
    if not (args.spec or args.f):
        raise UsageError("give --f with a matrix file, or --spec")
    f = _function_spec(args)
    beta_hat = hio.read_vector(args.beta_hat)
    beta0 = hio.read_vector(args.beta0)
    q = parse_q(args.norm)
    regime = rate = None
    if args.C is not None:
        fd_norm = bd.pathwise_check(f, beta_hat, beta0, q).fd_norm
        regime = bd.classify_regime(fd_norm, args.C, args.k_n, args.d_n, args.tol)
    if args.rate:
        rate = bd.RateSpec(args.rate, n=args.n, p=args.p, s=args.s, alpha=args.alpha,
                           value=args.rate_value)
        if regime is None:
            raise UsageError("--rate needs --C so the regime is known")
    report = bd.pathwise_check(f, beta_hat, beta0, q, regime=regime, rate=rate)
    _emit(report.to_json(indent=2, sort_keys=True) + "\n", args.output)
    return 0


def cmd_portfolio(args) -> int:
    names, R = hio.read_table(args.returns)
    n, p = R.shape
    gmv = pf.estimate_gmv(R, args.lambda_node, demean=not args.no_demean)
    out = {
        "assets": names,
        "w_hat": gmv.w_hat.tolist(),
        "gross_exposure": gmv.gross_exposure,
        "max_row_support": gmv.max_row_support,
        "lambda_node": float(gmv.precision.lambda_node[0]),
        "in_sample_variance": pf.oos_variance(gmv.w_hat, gmv.Sigma_hat),
    }
    if args.sigma:
        Sigma, ref = hio.read_matrix(args.sigma), "supplied"
    elif p < n:
        Sigma, ref = gmv.Sigma_hat, "sample"
    else:
        Sigma, ref = None, None
    out["reference_covariance"] = ref
    if Sigma is not None:
        if Sigma.shape != (p, p):
            raise DimensionError(f"--sigma has shape {Sigma.shape}, expected {(p, p)}")
        w = pf.gmv_weights(np.linalg.inv(Sigma))
        q = parse_q(args.norm)
        if q == 1:
            theorem = pf.variance_error_bound_theorem(gmv.w_hat, w, Sigma)
        else:
            theorem = bd.pathwise_check(bd.Quadratic(Sigma), gmv.w_hat, w, q)
        out.update(
            w_reference=w.tolist(),
            oos_variance=pf.oos_variance(gmv.w_hat, Sigma),
            reference_variance=pf.oos_variance(w, Sigma),
            div=pf.div_measure(Sigma),
            theorem_bound=theorem.to_dict(),
            direct_bound=pf.variance_error_bound_direct(gmv.w_hat, w, Sigma).to_dict(),
        )
    _emit(_json(out), args.output)
    return 0


def cmd_series(args) -> int:
    rep = sr.series_report(args.function, n=args.n, p=args.p, noise_sd=args.noise_sd,
                           seed=_seed(args.seed), a=args.a, b=args.b, grid_size=args.grid_size)
    _emit(_json(rep), args.output)
    return 0


def cmd_norms(args) -> int:
    if args.action != "check":
        raise UsageError(f"unknown norms action {args.action!r}")
    if args.matrix:
        if not args.vector:
            raise UsageError("--matrix needs --vector")
        A, x = hio.read_matrix(args.matrix), hio.read_vector(args.vector)
        qs = [args.q] if args.q else ["1", "2", "inf"]
        out = {"checks": [check_compatibility(A, x, q).to_dict() for q in qs]}
        out["all_hold"] = all(c["holds"] for c in out["checks"])
    else:
        viol = random_compatibility_suite(args.random, seed=_seed(args.seed))
        out = {"trials": args.random, "violations": viol,
               "all_hold": not any(viol.values())}
    _emit(_json(out), args.output)
    return 0 if out["all_hold"] else EXIT_NUMERIC


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _coefs(s: str):
    try:
        return [float(c) for c in s.split(",") if c.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coefficient list {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hddelta", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("simulate", help="Monte Carlo ratio table")
    s.add_argument("--config", required=True)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--reps", type=int, help="override the config's replication count")
    s.add_argument("--seed", type=int)
    s.add_argument("--output", "-o", help="CSV path (default stdout)")
    s.add_argument("--diagnostics", help="JSON path for per-cell diagnostics")
    s.add_argument("--verbose", "-v", action="store_true")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("estimate", help="fit lasso / conservative lasso / DCL / OLS")
    s.add_argument("--data", required=True)
    s.add_argument("--method", choices=["ols", "lasso", "cl", "dcl"], default="lasso")
    s.add_argument("--lambda", dest="lam", default="auto")
    s.add_argument("--lambda-node", type=float)
    s.add_argument("--lambda-coefs", type=_coefs)
    s.add_argument("--standardize", action="store_true")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("bound", help="pathwise bound for f(beta_hat) - f(beta0)")
    s.add_argument("--f", choices=["linear", "quadratic", "basis"])
    s.add_argument("--spec", help="JSON function spec: {family, matrix|vector}")
    s.add_argument("--D")
    s.add_argument("--S")
    s.add_argument("--h")
    s.add_argument("--beta-hat", required=True)
    s.add_argument("--beta0", required=True)
    s.add_argument("--norm", default="2")
    s.add_argument("--C", type=float)
    s.add_argument("--k-n", type=float, default=1.0)
    s.add_argument("--d-n", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=0.05)
    s.add_argument("--rate", choices=["lasso", "gmv", "root_n", "series", "fixed"])
    s.add_argument("--n", type=int, default=0)
    s.add_argument("--p", type=int, default=0)
    s.add_argument("--s", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--rate-value", type=float)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("portfolio", help="nodewise GMV weights and variance-error bounds")
    s.add_argument("--returns", required=True)
    s.add_argument("--sigma", help="reference covariance CSV (default: sample covariance when p < n)")
    s.add_argument("--norm", default="1")
    s.add_argument("--lambda-node", type=float)
    s.add_argument("--no-demean", action="store_true")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_portfolio)

    s = sub.add_parser("series", help="power-series fit and pointwise bound")
    s.add_argument("--function", default="sin2x", choices=sorted(sr.TEST_FUNCTIONS))
    s.add_argument("--n", type=int, default=2000)
    s.add_argument("--p", type=int, default=8)
    s.add_argument("--noise-sd", type=float, default=0.1)
    s.add_argument("--seed", type=int)
    s.add_argument("--a", type=float, default=-1.0)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--grid-size", type=int, default=sr.DEFAULT_GRID)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_series)

    s = sub.add_parser("norms", help="norm compatibility checks")
    s.add_argument("action", choices=["check"])
    s.add_argument("--matrix")
    s.add_argument("--vector")
    s.add_argument("--q")
    s.add_argument("--random", type=int, default=1000)
    s.add_argument("--seed", type=int)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_norms)
    return ap


def _fail(code: int, exc: BaseException) -> int:
    err = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except OSError as e:
        return _fail(EXIT_IO, e)
    except (DegenerateError, ArithmeticError, np.linalg.LinAlgError) as e:
        return _fail(EXIT_NUMERIC, e)
    except (UsageError, ValueError) as e:
        # includes malformed numbers, bad shapes and out-of-domain arguments
        return _fail(EXIT_PARSE, e)
    except HDDeltaError as e:
        return _fail(EXIT_NUMERIC, e)

if __name__ == "__main__":
    sys.exit(main())
