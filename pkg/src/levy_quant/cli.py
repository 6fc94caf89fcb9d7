"""Command-line front end: ``levy-quant <command> [options]``.

Exit status 0 on success, 2 for configuration errors, 3 for errors raised by
the numerical modules and 4 for I/O failures.  Every failure prints a JSON
object ``{"error", "message", "context"}`` on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from contextlib import nullcontext
from dataclasses import fields

from .calibrate import calibrate_smile, fit_returns_mle, implied_vol
from .errors import ConfigError, LevyError
from .levy_core import classify
from .marketdata import load_quotes, load_returns
from .measure_change import MarketEnv, risk_neutralize
from .model_zoo import FAMILIES, ModelParams, params_from_dict
from .price_mc import mc_price
from .price_pide import PideGrid, solve_pide
from .price_transform import KINDS, PayoffSpec, QuadratureSpec, price_smile, transform_price
from .simulate import TimeGrid, simulate_model

PARAM_FLAGS = {
    "sigma": "sigma", "lam": "lam", "mu_j": "mu-j", "sigma_j": "sigma-j", "p": "p", "theta1": "theta1",
    "theta2": "theta2", "theta": "theta", "kappa": "kappa", "alpha": "alpha", "beta": "beta", "delta": "delta",
    "C": "C", "G": "G", "M": "M", "Y": "Y",
}
PRICING = ("price", "smile", "calibrate")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, usage=self.format_usage().strip())


def _fmt(x: float, full: bool) -> str:
    return repr(float(x)) if full else f"{float(x):.9g}"


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


# ---------------------------------------------------------------------------
# Model and market assembly
# ---------------------------------------------------------------------------


def _model_from_args(args) -> ModelParams:
    spec = args.model
    if spec is None:
        raise ConfigError("--model is required")
    if spec.lower() in FAMILIES:
        data = {"family": spec.lower()}
    else:
        try:
            with open(spec, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"model file {spec} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("model JSON must be an object")
        if "params" in data and isinstance(data["params"], dict):
            data = data["params"]
    family = str(data.get("family", "")).lower()
    if family not in FAMILIES:
        raise ConfigError(f"unknown model family {data.get('family')!r}; choose from {sorted(FAMILIES)}")
    names = {f.name for f in fields(FAMILIES[family])}
    for name in PARAM_FLAGS:
        value = getattr(args, name, None)
        if value is None:
            continue
        if name not in names:
            raise ConfigError(f"--{PARAM_FLAGS[name]} is not a parameter of {family}", family=family)
        data[name] = value
    mu = args.mu
    if mu is not None and mu != "auto":
        try:
            data["mu"] = float(mu)
        except ValueError:
            raise ConfigError(f"--mu must be a number or 'auto', got {mu!r}") from None
    data.setdefault("mu", 0.0)
    missing = [n for n in names if n not in data]
    if missing:
        raise ConfigError(f"missing parameters for {family}: {sorted(missing)}", family=family)
    try:
        return params_from_dict(data)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), family=family) from None


def _drift_mode(args) -> str:
    """'auto' (risk-neutral drift), or 'given'."""
    if args.mu is None:
        return "auto" if args.command in PRICING else "given"
    return "auto" if args.mu == "auto" else "given"


def _prepare(args):
    env = MarketEnv(args.r, args.div, args.s0)
    model = _model_from_args(args)
    mode = _drift_mode(args)
    if args.command in PRICING and mode == "given" and not args.allow_non_martingale:
        raise ConfigError("pricing needs the martingale drift: use --mu auto or pass --allow-non-martingale")
    if mode == "auto":
        model = risk_neutralize(model, env)
    return model, env


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _emit(rows: list[dict], fmt: str, full: bool, fh) -> None:
    if fmt == "json":
        out = [{k: (float(_fmt(v, full)) if isinstance(v, float) else v) for k, v in r.items()} for r in rows]
        json.dump(out[0] if len(out) == 1 else out, fh, separators=(",", ":"))
        fh.write("\n")
        return
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([_fmt(v, full) if isinstance(v, float) else v for v in r.values()])


def _price_one(model, env, args, T, K, kind, surface_out=None) -> dict:
    payoff = PayoffSpec(kind, K)
    strict = not args.allow_non_martingale
    if args.method == "transform":
        quad = QuadratureSpec(abs_tol=args.abs_tol, u_max=args.u_max, damping=args.damping)
        return {"price": transform_price(model, env, T, payoff, quad, require_martingale=strict)}
    if args.method == "pide":
        grid = PideGrid.for_model(model, T, n_std=args.n_std, n_x=args.nx, n_t=args.nt, eps_jump=args.eps_jump)
        res = solve_pide(model, env, T, payoff, grid, require_martingale=strict)
        if surface_out:
            res.to_csv(surface_out)
        return {"price": res.price}
    res = mc_price(model, env, T, payoff, args.n_paths, args.seed, antithetic=args.antithetic,
                   require_martingale=strict)
    return {"price": res.price, "stderr": res.stderr, "ci95_lo": res.ci95[0], "ci95_hi": res.ci95[1]}


def cmd_price(args) -> int:
    model, env = _prepare(args)
    row = _price_one(model, env, args, args.t, args.k, args.kind, args.surface_out)
    with _out(args) as fh:
        _emit([row], args.format, args.full_precision, fh)
    return 0


def _out(args):
    return open(args.out, "w", encoding="utf-8", newline="\n") if args.out and args.out != "-" else nullcontext(sys.stdout)


def cmd_smile(args) -> int:
    model, env = _prepare(args)
    strikes, mats = _floats(args.strikes), _floats(args.maturities)
    if not strikes or not mats:
        raise ConfigError("--strikes and --maturities must be non-empty")
    if args.kind not in ("call", "put"):
        raise ConfigError("smile supports call and put only")
    rows = []
    if args.method == "transform":
        quad = QuadratureSpec(abs_tol=args.abs_tol, u_max=args.u_max, damping=args.damping)
        table = price_smile(model, env, mats, strikes, args.kind, quad,
                            require_martingale=not args.allow_non_martingale)
    else:
        table = [[_price_one(model, env, args, T, K, args.kind)["price"] for K in strikes] for T in mats]
    for i, T in enumerate(mats):
        for j, K in enumerate(strikes):
            p = float(table[i][j])
            iv = implied_vol(env, T, K, p, args.kind, tol=1e-12)
            rows.append({"maturity_years": float(T), "strike": float(K), "price": p, "implied_vol": float(iv)})
    with _out(args) as fh:
        _emit(rows, args.format, args.full_precision, fh)
    return 0


def cmd_simulate(args) -> int:
    model, env = _prepare(args)
    bundle = simulate_model(model, TimeGrid.uniform(args.t, args.steps), args.n_paths, args.seed)
    with _out(args) as fh:
        if args.format == "json":
            json.dump({"t": bundle.grid.times.tolist(), "paths": bundle.paths.tolist(), "seed": bundle.seed,
                       "model": bundle.model}, fh, separators=(",", ":"))
            fh.write("\n")
        else:
            bundle.to_csv(fh)
    return 0


def _params_json(model: ModelParams) -> dict:
    return model.to_dict()


def cmd_calibrate(args) -> int:
    env = MarketEnv(args.r, args.div, args.s0)
    if args.quotes is None:
        raise ConfigError("--quotes is required")
    quotes = load_quotes(args.quotes)
    init = _model_from_args(args)
    res = calibrate_smile(init.family, quotes, env, init, seed=args.seed, restarts=args.restarts,
                          max_evals=args.max_evals)
    payload = {"params": _params_json(res.params), "vol_rmse": res.vol_rmse, "evaluations": res.iterations,
               "restarts_used": res.restarts_used}
    with _out(args) as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if args.residuals:
        with open(args.residuals, "w", encoding="utf-8", newline="\n") as fh:
            _emit(res.residuals, "csv", args.full_precision, fh)
    return 0


def cmd_fit_returns(args) -> int:
    if args.returns is None:
        raise ConfigError("--returns is required")
    family = (args.model or "").lower()
    if family not in ("nig", "gh", "bs"):
        raise ConfigError("fit-returns supports --model nig, gh or bs")
    series = load_returns(args.returns, args.dt)
    res = fit_returns_mle(family, series)
    payload = {"params": _params_json(res.params), "loglik": res.loglik, "stderr": res.stderr,
               "n": len(series), "dt": series.dt}
    with _out(args) as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if args.qq:
        with open(args.qq, "w", encoding="utf-8", newline="\n") as fh:
            _emit([{"empirical": float(a), "model": float(b)} for a, b in res.qq], "csv", args.full_precision, fh)
    return 0


def cmd_classify(args) -> int:
    model, env = _prepare(args)
    trip = model.triplet()
    report = classify(trip).to_dict()
    report["family"] = model.family
    report["triplet"] = {"b": float(_fmt(trip.b, args.full_precision)), "c": float(_fmt(trip.c, args.full_precision)),
                         "convention": trip.convention.value}
    report["params"] = model.to_dict()
    with _out(args) as fh:
        json.dump(report, fh, separators=(",", ":"))
        fh.write("\n")
    return 0


COMMANDS = {"price": cmd_price, "smile": cmd_smile, "simulate": cmd_simulate, "calibrate": cmd_calibrate,
            "fit-returns": cmd_fit_returns, "classify": cmd_classify}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="levy-quant", description="Exponential-Levy model toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    common = _Parser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--model", help="family name or path to a JSON parameter file")
    g.add_argument("--mu", help="drift: a number, or 'auto' for the martingale drift")
    for name, flag in PARAM_FLAGS.items():
        g.add_argument(f"--{flag}", dest=name, type=float)
    g.add_argument("--allow-non-martingale", action="store_true")
    m = common.add_argument_group("market")
    m.add_argument("--s0", type=float, default=100.0)
    m.add_argument("--r", type=float, default=0.0)
    m.add_argument("--div", type=float, default=0.0)
    o = common.add_argument_group("output")
    o.add_argument("--format", choices=("csv", "json"), default="csv")
    o.add_argument("--out", help="output path (default stdout)")
    o.add_argument("--full-precision", action="store_true")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--threads", type=int, help="worker threads (0 = auto); overrides LEVY_QUANT_THREADS")

    engine = _Parser(add_help=False)
    e = engine.add_argument_group("engine")
    e.add_argument("--method", choices=("transform", "pide", "mc"), default="transform")
    e.add_argument("--kind", choices=KINDS, default="call")
    e.add_argument("--abs-tol", type=float, default=1e-10)
    e.add_argument("--u-max", type=float, default=2000.0)
    e.add_argument("--damping", type=float)
    e.add_argument("--nx", type=int, default=400)
    e.add_argument("--nt", type=int, default=200)
    e.add_argument("--n-std", type=float, default=8.0)
    e.add_argument("--eps-jump", type=float, default=1e-2)
    e.add_argument("--n-paths", type=int, default=100_000)
    e.add_argument("--antithetic", action="store_true")

    p = sub.add_parser("price", parents=[common, engine], help="price one European option")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--surface-out", help="PIDE only: write the x,t,f surface")

    p = sub.add_parser("smile", parents=[common, engine], help="price and implied-vol table")
    p.add_argument("--strikes", required=True)
    p.add_argument("--maturities", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate log-price paths")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--steps", type=int, default=252)
    p.add_argument("--n-paths", type=int, default=10)

    p = sub.add_parser("calibrate", parents=[common], help="fit a model to implied-vol quotes")
    p.add_argument("--quotes", required=True)
    p.add_argument("--residuals", help="CSV of model vs market vols")
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--max-evals", type=int, default=2000)

    p = sub.add_parser("fit-returns", parents=[common], help="maximum-likelihood fit to daily returns")
    p.add_argument("--returns", required=True)
    p.add_argument("--dt", type=float, default=1.0 / 252)
    p.add_argument("--qq", help="CSV of Q-Q pairs")

    sub.add_parser("classify", parents=[common], help="activity/variation report as JSON")
    return parser


def _report(exc: Exception, code: int) -> int:
    if isinstance(exc, LevyError):
        payload = exc.to_dict()
    else:
        payload = {"error": type(exc).__name__, "message": str(exc), "context": {}}
    sys.stderr.write(json.dumps(payload, default=str) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ConfigError("a command is required: " + ", ".join(COMMANDS))
        if args.threads is not None:
            os.environ["LEVY_QUANT_THREADS"] = str(args.threads)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        return _report(exc, 2)
    except LevyError as exc:
        return _report(exc, 3)
    except OSError as exc:
        return _report(exc, 4)
    except ValueError as exc:
        return _report(exc, 2)
