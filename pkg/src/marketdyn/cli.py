"""Command-line entry point.

Every subcommand writes its artifact to ``--out`` (stdout by default).
Exit status: 0 success, 1 certificate or convergence failure (artifact
still written), 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import br, chaos, equilibrium, prqlin
from .economy import Economy, MarketError, SpendingState
from .equilibrium import ME, NE
from .trajectory import fmt

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _grid(text: str) -> list[float]:
    try:
        a, b, step = (float(s) for s in text.split(":"))
    except ValueError:
        raise InputError(f"grid must look like a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise InputError("grid needs step > 0 and a <= b")
    k = int(np.floor((b - a) / step + 1e-9))
    return [float(np.round(a + i * step, 12)) for i in range(k + 1)]


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(s) for s in text.split(":"))
    except ValueError:
        raise InputError(f"range must look like lo:hi, got {text!r}") from None
    return lo, hi


def _read_json(path, what: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {what} {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} {path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _economy(args) -> Economy:
    if not args.economy:
        raise InputError("--economy is required")
    try:
        return Economy.from_dict(_read_json(args.economy, "economy"))
    except MarketError as exc:
        raise InputError(f"economy {args.economy}: {exc}") from None


def _matrix(path, what: str):
    doc = _read_json(path, what)
    if isinstance(doc, dict):
        if "b" not in doc:
            raise InputError(f"{what} {path}: missing field 'b'")
        doc = doc["b"]
    try:
        return np.array(doc, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what} {path}: field 'b' is not a numeric matrix ({exc})") from None


def _emit(args, text: str):
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate_pr(args) -> int:
    econ = _economy(args)
    if args.b0:
        b0 = _matrix(args.b0, "start")
    else:
        b0 = prqlin.random_start(econ, np.random.default_rng(args.seed))
    cfg = prqlin.MdConfig(gamma_md=args.gamma_md, max_iters=args.max_iters, tol=args.tol)
    try:
        traj = prqlin.run_pr(econ, b0, cfg)
    except MarketError as exc:
        raise InputError(str(exc)) from None
    _emit(args, prqlin.pr_csv(traj, econ))
    print(traj.message, file=sys.stderr)
    return EXIT_OK if traj.converged else EXIT_FAIL


def cmd_check_equilibrium(args) -> int:
    econ = _economy(args)
    if not args.state:
        raise InputError("--state is required")
    try:
        s = SpendingState.from_spending(econ, _matrix(args.state, "state"))
    except MarketError as exc:
        raise InputError(str(exc)) from None
    report = equilibrium.check_equilibrium(econ, s, args.kind)
    print(report.table())
    if args.out:
        Path(args.out).write_text(report.to_json(indent=2) + "\n")
    return EXIT_OK if report.residual <= args.tol else EXIT_FAIL


def cmd_certify_chaos(args) -> int:
    params = chaos.GaMapParams(args.n, args.alpha, args.eta, args.gamma)
    cert = chaos.certify_li_yorke(params, tol=args.tol)
    _emit(args, cert.to_json(indent=2))
    return EXIT_OK if cert.certified else EXIT_FAIL


def _threads() -> int:
    raw = os.environ.get("MDL_THREADS", "0")
    try:
        k = int(raw)
    except ValueError:
        raise InputError(f"MDL_THREADS must be an integer, got {raw!r}") from None
    return k if k > 0 else (os.cpu_count() or 1)


def cmd_min_eta(args) -> int:
    gammas = _grid(args.gamma_grid)
    if any(g <= 0 for g in gammas):
        raise InputError("gamma values must be positive")
    job = lambda g: chaos.min_chaotic_eta(g, args.alpha, args.n, args.tol)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = dict(zip(gammas, pool.map(job, gammas)))
    lines = ["gamma,eta_min"]
    lines += [f"{fmt(g)},{'nan' if results[g] is None else fmt(results[g])}" for g in gammas]
    _emit(args, "\n".join(lines))
    return EXIT_OK if all(v is not None for v in results.values()) else EXIT_FAIL


def cmd_simulate_ga(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.alpha_range:
        lo, hi = _range(args.alpha_range)
        alpha = rng.uniform(lo, hi, args.n)
    else:
        alpha = np.full(args.n, args.alpha)
    if args.x0 is not None:
        x0 = np.full(args.n, args.x0)
    else:
        x0 = 1.0 - rng.random(args.n)
    try:
        traj = chaos.simulate_ga(alpha, x0, args.eta, args.T)
    except MarketError as exc:
        raise InputError(str(exc)) from None
    _emit(args, chaos.ga_csv(traj))
    if traj.message:
        print(traj.message, file=sys.stderr)
    return EXIT_OK


def cmd_simulate_br(args) -> int:
    fx, fy = br.br_fixed_point(args.alpha, args.beta, args.v)
    x0 = fx if args.x0 is None else args.x0
    y0 = fy if args.y0 is None else args.y0
    traj = br.simulate_br(x0, y0, args.alpha, args.beta, args.T, args.v)
    _emit(args, br.br_csv(traj))
    if traj.message:
        print(traj.message, file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_stability(args) -> int:
    _emit(args, br.classify_stability(args.alpha, args.beta, args.v).to_json(indent=2))
    return EXIT_OK


# name -> (handler, {option: (type, default)}); a default of None means optional
COMMANDS = {
    "simulate-pr": (cmd_simulate_pr, {
        "economy": (str, None), "b0": (str, None), "seed": (int, 0), "tol": (float, 1e-8),
        "max-iters": (int, 100_000), "gamma-md": (float, 1.0),
    }),
    "check-equilibrium": (cmd_check_equilibrium, {
        "economy": (str, None), "state": (str, None), "kind": (str, "ME"), "tol": (float, 1e-8),
    }),
    "certify-chaos": (cmd_certify_chaos, {
        "n": (int, 2), "alpha": (float, 1.0), "eta": (float, None), "gamma": (float, None), "tol": (float, 1e-9),
    }),
    "min-eta": (cmd_min_eta, {
        "gamma-grid": (str, None), "alpha": (float, 1.0), "n": (int, 2), "tol": (float, 1e-6),
    }),
    "simulate-ga": (cmd_simulate_ga, {
        "n": (int, 2), "alpha": (float, 1.0), "alpha-range": (str, None), "eta": (float, None),
        "T": (int, 400), "x0": (float, None), "seed": (int, 0),
    }),
    "simulate-br": (cmd_simulate_br, {
        "alpha": (float, None), "beta": (float, None), "v": (float, 1.0), "x0": (float, None),
        "y0": (float, None), "T": (int, 200),
    }),
    "stability": (cmd_stability, {"alpha": (float, None), "beta": (float, None), "v": (float, 1.0)}),
}

REQUIRED = {
    "certify-chaos": ["eta"], "min-eta": ["gamma-grid"], "simulate-ga": ["eta"],
    "simulate-br": ["alpha", "beta"], "stability": ["alpha", "beta"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="marketdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, opts) in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with option values; flags override it")
        p.add_argument("--out", help="output file (default stdout)")
        for opt, (typ, _) in opts.items():
            if opt == "kind":
                p.add_argument("--kind", choices=["ME", "NE"], default=None)
            else:
                p.add_argument(f"--{opt}", type=typ, default=None)
    return parser


def resolve(args) -> argparse.Namespace:
    """Fill unset options from ``--config`` then from defaults."""
    _, opts = COMMANDS[args.command]
    config = {}
    if args.config:
        raw = _read_json(args.config, "config")
        if not isinstance(raw, dict):
            raise InputError("config must be a JSON object")
        config = {k.replace("_", "-"): v for k, v in raw.items()}
        if "economy-path" in config:
            config.setdefault("economy", config.pop("economy-path"))
        if "out-path" in config and args.out is None:
            args.out = config.pop("out-path")
        unknown = set(config) - set(opts) - {"out", "subcommand"}
        if unknown:
            raise InputError(f"config has unknown option(s): {', '.join(sorted(unknown))}")
        if args.out is None and "out" in config:
            args.out = config["out"]
    for opt, (typ, default) in opts.items():
        attr = opt.replace("-", "_")
        if getattr(args, attr) is None:
            value = config.get(opt, default)
            if value is not None and opt != "kind":
                try:
                    value = typ(value)
                except (TypeError, ValueError):
                    raise InputError(f"config option {opt!r}: cannot convert {value!r} to {typ.__name__}") from None
            setattr(args, attr, value)
    if getattr(args, "kind", ME) not in (ME, NE):
        raise InputError(f"kind must be ME or NE, got {args.kind!r}")
    for opt in REQUIRED.get(args.command, []):
        if getattr(args, opt.replace("-", "_")) is None:
            raise InputError(f"--{opt} is required")
    return args


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = resolve(args)
        handler = COMMANDS[args.command][0]
        return handler(args)
    except (InputError, MarketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run(argv))
