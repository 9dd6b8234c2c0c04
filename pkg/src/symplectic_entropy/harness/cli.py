"""Command line interface.

Exit codes: 0 success, 1 stage failure, 2 usage or config error.
"""

import argparse
import json
import sys

import numpy as np
import yaml

from ..core import finite_time_lyapunov, sum_positive_exponents
from ..errors import ConfigError, SymplecticEntropyError
from ..models import MODEL_FAMILIES, build_model
from .config import MODEL_KEYS, load_config, make_config
from .runner import load_report, render_report, run, run_dir

EXIT_OK, EXIT_STAGE, EXIT_USAGE = 0, 1, 2


def _floats(text):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {text!r}") from None


def _ints(text):
    values = _floats(text)
    if any(v != int(v) for v in values):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


def _param(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key, yaml.safe_load(value)


def _common(parser):
    parser.add_argument("--config", help="YAML experiment config")
    parser.add_argument("--model", help="model family, overrides the config")
    parser.add_argument("--param", action="append", type=_param, default=[], metavar="KEY=VALUE",
                        help="model parameter (repeatable)")
    parser.add_argument("--out", help="output directory, overrides the config")
    parser.add_argument("--no-cache", action="store_true", help="recompute even if a completed run exists")


def build_parser():
    parser = argparse.ArgumentParser(prog="symplectic-entropy",
                                     description="Entropy, periodic orbits and horseshoes of symplectic maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("models", help="list model families and their parameters")

    p = sub.add_parser("scan", help="periodic orbit scan and S_lower")
    _common(p)
    p.add_argument("--max-period", type=int)
    p.add_argument("--grid", type=int)

    p = sub.add_parser("lyapunov", help="finite-time Lyapunov exponents along an orbit")
    _common(p)
    p.add_argument("--point", type=_floats, required=True, help="initial point")
    p.add_argument("--steps", type=int, default=1000)

    p = sub.add_parser("entropy", help="separated-set entropy estimate")
    _common(p)
    p.add_argument("--eps-list", type=_floats)
    p.add_argument("--n-max", type=int)
    p.add_argument("--grid", type=int, help="seeds per coordinate")
    p.add_argument("--seed-box", type=_floats, help="low,high of the seed box")
    p.add_argument("--seed-order", type=int, help="seed shuffle; -1 keeps grid order")

    p = sub.add_parser("snake-demo", help="horseshoe certificates from the snake perturbation")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--sigma", type=_floats, help="unstable multipliers")
    p.add_argument("--T", type=int)
    p.add_argument("--a", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--N-list", type=_ints)

    p = sub.add_parser("mix-demo", help="mixing-word exponent gap table")
    _common(p)
    p.add_argument("--unstable", type=_floats, help="unstable multipliers of the diagonal base")
    p.add_argument("--eps", type=float)
    p.add_argument("--m-list", type=_ints)

    p = sub.add_parser("compare", help="full comparison run")
    _common(p)
    p.add_argument("--stages", type=lambda s: [v for v in s.replace(",", " ").split()])

    p = sub.add_parser("report", help="render a prior run")
    p.add_argument("path", help="run directory or report.json")
    p.add_argument("--json", action="store_true", help="print the raw JSON")
    return parser


def _config(args, stages, section=None, overrides=None):
    config = load_config(args.config) if args.config else make_config()
    data = {}
    if args.model is not None:
        data["model"] = {"family": args.model, **dict(args.param)}
    elif args.param:
        data["model"] = {**config["model"], **dict(args.param)}
    if args.out is not None:
        data["output_dir"] = args.out
    if stages is not None:
        data["stages"] = stages
    if section is not None:
        values = {k: v for k, v in (overrides or {}).items() if v is not None}
        if values:
            data[section] = values
    return config.with_overrides(data) if data else config


def _execute(args, config):
    report = run(config, use_cache=not args.no_cache)
    print(render_report(report))
    print(f"artifacts: {run_dir(config)}")
    return report.exit_code


def cmd_models(args):
    for family in MODEL_FAMILIES:
        params = ", ".join(sorted(MODEL_KEYS[family])) or "-"
        print(f"{family:24s} {params}")
    return EXIT_OK


def cmd_scan(args):
    config = _config(args, ["scan"], "scan", {"max_period": args.max_period, "grid": args.grid})
    return _execute(args, config)


def cmd_lyapunov(args):
    config = _config(args, None)
    model = build_model(config["model"])
    point = np.asarray(args.point, dtype=float)
    if point.shape != (model.dim,):
        raise ConfigError(f"--point needs {model.dim} coordinates for {config['model']['family']}")
    if args.steps < 1:
        raise ConfigError("--steps must be positive")
    _, word = model.orbit_cocycle(point, args.steps)
    L = finite_time_lyapunov(word)
    print(json.dumps({"model": config["model"], "steps": args.steps,
                      "exponents": [float(c) for c in L.chis],
                      "S": sum_positive_exponents(L),
                      "pairing_residual": float(L.pairing_residual()),
                      "zero_sum_residual": float(L.zero_sum_residual())}, indent=2))
    return EXIT_OK


def cmd_entropy(args):
    config = _config(args, ["entropy"], "entropy", {"epsilons": args.eps_list, "n_max": args.n_max,
                                                    "grid": args.grid, "seed_box": args.seed_box,
                                                    "seed_order": args.seed_order})
    if args.seed_order is not None and args.seed_order < 0:
        config = config.with_overrides({"entropy": {"seed_order": None}})
    return _execute(args, config)


def cmd_snake(args):
    config = _config(args, ["snake"], "snake", {"n": args.n, "multipliers": args.sigma, "T": args.T,
                                                "a": args.a, "delta": args.delta, "N_list": args.N_list})
    return _execute(args, config)


def cmd_mix(args):
    config = _config(args, ["mixing"], "mixing", {"unstable": args.unstable, "eps": args.eps,
                                                  "m_list": args.m_list})
    return _execute(args, config)


def cmd_compare(args):
    return _execute(args, _config(args, args.stages))


def cmd_report(args):
    try:
        report = load_report(args.path)
    except (OSError, ValueError, TypeError) as exc:
        raise ConfigError(f"cannot read report {args.path}: {exc}") from None
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(render_report(report))
    return EXIT_OK


COMMANDS = {
    "models": cmd_models, "scan": cmd_scan, "lyapunov": cmd_lyapunov, "entropy": cmd_entropy,
    "snake-demo": cmd_snake, "mix-demo": cmd_mix, "compare": cmd_compare, "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SymplecticEntropyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
