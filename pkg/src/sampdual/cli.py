"""Command line entry point ``sampdual``.

Each subcommand builds an ``ExperimentConfig`` from its flags (or reads
one with ``--config``), runs it, prints a JSON summary and, with
``--out``, writes CSV/JSON artifacts and a manifest.  The exit status is
0 when every in-run assertion holds, 1 when one fails and 2 for invalid
input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from .duality import DualityViolation
from .exponential import SpectralError
from .experiments import ConfigError, ExperimentConfig, dumps, run
from .quadrature import GridError
from .sets import SetError
from .spectra import SpectrumError

# options whose values may start with "-", e.g. --spectrum -1.5:1.5
_VALUE_OPTIONS = {"--spectrum", "--ambient", "--deltas", "--alphas", "--eps", "--lambda", "--s", "--set", "--window"}

_INPUT_ERRORS = (ConfigError, SetError, SpectrumError, SpectralError, GridError, ValueError, OSError)


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_OPTIONS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _set_arg(text: str) -> dict:
    """A set as JSON, ``@file.json``, ``lattice:SPACING[:SHIFT]`` or ``periodic:P:o1,o2``."""
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    head, _, rest = text.partition(":")
    if head == "lattice":
        spacing, _, shift = rest.partition(":")
        return {"kind": "periodic", "period": float(spacing), "offsets": [float(shift or 0.0)]}
    if head == "periodic":
        period, _, offs = rest.partition(":")
        return {"kind": "periodic", "period": float(period), "offsets": [float(o) for o in offs.split(",") if o]}
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(f"cannot read set {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config; replaces the parameter flags")
    p.add_argument("--out", help="output directory, or a .csv path for the main table")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--figures", action="store_true", help="also render PNG figures (needs matplotlib)")
    p.add_argument("--timings", action="store_true", help="record wall-clock timings in the manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sampdual", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="lower and upper densities of a set")
    p.add_argument("--set", type=_set_arg)
    p.add_argument("--length", help="window length l for finite sets")
    _common(p)
    p.set_defaults(kind="density", fields={"set": "set", "length": "length"})

    p = sub.add_parser("gram", help="Gram matrix and Riesz/Bessel/frame bounds")
    p.add_argument("--set", type=_set_arg)
    p.add_argument("--spectrum")
    p.add_argument("--window", help="truncate a periodic set to [-T, T]")
    p.add_argument("--resolution", help="grid nodes per unit length for frame bounds")
    _common(p)
    p.set_defaults(
        kind="gram", fields={"set": "set", "spectrum": "spectrum", "window": "window", "resolution": "resolution"}
    )

    p = sub.add_parser("duality", help="finite duality checks over Z_N")
    dsub = p.add_subparsers(dest="action", required=True)
    q = dsub.add_parser("scan", help="every (Lambda, S) pair for N <= nmax")
    q.add_argument("--nmax")
    _common(q)
    q.set_defaults(kind="duality_scan", fields={"nmax": "nmax"})
    q = dsub.add_parser("check", help="one instance")
    q.add_argument("--n")
    q.add_argument("--lambda", dest="lam")
    q.add_argument("--s")
    _common(q)
    q.set_defaults(kind="duality_check", fields={"n": "n", "lam": "lambda", "s": "s"})

    p = sub.add_parser("stability", help="perturbation bounds and frame margins")
    ssub = p.add_subparsers(dest="action", required=True)
    q = ssub.add_parser("sweep")
    q.add_argument("--lambda-kind", choices=("integer", "lattice", "set"))
    q.add_argument("--spacing")
    q.add_argument("--set", type=_set_arg)
    q.add_argument("--spectrum")
    q.add_argument("--window", help="use the points in [-T, T]")
    q.add_argument("--deltas")
    q.add_argument("--seeds")
    q.add_argument("--resolution")
    _common(q)
    q.set_defaults(
        kind="stability",
        fields={
            "lambda_kind": "lambda_kind",
            "spacing": "spacing",
            "set": "set",
            "spectrum": "spectrum",
            "window": "window",
            "deltas": "deltas",
            "seeds": "seeds",
            "resolution": "resolution",
        },
    )

    p = sub.add_parser("claim", help="lattice rounding and complement densities")
    p.add_argument("--set", type=_set_arg)
    p.add_argument("--spectrum")
    p.add_argument("--delta")
    p.add_argument("--ambient")
    p.add_argument("--length")
    _common(p)
    p.set_defaults(
        kind="claim",
        fields={"set": "set", "spectrum": "spectrum", "delta": "delta", "ambient": "ambient", "length": "length"},
    )

    p = sub.add_parser("poisson", help="vanishing integer sums with tail bounds")
    p.add_argument("--eps")
    p.add_argument("--m", dest="truncations")
    _common(p)
    p.set_defaults(kind="poisson", fields={"eps": "eps", "truncations": "truncations"})

    p = sub.add_parser("sweep", help="density sweep over alpha*Z, or any experiment via --config")
    p.add_argument("--alphas")
    p.add_argument("--sigma")
    p.add_argument("--window")
    p.add_argument("--resolution")
    _common(p)
    p.set_defaults(
        kind="density_sweep", fields={"alphas": "alphas", "sigma": "sigma", "window": "window", "resolution": "resolution"}
    )
    return parser


def _number(text: str):
    # integers stay integers so the config validators can check them
    try:
        return int(text)
    except ValueError:
        return text


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        if args.command != "sweep" and cfg.kind != args.kind:
            raise ConfigError(f"kind: config is {cfg.kind!r} but the subcommand runs {args.kind!r}")
    else:
        params = {}
        for attr, name in args.fields.items():
            value = getattr(args, attr)
            if value is not None:
                params[name] = _number(value) if isinstance(value, str) else value
        cfg = ExperimentConfig(args.kind, params)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out"] = args.out
    if args.figures:
        changes["figures"] = True
    return cfg.replace(**changes) if changes else cfg


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_glue_negative_values(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
        result = run(cfg, timings=args.timings)
    except DualityViolation as exc:
        print(dumps({"error": str(exc), "counterexample": exc.instance}), end="", file=sys.stderr)
        return 1
    except _INPUT_ERRORS as exc:
        print(f"sampdual: error: {exc}", file=sys.stderr)
        return 2
    summary = result.summary()
    if cfg.kind == "duality_scan":
        # counterexample records go to stderr as well, one JSON object per line
        for f in summary["duality_scan"]["failures"]:
            print(json.dumps(f, sort_keys=True), file=sys.stderr)
    print(dumps(summary), end="")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
