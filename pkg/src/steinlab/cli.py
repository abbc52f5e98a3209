"""Command-line entry point ``stein-lab``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config
from .errors import CapacityError, ConfigError, DomainError
from .runner import EXIT_CAPACITY, EXIT_CONFIG, EXIT_OK, run_scenario


def _vector(text: str) -> list[float]:
    try:
        vals = json.loads(text) if text.strip().startswith("[") else [float(v) for v in text.split(",")]
        return [float(v) for v in vals]
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"not a probability vector: {text!r}") from exc


def _print_outcome(report, out) -> None:
    for s in report.steps:
        extra = f" ({s.message})" if s.message else ""
        kind = "hard" if s.result is None or s.result.hard else "soft"
        print(f"{s.status.upper():8s} {s.name:26s} [{kind}] {s.seconds:7.2f}s{extra}")
    if out is not None:
        print(f"report written to {out}")


def cmd_run(args) -> int:
    from .scenario import resolve
    try:
        sc = resolve(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else Path("out") / sc.name
    report = run_scenario(sc, out, jobs=args.jobs, seed=args.seed)
    _print_outcome(report, out)
    return report.exit_code


def cmd_suite(args) -> int:
    from .scenario import bundled_names, resolve
    root = Path(args.out)
    worst = EXIT_OK
    for name in bundled_names():
        sc = resolve(name)
        print(f"== {name}")
        report = run_scenario(sc, root / name, jobs=args.jobs, seed=args.seed)
        _print_outcome(report, None)
        worst = max(worst, report.exit_code, key=lambda c: (c == EXIT_CAPACITY, c))
    print(f"reports written under {root}")
    return worst


def cmd_list_scenarios(args) -> int:
    from .scenario import bundled_names, resolve
    for name in bundled_names():
        print(f"{name:16s} {resolve(name).description}")
    return EXIT_OK


def cmd_list_checks(args) -> int:
    from .checks import REGISTRY
    for chk in REGISTRY.values():
        kind = "hard" if chk.hard else "soft"
        print(f"{chk.name:26s} [{kind}] {chk.description}  -- {chk.anchor}")
    print(f"{len(REGISTRY)} checks registered")
    return EXIT_OK


def cmd_divergence(args) -> int:
    from .alphabet import Distribution
    from .divergences import d_hyp, d_max, d_max_smooth, kl
    try:
        P, Q = Distribution(args.p), Distribution(args.q)
        if len(args.p) != len(args.q):
            raise DomainError("p and q must have the same length")
        if args.kind in ("dmax-smooth", "dhyp") and args.eps is None:
            raise DomainError(f"--eps is required for {args.kind}")
        if args.kind == "kl":
            value = kl(P, Q)
        elif args.kind == "dmax":
            value = d_max(P, Q)
        elif args.kind == "dmax-smooth":
            value = d_max_smooth(P, Q, args.eps).value
        else:
            value = d_hyp(P, Q, args.eps).value
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{value!r} {config.unit_name()}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stein-lab",
                                     description="Composite hypothesis testing experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario config (path or bundled name)")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (default out/<scenario name>)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("suite", help="run every bundled scenario")
    p.add_argument("--out", default="out")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_suite)

    sub.add_parser("list-checks", help="list registered checks").set_defaults(func=cmd_list_checks)
    sub.add_parser("list-scenarios", help="list bundled scenarios").set_defaults(func=cmd_list_scenarios)

    p = sub.add_parser("divergence", help="evaluate one divergence between two laws")
    p.add_argument("--kind", choices=("kl", "dmax", "dmax-smooth", "dhyp"), required=True)
    p.add_argument("--p", type=_vector, required=True, help="comma list or JSON array")
    p.add_argument("--q", type=_vector, required=True)
    p.add_argument("--eps", type=float)
    p.set_defaults(func=cmd_divergence)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
