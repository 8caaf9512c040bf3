"""Command-line front end.

Exit codes: 0 on success, 1 on any validation or usage error, 2 on I/O
failure. Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import analytic, oracle
from .core import ActionProfile, GameConfig, evaluate_utility, validate_config
from .exceptions import ConfigError, IoFailure, StackelrouteError
from .sweep import SweepSpec, boundary_agreement, export_regions, sweep

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _g(v: float) -> str:
    return f"{v:.9g}"


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def load_config(path: str) -> GameConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return validate_config(raw)


def _parse_profile(text: str) -> ActionProfile:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise UsageError(f"--profile needs 't1,x1,t2,x2', got {text!r}")
    try:
        return ActionProfile(float(parts[0]), int(parts[1]), float(parts[2]), int(parts[3]))
    except ValueError:
        raise UsageError(f"--profile needs numbers with integer routes, got {text!r}") from None


def _emit_equilibria(eqs: list[analytic.Equilibrium], config: GameConfig, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps([e.to_record(config) for e in eqs], indent=2))
        return
    for e in eqs:
        p = e.profile
        u1, u2 = e.utilities(config)
        line = (
            f"{e.kind.value} [{e.case_tag.value}] t1={_g(p.t1)} x1={p.x1} t2={_g(p.t2)} x2={p.x2} "
            f"u1={_g(u1)} u2={_g(u2)}"
        )
        if e.tipping_time is not None:
            line += f" T={_g(e.tipping_time)}"
        print(line)
        if e.note:
            print(f"  note: {e.note}")


def _solve_any(config: GameConfig, step: float | None) -> list[analytic.Equilibrium]:
    if config.n_routes > 2 and not config.homogeneous:
        _warn("no closed form for heterogeneous costs with more than two routes; using the grid oracle")
        h = step or oracle.default_step(config)
        return [oracle.oracle_solve(config, oracle.build_grid(config, h))]
    return analytic.solve(config)


def cmd_solve(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    _emit_equilibria(_solve_any(config, args.step), config, args.format)
    return EXIT_OK


def cmd_br(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    br = analytic.best_response_agent2(args.t1, args.x1, config)
    u1, u2 = analytic.response_utility(args.t1, args.x1, br, config)
    kind = "PreemptLeftLimit" if br.preempt else "Concrete"
    if args.format == "json":
        key = "t_ref" if br.preempt else "t"
        print(json.dumps({"variant": kind, key: float(_g(br.t)), "x": br.x, "utilities": [float(_g(u1)), float(_g(u2))]}))
    else:
        key = "t_ref" if br.preempt else "t2"
        print(f"{kind} {key}={_g(br.t)} x2={br.x} u1={_g(u1)} u2={_g(u2)}")
    return EXIT_OK


def _load_candidates(path: str) -> list[ActionProfile]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read candidates {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"candidates {path} is not valid JSON: {exc}") from None
    records = doc if isinstance(doc, list) else [doc]
    try:
        return [
            ActionProfile(float(p["t1"]), int(p["x1"]), float(p["t2"]), int(p["x2"]))
            for p in (rec["profile"] for rec in records)
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed equilibrium record in {path}: {exc}") from None


def cmd_oracle(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    h = args.step if args.step is not None else oracle.default_step(config)
    grid = oracle.build_grid(config, h)
    found = oracle.oracle_solve(config, grid)
    try:
        closed = analytic.solve(config)
    except StackelrouteError:
        _warn("no closed form for this config; reporting the oracle alone")
        closed = []
    candidates = _load_candidates(args.candidates) if args.candidates else [e.profile for e in closed]

    agrees = None
    if closed:
        agrees = any(
            e.kind == found.kind
            and (e.profile.x1, e.profile.x2) == (found.profile.x1, found.profile.x2)
            and abs(e.profile.t1 - found.profile.t1) <= 2 * h
            for e in closed
        )
    reports = [(c, oracle.verify_spe(c, config, grid)) for c in candidates]

    if args.format == "json":
        doc = {
            "step": float(_g(h)),
            "oracle": found.to_record(config),
            "analytic": [e.to_record(config) for e in closed],
            "agreement": agrees,
            "verification": [
                {
                    "profile": {"t1": float(_g(c.t1)), "x1": c.x1, "t2": float(_g(c.t2)), "x2": c.x2},
                    "is_spe": r.is_spe,
                    "deviation": None
                    if r.best_deviation is None
                    else {
                        "agent": r.best_deviation.agent,
                        "action": [float(_g(r.best_deviation.action[0])), r.best_deviation.action[1]],
                        "gain": float(_g(r.best_deviation.gain)),
                    },
                }
                for c, r in reports
            ],
        }
        print(json.dumps(doc, indent=2))
        return EXIT_OK

    p = found.profile
    print(f"step h={_g(h)} grid points={len(grid.times)}")
    print(f"oracle: {found.kind.value} t1={_g(p.t1)} x1={p.x1} t2={_g(p.t2)} x2={p.x2}")
    for e in closed:
        q = e.profile
        print(f"analytic: {e.kind.value} [{e.case_tag.value}] t1={_g(q.t1)} x1={q.x1} t2={_g(q.t2)} x2={q.x2}")
    if agrees is not None:
        print(f"agreement (kind, routes, |dt1| <= 2h): {'yes' if agrees else 'no'}")
    for c, r in reports:
        line = f"verify t1={_g(c.t1)} x1={c.x1} t2={_g(c.t2)} x2={c.x2}: is_spe={r.is_spe}"
        if r.best_deviation is not None:
            d = r.best_deviation
            line += f" deviation agent={d.agent} t={_g(d.action[0])} x={d.action[1]} gain={_g(d.gain)}"
        print(line)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    x_range = None if args.x_min is None and args.x_max is None else (args.x_min, args.x_max)
    y_range = None if args.y_min is None and args.y_max is None else (args.y_min, args.y_max)
    if (x_range and None in x_range) or (y_range and None in y_range):
        raise UsageError("give both --x-min/--x-max and both --y-min/--y-max, or neither")
    spec = SweepSpec(config, x_range=x_range, y_range=y_range, x_resolution=args.resolution, y_resolution=args.resolution)
    grid = sweep(spec, threads=args.threads)
    fmt = args.format or ("json" if str(args.out).lower().endswith(".json") else "csv")
    export_regions(grid, fmt, args.out, spec)
    agreement = boundary_agreement(grid, spec)
    print(
        f"wrote {grid.shape[0] * grid.shape[1]} cells to {args.out} ({fmt}); "
        f"boundaries={len(grid.boundaries)} "
        f"max deviation vertical={_g(agreement['vertical'])} frontier={_g(agreement['frontier'])} cells"
    )
    return EXIT_OK


def cmd_utility(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    u1, u2 = evaluate_utility(_parse_profile(args.profile), config)
    print(f"u1={_g(u1)} u2={_g(u2)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stackelroute", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def with_config(p: argparse.ArgumentParser) -> argparse.ArgumentParser:
        p.add_argument("--config", required=True, help="game config JSON")
        return p

    p = with_config(sub.add_parser("solve", help="closed-form subgame perfect equilibria"))
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--step", type=float, default=None, help="oracle step when no closed form exists")
    p.set_defaults(func=cmd_solve)

    p = with_config(sub.add_parser("br", help="follower best response to a leader action"))
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--x1", type=int, required=True)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_br)

    p = with_config(sub.add_parser("oracle", help="grid backward induction and deviation checks"))
    p.add_argument("--step", type=float, default=None, help="grid step (default 1e-3 * (t_o - T))")
    p.add_argument("--candidates", default=None, help="JSON from 'solve --format json' to verify")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_oracle)

    p = with_config(sub.add_parser("sweep", help="equilibrium region map over (c_o*delta1^2, E1-E2)"))
    p.add_argument("--x-min", type=float, default=None)
    p.add_argument("--x-max", type=float, default=None)
    p.add_argument("--y-min", type=float, default=None)
    p.add_argument("--y-max", type=float, default=None)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = with_config(sub.add_parser("utility", help="evaluate (u1, u2) at a profile"))
    p.add_argument("--profile", required=True, help="'t1,x1,t2,x2'")
    p.set_defaults(func=cmd_utility)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (IoFailure, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, StackelrouteError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
