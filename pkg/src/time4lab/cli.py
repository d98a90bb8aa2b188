"""``time4lab`` command line: theorem certification, simulations and codec tools."""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import adversary, experiments, search
from .lfa import LfaError
from .netsim import PERFORMANCE_TYPES, SimParams, ms
from .ofwire import codec
from .strategies import KINDS, StrategyConfig

EXIT_OK, EXIT_REFUTED, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3
SEED_ENV = "TIME4_LAB_SEED"


class UsageError(Exception):
    pass


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


_DURATION = re.compile(r"^\s*([+-]?[0-9]*\.?[0-9]+(?:/[0-9]+)?)\s*(ns|us|ms|s)?\s*$")
_UNIT_NS = {"ns": 1, "us": 1_000, "ms": 1_000_000, "s": 1_000_000_000}


def parse_duration_ns(text: str) -> int:
    """``0.4ms``, ``400us`` or a bare number of milliseconds, as integer ns."""
    match = _DURATION.match(text)
    if not match:
        raise argparse.ArgumentTypeError(f"not a duration: {text!r}")
    value = Fraction(match.group(1)) * _UNIT_NS[match.group(2) or "ms"]
    return int(round(value))


def base_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        seed = int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if seed < 0:
        raise UsageError(f"{SEED_ENV} must be non-negative")
    return seed


def seed_list(args, default_count: int) -> list:
    count = args.seeds if args.seeds is not None else default_count
    if count < 1:
        raise UsageError("--seeds must be at least 1")
    start = base_seed(args)
    return list(range(start, start + count))


def emit(text: str, out: Optional[str]):
    if out and out != "-":
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def default_jobs() -> int:
    return os.cpu_count() or 1


# -- prove -------------------------------------------------------------------------

THEOREMS = {1, 2, 3, 4, 5}


def _validate_prove(args):
    if args.theorem not in THEOREMS:
        raise UsageError(f"--theorem must be one of 1..5, got {args.theorem}")
    if args.theorem == 3:
        alpha = args.alpha if args.alpha is not None else Fraction(1, 4)
        if not 0 < alpha < Fraction(1, 2):
            raise UsageError(f"--alpha must lie in (0, 1/2), got {alpha}")
    if args.theorem == 4:
        nu = args.nu if args.nu is not None else Fraction(1, 10)
        if not 0 < nu < Fraction(1, 3):
            raise UsageError(f"--nu must lie in (0, 1/3), got {nu}")
    if args.theorem == 5 and args.n is not None and args.n < 3:
        raise UsageError("--n must be at least 3 for theorem 5")
    if args.theorem == 2 and args.m is not None and args.m < 3:
        raise UsageError("--m must be at least 3 for theorem 2")
    if args.n is not None and args.n < 1 or args.m is not None and args.m < 1:
        raise UsageError("--n and --m must be positive")


def _prove_dims(args) -> tuple:
    theorem = args.theorem
    if theorem == 5:
        n = args.n or 3
        return n, args.m or 2
    if theorem == 2:
        return args.n or 2, args.m or 4
    return args.n or 2, args.m or 2


def print_transcript(cert, out=None):
    out = out or sys.stdout
    print(f"theorem {cert.theorem}: n={cert.graph.first_hop_count} m={cert.graph.dest_edge_count} "
          f"capacity={cert.graph.capacity}", file=out)
    for key, value in cert.detail.items():
        print(f"  {key} = {value}", file=out)
    print("first-fit controller run:", file=out)
    for idx, step in enumerate(cert.transcript.steps, 1):
        print(f"  {idx:2d}. source: {step.move}", file=out)
        tag = ""
        if step.forced:
            tag = "  [forced"
            if step.impact is not None:
                tag += f", impact {step.impact}"
            tag += "]"
        print(f"      controller: {step.plan.describe()}{tag}", file=out)
    ex = cert.exploration
    print(f"exhaustive exploration: {ex.tree_size} game-tree nodes, {ex.leaves} leaves, "
          f"forced {cert.swap_size}-swaps per branch in [{ex.min_forced}, {ex.max_forced}]", file=out)
    if ex.impacts:
        print(f"  impacts of forced two-entry swaps: {', '.join(str(x) for x in sorted(ex.impacts))}", file=out)
    for name, ok in cert.checks.items():
        print(f"  [{'ok' if ok else 'FAIL'}] {name}", file=out)
    verdict = f"{cert.swap_size}-swap forced" if cert.certified else "not certified"
    print(f"verdict: {verdict}", file=out)


def cmd_prove(args) -> int:
    _validate_prove(args)
    n, m = _prove_dims(args)
    try:
        cert = adversary.certify(args.theorem, n=n, m=m, alpha=args.alpha, nu=args.nu)
    except search.GuardExceeded as exc:
        print(f"refusing: instance exceeds the exhaustive oracle's guard ({exc})", file=sys.stderr)
        return EXIT_GUARD
    except LfaError as exc:
        raise UsageError(str(exc)) from None
    print_transcript(cert)
    return EXIT_OK if cert.certified else EXIT_REFUTED


# -- simulate ------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    jobs = args.jobs or default_jobs()
    if args.figure and args.scenario:
        raise UsageError("give either --figure or a scenario file, not both")
    if args.figure:
        base = SimParams.for_type(args.type)
        text = experiments.run_figure(args.figure, seed_list(args, experiments.DEFAULT_SEEDS), jobs, base)
    elif args.scenario:
        try:
            with open(args.scenario) as fh:
                scenario = experiments.parse_scenario(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {args.scenario}: {exc.strerror}") from None
        except experiments.ScenarioError as exc:
            raise UsageError(f"{args.scenario}: {exc}") from None
        default = scenario.seeds or 1
        text = experiments.scenario_csv(scenario, seed_list(args, default), jobs)
    else:
        try:
            cfg = StrategyConfig(args.strategy, args.param)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        params = SimParams.for_type(args.type)
        specs = [experiments.RunSpec("cli", cfg, params.replace(seed=s), args.n or 2)
                 for s in seed_list(args, 1)]
        text = experiments.loss_csv(experiments.run_specs(specs, jobs))
    emit(text, args.out)
    return EXIT_OK


# -- video -----------------------------------------------------------------------------

def cmd_video(args) -> int:
    params = SimParams.for_type(args.type)
    if args.sched_error is not None:
        if args.sched_error < 0:
            raise UsageError("--sched-error must be non-negative")
        params = params.replace(sched_error_ns=args.sched_error)
    else:
        params = params.replace(sched_error_ns=ms("1.2"))
    text = experiments.video_csv(seed_list(args, 100), params, args.inject or 0)
    emit(text, args.out)
    return EXIT_OK


# -- codec -------------------------------------------------------------------------------

def _time(value, where: str) -> codec.OfpTime:
    if isinstance(value, int):
        return codec.OfpTime.from_ns(value)
    if isinstance(value, dict):
        return codec.OfpTime(int(value.get("seconds", 0)), int(value.get("nanoseconds", 0)))
    raise UsageError(f"{where}: expected nanoseconds or {{seconds, nanoseconds}}")


def _features_prop(value: dict) -> codec.FeaturesTimeProperty:
    return codec.FeaturesTimeProperty(**{k: _time(v, k) for k, v in value.items()})


def build_message(type_name: str, fields: dict):
    """Construct a wire object from JSON-style fields."""
    cls = codec.WIRE_TYPES.get(type_name)
    if cls is None:
        raise UsageError(f"unknown type {type_name!r}; expected one of {', '.join(codec.WIRE_TYPES)}")
    if cls is codec.OfpTime:
        return _time(fields, "OfpTime")
    kwargs = {}
    for key, value in fields.items():
        if key in ("scheduled_time",):
            kwargs[key] = _time(value, key)
        elif key == "time_property" and value is not None:
            if cls is codec.BundleControlMsg:
                kwargs[key] = codec.TimeBundleProperty(_time(value.get("scheduled_time", 0), key))
            else:
                kwargs[key] = _features_prop(value)
        elif key == "properties":
            kwargs[key] = tuple(_features_prop(v) for v in value)
        elif key in ("payload", "data"):
            kwargs[key] = bytes.fromhex(value)
        elif key == "error":
            kwargs[key] = codec.ExtensionError(int(value["type"]), int(value["code"]))
        elif cls is codec.FeaturesTimeProperty:
            kwargs[key] = _time(value, key)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise UsageError(f"{type_name}: {exc}") from None


def cmd_codec(args) -> int:
    try:
        if args.action == "encode":
            fields = json.loads(args.data) if args.data else {}
            msg = build_message(args.type, fields)
            print(msg.encode().hex())
            if args.explain:
                print("\n".join(codec.explain(msg)))
        else:
            if args.type not in codec.WIRE_TYPES:
                raise UsageError(f"unknown type {args.type!r}; expected one of {', '.join(codec.WIRE_TYPES)}")
            text = re.sub(r"\s+", "", args.data or "")
            try:
                buf = bytes.fromhex(text)
            except ValueError:
                print("error: malformed hex input", file=sys.stderr)
                return EXIT_REFUTED
            msg = codec.decode(buf, args.type)
            print(msg.encode().hex())
            if args.explain:
                print("\n".join(codec.explain(msg)))
    except codec.WireError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFUTED
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid field JSON: {exc.msg}") from None
    return EXIT_OK


# -- entry point -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="time4lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    prove = sub.add_parser("prove", help="certify a forced flow swap exhaustively")
    prove.add_argument("--theorem", type=int, required=True)
    prove.add_argument("--alpha", type=parse_fraction)
    prove.add_argument("--nu", type=parse_fraction)
    prove.add_argument("--n", type=int)
    prove.add_argument("--m", type=int)
    prove.set_defaults(func=cmd_prove)

    def seeded(p):
        p.add_argument("--seed", type=int, help=f"first seed (default ${SEED_ENV} or 0)")
        p.add_argument("--seeds", type=int, help="number of consecutive seeds")
        p.add_argument("--out", help="write CSV here instead of stdout")
        p.add_argument("--type", choices=sorted(PERFORMANCE_TYPES), default="I",
                       help="performance attribute set")

    sim = sub.add_parser("simulate", help="run flow-swap simulations and write CSV")
    sim.add_argument("scenario", nargs="?", help="scenario JSON file")
    sim.add_argument("--figure", choices=sorted(experiments.FIGURES))
    sim.add_argument("--strategy", choices=KINDS, default="Time4")
    sim.add_argument("--param", type=parse_fraction, default=Fraction(0))
    sim.add_argument("--n", type=int)
    sim.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    seeded(sim)
    sim.set_defaults(func=cmd_simulate)

    video = sub.add_parser("video", help="scheduling-error samples of the video swap")
    video.add_argument("--inject", type=parse_duration_ns, help="fixed execution offset, e.g. 0.4ms")
    video.add_argument("--sched-error", type=parse_duration_ns, help="scheduling error bound (default 1.2ms)")
    seeded(video)
    video.set_defaults(func=cmd_video)

    cod = sub.add_parser("codec", help="encode or decode wire structures as hex")
    cod.add_argument("action", choices=("encode", "decode"))
    cod.add_argument("type", help=f"one of {', '.join(codec.WIRE_TYPES)}")
    cod.add_argument("data", nargs="?", help="field JSON (encode) or hex (decode)")
    cod.add_argument("--explain", action="store_true", help="print a field breakdown")
    cod.set_defaults(func=cmd_codec)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"time4lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
