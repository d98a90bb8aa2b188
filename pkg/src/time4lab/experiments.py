"""Experiment presets, scenario files and CSV output for the simulator.

Two CSV layouts are produced.  Runs that vary timing attributes use the
loss-report layout (one column per attribute); resource sweeps (scratch and
rate reduction) use the sweep layout, which carries the strategy parameter and
the withheld bandwidth.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .lfa import Flow, ForwardingFunction, GameState, LfaError, LfaGraph, Update
from .netsim import (
    MBPS, NS_PER_MS, PERFORMANCE_TYPES, ClockRegistry, SimParams, World, ms, video_swap_scenario,
)
from .strategies import (
    KINDS, PARAMETRIC, SWEEP_COLUMNS, StrategyConfig, SwapIntent, SweepRow, execute, fmt_float,
    format_fraction, intent_for, map_tasks,
)

LOSS_COLUMNS = ("scenario_id", "strategy", "n", "delta_ms", "install_range_ms", "sched_error_ms", "seed",
                "lost_packets", "update_duration_ms")
VIDEO_COLUMNS = ("run", "seed", "sched_error_ms", "inject_ms", "error_ms", "misrouted_packets")

SCENARIO_VERSION = 1
DEFAULT_SEEDS = 100


@dataclass(frozen=True)
class RunSpec:
    """One simulation run: a strategy on a flow swap with fixed parameters.

    ``n`` selects the built-in flow-swap scenario; ``intent`` overrides it with
    a custom swap.
    """

    scenario_id: str
    cfg: StrategyConfig
    params: SimParams
    n: int = 2
    intent: Optional[SwapIntent] = None
    clocks: Optional[ClockRegistry] = None
    inject: tuple = ()  # (switch, ns) pairs


@dataclass(frozen=True)
class RunResult:
    spec: RunSpec
    n: int
    lost_packets: float
    update_duration_ms: float
    withheld_mbit: float

    def loss_row(self) -> list:
        p = self.spec.params
        return [self.spec.scenario_id, self.spec.cfg.label, self.n, fmt_ms(p.delta_ns), fmt_ms(p.install_range_ns),
                fmt_ms(p.sched_error_ns), p.seed, fmt_float(self.lost_packets), fmt_float(self.update_duration_ms)]

    def sweep_row(self) -> SweepRow:
        cfg = self.spec.cfg
        return SweepRow(cfg.kind, cfg.param, self.n, self.spec.params.seed, self.lost_packets,
                        self.update_duration_ms, self.withheld_mbit)


def fmt_ms(ns: int) -> str:
    return format_fraction(Fraction(ns, NS_PER_MS))


def run_spec(spec: RunSpec) -> RunResult:
    intent = spec.intent
    if intent is None:
        intent = intent_for(spec.n, spec.clocks)
    elif spec.clocks is not None:
        intent = replace(intent, world=replace(intent.world, clocks=spec.clocks))
    result = execute(intent, spec.cfg, spec.params, dict(spec.inject) or None)
    return RunResult(spec, len(intent.switches), result.lost_packets, result.update_duration_ms,
                     result.withheld_mbit)


def run_specs(specs: Sequence[RunSpec], jobs: int = 1) -> list:
    return map_tasks(run_spec, specs, jobs)


def _csv(header: Sequence, rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def loss_csv(results: Iterable[RunResult]) -> str:
    return _csv(LOSS_COLUMNS, (r.loss_row() for r in results))


def sweep_csv(results: Iterable[RunResult]) -> str:
    return _csv(SWEEP_COLUMNS, (r.sweep_row().as_csv() for r in results))


# -- figure presets ------------------------------------------------------------

SCRATCH_GRID = tuple(Fraction(x) for x in ("0", "0.025", "0.05", "0.075", "0.1"))
REDUCTION_GRID = SCRATCH_GRID
N_GRID = (2, 4, 8, 16, 32)
DELTA_GRID_MS = ("1", "2.5", "5", "7.5", "9.64", "12.5", "15")
INSTALL_GRID_MS = ("0", "0.5", "1", "1.3", "2", "2.5", "3")
SCHED_ERROR_GRID_MS = ("0", "0.25", "0.5", "0.75", "1", "1.23", "1.5", "2", "2.5")
FIGURE_N = 8
RESOURCE_N = 2


@dataclass(frozen=True)
class Figure:
    name: str
    layout: str  # "loss" or "sweep"
    description: str


FIGURES = {
    "6a": Figure("6a", "loss", "loss vs number of switches, Time4 and Untimed"),
    "6b": Figure("6b", "loss", "loss of every untimed variant against Time4"),
    "6c": Figure("6c", "sweep", "scratch capacity grid, SWAN and Time4+SWAN"),
    "6d": Figure("6d", "sweep", "rate reduction grid, B4 and Time4+B4"),
    "7": Figure("7", "loss", "loss vs controller gap (Delta)"),
    "8a": Figure("8a", "loss", "loss vs installation latency range (I_R)"),
    "8b": Figure("8b", "loss", "Time4 loss vs scheduling error (delta)"),
}


def figure_specs(name: str, seeds: Sequence[int], base: Optional[SimParams] = None) -> list:
    """Run specifications for a figure preset, in output order."""
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; expected one of {', '.join(FIGURES)}")
    base = base or SimParams.for_type("I")
    sid = f"fig{name}"
    specs = []

    def add(cfg, n, params):
        specs.extend(RunSpec(sid, cfg, params.replace(seed=s), n) for s in seeds)

    if name == "6a":
        for n in N_GRID:
            for kind in ("Time4", "Untimed"):
                add(StrategyConfig(kind), n, base)
    elif name == "6b":
        for kind in ("Time4", "Untimed", "Ordered", "TwoPhase"):
            add(StrategyConfig(kind), FIGURE_N, base)
    elif name in ("6c", "6d"):
        kinds = ("Swan", "Time4Swan") if name == "6c" else ("B4", "Time4B4")
        for kind in kinds:
            for p in SCRATCH_GRID:
                add(StrategyConfig(kind, p), RESOURCE_N, base)
    elif name == "7":
        for value in DELTA_GRID_MS:
            for kind in ("Time4", "Untimed"):
                add(StrategyConfig(kind), FIGURE_N, base.replace(delta_ns=ms(value)))
    elif name == "8a":
        for value in INSTALL_GRID_MS:
            for kind in ("Time4", "Untimed"):
                add(StrategyConfig(kind), FIGURE_N, base.replace(install_range_ns=ms(value)))
    elif name == "8b":
        for value in SCHED_ERROR_GRID_MS:
            add(StrategyConfig("Time4"), FIGURE_N, base.replace(sched_error_ns=ms(value)))
    return specs


def run_figure(name: str, seeds: Sequence[int], jobs: int = 1, base: Optional[SimParams] = None) -> str:
    results = run_specs(figure_specs(name, seeds, base), jobs)
    return sweep_csv(results) if FIGURES[name].layout == "sweep" else loss_csv(results)


# -- video microbenchmark ----------------------------------------------------------

def video_csv(seeds: Sequence[int], params: SimParams, inject_ns: int = 0) -> str:
    rows = []
    for run_idx, seed in enumerate(seeds):
        sample = video_swap_scenario(params.replace(seed=seed), inject_ns=inject_ns)
        rows.append([run_idx, seed, fmt_ms(params.sched_error_ns), fmt_ms(inject_ns),
                     format_fraction(Fraction(sample.error_ns, NS_PER_MS)), fmt_float(sample.misrouted_packets)])
    return _csv(VIDEO_COLUMNS, rows)


# -- scenario files ---------------------------------------------------------------

class ScenarioError(ValueError):
    """A scenario file that cannot be used; ``where`` names the offending field."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


_TOP_KEYS = {"version", "id", "topology", "flows", "target", "params", "strategy", "offsets", "sweep", "seeds"}
_TOPOLOGY_KEYS = {"n", "m", "capacity_mbps"}
_PARAM_KEYS = {"type", "delta_ms", "install_range_ms", "sched_error_ms", "packet_size_bits"}
_STRATEGY_KEYS = {"kind", "param", "schedule_advance_ms"}
_FLOW_KEYS = {"id", "bandwidth_mbps", "first_hop", "via"}
_TARGET_KEYS = {"flow", "switch", "next"}
_SWEEP_KEYS = {"strategy", "param", "n", "delta_ms", "install_range_ms", "sched_error_ms"}


def _check_keys(obj, allowed: set, where: str):
    if not isinstance(obj, dict):
        raise ScenarioError("expected an object", where)
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ScenarioError(f"unknown key(s) {', '.join(unknown)}", where)


def _number(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ScenarioError("expected a number", where)
    try:
        return Fraction(str(value))
    except ValueError:
        raise ScenarioError(f"not a number: {value!r}", where) from None


def _list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ScenarioError("expected a list", where)
    return value


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    params: SimParams
    strategy: StrategyConfig
    n: int = 2
    intent: Optional[SwapIntent] = None
    clocks: Optional[ClockRegistry] = None
    sweep: Mapping = field(default_factory=dict)
    seeds: Optional[int] = None

    def specs(self, seeds: Sequence[int]) -> list:
        """Expand the sweep grid (possibly empty) into run specifications."""
        axes = [(key, self.sweep[key]) for key in sorted(self.sweep)]
        points = [{}]
        for key, values in axes:
            points = [dict(p, **{key: v}) for p in points for v in values]
        specs = []
        for point in points:
            params = self.params
            for key, attr in (("delta_ms", "delta_ns"), ("install_range_ms", "install_range_ns"),
                              ("sched_error_ms", "sched_error_ns")):
                if key in point:
                    params = params.replace(**{attr: ms(point[key])})
            kind = point.get("strategy", self.strategy.kind)
            param = point.get("param", self.strategy.param if kind in PARAMETRIC else 0)
            cfg = StrategyConfig(kind, param, self.strategy.schedule_advance_ns)
            n = point.get("n", self.n)
            for seed in seeds:
                specs.append(RunSpec(self.scenario_id, cfg, params.replace(seed=seed), n, self.intent,
                                     self.clocks))
        return specs


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from None
    _check_keys(doc, _TOP_KEYS, "scenario")
    if doc.get("version") != SCENARIO_VERSION:
        raise ScenarioError(f"unsupported version {doc.get('version')!r}; expected {SCENARIO_VERSION}", "version")
    sid = str(doc.get("id", "scenario"))

    topo = doc.get("topology", {})
    _check_keys(topo, _TOPOLOGY_KEYS, "topology")
    n = topo.get("n", 2)
    if not isinstance(n, int) or n < 2:
        raise ScenarioError("n must be an integer >= 2", "topology.n")

    p = doc.get("params", {})
    _check_keys(p, _PARAM_KEYS, "params")
    kind = p.get("type", "I")
    if kind not in PERFORMANCE_TYPES:
        raise ScenarioError(f"unknown performance type {kind!r}", "params.type")
    overrides = {}
    for key, attr in (("delta_ms", "delta_ns"), ("install_range_ms", "install_range_ns"),
                      ("sched_error_ms", "sched_error_ns")):
        if key in p:
            overrides[attr] = ms(_number(p[key], f"params.{key}"))
    if "packet_size_bits" in p:
        overrides["packet_size_bits"] = int(_number(p["packet_size_bits"], "params.packet_size_bits"))
    try:
        params = SimParams.for_type(kind, **overrides)
    except ValueError as exc:
        raise ScenarioError(str(exc), "params") from None

    s = doc.get("strategy", {"kind": "Time4"})
    _check_keys(s, _STRATEGY_KEYS, "strategy")
    try:
        strategy = StrategyConfig(s.get("kind", "Time4"), _number(s.get("param", 0), "strategy.param"),
                                  ms(_number(s.get("schedule_advance_ms", 100), "strategy.schedule_advance_ms")))
    except ValueError as exc:
        raise ScenarioError(str(exc), "strategy") from None

    clocks = None
    if "offsets" in doc:
        offsets = doc["offsets"]
        if not isinstance(offsets, dict):
            raise ScenarioError("expected an object of switch -> milliseconds", "offsets")
        clocks = ClockRegistry({sw: ms(_number(v, f"offsets.{sw}")) for sw, v in sorted(offsets.items())})

    intent = None
    if "flows" in doc or "target" in doc:
        intent = _custom_intent(doc, topo, clocks)

    sweep = doc.get("sweep", {})
    _check_keys(sweep, _SWEEP_KEYS, "sweep")
    grid = {}
    for key, values in sweep.items():
        values = _list(values, f"sweep.{key}")
        if key == "strategy":
            for i, v in enumerate(values):
                if v not in KINDS:
                    raise ScenarioError(f"unknown strategy {v!r}", f"sweep.strategy[{i}]")
        elif key == "n":
            for i, v in enumerate(values):
                if not isinstance(v, int) or v < 2 or intent is not None:
                    raise ScenarioError("n must be an integer >= 2 on the built-in swap", f"sweep.n[{i}]")
        else:
            values = [_number(v, f"sweep.{key}[{i}]") for i, v in enumerate(values)]
        if values:
            grid[key] = tuple(values)
    seeds = doc.get("seeds")
    if seeds is not None and (not isinstance(seeds, int) or seeds < 1):
        raise ScenarioError("seeds must be a positive integer", "seeds")
    scenario = Scenario(sid, params, strategy, n, intent, clocks, grid, seeds)
    try:
        scenario.specs([0])  # validates every grid point's strategy parameters
    except ValueError as exc:
        raise ScenarioError(str(exc), "sweep") from None
    return scenario


def _custom_intent(doc: dict, topo: dict, clocks: Optional[ClockRegistry]) -> SwapIntent:
    n = topo.get("n", 2)
    m = topo.get("m", 2)
    if not isinstance(m, int) or m < 1:
        raise ScenarioError("m must be a positive integer", "topology.m")
    capacity = _number(topo.get("capacity_mbps", 10), "topology.capacity_mbps") * MBPS
    graph = LfaGraph.canonical(n, m, capacity)
    flows, entries = {}, {}
    for i, raw in enumerate(_list(doc.get("flows", []), "flows")):
        where = f"flows[{i}]"
        _check_keys(raw, _FLOW_KEYS, where)
        try:
            fid = int(raw["id"])
            flow = Flow(fid, _number(raw["bandwidth_mbps"], where + ".bandwidth_mbps") * MBPS, raw["first_hop"])
        except KeyError as exc:
            raise ScenarioError(f"missing key {exc.args[0]}", where) from None
        except (LfaError, TypeError, ValueError) as exc:
            raise ScenarioError(str(exc), where) from None
        flows[fid] = flow
        if "via" in raw:
            entries[(fid, flow.first_hop)] = raw["via"]
    target: dict = {}
    for i, raw in enumerate(_list(doc.get("target", []), "target")):
        where = f"target[{i}]"
        _check_keys(raw, _TARGET_KEYS, where)
        try:
            target.setdefault(raw["switch"], {})[(int(raw["flow"]), raw["switch"])] = raw["next"]
        except KeyError as exc:
            raise ScenarioError(f"missing key {exc.args[0]}", where) from None
    try:
        state = GameState(graph, flows, ForwardingFunction(entries))
        world = World(graph, state, clocks or ClockRegistry())
        return SwapIntent(world, {sw: Update(a) for sw, a in target.items()}, name=str(doc.get("id", "custom")))
    except LfaError as exc:
        raise ScenarioError(str(exc), "flows") from None


def scenario_csv(scenario: Scenario, seeds: Sequence[int], jobs: int = 1) -> str:
    return loss_csv(run_specs(scenario.specs(seeds), jobs))
