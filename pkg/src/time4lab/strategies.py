"""Update strategies that turn a desired flow swap into a simulator plan.

Every strategy starts from the same :class:`SwapIntent` (a lossless
before-state plus one :class:`~time4lab.lfa.Update` per switch) and differs
only in how and when the per-switch updates are sent, and in what spare
resources it reserves.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence

from .lfa import Flow, GameState, LfaError, Update, apply_update, peak_oversubscription, validate_lossless
from .netsim import (
    MBPS, NS_PER_MS, NS_PER_S, ClockRegistry, Command, LossReport, Plan, SimParams, SwapScenario, World,
    run, swap_scenario,
)

KINDS = ("Time4", "Untimed", "Ordered", "TwoPhase", "Swan", "B4", "Time4Swan", "Time4B4")
PARAMETRIC = frozenset({"Swan", "B4", "Time4Swan", "Time4B4"})
TIMED = frozenset({"Time4", "Time4Swan", "Time4B4"})
DEFAULT_ADVANCE_NS = 100 * NS_PER_MS


@dataclass(frozen=True)
class StrategyConfig:
    """Which strategy to run; ``param`` is the scratch or reduction fraction."""

    kind: str
    param: Fraction = Fraction(0)
    schedule_advance_ns: int = DEFAULT_ADVANCE_NS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {', '.join(KINDS)}")
        param = Fraction(str(self.param)) if isinstance(self.param, float) else Fraction(self.param)
        if not 0 <= param < 1:
            raise ValueError(f"{self.kind}: parameter must lie in [0, 1), got {param}")
        if param and self.kind not in PARAMETRIC:
            raise ValueError(f"{self.kind} takes no parameter")
        if self.schedule_advance_ns < 0:
            raise ValueError("schedule advance must be non-negative")
        object.__setattr__(self, "param", param)

    @property
    def label(self) -> str:
        return f"{self.kind}({format_fraction(self.param)})" if self.kind in PARAMETRIC else self.kind


def format_fraction(value: Fraction) -> str:
    """Short decimal text for a fraction; exact when the expansion terminates."""
    return format(float(Fraction(value)), ".12g")


@dataclass(frozen=True)
class SwapIntent:
    """A flow swap to carry out: the current world and the per-switch target updates.

    ``moves`` lists ``(flow id, old edge tail, new edge tail)`` triples.
    """

    world: World
    target: Mapping  # switch -> Update
    moves: tuple = ()
    impact: Fraction = Fraction(0)
    name: str = "swap"

    def __post_init__(self):
        object.__setattr__(self, "target", dict(self.target))
        state = self.world.state
        if not validate_lossless(state):
            raise LfaError("the current state oversubscribes a link")
        if not validate_lossless(self.after_state()):
            raise LfaError("the target state oversubscribes a link")
        if not self.moves:
            moves = []
            for up in self.target.values():
                for (fid, node), nxt in sorted(up.assignments.items()):
                    moves.append((fid, state.next_hop(fid, node), nxt))
            object.__setattr__(self, "moves", tuple(moves))
        if not self.impact:
            object.__setattr__(self, "impact", two_sided_impact(state, self.target))

    @property
    def switches(self) -> tuple:
        return tuple(self.target)

    @property
    def flows(self) -> tuple:
        return tuple(sorted({fid for up in self.target.values() for fid, _ in up.assignments}))

    def after_state(self) -> GameState:
        state = self.world.state
        for up in self.target.values():
            state = apply_update(state, up)
        return state


def two_sided_impact(state: GameState, target: Mapping) -> Fraction:
    """Impact of a swap whose moves leave one edge for another in both directions.

    The moves are split by the edge each flow leaves; applying either side
    alone gives a peak oversubscription and the impact is the smaller one,
    as a fraction of edge capacity.
    """
    sides: dict = {}
    for up in target.values():
        for (fid, node), nxt in up.assignments.items():
            leaving = state.dest_edge_of(fid)
            sides.setdefault(leaving, []).append(((fid, node), nxt))
    if len(sides) != 2:
        return Fraction(0)
    peaks = []
    for entries in sides.values():
        peaks.append(peak_oversubscription(apply_update(state, Update(dict(entries)))))
    return min(peaks) / state.graph.capacity


def intent_from_scenario(scenario: SwapScenario) -> SwapIntent:
    return SwapIntent(scenario.world, scenario.target, name=f"swap-n{scenario.n}")


def scaled_world(world: World, factor: Fraction) -> World:
    """The same world with every flow's bandwidth multiplied by ``factor``."""
    factor = Fraction(factor)
    flows = {fid: Flow(f.id, f.bandwidth * factor, f.first_hop) for fid, f in world.state.flows.items()}
    state = GameState(world.graph, flows, world.state.routing)
    return replace(world, state=state)


def swan_order(state: GameState, target: Mapping) -> tuple:
    """Greedy update order: always apply the switch whose update keeps peak
    oversubscription lowest, ties broken by the given switch order.

    When a lossless step exists it is always taken first.
    """
    remaining = list(target)
    order = []
    while remaining:
        best, best_peak, best_state = None, None, None
        for sw in remaining:
            nxt = apply_update(state, target[sw])
            peak = peak_oversubscription(nxt)
            if best_peak is None or peak < best_peak:
                best, best_peak, best_state = sw, peak, nxt
        order.append(best)
        remaining.remove(best)
        state = best_state
    return tuple(order)


_SWAN_ORDERS: dict = {}


def _cached_swan_order(key, state: GameState, target: Mapping) -> tuple:
    # the order depends only on rates and routing, never on the seed
    if key not in _SWAN_ORDERS:
        _SWAN_ORDERS[key] = swan_order(state, target)
    return _SWAN_ORDERS[key]


@dataclass(frozen=True)
class Compiled:
    world: World
    plan: Plan
    cfg: StrategyConfig


def _timed_commands(switches: Sequence, target: Mapping, params: SimParams, advance_ns: int) -> tuple:
    t_s = max(len(switches) - 1, 0) * params.delta_ns + advance_ns
    return tuple(Command(sw, target[sw], k * params.delta_ns, t_s) for k, sw in enumerate(switches))


def _untimed_commands(order: Sequence, target: Mapping, params: SimParams, wave: int = 0) -> tuple:
    return tuple(Command(sw, target[sw], k * params.delta_ns, wave=wave) for k, sw in enumerate(order))


def compile_plan(intent: SwapIntent, cfg: StrategyConfig, params: SimParams) -> Compiled:
    """Build the world and plan that carry out ``intent`` under ``cfg``."""
    kind, target, switches = cfg.kind, intent.target, intent.switches
    world = intent.world
    label = cfg.label
    if kind in ("Swan", "Time4Swan"):
        world = scaled_world(world, 1 - cfg.param)
    if kind in ("Time4", "Time4Swan"):
        plan = Plan(_timed_commands(switches, target, params, cfg.schedule_advance_ns), label)
    elif kind == "Time4B4":
        commands = _timed_commands(switches, target, params, cfg.schedule_advance_ns)
        plan = Plan(commands, label, reduced_flows=intent.flows, rate_factor=1 - cfg.param,
                    reduce_from_ns=commands[0].at_ns if commands else 0)
    elif kind in ("Untimed", "Ordered"):
        plan = Plan(_untimed_commands(switches, target, params), label, all_or_none=False)
    elif kind == "TwoPhase":
        # wave 0 installs the new tagged rules, wave 1 flips the ingress tags
        prepare = tuple(Command(sw, None, k * params.delta_ns, wave=0, stream=1) for k, sw in enumerate(switches))
        plan = Plan(prepare + _untimed_commands(switches, target, params, wave=1), label, all_or_none=False)
    elif kind == "Swan":
        order = _cached_swan_order((intent.name, cfg.param), world.state, target)
        plan = Plan(_untimed_commands(order, target, params), label, all_or_none=False)
    elif kind == "B4":
        plan = Plan(_untimed_commands(switches, target, params), label, all_or_none=False,
                    reduced_flows=intent.flows, rate_factor=1 - cfg.param)
    else:  # pragma: no cover - guarded by StrategyConfig
        raise ValueError(kind)
    return Compiled(world, plan, cfg)


@dataclass(frozen=True)
class StrategyResult:
    cfg: StrategyConfig
    seed: int
    n: int
    report: LossReport
    withheld_mbit: float  # bandwidth held back from the sources, in Mbit (Mbit/s times seconds)

    @property
    def lost_packets(self) -> float:
        return self.report.lost_packets

    @property
    def update_duration_ms(self) -> float:
        return self.report.update_duration_ns / NS_PER_MS


def withheld_bandwidth(intent: SwapIntent, compiled: Compiled, report: LossReport) -> float:
    """Mbit of demand the strategy withheld from the sources.

    Rate reduction withholds ``r`` times the involved flows' bandwidth over
    the reduction window; scratch capacity withholds ``s`` times all demand
    for as long as the update runs.
    """
    cfg = compiled.cfg
    flows = intent.world.state.flows
    if cfg.kind in ("B4", "Time4B4"):
        rate = sum(flows[fid].bandwidth for fid in intent.flows)
        return float(cfg.param * rate) * report.reduction_window_ns / NS_PER_S / MBPS
    if cfg.kind in ("Swan", "Time4Swan"):
        rate = sum(f.bandwidth for f in flows.values())
        return float(cfg.param * rate) * report.update_duration_ns / NS_PER_S / MBPS
    return 0.0


def execute(intent: SwapIntent, cfg: StrategyConfig, params: SimParams,
            inject: Optional[Mapping] = None) -> StrategyResult:
    compiled = compile_plan(intent, cfg, params)
    report = run(compiled.world, compiled.plan, params, inject)
    n = len(intent.switches)
    return StrategyResult(cfg, params.seed, n, report, withheld_bandwidth(intent, compiled, report))


# -- sweeps ----------------------------------------------------------------------

SWEEP_COLUMNS = ("strategy", "param", "n", "seed", "lost_packets", "update_duration",
                 "withheld_bandwidth_seconds")


@dataclass(frozen=True)
class SweepRow:
    strategy: str
    param: Fraction
    n: int
    seed: int
    lost_packets: float
    update_duration_ms: float
    withheld_mbit: float

    def as_csv(self) -> list:
        return [self.strategy, format_fraction(self.param), self.n, self.seed, fmt_float(self.lost_packets),
                fmt_float(self.update_duration_ms), fmt_float(self.withheld_mbit)]


def fmt_float(value: float) -> str:
    """Stable dot-decimal text for CSV output."""
    if value == 0:
        return "0"
    return format(value, ".10g")


@dataclass(frozen=True)
class SweepTask:
    n: int
    cfg: StrategyConfig
    params: SimParams
    clocks: Optional[ClockRegistry] = None


@lru_cache(maxsize=64)
def _scenario_intent(n: int) -> SwapIntent:
    return intent_from_scenario(swap_scenario(n))


def intent_for(n: int, clocks: Optional[ClockRegistry] = None) -> SwapIntent:
    intent = _scenario_intent(n)
    if clocks is not None:
        intent = replace(intent, world=replace(intent.world, clocks=clocks))
    return intent


def run_task(task: SweepTask) -> SweepRow:
    result = execute(intent_for(task.n, task.clocks), task.cfg, task.params)
    return SweepRow(task.cfg.kind, task.cfg.param, task.n, task.params.seed, result.lost_packets,
                    result.update_duration_ms, result.withheld_mbit)


def map_tasks(func, tasks: Sequence, jobs: int = 1) -> list:
    """Apply ``func`` to ``tasks`` in order, optionally on a process pool.

    Results come back in task order, so output is identical for any ``jobs``.
    """
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) < 2:
        return [func(t) for t in tasks]
    import multiprocessing

    chunk = max(1, len(tasks) // (jobs * 8))
    with multiprocessing.get_context("spawn").Pool(jobs) as pool:
        return pool.map(func, tasks, chunksize=chunk)


def sweep(configs: Iterable[StrategyConfig], ns: Iterable[int], seeds: Iterable[int],
          params: SimParams = SimParams(), jobs: int = 1,
          clocks: Optional[ClockRegistry] = None) -> list:
    """Run every (config, n, seed) combination of the flow-swap scenario."""
    configs, ns, seeds = list(configs), list(ns), list(seeds)
    if not configs or not ns:
        raise ValueError("sweep grid is empty")
    tasks = [SweepTask(n, cfg, params.replace(seed=seed), clocks) for cfg in configs for n in ns for seed in seeds]
    return map_tasks(run_task, tasks, jobs)


@dataclass(frozen=True)
class PointSummary:
    strategy: str
    param: Fraction
    n: int
    runs: int
    mean_loss: float
    stdev_loss: float
    mean_duration_ms: float


def summarize(rows: Iterable[SweepRow]) -> list:
    """Mean and standard deviation of loss per grid point, in first-seen order."""
    groups: dict = {}
    for row in rows:
        groups.setdefault((row.strategy, row.param, row.n), []).append(row)
    out = []
    for (strategy, param, n), group in groups.items():
        losses = [r.lost_packets for r in group]
        out.append(PointSummary(strategy, param, n, len(group), statistics.fmean(losses),
                                statistics.pstdev(losses) if len(losses) > 1 else 0.0,
                                statistics.fmean(r.update_duration_ms for r in group)))
    return out


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()


def smallest_param_reaching(summaries: Iterable[PointSummary], strategy: str, threshold: float) -> float:
    """Smallest grid parameter whose mean loss is at most ``threshold`` (inf if none)."""
    hits = [s.param for s in summaries if s.strategy == strategy and s.mean_loss <= threshold]
    return float(min(hits)) if hits else math.inf
