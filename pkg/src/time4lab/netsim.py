"""Deterministic discrete-event simulator of timed and untimed network updates.

Time is kept in integer nanoseconds of the controller's clock.  Flow rates are
exact rationals in bits per second, scaled to integers so that link loads are
exact; only the final loss integral is a float.

Switch ``o_i`` has clock ``controller + offset_i``.  A timed command for
controller instant ``T_s`` is scheduled on switch ``i`` at
``T_s + estimated offset_i`` and fires up to ``sched_error`` later.  Untimed
commands take effect after a uniform installation latency.
"""

from __future__ import annotations

import heapq
import json
import math
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from . import kernels
from .lfa import (
    SOURCE, Flow, ForwardingFunction, GameState, LfaError, LfaGraph, Update, apply_update,
    edge_tail, first_hop,
)
from .ofwire.codec import (
    OFPBCT_COMMIT_REQUEST, OFPBCT_DISCARD_REQUEST, OFPBCT_OPEN_REQUEST, OFPBF_ATOMIC, OFPBF_TIME,
    OFPT_ERROR, BundleAddMsg, BundleControlMsg, ErrorMsg, OfpTime, TimeBundleProperty,
)
from .ofwire.session import BundleSession, ToleranceConfig

NS_PER_MS = 1_000_000
NS_PER_S = 1_000_000_000
MBPS = 1_000_000

# Controller clock epoch for simulated runs; keeps switch clocks positive.
EPOCH_NS = 1_000 * NS_PER_S

# (delta, install range, scheduling error) in milliseconds
PERFORMANCE_TYPES = {
    "I": ("9.64", "1.3", "1.23"),
    "II": ("9.6", "1.47", "1.18"),
    "III": ("14.27", "2.72", "1.19"),
}


def ms(value) -> int:
    """Milliseconds (number or decimal string) to integer nanoseconds."""
    return int(round(Fraction(str(value)) * NS_PER_MS))


@dataclass(frozen=True)
class SimParams:
    delta_ns: int = ms(PERFORMANCE_TYPES["I"][0])
    install_range_ns: int = ms(PERFORMANCE_TYPES["I"][1])
    sched_error_ns: int = ms(PERFORMANCE_TYPES["I"][2])
    seed: int = 0
    packet_size_bits: int = 10_000

    def __post_init__(self):
        if min(self.delta_ns, self.install_range_ns, self.sched_error_ns) < 0:
            raise ValueError("durations must be non-negative")
        if self.packet_size_bits <= 0:
            raise ValueError("packet_size_bits must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @classmethod
    def for_type(cls, kind: str = "I", **overrides) -> "SimParams":
        delta, install, err = PERFORMANCE_TYPES[kind]
        base = dict(delta_ns=ms(delta), install_range_ns=ms(install), sched_error_ns=ms(err))
        base.update(overrides)
        return cls(**base)

    def replace(self, **changes) -> "SimParams":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return SimParams(**values)


@dataclass(frozen=True)
class ClockRegistry:
    """True clock offsets and the controller's estimation error per switch."""

    offsets: Mapping = field(default_factory=dict)
    estimate_error: Mapping = field(default_factory=dict)

    def offset(self, switch: str) -> int:
        return self.offsets.get(switch, 0)

    def estimated_offset(self, switch: str) -> int:
        return self.offset(switch) + self.estimate_error.get(switch, 0)

    def switch_time(self, switch: str, t_ns: int) -> int:
        return t_ns + self.offset(switch)

    def controller_time(self, switch: str, t_switch_ns: int) -> int:
        return t_switch_ns - self.offset(switch)

    def scheduled_for(self, switch: str, t_s_ns: int) -> int:
        """``T_s^i``: the instant to request on the switch's own clock."""
        return t_s_ns + self.estimated_offset(switch)


@dataclass(frozen=True)
class Command:
    """One controller command to one switch.

    ``send_ns`` is relative to the start of the command's wave.  ``at_ns`` (a
    controller-clock instant, also wave-relative) makes the command a
    scheduled bundle.  ``update=None`` models control-plane work with no
    forwarding effect.
    """

    switch: str
    update: Optional[Update]
    send_ns: int
    at_ns: Optional[int] = None
    wave: int = 0
    stream: int = 0  # per-switch random stream that draws this command's timing


@dataclass(frozen=True)
class Plan:
    commands: tuple
    label: str = ""
    all_or_none: bool = True
    reduced_flows: tuple = ()  # flows throttled while the update is in flight
    rate_factor: Fraction = Fraction(1)
    reduce_from_ns: Optional[int] = None  # None: the first send

    def __post_init__(self):
        object.__setattr__(self, "commands", tuple(self.commands))
        object.__setattr__(self, "rate_factor", Fraction(self.rate_factor))
        waves = sorted({c.wave for c in self.commands})
        if waves and waves != list(range(len(waves))):
            raise ValueError("waves must be numbered 0, 1, 2, ...")


@dataclass(frozen=True)
class World:
    graph: LfaGraph
    state: GameState
    clocks: ClockRegistry = field(default_factory=ClockRegistry)
    link_delay_ns: Mapping = field(default_factory=dict)  # edge -> delay before load shifts
    tolerance: ToleranceConfig = field(default_factory=ToleranceConfig)


@dataclass(frozen=True)
class LoadTimeline:
    """Piecewise-constant loads; row ``k`` holds on ``[times[k], times[k+1])``."""

    times: tuple
    edges: tuple
    loads: tuple  # rows of integer loads in units of 1/scale bit/s
    scale: int = 1

    def load_at(self, edge, t_ns: int) -> Fraction:
        idx = self.edges.index(tuple(edge))
        row = None
        for k in range(len(self.times) - 1):
            if self.times[k] <= t_ns < self.times[k + 1]:
                row = k
        if row is None:
            row = len(self.loads) - 1 if t_ns >= self.times[-1] else 0
        return Fraction(self.loads[row][idx], self.scale)


def fluid_loss(timeline: LoadTimeline, capacity, packet_size: int) -> float:
    """Packets lost when every edge drops whatever exceeds ``capacity``."""
    if len(timeline.times) < 2 or not timeline.edges:
        return 0.0
    cap = Fraction(capacity) * timeline.scale
    factor = cap.denominator
    loads = np.asarray(timeline.loads, dtype=np.int64).reshape(len(timeline.loads), len(timeline.edges))
    if factor != 1:
        loads = loads * factor
    caps = np.full(len(timeline.edges), cap.numerator, dtype=np.int64)
    bit_ns = kernels.excess_integral(np.asarray(timeline.times, dtype=np.int64), loads, caps)
    return bit_ns / (timeline.scale * factor) / NS_PER_S / packet_size


@dataclass
class LossReport:
    lost_packets: float
    per_flow_loss: dict
    update_duration_ns: int
    offered_packets: float
    delivered_packets: float
    effect_times: dict  # switch -> list of controller-clock instants
    rejected: tuple  # (switch, error name)
    final_state: GameState
    timeline: LoadTimeline
    reduction_window_ns: int = 0

    @property
    def update_duration_ms(self) -> float:
        return self.update_duration_ns / NS_PER_MS


def switch_rng(seed: int, switch: str, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(switch.encode()), stream]))


def update_payload(update: Optional[Update]) -> bytes:
    if update is None:
        return b"[]"
    rows = sorted([fid, node, nxt] for (fid, node), nxt in update.assignments.items())
    return json.dumps(rows, separators=(",", ":")).encode()


def payload_update(payload: bytes) -> Update:
    return Update({(int(fid), node): nxt for fid, node, nxt in json.loads(payload)})


def bundle_messages(bundle_id: int, update: Optional[Update], switch_time_ns: int, xid: int = 0) -> list:
    """Encoded OPEN, ADD and timed COMMIT for one scheduled bundle."""
    at = OfpTime.from_ns(switch_time_ns)
    return [
        BundleControlMsg(bundle_id, OFPBCT_OPEN_REQUEST, OFPBF_ATOMIC, xid=xid).encode(),
        BundleAddMsg(bundle_id, update_payload(update), OFPBF_ATOMIC, xid=xid).encode(),
        BundleControlMsg(bundle_id, OFPBCT_COMMIT_REQUEST, OFPBF_ATOMIC | OFPBF_TIME,
                         TimeBundleProperty(at), xid=xid).encode(),
    ]


def schedule_timed_update(clocks: ClockRegistry, updates: Mapping, t_s_ns: int,
                          send_ns: Optional[int] = None, spacing_ns: int = 0,
                          all_or_none: bool = True, label: str = "timed") -> Plan:
    """Scheduled bundles for every switch in ``updates`` (switch -> Update), all for ``T_s``.

    Sends start at ``send_ns`` (default: immediately) spaced ``spacing_ns`` apart.
    """
    start = 0 if send_ns is None else send_ns
    cmds = [Command(sw, up, start + k * spacing_ns, t_s_ns) for k, (sw, up) in enumerate(updates.items())]
    return Plan(tuple(cmds), label, all_or_none)


def scheduled_bundles(plan: Plan, clocks: ClockRegistry) -> dict:
    """Switch -> requested execution time on that switch's clock, as OfpTime."""
    return {c.switch: OfpTime.from_ns(EPOCH_NS + clocks.scheduled_for(c.switch, c.at_ns))
            for c in plan.commands if c.at_ns is not None}


def _lcm(values) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


class _Simulation:
    def __init__(self, world: World, plan: Plan, params: SimParams, inject: Optional[Mapping]):
        self.world = world
        self.plan = plan
        self.params = params
        self.inject = dict(inject or {})
        self.state = world.state
        graph = world.graph
        self.edges = tuple(e for e in graph.edges if e[0] != SOURCE)
        self.edge_index = {e: i for i, e in enumerate(self.edges)}
        factor = plan.rate_factor
        rates = [f.bandwidth for f in self.state.flows.values()]
        self.scale = _lcm([graph.capacity.denominator] + [r.denominator for r in rates]
                          + [(r * factor).denominator for r in rates])
        self.cap = int(graph.capacity * self.scale)
        self.rates = {fid: int(f.bandwidth * self.scale) for fid, f in self.state.flows.items()}
        self.flow_edges = {fid: set(self._edges_of(fid)) for fid in self.state.flows}
        self.loads = [0] * len(self.edges)
        for fid, edges in self.flow_edges.items():
            for e in edges:
                self.loads[e] += self.rates[fid]
        self.delays = {self.edge_index[tuple(e)]: int(d) for e, d in world.link_delay_ns.items()}
        self.times = []
        self.rows = []
        self.heap = []
        self.seq = 0
        self.sessions = {}
        self.rngs = {}
        self.effects = {}
        self.control_effects = []
        self.rejected = []
        self.aborted = False
        self.pending_bundles = {}  # switch -> bundle ids scheduled by this plan
        self.waves = {}
        for c in plan.commands:
            self.waves.setdefault(c.wave, []).append(c)
        self.outstanding = {w: len(cs) for w, cs in self.waves.items()}
        self.wave_start = {}
        self.per_flow_lost = {fid: 0.0 for fid in self.state.flows}
        self.offered_bits = 0.0
        self.reduction_start = None
        self.reduction_end = None
        self.last_t = None

    def _edges_of(self, fid: int) -> tuple:
        return tuple(self.edge_index[e] for e in self.state.path_edges(fid) if e[0] != SOURCE)

    def _arrivals(self, edges: tuple, switch: str) -> dict:
        """Edge -> propagation delay from ``switch`` until traffic reaches it."""
        out, elapsed, started = {}, 0, False
        for e in edges:
            if self.edges[e][0] == switch:
                started = True
            if started:
                out[e] = elapsed
                elapsed += self.delays.get(e, 0)
        return out

    def _rng(self, switch: str, stream: int) -> np.random.Generator:
        key = (switch, stream)
        if key not in self.rngs:
            self.rngs[key] = switch_rng(self.params.seed, switch, stream)
        return self.rngs[key]

    def _session(self, switch: str) -> BundleSession:
        if switch not in self.sessions:
            self.sessions[switch] = BundleSession(self.world.tolerance)
        return self.sessions[switch]

    def push(self, t: int, kind: str, data):
        heapq.heappush(self.heap, (t, self.seq, kind, data))
        self.seq += 1

    # -- accounting ----------------------------------------------------------

    def advance(self, t: int):
        if self.last_t is not None and t > self.last_t:
            dt = (t - self.last_t) / NS_PER_S
            self.offered_bits += sum(self.rates.values()) / self.scale * dt
            for e, load in enumerate(self.loads):
                over = load - self.cap
                if over > 0:
                    for fid, edges in self.flow_edges.items():
                        if e in edges and self.rates[fid]:
                            self.per_flow_lost[fid] += over * self.rates[fid] / load / self.scale * dt
        self.last_t = t

    def record(self, t: int):
        if self.times and self.times[-1] == t:
            self.rows[-1] = tuple(self.loads)
        else:
            self.times.append(t)
            self.rows.append(tuple(self.loads))

    def set_rate(self, fid: int, rate: int):
        for e in self.flow_edges[fid]:
            self.loads[e] += rate - self.rates[fid]
        self.rates[fid] = rate

    def edge_on(self, fid: int, e: int, on: bool):
        if on and e not in self.flow_edges[fid]:
            self.flow_edges[fid].add(e)
            self.loads[e] += self.rates[fid]
        elif not on and e in self.flow_edges[fid]:
            self.flow_edges[fid].discard(e)
            self.loads[e] -= self.rates[fid]

    def reroute(self, t: int, switch: str, fids, old_paths: dict):
        for fid in fids:
            old, new = old_paths[fid], self._edges_of(fid)
            gone = self._arrivals(old, switch)
            came = self._arrivals(new, switch)
            for e, d in gone.items():
                if e not in came:
                    self._shift(t + d, fid, e, False)
            for e, d in came.items():
                if e not in gone:
                    self._shift(t + d, fid, e, True)

    def _shift(self, t: int, fid: int, e: int, on: bool):
        if self.delays and t > self.last_t:
            self.push(t, "edge", (fid, e, on))
        else:
            self.edge_on(fid, e, on)

    # -- events ----------------------------------------------------------------

    def start(self, t0: int):
        self.advance(t0)
        self.record(t0)
        if self.plan.reduced_flows:
            at = t0 + (self.plan.reduce_from_ns if self.plan.reduce_from_ns is not None else
                       min((c.send_ns for c in self.waves.get(0, [])), default=0))
            self.push(at, "throttle", None)
        self.open_wave(0, t0)

    def open_wave(self, wave: int, t: int):
        if wave not in self.waves:
            return
        self.wave_start[wave] = t
        for idx, cmd in enumerate(self.waves[wave]):
            self.push(t + cmd.send_ns, "send", (wave, idx))

    def handle_send(self, t: int, wave: int, idx: int):
        if self.aborted:
            self.finish_command(t, wave)
            return
        cmd = self.waves[wave][idx]
        if cmd.at_ns is None:
            latency = int(self._rng(cmd.switch, cmd.stream).integers(0, self.params.install_range_ns, endpoint=True))
            self.push(t + latency + self.inject.get(cmd.switch, 0), "effect", (wave, idx))
            return
        clocks = self.world.clocks
        bundle_id = 1 + 1000 * wave + idx
        t_s = self.wave_start[wave] + cmd.at_ns
        at_switch = clocks.scheduled_for(cmd.switch, t_s)
        session = self._session(cmd.switch)
        now_switch = clocks.switch_time(cmd.switch, t)
        reply = None
        for buf in bundle_messages(bundle_id, cmd.update, at_switch):
            reply = session.handle(buf, now_switch)
            if reply is not None and reply[1] == OFPT_ERROR:
                break
        if reply is not None and reply[1] == OFPT_ERROR:
            err = ErrorMsg.parse(reply)
            self.rejected.append((cmd.switch, err.error.name))
            if self.plan.all_or_none:
                self.abort(t)
            self.finish_command(t, wave)
            return
        self.pending_bundles.setdefault(cmd.switch, []).append(bundle_id)
        if session.executed and session.executed[-1].bundle_id == bundle_id:
            # inside the past tolerance: applied as soon as possible
            latency = int(self._rng(cmd.switch, cmd.stream).integers(0, self.params.install_range_ns, endpoint=True))
            self.push(t + latency + self.inject.get(cmd.switch, 0), "effect", (wave, idx))
            return
        error = int(self._rng(cmd.switch, cmd.stream).integers(0, self.params.sched_error_ns, endpoint=True))
        fire = clocks.controller_time(cmd.switch, at_switch) + error + self.inject.get(cmd.switch, 0)
        self.push(max(fire, t), "due", (wave, idx, bundle_id, at_switch))

    def abort(self, t: int):
        self.aborted = True
        for switch, ids in self.pending_bundles.items():
            session = self._session(switch)
            for bundle_id in ids:
                if bundle_id in session.scheduled:
                    session.handle(BundleControlMsg(bundle_id, OFPBCT_DISCARD_REQUEST).encode(),
                                   self.world.clocks.switch_time(switch, t))

    def handle_due(self, t: int, wave: int, idx: int, bundle_id: int, at_switch: int):
        cmd = self.waves[wave][idx]
        session = self._session(cmd.switch)
        ran = [x for x in session.due(at_switch) if x.bundle_id == bundle_id]
        if not ran:
            self.finish_command(t, wave)  # discarded before its time
            return
        self.apply(t, cmd)
        self.finish_command(t, wave)

    def handle_effect(self, t: int, wave: int, idx: int):
        self.apply(t, self.waves[wave][idx])
        self.finish_command(t, wave)

    def apply(self, t: int, cmd: Command):
        self.effects.setdefault(cmd.switch, []).append(t)
        if cmd.update is None:
            return
        touched = sorted({fid for fid, _ in cmd.update.assignments if fid in self.state.flows})
        old_paths = {fid: self._edges_of(fid) for fid in touched}
        self.state = apply_update(self.state, cmd.update)
        self.reroute(t, cmd.switch, touched, old_paths)

    def finish_command(self, t: int, wave: int):
        self.outstanding[wave] -= 1
        if self.outstanding[wave] == 0:
            if wave + 1 in self.waves:
                self.open_wave(wave + 1, t)
            elif self.plan.reduced_flows and self.reduction_end is None:
                self.push(t, "restore", None)

    def run(self) -> LossReport:
        t0 = EPOCH_NS
        self.start(t0)
        while self.heap:
            t, _, kind, data = heapq.heappop(self.heap)
            self.advance(t)
            if kind == "send":
                self.handle_send(t, *data)
            elif kind == "effect":
                self.handle_effect(t, *data)
            elif kind == "due":
                self.handle_due(t, *data)
            elif kind == "edge":
                self.edge_on(*data)
            elif kind == "throttle":
                self.reduction_start = t
                for fid in self.plan.reduced_flows:
                    self.set_rate(fid, int(self.rates[fid] * self.plan.rate_factor))
            elif kind == "restore":
                self.reduction_end = t
                for fid in self.plan.reduced_flows:
                    self.set_rate(fid, int(self.state.flows[fid].bandwidth * self.scale))
            self.record(t)
        end = self.times[-1]
        timeline = LoadTimeline(tuple(self.times) + (end,), self.edges, tuple(self.rows), self.scale)
        lost = fluid_loss(timeline, self.world.graph.capacity, self.params.packet_size_bits)
        per_flow = {fid: bits / self.params.packet_size_bits for fid, bits in self.per_flow_lost.items()}
        offered = self.offered_bits / self.params.packet_size_bits
        all_effects = sorted(x for ts in self.effects.values() for x in ts)
        duration = all_effects[-1] - all_effects[0] if all_effects else 0
        window = 0
        if self.reduction_start is not None:
            window = (self.reduction_end if self.reduction_end is not None else end) - self.reduction_start
        return LossReport(
            lost_packets=lost,
            per_flow_loss=per_flow,
            update_duration_ns=duration,
            offered_packets=offered,
            delivered_packets=offered - lost,
            effect_times={k: [x - t0 for x in v] for k, v in self.effects.items()},
            rejected=tuple(self.rejected),
            final_state=self.state,
            timeline=timeline,
            reduction_window_ns=window,
        )


def run(world: World, plan: Plan, params: SimParams, inject: Optional[Mapping] = None) -> LossReport:
    """Simulate ``plan`` on ``world``.

    ``inject`` maps switch ids to a fixed extra delay (ns, may be negative)
    added to every effect on that switch.
    """
    for cmd in plan.commands:
        if cmd.switch not in world.graph.adjacency:
            raise LfaError(f"plan names unknown switch {cmd.switch}")
        if cmd.update is not None:
            for fid, node in cmd.update.assignments:
                if fid not in world.state.flows:
                    raise LfaError(f"plan names unknown flow {fid}")
                if node != cmd.switch:
                    raise LfaError(f"entry for {node} sent to switch {cmd.switch}")
    return _Simulation(world, plan, params, inject).run()


# -- scenarios ---------------------------------------------------------------

LINK_CAPACITY = Fraction(10 * MBPS)
STATIC_RATE = Fraction(5 * MBPS)


@dataclass(frozen=True)
class SwapScenario:
    """The impact-0.5 flow swap across ``n`` bottom switches.

    Two static 5 Mbps flows keep each destination edge half full.  A 5 Mbps
    flow at ``o1`` trades destination edges with ``n-1`` flows of 5/(n-1) Mbps
    at ``o2 .. on``.
    """

    n: int
    world: World
    target: dict  # switch -> Update
    swap_flows: tuple

    @property
    def switches(self) -> tuple:
        return tuple(self.target)


def swap_scenario(n: int, scale: Fraction = Fraction(1), clocks: Optional[ClockRegistry] = None) -> SwapScenario:
    """Build the scenario with every rate multiplied by ``scale``."""
    if n < 2:
        raise ValueError("the swap needs at least two switches")
    graph = LfaGraph.canonical(n + 2, 2, LINK_CAPACITY)
    scale = Fraction(scale)
    flows = [Flow(1, STATIC_RATE * scale, first_hop(n + 1)), Flow(2, STATIC_RATE * scale, first_hop(n + 2)),
             Flow(10, STATIC_RATE * scale, first_hop(1))]
    flows += [Flow(10 + i, STATIC_RATE * scale / (n - 1), first_hop(i)) for i in range(2, n + 1)]
    entries = {(1, first_hop(n + 1)): edge_tail(1), (2, first_hop(n + 2)): edge_tail(2),
               (10, first_hop(1)): edge_tail(1)}
    entries.update({(10 + i, first_hop(i)): edge_tail(2) for i in range(2, n + 1)})
    state = GameState(graph, {f.id: f for f in flows}, ForwardingFunction(entries))
    target = {first_hop(1): Update({(10, first_hop(1)): edge_tail(2)})}
    target.update({first_hop(i): Update({(10 + i, first_hop(i)): edge_tail(1)}) for i in range(2, n + 1)})
    world = World(graph, state, clocks or ClockRegistry())
    return SwapScenario(n, world, target, tuple(f.id for f in flows[2:]))


def target_state(scenario: SwapScenario) -> GameState:
    state = scenario.world.state
    for up in scenario.target.values():
        state = apply_update(state, up)
    return state


def untimed_plan(scenario: SwapScenario, params: SimParams, order=None, label: str = "untimed") -> Plan:
    order = list(order or scenario.switches)
    return Plan(tuple(Command(sw, scenario.target[sw], k * params.delta_ns) for k, sw in enumerate(order)), label)


@dataclass(frozen=True)
class VideoSample:
    error_ns: int  # positive when the swap fired late
    misrouted_packets: float

    @property
    def error_ms(self) -> float:
        return self.error_ns / NS_PER_MS


def video_swap_scenario(params: SimParams, advance_ns: int = 100 * NS_PER_MS, inject_ns: int = 0,
                        clocks: Optional[ClockRegistry] = None) -> VideoSample:
    """Swap two 10 Mbps video flows between their targets with one scheduled bundle.

    Misrouting is fluid: each flow sends ``rate * |t_exec - T|`` bits to the
    wrong side, so the error is the misrouted packet count over the packet rate.
    """
    graph = LfaGraph.canonical(1, 2, LINK_CAPACITY)
    rate = LINK_CAPACITY
    flows = {1: Flow(1, rate, first_hop(1)), 2: Flow(2, rate, first_hop(1))}
    state = GameState(graph, flows, ForwardingFunction({(1, "o1"): "t1", (2, "o1"): "t2"}))
    swap = Update({(1, "o1"): "t2", (2, "o1"): "t1"})
    world = World(graph, state, clocks or ClockRegistry())
    plan = Plan((Command("o1", swap, 0, advance_ns),), "video")
    report = run(world, plan, params, {"o1": inject_ns} if inject_ns else None)
    if report.rejected:
        raise LfaError(f"video swap rejected: {report.rejected}")
    fired = report.effect_times["o1"][0]
    error = fired - advance_ns
    packets_per_s = float(rate) / params.packet_size_bits
    misrouted = 2 * packets_per_s * abs(error) / NS_PER_S
    return VideoSample(error, misrouted)
