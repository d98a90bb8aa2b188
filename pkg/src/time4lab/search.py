"""Exhaustive controller oracle for small LFA instances.

Configurations are tuples giving the destination-edge index of every flow
(``-1`` while the newly added flow is still unrouted).  Bandwidths are scaled to
integers so that every capacity check is exact.  Configurations are
deduplicated up to relabeling of destination edges and interchange of flows
that share the same bandwidth and first hop; both are symmetries of the move
graph, so reachability is unaffected.

Flows of bandwidth exactly ``c`` occupy a destination edge on their own in
every lossless configuration, so they are removed together with their edges
before searching.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

from . import kernels
from .lfa import (
    Flow, GameState, LfaError, LfaGraph, Update, apply_update, classify_update,
    edge_tail, peak_oversubscription,
)

MAX_FLOWS = 12
MAX_EDGES = 4


class GuardExceeded(LfaError):
    """Instance too large for exhaustive search."""


class Infeasible(NamedTuple):
    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True)
class ControllerPlan:
    updates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "updates", tuple(self.updates))

    @property
    def swap_nodes(self) -> int:
        """Largest node count among multi-entry updates, 0 for pure reroutes."""
        return max((len(u.nodes) for u in self.updates if len(u.assignments) > 1), default=0)

    @property
    def swaps(self) -> tuple:
        return tuple(u for u in self.updates if len(u.assignments) > 1)

    def execute(self, state: GameState) -> GameState:
        """Apply the updates in order, checking every prefix is lossless."""
        for u in self.updates:
            state = apply_update(state, u)
            if peak_oversubscription(state) > 0:
                raise LfaError(f"plan step {u} oversubscribes an edge")
        return state

    def describe(self) -> str:
        return "; ".join(f"{classify_update(u)} {u}" for u in self.updates) or "(no updates)"


def _edge_index(state: GameState, fid: int) -> Optional[int]:
    edge = state.dest_edge_of(fid)
    if edge is None:
        return None
    tail = edge[0]
    if not tail.startswith("t"):
        raise LfaError("search supports the canonical topology only")
    return int(tail[1:]) - 1


class Instance:
    """Integer-scaled view of a game state plus an optional unrouted flow."""

    def __init__(self, state: GameState, new_flow: Optional[Flow] = None):
        graph = state.graph
        if graph.to_dict().get("adjacency") is not None:
            raise LfaError("search supports the canonical topology only")
        if peak_oversubscription(state) > 0:
            raise LfaError("search starts from a lossless state only")
        self.state = state
        self.graph = graph
        self.new_flow = new_flow
        if new_flow is not None:
            if new_flow.id in state.flows:
                raise LfaError(f"flow id {new_flow.id} already present")
            if new_flow.first_hop not in graph.first_hops:
                raise LfaError(f"{new_flow.first_hop} is not a first-hop node")
            if new_flow.bandwidth > graph.capacity:
                raise LfaError("new flow exceeds edge capacity")
        cap = graph.capacity
        flows = list(state.flows.values()) + ([new_flow] if new_flow else [])
        scale = 1
        for x in [cap] + [f.bandwidth for f in flows]:
            scale = scale * x.denominator // math.gcd(scale, x.denominator)
        self.scale = scale
        self.capacity = int(cap * scale)

        edge_of = {}
        for fid in state.flows:
            j = _edge_index(state, fid)
            if j is None:
                raise LfaError(f"flow {fid} is not routed")
            edge_of[fid] = j
        saturated = {}
        for fid, f in state.flows.items():
            if f.bandwidth == cap and edge_of[fid] not in saturated:
                saturated[edge_of[fid]] = fid
        self.saturating = {fid: j for j, fid in saturated.items()}
        self.edge_map = [j for j in range(graph.dest_edge_count) if j not in saturated]
        reduced = {j: k for k, j in enumerate(self.edge_map)}

        self.ids = [fid for fid in state.flows if fid not in self.saturating]
        if new_flow is not None:
            self.ids.append(new_flow.id)
        self.num_edges = len(self.edge_map)
        # edges beyond the flow count are interchangeable empties
        if len(self.ids) > MAX_FLOWS or min(self.num_edges, len(self.ids)) > MAX_EDGES:
            raise GuardExceeded(
                f"{len(self.ids)} flows on {self.num_edges} edges exceeds the search guard "
                f"({MAX_FLOWS} flows, {MAX_EDGES} edges)")
        lookup = dict(state.flows)
        if new_flow is not None:
            lookup[new_flow.id] = new_flow
        self.flows = [lookup[fid] for fid in self.ids]
        self.weights = [int(f.bandwidth * scale) for f in self.flows]
        self.hops = [int(f.first_hop[1:]) - 1 for f in self.flows]
        self.labels = list(zip(self.weights, self.hops))
        self.new_index = len(self.ids) - 1 if new_flow is not None else None
        start = [reduced[edge_of[fid]] for fid in self.ids if fid in edge_of]
        if new_flow is not None:
            start.append(-1)
        self.start = tuple(start)
        self._spaces = None
        self._indexes = {}

    # -- configuration helpers -------------------------------------------

    def loads(self, cfg) -> list:
        loads = [0] * self.num_edges
        for w, e in zip(self.weights, cfg):
            if e >= 0:
                loads[e] += w
        return loads

    def key(self, cfg) -> tuple:
        per_edge = [[] for _ in range(self.num_edges)]
        unrouted = []
        for label, e in zip(self.labels, cfg):
            (per_edge[e] if e >= 0 else unrouted).append(label)
        return tuple(sorted(tuple(sorted(x)) for x in per_edge)), tuple(sorted(unrouted))

    def placed(self, cfg) -> bool:
        return self.new_index is None or cfg[self.new_index] >= 0

    def has_room(self, cfg) -> bool:
        if self.new_index is None:
            return False
        w = self.weights[self.new_index]
        return any(load + w <= self.capacity for load in self.loads(cfg))

    def update_between(self, a, b) -> Update:
        assignments = {}
        for fid, f, x, y in zip(self.ids, self.flows, a, b):
            if x != y:
                assignments[(fid, f.first_hop)] = edge_tail(self.edge_map[y] + 1)
        return Update(assignments)

    def state_of(self, cfg) -> GameState:
        """Full game state (saturating flows included) for a configuration."""
        state = self.state
        if self.new_flow is not None and cfg[self.new_index] >= 0:
            state = state.with_flow(self.new_flow)
        assignments = {}
        for fid, f, e in zip(self.ids, self.flows, cfg):
            if e >= 0:
                assignments[(fid, f.first_hop)] = edge_tail(self.edge_map[e] + 1)
        return apply_update(state, Update(assignments)) if assignments else state

    # -- state spaces ------------------------------------------------------

    def spaces(self):
        """All lossless configurations, as (unplaced, placed) lists."""
        if self._spaces is None:
            if self.new_index is None:
                old = kernels.lossless_assignments(self.weights, self.num_edges, self.capacity)
                self._spaces = ([tuple(c) for c in old], [])
            else:
                old = kernels.lossless_assignments(self.weights[:-1], self.num_edges, self.capacity)
                full = kernels.lossless_assignments(self.weights, self.num_edges, self.capacity)
                self._spaces = ([tuple(c) + (-1,) for c in old], [tuple(c) for c in full])
        return self._spaces

    def _swap_index(self, nodes: frozenset) -> dict:
        index = self._indexes.get(nodes)
        if index is None:
            index = {}
            free = [i for i, h in enumerate(self.hops) if h in nodes]
            fixed = [i for i in range(len(self.ids)) if i not in free]
            unplaced, placed = self.spaces()
            for cfg in itertools.chain(unplaced, placed):
                index.setdefault(tuple(cfg[i] for i in fixed), []).append(cfg)
            self._indexes[nodes] = (fixed, index)
            index = self._indexes[nodes]
        return index

    # -- moves -------------------------------------------------------------

    def reroutes(self, cfg):
        loads = self.loads(cfg)
        for i, (w, e) in enumerate(zip(self.weights, cfg)):
            if e < 0 and i != self.new_index:
                continue
            for target in range(self.num_edges):
                if target != e and loads[target] + w <= self.capacity:
                    nb = list(cfg)
                    nb[i] = target
                    yield tuple(nb)

    def swaps(self, cfg, max_nodes: int):
        """Multi-entry updates touching at most ``max_nodes`` first-hop nodes."""
        present = sorted(set(self.hops))
        size = min(max_nodes, len(present))
        seen = set()
        for group in itertools.combinations(present, size):
            fixed, index = self._swap_index(frozenset(group))
            for nb in index.get(tuple(cfg[i] for i in fixed), ()):
                if nb in seen or nb == cfg:
                    continue
                seen.add(nb)
                if self.new_index is not None and cfg[self.new_index] >= 0 and nb[self.new_index] < 0:
                    continue
                changed = sum(1 for x, y in zip(cfg, nb) if x != y)
                if changed >= 2:
                    yield nb, changed

    def swap_node_count(self, a, b) -> int:
        return len({h for h, x, y in zip(self.hops, a, b) if x != y})


def _dijkstra(inst: Instance, goal: Callable, swap_nodes: Optional[int]):
    """Cheapest path to a goal configuration.

    Cost is (number of swaps, entries changed by swaps); reroutes are free.
    Returns the list of configurations along the path, or None.
    """
    start = inst.start
    best = {inst.key(start): (0, 0)}
    parent = {start: None}
    heap = [((0, 0), 0, start)]
    seq = 1
    done = set()
    while heap:
        cost, _, cfg = heapq.heappop(heap)
        k = inst.key(cfg)
        if k in done:
            continue
        done.add(k)
        if goal(cfg):
            path = []
            while cfg is not None:
                path.append(cfg)
                cfg = parent[cfg]
            return path[::-1]
        moves = [(nb, (0, 0)) for nb in inst.reroutes(cfg)]
        if swap_nodes is not None:
            moves.extend((nb, (1, changed)) for nb, changed in inst.swaps(cfg, swap_nodes))
        for nb, step in moves:
            nk = inst.key(nb)
            if nk in done:
                continue
            new_cost = (cost[0] + step[0], cost[1] + step[1])
            if nk not in best or new_cost < best[nk]:
                best[nk] = new_cost
                parent[nb] = cfg
                heapq.heappush(heap, (new_cost, seq, nb))
                seq += 1
    return None


def _plan_from_path(inst: Instance, path) -> ControllerPlan:
    return ControllerPlan(tuple(inst.update_between(a, b) for a, b in zip(path, path[1:])))


def controller_search(state: GameState, new_flow: Flow, allow_swaps: bool):
    """Find a lossless plan that routes ``new_flow`` without touching its id twice.

    With ``allow_swaps`` false only single-entry updates are considered.
    Otherwise the plan uses updates touching as few first-hop nodes as possible,
    then as few swaps and entries as possible.  Returns :class:`Infeasible`
    when no plan of the permitted kind exists.
    """
    inst = Instance(state, new_flow)
    path = _dijkstra(inst, inst.placed, None)
    if path is not None:
        return _plan_from_path(inst, path)
    if not allow_swaps:
        return Infeasible("no sequence of reroutes accommodates the new flow")
    if not inst.spaces()[1]:
        return Infeasible("no lossless allocation of all flows exists")
    node_total = len(set(inst.hops))
    for k in range(1, node_total + 1):
        path = _dijkstra(inst, inst.placed, k)
        if path is not None:
            return _plan_from_path(inst, path)
    return Infeasible("no plan found")  # unreachable: k = node_total frees every flow


def _closure(inst: Instance, starts, keep: Callable = lambda cfg: True) -> dict:
    """Canonical key -> representative for everything reachable by reroutes."""
    reps = {}
    queue = []
    for cfg in starts:
        k = inst.key(cfg)
        if k not in reps:
            reps[k] = cfg
            queue.append(cfg)
    while queue:
        cfg = queue.pop()
        for nb in inst.reroutes(cfg):
            k = inst.key(nb)
            if k not in reps:
                reps[k] = nb
                queue.append(nb)
    return {k: c for k, c in reps.items() if keep(c)}


def reroute_responses(state: GameState, new_flow: Flow) -> list:
    """Distinct lossless states, with the new flow routed, reachable by reroutes.

    Empty when the new flow cannot be accommodated without a swap.
    """
    inst = Instance(state, new_flow)
    reps = _closure(inst, [inst.start], inst.placed)
    return [inst.state_of(reps[k]) for k in sorted(reps)]


class ForcedSwap(NamedTuple):
    nodes: int  # first-hop nodes touched by the cheapest forced swap
    entries: int  # entries it changes
    swaps: tuple  # (pre-swap state, Update) samples, one per distinct swap class
    responses: tuple  # distinct end states after the swap and any reroutes


def forced_swap_responses(state: GameState, new_flow: Flow) -> Optional[ForcedSwap]:
    """Cheapest single-swap responses when reroutes alone cannot place the flow.

    Returns None if reroutes suffice.  Otherwise finds the fewest nodes, then
    the fewest entries, of one swap after which reroutes can finish the job,
    and lists every distinct end state such a controller can reach.
    """
    inst = Instance(state, new_flow)
    before = _closure(inst, [inst.start])
    if any(inst.placed(c) for c in before.values()):
        return None
    unplaced, placed = inst.spaces()
    if not placed:
        raise LfaError("no lossless allocation of all flows exists")

    component: dict = {}
    good: dict = {}

    def finishable(cfg) -> bool:
        if inst.placed(cfg):
            return True
        k = inst.key(cfg)
        if k not in component:
            members = _closure(inst, [cfg], lambda c: not inst.placed(c))
            ok = any(inst.has_room(c) for c in members.values())
            cid = len(good)
            good[cid] = ok
            for mk in members:
                component[mk] = cid
        return good[component[k]]

    node_total = len(set(inst.hops))
    for k in range(1, node_total + 1):
        found = {}
        for pre in before.values():
            for nb, changed in inst.swaps(pre, k):
                if finishable(nb):
                    found.setdefault(changed, []).append((pre, nb))
        if found:
            entries = min(found)
            pairs = found[entries]
            nodes = max(inst.swap_node_count(a, b) for a, b in pairs)
            samples = {}
            for a, b in pairs:
                samples.setdefault((inst.key(a), inst.key(b)), (a, b))
            ends = _closure(inst, [b for _, b in pairs], inst.placed)
            return ForcedSwap(
                nodes, entries,
                tuple((inst.state_of(a), inst.update_between(a, b)) for _, (a, b) in sorted(samples.items())),
                tuple(inst.state_of(ends[key]) for key in sorted(ends)),
            )
    raise LfaError("no single swap accommodates the new flow")


def lossless_groupings(graph: LfaGraph, flows) -> list:
    """Every lossless placement of ``flows`` onto destination edges.

    Returned as tuples of 1-based edge indices aligned with ``flows``.
    """
    flows = list(flows)
    scale = 1
    for x in [graph.capacity] + [f.bandwidth for f in flows]:
        scale = scale * x.denominator // math.gcd(scale, x.denominator)
    if len(flows) > MAX_FLOWS or min(graph.dest_edge_count, len(flows)) > MAX_EDGES:
        raise GuardExceeded("instance exceeds the search guard")
    weights = [int(f.bandwidth * scale) for f in flows]
    out = kernels.lossless_assignments(weights, graph.dest_edge_count, int(graph.capacity * scale))
    return [tuple(e + 1 for e in c) for c in out]
