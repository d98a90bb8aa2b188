"""Lossless flow allocation (LFA) game substrate.

Graph, flows, forwarding state and the load / oversubscription metrics shared
by the adversary, the search oracle and the simulator.

Nodes are plain strings: ``"s"`` and ``"d"`` for the source and destination,
``"o1" .. "on"`` for the first-hop layer and ``"t1" .. "tm"`` for the tails of
the destination edges in the canonical topology.  An edge is a ``(u, v)``
tuple.  Bandwidths are :class:`fractions.Fraction` throughout.

A node with exactly one successor forwards implicitly, so routing a flow in the
canonical topology takes a single entry at its first hop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Optional

SOURCE = "s"
DEST = "d"

Entry = tuple  # (flow id, node)
Edge = tuple  # (u, v)


class LfaError(ValueError):
    pass


def first_hop(i: int) -> str:
    return f"o{i}"


def edge_tail(j: int) -> str:
    return f"t{j}"


def dest_edge(j: int) -> Edge:
    """Destination edge ``e_j`` (1-based) of the canonical topology."""
    return (edge_tail(j), DEST)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # floats go through their shortest repr so 0.35 means 7/20
        return Fraction(repr(x))
    return Fraction(x)


def _canonical_adjacency(n: int, m: int) -> dict:
    adj = {first_hop(i): frozenset(edge_tail(j) for j in range(1, m + 1)) for i in range(1, n + 1)}
    adj.update({edge_tail(j): frozenset({DEST}) for j in range(1, m + 1)})
    return adj


@dataclass(frozen=True, eq=False)
class LfaGraph:
    """Directed acyclic LFA graph.

    ``adjacency`` maps every intermediate node to its successors.  When omitted
    the canonical shape is built: each ``o_i`` reaches every ``t_j`` and each
    ``t_j`` has the single edge ``e_j = (t_j, d)``.
    """

    first_hop_count: int
    dest_edge_count: int
    capacity: Fraction = Fraction(1)
    adjacency: Optional[Mapping[str, frozenset]] = None

    def __post_init__(self):
        n, m = self.first_hop_count, self.dest_edge_count
        if n < 1 or m < 1:
            raise LfaError("first_hop_count and dest_edge_count must be positive")
        cap = as_fraction(self.capacity)
        if cap <= 0:
            raise LfaError("capacity must be positive")
        object.__setattr__(self, "capacity", cap)
        adj = self.adjacency
        if adj is None:
            adj = _canonical_adjacency(n, m)
        adj = {node: frozenset(succ) for node, succ in adj.items()}
        object.__setattr__(self, "adjacency", MappingProxyType(adj))
        self._validate()

    def __reduce__(self):
        return (LfaGraph, (self.first_hop_count, self.dest_edge_count, self.capacity, dict(self.adjacency)))

    def _validate(self):
        adj = self.adjacency
        for i in range(1, self.first_hop_count + 1):
            if first_hop(i) not in adj:
                raise LfaError(f"first-hop node {first_hop(i)} missing from adjacency")
        for node, succ in adj.items():
            if node in (SOURCE, DEST):
                raise LfaError("adjacency keys must be intermediate nodes")
            for v in succ:
                if v != DEST and v not in adj:
                    raise LfaError(f"edge {node}->{v} leads to an unknown node")
        into_d = [u for u, succ in adj.items() if DEST in succ]
        if len(into_d) != self.dest_edge_count:
            raise LfaError(
                f"d has in-degree {len(into_d)}, expected {self.dest_edge_count}")
        # acyclicity and reachability of d, by memoised DFS
        state: dict = {}

        def reaches(node) -> bool:
            if node == DEST:
                return True
            mark = state.get(node)
            if mark == "active":
                raise LfaError(f"cycle through {node}")
            if mark is not None:
                return mark
            state[node] = "active"
            ok = False
            for v in sorted(adj[node]):
                ok = reaches(v) or ok
            state[node] = ok
            return ok

        for node in sorted(adj):
            reaches(node)
        for i in range(1, self.first_hop_count + 1):
            if not state[first_hop(i)]:
                raise LfaError(f"{first_hop(i)} has no path to d")

    @classmethod
    def canonical(cls, n: int, m: int, capacity=Fraction(1)) -> "LfaGraph":
        return cls(n, m, as_fraction(capacity))

    @property
    def first_hops(self) -> tuple:
        return tuple(first_hop(i) for i in range(1, self.first_hop_count + 1))

    @property
    def dest_edges(self) -> tuple:
        return tuple(sorted((u, DEST) for u, succ in self.adjacency.items() if DEST in succ))

    @property
    def edges(self) -> tuple:
        out = [(SOURCE, o) for o in self.first_hops]
        for u in sorted(self.adjacency):
            out.extend((u, v) for v in sorted(self.adjacency[u]))
        return tuple(out)

    def has_edge(self, edge) -> bool:
        u, v = edge
        if u == SOURCE:
            return v in self.first_hops
        return u in self.adjacency and v in self.adjacency[u]

    def edge_capacity(self, edge) -> Optional[Fraction]:
        """Capacity of ``edge``; ``None`` stands for the unbounded source edges."""
        if not self.has_edge(edge):
            raise LfaError(f"unknown edge {edge!r}")
        return None if edge[0] == SOURCE else self.capacity

    def successors(self, node) -> frozenset:
        return self.adjacency.get(node, frozenset())

    def to_dict(self) -> dict:
        out = {"n": self.first_hop_count, "m": self.dest_edge_count, "capacity": str(self.capacity)}
        if dict(self.adjacency) != _canonical_adjacency(self.first_hop_count, self.dest_edge_count):
            out["adjacency"] = {u: sorted(v) for u, v in sorted(self.adjacency.items())}
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "LfaGraph":
        adj = d.get("adjacency")
        return cls(int(d["n"]), int(d["m"]), Fraction(str(d.get("capacity", 1))),
                   {u: frozenset(v) for u, v in adj.items()} if adj else None)


@dataclass(frozen=True)
class Flow:
    id: int
    bandwidth: Fraction
    first_hop: str

    def __post_init__(self):
        bw = as_fraction(self.bandwidth)
        if bw <= 0:
            raise LfaError(f"flow {self.id}: bandwidth must be positive")
        object.__setattr__(self, "bandwidth", bw)


class ForwardingFunction(Mapping):
    """Immutable map from ``(flow id, node)`` entries to next-hop nodes."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Optional[Mapping] = None):
        self._entries = dict(entries or {})

    def __getitem__(self, key):
        return self._entries[key]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        if isinstance(other, ForwardingFunction):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._entries.items()))

    def __repr__(self):
        return f"ForwardingFunction({self._entries!r})"

    def updated(self, assignments: Mapping) -> "ForwardingFunction":
        entries = dict(self._entries)
        for key, nxt in assignments.items():
            if nxt is None:
                entries.pop(key, None)
            else:
                entries[key] = nxt
        return ForwardingFunction(entries)


@dataclass(frozen=True)
class Update:
    """A set of entry assignments applied simultaneously.

    A next hop of ``None`` deletes the entry (used when a flow is removed).
    """

    assignments: Mapping

    def __post_init__(self):
        if not self.assignments:
            raise LfaError("an update needs at least one assignment")
        object.__setattr__(self, "assignments", MappingProxyType(dict(self.assignments)))

    def __hash__(self):
        return hash(frozenset(self.assignments.items()))

    def __reduce__(self):
        return (Update, (dict(self.assignments),))

    def __eq__(self, other):
        if not isinstance(other, Update):
            return NotImplemented
        return dict(self.assignments) == dict(other.assignments)

    @property
    def nodes(self) -> frozenset:
        return frozenset(node for _, node in self.assignments)

    def parts(self) -> list:
        return [Update({k: v}) for k, v in sorted(self.assignments.items(), key=lambda kv: (kv[0][0], kv[0][1]))]

    def __str__(self):
        body = ", ".join(f"F{f}@{node}->{nxt}" for (f, node), nxt in
                         sorted(self.assignments.items(), key=lambda kv: (kv[0][0], kv[0][1])))
        return "{" + body + "}"


class UpdateClass(NamedTuple):
    kind: str  # "reroute" or "swap"
    k: int  # distinct nodes touched

    def __str__(self):
        return "reroute" if self.kind == "reroute" else f"{self.k}-swap"


@dataclass(frozen=True)
class GameState:
    graph: LfaGraph
    flows: Mapping = field(default_factory=dict)  # id -> Flow
    routing: ForwardingFunction = field(default_factory=ForwardingFunction)

    def __post_init__(self):
        flows = self.flows
        if not isinstance(flows, Mapping):
            flows = {f.id: f for f in flows}
        flows = dict(sorted(flows.items()))
        for fid, f in flows.items():
            if fid != f.id:
                raise LfaError(f"flow keyed {fid} has id {f.id}")
            if f.bandwidth > self.graph.capacity:
                raise LfaError(f"flow {fid}: bandwidth exceeds edge capacity")
            if f.first_hop not in self.graph.first_hops:
                raise LfaError(f"flow {fid}: {f.first_hop} is not a first-hop node")
        object.__setattr__(self, "flows", MappingProxyType(flows))
        if not isinstance(self.routing, ForwardingFunction):
            object.__setattr__(self, "routing", ForwardingFunction(self.routing))

    def __reduce__(self):
        return (GameState, (self.graph, dict(self.flows), self.routing))

    def next_hop(self, fid: int, node: str) -> Optional[str]:
        nxt = self.routing.get((fid, node))
        if nxt is not None:
            return nxt
        succ = self.graph.successors(node)
        if len(succ) == 1:
            return next(iter(succ))
        return None

    def path(self, fid: int) -> Optional[tuple]:
        """Node sequence ``s, r_i, ..., d`` of a flow, or ``None`` if unrouted."""
        flow = self.flows.get(fid)
        if flow is None:
            raise LfaError(f"unknown flow {fid}")
        nodes = [SOURCE, flow.first_hop]
        seen = {flow.first_hop}
        node = flow.first_hop
        while node != DEST:
            nxt = self.next_hop(fid, node)
            if nxt is None:
                return None
            if nxt in seen:
                raise LfaError(f"flow {fid}: forwarding loop at {nxt}")
            if nxt != DEST and nxt not in self.graph.adjacency or nxt not in self.graph.successors(node):
                raise LfaError(f"flow {fid}: entry {node}->{nxt} is not an edge")
            seen.add(nxt)
            nodes.append(nxt)
            node = nxt
        return tuple(nodes)

    def path_edges(self, fid: int) -> tuple:
        p = self.path(fid)
        if p is None:
            return ()
        return tuple(zip(p, p[1:]))

    def dest_edge_of(self, fid: int) -> Optional[Edge]:
        p = self.path(fid)
        return None if p is None else (p[-2], p[-1])

    def is_routed(self, fid: int) -> bool:
        return self.path(fid) is not None

    def with_flow(self, flow: Flow) -> "GameState":
        if flow.id in self.flows:
            raise LfaError(f"flow id {flow.id} already present")
        return GameState(self.graph, {**self.flows, flow.id: flow}, self.routing)

    def without_flow(self, fid: int) -> "GameState":
        if fid not in self.flows:
            raise LfaError(f"unknown flow {fid}")
        flows = {k: v for k, v in self.flows.items() if k != fid}
        routing = ForwardingFunction({k: v for k, v in self.routing.items() if k[0] != fid})
        return GameState(self.graph, flows, routing)

    def total_demand(self) -> Fraction:
        return sum((f.bandwidth for f in self.flows.values()), Fraction(0))

    def to_dict(self) -> dict:
        return {
            "graph": self.graph.to_dict(),
            "flows": [[f.id, str(f.bandwidth), f.first_hop] for f in self.flows.values()],
            "entries": [[fid, node, nxt] for (fid, node), nxt in
                        sorted(self.routing.items(), key=lambda kv: (kv[0][0], kv[0][1]))],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GameState":
        graph = LfaGraph.from_dict(d["graph"])
        flows = {int(i): Flow(int(i), Fraction(str(bw)), hop) for i, bw, hop in d.get("flows", [])}
        entries = {(int(f), node): nxt for f, node, nxt in d.get("entries", [])}
        state = cls(graph, flows, ForwardingFunction(entries))
        for fid in flows:
            state.path(fid)
        return state


def route_update(state: GameState, fid: int, j: int) -> Update:
    """Single-entry update sending flow ``fid`` from its first hop to ``e_j``."""
    return Update({(fid, state.flows[fid].first_hop): edge_tail(j)})


def _check_edge(graph: LfaGraph, edge):
    if not graph.has_edge(tuple(edge)):
        raise LfaError(f"unknown edge {edge!r}")


def edge_loads(state: GameState) -> dict:
    """Load on every edge of the graph, zero entries included."""
    loads = {e: Fraction(0) for e in state.graph.edges}
    for fid, f in state.flows.items():
        loads[(SOURCE, f.first_hop)] += f.bandwidth  # carried even before the flow is routed
        for e in state.path_edges(fid):
            if e[0] != SOURCE:
                loads[e] += f.bandwidth
    return loads


def edge_load(state: GameState, edge) -> Fraction:
    edge = tuple(edge)
    _check_edge(state.graph, edge)
    total = Fraction(0)
    for fid, f in state.flows.items():
        if edge[0] == SOURCE:
            if f.first_hop == edge[1]:
                total += f.bandwidth
        elif edge in state.path_edges(fid):
            total += f.bandwidth
    return total


def oversubscription(state: GameState, edge) -> Fraction:
    edge = tuple(edge)
    cap = state.graph.edge_capacity(edge)
    if cap is None:
        return Fraction(0)
    return max(Fraction(0), edge_load(state, edge) - cap)


def peak_oversubscription(state: GameState) -> Fraction:
    cap = state.graph.capacity
    return max((max(Fraction(0), load - cap) for e, load in edge_loads(state).items()
                if e[0] != SOURCE), default=Fraction(0))


def validate_lossless(state: GameState) -> bool:
    return peak_oversubscription(state) == 0


def apply_update(state: GameState, update: Update) -> GameState:
    """Apply every assignment of ``update`` at once and return the new state.

    Deletions may name flows that are no longer in the flow set (stale entries
    left behind by a removal); any other assignment must reference a known
    flow and an existing edge, and every affected flow must still reach ``d``.
    """
    graph = state.graph
    touched = set()
    for (fid, node), nxt in update.assignments.items():
        if nxt is None:
            continue
        if fid not in state.flows:
            raise LfaError(f"update names unknown flow {fid}")
        if node not in graph.adjacency or nxt not in graph.successors(node):
            raise LfaError(f"entry F{fid}@{node}->{nxt} is not an edge of the graph")
        touched.add(fid)
    new = GameState(graph, state.flows, state.routing.updated(update.assignments))
    for fid in sorted(touched):
        if new.path(fid) is None:
            raise LfaError(f"flow {fid} does not reach d after the update")
    return new


def classify_update(update: Update) -> UpdateClass:
    if len(update.assignments) == 1:
        return UpdateClass("reroute", 1)
    return UpdateClass("swap", len(update.nodes))


def swap_impact(state: GameState, update: Update) -> Fraction:
    """Impact of a 2-swap: the smaller of the two one-sided oversubscriptions.

    Each side is the peak oversubscription over all edges after applying only
    that half of the swap to ``state``.
    """
    if len(update.assignments) != 2:
        raise LfaError("impact is defined only for swaps made of exactly two entries")
    first, second = update.parts()
    return min(peak_oversubscription(apply_update(state, first)),
               peak_oversubscription(apply_update(state, second)))


def loads_by_dest_edge(state: GameState) -> tuple:
    loads = edge_loads(state)
    return tuple(loads[e] for e in state.graph.dest_edges)


def flows_on(state: GameState, edge) -> list:
    edge = tuple(edge)
    return [fid for fid in state.flows if edge in state.path_edges(fid)]


def make_state(graph: LfaGraph, flows: Iterable[Flow] = (), placement: Optional[Mapping] = None) -> GameState:
    """Build a state routing each flow id in ``placement`` to ``e_j`` (1-based)."""
    flows = {f.id: f for f in flows}
    entries = {}
    for fid, j in (placement or {}).items():
        entries[(fid, flows[fid].first_hop)] = edge_tail(j)
    state = GameState(graph, flows, ForwardingFunction(entries))
    for fid in flows:
        state.path(fid)
    return state
