"""Adversarial source scripts, reference controllers and swap certification.

A source strategy is a callable ``(state, history) -> SourceMove | None``.
``history`` is the tuple of moves already played; ``None`` means the script
has reached its end.  Scripts observe the controller's routing between moves
and branch on it.

Certification plays a script against every controller response the search
oracle can produce (up to symmetry), checking that the expected swap is forced
on every branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Callable, Optional

from . import search
from .lfa import (
    ForwardingFunction, Flow, GameState, LfaError, LfaGraph, Update, first_hop,
    apply_update, edge_loads, peak_oversubscription, swap_impact,
)
from .search import ControllerPlan, Infeasible, controller_search

ADD = "add"
REMOVE = "remove"

SATURATING_ID_BASE = 100


class ControllerFault(LfaError):
    """The controller left the game in a state the script cannot continue from."""


@dataclass(frozen=True)
class SourceMove:
    action: str
    flow: Flow

    def __post_init__(self):
        if self.action not in (ADD, REMOVE):
            raise LfaError(f"unknown action {self.action!r}")

    def __str__(self):
        f = self.flow
        return f"{self.action.capitalize()} F{f.id}(bw={f.bandwidth}, {f.first_hop})"


@dataclass(frozen=True)
class NSwapParams:
    h: Fraction
    g: Fraction
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise LfaError("n must be at least 3")
        if not Fraction(1, 3) < self.h < self.g < Fraction(1, 2):
            raise LfaError("need 1/3 < h < g < 1/2")
        if not self.g > (self.n * self.n - self.n) * (1 - 2 * self.h):
            raise LfaError("need g > (n^2 - n)(1 - 2h)")


def choose_gh(n: int) -> NSwapParams:
    """Type-A bandwidth ``h`` and type-B/C totals ``g`` for the n-swap script.

    ``g`` defaults to 23/48.  A valid ``h`` below ``g`` exists only when
    ``g > N/(2N+1)`` with ``N = n^2 - n``; for n >= 4 that rules out 23/48, so
    ``g`` moves to the midpoint of ``N/(2N+1)`` and 1/2.
    """
    if n < 3:
        raise LfaError("n must be at least 3")
    pairs = n * n - n
    floor_g = Fraction(pairs, 2 * pairs + 1)
    g = Fraction(23, 48)
    if g <= floor_g:
        g = (floor_g + Fraction(1, 2)) / 2
    h_min = Fraction(1, 2) - g / (2 * pairs)
    h = (max(h_min, Fraction(1, 3)) + g) / 2
    return NSwapParams(h, g, n)


# -- scripts -----------------------------------------------------------------

def _check_state(state: GameState):
    if peak_oversubscription(state) > 0:
        raise ControllerFault("controller produced a lossy state")
    for fid in state.flows:
        if not state.is_routed(fid):
            raise ControllerFault(f"flow {fid} left unrouted")


def _add(fid, bandwidth, hop) -> SourceMove:
    return SourceMove(ADD, Flow(fid, bandwidth, hop))


def _saturating(state: GameState, j: int) -> SourceMove:
    return _add(SATURATING_ID_BASE + j, state.graph.capacity, first_hop(1))


def _same_edge(state: GameState, a: int, b: int) -> bool:
    return state.dest_edge_of(a) == state.dest_edge_of(b)


def _require(state: GameState, min_n: int, min_m: int = 2):
    g = state.graph
    if g.to_dict().get("adjacency") is not None:
        raise LfaError("scripts need the canonical topology")
    if g.first_hop_count < min_n:
        raise LfaError(f"need at least {min_n} first-hop nodes")
    if g.dest_edge_count < min_m:
        raise LfaError(f"need at least {min_m} destination edges")


def _two_swap_script(bandwidths: dict, state: GameState, history: tuple) -> Optional[SourceMove]:
    """Shared by the 2-swap and impact scripts; bandwidths are fractions of c."""
    _require(state, 2)
    _check_state(state)
    cap = state.graph.capacity
    extra = state.graph.dest_edge_count - 2
    step = len(history)
    if step < extra:
        return _saturating(state, step + 1)
    step -= extra
    hops = {1: 1, 2: 1, 3: 2, 4: 2, 5: 1, 6: 1, 7: 1}
    if step < 4:
        fid = step + 1
        return _add(fid, bandwidths[fid] * cap, first_hop(hops[fid]))
    added = {m.flow.id for m in history}
    if step == 4:
        if _same_edge(state, 1, 2):
            return _add(6, bandwidths[6] * cap, first_hop(hops[6]))
        return _add(5, bandwidths[5] * cap, first_hop(hops[5]))
    if step == 5 and 6 in added:
        return _add(7, bandwidths[7] * cap, first_hop(hops[7]))
    return None


_THM1_BANDWIDTHS = {1: Fraction(35, 100), 2: Fraction(35, 100), 3: Fraction(45, 100),
                    4: Fraction(45, 100), 5: Fraction(3, 10), 6: Fraction(2, 10), 7: Fraction(2, 10)}


def strategy_2swap(state: GameState, history: tuple = ()) -> Optional[SourceMove]:
    return _two_swap_script(_THM1_BANDWIDTHS, state, history)


def impact_bandwidths(alpha) -> dict:
    alpha = Fraction(alpha)
    if not 0 < alpha < Fraction(1, 2):
        raise LfaError("alpha must lie strictly between 0 and 1/2")
    eps = Fraction(1, 10) - alpha / 5
    big, mid = Fraction(1, 2) - 2 * eps, Fraction(1, 2) - eps
    return {1: big, 2: big, 3: mid, 4: mid, 5: 4 * eps, 6: 3 * eps, 7: 3 * eps}


def strategy_impact(alpha, state: GameState, history: tuple = ()) -> Optional[SourceMove]:
    return _two_swap_script(impact_bandwidths(alpha), state, history)


def scratch_alpha(nu) -> Fraction:
    """Impact that overruns full capacity once capacity is cut to ``1 - nu``."""
    nu = Fraction(nu)
    if not 0 < nu < Fraction(1, 3):
        raise LfaError("nu must lie strictly between 0 and 1/3")
    alpha = (nu / (1 - nu) + Fraction(1, 2)) / 2
    if not (alpha < Fraction(1, 2) and (1 + alpha) * (1 - nu) > 1):
        raise LfaError("no admissible alpha")  # guarded by the nu range above
    return alpha


def strategy_scratch(nu, state: GameState, history: tuple = ()) -> Optional[SourceMove]:
    """Impact script on a graph whose capacity is already the usable ``1 - nu``."""
    return strategy_impact(scratch_alpha(nu), state, history)


def strategy_m_halves_swaps(state: GameState, history: tuple = ()) -> Optional[SourceMove]:
    _require(state, 2, 3)
    _check_state(state)
    m = state.graph.dest_edge_count
    cap = state.graph.capacity
    half = m // 2
    pairs = 2 * half
    step = len(history)
    if m % 2:
        if step == 0:
            return _saturating(state, 1)
        step -= 1
    phases = [
        (pairs, lambda k: _add(1 + k, Fraction(35, 100) * cap, first_hop(1))),
        (pairs, lambda k: _add(pairs + 1 + k, Fraction(45, 100) * cap, first_hop(2))),
        (pairs, lambda k: _add(2 * pairs + 1 + k, Fraction(2, 10) * cap, first_hop(1))),
        (pairs, lambda k: SourceMove(REMOVE, state.flows[2 * pairs + 1 + k])),
        (half, lambda k: _add(3 * pairs + 1 + k, Fraction(3, 10) * cap, first_hop(1))),
    ]
    for length, make in phases:
        if step < length:
            return make(step)
        step -= length
    return None


def strategy_nswap(n: int, state: GameState, history: tuple = ()) -> Optional[SourceMove]:
    if n < 3:
        raise LfaError("n-swap script needs n >= 3; use strategy_2swap for n = 2")
    _require(state, n)
    _check_state(state)
    params = choose_gh(n)
    cap = state.graph.capacity
    h, g = params.h * cap, params.g * cap
    extra = state.graph.dest_edge_count - 2
    step = len(history)
    if step < extra:
        return _saturating(state, step + 1)
    step -= extra
    setup = [(1, h, 1), (2, h, 1)]
    setup += [(2 + i, g / n, i) for i in range(1, n + 1)]
    setup += [(n + 1 + i, g / (n - 1), i) for i in range(2, n + 1)]
    if step < len(setup):
        fid, bw, hop = setup[step]
        return _add(fid, bw, first_hop(hop))
    step -= len(setup)
    if step == 0:
        together = _same_edge(state, 1, 2)
    else:
        closing = next(m.flow for m in history if m.flow.id == 2 * n + 2)
        together = closing.bandwidth == cap - h - g
    if together:
        if step < 2:
            return _add(2 * n + 2 + step, cap - h - g, first_hop(1))
        return None
    if step == 0:
        return _add(2 * n + 2, cap - 2 * h, first_hop(1))
    return None


def nswap_setup_flows(n: int, capacity=Fraction(1)) -> list:
    """Type A, B and C flows of the n-swap script, in order."""
    params = choose_gh(n)
    cap = Fraction(capacity)
    h, g = params.h * cap, params.g * cap
    flows = [Flow(1, h, first_hop(1)), Flow(2, h, first_hop(1))]
    flows += [Flow(2 + i, g / n, first_hop(i)) for i in range(1, n + 1)]
    flows += [Flow(n + 1 + i, g / (n - 1), first_hop(i)) for i in range(2, n + 1)]
    return flows


def grouping_lemma_holds(n: int) -> bool:
    """True when every lossless placement keeps type B together and type C together."""
    flows = nswap_setup_flows(n)
    b = [i for i, f in enumerate(flows) if 3 <= f.id <= n + 2]
    c = [i for i, f in enumerate(flows) if f.id > n + 2]
    groupings = search.lossless_groupings(LfaGraph.canonical(n, 2), flows)
    return bool(groupings) and all(
        len({g[i] for i in b}) == 1 and len({g[i] for i in c}) == 1 for g in groupings)


# -- controllers and game play ---------------------------------------------

def apply_source_move(state: GameState, move: SourceMove) -> GameState:
    """State after the source acts; a removed flow leaves stale entries behind."""
    if move.action == ADD:
        return state.with_flow(move.flow)
    fid = move.flow.id
    if fid not in state.flows:
        raise LfaError(f"cannot remove unknown flow {fid}")
    flows = {k: v for k, v in state.flows.items() if k != fid}
    return GameState(state.graph, flows, state.routing)


def controller_first_fit(state: GameState, move: SourceMove) -> ControllerPlan:
    """Place a new flow on the least-loaded edge with room, lowest index first.

    ``state`` is the state before the source move.  When no edge has room the
    plan comes from the search oracle and may contain a swap.
    """
    if move.action == REMOVE:
        stale = {key: None for key in state.routing if key[0] == move.flow.id}
        return ControllerPlan((Update(stale),) if stale else ())
    flow = move.flow
    loads = edge_loads(state)
    cap = state.graph.capacity
    best = None
    for edge in state.graph.dest_edges:
        if loads[edge] + flow.bandwidth <= cap and (best is None or loads[edge] < loads[best]):
            best = edge
    if best is not None:
        return ControllerPlan((Update({(flow.id, flow.first_hop): best[0]}),))
    plan = controller_search(state, flow, allow_swaps=True)
    if isinstance(plan, Infeasible):
        raise LfaError(f"no lossless plan for {move}: {plan.reason}")
    return plan


@dataclass
class Step:
    move: SourceMove
    plan: ControllerPlan
    state: GameState  # after the controller's plan
    forced: bool = False  # reroutes alone could not accommodate the move
    impact: Optional[Fraction] = None  # of a two-entry forced swap


@dataclass
class Transcript:
    steps: list = field(default_factory=list)
    final: Optional[GameState] = None

    @property
    def forced_steps(self) -> list:
        return [s for s in self.steps if s.forced]


def _budget_ok(state: GameState) -> bool:
    return state.total_demand() <= state.graph.dest_edge_count * state.graph.capacity


def play(strategy: Callable, controller: Callable, state: GameState, max_steps: int = 200) -> Transcript:
    """Alternate source and controller moves until the script ends."""
    history: tuple = ()
    transcript = Transcript()
    for _ in range(max_steps):
        move = strategy(state, history)
        if move is None:
            transcript.final = state
            return transcript
        after_source = apply_source_move(state, move)
        if not _budget_ok(after_source):
            raise LfaError("script exceeded the network's total capacity")
        forced = False
        if move.action == ADD:
            probe = controller_search(state, move.flow, allow_swaps=False)
            forced = isinstance(probe, Infeasible)
        plan = controller(state, move)
        new_state = plan.execute(after_source)
        _check_state(new_state)
        impact = None
        if forced:
            cursor = after_source
            for u in plan.updates:
                if len(u.assignments) == 2 and impact is None:
                    impact = swap_impact(cursor, u)
                cursor = apply_update(cursor, u)
        transcript.steps.append(Step(move, plan, new_state, forced, impact))
        history += (move,)
        state = new_state
    raise LfaError("script did not terminate")


# -- certification -----------------------------------------------------------

def state_key(state: GameState) -> tuple:
    per_edge = {}
    for fid, f in state.flows.items():
        per_edge.setdefault(state.dest_edge_of(fid), []).append((f.bandwidth, f.first_hop))
    return tuple(sorted(tuple(sorted(v)) for v in per_edge.values()))


@dataclass
class Exploration:
    """Aggregate over every branch of the game tree."""

    min_forced: int  # forced swaps touching at least the target node count
    max_forced: int
    swap_sizes: frozenset  # node counts of the cheapest forced swaps
    impacts: frozenset  # impacts of two-entry forced swaps
    leaves: int
    tree_size: int = 0  # game-tree nodes, shared subtrees counted per visit


def explore(strategy: Callable, state: GameState, history: tuple = (), memo: Optional[dict] = None,
            min_nodes: int = 2) -> Exploration:
    """Play ``strategy`` against all controllers the oracle can realize.

    Forced swaps whose cheapest form touches at least ``min_nodes`` first-hop
    nodes are counted per branch.
    """
    if memo is None:
        memo = {}
    key = (len(history), frozenset(state.flows), state_key(state))
    if key in memo:
        return memo[key]
    move = strategy(state, history)
    if move is None:
        result = Exploration(0, 0, frozenset(), frozenset(), 1, 1)
        memo[key] = result
        return result
    after = apply_source_move(state, move)
    if not _budget_ok(after):
        raise LfaError("script exceeded the network's total capacity")
    sizes, impacts, forced = set(), set(), 0
    if move.action == REMOVE:
        children = [state.without_flow(move.flow.id)]
    else:
        children = search.reroute_responses(state, move.flow)
        if not children:
            cheapest = search.forced_swap_responses(state, move.flow)
            forced = int(cheapest.nodes >= min_nodes)
            sizes.add(cheapest.nodes)
            for pre, update in cheapest.swaps:
                if len(update.assignments) == 2:
                    impacts.add(swap_impact(pre, update))
            children = list(cheapest.responses)
    history = history + (move,)
    parts = [explore(strategy, child, history, memo, min_nodes) for child in children]
    result = Exploration(
        forced + min(p.min_forced for p in parts),
        forced + max(p.max_forced for p in parts),
        frozenset(sizes).union(*(p.swap_sizes for p in parts)),
        frozenset(impacts).union(*(p.impacts for p in parts)),
        sum(p.leaves for p in parts),
        1 + sum(p.tree_size for p in parts),
    )
    memo[key] = result
    return result


@dataclass
class Certificate:
    theorem: int
    swap_size: int  # expected node count of each forced swap
    required_swaps: int
    exploration: Exploration
    transcript: Transcript
    checks: dict  # name -> bool
    graph: LfaGraph
    detail: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return all(self.checks.values())


def _empty(graph: LfaGraph) -> GameState:
    return GameState(graph, {}, ForwardingFunction())


def certify(theorem: int, n: int = 2, m: int = 2, alpha=None, nu=None) -> Certificate:
    """Certify one theorem instance exhaustively.

    Raises :class:`search.GuardExceeded` when the instance is too large.
    """
    capacity = Fraction(1)
    detail = {}
    if theorem == 1:
        strategy, k, required = strategy_2swap, 2, 1
    elif theorem == 2:
        if m <= 2:
            raise LfaError("theorem 2 needs m > 2")
        strategy, k, required = strategy_m_halves_swaps, 2, m // 2
    elif theorem == 3:
        alpha = Fraction(alpha if alpha is not None else Fraction(1, 4))
        strategy, k, required = partial(strategy_impact, alpha), 2, 1
        detail["alpha"] = alpha
    elif theorem == 4:
        nu = Fraction(nu if nu is not None else Fraction(1, 10))
        alpha = scratch_alpha(nu)
        capacity = 1 - nu
        strategy, k, required = partial(strategy_scratch, nu), 2, 1
        detail.update(nu=nu, alpha=alpha)
    elif theorem == 5:
        n = max(n, 3)
        strategy, k, required = partial(strategy_nswap, n), n, 1
        detail["gh"] = choose_gh(n)
    else:
        raise LfaError(f"unknown theorem {theorem}")
    graph = LfaGraph.canonical(n, m, capacity)
    transcript = play(strategy, controller_first_fit, _empty(graph))
    exploration = explore(strategy, _empty(graph), min_nodes=k)
    forced = transcript.forced_steps
    last_add = next((s for s in reversed(transcript.steps) if s.move.action == ADD), None)
    checks = {
        f"every controller is forced into {required} {k}-swap(s)": exploration.min_forced >= required,
        f"no forced swap needs more than {k} nodes": max(exploration.swap_sizes, default=0) == k,
        "first-fit run ends on a forced swap": bool(last_add and last_add.forced),
        f"first-fit run performs {required} {k}-swap(s)":
            sum(1 for s in forced if s.plan.swap_nodes >= k) >= required,
    }
    if theorem in (3, 4):
        first_impact = forced[0].impact if forced else None
        detail["first_fit_impact"] = first_impact
        target = alpha * capacity
        checks["first-fit swap impact equals alpha"] = first_impact == target
        checks["every forced swap has impact >= alpha"] = all(x >= target for x in exploration.impacts)
        if theorem == 4:
            checks["untimed swap overruns full capacity"] = capacity + target > 1
    if theorem == 5:
        checks["type B and type C flows always grouped"] = grouping_lemma_holds(n)
    return Certificate(theorem, k, required, exploration, transcript, checks, graph, detail)
