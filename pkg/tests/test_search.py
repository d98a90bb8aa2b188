import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from time4lab import _kernels_py, kernels
from time4lab.lfa import Flow, LfaGraph, make_state, validate_lossless
from time4lab.search import (
    GuardExceeded, Infeasible, controller_search, forced_swap_responses, lossless_groupings, reroute_responses,
)


def brute_assignments(weights, num_edges, capacity):
    out = []
    for combo in itertools.product(range(num_edges), repeat=len(weights)):
        loads = [0] * num_edges
        for w, e in zip(weights, combo):
            loads[e] += w
        if max(loads, default=0) <= capacity:
            out.append(combo)
    return out


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 6), max_size=6), st.integers(1, 3), st.integers(0, 10))
def test_lossless_assignments_match_brute_force(weights, num_edges, capacity):
    expected = brute_assignments(weights, num_edges, capacity)
    assert _kernels_py.lossless_assignments(weights, num_edges, capacity) == expected
    assert kernels.lossless_assignments(weights, num_edges, capacity) == expected


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.integers(1, 5), st.data())
def test_excess_integral_matches_fallback_and_hand_sum(rows, edges, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    times = np.cumsum(rng.integers(0, 50, rows + 1)).astype(np.int64)
    loads = rng.integers(0, 20, (rows, edges)).astype(np.int64)
    caps = rng.integers(0, 20, edges).astype(np.int64)
    by_hand = sum(max(0, int(loads[k, e]) - int(caps[e])) * int(times[k + 1] - times[k])
                  for k in range(rows) for e in range(edges))
    assert kernels.excess_integral(times, loads, caps) == pytest.approx(by_hand)
    assert _kernels_py.excess_integral(times, loads, caps) == pytest.approx(by_hand)


def test_kernel_implementation_is_reported():
    assert kernels.IMPLEMENTATION in ("cython", "python")


class TestControllerSearch:
    def setup_method(self):
        self.g = LfaGraph.canonical(2, 2)

    def test_direct_placement(self):
        s = make_state(self.g, [Flow(1, F(1, 2), "o1")], {1: 1})
        plan = controller_search(s, Flow(2, F(1, 2), "o2"), allow_swaps=False)
        assert plan and plan.swap_nodes == 0
        after = plan.execute(s.with_flow(Flow(2, F(1, 2), "o2")))
        assert validate_lossless(after) and after.is_routed(2)

    def test_reroute_makes_room(self):
        s = make_state(self.g, [Flow(1, F(1, 2), "o1"), Flow(2, F(1, 2), "o2")], {1: 1, 2: 2})
        plan = controller_search(s, Flow(3, F(1), "o1"), allow_swaps=False)
        assert plan
        assert all(len(u.assignments) == 1 for u in plan.updates)
        after = plan.execute(s.with_flow(Flow(3, F(1), "o1")))
        assert validate_lossless(after)

    def test_forced_swap(self):
        flows = [Flow(1, F(1, 2), "o1"), Flow(2, F(3, 10), "o2"), Flow(3, F(3, 10), "o2"), Flow(4, F(1, 2), "o1")]
        s = make_state(self.g, flows, {1: 1, 2: 1, 3: 2, 4: 2})
        new = Flow(5, F(2, 5), "o1")
        # the halves must share an edge, and every single move overloads its new edge
        assert isinstance(controller_search(s, new, allow_swaps=False), Infeasible)
        plan = controller_search(s, new, allow_swaps=True)
        assert plan and plan.swap_nodes == 2
        assert validate_lossless(plan.execute(s.with_flow(new)))
        assert reroute_responses(s, new) == []
        forced = forced_swap_responses(s, new)
        assert forced is not None and forced.nodes == 2

    def test_infeasible_total(self):
        s = make_state(self.g, [Flow(1, F(1), "o1"), Flow(2, F(1), "o2")], {1: 1, 2: 2})
        result = controller_search(s, Flow(3, F(1, 10), "o1"), allow_swaps=True)
        assert isinstance(result, Infeasible) and not result

    def test_guard(self):
        g = LfaGraph.canonical(2, 5)
        flows = [Flow(i, F(1, 10), "o1") for i in range(1, 14)]
        with pytest.raises(GuardExceeded):
            lossless_groupings(g, flows)


def test_lossless_groupings_are_lossless():
    g = LfaGraph.canonical(2, 2)
    flows = [Flow(1, F(1, 2), "o1"), Flow(2, F(1, 2), "o2"), Flow(3, F(1, 2), "o1")]
    groups = lossless_groupings(g, flows)
    assert groups
    for grouping in groups:
        s = make_state(g, flows, {f.id: j for f, j in zip(flows, grouping)})
        assert validate_lossless(s)
    assert len(groups) == len(brute_assignments([1, 1, 1], 2, 2))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(F(1, 10), F(1), max_denominator=10), min_size=1, max_size=4), st.data())
def test_search_plans_are_lossless_step_by_step(bws, data):
    g = LfaGraph.canonical(2, 2)
    flows = [Flow(i + 1, bw, f"o{data.draw(st.integers(1, 2))}") for i, bw in enumerate(bws)]
    groups = lossless_groupings(g, flows)
    if not groups:
        return
    placement = data.draw(st.sampled_from(groups))
    s = make_state(g, flows, {f.id: j for f, j in zip(flows, placement)})
    new = Flow(99, data.draw(st.fractions(F(1, 10), F(1), max_denominator=10)), "o1")
    plan = controller_search(s, new, allow_swaps=True)
    if isinstance(plan, Infeasible):
        assert not lossless_groupings(g, flows + [new])
        return
    after = plan.execute(s.with_flow(new))  # raises if any prefix oversubscribes
    assert after.is_routed(99)
