from fractions import Fraction as F
from functools import partial

import pytest
from hypothesis import given, settings, strategies as st

from time4lab.adversary import (
    ADD, REMOVE, NSwapParams, SourceMove, apply_source_move, certify, choose_gh, controller_first_fit,
    explore, grouping_lemma_holds, impact_bandwidths, nswap_setup_flows, play, scratch_alpha, strategy_2swap,
    strategy_impact, strategy_nswap,
)
from time4lab.lfa import Flow, ForwardingFunction, GameState, LfaError, LfaGraph, make_state, validate_lossless


def empty(n=2, m=2, capacity=F(1)):
    return GameState(LfaGraph.canonical(n, m, capacity), {}, ForwardingFunction())


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 400))
def test_choose_gh_satisfies_both_inequalities(n):
    p = choose_gh(n)
    assert F(1, 3) < p.h < p.g < F(1, 2)
    assert p.g > (n * n - n) * (1 - 2 * p.h)


def test_choose_gh_keeps_default_g_for_three():
    assert choose_gh(3).g == F(23, 48)


def test_nswap_params_validation():
    with pytest.raises(LfaError):
        NSwapParams(F(2, 5), F(9, 20), 3)  # g too small for n = 3
    with pytest.raises(LfaError):
        choose_gh(2)


@settings(max_examples=100, deadline=None)
@given(st.fractions(F(1, 1000), F(499, 1000)))
def test_impact_bandwidths_structure(alpha):
    bw = impact_bandwidths(alpha)
    eps = F(1, 10) - alpha / 5
    assert bw[1] + bw[2] + bw[5] == 1  # F5 exactly fills the edge holding F1 and F2
    assert bw[1] + bw[3] + bw[5] > 1  # but does not fit beside a mixed pair
    assert F(1, 2) - 5 * eps == alpha


def test_impact_bandwidths_range():
    for bad in (0, F(1, 2), F(3, 5)):
        with pytest.raises(LfaError):
            impact_bandwidths(bad)


@settings(max_examples=100, deadline=None)
@given(st.fractions(F(1, 1000), F(332, 1000)))
def test_scratch_alpha_overruns_full_capacity(nu):
    alpha = scratch_alpha(nu)
    assert alpha < F(1, 2)
    assert (1 + alpha) * (1 - nu) > 1


def test_first_fit_run_of_the_two_swap_script():
    transcript = play(strategy_2swap, controller_first_fit, empty())
    forced = transcript.forced_steps
    assert len(forced) == 1
    assert forced[0].plan.swap_nodes == 2
    assert validate_lossless(transcript.final)


def test_removal_keeps_stale_entries_and_controller_cleans_them():
    s = make_state(LfaGraph.canonical(2, 2), [Flow(1, F(1, 2), "o1")], {1: 2})
    move = SourceMove(REMOVE, s.flows[1])
    after = apply_source_move(s, move)
    assert 1 not in after.flows and (1, "o1") in after.routing
    plan = controller_first_fit(s, move)
    assert (1, "o1") not in plan.execute(after).routing


def test_unknown_action_rejected():
    with pytest.raises(LfaError):
        SourceMove("drop", Flow(1, F(1, 2), "o1"))


def test_exploration_agrees_with_certificate():
    cert = certify(1)
    again = explore(strategy_2swap, empty())
    assert cert.exploration == again
    assert again.min_forced == again.max_forced == 1


@pytest.mark.parametrize("alpha", [F(1, 10), F(1, 4), F(2, 5), F(9, 20)])
def test_theorem_three_impact_is_exact(alpha):
    cert = certify(3, alpha=alpha)
    assert cert.certified
    assert cert.detail["first_fit_impact"] == alpha
    assert min(cert.exploration.impacts) >= alpha


def test_theorem_four_uses_reduced_capacity():
    cert = certify(4, nu=F(1, 10))
    assert cert.graph.capacity == F(9, 10)
    assert cert.certified


def test_theorem_five_grouping_lemma():
    assert grouping_lemma_holds(3) and grouping_lemma_holds(4)
    flows = nswap_setup_flows(3)
    assert [f.id for f in flows] == list(range(1, 8))
    assert sum(f.bandwidth for f in flows) == 2 * choose_gh(3).h + 2 * choose_gh(3).g


def test_theorem_five_needs_three_switches():
    with pytest.raises(LfaError):
        strategy_nswap(2, empty())


def test_scripts_reject_small_graphs():
    with pytest.raises(LfaError):
        strategy_impact(F(1, 4), empty(n=1))


def test_unknown_theorem():
    with pytest.raises(LfaError):
        certify(9)


def test_strategies_are_deterministic_functions_of_state_and_history():
    s = empty()
    first = strategy_2swap(s, ())
    assert first == strategy_2swap(s, ())
    assert first.action == ADD and first.flow.id == 1
    assert partial(strategy_impact, F(1, 4))(s, ()).flow.bandwidth == impact_bandwidths(F(1, 4))[1]
