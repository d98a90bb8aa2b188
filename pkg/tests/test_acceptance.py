"""Acceptance checks, one per criterion.

Each check returns ``(ok, detail)``. Under pytest every criterion is a test and
a PASS/FAIL line per criterion is printed in the terminal summary; run this file
directly to print the same lines without pytest.
"""

from __future__ import annotations

import csv
import io
import random
import statistics
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from time4lab import cli  # noqa: E402
from time4lab.adversary import certify, choose_gh  # noqa: E402
from time4lab.experiments import (  # noqa: E402
    N_GRID, SCRATCH_GRID, RunSpec, loss_csv, run_figure, run_specs, video_csv,
)
from time4lab.netsim import NS_PER_MS, NS_PER_S, SimParams, ms  # noqa: E402
from time4lab.ofwire import codec as c  # noqa: E402
from time4lab.ofwire import ExecuteAt, ExecuteNow, ToleranceConfig, check_tolerance  # noqa: E402
from time4lab.strategies import StrategyConfig  # noqa: E402
from wire_strategies import ALL, random_message  # noqa: E402

SEEDS = range(100)
TYPE_I = SimParams.for_type("I")
RESULTS: dict = {}
_CSV: dict = {}  # first-run CSV text of criteria 5-9, compared byte-wise by criterion 10


def timed(limit_s):
    def wrap(check):
        def run():
            start = time.perf_counter()
            ok, detail = check()
            elapsed = time.perf_counter() - start
            if elapsed >= limit_s:
                ok, detail = False, f"{detail}; took {elapsed:.1f} s (limit {limit_s} s)"
            else:
                detail = f"{detail}; {elapsed:.2f} s"
            return ok, detail
        run.__name__ = check.__name__
        run.__doc__ = check.__doc__
        return run
    return wrap


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# -- 1 ------------------------------------------------------------------------

CERT_CASES = ([(1, dict(n=n, m=m)) for n in (2, 3, 4) for m in (2, 3, 4)]
              + [(2, dict(m=m)) for m in (3, 4, 5)]
              + [(3, dict(alpha=a)) for a in (F(1, 10), F(1, 4), F(2, 5), F(9, 20))]
              + [(4, dict(nu=v)) for v in (F(1, 10), F(3, 10))]
              + [(5, dict(n=n, m=2)) for n in (3, 4)])


def criterion_1():
    """Exhaustive certification of every small theorem instance."""
    failures, slowest = [], 0.0
    for theorem, kwargs in CERT_CASES:
        start = time.perf_counter()
        cert = certify(theorem, **kwargs)
        elapsed = time.perf_counter() - start
        slowest = max(slowest, elapsed)
        if not cert.certified or cert.exploration.min_forced < 1 or elapsed >= 10:
            failures.append(f"thm{theorem} {kwargs}")
    detail = f"{len(CERT_CASES) - len(failures)}/{len(CERT_CASES)} certified, slowest {slowest:.2f} s"
    if failures:
        detail += "; failed: " + ", ".join(failures)
    return not failures, detail


# -- 2 ------------------------------------------------------------------------

def criterion_2():
    """The forced swap of the impact script has impact exactly alpha."""
    bad = []
    for alpha in (F(1, 10), F(1, 4), F(2, 5), F(9, 20)):
        got = certify(3, alpha=alpha).detail.get("first_fit_impact")
        if got != alpha:
            bad.append(f"alpha={alpha} impact={got}")
    return not bad, "all four exact" if not bad else "; ".join(bad)


# -- 3 ------------------------------------------------------------------------

@timed(1)
def criterion_3():
    """choose_gh satisfies both strict inequalities for n in [3, 64]."""
    bad = [n for n in range(3, 65)
           if not (F(1, 3) < (p := choose_gh(n)).h < p.g < F(1, 2) and p.g > (n * n - n) * (1 - 2 * p.h))]
    return not bad, "n=3..64 hold" if not bad else f"violated at {bad}"


# -- 4 ------------------------------------------------------------------------

@timed(5)
def criterion_4():
    """Wire sizes, bulk round-trips and the tolerance trichotomy."""
    sizes = (len(c.OfpTime().encode()), len(c.TimeBundleProperty().encode()),
             len(c.BundleFeaturesRequest().encode()), len(c.BundleFeaturesReply().encode()),
             c.OFP_BUNDLE_FEATURES_PROP_HEADER_SIZE, len(c.FeaturesTimeProperty().encode()))
    if sizes != (16, 24, 8, 8, 4, 72):
        return False, f"sizes {sizes}"
    rng = random.Random(4)
    mismatches = 0
    for kind in ALL:
        for _ in range(10_000):
            msg = random_message(kind, rng)
            raw = msg.encode()
            back = c.decode(raw, kind)
            mismatches += back != msg or back.encode() != raw
    cfg = ToleranceConfig()
    wrong = 0
    for _ in range(10_000):
        now = rng.randrange(3 * NS_PER_S, 10**15)
        delta = rng.randrange(-3 * NS_PER_S, 3 * NS_PER_S)
        verdict = check_tolerance(c.OfpTime.from_ns(now), c.OfpTime.from_ns(now + delta), cfg)
        if delta > NS_PER_S:
            expected = c.ExtensionError(c.OFPET_BUNDLE_FAILED, c.OFPBFC_SCHED_FUTURE)
        elif delta < -NS_PER_S:
            expected = c.ExtensionError(c.OFPET_BUNDLE_FAILED, c.OFPBFC_SCHED_PAST)
        elif delta <= 0:
            expected = ExecuteNow()
        else:
            expected = ExecuteAt(c.OfpTime.from_ns(now + delta))
        wrong += verdict != expected
    ok = mismatches == 0 and wrong == 0
    return ok, f"sizes ok, {len(ALL)}x10000 round-trips, {mismatches} mismatches, {wrong} trichotomy errors"


# -- 5 ------------------------------------------------------------------------

def figure_6a_csv():
    return run_figure("6a", SEEDS, jobs=1, base=TYPE_I)


def mean_loss_by(text, strategy):
    groups: dict = {}
    for r in rows(text):
        if r["strategy"] == strategy:
            groups.setdefault(int(r["n"]), []).append(float(r["lost_packets"]))
    return {n: statistics.fmean(v) for n, v in sorted(groups.items())}


@timed(60)
def criterion_5():
    """Untimed loss grows linearly with n while Time4 stays below one packet."""
    text = figure_6a_csv()
    _CSV[5] = text
    untimed = mean_loss_by(text, "Untimed")
    time4 = mean_loss_by(text, "Time4")
    ns = np.array(list(untimed), dtype=float)
    ys = np.array(list(untimed.values()))
    slope, intercept = np.polyfit(ns, ys, 1)
    residual = ys - (slope * ns + intercept)
    r2 = 1 - float(residual @ residual) / float(((ys - ys.mean()) ** 2).sum())
    increasing = all(a < b for a, b in zip(ys, ys[1:]))
    t4 = list(time4.values())
    ok = list(untimed) == list(N_GRID) and increasing and r2 > 0.9 and max(t4) < 1 and max(t4) - min(t4) < 1
    fmt = lambda d: " ".join(f"{n}:{v:.3g}" for n, v in d.items())  # noqa: E731
    return ok, f"untimed {fmt(untimed)} R2={r2:.4f}; time4 {fmt(time4)}"


# -- 6 ------------------------------------------------------------------------

def duration_csv():
    params = TYPE_I.replace(install_range_ns=0)
    specs = [RunSpec("duration", StrategyConfig("Untimed"), params, n) for n in N_GRID]
    return loss_csv(run_specs(specs))


def criterion_6():
    """Untimed update duration is exactly (n-1) delta at zero install latency."""
    text = duration_csv()
    _CSV[6] = text
    delta_ms = F(TYPE_I.delta_ns, NS_PER_MS)
    bad = [(r["n"], r["update_duration_ms"]) for r in rows(text)
           if F(r["update_duration_ms"]) != (int(r["n"]) - 1) * delta_ms]
    return not bad, f"n={list(N_GRID)} exact" if not bad else f"mismatch {bad}"


# -- 7 ------------------------------------------------------------------------

@timed(120)
def criterion_7():
    """Time4+SWAN loses no more than SWAN and needs less scratch for <= 0.2 packets."""
    text = run_figure("6c", SEEDS, jobs=1, base=TYPE_I)
    _CSV[7] = text
    means: dict = {}
    for r in rows(text):
        means.setdefault((r["strategy"], F(r["param"])), []).append(float(r["lost_packets"]))
    means = {k: statistics.fmean(v) for k, v in means.items()}
    swan = [means[("Swan", s)] for s in SCRATCH_GRID]
    hybrid = [means[("Time4Swan", s)] for s in SCRATCH_GRID]
    dominated = all(h <= s for h, s in zip(hybrid, swan))
    strict = sum(h < s for h, s in zip(hybrid, swan))

    def threshold(values):
        hits = [s for s, v in zip(SCRATCH_GRID, values) if v <= 0.2]
        return min(hits) if hits else float("inf")

    t_swan, t_hybrid = threshold(swan), threshold(hybrid)
    ok = dominated and strict >= 3 and t_hybrid < t_swan
    pairs = " ".join(f"{float(s):g}:{a:.3g}/{b:.3g}" for s, a, b in zip(SCRATCH_GRID, swan, hybrid))
    return ok, (f"swan/hybrid {pairs}; strict at {strict} points; "
                f"scratch for <=0.2: swan {t_swan}, hybrid {t_hybrid}")


# -- 8 ------------------------------------------------------------------------

LATENCY_PAIRS = [(0, 0), (ms("0.3"), ms("1.1")), (ms("2.5"), 0), (ms(1), ms(3))]


def closed_form_csv():
    params = TYPE_I.replace(install_range_ns=0)
    specs = [RunSpec("closed-form", StrategyConfig("Untimed"), params, 2, inject=(("o1", a), ("o2", b)))
             for a, b in LATENCY_PAIRS]
    return loss_csv(run_specs(specs))


def criterion_8():
    """Simulated loss of a two-command untimed swap equals the hand integral."""
    text = closed_form_csv()
    _CSV[8] = text
    worst = 0.0
    oversubscription_bps = 5 * 10**6  # the second swap flow piles onto a full 10 Mbps link
    for (a, b), r in zip(LATENCY_PAIRS, rows(text)):
        gap_s = (TYPE_I.delta_ns + b - a) / NS_PER_S
        expected = oversubscription_bps * gap_s / TYPE_I.packet_size_bits
        worst = max(worst, abs(float(r["lost_packets"]) - expected) / expected)
    return worst <= 1e-9, f"worst relative error {worst:.2e} over {len(LATENCY_PAIRS)} latency pairs"


# -- 9 ------------------------------------------------------------------------

def video_runs():
    bounded = video_csv(SEEDS, TYPE_I.replace(sched_error_ns=ms("1.2")))
    exact = video_csv(SEEDS, TYPE_I.replace(sched_error_ns=0))
    injected = video_csv(SEEDS, TYPE_I.replace(sched_error_ns=ms("1.2")), ms("0.4"))
    return bounded + exact + injected, (bounded, exact, injected)


@timed(10)
def criterion_9():
    """Video swap errors stay inside the scheduling bound and track an injected offset."""
    text, (bounded, exact, injected) = video_runs()
    _CSV[9] = text
    errors = [float(r["error_ms"]) for r in rows(bounded)]
    within = all(abs(e) <= 1.2 for e in errors)
    misrouted = sum(float(r["misrouted_packets"]) for r in rows(exact))
    packet_time_ms = TYPE_I.packet_size_bits / 10**7 * 1000
    mean_injected = statistics.fmean(float(r["error_ms"]) for r in rows(injected))
    tracks = abs(mean_injected - 0.4) <= packet_time_ms
    ok = within and misrouted == 0 and tracks
    return ok, (f"max |error| {max(map(abs, errors)):.3f} ms; misrouted at zero error {misrouted:g}; "
                f"mean error with +0.4 ms {mean_injected:.3f} ms (packet time {packet_time_ms:g} ms)")


# -- 10 -----------------------------------------------------------------------

def criterion_10():
    """Repeating criteria 5-9 with the same seeds gives byte-identical CSV."""
    again = {
        5: figure_6a_csv,
        6: duration_csv,
        7: lambda: run_figure("6c", SEEDS, jobs=1, base=TYPE_I),
        8: closed_form_csv,
        9: lambda: video_runs()[0],
    }
    differing = []
    for key, produce in again.items():
        first = _CSV.get(key)
        if first is None:
            first = produce()
        if produce().encode() != first.encode():
            differing.append(key)
    parallel = cli.main(["simulate", "--figure", "6d", "--seeds", "6", "--jobs", "2", "--out", "/dev/null"]) == 0
    return not differing and parallel, ("identical bytes for criteria 5-9" if not differing
                                         else f"bytes differ for {differing}")


CRITERIA = {
    1: timed(10 * len(CERT_CASES))(criterion_1),
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def report_line(number, ok, detail):
    return f"acceptance {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


def _check(number):
    ok, detail = CRITERIA[number]()
    RESULTS[number] = (ok, detail)
    print(report_line(number, ok, detail))
    assert ok, detail


def test_criterion_01_theorem_certification(): _check(1)
def test_criterion_02_impact_exactness(): _check(2)
def test_criterion_03_choose_gh_inequalities(): _check(3)
def test_criterion_04_wire_conformance(): _check(4)
def test_criterion_05_untimed_vs_time4_shape(): _check(5)
def test_criterion_06_update_duration(): _check(6)
def test_criterion_07_hybrid_dominance(): _check(7)
def test_criterion_08_closed_form_loss(): _check(8)
def test_criterion_09_video_swap(): _check(9)
def test_criterion_10_determinism(): _check(10)


if __name__ == "__main__":
    failed = 0
    for number, check in CRITERIA.items():
        ok, detail = check()
        failed += not ok
        print(report_line(number, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
