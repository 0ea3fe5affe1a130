import math
import random

import numpy as np
import pytest
import scipy.stats

from smoothnet.fastwalk import CENSORED, FastWalkEngine
from smoothnet.generators import (
    clique_plus_isolate,
    dynamic_star,
    lollipop_dynamic,
    spooling_dynamic,
    static_path,
)
from smoothnet.graph import DynamicGraph, NetworkType, StaticGraph
from smoothnet.processes import (
    DisconnectedRound,
    EnumerationTooLarge,
    SupportSequence,
    build_support_sequence,
    exact_hitting_time_from_transitions,
    exact_hitting_time_periodic,
    exact_smoothed_transition,
    flood,
    random_walk_hit,
    validate_support_sequence,
    walk_matrix,
)
from smoothnet.smoothing import SmoothingConfig, k_smooth_dynamic


def survival_sum(mats, u, v, tol=1e-13, max_steps=10**6):
    """E[T] = sum_t P(T > t), by pushing the distribution forward with v absorbing."""
    dist = np.zeros(mats[0].shape[0])
    dist[u] = 1.0
    total, t = 0.0, 0
    while dist.sum() > tol and t < max_steps:
        total += dist.sum()
        dist = dist @ mats[t % len(mats)]
        dist[v] = 0.0
        t += 1
    return total


# -- flooding -------------------------------------------------------------------


@pytest.mark.parametrize("n", [4, 16, 64])
def test_unsmoothed_spooling_needs_n_minus_1_rounds(n):
    res = flood(spooling_dynamic(n), 0, 10 * n)
    assert res.completion_round == n - 1
    assert res.informed_history[:3] == (1, 2, 3)


def test_flood_on_complete_graph_is_one_round():
    g = StaticGraph.from_edges(5, [(a, b) for a in range(5) for b in range(a + 1, 5)])
    assert flood(DynamicGraph.constant(g), 3, 5).completion_round == 1


def test_flood_censored_when_disconnected():
    res = flood(clique_plus_isolate(6), 0, 20)
    assert not res.completed and res.informed_history[-1] == 5 and len(res.informed_history) == 21


def test_flood_history_monotone_under_smoothing():
    res = flood(k_smooth_dynamic(spooling_dynamic(64), SmoothingConfig(2), 4), 0, 640)
    hist = res.informed_history
    assert all(b >= a for a, b in zip(hist, hist[1:])) and res.completed and hist[-1] == 64


def test_flood_respects_finite_length():
    h = DynamicGraph.from_sequence([StaticGraph.from_edges(3, [(0, 1)])] * 2)
    res = flood(h, 0, 10)
    assert not res.completed and len(res.informed_history) == 3


# -- walks ----------------------------------------------------------------------


def test_walk_trivial_cases():
    h = static_path(4)
    assert random_walk_hit(h, 2, 2, 5, random.Random(0)).hit_steps == 0
    assert random_walk_hit(static_path(2), 0, 1, 5, random.Random(0)).hit_steps == 1
    # An isolated loopless node never moves.
    res = random_walk_hit(clique_plus_isolate(5), 4, 0, 50, random.Random(0))
    assert res.censored and res.trajectory_length == 50


def test_walk_matrix_rows_are_stochastic():
    for g in (dynamic_star(6)[2], clique_plus_isolate(5)[1]):
        assert np.allclose(walk_matrix(g).sum(axis=1), 1.0)


def test_exact_hitting_times_simple_graphs():
    k4 = StaticGraph.from_edges(4, [(a, b) for a in range(4) for b in range(a + 1, 4)])
    assert exact_hitting_time_periodic(DynamicGraph.constant(k4), 0, 1) == pytest.approx(3.0)
    assert exact_hitting_time_periodic(static_path(5), 0, 4) == pytest.approx(16.0)
    assert exact_hitting_time_periodic(static_path(5), 2, 2) == 0.0


@pytest.mark.parametrize("n", [8, 16, 32])
def test_lollipop_clique_to_tail(n):
    assert exact_hitting_time_periodic(lollipop_dynamic(n), 0, n - 1) == pytest.approx(n**3 / 8)


def test_unreachable_target_is_infinite():
    assert math.isinf(exact_hitting_time_periodic(clique_plus_isolate(5), 0, 4))


DYNAMIC_STAR_H = {6: 132, 7: 325, 8: 774, 9: 1799, 10: 4104, 11: 9225}


@pytest.mark.parametrize("n", sorted(DYNAMIC_STAR_H))
def test_dynamic_star_exact_values(n):
    h = dynamic_star(n)
    exact = exact_hitting_time_periodic(h, n - 2, n - 1)
    assert exact == pytest.approx(DYNAMIC_STAR_H[n], rel=1e-9)
    assert exact >= 2 ** (n - 2)


@pytest.mark.parametrize("n", [6, 7, 8])
def test_exact_solver_matches_survival_sum(n):
    h = dynamic_star(n)
    mats = [walk_matrix(h[r]) for r in range(1, n)]
    assert survival_sum(mats, n - 2, n - 1) == pytest.approx(exact_hitting_time_from_transitions(mats, n - 2, n - 1), rel=1e-9)


def test_smoothed_exact_values():
    # Clique plus isolate, any-graph smoothing with k=1: each step adds the walker's
    # edge to the isolate with prob 1/11 and then takes it with prob 1/4.
    cfg = SmoothingConfig(1, NetworkType.ALL)
    assert exact_hitting_time_periodic(clique_plus_isolate(5), 0, 4, cfg) == pytest.approx(44.0)
    star = exact_hitting_time_periodic(dynamic_star(5), 3, 4, SmoothingConfig(1))
    mats = [exact_smoothed_transition(dynamic_star(5)[r], SmoothingConfig(1)) for r in range(1, 5)]
    assert star == pytest.approx(survival_sum(mats, 3, 4), rel=1e-9)
    assert star == pytest.approx(14.623936033015209, rel=1e-9)


def test_smoothed_transition_is_limited_to_tiny_graphs():
    with pytest.raises(EnumerationTooLarge):
        exact_smoothed_transition(dynamic_star(7)[1], SmoothingConfig(1))


def _mean_within(samples, target, sigmas=4.0):
    samples = np.asarray(samples, dtype=float)
    se = samples.std(ddof=1) / math.sqrt(len(samples))
    return abs(samples.mean() - target) <= sigmas * se


def test_fast_engine_matches_exact():
    eng = FastWalkEngine(dynamic_star(5), SmoothingConfig(1))
    hits = eng.hit_times(3, 4, 10**6, range(20000))
    assert (hits != CENSORED).all() and _mean_within(hits, 14.623936033015209)

    eng = FastWalkEngine(clique_plus_isolate(5), SmoothingConfig(1, NetworkType.ALL))
    assert _mean_within(eng.hit_times(0, 4, 10**6, range(20000)), 44.0)

    eng = FastWalkEngine(dynamic_star(6), SmoothingConfig(0))
    assert _mean_within(eng.hit_times(4, 5, 10**6, range(20000)), 132.0)


def test_fast_engine_is_seed_deterministic_and_censors():
    eng = FastWalkEngine(dynamic_star(8), SmoothingConfig(1))
    a = eng.hit_times(6, 7, 10**5, [1, 2, 3])
    assert (a == eng.hit_times(6, 7, 10**5, [1, 2, 3])).all()
    assert (FastWalkEngine(dynamic_star(12), SmoothingConfig(0)).hit_times(10, 11, 3, [1]) == CENSORED).all()


def test_fast_engine_one_step_law_matches_enumeration():
    h = dynamic_star(5)
    cfg = SmoothingConfig(2)
    exact = exact_smoothed_transition(h[3], cfg)[1]
    ends = FastWalkEngine(h, cfg).positions_after(1, 1, range(40000), start_round=3)
    counts = np.bincount(ends, minlength=5)
    support = exact > 0
    assert counts[~support].sum() == 0
    p = scipy.stats.chisquare(counts[support], exact[support] * len(ends)).pvalue
    assert p > 1e-3


def test_fast_engine_rejects_unsupported_inputs():
    with pytest.raises(ValueError):
        FastWalkEngine(spooling_dynamic(8), SmoothingConfig(1))
    with pytest.raises(ValueError):
        FastWalkEngine(dynamic_star(6), SmoothingConfig(1, NetworkType.PAIRING))


def test_reference_walk_matches_exact():
    h = dynamic_star(5)
    cfg = SmoothingConfig(1)
    hits = [
        random_walk_hit(k_smooth_dynamic(h, cfg, s), 3, 4, 10**5, random.Random(s)).hit_steps for s in range(3000)
    ]
    assert _mean_within(hits, 14.623936033015209)


# -- support sequences ---------------------------------------------------------


def test_support_sequence_on_spooling():
    h = spooling_dynamic(12)
    seq = build_support_sequence(h, 11, 9, 5)
    assert validate_support_sequence(h, seq)
    assert len(seq.sets) == 6 and seq.sets[0] == {11}
    assert all(len(s) == i + 1 for i, s in enumerate(seq.sets))


def test_support_sequence_validation_catches_tampering():
    h = spooling_dynamic(12)
    seq = build_support_sequence(h, 11, 9, 5)
    bad = SupportSequence(seq.target, seq.t, seq.l, seq.sets[:-1] + (seq.sets[-1] | {0, 1},), seq.added)
    assert not validate_support_sequence(h, bad)
    with pytest.raises(ValueError):
        build_support_sequence(h, 0, 3, 3)


def test_support_sequence_needs_connected_rounds():
    with pytest.raises(DisconnectedRound):
        build_support_sequence(clique_plus_isolate(5), 4, 5, 2)
