"""Monte Carlo simulator: determinism, unbiasedness, polarization absorption."""

import numpy as np

import signedvoter as sv

from helpers import random_graph, small_family


def test_mc_step_absorbing_all_white():
    rng = np.random.default_rng(0)
    G = random_graph(rng, 10, neg_prob=0.0)
    colors = np.ones(10, dtype=bool)
    assert sv.mc_step(G, colors, rng).all()


def test_mc_step_deterministic_flips():
    rng = np.random.default_rng(1)
    loop = sv.from_edge_list([(0, 0, -1)])
    c = np.array([True])
    for expect in (False, True, False):
        c = sv.mc_step(loop, c, rng)
        assert c[0] == expect
    cyc = sv.from_edge_list([(0, 1, 1), (1, 0, 1)])
    out = sv.mc_step(cyc, np.array([True, False]), rng)
    assert out.tolist() == [False, True]


def test_mc_run_all_seeds_all_positive():
    rng = np.random.default_rng(2)
    G = random_graph(rng, 12, neg_prob=0.0)
    stats = sv.mc_run(G, range(12), t=6, trials=500, rng_seed=3)
    assert np.array_equal(stats.mean, np.full(7, 12.0))
    assert np.array_equal(stats.stderr, np.zeros(7))


def test_mc_run_determinism():
    rng = np.random.default_rng(3)
    G = random_graph(rng, 15)
    a = sv.mc_run(G, [1, 5], t=8, trials=3000, rng_seed=17, track_nodes=True)
    b = sv.mc_run(G, [1, 5], t=8, trials=3000, rng_seed=17, track_nodes=True)
    assert np.array_equal(a.mean, b.mean)
    assert np.array_equal(a.stderr, b.stderr)
    assert np.array_equal(a.node_freq, b.node_freq)
    c = sv.mc_run(G, [1, 5], t=8, trials=3000, rng_seed=18)
    assert not np.array_equal(a.mean, c.mean)


def test_mc_run_unbiased_against_exact_propagation():
    rng = np.random.default_rng(4)
    for _ in range(4):
        n = int(rng.integers(8, 25))
        G = random_graph(rng, n)
        seeds = rng.choice(n, size=3, replace=False)
        t = 12
        stats = sv.mc_run(G, seeds, t=t, trials=20000, rng_seed=int(rng.integers(2**31)),
                          track_nodes=True)
        exact = sv.propagate(G, sv.indicator(n, seeds), t)
        totals = exact.sum(axis=1)
        z = np.abs(stats.mean - totals) / np.maximum(stats.stderr, 1e-9)
        assert z[1:].max() <= 4.0
        # ~1000 binomial comparisons across nodes/steps/graphs: the expected
        # max of that many z-scores sits near 3.3, so gate at 4 sigma
        sigma = np.sqrt(exact * (1 - exact) / stats.trials)
        assert np.all(np.abs(stats.node_freq - exact) <= 4.0 * sigma + 5e-4)


def test_mc_alias_respects_weights():
    # two positive out-edges with weights 3:1 toward a white and a black node
    G = sv.from_edge_list([(0, 1, 3), (0, 2, 1), (1, 0, 1), (2, 0, 1)])
    stats = sv.mc_run(G, [1], t=1, trials=40000, rng_seed=5, track_nodes=True)
    # node 0 is white iff it picked the heavier edge to white node 1
    p = stats.node_freq[1, 0]
    assert abs(p - 0.75) <= 3 * np.sqrt(0.75 * 0.25 / 40000)


def test_mc_polarize_absorbs_and_matches_theory():
    rng = np.random.default_rng(6)
    G = small_family(rng, "balanced")
    bal = sv.classify_balance(np.arange(G.n), G)
    pi = sv.stationary(np.arange(G.n), G)
    seeds = [0, 2, 9]
    pol = sv.mc_polarize(G, bal.in_s, seeds, trials=4000, rng_seed=7)
    assert pol.unabsorbed == 0
    assert pol.s_white + pol.s_black == 4000
    fractions = [f for _, f in pol.checkpoints]
    assert all(b >= a for a, b in zip(fractions, fractions[1:]))
    pihat = np.where(bal.in_s, pi, -pi)
    p_theory = float(pihat @ (sv.indicator(G.n, seeds) - 0.5)) + 0.5
    p_hat = pol.s_white / 4000
    sigma = np.sqrt(p_theory * (1 - p_theory) / 4000)
    assert abs(p_hat - p_theory) <= 3.5 * sigma


def test_mc_polarized_state_is_absorbing():
    rng = np.random.default_rng(8)
    G = small_family(rng, "balanced")
    bal = sv.classify_balance(np.arange(G.n), G)
    colors = bal.in_s.copy()
    for _ in range(5):
        colors = sv.mc_step(G, colors, rng)
        assert np.array_equal(colors, bal.in_s)


def test_mc_run_polarization_counters():
    rng = np.random.default_rng(9)
    G = small_family(rng, "balanced")
    bal = sv.classify_balance(np.arange(G.n), G)
    stats = sv.mc_run(G, [0, 1], t=400, trials=300, rng_seed=10, partition=bal.in_s)
    assert stats.s_white is not None and stats.s_black is not None
    assert stats.s_white + stats.s_black <= 300
    assert stats.s_white + stats.s_black >= 290  # nearly all absorbed by t=400
